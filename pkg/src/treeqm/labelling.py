"""Chainability, the classifier over the three action regimes, and labellings.

The classifier decides, for a suppressed tree view, whether the action is
(bounded evidence for) highly transitive on geodesics, carries an invariant
end-pointing orientation, or admits a labelling realizing every good word.
Verdicts are bounded-radius certificates, never proofs beyond the scanned
radius; the certificate always says which.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .errors import Inconclusive, ParseError, PreconditionViolated, RealizationFailed
from .instance import GroupElement
from .tree import OrientedPath, TreeView, Vertex

LABEL_LETTERS = "abc"


# -- chainability ---------------------------------------------------------------


def chainable(
    view: TreeView, gamma1: OrientedPath, gamma2: OrientedPath
) -> tuple[bool, GroupElement | None, GroupElement | None]:
    """Whether translates of the paths concatenate at a basepoint-orbit vertex.

    On success returns witnesses (xi, g) with xi*gamma1 ending where g*gamma2
    starts, the two meeting only at that vertex.
    """
    for path in (gamma1, gamma2):
        if not (view.is_o_vertex(path.start) and view.is_o_vertex(path.end)):
            raise PreconditionViolated("chainability is defined for o-geodesics")
        if path.raw_length == 0:
            raise PreconditionViolated("chainability needs paths of positive length")
    inst = view.instance
    xi = inst.invert(view.vertex_element(gamma1.end))
    moved1 = view.act_path(xi, gamma1)
    tau2 = inst.invert(view.vertex_element(gamma2.start))
    moved2 = view.act_path(tau2, gamma2)
    blocked = moved1.vertices[-2]
    for sigma in view.stabilizer(view.base):
        if view.act(sigma, moved2.vertices[1]) != blocked:
            return True, xi, inst.multiply(sigma, tau2)
    return False, None, None


# -- transitivity scan -------------------------------------------------------------


class MinimalK(NamedTuple):
    """Result of the minimal-nontransitivity scan.

    ``k`` is None when the action looks transitive on all sizes up to
    ``checked`` (a bounded certificate, not a proof).
    """

    k: int | None
    checked: int
    counts: dict[int, int]


def minimal_nontransitive_k(view: TreeView, kmax: int, cache=None) -> MinimalK:
    """Smallest k <= kmax with at least two orbits of o(k)-geodesics."""
    if kmax < 1:
        raise PreconditionViolated("kmax must be at least 1")
    counts: dict[int, int] = {}
    for n in range(1, kmax + 1):
        counts[n] = len(view.enumerate_orbits(n, "orbit", cache=cache))
        if counts[n] >= 2:
            return MinimalK(n, n, counts)
    return MinimalK(None, kmax, counts)


# -- the chainability digraph ----------------------------------------------------


@dataclass(frozen=True)
class ChainabilityGraph:
    """Directed graph on vertices 1..3 recording which o-edges chain."""

    edges: frozenset

    def has(self, i: int, j: int) -> bool:
        return (i, j) in self.edges

    def out_degree(self, i: int) -> int:
        return sum(1 for (a, _b) in self.edges if a == i)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def build_lambda(
    view: TreeView, e1: OrientedPath, e2: OrientedPath, e3: OrientedPath
) -> ChainabilityGraph:
    """Chainability digraph of three o-edge representatives.

    The inputs must represent three distinct orbits and meet only at their
    common starting vertex.
    """
    triple = (e1, e2, e3)
    start = e1.start
    keys = [view.orbit_key(p) for p in triple]
    for idx in range(3):
        for jdx in range(idx + 1, 3):
            if keys[idx] == keys[jdx]:
                raise PreconditionViolated(f"e{idx + 1} and e{jdx + 1} share an orbit")
            if triple[jdx].start != start:
                raise PreconditionViolated(f"e{jdx + 1} does not start at the common vertex")
            if triple[idx].vertices[1] == triple[jdx].vertices[1]:
                raise PreconditionViolated(
                    f"e{idx + 1} and e{jdx + 1} share more than the start vertex"
                )
    edges = set()
    for i in range(3):
        for j in range(3):
            ok, _, _ = chainable(view, triple[i], triple[j])
            if ok:
                edges.add((i + 1, j + 1))
    return ChainabilityGraph(frozenset(edges))


# -- labellings --------------------------------------------------------------------


@dataclass
class Labelling:
    """Letters for every orbit of o(k)-geodesics, plus the realized alphabet."""

    k: int
    labels: dict[str, str]
    provenance: str
    a_keys: tuple[str, ...]
    b_keys: tuple[str, ...]

    def label_of_key(self, key: str) -> str:
        return self.labels.get(key, "c")

    def validity_check(self, view: TreeView, reps: dict[str, OrientedPath]) -> bool:
        """Either a and b each label one orbit, or no a-inverse is labelled b."""
        if len(self.a_keys) == 1 and len(self.b_keys) == 1:
            return True
        for key in self.a_keys:
            reversed_key = view.orbit_key(reps[key].reverse())
            if self.label_of_key(reversed_key) == "b":
                return False
        return True


def _make_labelling(
    view: TreeView,
    k: int,
    reps: dict[str, OrientedPath],
    a_keys: Sequence[str],
    b_keys: Sequence[str],
    provenance: str,
) -> Labelling:
    labels = {}
    for key in reps:
        if key in a_keys:
            labels[key] = "a"
        elif key in b_keys:
            labels[key] = "b"
        else:
            labels[key] = "c"
    lab = Labelling(k, labels, provenance, tuple(a_keys), tuple(b_keys))
    if not lab.validity_check(view, reps):
        raise Inconclusive(
            "labelling fails the inverse-compatibility requirement; "
            "this contradicts the case analysis and suggests a bug"
        )
    return lab


def label_of_path(view: TreeView, labelling: Labelling, path: OrientedPath) -> str:
    """The word whose i-th letter labels the o(k)-window at the i-th o-vertex."""
    marks = view.o_positions(path)
    k = labelling.k
    if len(marks) - 1 < k:
        return ""
    letters = []
    for i in range(len(marks) - k):
        window = path.slice(marks[i], marks[i + k])
        letters.append(labelling.label_of_key(view.orbit_key(window)))
    return "".join(letters)


# -- o-edge enumeration at a vertex ----------------------------------------------


def o_extensions(view: TreeView, tail: Sequence[Vertex]) -> list[list[Vertex]]:
    """All o(1)-geodesic continuations of a path ending at an o-vertex.

    Avoids backtracking into the path's last edge; results are sorted by
    their relative letter sequence for determinism.
    """
    end = tail[-1]
    forbidden = tail[-2] if len(tail) >= 2 else None
    out: list[list[Vertex]] = []

    def grow(chunk: list[Vertex]) -> None:
        for w in view.raw_neighbors(chunk[-1]):
            if len(chunk) >= 2 and w == chunk[-2]:
                continue
            if len(chunk) == 1 and w == forbidden:
                continue
            if view.is_o_vertex(w):
                out.append(chunk + [w])
            elif len(chunk) <= 8:
                grow(chunk + [w])

    grow([end])
    out.sort(key=lambda vs: view.path_letters(OrientedPath(tuple(vs))))
    return out


def o_edges_at_base(view: TreeView) -> list[OrientedPath]:
    """All oriented o(1)-geodesics starting at the base vertex, sorted."""
    return [OrientedPath(tuple(vs)) for vs in o_extensions(view, [view.base])]


# -- realization -------------------------------------------------------------------


def realize_word(
    view: TreeView, labelling: Labelling, word: str, budget: int = 500_000
) -> OrientedPath:
    """An o-geodesic from the base whose label is the given word.

    Greedy left-to-right extension with backtracking over junction choices.
    """
    if any(ch not in LABEL_LETTERS for ch in word):
        raise ParseError(f"word {word!r} uses letters outside {{a,b,c}}")
    k = labelling.k
    target_steps = len(word) + k - 1 if word else k - 1
    attempts = 0
    no_candidate_at = -1

    def extend(vertices: list[Vertex], steps: int) -> list[Vertex] | None:
        nonlocal attempts, no_candidate_at
        if steps == target_steps:
            return vertices
        found_any = False
        for ext in o_extensions(view, vertices):
            attempts += 1
            if attempts > budget:
                raise RealizationFailed(
                    f"search budget {budget} exhausted realizing {word!r}", steps
                )
            new_vertices = vertices + ext[1:]
            new_steps = steps + 1
            if new_steps >= k:
                marks = view.o_positions(OrientedPath(tuple(new_vertices)))
                window = OrientedPath(tuple(new_vertices[marks[new_steps - k] : marks[new_steps] + 1]))
                want = word[new_steps - k]
                if labelling.label_of_key(view.orbit_key(window)) != want:
                    continue
            found_any = True
            result = extend(new_vertices, new_steps)
            if result is not None:
                return result
        if not found_any and steps >= no_candidate_at:
            no_candidate_at = steps
        return None

    result = extend([view.base], 0)
    if result is None:
        raise RealizationFailed(
            f"no continuation exists realizing {word!r}; the labelling cannot "
            "realize this word (labelling bug rather than budget)",
            max(no_candidate_at - k + 1, 0),
        )
    return OrientedPath(tuple(result))


# -- case 2c orientation ------------------------------------------------------------


def check_one_incoming(
    oriented_edges: Iterable[tuple], o_vertices: Iterable
) -> list:
    """Vertices among o_vertices whose incoming-edge count is not exactly one.

    ``oriented_edges`` are (tail, head) pairs; pure data, so unit tests can
    feed hand-built trees.
    """
    incoming: dict = {}
    for _tail, head in oriented_edges:
        incoming[head] = incoming.get(head, 0) + 1
    return [v for v in o_vertices if incoming.get(v, 0) != 1]


def _walks_to_o(view: TreeView, start: Vertex, avoid: Vertex) -> list[list[Vertex]]:
    """Non-backtracking raw walks from start to the nearest o-vertices."""
    outs: list[list[Vertex]] = []

    def grow(chunk: list[Vertex]) -> None:
        prev = chunk[-2] if len(chunk) >= 2 else avoid
        for x in view.raw_neighbors(chunk[-1]):
            if x == prev:
                continue
            if view.is_o_vertex(x):
                outs.append(chunk + [x])
            elif len(chunk) <= 8:
                grow(chunk + [x])

    grow([start])
    return outs


def o_edges_through(view: TreeView, u: Vertex, w: Vertex) -> list[OrientedPath]:
    """All o(1)-geodesics whose raw path traverses u then w consecutively."""
    if view.is_o_vertex(w):
        forwards = [[u, w]]
    else:
        forwards = [[u] + walk for walk in _walks_to_o(view, w, avoid=u)]
    out = []
    for fwd in forwards:
        if view.is_o_vertex(u):
            out.append(OrientedPath(tuple(fwd)))
        else:
            for back in _walks_to_o(view, u, avoid=w):
                out.append(OrientedPath(tuple(reversed(back)) + tuple(fwd[1:])))
    return out


def construct_invariant_orientation(
    view: TreeView, e1: OrientedPath, radius: int
) -> dict:
    """Orient raw ball edges by which direction an e1-orbit o-edge crosses them.

    Checks that the rule is consistent, covers every edge, and gives each
    interior o-vertex exactly one incoming edge; a failed check raises
    Inconclusive rather than guessing.
    """
    key_pos = view.orbit_key(e1)
    seen = {view.base}
    ball = [view.base]
    frontier = [view.base]
    for _ in range(radius):
        nxt = []
        for v in frontier:
            for x in view.raw_neighbors(v):
                if x not in seen:
                    seen.add(x)
                    ball.append(x)
                    nxt.append(x)
        frontier = nxt
    oriented: dict[frozenset, tuple[Vertex, Vertex]] = {}
    for u in ball:
        for w in view.raw_neighbors(u):
            if w not in seen:
                continue
            edge = frozenset((u, w))
            if edge in oriented:
                continue
            fwd = any(view.orbit_key(p) == key_pos for p in o_edges_through(view, u, w))
            bwd = any(view.orbit_key(p) == key_pos for p in o_edges_through(view, w, u))
            if fwd and bwd:
                raise Inconclusive("an edge is crossed by e1-orbit o-edges in both directions")
            if not fwd and not bwd:
                raise Inconclusive("an edge lies in no o-edge of the e1 or inverse orbit")
            oriented[edge] = (u, w) if fwd else (w, u)
    inner = [
        v for v in ball if view.is_o_vertex(v) and view.distance(view.base, v) < radius
    ]
    bad = check_one_incoming(oriented.values(), inner)
    if bad:
        raise Inconclusive(f"{len(bad)} o-vertices lack a unique incoming edge")
    return {
        "radius": radius,
        "edges_oriented": len(oriented),
        "o_vertices_checked": len(inner),
    }


# -- the classifier -------------------------------------------------------------------


@dataclass
class TrichotomyCertificate:
    """Bounded-evidence verdict: exactly one of the three regimes.

    ``verdict`` is "case_i", "case_ii" or "case_iii"; case_i certificates
    only cover sizes up to the scanned bound.
    """

    verdict: str
    k: int | None
    provenance: str | None
    labelling: Labelling | None
    orbit_counts: dict[int, int]
    witnesses: dict
    lambda_edges: list | None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "k": self.k,
            "provenance": self.provenance,
            "label_map": dict(sorted(self.labelling.labels.items())) if self.labelling else None,
            "orbit_counts": {str(n): c for n, c in sorted(self.orbit_counts.items())},
            "witnesses": self.witnesses,
            "lambda_edges": [list(e) for e in self.lambda_edges] if self.lambda_edges else None,
            "notes": self.notes,
        }


def _path_report(view: TreeView, path: OrientedPath) -> dict:
    return {
        "key": view.orbit_key(path),
        "end": view.instance.format_element(view.vertex_element(path.end)),
        "raw_length": path.raw_length,
    }


def _find_case1_triple(grouped: dict[str, list[OrientedPath]]):
    keys = sorted(grouped)
    for i1 in range(len(keys)):
        for i2 in range(i1 + 1, len(keys)):
            for i3 in range(i2 + 1, len(keys)):
                for p1 in grouped[keys[i1]]:
                    for p2 in grouped[keys[i2]]:
                        if p2.vertices[1] == p1.vertices[1]:
                            continue
                        for p3 in grouped[keys[i3]]:
                            if p3.vertices[1] in (p1.vertices[1], p2.vertices[1]):
                                continue
                            return p1, p2, p3
    return None


def _find_case2_triple(grouped: dict[str, list[OrientedPath]]):
    keys = sorted(grouped)
    for key in keys:
        paths = grouped[key]
        for a in range(len(paths)):
            for b in range(a + 1, len(paths)):
                if paths[a].vertices[1] == paths[b].vertices[1]:
                    continue
                used = (paths[a].vertices[1], paths[b].vertices[1])
                for other in keys:
                    if other == key:
                        continue
                    for q in grouped[other]:
                        if q.vertices[1] not in used:
                            return paths[a], paths[b], q
    return None


def classify(
    view: TreeView,
    kmax: int = 8,
    cache=None,
    orientation_radius: int = 4,
) -> TrichotomyCertificate:
    """Run the full case analysis on a suppressed (or already thick) view."""
    if not view.is_free and view.mode != "suppressed":
        raise PreconditionViolated("classify runs on the suppressed view")
    scan = minimal_nontransitive_k(view, kmax, cache=cache)
    counts = scan.counts

    if scan.k is None:
        rep = next(iter(view.enumerate_orbits(1, "orbit", cache=cache).values()))
        if rep.raw_length > 2:
            raise Inconclusive(
                "transitive up to the bound but o-edges are longer than 2; "
                "no case applies at this radius"
            )
        return TrichotomyCertificate(
            verdict="case_i",
            k=None,
            provenance=None,
            labelling=None,
            orbit_counts=counts,
            witnesses={"l": rep.raw_length, "checked_up_to": scan.checked},
            lambda_edges=None,
            notes=[
                f"transitive on all o(n)-geodesics for n <= {scan.checked}; "
                "bounded evidence only - increase kmax for stronger evidence"
            ],
        )

    k = scan.k
    reps = view.enumerate_orbits(k, "orbit", cache=cache)

    if k > 1:
        keys = sorted(reps)
        labelling = _make_labelling(view, k, reps, [keys[0]], [keys[1]], "3a")
        return TrichotomyCertificate(
            verdict="case_iii",
            k=k,
            provenance="3a",
            labelling=labelling,
            orbit_counts=counts,
            witnesses={
                "a_orbit": keys[0],
                "b_orbit": keys[1],
                "tie_break": "lexicographically smallest key is labelled a",
            },
            lambda_edges=None,
            notes=[],
        )

    # k == 1: group the o-edges at the base vertex by orbit
    edges = o_edges_at_base(view)
    grouped: dict[str, list[OrientedPath]] = {}
    for p in edges:
        grouped.setdefault(view.orbit_key(p), []).append(p)

    triple = _find_case1_triple(grouped)
    if triple is not None:
        e1, e2, e3 = triple
        graph = build_lambda(view, e1, e2, e3)
        keys3 = [view.orbit_key(p) for p in triple]
        witnesses = {
            "e1": _path_report(view, e1),
            "e2": _path_report(view, e2),
            "e3": _path_report(view, e3),
        }
        # (1a) a bigon with a loop at its b-end
        for i in range(1, 4):
            for j in range(1, 4):
                if i != j and graph.has(i, j) and graph.has(j, i) and graph.has(j, j):
                    labelling = _make_labelling(
                        view, 1, reps, [keys3[i - 1]], [keys3[j - 1]], "1a"
                    )
                    return TrichotomyCertificate(
                        "case_iii", 1, "1a", labelling, counts, witnesses,
                        graph.sorted_edges(), [],
                    )
        loops = [i for i in range(1, 4) if graph.has(i, i)]
        if loops:
            if len(loops) != 3:
                raise Inconclusive("chainability graph has loops at some but not all vertices")
            # (1b) loops everywhere plus a 3-cycle: label both e2 and e3 with b,
            # since a single b-orbit cannot realize both syllables ab and ba
            labelling = _make_labelling(
                view, 1, reps, [keys3[0]], [keys3[1], keys3[2]], "1b"
            )
            return TrichotomyCertificate(
                "case_iii", 1, "1b", labelling, counts, witnesses,
                graph.sorted_edges(), ["label b covers the orbits of both e2 and e3"],
            )
        if all(graph.has(i, j) for i in range(1, 4) for j in range(1, 4) if i != j):
            # (1c) the complete loopless digraph
            labelling = _make_labelling(
                view, 1, reps, [keys3[0]], [keys3[1], keys3[2]], "1c"
            )
            return TrichotomyCertificate(
                "case_iii", 1, "1c", labelling, counts, witnesses,
                graph.sorted_edges(), [],
            )
        raise Inconclusive("chainability graph matches no expected shape")

    pair = _find_case2_triple(grouped)
    if pair is None:
        raise Inconclusive(
            "found neither a three-orbit triple nor a same-orbit pair of o-edges; "
            "increase the budget or check the instance"
        )
    e1, e1_prime, e2 = pair
    witnesses = {
        "e1": _path_report(view, e1),
        "e1_prime": _path_report(view, e1_prime),
        "e2": _path_report(view, e2),
    }
    ok, _, _ = chainable(view, e1, e2)
    if ok:
        # (2a): every o-edge chains with e1; a = orbit(e2), b = orbit(e1)
        k1 = view.orbit_key(e1)
        k2 = view.orbit_key(e2)
        labelling = _make_labelling(view, 1, reps, [k2], [k1], "2a")
        return TrichotomyCertificate(
            "case_iii", 1, "2a", labelling, counts, witnesses, None, [],
        )
    loop_back, _, _ = chainable(view, e1, e1.reverse())
    if loop_back:
        raise Inconclusive(
            "reached the impossible configuration (e1 unchainable with e2 yet "
            "chainable with its reverse); two same-orbit o-edges meeting only "
            "at their end rule this out, so this indicates a bug"
        )
    report = construct_invariant_orientation(view, e1, orientation_radius)
    return TrichotomyCertificate(
        verdict="case_ii",
        k=1,
        provenance=None,
        labelling=None,
        orbit_counts=counts,
        witnesses={**witnesses, "orientation": report},
        lambda_edges=None,
        notes=[f"invariant orientation verified on the radius-{report['radius']} ball"],
    )
