"""Tree views: vertices, geodesics, medians, orbit keys, and enumeration.

Vertices are canonical coset words.  For an amalgam the word is an
alternating sequence of nontrivial transversal letters and the vertex type
records which factor's coset it names; for a free group the word is a
reduced word in signed generators and the type is always 0.

All orbit canonicalization is built on one primitive: translate a path so
that it starts at the base vertex of its start type, then serialize the
step tokens and minimize over the finite stabilizer of that base vertex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

from .errors import (
    DegenerateTree,
    NoOrbitVertexError,
    ParseError,
    PreconditionViolated,
    ResourceLimit,
)
from .instance import (
    FACTOR_A,
    FACTOR_B,
    FACTOR_NAMES,
    ActionInstance,
    AmalgamElement,
    FreeElement,
    GroupElement,
    Letter,
)

DEFAULT_BALL_BUDGET = 2_000_000


class _NoOrbitVertex:
    """Tagged value returned when a path crosses no basepoint-orbit vertex."""

    def __repr__(self) -> str:  # pragma: no cover - repr only
        return "NoOrbitVertex"


NO_ORBIT_VERTEX = _NoOrbitVertex()


class Vertex(NamedTuple):
    word: tuple
    vtype: int


@dataclass(frozen=True)
class OrientedPath:
    """A finite oriented geodesic as a raw vertex sequence."""

    vertices: tuple[Vertex, ...]

    @property
    def start(self) -> Vertex:
        return self.vertices[0]

    @property
    def end(self) -> Vertex:
        return self.vertices[-1]

    @property
    def raw_length(self) -> int:
        return len(self.vertices) - 1

    def reverse(self) -> "OrientedPath":
        return OrientedPath(tuple(reversed(self.vertices)))

    def slice(self, i: int, j: int) -> "OrientedPath":
        return OrientedPath(self.vertices[i : j + 1])


class TreeView:
    """A (raw or valence-2-suppressed) view of the instance's tree.

    Immutable; safe to share.  ``root`` picks which factor's base coset is
    the basepoint for amalgams ("A" or "B").
    """

    def __init__(
        self,
        instance: ActionInstance,
        mode: str = "raw",
        root: str = "A",
        ball_budget: int = DEFAULT_BALL_BUDGET,
    ):
        if mode not in ("raw", "suppressed"):
            raise ParseError(f"unknown view mode {mode!r}")
        if root not in ("A", "B"):
            raise ParseError(f"unknown root {root!r}")
        self.instance = instance
        self.mode = mode
        self.ball_budget = ball_budget
        self.is_free = instance.is_free
        self.root_type = 0 if self.is_free else FACTOR_NAMES.index(root)
        # which vertex types survive in this view (free trees never suppress)
        if self.is_free:
            self.kept_types = (0,)
            self.suppressing = False
        else:
            da, db = instance.coset_counts()
            if mode == "suppressed":
                if da == 2 and db == 2:
                    raise DegenerateTree("suppressed tree is a line (|A/C| = |B/C| = 2)")
                if da == 2 or db == 2:
                    kept = FACTOR_B if da == 2 else FACTOR_A
                    if kept != self.root_type:
                        raise ParseError(
                            f"base vertex of type {root} has valence 2 and is suppressed; "
                            f"re-root at {FACTOR_NAMES[kept]} (--root)"
                        )
                    self.kept_types = (kept,)
                    self.suppressing = True
                else:
                    self.kept_types = (FACTOR_A, FACTOR_B)
                    self.suppressing = False
            else:
                self.kept_types = (FACTOR_A, FACTOR_B)
                self.suppressing = False
        self._stab_cache: dict[int, list[tuple[GroupElement, tuple]]] = {}

    # -- vertices ---------------------------------------------------------

    @property
    def base(self) -> Vertex:
        return Vertex((), self.root_type)

    def base_of_type(self, vtype: int) -> Vertex:
        return Vertex((), vtype)

    def is_o_vertex(self, v: Vertex) -> bool:
        return True if self.is_free else v.vtype == self.root_type

    def is_view_vertex(self, v: Vertex) -> bool:
        return True if self.is_free else v.vtype in self.kept_types

    def vertex_element(self, v: Vertex) -> GroupElement:
        """The canonical word read as a group element (maps the type's base to v)."""
        if self.is_free:
            return FreeElement(v.word)
        return AmalgamElement(v.word, self.instance.subgroup.identity)

    def depth(self, v: Vertex) -> int:
        """Raw distance from the structural base vertex of type 0."""
        if self.is_free:
            return len(v.word)
        stripped_type = v.vtype if len(v.word) % 2 == 0 else 1 - v.vtype
        return len(v.word) + (1 if stripped_type == 1 else 0)

    def parent(self, v: Vertex) -> Vertex:
        if self.is_free:
            return Vertex(v.word[:-1], 0)
        if v.word:
            return Vertex(v.word[:-1], 1 - v.vtype)
        return Vertex((), 1 - v.vtype)  # (eps,1) -> (eps,0); (eps,0) has no parent

    def raw_neighbors(self, v: Vertex) -> list[Vertex]:
        if self.is_free:
            out = []
            for g in range(1, self.instance.rank + 1):
                for letter in (g, -g):
                    if v.word and v.word[-1] == -letter:
                        out.append(Vertex(v.word[:-1], 0))
                    else:
                        out.append(Vertex(v.word + (letter,), 0))
            return out
        fd = self.instance.factors[v.vtype]
        other = 1 - v.vtype
        out = [Vertex(v.word[:-1] if v.word else (), other)]
        out.extend(Vertex(v.word + ((v.vtype, r),), other) for r in fd.transversal[1:])
        return out

    def neighbors(self, v: Vertex) -> list[Vertex]:
        """View-level neighbors (merged through suppressed midpoints)."""
        if not self.suppressing:
            return self.raw_neighbors(v)
        out = []
        for mid in self.raw_neighbors(v):
            nxt = [w for w in self.raw_neighbors(mid) if w != v]
            assert len(nxt) == 1, "suppressed midpoint must have valence 2"
            out.append(nxt[0])
        return out

    # -- geodesics and medians ---------------------------------------------

    def geodesic(self, x: Vertex, y: Vertex) -> OrientedPath:
        """The unique raw geodesic from x to y (x = y gives a trivial path)."""
        up_x = [x]
        up_y = [y]
        dx, dy = self.depth(x), self.depth(y)
        while dx > dy:
            up_x.append(self.parent(up_x[-1]))
            dx -= 1
        while dy > dx:
            up_y.append(self.parent(up_y[-1]))
            dy -= 1
        while up_x[-1] != up_y[-1]:
            up_x.append(self.parent(up_x[-1]))
            up_y.append(self.parent(up_y[-1]))
        return OrientedPath(tuple(up_x) + tuple(reversed(up_y[:-1])))

    def distance(self, x: Vertex, y: Vertex) -> int:
        """Raw distance between vertices."""
        if self.is_free:
            wx, wy = x.word, y.word
            k = 0
            for a, b in zip(wx, wy):
                if a != b:
                    break
                k += 1
            return (len(wx) - k) + (len(wy) - k)
        return self.geodesic(x, y).raw_length

    def view_distance(self, x: Vertex, y: Vertex) -> int:
        d = self.distance(x, y)
        return d // 2 if self.suppressing else d

    def median(self, x: Vertex, y: Vertex, z: Vertex) -> Vertex:
        """The unique vertex lying on all three pairwise geodesics."""
        on_xy = set(self.geodesic(x, y).vertices)
        for v in self.geodesic(z, x).vertices:
            if v in on_xy:
                return v
        raise AssertionError("median not found; tree invariant broken")

    # -- group action -------------------------------------------------------

    def act(self, g: GroupElement, v: Vertex) -> Vertex:
        if self.is_free:
            return Vertex(self.instance.multiply(g, FreeElement(v.word)).word, 0)
        h = self.instance.multiply(g, AmalgamElement(v.word, self.instance.subgroup.identity))
        reps = h.reps
        if reps and reps[-1][0] == v.vtype:
            reps = reps[:-1]
        return Vertex(reps, v.vtype)

    def act_path(self, g: GroupElement, path: OrientedPath) -> OrientedPath:
        return OrientedPath(tuple(self.act(g, v) for v in path.vertices))

    def stabilizer(self, v: Vertex) -> list[GroupElement]:
        """All elements fixing v (finite for amalgams; trivial for free groups)."""
        if self.is_free:
            return [self.instance.identity()]
        w = self.vertex_element(v)
        w_inv = self.instance.invert(w)
        group = self.instance.factors[v.vtype].group
        out = []
        for x in range(group.order):
            s = self.instance.normal_form([(v.vtype, x)])
            out.append(self.instance.multiply(self.instance.multiply(w, s), w_inv))
        return out

    # -- path structure -------------------------------------------------------

    def validate_path(self, vertices: Sequence[Vertex]) -> OrientedPath:
        """Build an OrientedPath, checking adjacency and no backtracking."""
        vs = tuple(vertices)
        if not vs:
            raise PreconditionViolated("a path needs at least one vertex")
        for i in range(len(vs) - 1):
            self._step_letter(vs[i], vs[i + 1])
            if i >= 1 and vs[i + 1] == vs[i - 1]:
                raise PreconditionViolated(f"path backtracks at position {i}")
        return OrientedPath(vs)

    def _step_letter(self, u: Vertex, w: Vertex) -> Letter | int:
        """The relative group letter carrying u to its neighbor w."""
        if self.is_free:
            if len(w.word) == len(u.word) + 1 and w.word[: len(u.word)] == u.word:
                return w.word[-1]
            if len(u.word) == len(w.word) + 1 and u.word[: len(w.word)] == w.word:
                return -u.word[-1]
            raise PreconditionViolated(f"vertices {u} and {w} are not adjacent")
        if w.vtype == u.vtype:
            raise PreconditionViolated(f"vertices {u} and {w} are not adjacent")
        if len(w.word) == len(u.word) + 1 and w.word[: len(u.word)] == u.word:
            return w.word[-1]
        if len(u.word) == len(w.word) + 1 and u.word[: len(w.word)] == w.word:
            factor, elt = u.word[-1]
            return (factor, self.instance.factors[factor].group.inv(elt))
        if u.word == w.word == ():
            return (u.vtype, self.instance.factors[u.vtype].group.identity)
        raise PreconditionViolated(f"vertices {u} and {w} are not adjacent")

    def path_letters(self, path: OrientedPath) -> list:
        return [self._step_letter(path.vertices[i], path.vertices[i + 1]) for i in range(path.raw_length)]

    def o_positions(self, path: OrientedPath) -> list[int]:
        return [i for i, v in enumerate(path.vertices) if self.is_o_vertex(v)]

    def view_positions(self, path: OrientedPath) -> list[int]:
        return [i for i, v in enumerate(path.vertices) if self.is_view_vertex(v)]

    def o_length(self, path: OrientedPath):
        """Number of basepoint-orbit vertices crossed, minus one.

        Returns the tagged NO_ORBIT_VERTEX value when the path crosses none.
        """
        count = sum(1 for v in path.vertices if self.is_o_vertex(v))
        if count == 0:
            return NO_ORBIT_VERTEX
        return count - 1

    def view_length(self, path: OrientedPath) -> int:
        return len(self.view_positions(path)) - 1

    # -- canonical serialization ---------------------------------------------

    def _stab_states(self, start_type: int) -> list[tuple[GroupElement, tuple]]:
        """Stabilizer elements of the type's base with streaming start states.

        Each state is (initial rep list, initial carry) for the token stream.
        """
        if self.is_free:
            return [(self.instance.identity(), ((), 0))]
        if start_type not in self._stab_cache:
            group = self.instance.factors[start_type].group
            states = []
            for x in range(group.order):
                el = self.instance.normal_form([(start_type, x)])
                states.append((el, (el.reps, el.c)))
            self._stab_cache[start_type] = states
        return self._stab_cache[start_type]

    def stream_tokens(self, start_type: int, state: tuple, letters: Iterable) -> Iterator:
        """Canonical step tokens of the translated path sigma * (base-anchored path).

        ``letters`` are relative group letters of the original path; the
        output is the token sequence of the path translated to start at the
        base vertex of ``start_type`` and moved by the stabilizer element
        encoded in ``state``.  Tokens are transversal positions (factor, pos)
        for amalgams and signed generators for free groups; (factor, 0) marks
        the step between the two base vertices.
        """
        if self.is_free:
            for letter in letters:
                yield letter
            return
        inst = self.instance
        reps = list(state[0])
        carry = state[1]
        vtype = start_type
        prev_len = len(reps) - (1 if reps and reps[-1][0] == vtype else 0)
        assert prev_len == 0, "stabilizer state must fix the base vertex"
        for factor, elt in letters:
            vtype = 1 - vtype
            carry = inst._append(reps, carry, factor, elt)
            absorbed = 1 if (reps and reps[-1][0] == vtype) else 0
            word_len = len(reps) - absorbed
            if word_len == prev_len + 1:
                f, r = reps[word_len - 1]
                yield (f, inst.factors[f].rep_pos[r])
            elif word_len == prev_len:
                yield (1 - vtype, 0)
            else:
                raise AssertionError("translated path moved toward the base; not a geodesic")
            prev_len = word_len

    def serialize_from_start(self, path: OrientedPath) -> tuple:
        """Identity-translate serialization: (start type, step tokens)."""
        letters = self.path_letters(path)
        state = ((), 0) if self.is_free else ((), self.instance.subgroup.identity)
        return (path.start.vtype, tuple(self.stream_tokens(path.start.vtype, state, letters)))

    def orbit_key_tuple(self, path: OrientedPath) -> tuple:
        """Minimal serialization over the start-type base stabilizer."""
        start_type = path.start.vtype
        letters = self.path_letters(path)
        best = None
        for _el, state in self._stab_states(start_type):
            toks = tuple(self.stream_tokens(start_type, state, letters))
            if best is None or toks < best:
                best = toks
        return (start_type, best)

    def orbit_key(self, path: OrientedPath) -> str:
        return format_key(self.orbit_key_tuple(path))

    def key_matches(self, start_type: int, letters: list, key: tuple) -> bool:
        """Whether the path with these relative letters lies in the key's orbit."""
        k_type, k_tokens = key
        if start_type != k_type or len(letters) != len(k_tokens):
            return False
        for _el, state in self._stab_states(start_type):
            for tok, want in zip(self.stream_tokens(start_type, state, letters), k_tokens):
                if tok != want:
                    break
            else:
                return True
        return False

    # -- base-anchored expansion of a group element ------------------------------

    def base_path_letters(self, g: GroupElement) -> list:
        """Relative letters of the geodesic [base, g*base], without materializing it."""
        if self.is_free:
            return list(g.word)
        v = self.act(g, self.base)
        letters: list[Letter] = []
        if v.word and v.word[0][0] != self.root_type:
            identity = self.instance.factors[self.root_type].group.identity
            letters.append((self.root_type, identity))
        letters.extend(v.word)
        return letters

    def letters_o_positions(self, letters: list) -> list[int]:
        """Indices of basepoint-orbit vertices along a base-anchored letter list."""
        if self.is_free:
            return list(range(len(letters) + 1))
        # vertex types alternate along any raw path, starting at the root type
        return list(range(0, len(letters) + 1, 2))

    def letters_view_positions(self, letters: list) -> list[int]:
        if self.is_free or not self.suppressing:
            return list(range(len(letters) + 1))
        return self.letters_o_positions(letters)

    def invert_letters(self, letters: list) -> list:
        return [self.instance.invert_letter(x) for x in reversed(letters)]

    # -- enumeration -----------------------------------------------------------

    def _extension_letters(self, v: Vertex) -> list:
        """Letters extending a base-anchored geodesic one step away from the base."""
        if self.is_free:
            last = v.word[-1] if v.word else 0
            out = []
            for g in range(1, self.instance.rank + 1):
                for letter in (g, -g):
                    if letter != -last:
                        out.append(letter)
            return out
        fd = self.instance.factors[v.vtype]
        out = [(v.vtype, r) for r in fd.transversal[1:]]
        if not v.word:
            out.append((v.vtype, fd.group.identity))
        return out

    def child(self, v: Vertex, letter) -> Vertex:
        if self.is_free:
            return Vertex(v.word + (letter,), 0)
        factor, elt = letter
        if elt == self.instance.factors[factor].group.identity:
            return Vertex(v.word, 1 - v.vtype)
        return Vertex(v.word + (letter,), 1 - v.vtype)

    def enumerate_orbits(
        self,
        n: int,
        mode: str = "orbit",
        budget: int | None = None,
        cache=None,
    ) -> dict[str, OrientedPath]:
        """One representative per orbit of oriented geodesics at size n.

        ``mode="metric"`` sizes by view length, ``mode="orbit"`` by orbit
        length with basepoint-orbit endpoints.  Enumeration anchors paths at
        the base vertex of each surviving type, which suffices because the
        group is transitive on each vertex type.
        """
        if n < 1:
            raise PreconditionViolated(f"enumeration size must be >= 1, got {n}")
        if mode not in ("metric", "orbit"):
            raise ParseError(f"unknown enumeration mode {mode!r}")
        if cache is not None:
            cached = cache.load(self, n, mode)
            if cached is not None:
                return cached
        limit = budget if budget is not None else self.ball_budget
        found: dict[tuple, OrientedPath] = {}
        visited = 0
        if mode == "orbit" or self.is_free or len(self.kept_types) == 1:
            start_types = [self.root_type]
        else:
            start_types = [FACTOR_A, FACTOR_B]

        def dfs(vertices: list[Vertex], size: int) -> None:
            nonlocal visited
            v = vertices[-1]
            for letter in self._extension_letters(v):
                w = self.child(v, letter)
                if len(vertices) >= 2 and w == vertices[-2]:
                    continue
                visited += 1
                if visited > limit:
                    raise ResourceLimit(f"orbit enumeration exceeded budget {limit}")
                if mode == "orbit":
                    new_size = size + (1 if self.is_o_vertex(w) else 0)
                    done = new_size == n and self.is_o_vertex(w)
                else:
                    new_size = size + (1 if self.is_view_vertex(w) else 0)
                    done = new_size == n and self.is_view_vertex(w)
                vertices.append(w)
                if done:
                    path = OrientedPath(tuple(vertices))
                    key = self.orbit_key_tuple(path)
                    if key not in found:
                        found[key] = path
                else:
                    dfs(vertices, new_size)
                vertices.pop()

        for st in start_types:
            dfs([self.base_of_type(st)], 0)
        out = {format_key(k): found[k] for k in sorted(found, key=_key_sort)}
        if cache is not None:
            cache.store(self, n, mode, out)
        return out

    # -- spheres and stabilizers --------------------------------------------------

    def sphere(self, x0: Vertex, n: int, budget: int | None = None) -> list[Vertex]:
        """View-level sphere of radius n around x0."""
        limit = budget if budget is not None else self.ball_budget
        seen = {x0}
        frontier = [x0]
        for _ in range(n):
            nxt = []
            for v in frontier:
                for w in self.neighbors(v):
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
                        if len(seen) > limit:
                            raise ResourceLimit(f"sphere enumeration exceeded budget {limit}")
            frontier = nxt
        return frontier

    def ball(self, x0: Vertex, n: int, budget: int | None = None) -> list[Vertex]:
        limit = budget if budget is not None else self.ball_budget
        seen = {x0}
        order = [x0]
        frontier = [x0]
        for _ in range(n):
            nxt = []
            for v in frontier:
                for w in self.neighbors(v):
                    if w not in seen:
                        seen.add(w)
                        order.append(w)
                        nxt.append(w)
                        if len(order) > limit:
                            raise ResourceLimit(f"ball enumeration exceeded budget {limit}")
            frontier = nxt
        return order

    def sphere_transitivity(self, x0: Vertex, n: int, budget: int | None = None) -> bool:
        """Whether Stab(x0) acts transitively on the n-sphere around x0."""
        sph = self.sphere(x0, n, budget)
        if len(sph) <= 1:
            return True
        stab = self.stabilizer(x0)
        orbit = {self.act(s, sph[0]) for s in stab}
        return len(orbit) == len(sph)

    def pointwise_stabilizer_order(self, u: Vertex, w: Vertex) -> int:
        """Order of Stab(u) intersected with Stab(w)."""
        return sum(1 for s in self.stabilizer(u) if self.act(s, w) == w)

    def ball_elements(self, radius: int, budget: int | None = None) -> list[GroupElement]:
        """All g with view-distance(base, g*base) <= radius, deduplicated."""
        out = []
        for v in self.ball(self.base, radius, budget):
            if not self.is_o_vertex(v):
                continue
            w = self.vertex_element(v)
            if self.is_free:
                out.append(w)
            else:
                group = self.instance.factors[self.root_type].group
                for x in range(group.order):
                    out.append(self.instance.multiply(w, self.instance.normal_form([(self.root_type, x)])))
        return out


def _key_sort(key: tuple):
    return (key[0], key[1])


def format_key(key: tuple) -> str:
    """Stable text form of an orbit key tuple.

    Free-group tokens are signed integers; amalgam tokens render as the
    factor name plus the transversal position ("A2", "B0", ...).
    """
    start_type, tokens = key
    free = bool(tokens) and isinstance(tokens[0], int)
    marker = "F" if free else FACTOR_NAMES[start_type]
    body = ".".join(
        str(t) if isinstance(t, int) else f"{FACTOR_NAMES[t[0]]}{t[1]}" for t in tokens
    )
    return f"{marker}|{body}"


def parse_key(text: str) -> tuple:
    """Inverse of format_key (empty-token keys parse as amalgam keys)."""
    marker, sep, body = text.partition("|")
    if not sep or marker not in ("F", "A", "B"):
        raise ParseError(f"bad orbit key {text!r}")
    tokens: list = []
    if body:
        for part in body.split("."):
            if part and part[0] in "AB" and part[1:].isdigit():
                tokens.append((FACTOR_NAMES.index(part[0]), int(part[1:])))
            elif part.lstrip("-").isdigit():
                tokens.append(int(part))
            else:
                raise ParseError(f"bad orbit key token {part!r} in {text!r}")
    start_type = 0 if marker == "F" else FACTOR_NAMES.index(marker)
    return (start_type, tuple(tokens))


def suppress_valence2(instance: ActionInstance, root: str = "A") -> TreeView:
    """A view with valence-2 vertices merged away; rejects degenerate trees.

    Free-group trees are unchanged.  For an amalgam, a factor with exactly
    two cosets of the amalgamated subgroup contributes valence-2 vertices,
    which the suppressed view removes.
    """
    if instance.is_free:
        return TreeView(instance, mode="suppressed", root=root)
    da, db = instance.coset_counts()
    if da == 1 or db == 1:
        raise DegenerateTree("suppressed tree is a point or an edge")
    return TreeView(instance, mode="suppressed", root=root)
