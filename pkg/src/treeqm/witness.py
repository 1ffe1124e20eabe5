"""Word families, witness elements, overlap diagnostics, and the independence matrix.

A witness set for index n realizes three family words as geodesics from the
base, reads off the corresponding group elements, and anchors a counting
quasimorphism at the axis segment of their product.  The independence
matrix then checks the zero/growth pattern that forces linear independence
of the induced classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EllipticProduct, ParamsTooSmall, PreconditionViolated, UndefinedInverseLabel
from .instance import GroupElement
from .labelling import Labelling, label_of_path, realize_word
from .quasimorphism import QmSpec, axis_segment, homogenize, median_quasimorphism, translation_length
from .tree import OrientedPath, TreeView


@dataclass(frozen=True)
class WordFamilyParams:
    """Block parameters: base multiplier and the number of blocks minus one."""

    v0: int = 6
    blocks: int = 4

    def __post_init__(self):
        if self.v0 < 1 or self.blocks < 1:
            raise ParamsTooSmall("v0 and blocks must be positive")

    def base_exponent(self, n: int, i: int) -> int:
        return self.v0 * (3 * n + i)

    def exponents(self, n: int, i: int) -> range:
        v = self.base_exponent(n, i)
        return range(v, v + self.blocks + 1)


def ensure_distinct_exponents(
    params: WordFamilyParams, pairs: Iterable[tuple[int, int]]
) -> None:
    """Raise ParamsTooSmall when two requested (n, i) pairs share a b-exponent."""
    pairs = list(pairs)
    for idx in range(len(pairs)):
        for jdx in range(idx + 1, len(pairs)):
            ei = set(params.exponents(*pairs[idx]))
            ej = set(params.exponents(*pairs[jdx]))
            if ei & ej:
                raise ParamsTooSmall(
                    f"(n,i) pairs {pairs[idx]} and {pairs[jdx]} share b-exponents "
                    f"{sorted(ei & ej)[:3]}...; raise v0 above blocks"
                )


def word_family(n: int, i: int, params: WordFamilyParams) -> str:
    """The word a b^V a b^(V+1) ... a b^(V+blocks) with V = v0*(3n+i)."""
    if n < 1 or i not in (1, 2, 3):
        raise PreconditionViolated(f"need n >= 1 and i in 1..3, got ({n}, {i})")
    v = params.base_exponent(n, i)
    if v < 2:
        raise ParamsTooSmall(f"base exponent {v} below 2; blocks would not be good")
    return "".join("a" + "b" * e for e in params.exponents(n, i))


def is_good_word(word: str) -> bool:
    """A good word is a concatenation of blocks a b^N with N >= 2."""
    if not word:
        return False
    blocks = word.split("a")
    if blocks[0] != "":
        return False
    return all(part and set(part) == {"b"} and len(part) >= 2 for part in blocks[1:])


def word_reverse(word: str) -> str:
    return word[::-1]


def word_inverse(view: TreeView, labelling: Labelling, word: str, cache=None) -> str:
    """Read the word right to left, replacing each letter by the label of the
    reversed orbit.

    Raises UndefinedInverseLabel when a reversed orbit is labelled c or when a
    letter's orbits disagree about their reversed label.
    """
    reps = view.enumerate_orbits(labelling.k, "orbit", cache=cache)
    reversed_label: dict[str, str] = {}
    for letter in set(word):
        labels = set()
        for key, rep in reps.items():
            if labelling.label_of_key(key) == letter:
                labels.add(labelling.label_of_key(view.orbit_key(rep.reverse())))
        if len(labels) != 1:
            raise UndefinedInverseLabel(
                f"orbits labelled {letter!r} have mixed reversed labels {sorted(labels)}"
            )
        target = labels.pop()
        if target == "c":
            raise UndefinedInverseLabel(f"the reversed orbit of letter {letter!r} is labelled c")
        reversed_label[letter] = target
    return "".join(reversed_label[ch] for ch in reversed(word))


@dataclass
class WitnessSet:
    """Realized family words and the derived elements for one index n."""

    n: int
    words: tuple[str, str, str]
    g1: GroupElement
    g2: GroupElement
    g3: GroupElement
    left_pair: GroupElement  # g1 * g2
    right_pair: GroupElement  # g2^-1 * g3
    core_segment: OrientedPath
    spec: QmSpec

    def diagonal_element(self, view: TreeView) -> GroupElement:
        return view.instance.multiply(self.left_pair, self.right_pair)

    def to_json(self, view: TreeView) -> dict:
        inst = view.instance
        return {
            "n": self.n,
            "words": list(self.words),
            "g1": inst.format_element(self.g1),
            "g2": inst.format_element(self.g2),
            "g3": inst.format_element(self.g3),
            "left_pair": inst.format_element(self.left_pair),
            "right_pair": inst.format_element(self.right_pair),
            "core_orbit": self.spec.orbit,
            "core_o_length": self.spec.n,
        }


def build_witness(
    view: TreeView, labelling: Labelling, n: int, params: WordFamilyParams
) -> WitnessSet:
    """Realize the three family words and derive the witness data for index n."""
    inst = view.instance
    words = tuple(word_family(n, i, params) for i in (1, 2, 3))
    ends = []
    for word in words:
        path = realize_word(view, labelling, word)
        assert label_of_path(view, labelling, path) == word
        ends.append(view.vertex_element(path.end))
    g1, g2, g3 = ends
    diagonal = inst.multiply(g1, g3)
    if translation_length(view, diagonal) == 0:
        raise EllipticProduct(f"g1*g3 for index {n} is elliptic")
    segment = axis_segment(view, diagonal)
    o_len = view.o_length(segment)
    spec = QmSpec(orbit=view.orbit_key(segment), n=o_len, mode="orbit")
    # the segment must span the junction: the terminal vertex of the part of
    # [v, g1 g3 v] contributed by g1 (cancellation can pull it off g1*base)
    junction = view.median(view.base, view.act(g1, view.base), view.act(diagonal, view.base))
    d_total = view.distance(segment.start, segment.end)
    on_segment = (
        view.distance(segment.start, junction) + view.distance(junction, segment.end) == d_total
    )
    if not on_segment:
        raise PreconditionViolated(
            f"axis segment for index {n} misses the junction vertex; degenerate words"
        )
    return WitnessSet(
        n=n,
        words=words,
        g1=g1,
        g2=g2,
        g3=g3,
        left_pair=inst.multiply(g1, g2),
        right_pair=inst.multiply(inst.invert(g2), g3),
        core_segment=segment,
        spec=spec,
    )


def build_witness_family(
    view: TreeView, labelling: Labelling, count: int, params: WordFamilyParams
) -> list[WitnessSet]:
    ensure_distinct_exponents(
        params, [(n, i) for n in range(1, count + 1) for i in (1, 2, 3)]
    )
    return [build_witness(view, labelling, n, params) for n in range(1, count + 1)]


# -- overlap diagnostics -----------------------------------------------------------


def longest_common_o_subgeodesic(view: TreeView, gamma1: OrientedPath, gamma2: OrientedPath):
    """Orbit length of the intersection of two concrete geodesics.

    Returns None when the paths share no basepoint-orbit vertex.  The
    intersection of two geodesics in a tree is itself a geodesic segment.
    """
    common = set(gamma1.vertices) & set(gamma2.vertices)
    count = sum(1 for v in common if view.is_o_vertex(v))
    if count == 0:
        return None
    return count - 1


def max_translate_overlap(
    view: TreeView,
    gamma1: OrientedPath,
    gamma2: OrientedPath,
    budget: int = 5000,
):
    """Largest o-overlap over stabilizer-anchored translate pairs.

    Anchors every o-vertex of each path at the base in turn and scans the
    base stabilizer; a budget caps the number of (anchor, anchor, sigma)
    triples via deterministic striding, so the result is a lower bound on
    the true maximum when the budget truncates the scan.
    """
    inst = view.instance
    pos1 = [i for i in view.o_positions(gamma1)]
    pos2 = [i for i in view.o_positions(gamma2)]
    stab = view.stabilizer(view.base)
    total = len(pos1) * len(pos2) * len(stab)
    stride = max(1, -(-total // budget))
    best = None
    counter = 0
    for p1 in pos1:
        t1 = inst.invert(view.vertex_element(gamma1.vertices[p1]))
        moved1 = view.act_path(t1, gamma1)
        set1 = set(moved1.vertices)
        for p2 in pos2:
            t2 = inst.invert(view.vertex_element(gamma2.vertices[p2]))
            for sigma in stab:
                counter += 1
                if counter % stride != 0:
                    continue
                moved2 = view.act_path(inst.multiply(sigma, t2), gamma2)
                count = sum(1 for v in moved2.vertices if v in set1 and view.is_o_vertex(v))
                overlap = count - 1 if count else None
                if overlap is not None and (best is None or overlap > best):
                    best = overlap
    return best


# -- the independence matrix ----------------------------------------------------------


@dataclass
class MatrixReport:
    verdict: str
    entries: dict
    failures: list[str]
    zmax: int

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "zmax": self.zmax,
            "entries": self.entries,
            "failures": self.failures,
        }


def independence_matrix(
    view: TreeView, witnesses: Sequence[WitnessSet], zmax: int = 4
) -> MatrixReport:
    """Evaluate every c_n on powers of the witness pairs and their products.

    PASS requires: all pair powers evaluate to 0, off-diagonal products to 0,
    and the diagonal product at power z to at least z - 1.
    """
    inst = view.instance
    entries: dict = {}
    failures: list[str] = []
    for wit_n in witnesses:
        for wit_m in witnesses:
            eta_vals, h_vals, prod_vals = [], [], []
            eta = inst.identity()
            aitch = inst.identity()
            prod = inst.identity()
            diag = wit_m.diagonal_element(view)
            for z in range(1, zmax + 1):
                eta = inst.multiply(eta, wit_m.left_pair)
                aitch = inst.multiply(aitch, wit_m.right_pair)
                prod = inst.multiply(prod, diag)
                eta_vals.append(median_quasimorphism(view, wit_n.spec, eta))
                h_vals.append(median_quasimorphism(view, wit_n.spec, aitch))
                prod_vals.append(median_quasimorphism(view, wit_n.spec, prod))
            tag = f"{wit_n.n},{wit_m.n}"
            entries[tag] = {"left_pair": eta_vals, "right_pair": h_vals, "product": prod_vals}
            for z, val in enumerate(eta_vals, start=1):
                if val != 0:
                    failures.append(f"c_{wit_n.n}(left_pair_{wit_m.n}^{z}) = {val} != 0")
            for z, val in enumerate(h_vals, start=1):
                if val != 0:
                    failures.append(f"c_{wit_n.n}(right_pair_{wit_m.n}^{z}) = {val} != 0")
            for z, val in enumerate(prod_vals, start=1):
                if wit_n.n == wit_m.n:
                    if val < z - 1:
                        failures.append(
                            f"c_{wit_n.n}(product_{wit_m.n}^{z}) = {val} < {z - 1}"
                        )
                elif val != 0:
                    failures.append(f"c_{wit_n.n}(product_{wit_m.n}^{z}) = {val} != 0")
    return MatrixReport(
        verdict="PASS" if not failures else "FAIL",
        entries=entries,
        failures=failures,
        zmax=zmax,
    )


def homogenized_diagonal(
    view: TreeView, witness: WitnessSet, zmax: int = 5
):
    """Stabilized homogenization estimate of c_n on its own diagonal product."""
    return homogenize(view, witness.spec, witness.diagonal_element(view), zmax)
