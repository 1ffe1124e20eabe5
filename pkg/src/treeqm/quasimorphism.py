"""Window chains, counting quasimorphisms, defect scans, and axis segments."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    EllipticElement,
    NoOrbitVertexOnAxis,
    ParseError,
    PreconditionViolated,
    ResourceLimit,
)
from .instance import GroupElement
from .tree import OrientedPath, TreeView, Vertex, format_key, parse_key


@dataclass(frozen=True)
class QmSpec:
    """The orbit of an oriented segment whose occurrences are counted.

    ``mode`` records whether the window size n is a metric length or an
    orbit length; the two are never converted silently.
    """

    orbit: str
    n: int
    mode: str = "orbit"

    def __post_init__(self):
        if self.mode not in ("metric", "orbit"):
            raise ParseError(f"unknown window mode {self.mode!r}")
        if self.n < 1:
            raise ParseError("window size must be at least 1")

    @property
    def key_tuple(self) -> tuple:
        return parse_key(self.orbit)


class SparseChain:
    """Finitely supported integer function on concrete oriented geodesics."""

    __slots__ = ("data",)

    def __init__(self, data: dict[OrientedPath, int] | None = None):
        self.data = {p: c for p, c in (data or {}).items() if c != 0}

    def add(self, path: OrientedPath, coeff: int) -> None:
        new = self.data.get(path, 0) + coeff
        if new == 0:
            self.data.pop(path, None)
        else:
            self.data[path] = new

    def __add__(self, other: "SparseChain") -> "SparseChain":
        out = SparseChain(dict(self.data))
        for p, c in other.data.items():
            out.add(p, c)
        return out

    def __sub__(self, other: "SparseChain") -> "SparseChain":
        out = SparseChain(dict(self.data))
        for p, c in other.data.items():
            out.add(p, -c)
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseChain) and self.data == other.data

    def is_zero(self) -> bool:
        return not self.data

    def l1(self) -> int:
        return sum(abs(c) for c in self.data.values())

    def support(self) -> list[OrientedPath]:
        return list(self.data)

    def translate(self, view: TreeView, g: GroupElement) -> "SparseChain":
        out = SparseChain()
        for p, c in self.data.items():
            out.add(view.act_path(g, p), c)
        return out


# -- windows ------------------------------------------------------------------


def _window_positions(view: TreeView, path: OrientedPath, n: int, mode: str) -> list[tuple[int, int]]:
    if mode == "orbit":
        marks = view.o_positions(path)
    elif mode == "metric":
        marks = view.view_positions(path)
    else:
        raise ParseError(f"unknown window mode {mode!r}")
    return [(marks[i], marks[i + n]) for i in range(len(marks) - n)]


def windows(view: TreeView, x: Vertex, y: Vertex, n: int, mode: str = "orbit") -> list[OrientedPath]:
    """All forward windows of size n inside the geodesic [x, y], in order."""
    if n < 1:
        raise PreconditionViolated("window size must be at least 1")
    path = view.geodesic(x, y)
    return [path.slice(i, j) for i, j in _window_positions(view, path, n, mode)]


def displacement_chain(view: TreeView, g: GroupElement, n: int, mode: str = "orbit") -> SparseChain:
    """+1 on forward windows of [v, gv], -1 on forward windows of [gv, v]."""
    base = view.base
    gv = view.act(g, base)
    chain = SparseChain()
    for w in windows(view, base, gv, n, mode):
        chain.add(w, 1)
    for w in windows(view, gv, base, n, mode):
        chain.add(w, -1)
    return chain


def coboundary_chain(
    view: TreeView, g: GroupElement, h: GroupElement, n: int, mode: str = "orbit"
) -> SparseChain:
    """The chain g*omega(h) - omega(gh) + omega(g) for the window chain omega."""
    inst = view.instance
    gh = inst.multiply(g, h)
    return (
        displacement_chain(view, h, n, mode).translate(view, g)
        - displacement_chain(view, gh, n, mode)
        + displacement_chain(view, g, n, mode)
    )


# -- the counting quasimorphism ------------------------------------------------


def _count_key_in_letters(view: TreeView, letters: list, key: tuple, n: int, mode: str) -> int:
    """Occurrences of the key's orbit among size-n windows of a base-anchored path."""
    if mode == "orbit":
        marks = view.letters_o_positions(letters)
    else:
        marks = view.letters_view_positions(letters)
    k_type, k_tokens = key
    want_len = len(k_tokens)
    count = 0
    for i in range(len(marks) - n):
        p, q = marks[i], marks[i + n]
        if q - p != want_len:
            continue
        # start type of the window along a base-anchored path alternates
        if not view.is_free:
            start_type = view.root_type if p % 2 == 0 else 1 - view.root_type
            if start_type != k_type:
                continue
            if view.key_matches(start_type, letters[p:q], key):
                count += 1
        else:
            if tuple(letters[p:q]) == k_tokens:
                count += 1
    return count


def median_quasimorphism(view: TreeView, spec: QmSpec, g: GroupElement) -> int:
    """Forward occurrences of the spec orbit in [v, gv] minus those in [gv, v]."""
    letters = view.base_path_letters(g)
    if not letters:
        return 0
    key = spec.key_tuple
    forward = _count_key_in_letters(view, letters, key, spec.n, spec.mode)
    backward = _count_key_in_letters(view, view.invert_letters(letters), key, spec.n, spec.mode)
    return forward - backward


def median_quasimorphism_bulk(
    view: TreeView, specs: Sequence[QmSpec], g: GroupElement
) -> list[int]:
    """Evaluate several specs on one element, sharing the geodesic expansion."""
    letters = view.base_path_letters(g)
    if not letters:
        return [0] * len(specs)
    rev = view.invert_letters(letters)
    out = []
    for spec in specs:
        key = spec.key_tuple
        out.append(
            _count_key_in_letters(view, letters, key, spec.n, spec.mode)
            - _count_key_in_letters(view, rev, key, spec.n, spec.mode)
        )
    return out


# -- defect scan -----------------------------------------------------------------


@dataclass(frozen=True)
class DefectReport:
    max_defect: int
    argmax: tuple[str, str]
    pairs_scanned: int
    exhaustive: bool


def defect_scan(
    view: TreeView,
    spec: QmSpec,
    radius: int,
    sample: int | None = None,
    seed: int = 0,
    pair_budget: int = 300_000,
) -> DefectReport:
    """Max |f(g)+f(h)-f(gh)| over pairs with d(v, gv), d(v, hv) <= 2*radius.

    Scans exhaustively when the pair count fits the budget, otherwise a
    seeded uniform sample of ``sample`` pairs (default: the budget).
    """
    inst = view.instance
    elements = view.ball_elements(2 * radius)
    values = {}

    def f(el) -> int:
        if el not in values:
            values[el] = median_quasimorphism(view, spec, el)
        return values[el]

    n_pairs = len(elements) * len(elements)
    exhaustive = sample is None and n_pairs <= pair_budget
    best = -1
    arg = (inst.identity(), inst.identity())
    if exhaustive:
        pairs: Iterable = ((g, h) for g in elements for h in elements)
        scanned = n_pairs
    else:
        rng = random.Random(seed)
        scanned = sample if sample is not None else pair_budget
        pairs = ((rng.choice(elements), rng.choice(elements)) for _ in range(scanned))
    for g, h in pairs:
        d = abs(f(g) + f(h) - median_quasimorphism(view, spec, inst.multiply(g, h)))
        if d > best:
            best = d
            arg = (g, h)
    return DefectReport(
        max_defect=best,
        argmax=(inst.format_element(arg[0]), inst.format_element(arg[1])),
        pairs_scanned=scanned,
        exhaustive=exhaustive,
    )


# -- homogenization ----------------------------------------------------------------


def homogenize(
    view: TreeView, spec: QmSpec, g: GroupElement, zmax: int
) -> tuple[Fraction, bool]:
    """Estimate lim f(g^z)/z by forward-difference stabilization.

    Returns (limit, True) when the last ceil(zmax/2) forward differences
    agree, else (f(g^zmax)/zmax, False).
    """
    if zmax < 3:
        raise PreconditionViolated("zmax must be at least 3")
    inst = view.instance
    values = [0]
    power = inst.identity()
    for _ in range(zmax):
        power = inst.multiply(power, g)
        values.append(median_quasimorphism(view, spec, power))
    diffs = [values[z + 1] - values[z] for z in range(zmax)]
    tail = (zmax + 1) // 2
    last = diffs[-tail:]
    if all(d == last[0] for d in last):
        return Fraction(last[0]), True
    return Fraction(values[-1], zmax), False


# -- axes ---------------------------------------------------------------------------


def translation_length(view: TreeView, g: GroupElement) -> int:
    """Raw translation length; 0 means elliptic (no inversions occur here)."""
    base = view.base
    gv = view.act(g, base)
    d1 = view.distance(base, gv)
    if d1 == 0:
        return 0
    g2v = view.act(g, gv)
    d2 = view.distance(base, g2v)
    return max(0, d2 - d1)


def axis_segment(view: TreeView, g: GroupElement) -> OrientedPath:
    """A fundamental segment [p, g p] of the axis, anchored at an o-vertex.

    p is the basepoint-orbit vertex on the axis nearest to the base, ties
    broken toward g*base.  [p, g^N p] concatenates exactly N translates of
    the returned segment.
    """
    base = view.base
    ell = translation_length(view, g)
    if ell == 0:
        raise EllipticElement("element displaces no vertex; it has no axis")
    gv = view.act(g, base)
    d1 = view.distance(base, gv)
    offset = (d1 - ell) // 2
    path = view.geodesic(base, gv)
    proj = path.vertices[offset]

    def axis_point(t: int) -> Vertex:
        # axis parametrized so that axis(0) = proj; valid for -ell <= t <= ell
        if t >= 0:
            return path.vertices[offset + t]
        return view.act(view.instance.invert(g), path.vertices[offset + t + ell])

    p = None
    for dist in range(ell + 1):
        for t in (dist, -dist) if dist else (0,):
            cand = axis_point(t)
            if view.is_o_vertex(cand):
                p = cand
                break
        if p is not None:
            break
    if p is None:
        raise NoOrbitVertexOnAxis("axis carries no basepoint-orbit vertex")
    gp = view.act(g, p)
    segment = view.geodesic(p, gp)
    assert segment.raw_length == ell
    return segment
