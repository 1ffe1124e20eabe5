"""Finite groups as index-valued multiplication tables, plus coset utilities."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

from .errors import NoIdentity, NonAssociative, NotASubgroup, NotLatinSquare, ParseError


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group over named elements with an index-valued table.

    ``table[i][j]`` is the index of ``elements[i] * elements[j]``.  Use
    :func:`validate_group` to construct one from raw data; the constructor
    itself does not re-check the axioms.
    """

    name: str
    elements: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    identity: int
    inverse: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def index_of(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise ParseError(f"group {self.name!r} has no element named {name!r}") from None

    def as_dict(self) -> dict:
        return {
            "elements": list(self.elements),
            "table": [[self.elements[x] for x in row] for row in self.table],
        }


def validate_group(
    elements: Sequence[str], table: Sequence[Sequence[str | int]], name: str = "group"
) -> FiniteGroup:
    """Check the group axioms and return the validated group.

    Raises NotLatinSquare, NoIdentity or NonAssociative with a message naming
    the offending row or triple.
    """
    n = len(elements)
    if n == 0:
        raise ParseError("group must have at least one element")
    if len(set(elements)) != n:
        raise ParseError(f"group {name!r} has duplicate element names")
    if len(table) != n:
        raise ParseError(f"group {name!r}: table has {len(table)} rows, expected {n}")
    index = {e: i for i, e in enumerate(elements)}
    rows: list[tuple[int, ...]] = []
    for i, raw_row in enumerate(table):
        if len(raw_row) != n:
            raise ParseError(f"group {name!r}: row {elements[i]!r} has length {len(raw_row)}")
        row = []
        for x in raw_row:
            if isinstance(x, int):
                if not 0 <= x < n:
                    raise ParseError(f"group {name!r}: row {elements[i]!r} index {x} out of range")
                row.append(x)
            else:
                if x not in index:
                    raise ParseError(f"group {name!r}: row {elements[i]!r} names unknown {x!r}")
                row.append(index[x])
        rows.append(tuple(row))

    for i, row in enumerate(rows):
        if len(set(row)) != n:
            raise NotLatinSquare(f"row {elements[i]!r} repeats an entry")
    for j in range(n):
        col = [rows[i][j] for i in range(n)]
        if len(set(col)) != n:
            raise NotLatinSquare(f"column {elements[j]!r} repeats an entry")

    identity = None
    for e in range(n):
        if all(rows[e][x] == x and rows[x][e] == x for x in range(n)):
            identity = e
            break
    if identity is None:
        raise NoIdentity(f"group {name!r} has no two-sided identity")

    for a in range(n):
        for b in range(n):
            ab = rows[a][b]
            for c in range(n):
                if rows[ab][c] != rows[a][rows[b][c]]:
                    raise NonAssociative(
                        f"({elements[a]}*{elements[b]})*{elements[c]} != "
                        f"{elements[a]}*({elements[b]}*{elements[c]})"
                    )

    inverse = []
    for a in range(n):
        inv_a = rows[a].index(identity)
        if rows[inv_a][a] != identity:
            raise NoIdentity(f"element {elements[a]!r} has no two-sided inverse")
        inverse.append(inv_a)

    return FiniteGroup(name, tuple(elements), tuple(rows), identity, tuple(inverse))


def cyclic_group(n: int) -> FiniteGroup:
    """Cyclic group of order n with elements named "0".."n-1"."""
    if n < 1:
        raise ParseError(f"cyclic group order must be positive, got {n}")
    names = [str(i) for i in range(n)]
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return validate_group(names, table, name=f"cyclic:{n}")


def symmetric_group(n: int) -> FiniteGroup:
    """Symmetric group on {0..n-1}; elements are one-line words in lex order.

    Composition convention: (p*q)(i) = p(q(i)).  The fixed element ordering
    makes canonical keys stable across runs.
    """
    if not 1 <= n <= 6:
        raise ParseError(f"sym:{n} not supported (1 <= n <= 6)")
    perms = sorted(permutations(range(n)))
    names = ["".join(str(i) for i in p) for p in perms]
    pos = {p: i for i, p in enumerate(perms)}
    table = [
        [pos[tuple(p[q[i]] for i in range(n))] for q in perms]
        for p in perms
    ]
    return validate_group(names, table, name=f"sym:{n}")


def builtin_group(spec: str) -> FiniteGroup:
    """Resolve a builtin name of the form "cyclic:N" or "sym:N"."""
    kind, _, arg = spec.partition(":")
    if not arg or not arg.isdigit():
        raise ParseError(f"bad builtin group spec {spec!r}")
    if kind == "cyclic":
        return cyclic_group(int(arg))
    if kind == "sym":
        return symmetric_group(int(arg))
    raise ParseError(f"unknown builtin group kind {kind!r}")


def check_subgroup(group: FiniteGroup, members: Iterable[int]) -> tuple[int, ...]:
    """Return the members as a sorted tuple, or raise NotASubgroup."""
    mem = sorted(set(members))
    names = group.elements
    if not mem:
        raise NotASubgroup("a subgroup cannot be empty")
    mset = set(mem)
    if group.identity not in mset:
        raise NotASubgroup("subgroup does not contain the identity")
    for a in mem:
        if group.inv(a) not in mset:
            raise NotASubgroup(f"subgroup not closed under inverse at {names[a]!r}")
        for b in mem:
            if group.mul(a, b) not in mset:
                raise NotASubgroup(f"subgroup not closed at {names[a]!r}*{names[b]!r}")
    return tuple(mem)


def double_coset_count(
    group: FiniteGroup, h1: Iterable[int], h2: Iterable[int]
) -> int:
    """Number of double cosets H1\\G/H2 for subgroups H1, H2."""
    m1 = check_subgroup(group, h1)
    m2 = check_subgroup(group, h2)
    seen: set[int] = set()
    count = 0
    for g in range(group.order):
        if g in seen:
            continue
        count += 1
        for a in m1:
            ag = group.mul(a, g)
            for b in m2:
                seen.add(group.mul(ag, b))
    return count


@dataclass(frozen=True)
class Embedding:
    """An injective homomorphism between finite groups, as an index map."""

    source: FiniteGroup
    target: FiniteGroup
    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        src, tgt, m = self.source, self.target, self.mapping
        if len(m) != src.order:
            raise ParseError("embedding map must cover every source element")
        if len(set(m)) != len(m):
            raise ParseError(f"embedding into {tgt.name!r} is not injective")
        if m[src.identity] != tgt.identity:
            raise ParseError(f"embedding into {tgt.name!r} does not preserve the identity")
        for a in range(src.order):
            for b in range(src.order):
                if m[src.mul(a, b)] != tgt.mul(m[a], m[b]):
                    raise ParseError(
                        f"embedding into {tgt.name!r} is not multiplicative at "
                        f"{src.elements[a]!r}*{src.elements[b]!r}"
                    )

    def apply(self, c: int) -> int:
        return self.mapping[c]


def embedding_from_names(
    source: FiniteGroup, target: FiniteGroup, name_map: dict[str, str]
) -> Embedding:
    """Build an Embedding from an element-name map, e.g. {"1": "102"}."""
    mapping = [target.identity] * source.order
    seen = set()
    for src_name, tgt_name in name_map.items():
        i = source.index_of(src_name)
        mapping[i] = target.index_of(tgt_name)
        seen.add(i)
    if len(seen) != source.order:
        missing = [source.elements[i] for i in range(source.order) if i not in seen]
        raise ParseError(f"embedding map missing source elements {missing}")
    return Embedding(source, target, tuple(mapping))
