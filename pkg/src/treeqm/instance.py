"""Group-acting-on-tree instances: amalgams of finite groups and free groups.

Element arithmetic lives here.  Amalgam elements are stored in the normal
form ``t_1 t_2 ... t_k c`` where the ``t_i`` alternate between nontrivial
left-coset transversal representatives of the two factors and ``c`` lies in
the amalgamated subgroup.  With this convention the Bass-Serre vertex cosets
are exactly the alternating transversal words, which downstream tree code
relies on.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import ParseError, UnknownLetter
from .groups import Embedding, FiniteGroup, builtin_group, embedding_from_names, validate_group

FACTOR_A = 0
FACTOR_B = 1
FACTOR_NAMES = ("A", "B")

# A letter is (factor, element index in that factor's group).
Letter = tuple[int, int]


class AmalgamElement(NamedTuple):
    """Normal form: alternating transversal reps, then a subgroup element."""

    reps: tuple[Letter, ...]
    c: int


class FreeElement(NamedTuple):
    """A reduced word in signed generator indices (1-based, sign = inverse)."""

    word: tuple[int, ...]


GroupElement = AmalgamElement | FreeElement


@dataclass(frozen=True, eq=False)
class _FactorData:
    """Precomputed coset data for one factor of an amalgam."""

    group: FiniteGroup
    embed: Embedding
    # image[c] = embedded index of the c-th subgroup element; inv_image inverts it
    image: tuple[int, ...]
    inv_image: dict[int, int]
    # x = transversal rep * image[c]; decomp[x] = (rep element index, c)
    decomp: tuple[tuple[int, int], ...]
    transversal: tuple[int, ...]  # element indices; position 0 is the identity
    rep_pos: dict[int, int]


def _factor_data(group: FiniteGroup, embed: Embedding) -> _FactorData:
    image = embed.mapping
    inv_image = {t: c for c, t in enumerate(image)}
    assigned: dict[int, tuple[int, int]] = {}
    transversal: list[int] = []
    for x in range(group.order):
        if x in assigned:
            continue
        coset = [group.mul(x, t) for t in image]
        rep = group.identity if group.identity in coset else x
        transversal.append(rep)
        rep_inv = group.inv(rep)
        for y in coset:
            assigned[y] = (rep, inv_image[group.mul(rep_inv, y)])
    # identity's coset first, remaining reps keep table order
    transversal.sort(key=lambda r: (r != group.identity, r))
    rep_pos = {r: i for i, r in enumerate(transversal)}
    decomp = tuple(assigned[x] for x in range(group.order))
    return _FactorData(group, embed, tuple(image), inv_image, decomp, tuple(transversal), rep_pos)


@dataclass(frozen=True, eq=False)
class ActionInstance:
    """An amalgam of finite groups over a common subgroup, or a free group.

    Immutable after construction; all operations are pure functions.
    """

    kind: str  # "amalgam" | "free"
    rank: int = 0
    subgroup: FiniteGroup | None = None
    factors: tuple[_FactorData, ...] = ()
    source: dict = field(default_factory=dict, compare=False)

    # -- construction ---------------------------------------------------

    @staticmethod
    def free(rank: int) -> "ActionInstance":
        if rank < 2:
            raise ParseError(f"free rank must be at least 2, got {rank}")
        return ActionInstance(kind="free", rank=rank, source={"kind": "free", "rank": rank})

    @staticmethod
    def amalgam(
        a: FiniteGroup,
        b: FiniteGroup,
        c: FiniteGroup,
        embed_a: Embedding,
        embed_b: Embedding,
        source: dict | None = None,
    ) -> "ActionInstance":
        fa = _factor_data(a, embed_a)
        fb = _factor_data(b, embed_b)
        for fd, label in ((fa, "A"), (fb, "B")):
            if len(fd.transversal) < 2:
                raise ParseError(
                    f"amalgam is not proper: the subgroup image equals factor {label}"
                )
        src = source or {
            "kind": "amalgam",
            "A": a.as_dict(),
            "B": b.as_dict(),
            "C": c.as_dict(),
            "embedA": {c.elements[i]: a.elements[t] for i, t in enumerate(embed_a.mapping)},
            "embedB": {c.elements[i]: b.elements[t] for i, t in enumerate(embed_b.mapping)},
        }
        return ActionInstance(kind="amalgam", subgroup=c, factors=(fa, fb), source=src)

    # -- basic queries ---------------------------------------------------

    @property
    def is_free(self) -> bool:
        return self.kind == "free"

    def factor_group(self, factor: int) -> FiniteGroup:
        return self.factors[factor].group

    def coset_counts(self) -> tuple[int, int]:
        """(|A / C|, |B / C|) for amalgams."""
        return (len(self.factors[0].transversal), len(self.factors[1].transversal))

    def fingerprint(self) -> str:
        blob = json.dumps(self.source, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def transversal_names(self) -> dict[str, list[str]]:
        """The fixed transversal choice, recorded in reports."""
        out = {}
        for f, fd in zip(FACTOR_NAMES, self.factors):
            out[f] = [fd.group.elements[x] for x in fd.transversal]
        return out

    # -- element arithmetic ----------------------------------------------

    def identity(self) -> GroupElement:
        if self.is_free:
            return FreeElement(())
        return AmalgamElement((), self.subgroup.identity)

    def _append(self, reps: list[Letter], c: int, factor: int, elt: int) -> int:
        """Right-multiply the state ``reps * c`` by one factor letter; new c."""
        fd = self.factors[factor]
        g = fd.group
        y = g.mul(fd.image[c], elt)
        if reps and reps[-1][0] == factor:
            y = g.mul(reps.pop()[1], y)
        rep, c_new = fd.decomp[y]
        if rep != g.identity:
            reps.append((factor, rep))
        return c_new

    def normal_form(self, letters: Iterable[Letter | int]) -> GroupElement:
        """Fold a word of letters into its unique normal form."""
        if self.is_free:
            word: list[int] = []
            for letter in letters:
                x = int(letter)  # type: ignore[arg-type]
                if x == 0 or abs(x) > self.rank:
                    raise UnknownLetter(f"free letter {x} outside rank {self.rank}")
                if word and word[-1] == -x:
                    word.pop()
                else:
                    word.append(x)
            return FreeElement(tuple(word))
        reps: list[Letter] = []
        c = self.subgroup.identity
        for letter in letters:
            factor, elt = letter  # type: ignore[misc]
            if factor not in (FACTOR_A, FACTOR_B):
                raise UnknownLetter(f"unknown factor tag {factor!r}")
            if not 0 <= elt < self.factors[factor].group.order:
                raise UnknownLetter(f"element index {elt} outside factor {FACTOR_NAMES[factor]}")
            c = self._append(reps, c, factor, elt)
        return AmalgamElement(tuple(reps), c)

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if self.is_free:
            return self.normal_form(list(a.word) + list(b.word))  # type: ignore[union-attr]
        reps = list(a.reps)  # type: ignore[union-attr]
        c = a.c  # type: ignore[union-attr]
        for factor, elt in b.reps:  # type: ignore[union-attr]
            c = self._append(reps, c, factor, elt)
        c = self.subgroup.mul(c, b.c)  # type: ignore[union-attr]
        return AmalgamElement(tuple(reps), c)

    def invert(self, a: GroupElement) -> GroupElement:
        if self.is_free:
            return FreeElement(tuple(-x for x in reversed(a.word)))  # type: ignore[union-attr]
        reps: list[Letter] = []
        c = self.subgroup.inv(a.c)  # type: ignore[union-attr]
        for factor, elt in reversed(a.reps):  # type: ignore[union-attr]
            c = self._append(reps, c, factor, self.factors[factor].group.inv(elt))
        return AmalgamElement(tuple(reps), c)

    def power(self, a: GroupElement, n: int) -> GroupElement:
        if n < 0:
            return self.power(self.invert(a), -n)
        out = self.identity()
        for _ in range(n):
            out = self.multiply(out, a)
        return out

    def syllable_length(self, a: GroupElement) -> int:
        if self.is_free:
            return len(a.word)  # type: ignore[union-attr]
        return len(a.reps)  # type: ignore[union-attr]

    def invert_letter(self, letter: Letter | int) -> Letter | int:
        if self.is_free:
            return -letter  # type: ignore[operator]
        factor, elt = letter  # type: ignore[misc]
        return (factor, self.factors[factor].group.inv(elt))

    # -- word syntax -------------------------------------------------------

    def parse_word(self, text: str) -> GroupElement:
        """Parse a dotted word: free "1.-2.1"; amalgam "A:r.B:1"."""
        text = text.strip()
        if not text or text == "e":
            return self.identity()
        letters: list[Letter | int] = []
        for tok in text.split("."):
            tok = tok.strip()
            if self.is_free:
                try:
                    letters.append(int(tok))
                except ValueError:
                    raise UnknownLetter(f"bad free-group letter {tok!r}") from None
            else:
                factor_name, _, elt_name = tok.partition(":")
                if factor_name not in FACTOR_NAMES or not elt_name:
                    raise UnknownLetter(f"bad amalgam letter {tok!r} (want A:name or B:name)")
                factor = FACTOR_NAMES.index(factor_name)
                try:
                    elt = self.factors[factor].group.index_of(elt_name)
                except ParseError:
                    raise UnknownLetter(
                        f"no element {elt_name!r} in factor {factor_name}"
                    ) from None
                letters.append((factor, elt))
        return self.normal_form(letters)

    def format_element(self, a: GroupElement) -> str:
        if self.is_free:
            return ".".join(str(x) for x in a.word) if a.word else "e"  # type: ignore[union-attr]
        parts = [
            f"{FACTOR_NAMES[f]}:{self.factors[f].group.elements[x]}" for f, x in a.reps  # type: ignore[union-attr]
        ]
        if a.c != self.subgroup.identity:  # type: ignore[union-attr]
            parts.append(f"A:{self.factors[0].group.elements[self.factors[0].image[a.c]]}")  # type: ignore[union-attr]
        return ".".join(parts) if parts else "e"


def _group_from_spec(spec, name: str) -> FiniteGroup:
    if isinstance(spec, str):
        return builtin_group(spec)
    if isinstance(spec, dict) and "elements" in spec and "table" in spec:
        return validate_group(spec["elements"], spec["table"], name=name)
    raise ParseError(f"group {name!r} must be a builtin name or {{elements, table}}")


def load_instance(data: dict | str | Path) -> ActionInstance:
    """Load an instance from a JSON file path or an already-parsed dict."""
    if isinstance(data, (str, Path)):
        try:
            raw = json.loads(Path(data).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read instance file: {exc}") from exc
    else:
        raw = data
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ParseError("instance must be a JSON object with a 'kind' field")
    kind = raw["kind"]
    if kind == "free":
        return ActionInstance.free(int(raw.get("rank", 0)))
    if kind == "hnn":
        raise ParseError("HNN extensions are rejected at load; only amalgam|free supported")
    if kind != "amalgam":
        raise ParseError(f"unknown instance kind {kind!r}")
    a = _group_from_spec(raw.get("A"), "A")
    b = _group_from_spec(raw.get("B"), "B")
    c = _group_from_spec(raw.get("C"), "C")
    if c.order == 1:
        embed_a = Embedding(c, a, (a.identity,))
        embed_b = Embedding(c, b, (b.identity,))
    else:
        if "embedA" not in raw or "embedB" not in raw:
            raise ParseError("amalgam with nontrivial C requires embedA and embedB maps")
        embed_a = embedding_from_names(c, a, raw["embedA"])
        embed_b = embedding_from_names(c, b, raw["embedB"])
    canonical = {
        "kind": "amalgam",
        "A": raw.get("A") if isinstance(raw.get("A"), str) else a.as_dict(),
        "B": raw.get("B") if isinstance(raw.get("B"), str) else b.as_dict(),
        "C": raw.get("C") if isinstance(raw.get("C"), str) else c.as_dict(),
        "embedA": {c.elements[i]: a.elements[t] for i, t in enumerate(embed_a.mapping)},
        "embedB": {c.elements[i]: b.elements[t] for i, t in enumerate(embed_b.mapping)},
    }
    return ActionInstance.amalgam(a, b, c, embed_a, embed_b, source=canonical)
