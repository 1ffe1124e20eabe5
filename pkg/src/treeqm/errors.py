"""Exception types shared across the package."""


class TreeQmError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TreeQmError):
    """Malformed instance file, unknown builtin group, or unparsable word."""


class NotLatinSquare(TreeQmError):
    """A multiplication table row or column repeats an entry."""


class NoIdentity(TreeQmError):
    """The table has no two-sided identity element."""


class NonAssociative(TreeQmError):
    """Associativity fails; the message names the offending triple."""


class UnknownLetter(TreeQmError):
    """A word contains a letter outside the instance's generating data."""


class NotASubgroup(TreeQmError):
    """A claimed subgroup is not closed under the table."""


class DegenerateTree(TreeQmError):
    """The suppressed tree is a point, an edge, or a line."""


class ResourceLimit(TreeQmError):
    """An enumeration exceeded its configured node budget."""


class NoOrbitVertexError(TreeQmError):
    """A path or axis unexpectedly contains no basepoint-orbit vertex."""


class EllipticElement(TreeQmError):
    """The element fixes a vertex, so it has no axis."""


class EllipticProduct(TreeQmError):
    """A witness product g1*g3 turned out elliptic (degenerate parameters)."""


class NoOrbitVertexOnAxis(NoOrbitVertexError):
    """The axis of a hyperbolic element carries no basepoint-orbit vertex."""


class PreconditionViolated(TreeQmError):
    """An operation's stated precondition fails; the message names the culprit."""


class RealizationFailed(TreeQmError):
    """A word could not be realized as an oriented orbit-geodesic.

    Carries the failing position so callers can distinguish a labelling bug
    from an insufficient search budget.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at letter position {position})")
        self.position = position


class ParamsTooSmall(TreeQmError):
    """Word-family parameters would collide block exponents across indices."""


class UndefinedInverseLabel(TreeQmError):
    """A reversed orbit carries label 'c', so the inverse word is undefined."""


class Inconclusive(TreeQmError):
    """A bounded search could not complete a case analysis; never a guess."""
