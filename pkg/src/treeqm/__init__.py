"""Counting quasimorphisms for groups acting on simplicial trees."""

from .groups import FiniteGroup, double_coset_count, validate_group
from .instance import ActionInstance, load_instance
from .tree import NO_ORBIT_VERTEX, OrientedPath, TreeView, Vertex, suppress_valence2

__all__ = [
    "ActionInstance",
    "FiniteGroup",
    "NO_ORBIT_VERTEX",
    "OrientedPath",
    "TreeView",
    "Vertex",
    "double_coset_count",
    "load_instance",
    "suppress_valence2",
    "validate_group",
]
