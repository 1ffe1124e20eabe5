from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from treeqm.groups import cyclic_group, embedding_from_names, symmetric_group
from treeqm.instance import ActionInstance
from treeqm.tree import TreeView, suppress_valence2


def make_s3_z2_z4() -> ActionInstance:
    """S3 amalgamated with Z4 over Z2 = <transposition (01)> = <2 in Z4>."""
    s3 = symmetric_group(3)
    z4 = cyclic_group(4)
    z2 = cyclic_group(2)
    embed_a = embedding_from_names(z2, s3, {"0": "012", "1": "102"})
    embed_b = embedding_from_names(z2, z4, {"0": "0", "1": "2"})
    return ActionInstance.amalgam(s3, z4, z2, embed_a, embed_b)


def make_z5_z2() -> ActionInstance:
    """Free product Z5 * Z2 (trivial amalgamated subgroup)."""
    z5 = cyclic_group(5)
    z2 = cyclic_group(2)
    z1 = cyclic_group(1)
    embed_a = embedding_from_names(z1, z5, {"0": "0"})
    embed_b = embedding_from_names(z1, z2, {"0": "0"})
    return ActionInstance.amalgam(z5, z2, z1, embed_a, embed_b)


@pytest.fixture(scope="session")
def free2() -> ActionInstance:
    return ActionInstance.free(2)


@pytest.fixture(scope="session")
def s3z4() -> ActionInstance:
    return make_s3_z2_z4()


@pytest.fixture(scope="session")
def z5z2() -> ActionInstance:
    return make_z5_z2()


@pytest.fixture(scope="session")
def free2_view(free2) -> TreeView:
    return TreeView(free2)


@pytest.fixture(scope="session")
def s3z4_raw(s3z4) -> TreeView:
    return TreeView(s3z4, mode="raw")


@pytest.fixture(scope="session")
def s3z4_view(s3z4) -> TreeView:
    return suppress_valence2(s3z4)


@pytest.fixture(scope="session")
def z5z2_view(z5z2) -> TreeView:
    return suppress_valence2(z5z2)
