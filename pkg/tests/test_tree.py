from __future__ import annotations

import random

import pytest

from oracles import bfs_distance, o_paths_from_base, orbit_count_by_stabilizer
from treeqm.errors import DegenerateTree, ParseError, PreconditionViolated
from treeqm.instance import ActionInstance
from treeqm.tree import (
    NO_ORBIT_VERTEX,
    OrientedPath,
    TreeView,
    Vertex,
    parse_key,
    suppress_valence2,
)


def random_vertex(view, rng, radius):
    v = view.base
    prev = None
    for _ in range(rng.randrange(radius + 1)):
        options = [w for w in view.raw_neighbors(v) if w != prev]
        prev, v = v, rng.choice(options)
    return v


def random_element(view, rng, length):
    inst = view.instance
    if inst.is_free:
        letters = [rng.choice([1, -1, 2, -2]) for _ in range(length)]
    else:
        letters = [
            (f, rng.randrange(inst.factors[f].group.order))
            for f in (rng.randrange(2) for _ in range(length))
        ]
    return inst.normal_form(letters)


# -- neighbors ---------------------------------------------------------------


def test_neighbor_counts(free2_view, s3z4_raw, s3z4_view):
    assert len(free2_view.neighbors(free2_view.base)) == 4
    assert len(s3z4_raw.neighbors(s3z4_raw.base)) == 3  # |A/C| cosets
    sup = s3z4_view.neighbors(s3z4_view.base)
    assert len(sup) == 3
    assert all(v.vtype == 0 for v in sup)


def test_suppressed_regularity(s3z4_view, z5z2_view, free2, free2_view):
    rng = random.Random(3)
    for view, valence in ((s3z4_view, 3), (z5z2_view, 5)):
        for _ in range(10):
            v = view.base
            for _ in range(rng.randrange(4)):
                v = rng.choice(view.neighbors(v))
            assert len(view.neighbors(v)) == valence
    # free trees are unchanged by suppression
    sup = suppress_valence2(free2)
    assert sup.neighbors(sup.base) == free2_view.neighbors(free2_view.base)


def test_degenerate_suppression_rejected():
    from treeqm.groups import cyclic_group, embedding_from_names

    z2 = cyclic_group(2)
    z1 = cyclic_group(1)
    inf_dihedral = ActionInstance.amalgam(
        z2, z2, z1,
        embedding_from_names(z1, z2, {"0": "0"}),
        embedding_from_names(z1, z2, {"0": "0"}),
    )
    with pytest.raises(DegenerateTree):
        suppress_valence2(inf_dihedral)


def test_root_flag_and_suppressed_base(s3z4):
    # rooting at B in suppressed mode is rejected (B-vertices have valence 2)
    with pytest.raises(ParseError):
        TreeView(s3z4, mode="suppressed", root="B")
    view_b = TreeView(s3z4, mode="raw", root="B")
    assert view_b.base == Vertex((), 1)
    assert len(view_b.neighbors(view_b.base)) == 2


# -- geodesics, medians, distances -----------------------------------------


def test_geodesic_trivial_and_prefix(free2_view):
    e = free2_view.base
    assert free2_view.geodesic(e, e).vertices == (e,)
    xy = Vertex((1, 2), 0)
    path = free2_view.geodesic(e, xy)
    assert path.vertices == (e, Vertex((1,), 0), xy)


def test_geodesic_matches_bfs(s3z4_raw, free2_view):
    rng = random.Random(5)
    for view, radius in ((s3z4_raw, 6), (free2_view, 3)):
        for _ in range(50):
            x = random_vertex(view, rng, radius)
            y = random_vertex(view, rng, radius)
            path = view.geodesic(x, y)
            assert path.raw_length == bfs_distance(view, x, y)
            assert path.vertices[0] == x and path.vertices[-1] == y
            # reversal symmetry
            assert view.geodesic(y, x).vertices == tuple(reversed(path.vertices))


def test_geodesic_equivariance(s3z4_raw):
    rng = random.Random(9)
    for _ in range(30):
        g = random_element(s3z4_raw, rng, rng.randrange(5))
        x = random_vertex(s3z4_raw, rng, 5)
        y = random_vertex(s3z4_raw, rng, 5)
        moved = s3z4_raw.act_path(g, s3z4_raw.geodesic(x, y))
        direct = s3z4_raw.geodesic(s3z4_raw.act(g, x), s3z4_raw.act(g, y))
        assert moved.vertices == direct.vertices


def test_median(free2_view, s3z4_raw):
    e = free2_view.base
    x = Vertex((1,), 0)
    y = Vertex((2,), 0)
    assert free2_view.median(x, x, y) == x
    assert free2_view.median(e, x, y) == e
    rng = random.Random(21)
    for _ in range(50):
        xs = [random_vertex(s3z4_raw, rng, 6) for _ in range(3)]
        m = s3z4_raw.median(*xs)
        for i in range(3):
            for j in range(i + 1, 3):
                assert m in s3z4_raw.geodesic(xs[i], xs[j]).vertices
        # symmetric in its arguments
        assert s3z4_raw.median(xs[2], xs[0], xs[1]) == m


# -- orbit lengths ----------------------------------------------------------


def test_o_length(free2_view, s3z4_raw):
    e = free2_view.base
    path = free2_view.geodesic(e, Vertex((1, 2, 1), 0))
    assert free2_view.o_length(path) == 3

    base = s3z4_raw.base
    mid = Vertex((), 1)
    r = s3z4_raw.instance.factors[1].transversal[1]
    far = Vertex(((1, r),), 0)
    two_step = s3z4_raw.validate_path([base, mid, far])
    assert s3z4_raw.o_length(two_step) == 1
    assert s3z4_raw.o_length(OrientedPath((base, mid))) == 0
    assert s3z4_raw.o_length(OrientedPath((mid,))) is NO_ORBIT_VERTEX


def test_o_length_additivity(s3z4_raw):
    rng = random.Random(33)
    for _ in range(30):
        x = random_vertex(s3z4_raw, rng, 8)
        y = random_vertex(s3z4_raw, rng, 8)
        path = s3z4_raw.geodesic(x, y)
        opos = s3z4_raw.o_positions(path)
        if len(opos) < 3:
            continue
        cut = opos[rng.randrange(1, len(opos) - 1)]
        left = path.slice(0, cut)
        right = path.slice(cut, path.raw_length)
        ol, orr = s3z4_raw.o_length(left), s3z4_raw.o_length(right)
        whole = s3z4_raw.o_length(path)
        assert ol + orr == whole


# -- orbit keys --------------------------------------------------------------


def test_free_edge_keys_distinct(free2_view):
    e = free2_view.base
    keys = set()
    for letter in (1, -1, 2, -2):
        path = free2_view.geodesic(e, Vertex((letter,), 0))
        keys.add(free2_view.orbit_key(path))
    assert len(keys) == 4


def test_s3z4_o_edges_share_key(s3z4_view):
    base = s3z4_view.base
    keys = set()
    edges = []
    for w in s3z4_view.neighbors(base):
        path = s3z4_view.geodesic(base, w)
        keys.add(s3z4_view.orbit_key(path))
        edges.append(path)
    assert len(keys) == 1
    # oracle: explicit stabilizer orbit covers all three oriented o-edges
    stab = s3z4_view.stabilizer(base)
    orbit = {tuple(s3z4_view.act(s, v) for v in edges[0].vertices) for s in stab}
    assert {e.vertices for e in edges} <= orbit


def test_orbit_key_invariance(s3z4_raw, free2_view):
    rng = random.Random(41)
    for view in (s3z4_raw, free2_view):
        for _ in range(100):
            x = random_vertex(view, rng, 5)
            y = random_vertex(view, rng, 5)
            if x == y:
                continue
            path = view.geodesic(x, y)
            g = random_element(view, rng, rng.randrange(6))
            assert view.orbit_key(path) == view.orbit_key(view.act_path(g, path))


def test_orbit_key_round_trip_format(s3z4_view, free2_view):
    for view, n in ((s3z4_view, 2), (free2_view, 2)):
        for key_str in view.enumerate_orbits(n, "orbit"):
            assert view.orbit_key(view.enumerate_orbits(n, "orbit")[key_str]) == key_str
            parse_key(key_str)


# -- enumeration -------------------------------------------------------------


def test_enumerate_free_edges(free2_view):
    orbits = free2_view.enumerate_orbits(1, "metric")
    assert len(orbits) == 4


@pytest.mark.parametrize("n,count", [(1, 1), (2, 1), (3, 2)])
def test_enumerate_s3z4_orbit_counts(s3z4_view, n, count):
    orbits = s3z4_view.enumerate_orbits(n, "orbit")
    assert len(orbits) == count
    # oracle: exhaustive stabilizer-orbit count over all base-anchored paths
    paths = o_paths_from_base(s3z4_view, n)
    assert orbit_count_by_stabilizer(s3z4_view, paths) == count


def test_enumerate_z5z2_orbit_counts(z5z2_view):
    assert len(z5z2_view.enumerate_orbits(1, "orbit")) == 1
    assert len(z5z2_view.enumerate_orbits(2, "orbit")) == 4


def test_z5z2_raw_metric2_b_endpoints(z5z2):
    raw = TreeView(z5z2, mode="raw")
    orbits = raw.enumerate_orbits(2, "metric")
    b_ended = [
        p for p in orbits.values() if p.start.vtype == 1 and p.end.vtype == 1
    ]
    assert len(b_ended) >= 2


def test_orbit_key_completeness_spot_check(free2_view):
    # no short group element maps one representative onto another
    orbits = list(free2_view.enumerate_orbits(1, "metric").values())
    inst = free2_view.instance
    words = [()]
    for _ in range(4):
        words = [w + (l,) for w in words for l in (1, -1, 2, -2)]
        for w in words:
            g = inst.normal_form(list(w))
            for i, p in enumerate(orbits):
                moved = free2_view.act_path(g, p)
                for j, q in enumerate(orbits):
                    if i != j:
                        assert moved.vertices != q.vertices


# -- spheres and stabilizers ---------------------------------------------------


def test_sphere_transitivity(free2_view, s3z4_view):
    assert free2_view.sphere_transitivity(free2_view.base, 1) is False
    assert s3z4_view.sphere_transitivity(s3z4_view.base, 1) is True
    assert s3z4_view.sphere_transitivity(s3z4_view.base, 3) is False


def test_pointwise_stabilizer(s3z4_raw, free2_view):
    base = s3z4_raw.base
    adj_b = Vertex((), 1)
    assert s3z4_raw.pointwise_stabilizer_order(base, adj_b) == 2
    assert s3z4_raw.pointwise_stabilizer_order(base, base) == 6
    e = free2_view.base
    assert free2_view.pointwise_stabilizer_order(e, Vertex((1,), 0)) == 1


def test_validate_path_rejects_garbage(free2_view):
    e = free2_view.base
    x = Vertex((1,), 0)
    far = Vertex((2, 1), 0)
    with pytest.raises(PreconditionViolated):
        free2_view.validate_path([e, far])
    with pytest.raises(PreconditionViolated):
        free2_view.validate_path([x, e, x])
