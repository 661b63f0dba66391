import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypergibbs.errors import (BranchOutOfRange, DegenerateParameters, NeighboringTrees,
                               NotSeparating)
from hypergibbs.interfaces import (build_interface, canonical_selectors, corona,
                                   count_interface_prefixes,
                                   dobrushin_on_ball, enumerate_interface_prefixes,
                                   parse_selector, random_selector, reference_vertex,
                                   split_window)
from hypergibbs.lattice import BLACK, BLUE, dual
from hypergibbs.spin import GroundStateClass, broken_bonds, in_ground_state_class

from conftest import corona_of, lattice


@pytest.fixture(scope="module")
def cor55():
    return corona_of(5, 5, 6)


# ------------------------------------------------------------------ corona

def test_corona_56_first_circles():
    cor = corona_of(5, 6, 3)
    # circle 1: faces around the central pentagon's five vertices
    assert len(cor.generations[1]) == 5 * (6 - 2)
    kinds = [cor.kind(f) for f in cor.generations[1]]
    assert kinds.count(BLACK) == 5 and kinds.count(BLUE) == 15
    kinds2 = [cor.kind(f) for f in cor.generations[2]]
    assert kinds2.count(BLACK) == 55 and kinds2.count(BLUE) == 145


@pytest.mark.parametrize("p,q", [(5, 5), (5, 6), (6, 4), (5, 4), (7, 4)])
def test_origin_edges_and_trees(p, q):
    cor = corona_of(p, q, 4)
    assert len(cor.dual.neighbors(cor.origin)) == p
    assert cor.n_trees == p and cor.branching == p - 3
    trees = [cor.tree_vertices(t) for t in range(p)]
    for a, b in itertools.combinations(trees, 2):
        assert not a & b
    for t, vs in enumerate(trees):
        # full (p-3)-ary tree down to circle 3 (children listed for circles < depth)
        assert len(vs) == sum((p - 3) ** k for k in range(4))
        for f in vs:
            assert cor.kind(f) == BLACK
    # only the origin joins different trees
    owner = {f: t for t, vs in enumerate(trees) for f in vs}
    for f, g in cor.dual.edges():
        if f in owner and g in owner and owner[f] != owner[g]:
            assert cor.circle_of(f) == cor.circle_of(g)
    for (f, g), t in cor.tree_index.items():
        assert f == cor.origin or owner[f] == t
        assert owner[g] == t


@pytest.mark.parametrize("p,q", [(5, 5), (6, 4), (5, 4)])
def test_radial_emission(p, q):
    cor = corona_of(p, q, 4)
    out = {}
    for f, g in cor.radial_edges.tolist():
        out[f] = out.get(f, 0) + 1
    for n in (1, 2):
        for f in cor.generations[n].tolist():
            expect = p - 3 if cor.kind(f) == BLACK else p - 2
            assert out.get(f, 0) == expect


@pytest.mark.parametrize("p,q", [(5, 5), (6, 4)])
def test_corona_fidelity(p, q):
    cor = corona_of(p, q, 3)
    keep = set(np.concatenate(cor.generations).tolist())
    dual_edges = {(f, g) for f, g in cor.dual.edges() if f in keep and g in keep}
    corona_edges = {tuple(sorted(e)) for e in cor.radial_edges.tolist()}
    corona_edges |= {tuple(e) for e in cor.circle_edges.tolist()}
    assert corona_edges == dual_edges


@pytest.mark.parametrize("p,q", [(4, 5), (4, 6), (3, 7)])
def test_corona_degenerate_small_faces(p, q):
    with pytest.raises(DegenerateParameters):
        corona(dual(lattice(p, q, 3)), 3)


@pytest.mark.parametrize("p", [7, 8])
def test_corona_degenerate_degree3(p):
    with pytest.raises(DegenerateParameters):
        corona(dual(lattice(p, 3, 4)), 4)


# -------------------------------------------------------------- interfaces

def test_depth_one(cor55):
    i = build_interface(cor55, 0, (), 2, (), 1)
    assert len(i.dual_path) == 3 and i.dual_path[1] == cor55.origin
    assert len(i.crossed_primal_edges) == 2
    a, b = i.crossed_primal_edges
    assert not set(a) & set(b)


def test_neighbouring_trees_rejected(cor55):
    for tb in (0, 1, 4):
        with pytest.raises(NeighboringTrees):
            build_interface(cor55, 0, (0,), tb, (0,), 2)


def test_branch_validation(cor55):
    with pytest.raises(BranchOutOfRange):
        build_interface(cor55, 0, (2,), 2, (0,), 2)
    with pytest.raises(BranchOutOfRange):
        build_interface(cor55, 0, (0,), 2, (), 2)
    with pytest.raises(BranchOutOfRange):
        build_interface(cor55, 7, (0,), 2, (0,), 2)


def test_divergence(cor55):
    base = [0] * 5
    for k in range(5):
        other = list(base)
        other[k] = 1
        i1 = build_interface(cor55, 0, base, 2, base, 6)
        i2 = build_interface(cor55, 0, other, 2, base, 6)
        # paths agree up to the changed choice, then differ for good
        split = 6 + 1 + 1 + k            # side_b, origin, tree root, k choices
        assert i1.dual_path[:split] == i2.dual_path[:split]
        assert all(a != b for a, b in zip(i1.dual_path[split:], i2.dual_path[split:]))
        assert i1.crossed_primal_edges != i2.crossed_primal_edges


def test_swap_symmetry(cor55):
    i1 = build_interface(cor55, 0, (1, 0), 3, (0, 1), 3)
    i2 = build_interface(cor55, 3, (0, 1), 0, (1, 0), 3)
    assert i1.crossed_primal_edges == i2.crossed_primal_edges


@given(st.integers(0, 2 ** 32 - 1))
def test_random_interface_invariants(seed):
    cor = corona_of(5, 5, 6)
    sel = random_selector(cor, 6, np.random.default_rng(seed))
    i = build_interface(cor, *sel, 6)
    assert len(set(i.dual_path)) == len(i.dual_path) == 13
    touched = {}
    for e in i.crossed_primal_edges:
        for v in e:
            touched[v] = touched.get(v, 0) + 1
    assert max(touched.values()) == 1


# ----------------------------------------------------------------- counting

@pytest.mark.parametrize("depth", [1, 2, 3])
@pytest.mark.parametrize("pq", [(5, 5), (6, 4)])
def test_count_matches_enumeration(pq, depth):
    cor = corona_of(*pq, 4)
    assert count_interface_prefixes(cor, depth) == enumerate_interface_prefixes(cor, depth)
    assert count_interface_prefixes(cor, depth) == sum(1 for _ in canonical_selectors(cor, depth))


def test_count_depth_one_degree5(cor55):
    assert count_interface_prefixes(cor55, 1) == 5


def test_count_geometric(cor55):
    c = [count_interface_prefixes(cor55, d) for d in range(1, 6)]
    assert all(b == a * (5 - 3) ** 2 for a, b in zip(c, c[1:]))


def test_parse_selector():
    assert parse_selector("0:1,0:2:") == (0, (1, 0), 2, ())
    with pytest.raises(ValueError):
        parse_selector("0:1")


# ---------------------------------------------------------------- Dobrushin

def test_dobrushin_ball2(cor55):
    lat = cor55.dual.primal
    i = build_interface(cor55, 0, [0] * 5, 2, [0] * 5, 6)
    c = dobrushin_on_ball(lat, cor55, i, 2)
    window = set(c.values)
    inside = {e for e in i.crossed_primal_edges if set(e) <= window}
    r = broken_bonds(lat, c)
    assert r.broken_edges == inside
    assert r.delta_broken == 1
    assert in_ground_state_class(r, GroundStateClass(1))
    assert c[reference_vertex(cor55, i)] == 1


def test_dobrushin_flip_swaps_sides(cor55):
    lat = cor55.dual.primal
    i = build_interface(cor55, 1, [1, 0, 1, 0, 1], 3, [0, 0, 1, 1, 0], 6)
    c = dobrushin_on_ball(lat, cor55, i, 2)
    neg = c.negate()
    comps = split_window(lat, i.crossed_primal_edges, set(c.values))
    assert len(comps) == 2
    for comp in comps:
        assert len({c[v] for v in comp}) == 1
        assert len({neg[v] for v in comp}) == 1
        assert neg[next(iter(comp))] == -c[next(iter(comp))]


def test_not_separating_shallow():
    cor = corona_of(5, 5, 6)
    lat = cor.dual.primal
    i = build_interface(cor, 0, (), 2, (), 1)
    with pytest.raises(NotSeparating):
        dobrushin_on_ball(lat, cor, i, 2)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_dobrushin_sparsity_property(seed, r):
    cor = corona_of(5, 5, 6)
    lat = cor.dual.primal
    i = build_interface(cor, *random_selector(cor, 6, np.random.default_rng(seed)), 6)
    c = dobrushin_on_ball(lat, cor, i, r)
    assert broken_bonds(lat, c).delta_broken == 1
