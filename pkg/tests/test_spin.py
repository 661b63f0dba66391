import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypergibbs.errors import MissingSpinError, OutOfRegionError
from hypergibbs.lattice import ball, edge_boundary
from hypergibbs.spin import (BrokenBondReport, Contour, GroundStateClass, SpinConfiguration,
                             broken_bonds, compatible, energy, excess_energy,
                             excess_energy_bound, excess_energy_sweep, flip_contour,
                             hamiltonian, hamiltonian_coupling, in_ground_state_class,
                             random_connected_set)

from conftest import lattice


@pytest.fixture(scope="module")
def lat():
    return lattice(5, 4, 5)


@pytest.fixture(scope="module")
def region(lat):
    return frozenset(ball(lat, 2, lat.origin))


def random_config(lat, region, seed):
    rng = np.random.default_rng(seed)
    return SpinConfiguration.from_function(lat, region, lambda v: int(rng.choice([-1, 1])))


def region_edge_counts(lat, region):
    inner = sum(1 for v in region for w in lat.adj[v] if w in region) // 2
    bnd = sum(1 for v in region for w in lat.adj[v] if w not in region)
    return inner, bnd


# ------------------------------------------------------------ hamiltonian

def test_all_plus_zero(lat, region):
    c = SpinConfiguration.uniform(lat, region, 1)
    assert hamiltonian(lat, region, c, c) == 0


def test_single_minus(lat, region):
    c = SpinConfiguration.uniform(lat, region, 1).with_values({lat.origin: -1})
    assert energy(lat, c) == lat.q


def test_missing_spin(lat, region):
    sigma = {v: 1 for v in region}
    with pytest.raises(MissingSpinError):
        hamiltonian(lat, region, sigma, sigma)


def test_configuration_validation(lat, region):
    with pytest.raises(ValueError):
        SpinConfiguration(region, {v: 0 for v in region})
    with pytest.raises(MissingSpinError):
        SpinConfiguration(region, {})
    partial = SpinConfiguration(region, {v: 1 for v in region})
    with pytest.raises(MissingSpinError):
        partial.check(lat)


@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_forms_agree_on_differences(seed1, seed2):
    lat = lattice(5, 4, 5)
    region = frozenset(ball(lat, 2, lat.origin))
    a, b = random_config(lat, region, seed1), random_config(lat, region, seed2)
    # same boundary for both
    b = b.with_values({v: a[v] for v in a.shell})
    dh = energy(lat, a) - energy(lat, b)
    dc = hamiltonian_coupling(lat, region, a, a) - hamiltonian_coupling(lat, region, b, b)
    assert 2 * dh == dc
    inner, bnd = region_edge_counts(lat, region)
    assert hamiltonian_coupling(lat, region, a, a) == 2 * energy(lat, a) - inner - bnd


@given(st.integers(0, 10_000))
def test_global_flip_symmetry(seed):
    lat = lattice(5, 4, 5)
    region = frozenset(ball(lat, 2, lat.origin))
    a = random_config(lat, region, seed)
    assert energy(lat, a) == energy(lat, a.negate())


# ------------------------------------------------------------ broken bonds

def test_constant_no_broken(lat, region):
    r = broken_bonds(lat, SpinConfiguration.uniform(lat, region, -1))
    assert r.broken_edges == frozenset() and r.delta_broken == 0


def test_single_flip_broken(lat, region):
    c = SpinConfiguration.uniform(lat, region, 1).with_values({lat.origin: -1})
    r = broken_bonds(lat, c)
    assert r.delta_broken == lat.q
    assert len(r.broken_edges) == lat.q
    assert lat.origin in r.broken_vertices


@given(st.integers(0, 10_000))
def test_delta_broken_definition(seed):
    lat = lattice(5, 4, 5)
    region = frozenset(ball(lat, 2, lat.origin))
    c = random_config(lat, region, seed)
    r = broken_bonds(lat, c)
    deg = {}
    for u, v in r.broken_edges:
        assert c[u] != c[v]
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    assert r.delta_broken == max(deg.values(), default=0)
    assert r.broken_vertices == frozenset(deg)


def test_ground_state_class():
    empty = BrokenBondReport(frozenset(), frozenset(), 0)
    one = BrokenBondReport(frozenset({(0, 1)}), frozenset({0, 1}), 1)
    five = BrokenBondReport(frozenset(), frozenset(), 5)
    assert in_ground_state_class(empty, GroundStateClass(0))
    assert in_ground_state_class(empty, GroundStateClass(3))
    assert in_ground_state_class(one, GroundStateClass(1))
    assert not in_ground_state_class(five, GroundStateClass(1))
    with pytest.raises(ValueError):
        GroundStateClass(-1)


# ----------------------------------------------------------------- contours

def test_contour_requires_connected(lat):
    with pytest.raises(ValueError):
        Contour.from_support(lat, {0, 2})
    with pytest.raises(ValueError):
        Contour.from_support(lat, set())
    g = Contour.from_support(lat, set(lat.face(0)))
    assert g.boundary_edges == frozenset(edge_boundary(lat, g.support))


def test_flip_involution_and_region(lat, region):
    c = random_config(lat, region, 3)
    g = Contour.from_support(lat, {lat.origin})
    assert flip_contour(flip_contour(c, g), g) == c
    far = Contour.from_support(lat, {max(c.shell)})
    with pytest.raises(OutOfRegionError):
        flip_contour(c, far)


def test_flip_whole_region(lat, region):
    c = SpinConfiguration.uniform(lat, region, 1)
    g = Contour.from_support(lat, region)
    f = flip_contour(c, g)
    _, bnd = region_edge_counts(lat, region)
    assert energy(lat, f) == bnd
    assert broken_bonds(lat, f).broken_edges <= frozenset(
        (min(u, w), max(u, w)) for u, w in edge_boundary(lat, region))


def test_single_vertex_flip_energy(lat, region):
    c = SpinConfiguration.uniform(lat, region, 1)
    g = Contour.from_support(lat, {lat.origin})
    assert energy(lat, flip_contour(c, g)) - energy(lat, c) == lat.q


def test_compatible(lat):
    a = Contour.from_support(lat, {0})
    b = Contour.from_support(lat, {2})
    c = Contour.from_support(lat, {0, 1})
    assert compatible(a, b)
    assert not compatible(a, a)
    assert not compatible(a, c)


# ------------------------------------------------------------ excess energy

def test_excess_singleton_all_plus(lat, region):
    c = SpinConfiguration.uniform(lat, region, 1)
    assert excess_energy(lat, c, Contour.from_support(lat, {lat.origin})) == (lat.q, lat.q, 0)


def test_excess_one_broken(lat, region):
    o = lat.origin
    w = lat.adj[o][0]
    c = SpinConfiguration.uniform(lat, region, 1).with_values({w: -1})
    assert excess_energy(lat, c, Contour.from_support(lat, {o})) == (lat.q - 2, lat.q, 1)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8))
def test_identity_property(seed, size):
    lat = lattice(5, 5, 4)
    region = frozenset(ball(lat, 2, lat.origin))
    rng = np.random.default_rng(seed)
    c = random_config(lat, region, seed)
    g = Contour.from_support(lat, random_connected_set(lat, region, size, rng))
    dh, nb, cr = excess_energy(lat, c, g)
    assert dh == nb - 2 * cr
    d = broken_bonds(lat, c).delta_broken
    assert dh >= excess_energy_bound(lat.p, lat.q, d, len(g)) - 1e-9


def test_bound_values():
    assert abs(excess_energy_bound(5, 5, 0, 1) - math.sqrt(5)) < 1e-12
    assert abs(excess_energy_bound(5, 5, 1, 3) - 3 * (math.sqrt(5) - 2)) < 1e-12
    assert abs(excess_energy_bound(5, 5, 1, 3) - 0.708) < 1e-3


def test_sweep_deterministic(lat):
    a = [t.row() for t in excess_energy_sweep(lat, 3, 20, 7)]
    b = [t.row() for t in excess_energy_sweep(lat, 3, 20, 7)]
    assert a == b
    assert all(r["bound_satisfied"] for r in a)
