"""Spin configurations, the indicator-form Hamiltonian, broken bonds,
contours and the exact excess-energy identity.

Spins are +-1.  A configuration carries its region ``Lambda`` and values on
``Lambda`` together with the outer shell, so every vertex of ``Lambda`` sees
all ``q`` neighbours.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import MissingSpinError, OutOfRegionError
from .isoperimetry import ic_formula
from .lattice import HyperbolicLattice, ball, edge_boundary, is_connected

BOUND_TOL = 1e-9


def outer_shell(lat: HyperbolicLattice, region) -> set[int]:
    region = set(region)
    lat.require_interior(region)
    return {w for v in region for w in lat.adj[v] if w not in region}


@dataclass(frozen=True)
class SpinConfiguration(Mapping):
    """+-1 values on ``region`` plus its outer shell."""

    region: frozenset
    values: Mapping

    def __post_init__(self):
        object.__setattr__(self, "region", frozenset(int(v) for v in self.region))
        vals = {int(k): int(s) for k, s in self.values.items()}
        bad = [k for k, s in vals.items() if s not in (-1, 1)]
        if bad:
            raise ValueError(f"spins must be +-1; vertex {bad[0]} has {vals[bad[0]]}")
        missing = self.region - vals.keys()
        if missing:
            raise MissingSpinError(f"region vertex {min(missing)} has no spin")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, v):
        try:
            return self.values[v]
        except KeyError:
            raise MissingSpinError(f"no spin defined at vertex {v}") from None

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    @property
    def shell(self) -> frozenset:
        return frozenset(self.values.keys() - self.region)

    def check(self, lat: HyperbolicLattice) -> None:
        """Every region vertex must see all of its neighbours."""
        lat.require_interior(self.region)
        for v in self.region:
            for w in lat.adj[v]:
                if w not in self.values:
                    raise MissingSpinError(f"neighbour {w} of region vertex {v} has no spin")

    def negate(self) -> "SpinConfiguration":
        return SpinConfiguration(self.region, {v: -s for v, s in self.values.items()})

    def with_values(self, updates: Mapping) -> "SpinConfiguration":
        vals = dict(self.values)
        vals.update(updates)
        return SpinConfiguration(self.region, vals)

    @classmethod
    def uniform(cls, lat, region, value: int = 1) -> "SpinConfiguration":
        region = frozenset(region)
        dom = region | outer_shell(lat, region)
        return cls(region, {v: value for v in dom})

    @classmethod
    def from_function(cls, lat, region, fn) -> "SpinConfiguration":
        region = frozenset(region)
        dom = region | outer_shell(lat, region)
        return cls(region, {v: fn(v) for v in sorted(dom)})

    @classmethod
    def on_ball(cls, lat, radius: int, fn=None, center=None) -> "SpinConfiguration":
        """Region ``ball(radius, center)``; ``fn`` defaults to all plus."""
        c = lat.origin if center is None else center
        region = ball(lat, radius, c)
        return cls.from_function(lat, region, fn or (lambda v: 1))


@dataclass(frozen=True)
class Contour:
    support: frozenset
    boundary_edges: frozenset = field(compare=False)

    @classmethod
    def from_support(cls, lat: HyperbolicLattice, support) -> "Contour":
        support = frozenset(int(v) for v in support)
        if not support:
            raise ValueError("contour support must be non-empty")
        if not is_connected(lat, support):
            raise ValueError("contour support must be connected")
        return cls(support, frozenset(edge_boundary(lat, support)))

    def __len__(self):
        return len(self.support)


@dataclass(frozen=True)
class BrokenBondReport:
    broken_edges: frozenset
    broken_vertices: frozenset
    delta_broken: int


@dataclass(frozen=True)
class GroundStateClass:
    delta_max: int

    def __post_init__(self):
        if self.delta_max < 0:
            raise ValueError("delta_max must be >= 0")


# ------------------------------------------------------------- energies

def _region_edges(lat, region):
    inner, bnd = [], []
    for v in region:
        for w in lat.adj[v]:
            if w in region:
                if v < w:
                    inner.append((v, w))
            else:
                bnd.append((v, w))
    return inner, bnd


def hamiltonian(lat: HyperbolicLattice, region, sigma: Mapping, omega: Mapping) -> int:
    """Number of disagreeing pairs: inside ``region`` (read from ``sigma``)
    plus region-to-exterior pairs (exterior read from ``omega``)."""
    region = set(region)
    lat.require_interior(region)
    inner, bnd = _region_edges(lat, region)
    h = 0
    try:
        for v, w in inner:
            h += sigma[v] != sigma[w]
        for v, w in bnd:
            h += sigma[v] != omega[w]
    except KeyError as e:
        raise MissingSpinError(f"no spin defined at vertex {e.args[0]}") from None
    return int(h)


def hamiltonian_coupling(lat: HyperbolicLattice, region, sigma: Mapping, omega: Mapping) -> int:
    """``-sum sigma_v sigma_w`` over the same pairs.  Equals
    ``2 * hamiltonian - |E(region)| - |boundary(region)|``."""
    region = set(region)
    lat.require_interior(region)
    inner, bnd = _region_edges(lat, region)
    return -sum(sigma[v] * sigma[w] for v, w in inner) - sum(sigma[v] * omega[w] for v, w in bnd)


def energy(lat: HyperbolicLattice, config: SpinConfiguration) -> int:
    """Indicator Hamiltonian of ``config`` with its own shell as boundary."""
    return hamiltonian(lat, config.region, config, config)


def broken_bonds(lat: HyperbolicLattice, sigma: Mapping) -> BrokenBondReport:
    """Disagreeing edges among the vertices where ``sigma`` is defined."""
    edges = set()
    for v, s in sigma.items():
        for w in lat.adj[v]:
            if v < w and w in sigma and sigma[w] != s:
                edges.add((v, w))
    deg: dict[int, int] = {}
    for v, w in edges:
        deg[v] = deg.get(v, 0) + 1
        deg[w] = deg.get(w, 0) + 1
    return BrokenBondReport(frozenset(edges), frozenset(deg), max(deg.values(), default=0))


def in_ground_state_class(report: BrokenBondReport, cls: GroundStateClass) -> bool:
    return report.delta_broken <= cls.delta_max


def flip_contour(sigma0: SpinConfiguration, gamma: Contour) -> SpinConfiguration:
    outside = gamma.support - sigma0.region
    if outside:
        raise OutOfRegionError(f"contour vertex {min(outside)} outside the region")
    return sigma0.with_values({v: -sigma0[v] for v in gamma.support})


def compatible(g1: Contour, g2: Contour) -> bool:
    return g1.support.isdisjoint(g2.support)


def excess_energy(lat: HyperbolicLattice, sigma0: SpinConfiguration, gamma: Contour) -> tuple[int, int, int]:
    """``(delta_h, |boundary|, broken crossings)`` for flipping ``gamma``.

    ``delta_h`` is taken as a direct Hamiltonian difference and checked
    against ``|boundary| - 2 * broken crossings``.
    """
    sigma = flip_contour(sigma0, gamma)
    direct = energy(lat, sigma) - energy(lat, sigma0)
    crossing = sum(1 for v, w in gamma.boundary_edges if sigma0[v] != sigma0[w])
    nb = len(gamma.boundary_edges)
    via_identity = nb - 2 * crossing
    if direct != via_identity:
        raise AssertionError(
            f"excess energy mismatch: direct {direct} != identity {via_identity}"
        )
    return direct, nb, crossing


def excess_energy_bound(p: int, q: int, delta_broken: int, contour_size: int) -> float:
    return (ic_formula(p, q) - 2 * delta_broken) * contour_size


# ---------------------------------------------------------- random sweep

def random_connected_set(lat, region, size: int, rng, root=None) -> frozenset:
    """Random connected subset of ``region`` grown from ``root`` (random
    if omitted); may come out smaller if ``region`` runs out."""
    region = sorted(region)
    rset = set(region)
    if root is None:
        root = region[rng.integers(len(region))]
    S = [root]
    inS = {root}
    while len(S) < size:
        front = sorted({w for v in S for w in lat.adj[v] if w in rset and w not in inS})
        if not front:
            break
        w = front[rng.integers(len(front))]
        S.append(w)
        inS.add(w)
    return frozenset(S)


SIGMA0_MODES = ("constant", "clusters", "iid")


def random_sigma0(lat, region, rng, mode: str) -> SpinConfiguration:
    base = SpinConfiguration.uniform(lat, region, 1)
    dom = sorted(base.values)
    if mode == "constant":
        s = 1 if rng.random() < 0.5 else -1
        return SpinConfiguration(base.region, {v: s for v in dom})
    if mode == "iid":
        x = rng.integers(0, 2, size=len(dom)) * 2 - 1
        return SpinConfiguration(base.region, dict(zip(dom, x.tolist())))
    if mode == "clusters":
        vals = dict(base.values)
        inner = [v for v in dom if v in base.region]
        for _ in range(int(rng.integers(1, 4))):
            c = random_connected_set(lat, inner, int(rng.integers(1, 7)), rng)
            for v in c:
                vals[v] = -vals[v]
        return SpinConfiguration(base.region, vals)
    raise ValueError(f"unknown mode {mode!r}; expected one of {SIGMA0_MODES}")


@dataclass(frozen=True)
class ExcessTrial:
    trial: int
    mode: str
    contour_size: int
    delta_broken: int
    delta_h: int
    boundary_size: int
    broken_crossing: int
    bound: float

    @property
    def bound_satisfied(self) -> bool:
        return self.delta_h >= self.bound - BOUND_TOL

    def row(self) -> dict:
        return {
            "trial": self.trial,
            "contour_size": self.contour_size,
            "delta_broken": self.delta_broken,
            "delta_h": self.delta_h,
            "boundary_size": self.boundary_size,
            "broken_crossing": self.broken_crossing,
            "bound": self.bound,
            "bound_satisfied": self.bound_satisfied,
        }


def excess_energy_sweep(lat: HyperbolicLattice, radius: int, trials: int, seed: int,
                        max_contour: int = 8, extra_sigma0: Iterable[SpinConfiguration] = ()) -> list[ExcessTrial]:
    """Random ``(sigma0, gamma)`` pairs on ``ball(radius, origin)``.

    ``sigma0`` cycles through constant, cluster-flipped and iid modes plus
    any configurations in ``extra_sigma0`` (which must share the region).
    ``gamma`` is a random connected set of 1..``max_contour`` vertices.
    """
    rng = np.random.default_rng(seed)
    region = ball(lat, radius, lat.origin)
    inner = sorted(region)
    extra = list(extra_sigma0)
    for e in extra:
        if e.region != region:
            raise ValueError("extra configurations must live on the sweep region")
    modes = list(SIGMA0_MODES) + [f"extra{i}" for i in range(len(extra))]
    out = []
    for t in range(trials):
        mode = modes[t % len(modes)]
        if mode.startswith("extra"):
            sigma0 = extra[int(mode[5:])]
        else:
            sigma0 = random_sigma0(lat, region, rng, mode)
        gamma = Contour.from_support(
            lat, random_connected_set(lat, inner, int(rng.integers(1, max_contour + 1)), rng))
        d = broken_bonds(lat, sigma0).delta_broken
        dh, nb, cr = excess_energy(lat, sigma0, gamma)
        out.append(ExcessTrial(t, mode, len(gamma), d, dh, nb, cr,
                               excess_energy_bound(lat.p, lat.q, d, len(gamma))))
    return out
