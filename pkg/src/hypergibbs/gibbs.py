"""Finite-volume Gibbs measures: exact enumeration for tiny windows and
single-site heat-bath sampling for larger ones.

Energies use the indicator Hamiltonian (number of disagreeing pairs), so
the conditional law of one spin with local field ``h`` (sum of neighbour
spins) is ``P(+1) = 1 / (1 + exp(-beta h))``.

Each update draws logistic noise ``L`` and sets ``sigma = +1`` iff
``o L > -beta h``, where ``o = +-1`` is an orientation read off the
boundary condition.  Negating the boundary flips ``o`` too, so with the
same seed every trajectory is exactly negated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numba
import numpy as np

from .errors import BudgetError
from .lattice import HyperbolicLattice, ball, distances_from
from .spin import SpinConfiguration

DEFAULT_BETA = 2.0
MIN_BATCHES = 16
EXACT_MAX_SITES = 22
NOISE_BLOCK = 1 << 22      # doubles per noise block

Boundary = Union[str, SpinConfiguration]


def heat_bath_probability(beta: float, field: float) -> float:
    """Probability that the heat-bath update sets the spin to +1."""
    return 1.0 / (1.0 + np.exp(-beta * field))


# ------------------------------------------------------------- windows

@dataclass(frozen=True)
class Window:
    vertices: np.ndarray     # sorted region vertex ids
    nbr: np.ndarray          # (n, q) local neighbour index, -1 for exterior
    bfield: np.ndarray       # sum of boundary spins seen by each site
    n_bnd: np.ndarray        # number of exterior neighbours
    init: np.ndarray         # starting state (int8)
    orientation: int

    @property
    def size(self) -> int:
        return len(self.vertices)


def _orientation(shell_values: Mapping) -> int:
    if not shell_values:
        return 1
    tot = sum(shell_values.values())
    if tot != 0:
        return 1 if tot > 0 else -1
    return shell_values[min(shell_values)]


def build_window(lat: HyperbolicLattice, omega: SpinConfiguration) -> Window:
    """Local arrays for the region of ``omega`` with its shell as boundary.
    The region values of ``omega`` become the starting state."""
    omega.check(lat)
    verts = np.array(sorted(omega.region), dtype=np.int64)
    index = {int(v): i for i, v in enumerate(verts)}
    n, q = len(verts), lat.q
    nbr = np.full((n, q), -1, dtype=np.int32)
    bfield = np.zeros(n)
    n_bnd = np.zeros(n, dtype=np.int32)
    for i, v in enumerate(verts.tolist()):
        k = 0
        for w in lat.adj[v]:
            j = index.get(w)
            if j is None:
                bfield[i] += omega[w]
                n_bnd[i] += 1
            else:
                nbr[i, k] = j
                k += 1
    init = np.array([omega[int(v)] for v in verts], dtype=np.int8)
    shell = {v: omega[v] for v in omega.shell}
    return Window(verts, nbr, bfield, n_bnd, init, _orientation(shell))


def boundary_config(lat: HyperbolicLattice, boundary: Boundary, region) -> SpinConfiguration:
    if isinstance(boundary, SpinConfiguration):
        if boundary.region != frozenset(region):
            raise ValueError("boundary configuration lives on a different region")
        return boundary
    if boundary in ("plus", "all_plus"):
        return SpinConfiguration.uniform(lat, region, 1)
    if boundary in ("minus", "all_minus"):
        return SpinConfiguration.uniform(lat, region, -1)
    raise ValueError(f"unknown boundary {boundary!r}")


# -------------------------------------------------------------- exact

@dataclass(frozen=True)
class ExactResult:
    vertices: np.ndarray
    means: np.ndarray
    log_z: float

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.vertices.tolist(), self.means.tolist()))


def exact_gibbs(lat: HyperbolicLattice, region, omega: Mapping, beta: float,
                max_sites: int = EXACT_MAX_SITES) -> ExactResult:
    """Exact per-vertex means by summing over all ``2**|region|`` states."""
    region = sorted(set(region))
    n = len(region)
    if n > max_sites:
        raise BudgetError(f"|region| = {n} exceeds the enumeration budget of {max_sites}")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    cfg = SpinConfiguration(frozenset(region), {v: omega[v] for v in region} |
                            {w: omega[w] for v in region for w in lat.adj[v] if w not in region})
    win = build_window(lat, cfg)
    # disagreeing boundary pairs for spin +1 / -1 at each site
    bnd_plus = (win.n_bnd - win.bfield) / 2
    bnd_minus = (win.n_bnd + win.bfield) / 2
    ii, kk = np.nonzero(win.nbr >= 0)
    jj = win.nbr[ii, kk]
    keep = ii < jj
    ii, jj = ii[keep], jj[keep]

    chunk = 1 << min(n, 18)
    sums = np.zeros(n)
    parts = []
    shift = None
    bits = np.arange(n)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        up = ((idx[:, None] >> bits) & 1).astype(bool)
        s = np.where(up, 1.0, -1.0)
        h = np.where(up, bnd_plus, bnd_minus).sum(axis=1)
        h += (up[:, ii] != up[:, jj]).sum(axis=1)
        e = -beta * h
        if shift is None:
            shift = e.max()
        m = e.max()
        if m > shift:
            sums *= np.exp(shift - m)
            parts = [x * np.exp(shift - m) for x in parts]
            shift = m
        w = np.exp(e - shift)
        parts.append(w.sum())
        sums += w @ s
    z = float(np.sum(parts))
    if not z > 0:
        raise AssertionError("partition function is not positive")
    return ExactResult(np.asarray(region), sums / z, float(np.log(z) + shift))


# ------------------------------------------------------------- sampler

@numba.njit(cache=True)
def _sweeps(state, nbr, bfield, n_bnd, beta, noise, t0, burn_in, n_meas, n_batches,
            bsum, bcount, energy, flips):
    n = state.shape[0]
    q = nbr.shape[1]
    for k in range(noise.shape[0]):
        t = t0 + k
        for i in range(n):
            h = bfield[i]
            for c in range(q):
                j = nbr[i, c]
                if j >= 0:
                    h += state[j]
            new = 1 if noise[k, i] > -beta * h else -1
            if new != state[i]:
                flips[0] += 1
            state[i] = new
        e = 0.0
        for i in range(n):
            e += 0.5 * (n_bnd[i] - state[i] * bfield[i])
            for c in range(q):
                j = nbr[i, c]
                if j > i and state[j] != state[i]:
                    e += 1.0
        energy[t] = e
        if t >= burn_in:
            b = ((t - burn_in) * n_batches) // n_meas
            bcount[b] += 1
            for i in range(n):
                bsum[b, i] += state[i]


@dataclass(frozen=True)
class SimulationConfig:
    beta: float = DEFAULT_BETA
    radius: int | None = 2
    sweeps: int = 2000
    burn_in: int = 200
    seed: int = 0
    boundary: Boundary = "plus"
    chains: int = 1
    batches: int = MIN_BATCHES
    region: frozenset | None = None

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError("beta must be >= 0")
        if not self.sweeps > self.burn_in >= 0:
            raise ValueError("need sweeps > burn_in >= 0")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.batches < MIN_BATCHES:
            raise ValueError(f"need at least {MIN_BATCHES} batches")
        if self.sweeps - self.burn_in < self.batches:
            raise ValueError("fewer measured sweeps than batches")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        if self.region is None and self.radius is None:
            raise ValueError("give a radius or an explicit region")


@dataclass(frozen=True)
class Observables:
    vertices: np.ndarray
    layer: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    origin_mean: float
    origin_se: float
    energy: np.ndarray = field(repr=False)     # (chains, sweeps) indicator energies
    flip_rate: float = 0.0
    n_batches: int = 0

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.vertices.tolist(), self.mean.tolist()))

    def rows(self) -> list[dict]:
        return [
            {"vertex": int(v), "layer": int(l), "mean": float(m), "se": float(s)}
            for v, l, m, s in zip(self.vertices, self.layer, self.mean, self.se)
        ]


def chain_rng(seed: int, chain: int) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, chain)``."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, chain], dtype=np.uint64)))


def _logistic(rng, shape):
    u = rng.random(shape)
    with np.errstate(divide="ignore"):
        return np.log(u) - np.log1p(-u)


def run_chain(win: Window, beta: float, sweeps: int, burn_in: int, n_batches: int,
              rng: np.random.Generator):
    n = win.size
    state = win.init.copy()
    bsum = np.zeros((n_batches, n))
    bcount = np.zeros(n_batches, dtype=np.int64)
    energy = np.zeros(sweeps)
    flips = np.zeros(1, dtype=np.int64)
    block = max(1, NOISE_BLOCK // max(n, 1))
    t = 0
    while t < sweeps:
        k = min(block, sweeps - t)
        noise = _logistic(rng, (k, n)) * win.orientation
        _sweeps(state, win.nbr, win.bfield, win.n_bnd, float(beta), noise, t, burn_in,
                sweeps - burn_in, n_batches, bsum, bcount, energy, flips)
        t += k
    return bsum, bcount, energy, int(flips[0]), state


def sample(lat: HyperbolicLattice, config: SimulationConfig) -> Observables:
    """Heat-bath estimate of the per-vertex means under ``config``."""
    if config.region is not None:
        region = frozenset(config.region)
    else:
        region = frozenset(ball(lat, config.radius, lat.origin))
    omega = boundary_config(lat, config.boundary, region)
    win = build_window(lat, omega)
    B = config.batches
    means = []
    energies = []
    flips = 0
    for c in range(config.chains):
        bsum, bcount, energy, fl, _ = run_chain(win, config.beta, config.sweeps,
                                                config.burn_in, B, chain_rng(config.seed, c))
        means.append(bsum / bcount[:, None])
        energies.append(energy)
        flips += fl
    bm = np.concatenate(means, axis=0)
    mean = bm.mean(axis=0)
    se = bm.std(axis=0, ddof=1) / np.sqrt(bm.shape[0])
    o = int(np.searchsorted(win.vertices, lat.origin))
    has_origin = o < win.size and win.vertices[o] == lat.origin
    return Observables(
        vertices=win.vertices,
        layer=lat.layer[win.vertices].astype(np.int64),
        mean=mean,
        se=se,
        origin_mean=float(mean[o]) if has_origin else float("nan"),
        origin_se=float(se[o]) if has_origin else float("nan"),
        energy=np.array(energies),
        flip_rate=flips / (config.chains * config.sweeps * win.size),
        n_batches=bm.shape[0],
    )


# -------------------------------------------------------------- probes

def distance_to_edges(lat: HyperbolicLattice, edges, vertices) -> dict[int, int]:
    """Graph distance from each vertex to the nearest endpoint of ``edges``."""
    ends = sorted({v for e in edges for v in e})
    vertices = list(vertices)
    if not ends:
        return {v: np.iinfo(np.int64).max for v in vertices}
    dist = distances_from(lat, ends)
    return {v: dist[v] for v in vertices}


@dataclass(frozen=True)
class RigidityReport:
    vertices: np.ndarray           # probed vertices (distance >= min_distance)
    side: np.ndarray               # Dobrushin sign of each probed vertex
    distance: np.ndarray
    agreement: np.ndarray          # fraction of samples on the vertex's side
    agreement_se: np.ndarray
    profile: list                  # rows (distance, side, mean, n)
    observables: Observables = field(repr=False)

    @property
    def min_agreement(self) -> float:
        return float(self.agreement.min()) if len(self.agreement) else float("nan")

    @property
    def mean_agreement(self) -> float:
        return float(self.agreement.mean()) if len(self.agreement) else float("nan")


def interface_rigidity_probe(lat: HyperbolicLattice, omega: SpinConfiguration, crossed_edges,
                             beta: float, sweeps: int, seed: int, burn_in: int | None = None,
                             chains: int = 1, min_distance: int = 2) -> RigidityReport:
    """Sample under the Dobrushin boundary ``omega`` and measure how often
    each vertex far from the interface sits on its own side."""
    if burn_in is None:
        burn_in = sweeps // 10
    cfg = SimulationConfig(beta=beta, radius=None, region=omega.region, sweeps=sweeps,
                           burn_in=burn_in, seed=seed, boundary=omega, chains=chains)
    obs = sample(lat, cfg)
    dist = distance_to_edges(lat, crossed_edges, obs.vertices.tolist())
    d = np.array([dist[v] for v in obs.vertices.tolist()])
    side = np.array([omega[v] for v in obs.vertices.tolist()])
    agree = (1 + side * obs.mean) / 2
    agree_se = obs.se / 2
    profile = []
    for dd in sorted(set(d.tolist())):
        for sd in (-1, 1):
            m = (d == dd) & (side == sd)
            if m.any():
                profile.append({"distance": int(dd), "side": sd,
                                "mean": float(obs.mean[m].mean()), "n": int(m.sum())})
    far = d >= min_distance
    return RigidityReport(obs.vertices[far], side[far], d[far], agree[far], agree_se[far],
                          profile, obs)


@dataclass(frozen=True)
class RadiusReport:
    radii: tuple
    vertices: np.ndarray                 # ball(r_small) vertices
    means: dict                          # radius -> per-vertex means
    ses: dict
    discrepancy: dict                    # (r1, r2) -> max abs difference

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancy.values(), default=0.0)


def radius_consistency(lat: HyperbolicLattice, boundary, beta: float, r_small: int,
                       radii: Sequence[int], sweeps: int, seed: int,
                       burn_in: int | None = None, chains: int = 1) -> RadiusReport:
    """Marginals on ``ball(r_small)`` for boundary conditions on the shells
    of several larger balls.

    ``boundary`` is ``"plus"``, ``"minus"`` or a callable ``radius ->
    SpinConfiguration`` on ``ball(radius)``.
    """
    radii = tuple(sorted(radii))
    if not radii or r_small + 2 > radii[0]:
        raise ValueError("need r_small + 2 <= min(radii)")
    if burn_in is None:
        burn_in = sweeps // 10
    inner = np.array(sorted(ball(lat, r_small, lat.origin)))
    means, ses = {}, {}
    for r in radii:
        region = frozenset(ball(lat, r, lat.origin))
        bd = boundary(r) if callable(boundary) else boundary
        obs = sample(lat, SimulationConfig(beta=beta, radius=None, region=region, sweeps=sweeps,
                                           burn_in=burn_in, seed=seed, boundary=bd,
                                           chains=chains))
        idx = np.searchsorted(obs.vertices, inner)
        means[r] = obs.mean[idx]
        ses[r] = obs.se[idx]
    disc = {}
    for i, r1 in enumerate(radii):
        for r2 in radii[i + 1:]:
            disc[(r1, r2)] = float(np.abs(means[r1] - means[r2]).max())
    return RadiusReport(radii, inner, means, ses, disc)
