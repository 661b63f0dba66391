"""Edge-isoperimetric constant of {p,q}: closed form, exhaustive search,
and the sparsity / validity-region predicates built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from .errors import BudgetError
from .lattice import HyperbolicLattice, distances_from, validate_params

FORMULA_TOL = 1e-9
DEFAULT_BUDGET = 50_000_000


def ic_formula(p: int, q: int) -> float:
    """Edge-isoperimetric constant of the infinite {p,q} tiling,
    ``(q-2) * sqrt(1 - 4/((p-2)(q-2)))``; exactly zero on the Euclidean
    tilings."""
    if p < 3 or q < 3:
        raise ValueError(f"p and q must be >= 3, got p={p}, q={q}")
    prod = (p - 2) * (q - 2)
    if prod < 4:
        raise ValueError(f"{{{p},{q}}} is spherical: (p-2)(q-2) = {prod} < 4")
    if prod == 4:
        return 0.0
    return (q - 2) * math.sqrt(1.0 - 4.0 / prod)


def ic_shape_constant(p: int, q: int) -> float:
    """``c`` with ``ic_formula(p, q) == c * sqrt(1/2 - 1/p - 1/q)``.

    Follows from ``(p-2)(q-2) - 4 = 2pq (1/2 - 1/p - 1/q)``, giving
    ``c**2 = 2pq (q-2)/(p-2)``.
    """
    return math.sqrt(2.0 * p * q * (q - 2) / (p - 2))


@dataclass(frozen=True)
class SparsityReport:
    p: int
    q: int
    ic: float
    delta_max: int
    condition_holds: bool
    validity_region: bool

    def to_dict(self) -> dict:
        return asdict(self)


def sparsity_check(p: int, q: int, delta_max: int) -> SparsityReport:
    validate_params(p, q)
    if delta_max < 0:
        raise ValueError("delta_max must be >= 0")
    ic = ic_formula(p, q)
    return SparsityReport(
        p=p, q=q, ic=ic, delta_max=delta_max,
        condition_holds=delta_max < ic / 2,
        validity_region=validity_region(p, q),
    )


def validity_region(p: int, q: int) -> bool:
    """p > 4, hyperbolic, and IC > 2."""
    if p < 3 or q < 3:
        raise ValueError(f"p and q must be >= 3, got p={p}, q={q}")
    if (p - 2) * (q - 2) <= 4:
        return False
    return p > 4 and ic_formula(p, q) > 2


def region_scan(p_max: int, q_max: int, p_min: int = 3, q_min: int = 3) -> list[dict]:
    rows = []
    for p in range(p_min, p_max + 1):
        for q in range(q_min, q_max + 1):
            prod = (p - 2) * (q - 2)
            rows.append({
                "p": p,
                "q": q,
                "ic": ic_formula(p, q) if prod >= 4 else float("nan"),
                "in_region": validity_region(p, q),
            })
    return rows


# ---------------------------------------------------------------- search

def _local_graph(lat: HyperbolicLattice, root: int, radius: int):
    # members lie within radius-1 of the root; only they need full degree
    dist = distances_from(lat, [root], radius)
    verts = sorted(dist)
    lat.require_interior([v for v in verts if dist[v] < radius])
    index = {v: i for i, v in enumerate(verts)}
    adj = []
    for v in verts:
        adj.append([index[w] for w in lat.adj[v] if w in index])
    return verts, index, adj


def _max_edges(t: int, p: int) -> int:
    # induced subgraph of a planar graph of girth p on t vertices
    if t < p:
        return t - 1
    return (p * (t - 2)) // (p - 2)


def brute_force_ic(lat: HyperbolicLattice, max_size: int, root: int | None = None,
                   budget: int = DEFAULT_BUDGET) -> tuple[float, frozenset]:
    """Minimise ``|boundary edges| / |vertices|`` over connected vertex
    sets containing ``root`` with at most ``max_size`` vertices.

    Returns ``(ratio, witness)``.  Every set is visited once by extension-
    set enumeration; the search stops early once no larger set can beat
    the incumbent under the planar girth bound.  Ties keep the first set
    found, which makes the witness deterministic.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    if root is None:
        root = lat.origin
    q, p = lat.q, lat.p
    # sets reach distance max_size-1, their boundary one step further
    verts, index, adj = _local_graph(lat, root, max_size)
    n = len(verts)
    r0 = index[root]

    # global lower bound for sets of size >= t
    lower = [math.inf] * (max_size + 2)
    for t in range(max_size, 0, -1):
        lower[t] = min(lower[t + 1], (q * t - 2 * _max_edges(t, p)) / t)

    in_set = [False] * n
    excluded = [False] * n
    in_cand = [False] * n
    members: list[int] = []
    best = [math.inf, ()]
    visited = 0

    def rec(size, bnd, cand):
        nonlocal visited
        visited += 1
        if visited > budget:
            raise BudgetError(f"enumeration exceeded {budget} sets")
        ratio = bnd / size
        if ratio < best[0] - 1e-12:
            best[0] = ratio
            best[1] = tuple(members)
        if size == max_size or best[0] <= lower[size + 1] + 1e-12:
            return
        done = []
        for idx, w in enumerate(cand):
            k = 0
            for u in adj[w]:
                if in_set[u]:
                    k += 1
            in_set[w] = True
            members.append(w)
            new = [u for u in adj[w] if not in_set[u] and not excluded[u] and not in_cand[u]]
            for u in new:
                in_cand[u] = True
            rec(size + 1, bnd + q - 2 * k, cand[idx + 1:] + new)
            for u in new:
                in_cand[u] = False
            members.pop()
            in_set[w] = False
            excluded[w] = True
            in_cand[w] = False
            done.append(w)
        for w in done:
            excluded[w] = False
            in_cand[w] = True

    in_set[r0] = True
    members.append(r0)
    first = list(adj[r0])
    for u in first:
        in_cand[u] = True
    rec(1, q, first)
    return best[0], frozenset(verts[i] for i in best[1])


def count_connected_sets(lat: HyperbolicLattice, max_size: int, root: int | None = None) -> list[int]:
    """Number of connected sets containing ``root`` per size, by the same
    enumeration (no pruning).  Used to cross-check against brute force."""
    if root is None:
        root = lat.origin
    verts, index, adj = _local_graph(lat, root, max_size)
    counts = [0] * (max_size + 1)
    n = len(verts)
    in_set = [False] * n
    excluded = [False] * n
    in_cand = [False] * n

    def rec(size, cand):
        counts[size] += 1
        if size == max_size:
            return
        done = []
        for idx, w in enumerate(cand):
            in_set[w] = True
            new = [u for u in adj[w] if not in_set[u] and not excluded[u] and not in_cand[u]]
            for u in new:
                in_cand[u] = True
            rec(size + 1, cand[idx + 1:] + new)
            for u in new:
                in_cand[u] = False
            in_set[w] = False
            excluded[w] = True
            in_cand[w] = False
            done.append(w)
        for w in done:
            excluded[w] = False
            in_cand[w] = True

    r0 = index[root]
    in_set[r0] = True
    first = list(adj[r0])
    for u in first:
        in_cand[u] = True
    rec(1, first)
    return counts
