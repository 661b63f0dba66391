"""Face-centred truncations of the regular hyperbolic tiling {p,q}.

The tiling is grown ring by ring.  The region generated so far is a
topological disk whose boundary is a simple cycle (the outermost layer).
One growth step adds every face that touches that cycle: walking the cycle
counter-clockwise, each boundary vertex ``v`` still needs ``q - deg(v)``
outward edges ("spokes"), consecutive spokes bound one new face, and each
new face is closed up with freshly created vertices.  Spoke ends are
*black* vertices, the vertices added in between on the new cycle are
*blue*.  A face whose boundary path already uses ``p - 1`` cycle vertices
gets a single new vertex, shared by its two spokes.

All faces are stored counter-clockwise, which gives the dual lattice a
consistent rotation system for free.  Storage is numpy CSR so that
truncations with millions of vertices stay affordable.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import (
    EuclideanOrSpherical,
    FrontierContamination,
    ResourceLimitError,
    TruncationTooShallow,
)

DEFAULT_MAX_VERTICES = 40_000_000

BLACK = "black"
BLUE = "blue"


@dataclass(frozen=True)
class TilingParams:
    p: int
    q: int

    @property
    def hyperbolic(self) -> bool:
        return (self.p - 2) * (self.q - 2) > 4


def validate_params(p: int, q: int) -> TilingParams:
    """Return ``TilingParams`` if ``{p,q}`` tiles the hyperbolic plane."""
    if int(p) != p or int(q) != q or p < 3 or q < 3:
        raise ValueError(f"p and q must be integers >= 3, got p={p}, q={q}")
    # 1/p + 1/q < 1/2  <=>  (p-2)(q-2) > 4, kept in integers
    if (p - 2) * (q - 2) <= 4:
        raise EuclideanOrSpherical(p, q)
    return TilingParams(int(p), int(q))


def _as_params(params) -> TilingParams:
    if isinstance(params, TilingParams):
        return validate_params(params.p, params.q)
    p, q = params
    return validate_params(p, q)


class _PaddedRows:
    """Read-only ``rows[i] -> sorted tuple`` view over a ``-1``-padded array."""

    __slots__ = ("arr",)

    def __init__(self, arr):
        self.arr = arr

    def __getitem__(self, i):
        return tuple(sorted(x for x in self.arr[i].tolist() if x >= 0))

    def __len__(self):
        return len(self.arr)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


@dataclass(frozen=True, eq=False)
class HyperbolicLattice:
    """Immutable finite truncation of the tiling.

    ``layer[v]`` is the layer index of vertex ``v`` and ``blue[v]`` its
    kind.  ``nbr`` and ``vfaces`` are ``(n, q)`` arrays of neighbours and
    incident faces padded with ``-1``; ``adj[v]`` gives the sorted
    neighbour tuple.  ``faces`` is an ``(F, p)`` array of counter-clockwise
    cycles and ``face_layer[f]`` the growth step that created face ``f``.
    Vertices of the outermost layer (``layer == n_layers``) are the
    frontier: their neighbourhoods are incomplete.
    """

    params: TilingParams
    n_layers: int
    layer: np.ndarray
    blue: np.ndarray
    nbr: np.ndarray
    faces: np.ndarray
    face_layer: np.ndarray
    vfaces: np.ndarray
    origin_face: int = 0

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def n_vertices(self) -> int:
        return len(self.layer)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def adj(self) -> _PaddedRows:
        return _PaddedRows(self.nbr)

    @property
    def origin(self) -> int:
        """Reference vertex: the first vertex of the central face."""
        return int(self.faces[self.origin_face][0])

    def kind(self, v: int) -> str:
        return BLUE if self.blue[v] else BLACK

    def degrees(self) -> np.ndarray:
        return (self.nbr >= 0).sum(axis=1)

    def degree(self, v: int) -> int:
        return int((self.nbr[v] >= 0).sum())

    def edges(self) -> np.ndarray:
        """``(E, 2)`` array of edges ``u < v`` in lexicographic order."""
        rows = np.repeat(np.arange(self.n_vertices), self.q)
        cols = self.nbr.ravel()
        keep = rows < cols
        e = np.column_stack((rows[keep], cols[keep]))
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def is_frontier(self, v: int) -> bool:
        return int(self.layer[v]) == self.n_layers

    def vertex_faces(self, v: int) -> tuple[int, ...]:
        return tuple(x for x in self.vfaces[v].tolist() if x >= 0)

    def face(self, f: int) -> tuple[int, ...]:
        return tuple(self.faces[f].tolist())

    def require_interior(self, vertices: Iterable[int]) -> None:
        bad = [v for v in vertices if self.is_frontier(v)]
        if bad:
            raise FrontierContamination(
                f"{len(bad)} vertices on the outermost layer {self.n_layers} "
                f"(e.g. {bad[0]}); generate a deeper lattice"
            )

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "n_layers": self.n_layers,
            "vertices": [
                {"id": v, "layer": int(self.layer[v]), "kind": self.kind(v)}
                for v in range(self.n_vertices)
            ],
            "edges": self.edges().tolist(),
            "faces": self.faces.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))


@dataclass
class _Step:
    """Spoke/face bookkeeping for one growth step, in rotated order."""

    start: int
    base: np.ndarray      # ring index of each spoke
    nxt: np.ndarray       # ring index of the following spoke
    k: np.ndarray         # boundary vertices on face j
    merged: np.ndarray    # face j has a single new vertex
    new_end: np.ndarray   # spoke j creates its end vertex
    owner: np.ndarray     # spoke that created the end of spoke j
    end_id: np.ndarray    # local id (in the new ring) of each spoke end
    mid_start: np.ndarray
    n_mid: np.ndarray
    new_deg: np.ndarray


def _plan_step(p, q, n, deg) -> _Step:
    # int32 throughout: the last ring dominates memory
    I = np.int32
    m = len(deg)
    n_spokes = q - deg
    if (n_spokes < 0).any():
        raise RuntimeError(f"ring {n - 1} has a vertex of degree > {q}")
    base = np.repeat(np.arange(m, dtype=I), n_spokes)
    n_sp = len(base)
    if n_sp < 2 or base[0] == base[-1]:
        raise RuntimeError(f"ring {n} cannot be grown")

    # new face j lies between spoke j and spoke j+1 and runs along the
    # boundary path ring[base[j]] .. ring[base[j+1]] (k[j] vertices)
    nxt = np.roll(base, -1)
    k = (nxt - base) % m + 1
    if (k >= p).any():
        raise RuntimeError(f"a face closes on the boundary at ring {n}; {{{p},{q}}} unsupported")
    merged = k == p - 1
    if merged.all():
        raise RuntimeError("ring collapses to a point")
    new_end = ~np.roll(merged, 1)

    start = int(np.argmax(new_end))
    base, nxt, k = np.roll(base, -start), np.roll(nxt, -start), np.roll(k, -start)
    merged, new_end = np.roll(merged, -start), np.roll(new_end, -start)

    n_mid = np.where(merged, 0, p - k - 2).astype(I)
    count = new_end + n_mid
    first = np.cumsum(count, dtype=I)
    total = int(first[-1])
    first -= count
    del count
    owner = np.where(new_end, np.arange(n_sp, dtype=I), I(0))
    np.maximum.accumulate(owner, out=owner)
    end_id = first[owner]
    if total < 3:
        raise RuntimeError(f"ring {n} has fewer than 3 vertices")
    new_deg = (2 + np.bincount(end_id, minlength=total)).astype(I)
    if (new_deg > q).any():
        raise RuntimeError(f"ring {n} produced a vertex of degree > {q}")
    first += new_end
    return _Step(start, base, nxt, k, merged, new_end, owner, end_id,
                 first, n_mid, new_deg)


def generate(params, n_layers: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> HyperbolicLattice:
    """Grow the face-centred truncation with layers ``0..n_layers``."""
    params = _as_params(params)
    if n_layers < 0:
        raise ValueError("n_layers must be >= 0")
    p, q = params.p, params.q

    # pass 1: ring sizes only, so the output arrays are allocated once
    sizes, n_new_faces = [p], [1]
    deg = np.full(p, 2, dtype=np.int32)
    for n in range(1, n_layers + 1):
        st = _plan_step(p, q, n, deg)
        deg = st.new_deg
        sizes.append(len(deg))
        n_new_faces.append(len(st.base))
        del st
        if sum(sizes) > max_vertices:
            raise ResourceLimitError(
                f"{{{p},{q}}} layer {n} brings the truncation to {sum(sizes)} "
                f"vertices (cap {max_vertices})"
            )

    n_vert, n_face = sum(sizes), sum(n_new_faces)
    it = np.int32 if max(n_vert, n_face) < 2**31 else np.int64
    layer = np.repeat(np.arange(n_layers + 1, dtype=np.int16), sizes)
    blue = np.zeros(n_vert, dtype=bool)
    nbr = np.full((n_vert, q), -1, dtype=it)
    vfaces = np.full((n_vert, q), -1, dtype=it)
    faces = np.empty((n_face, p), dtype=it)
    face_layer = np.repeat(np.arange(n_layers + 1, dtype=np.int16), n_new_faces)

    ring0 = np.arange(p)
    nbr[ring0, 0] = np.roll(ring0, 1)
    nbr[ring0, 1] = np.roll(ring0, -1)
    vfaces[ring0, 0] = 0
    faces[0] = ring0

    # pass 2: fill
    deg = np.full(p, 2, dtype=np.int32)
    off, foff = 0, 1
    for n in range(1, n_layers + 1):
        st = _plan_step(p, q, n, deg)
        new_off = off + len(deg)
        _fill_step(p, q, st, deg, off, new_off, foff, blue, nbr, vfaces, faces)
        off, foff = new_off, foff + len(st.base)
        deg = st.new_deg

    return HyperbolicLattice(
        params=params,
        n_layers=n_layers,
        layer=layer,
        blue=blue,
        nbr=nbr,
        faces=faces,
        face_layer=face_layer,
        vfaces=vfaces,
    )


def _fill_step(p, q, st, deg, off, new_off, foff, blue, nbr, vfaces, faces):
    I = np.int32
    m = len(deg)
    n_sp = len(st.base)
    total = len(st.new_deg)
    js = np.arange(n_sp, dtype=I)
    end_v = st.end_id + I(new_off)

    # spokes, seen from the old ring: consecutive slots after the old degree
    s = (q - deg).astype(I)
    gstart = np.cumsum(s, dtype=I) - s
    rank = np.roll(np.arange(n_sp, dtype=I) - np.repeat(gstart, s), -st.start)
    nbr[off + st.base, deg[st.base] + rank] = end_v
    del rank
    # ... and from the new ring: spokes first, then the two ring edges
    slot = js - st.owner
    nbr[end_v, slot] = off + st.base
    new_v = np.arange(new_off, new_off + total, dtype=I)
    c = st.new_deg - 2
    nbr[new_v, c] = np.roll(new_v, 1)
    nbr[new_v, c + 1] = np.roll(new_v, -1)
    del c

    mid_face = np.repeat(js, st.n_mid)
    mids = np.arange(len(mid_face), dtype=I)
    mids += np.repeat(st.mid_start - (np.cumsum(st.n_mid, dtype=I) - st.n_mid), st.n_mid)
    mids += I(new_off)
    blue[mids] = True

    # faces, one column at a time to keep temporaries small
    block = faces[foff:foff + n_sp]
    end_next = np.roll(end_v, -1)
    for col in range(p):
        v = np.where(col < st.k, off + (st.nxt - col) % m, end_next)
        v = np.where(col == st.k, end_v, v)
        mid = (col > st.k) & (col < p - 1)
        v[mid] = (new_off + st.mid_start + (col - st.k - 1))[mid]
        block[:, col] = v
    del v, mid, end_next

    # incident faces of the old ring: faces g-1 .. g+s-1 around vertex i,
    # where g is the first spoke at or after i (unrotated numbering)
    cnt = s + 1
    vi = np.repeat(np.arange(m, dtype=I), cnt)
    t = np.arange(len(vi), dtype=I) - np.repeat(np.cumsum(cnt, dtype=I) - cnt, cnt)
    fid = (gstart[vi] - 1 + t - st.start) % n_sp + I(foff)
    vfaces[off + vi, deg[vi] - 1 + t] = fid
    del vi, t, fid
    # new ring: a spoke end sees the face before its first spoke and the
    # faces after each of its spokes; a blue vertex sees one face
    vfaces[end_v, slot + 1] = js + I(foff)
    first_sp = js[st.new_end]
    vfaces[end_v[first_sp], 0] = (first_sp - 1) % n_sp + I(foff)
    vfaces[mids, 0] = mid_face + I(foff)


# ---------------------------------------------------------------- counting

def face_bfs_layers(lat: HyperbolicLattice) -> np.ndarray:
    """Layer labels recomputed from face incidence alone.

    Layer 0 is the vertex set of the central face; layer ``n+1`` collects
    the unlabelled vertices of every face touching layer ``n``.
    """
    label = np.full(lat.n_vertices, -1, dtype=np.int64)
    current = np.unique(lat.faces[lat.origin_face])
    label[current] = 0
    n = 0
    while len(current):
        touched = lat.vfaces[current].ravel()
        touched = np.unique(touched[touched >= 0])
        verts = np.unique(lat.faces[touched].ravel())
        current = verts[label[verts] < 0]
        n += 1
        label[current] = n
    return label


def layer_counts(lat: HyperbolicLattice) -> tuple[list[int], list[int]]:
    """``(S, B)``: vertices per layer and cumulative counts."""
    labels = face_bfs_layers(lat)
    S = np.bincount(labels, minlength=lat.n_layers + 1).tolist()
    B = np.cumsum(S).tolist()
    return S, B


def fit_recurrence(seq, order: int = 2) -> list[Fraction]:
    """Exact coefficients ``c`` with ``seq[n] = sum_i c[i] * seq[n-1-i]``.

    Uses the first ``2*order`` terms; raises ``ValueError`` when the
    linear system is singular.
    """
    s = [Fraction(int(x)) for x in seq]
    if len(s) < 2 * order:
        raise ValueError(f"need {2 * order} terms to fit an order-{order} recurrence")
    if order == 1:
        if s[0] == 0:
            raise ValueError("singular")
        return [s[1] / s[0]]
    if order == 2:
        # s2 = a s1 + b s0 ; s3 = a s2 + b s1
        det = s[1] * s[1] - s[0] * s[2]
        if det == 0:
            raise ValueError("singular")
        a = (s[2] * s[1] - s[3] * s[0]) / det
        b = (s[1] * s[3] - s[2] * s[2]) / det
        return [a, b]
    raise ValueError("order must be 1 or 2")


def predict_recurrence(seq, coeffs, n_more: int) -> list[Fraction]:
    out = [Fraction(int(x)) for x in seq]
    for _ in range(n_more):
        out.append(sum(c * out[-1 - i] for i, c in enumerate(coeffs)))
    return out[len(seq):]


# ---------------------------------------------------------------- metric

def distances_from(lat: HyperbolicLattice, sources: Iterable[int], radius: int | None = None) -> dict[int, int]:
    """Multi-source BFS distances, no truncation check."""
    dist = {int(s): 0 for s in sources}
    dq = deque(dist)
    nbr = lat.nbr
    while dq:
        u = dq.popleft()
        d = dist[u]
        if radius is not None and d >= radius:
            continue
        for w in nbr[u].tolist():
            if w >= 0 and w not in dist:
                dist[w] = d + 1
                dq.append(w)
    return dist


def _check_exact(lat, dist, r):
    # a shortest path leaving the truncation passes a frontier vertex
    # first, so distances up to r are exact if none is closer than r
    for v, d in dist.items():
        if d < r and lat.is_frontier(v):
            raise TruncationTooShallow(
                f"frontier vertex {v} at distance {d} < {r}; generate a deeper lattice"
            )


def graph_distance(lat: HyperbolicLattice, v: int, w: int) -> int:
    dist = {v: 0}
    dq = deque([v])
    while dq and w not in dist:
        u = dq.popleft()
        for x in lat.adj[u]:
            if x not in dist:
                dist[x] = dist[u] + 1
                dq.append(x)
    if w not in dist:
        raise ValueError(f"{w} unreachable from {v}")
    d = dist[w]
    _check_exact(lat, dist, d)
    return d


def ball(lat: HyperbolicLattice, r: int, v: int) -> set[int]:
    dist = distances_from(lat, [v], r)
    _check_exact(lat, dist, r)
    return set(dist)


def sphere(lat: HyperbolicLattice, r: int, v: int) -> set[int]:
    dist = distances_from(lat, [v], r)
    _check_exact(lat, dist, r)
    return {u for u, d in dist.items() if d == r}


def edge_boundary(lat: HyperbolicLattice, G) -> set[tuple[int, int]]:
    """Edges with exactly one endpoint in ``G``, as ``(inside, outside)``."""
    G = set(G)
    lat.require_interior(G)
    return {(v, w) for v in G for w in lat.adj[v] if w not in G}


def inner_boundary(lat: HyperbolicLattice, G) -> set[int]:
    G = set(G)
    lat.require_interior(G)
    return {v for v in G if any(w not in G for w in lat.adj[v])}


def is_connected(lat: HyperbolicLattice, G) -> bool:
    G = set(G)
    if not G:
        return True
    start = next(iter(G))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in lat.adj[u]:
            if w in G and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(G)


def frontier_distance(lat: HyperbolicLattice, v: int) -> int:
    """Graph distance from ``v`` to the nearest frontier vertex."""
    dist = {v: 0}
    dq = deque([v])
    while dq:
        u = dq.popleft()
        if lat.is_frontier(u):
            return dist[u]
        for x in lat.adj[u]:
            if x not in dist:
                dist[x] = dist[u] + 1
                dq.append(x)
    raise RuntimeError("no frontier reachable")


def depth_for_radius(params, r: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> int:
    """Smallest depth whose frontier is at distance > ``r`` from the origin,
    so ``ball(r, origin)`` has complete neighbourhoods."""
    n = 1
    while True:
        lat = generate(params, n, max_vertices)
        if frontier_distance(lat, lat.origin) > r:
            return n
        n += 1


# ---------------------------------------------------------------- dual

class DualLattice:
    """Dual graph over the closed faces of a primal truncation.

    Built lazily from face/vertex incidence.  ``rotation(f)`` lists, for
    each counter-clockwise edge of face ``f``, the face across it (``None``
    outside the truncation).  ``crossing(f, g)`` is the primal edge shared
    by adjacent faces ``f`` and ``g``.
    """

    def __init__(self, primal: HyperbolicLattice):
        self.primal = primal
        self._rot: dict[int, tuple] = {}
        self._rot_arr = None

    @property
    def origin(self) -> int:
        return self.primal.origin_face

    @property
    def n_faces(self) -> int:
        return self.primal.n_faces

    @property
    def face_degree(self) -> int:
        """Degree of interior dual vertices (the primal face size)."""
        return self.primal.p

    def rotation(self, f: int) -> tuple:
        rot = self._rot.get(f)
        if rot is None:
            lat = self.primal
            cyc = lat.face(f)
            k = len(cyc)
            out = []
            for i in range(k):
                u, v = cyc[i], cyc[(i + 1) % k]
                common = (set(lat.vertex_faces(u)) & set(lat.vertex_faces(v))) - {f}
                if len(common) > 1:
                    raise RuntimeError(f"primal edge {(u, v)} lies on more than two faces")
                out.append(common.pop() if common else None)
            rot = self._rot[f] = tuple(out)
        return rot

    def rotation_array(self) -> np.ndarray:
        """All rotations at once as an ``(F, p)`` array, ``-1`` where the
        neighbour lies outside the truncation."""
        if self._rot_arr is None:
            faces = self.primal.faces.astype(np.int64)
            F, p = faces.shape
            u = faces
            v = np.roll(faces, -1, axis=1)
            key = np.minimum(u, v) * self.primal.n_vertices + np.maximum(u, v)
            key = key.ravel()
            order = np.argsort(key, kind="stable")
            ks = key[order]
            same = ks[1:] == ks[:-1]
            if np.any(same[1:] & same[:-1]):
                raise RuntimeError("a primal edge lies on more than two faces")
            i = np.nonzero(same)[0]
            a, b = order[i], order[i + 1]
            rot = np.full(F * p, -1, dtype=np.int32)
            rot[a] = b // p
            rot[b] = a // p
            self._rot_arr = rot.reshape(F, p)
        return self._rot_arr

    def neighbors(self, f: int) -> tuple[int, ...]:
        return tuple(g for g in self.rotation(f) if g is not None)

    def degree(self, f: int) -> int:
        return len(self.neighbors(f))

    def is_interior(self, f: int) -> bool:
        return all(g is not None for g in self.rotation(f))

    def crossing(self, f: int, g: int) -> tuple[int, int]:
        rot = self.rotation(f)
        try:
            i = rot.index(g)
        except ValueError:
            raise KeyError(f"faces {f} and {g} are not dual-adjacent") from None
        cyc = self.primal.face(f)
        u, v = cyc[i], cyc[(i + 1) % len(cyc)]
        return (u, v) if u < v else (v, u)

    def edges(self) -> list[tuple[int, int]]:
        return [(f, g) for f in range(self.n_faces) for g in self.neighbors(f) if f < g]


def dual(lat: HyperbolicLattice) -> DualLattice:
    if lat.n_faces < 1:
        raise ValueError("lattice has no closed face")
    return DualLattice(lat)
