"""Corona picture of the dual lattice, its embedded trees, sparse dual
interfaces and the Dobrushin configurations they induce.

Circles of the corona are the face layers of the primal truncation: circle
0 is the central face, circle ``n+1`` the faces sharing a primal vertex with
circle ``n``.  A circle vertex is black when it has a dual edge back to the
previous circle and blue otherwise.  With dual degree ``d`` the origin emits
``d`` radial edges; following black-to-black radial edges out of the
origin gives ``d`` disjoint trees of branching ``d - 3``.

An interface of depth ``k`` is the dual path that runs down tree ``b`` for
``k`` steps, through the origin, and down tree ``a`` for ``k`` steps.  The
first step picks the tree, so each side needs ``k - 1`` child choices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchOutOfRange, DegenerateParameters, NeighboringTrees, NotSeparating
from .lattice import BLACK, BLUE, DualLattice, HyperbolicLattice, ball
from .spin import SpinConfiguration


@dataclass
class CoronaGraph:
    """Corona of a dual truncation.  ``generations[n]`` holds the face ids
    of circle ``n`` (sorted), ``radial_edges`` and ``circle_edges`` are
    ``(E, 2)`` arrays of dual edges (inner, outer) and (smaller, larger).
    ``tree_index`` maps each tree edge to its tree; ``children`` lists the
    ordered children of every tree vertex below the last circle."""

    dual: DualLattice
    depth: int
    generations: list
    blue: np.ndarray = field(repr=False)
    radial_edges: np.ndarray = field(repr=False)
    circle_edges: np.ndarray = field(repr=False)
    tree_index: dict = field(repr=False)
    children: dict = field(repr=False)

    @property
    def degree(self) -> int:
        return self.dual.face_degree

    @property
    def branching(self) -> int:
        return self.degree - 3

    @property
    def n_trees(self) -> int:
        return self.degree

    @property
    def origin(self) -> int:
        return self.dual.origin

    def circle_of(self, f: int) -> int:
        n = int(self.dual.primal.face_layer[f])
        if n > self.depth:
            raise KeyError(f"face {f} lies beyond circle {self.depth}")
        return n

    def kind(self, f: int) -> str:
        self.circle_of(f)
        return BLUE if self.blue[f] else BLACK

    def tree_root(self, t: int) -> int:
        return self.dual.rotation(self.origin)[t]

    def tree_vertices(self, t: int) -> set[int]:
        out = {self.tree_root(t)}
        stack = [self.tree_root(t)]
        while stack:
            f = stack.pop()
            for c in self.children.get(f, ()):
                out.add(c)
                stack.append(c)
        return out


def corona(dual: DualLattice, depth: int) -> CoronaGraph:
    """Corona of the dual truncation up to circle ``depth``."""
    d = dual.face_degree
    if d <= 4:
        raise DegenerateParameters(
            f"dual degree {d} <= 4 gives trees of branching {d - 3}; need dual degree > 4"
        )
    lat = dual.primal
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > lat.n_layers:
        raise ValueError(f"corona depth {depth} exceeds lattice depth {lat.n_layers}")

    fl = lat.face_layer.astype(np.int64)
    keep = np.nonzero(fl <= depth)[0]
    # circles are vertex-sharing BFS layers: each face sits one step past
    # the lowest circle touching any of its vertices
    vf = lat.vfaces
    vmin = np.where(vf >= 0, fl[np.maximum(vf, 0)], np.iinfo(np.int64).max).min(axis=1)
    low = vmin[lat.faces[keep]].min(axis=1)
    expect = np.where(keep == dual.origin, 0, low + 1)
    if keep[0] != dual.origin or not np.array_equal(np.where(keep == dual.origin, 0, fl[keep]), expect):
        raise AssertionError("face layers are not the vertex-sharing circles")
    gens = [keep[fl[keep] == n] for n in range(depth + 1)]

    rot = dual.rotation_array()[keep].astype(np.int64)
    nl = np.where(rot >= 0, fl[np.maximum(rot, 0)], -10)
    own = fl[keep][:, None]
    inward = nl == own - 1
    blue_arr = ~inward.any(axis=1)
    blue_arr[keep == dual.origin] = False
    r_i, r_j = np.nonzero(inward)
    radial = np.stack([rot[r_i, r_j], keep[r_i]], axis=1)
    radial = radial[np.lexsort((radial[:, 1], radial[:, 0]))]
    c_i, c_j = np.nonzero((nl == own) & (rot > keep[:, None]))
    circ = np.stack([keep[c_i], rot[c_i, c_j]], axis=1)
    circ = circ[np.lexsort((circ[:, 1], circ[:, 0]))]
    # faces are created layer by layer, so keep is a prefix of the ids
    assert keep[-1] == len(keep) - 1
    blue = blue_arr

    # trees: black vertices reached from the origin through radial edges
    children: dict[int, tuple] = {}
    tree_index: dict[tuple, int] = {}
    rot0 = dual.rotation(dual.origin)
    owner = {}
    for t, r in enumerate(rot0):
        tree_index[(dual.origin, r)] = t
        owner[r] = t
    frontier = list(rot0)
    for n in range(1, depth):
        nxt = []
        for f in frontier:
            rf = dual.rotation(f)
            if any(g is None for g in rf):
                raise AssertionError(f"face {f} on circle {n} is missing neighbours")
            parents = [i for i, g in enumerate(rf) if fl[g] == n - 1]
            if len(parents) != 1:
                raise DegenerateParameters(
                    f"tree vertex {f} has {len(parents)} inward edges; trees are not disjoint"
                )
            i0 = parents[0]
            ch = [rf[(i0 + j) % d] for j in range(1, d) if fl[rf[(i0 + j) % d]] == n + 1]
            if len(ch) != d - 3:
                raise DegenerateParameters(
                    f"tree vertex {f} has {len(ch)} children, expected {d - 3}"
                )
            children[f] = tuple(ch)
            for g in ch:
                if g in owner:
                    raise DegenerateParameters(f"trees meet at face {g}")
                owner[g] = owner[f]
                tree_index[(f, g)] = owner[f]
            nxt.extend(ch)
        frontier = nxt
    return CoronaGraph(dual, depth, gens, blue, radial, circ, tree_index, children)


# ------------------------------------------------------------ interfaces

@dataclass(frozen=True)
class DualInterface:
    tree_a: int
    branch_a: tuple
    tree_b: int
    branch_b: tuple
    depth: int
    dual_path: tuple
    crossed_primal_edges: frozenset

    @property
    def selector(self) -> tuple:
        return (self.tree_a, self.branch_a, self.tree_b, self.branch_b)


def _tree_path(cor: CoronaGraph, tree: int, branch, depth: int) -> list[int]:
    path = [cor.tree_root(tree)]
    for i in range(depth - 1):
        path.append(cor.children[path[-1]][branch[i]])
    return path


def build_interface(cor: CoronaGraph, tree_a: int, branch_a, tree_b: int, branch_b,
                    depth: int) -> DualInterface:
    d = cor.degree
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > cor.depth:
        raise ValueError(f"interface depth {depth} exceeds corona depth {cor.depth}")
    for t in (tree_a, tree_b):
        if not 0 <= t < d:
            raise BranchOutOfRange(f"tree index {t} not in 0..{d - 1}")
    if (tree_a - tree_b) % d in (0, 1, d - 1):
        raise NeighboringTrees(f"trees {tree_a} and {tree_b} are equal or adjacent")
    branch_a = tuple(int(x) for x in branch_a)
    branch_b = tuple(int(x) for x in branch_b)
    for br in (branch_a, branch_b):
        if len(br) < depth - 1:
            raise BranchOutOfRange(f"branch of length {len(br)} is shorter than depth - 1 = {depth - 1}")
        bad = [x for x in br[:depth - 1] if not 0 <= x < cor.branching]
        if bad:
            raise BranchOutOfRange(f"branch choice {bad[0]} not in 0..{cor.branching - 1}")
    branch_a = branch_a[:depth - 1]
    branch_b = branch_b[:depth - 1]
    side_a = _tree_path(cor, tree_a, branch_a, depth)
    side_b = _tree_path(cor, tree_b, branch_b, depth)
    path = tuple(side_b[::-1] + [cor.origin] + side_a)
    if len(set(path)) != len(path):
        raise AssertionError("interface dual path is not simple")
    crossed = [cor.dual.crossing(f, g) for f, g in zip(path, path[1:])]
    touched: dict[int, int] = {}
    for e in crossed:
        for v in e:
            touched[v] = touched.get(v, 0) + 1
    if any(c > 1 for c in touched.values()):
        raise AssertionError("a primal vertex meets two crossed edges")
    return DualInterface(tree_a, branch_a, tree_b, branch_b, depth, path, frozenset(crossed))


def canonical_selectors(cor: CoronaGraph, depth: int):
    """All selectors with ``tree_a < tree_b``, one per unordered pair."""
    d, b = cor.degree, cor.branching
    branches = list(itertools.product(range(b), repeat=depth - 1))
    for ta in range(d):
        for tb in range(ta + 1, d):
            if (tb - ta) % d in (1, d - 1):
                continue
            for ba in branches:
                for bb in branches:
                    yield ta, ba, tb, bb


def count_interface_prefixes(cor: CoronaGraph, depth: int) -> int:
    """Unordered non-neighbouring tree pairs times independent branch
    choices on both sides: ``d(d-3)/2 * (d-3)**(2(depth-1))``."""
    d = cor.degree
    if d <= 4:
        raise DegenerateParameters(f"dual degree {d} <= 4")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return d * (d - 3) // 2 * (d - 3) ** (2 * (depth - 1))


def enumerate_interface_prefixes(cor: CoronaGraph, depth: int) -> int:
    """Distinct crossed-edge sets over all ordered selectors.  Independent
    of the closed form: swapped selectors must coincide, everything else
    must differ."""
    d, b = cor.degree, cor.branching
    branches = list(itertools.product(range(b), repeat=depth - 1))
    seen = set()
    for ta in range(d):
        for tb in range(d):
            if (ta - tb) % d in (0, 1, d - 1):
                continue
            for ba in branches:
                for bb in branches:
                    seen.add(build_interface(cor, ta, ba, tb, bb, depth).crossed_primal_edges)
    return len(seen)


def random_selector(cor: CoronaGraph, depth: int, rng) -> tuple:
    d = cor.degree
    ta = int(rng.integers(d))
    allowed = [t for t in range(d) if (t - ta) % d not in (0, 1, d - 1)]
    tb = allowed[int(rng.integers(len(allowed)))]
    ba = tuple(int(x) for x in rng.integers(0, cor.branching, depth - 1))
    bb = tuple(int(x) for x in rng.integers(0, cor.branching, depth - 1))
    return ta, ba, tb, bb


def parse_selector(text: str) -> tuple:
    """``"ta:ba0,ba1,...:tb:bb0,bb1,..."`` into a selector tuple."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError(f"selector {text!r} must look like ta:b,b,..:tb:b,b,..")

    def seq(s):
        return tuple(int(x) for x in s.split(",") if x.strip() != "")

    return int(parts[0]), seq(parts[1]), int(parts[2]), seq(parts[3])


# ----------------------------------------------------- Dobrushin states

def reference_vertex(cor: CoronaGraph, iface: DualInterface) -> int:
    """Second endpoint (counter-clockwise) of tree a's origin edge; it gets +1."""
    f0 = cor.dual.primal.face(cor.origin)
    return f0[(iface.tree_a + 1) % len(f0)]


def split_window(lat: HyperbolicLattice, crossed, window) -> list[set[int]]:
    """Components of the window's induced graph minus the crossed edges."""
    window = set(window)
    cut = {tuple(sorted(e)) for e in crossed}
    comps = []
    seen = set()
    for s in sorted(window):
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        stack = [s]
        while stack:
            u = stack.pop()
            for w in lat.adj[u]:
                if w in window and w not in seen and (min(u, w), max(u, w)) not in cut:
                    seen.add(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def dobrushin_configuration(lat: HyperbolicLattice, cor: CoronaGraph, iface: DualInterface,
                            region) -> SpinConfiguration:
    """+1 / -1 on the two sides of the interface, over ``region`` and its
    shell.  ``region`` must be frontier-free."""
    base = SpinConfiguration.uniform(lat, region, 1)
    window = set(base.values)
    comps = split_window(lat, iface.crossed_primal_edges, window)
    if len(comps) != 2:
        raise NotSeparating(
            f"interface of depth {iface.depth} splits the window into {len(comps)} parts"
        )
    ref = reference_vertex(cor, iface)
    if ref not in window:
        raise NotSeparating(f"reference vertex {ref} lies outside the window")
    plus = comps[0] if ref in comps[0] else comps[1]
    return SpinConfiguration(base.region, {v: 1 if v in plus else -1 for v in window})


def dobrushin_on_ball(lat, cor, iface, radius: int) -> SpinConfiguration:
    return dobrushin_configuration(lat, cor, iface, ball(lat, radius, lat.origin))


def interface_depth_for_window(lat: HyperbolicLattice, radius: int) -> int:
    """Interface depth that safely crosses ``ball(radius + 1, origin)``."""
    win = ball(lat, radius + 1, lat.origin) if radius + 1 < lat.n_layers else None
    top = max(int(lat.layer[v]) for v in win) if win else radius + 1
    return top + 1
