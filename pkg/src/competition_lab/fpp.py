"""First-passage percolation on exponential edge weights: passage-time fields,
Richardson sublevel sets, directional duality, and the travel-time deviation
experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .random_media import Box, EdgeWeightField


@dataclass
class PassageField:
    """Passage times T(source, x) for every site x of a box."""

    field: EdgeWeightField
    box: Box
    sources: frozenset
    times: np.ndarray  # flat (nsites,), np.inf where unreachable (never, here)
    predecessors: np.ndarray | None = None

    def _linear(self, site) -> int:
        rel = [c - l for c, l in zip(site, self.box.lo)]
        shape = self.box.shape
        idx = 0
        for r, s in zip(rel, shape):
            if not 0 <= r < s:
                raise ValueError(f"site {tuple(site)} outside the box")
            idx = idx * s + r
        return idx

    def time_to(self, site) -> float:
        return float(self.times[self._linear(site)])

    def path_to(self, site) -> list:
        """The optimal path from the source set to `site` (list of sites)."""
        if self.predecessors is None:
            raise ValueError("field was computed without predecessors")
        idx = self._linear(site)
        shape = self.box.shape
        path = []
        while idx >= 0:
            coords = []
            rem = idx
            for s in reversed(shape):
                coords.append(rem % s)
                rem //= s
            path.append(tuple(c + l for c, l in zip(reversed(coords), self.box.lo)))
            idx = int(self.predecessors[idx])
        path.reverse()
        return path

    def path_time(self, site) -> float:
        """Traversal time of the optimal path, summed order-independently."""
        path = self.path_to(site)
        return math.fsum(
            self.field.weight_for_edge(a, b) for a, b in zip(path, path[1:])
        )


def _box_edges(box: Box):
    """All undirected in-box edges as (lo_coords (E, d), axis (E,), i, j)."""
    shape = box.shape
    d = box.ndim
    n = box.nsites
    idx = np.arange(n, dtype=np.int64)
    coords = np.empty((n, d), dtype=np.int64)
    rem = idx.copy()
    for k in range(d - 1, -1, -1):
        coords[:, k] = rem % shape[k]
        rem //= shape[k]
    strides = np.ones(d, dtype=np.int64)
    for k in range(d - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]
    los, axes, iis, jjs = [], [], [], []
    for k in range(d):
        mask = coords[:, k] < shape[k] - 1
        i = idx[mask]
        los.append(coords[mask] + np.asarray(box.lo, dtype=np.int64))
        axes.append(np.full(mask.sum(), k, dtype=np.int64))
        iis.append(i)
        jjs.append(i + strides[k])
    return (
        np.concatenate(los),
        np.concatenate(axes),
        np.concatenate(iis),
        np.concatenate(jjs),
    )


def passage_times(
    field: EdgeWeightField,
    sources,
    box: Box,
    want_paths: bool = False,
) -> PassageField:
    """Exact source-set shortest-path passage times within `box`.

    Label-setting shortest paths realize the infimum over self-avoiding paths
    since all weights are positive (a minimizing path never revisits a site).
    """
    sources = {tuple(int(c) for c in s) for s in sources}
    if not sources:
        raise ValueError("source set must be nonempty")
    for s in sources:
        if not box.contains(s):
            raise ValueError(f"source {s} outside the box")
    los, axes, iis, jjs = _box_edges(box)
    w = field.weights(los, axes)
    n = box.nsites
    graph = coo_matrix((w, (iis, jjs)), shape=(n, n)).tocsr()
    shape = box.shape
    src_idx = []
    for s in sources:
        idx = 0
        for c, l, m in zip(s, box.lo, shape):
            idx = idx * m + (c - l)
        src_idx.append(idx)
    if want_paths:
        times, pred = dijkstra(
            graph, directed=False, indices=src_idx, min_only=True,
            return_predecessors=True,
        )[:2]
    else:
        times = dijkstra(graph, directed=False, indices=src_idx, min_only=True)
        pred = None
    return PassageField(field, box, frozenset(sources), times, pred)


def richardson_from_fpp(pf: PassageField, t: float) -> set:
    """Occupied set {x : T(source, x) <= t}; errors if it touches the box edge."""
    mask = pf.times <= t
    idx = np.nonzero(mask)[0]
    shape = pf.box.shape
    coords = np.empty((len(idx), pf.box.ndim), dtype=np.int64)
    rem = idx.copy()
    for k in range(pf.box.ndim - 1, -1, -1):
        coords[:, k] = rem % shape[k] + pf.box.lo[k]
        rem //= shape[k]
    on_edge = np.zeros(len(idx), dtype=bool)
    for k in range(pf.box.ndim):
        on_edge |= (coords[:, k] == pf.box.lo[k]) | (coords[:, k] == pf.box.hi[k])
    if np.any(on_edge):
        raise ValueError("sublevel set touches the box boundary (undercounted)")
    return {tuple(map(int, c)) for c in coords}


def duality_check(field: EdgeWeightField, f_set, g_set, box: Box) -> tuple:
    """Directed set-to-set passage times (T(F->G), T(G->F)) on shared weights.

    Both are traversal times of the respective optimal paths, accumulated with
    an order-independent exact sum, so path-reversal symmetry makes them
    bit-identical.
    """
    f_set = {tuple(int(c) for c in s) for s in f_set}
    g_set = {tuple(int(c) for c in s) for s in g_set}
    if not f_set or not g_set or (f_set & g_set):
        raise ValueError("F and G must be nonempty and disjoint")

    def directed(src, dst):
        pf = passage_times(field, src, box, want_paths=True)
        best = min(sorted(dst), key=pf.time_to)
        return pf.path_time(best)

    return directed(f_set, g_set), directed(g_set, f_set)


def kesten_experiment(
    field_seed_fn,
    direction,
    ns,
    s_grid,
    reps: int,
    mu_hat: float,
    margin: int = 12,
) -> list:
    """Empirical tail table of P{|T(0, n*u) - mu_hat*n| > s*sqrt(n)}.

    field_seed_fn(rep) must return a fresh EdgeWeightField per replicate.
    Returns rows (n, s, freq, reps) plus, per n, the fitted exponential decay
    rate of the tail in s (None where the tail has no positive frequencies to
    fit). Requested tail levels with zero observed exceedances are reported as
    censored via freq=0.0.
    """
    direction = np.asarray(direction, dtype=np.float64)
    direction = direction / np.abs(direction).max()
    rows = []
    fits = {}
    for n in ns:
        target = tuple(int(round(n * c)) for c in direction)
        box = Box(
            tuple(min(0, c) - margin for c in target),
            tuple(max(0, c) + margin for c in target),
        )
        devs = np.empty(reps)
        for rep in range(reps):
            pf = passage_times(field_seed_fn(rep), {(0,) * len(target)}, box)
            devs[rep] = pf.time_to(target) - mu_hat * n
        scaled = np.abs(devs) / math.sqrt(n)
        freqs = [(s, float(np.mean(scaled > s))) for s in s_grid]
        for s, fr in freqs:
            rows.append((n, float(s), fr, reps))
        pos = [(s, fr) for s, fr in freqs if fr > 0]
        if len(pos) >= 2:
            ss = np.array([p[0] for p in pos])
            lf = np.log([p[1] for p in pos])
            slope = np.polyfit(ss, lf, 1)[0]
            fits[n] = float(-slope)
        else:
            fits[n] = None
    return rows, fits
