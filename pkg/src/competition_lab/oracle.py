"""Brute-force ground truth on tiny graphs: exact transient distributions of
the competition / voter / Richardson chains via uniformization.

The graph here IS the world (no growth beyond it), which differs from the
infinite lattice; engines accept the same finite adjacency, so law-level
comparisons are apples to apples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.stats import poisson

EMPTY, RED, BLUE = 0, 1, 2

STATE_CAP = 3**12


@dataclass(frozen=True)
class TinyGraph:
    """Explicit adjacency on at most 12 sites."""

    sites: tuple  # site labels (coordinates or indices)
    adjacency: tuple  # tuple of tuples of site indices

    def __post_init__(self):
        if len(self.sites) > 12:
            raise ValueError("TinyGraph is limited to 12 sites")

    @staticmethod
    def path(n: int) -> "TinyGraph":
        adj = tuple(
            tuple(j for j in (i - 1, i + 1) if 0 <= j < n) for i in range(n)
        )
        return TinyGraph(tuple(range(n)), adj)

    @staticmethod
    def cycle(n: int) -> "TinyGraph":
        adj = tuple(((i - 1) % n, (i + 1) % n) for i in range(n))
        return TinyGraph(tuple(range(n)), adj)

    @staticmethod
    def grid(nx: int, ny: int) -> "TinyGraph":
        sites = tuple(itertools.product(range(nx), range(ny)))
        index = {s: i for i, s in enumerate(sites)}
        adj = []
        for (x, y) in sites:
            nbrs = []
            for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                p = (x + dx, y + dy)
                if p in index:
                    nbrs.append(index[p])
            adj.append(tuple(nbrs))
        return TinyGraph(sites, tuple(adj))


@dataclass
class GeneratorMatrix:
    """Reachable states plus the CTMC generator restricted to them."""

    states: list  # list of tuples of site states
    index: dict  # state -> row
    q: sparse.csr_matrix

    def state_row(self, state) -> int:
        return self.index[tuple(state)]


def _transitions(graph: TinyGraph, model: str, state: tuple):
    """Legal single-site events from `state`, yielding (new_state, rate).

    Rates are per directed edge (all equal to 1); multiple edges into the same
    target state aggregate.
    """
    out = {}
    for x, nbrs in enumerate(graph.adjacency):
        sx = state[x]
        if sx == EMPTY:
            continue
        for y in nbrs:
            sy = state[y]
            if model == "richardson":
                legal = sy == EMPTY
            elif model == "competition":
                legal = sy == EMPTY or sy != sx
            elif model == "voter":
                legal = sy != EMPTY and sy != sx
            else:
                raise ValueError(f"unknown model {model!r}")
            if legal:
                new = list(state)
                new[y] = sx
                new = tuple(new)
                out[new] = out.get(new, 0) + 1
    return out


def build_generator(graph: TinyGraph, model: str, init) -> GeneratorMatrix:
    """Enumerate states reachable from `init` and assemble the generator."""
    init = tuple(int(v) for v in init)
    if len(init) != len(graph.sites):
        raise ValueError("init length must match site count")
    if model == "voter" and any(v == EMPTY for v in init):
        raise ValueError("voter init must color every site")
    if model == "richardson":
        # colors are ignored: canonicalize occupied sites to RED
        init = tuple(RED if v != EMPTY else EMPTY for v in init)
    states = [init]
    index = {init: 0}
    rows, cols, vals = [], [], []
    frontier = [init]
    while frontier:
        nxt = []
        for s in frontier:
            i = index[s]
            total = 0
            for new, rate in _transitions(graph, model, s).items():
                if new not in index:
                    if len(index) >= STATE_CAP:
                        raise ValueError("state space exceeds cap; use a smaller graph")
                    index[new] = len(states)
                    states.append(new)
                    nxt.append(new)
                j = index[new]
                rows.append(i)
                cols.append(j)
                vals.append(float(rate))
                total += rate
            if total:
                rows.append(i)
                cols.append(i)
                vals.append(-float(total))
        frontier = nxt
    n = len(states)
    q = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return GeneratorMatrix(states=states, index=index, q=q)


def transient_distribution(gen: GeneratorMatrix, init, t: float, tol: float = 1e-9) -> np.ndarray:
    """Distribution at time t by uniformization, truncation error < tol."""
    if t < 0 or tol <= 0:
        raise ValueError("need t >= 0 and tol > 0")
    i0 = gen.state_row(tuple(int(v) for v in init))
    n = gen.q.shape[0]
    p0 = np.zeros(n)
    p0[i0] = 1.0
    lam = float(-gen.q.diagonal().min())
    if lam == 0.0 or t == 0.0:
        return p0
    kernel = sparse.eye(n, format="csr") + gen.q / lam
    kmax = int(poisson.isf(tol / 2, lam * t)) + 1
    weights = poisson.pmf(np.arange(kmax + 1), lam * t)
    out = weights[0] * p0
    p = p0
    for k in range(1, kmax + 1):
        p = p @ kernel
        out = out + weights[k] * p
    return out


def event_probability(gen: GeneratorMatrix, dist: np.ndarray, predicate) -> float:
    """Probability of a configuration event under a state distribution."""
    return float(sum(p for s, p in zip(gen.states, dist) if predicate(s)))


def compare_engine(gen: GeneratorMatrix, dist: np.ndarray, observed_states) -> list:
    """Tabulate Monte Carlo state frequencies against the oracle distribution.

    observed_states: iterable of final configurations (tuples). Returns rows
    (state, prob_oracle, freq_mc, z) sorted by decreasing oracle probability;
    z uses the binomial standard error (safe-guarded for p near 0 or 1).
    """
    counts = {}
    total = 0
    for s in observed_states:
        s = tuple(int(v) for v in s)
        counts[s] = counts.get(s, 0) + 1
        total += 1
    rows = []
    seen = set(gen.states) | set(counts)
    for s in seen:
        p = dist[gen.index[s]] if s in gen.index else 0.0
        f = counts.get(s, 0) / total
        se = np.sqrt(max(p * (1 - p), 1e-300) / total)
        z = (f - p) / se
        rows.append((s, float(p), float(f), float(z)))
    rows.sort(key=lambda r: -r[1])
    return rows


def max_abs_z(rows) -> float:
    return max(abs(r[3]) for r in rows)
