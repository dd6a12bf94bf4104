"""Seeded randomness: derived streams, Poisson arrow processes, exponential edge weights.

Every random object in the package is a pure function of a 64-bit master seed
plus a tuple of derivation labels, so replicates can run in parallel (or be
re-run years later) and still produce bit-identical results.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_key(master_seed: int, *labels) -> int:
    """128-bit key derived deterministically from (master_seed, labels).

    Labels may be ints, strings, or tuples of ints; the encoding is injective
    enough in practice (blake2b over a delimited repr).
    """
    h = hashlib.blake2b(digest_size=16)
    h.update(struct.pack("<Q", master_seed & _MASK64))
    for lab in labels:
        h.update(repr(lab).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def generator_for(master_seed: int, *labels) -> np.random.Generator:
    """A fresh numpy Generator on the stream named by (master_seed, labels)."""
    return np.random.Generator(np.random.Philox(key=stream_key(master_seed, *labels)))


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus derivation labels (experiment id, replicate index, ...)."""

    master_seed: int
    labels: tuple = ()

    def child(self, *labels) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.labels + labels)

    def key(self) -> int:
        return stream_key(self.master_seed, *self.labels)

    def generator(self) -> np.random.Generator:
        return generator_for(self.master_seed, *self.labels)


# ---------------------------------------------------------------------------
# counter-based hashing (vectorized, for the edge-weight field)

_C1 = np.uint64(0x9E3779B97F4A7C15)
_C2 = np.uint64(0xBF58476D1CE4E5B9)
_C3 = np.uint64(0x94D049BB133111EB)


def _mix64(z):
    """splitmix64 finalizer on uint64 arrays."""
    z = z + _C1
    z = z ^ (z >> np.uint64(30))
    z = z * _C2
    z = z ^ (z >> np.uint64(27))
    z = z * _C3
    z = z ^ (z >> np.uint64(31))
    return z


def _hash_coords(seed64: np.uint64, coords: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """Vectorized hash of lattice edges: (N, d) lower-endpoint coords + axis -> uint64."""
    h = np.full(coords.shape[0], seed64, dtype=np.uint64)
    for j in range(coords.shape[1]):
        h = _mix64(h ^ coords[:, j].astype(np.int64).view(np.uint64))
    h = _mix64(h ^ np.asarray(axis, dtype=np.uint64))
    return _mix64(h)


class EdgeWeightField:
    """I.i.d. mean-1 exponential passage times, one per undirected lattice edge.

    Weights are generated on demand by a counter-based hash of the canonical
    edge (lower endpoint, axis), so the field is conceptually infinite,
    symmetric, and bit-stable across restarts and query orders.
    """

    def __init__(self, seed: SeedSpec):
        self.seed = seed
        self._key64 = np.uint64(seed.child("edge_weights").key() & _MASK64)

    def weights(self, lo_coords: np.ndarray, axis: np.ndarray) -> np.ndarray:
        """Weights for edges given by their lower endpoint and axis (vectorized)."""
        lo_coords = np.atleast_2d(np.asarray(lo_coords, dtype=np.int64))
        h = _hash_coords(self._key64, lo_coords, axis)
        # (h >> 11) + 0.5 scaled to (0, 1): strictly positive weights.
        u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        return -np.log1p(-u)

    def weight_for_edge(self, x, y) -> float:
        """Weight of the undirected edge {x, y}; symmetric by canonicalization."""
        x = tuple(int(c) for c in x)
        y = tuple(int(c) for c in y)
        diff = [yi - xi for xi, yi in zip(x, y)]
        nz = [j for j, v in enumerate(diff) if v != 0]
        if len(nz) != 1 or abs(diff[nz[0]]) != 1 or len(x) != len(y):
            raise ValueError(f"sites {x} and {y} are not lattice neighbors")
        axis = nz[0]
        lo = x if diff[axis] == 1 else y
        return float(
            self.weights(np.asarray([lo], dtype=np.int64), np.asarray([axis]))[0]
        )


# ---------------------------------------------------------------------------
# percolation structure (Poisson arrows on directed edges)


@dataclass
class Box:
    """Axis-aligned lattice box: lo[i] <= x_i <= hi[i]."""

    lo: tuple
    hi: tuple

    @property
    def ndim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def nsites(self) -> int:
        n = 1
        for s in self.shape:
            n *= s
        return n

    def contains(self, x) -> bool:
        return all(l <= c <= h for c, l, h in zip(x, self.lo, self.hi))

    def is_boundary(self, x) -> bool:
        return any(c == l or c == h for c, l, h in zip(x, self.lo, self.hi))

    def sites(self):
        """All sites in lexicographic order (small boxes only)."""
        import itertools

        ranges = [range(l, h + 1) for l, h in zip(self.lo, self.hi)]
        return itertools.product(*ranges)

    @staticmethod
    def centered(center, half_width: int) -> "Box":
        return Box(
            tuple(c - half_width for c in center),
            tuple(c + half_width for c in center),
        )


def _adjacent(x, y):
    diff = [yi - xi for xi, yi in zip(x, y)]
    return sum(abs(v) for v in diff) == 1


class PercolationStructure:
    """Independent rate-1 Poisson arrow processes on the directed edges of a box.

    Arrow lists are generated lazily per directed edge and cached; each edge's
    stream is keyed by (seed, "arrows", from, to), so lazy and eager
    materialization agree bit-exactly.
    """

    def __init__(self, box: Box, horizon: float, seed: SeedSpec):
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        self.box = box
        self.horizon = float(horizon)
        self.seed = seed
        self._cache: dict = {}

    def arrows_for_edge(self, frm, to) -> np.ndarray:
        """Strictly increasing arrow times on the directed edge frm -> to."""
        frm = tuple(int(c) for c in frm)
        to = tuple(int(c) for c in to)
        if not _adjacent(frm, to):
            raise ValueError(f"{frm} -> {to} is not a directed lattice edge")
        if not (self.box.contains(frm) and self.box.contains(to)):
            raise ValueError(f"edge {frm} -> {to} leaves the box")
        key = (frm, to)
        times = self._cache.get(key)
        if times is None:
            gen = generator_for(
                self.seed.master_seed, *self.seed.labels, "arrows", frm, to
            )
            n = int(gen.poisson(self.horizon))
            times = np.sort(gen.random(n)) * self.horizon
            self._cache[key] = times
        return times

    def directed_edges(self):
        """All in-box directed edges, in a fixed deterministic order."""
        d = self.box.ndim
        for x in self.box.sites():
            for axis in range(d):
                for sign in (-1, 1):
                    y = list(x)
                    y[axis] += sign
                    y = tuple(y)
                    if self.box.contains(y):
                        yield x, y

    def merged_event_scan(self):
        """Every arrow of every directed edge, in increasing global time order.

        Ties (possible only after serialization rounding) break by
        lexicographic (from, to).
        """
        events = []
        for frm, to in self.directed_edges():
            for t in self.arrows_for_edge(frm, to):
                events.append((float(t), frm, to))
        events.sort()
        return events

    def dump(self, path) -> None:
        """Text dump, one `t from_coords to_coords` line per arrow, sorted by t."""
        with open(path, "w") as fh:
            for t, frm, to in self.merged_event_scan():
                fc = " ".join(str(c) for c in frm)
                tc = " ".join(str(c) for c in to)
                fh.write(f"{t!r} {fc} {tc}\n")
