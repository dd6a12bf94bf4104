"""Pure-Python Gillespie kernel: the reference implementation of the hot loop.

The compiled extension (competition_lab._speedups) implements exactly the same
state machine and consumes the same random-number stream, so the two kernels
produce bit-identical trajectories. Keep any behavioral change mirrored there.

State encoding: flat int8 array over a d-dimensional box, 0=empty, 1=red,
2=blue. A directed edge from site x in direction k (k = 2*axis + (0 minus,
1 plus)) has id x*2d + k. The active-edge registry is a swap-remove array with
an inverse position table, so sampling, insertion, and deletion are O(1).
"""

from __future__ import annotations

import math

import numpy as np

RNG_CHUNK = 8192

EMPTY, RED, BLUE = 0, 1, 2

MODEL_RICHARDSON, MODEL_COMPETITION, MODEL_VOTER = 0, 1, 2
MODE_ABORT, MODE_CLOSED, MODE_WRAP = 0, 1, 2

REASON_TIME, REASON_ABSORBED, REASON_EXTINCTION, REASON_BOUNDARY = 0, 1, 2, 3
REASON_NAMES = {
    REASON_TIME: "time",
    REASON_ABSORBED: "absorbed",
    REASON_EXTINCTION: "extinction",
    REASON_BOUNDARY: "boundary",
}


class KernelState:
    """Mutable simulation state shared by both kernel implementations."""

    def __init__(self, shape, state, model: int, mode: int, gen: np.random.Generator):
        self.shape = np.asarray(shape, dtype=np.int64)
        self.nd = len(shape)
        self.n = int(np.prod(self.shape))
        strides = np.ones(self.nd, dtype=np.int64)
        for k in range(self.nd - 2, -1, -1):
            strides[k] = strides[k + 1] * self.shape[k + 1]
        self.strides = strides
        self.state = np.ascontiguousarray(state, dtype=np.int8).reshape(-1)
        if self.state.shape[0] != self.n:
            raise ValueError("state size does not match box shape")
        self.model = model
        self.mode = mode
        self.gen = gen
        self.buf = np.empty(0, dtype=np.float64)
        self.buf_pos = 0
        self.t = 0.0
        self.n_events = 0
        self.counts = np.zeros(3, dtype=np.int64)
        for v in (EMPTY, RED, BLUE):
            self.counts[v] = int(np.count_nonzero(self.state == v))
        self.ext_time = np.full(3, np.nan)  # first-zero time per color, index 1/2
        twod = 2 * self.nd
        self.act_pos = np.full(self.n * twod, -1, dtype=np.int64)
        cap = 1024
        self.act = np.empty(cap, dtype=np.int64)
        self.n_act = 0
        self._build_registry()

    # -- geometry -------------------------------------------------------

    def _neighbor(self, x: int, k: int) -> int:
        axis = k >> 1
        s = int(self.strides[axis])
        m = int(self.shape[axis])
        c = (x // s) % m
        if k & 1:  # plus direction
            if c == m - 1:
                return x - (m - 1) * s if self.mode == MODE_WRAP else -1
            return x + s
        if c == 0:
            return x + (m - 1) * s if self.mode == MODE_WRAP else -1
        return x - s

    def _is_boundary(self, x: int) -> bool:
        for axis in range(self.nd):
            s = int(self.strides[axis])
            c = (x // s) % int(self.shape[axis])
            if c == 0 or c == int(self.shape[axis]) - 1:
                return True
        return False

    # -- active-edge registry --------------------------------------------

    def _edge_active(self, x: int, y: int) -> bool:
        sx = self.state[x]
        if sx == EMPTY:
            return False
        sy = self.state[y]
        if self.model == MODEL_RICHARDSON:
            return sy == EMPTY
        if self.model == MODEL_COMPETITION:
            return sy == EMPTY or sy != sx
        return sy != EMPTY and sy != sx  # voter

    def _refresh_edge(self, e: int, x: int, y: int) -> None:
        active = self._edge_active(x, y)
        p = self.act_pos[e]
        if active and p < 0:
            if self.n_act == len(self.act):
                self.act = np.resize(self.act, 2 * len(self.act))
            self.act[self.n_act] = e
            self.act_pos[e] = self.n_act
            self.n_act += 1
        elif not active and p >= 0:
            last = self.act[self.n_act - 1]
            self.act[p] = last
            self.act_pos[last] = p
            self.act_pos[e] = -1
            self.n_act -= 1

    def _update_edges_around(self, y: int) -> None:
        twod = 2 * self.nd
        for k in range(twod):
            z = self._neighbor(y, k)
            if z < 0:
                continue
            self._refresh_edge(y * twod + k, y, z)
            self._refresh_edge(z * twod + (k ^ 1), z, y)

    def _build_registry(self) -> None:
        twod = 2 * self.nd
        occupied = np.nonzero(self.state)[0]
        for x in occupied:
            x = int(x)
            for k in range(twod):
                z = self._neighbor(x, k)
                if z >= 0:
                    self._refresh_edge(x * twod + k, x, z)

    # -- rng --------------------------------------------------------------

    def _next_rand(self) -> float:
        if self.buf_pos >= len(self.buf):
            self.buf = self.gen.random(RNG_CHUNK)
            self.buf_pos = 0
        v = self.buf[self.buf_pos]
        self.buf_pos += 1
        return float(v)

    # -- convenience ------------------------------------------------------

    def rescan_active_edges(self) -> set:
        """Full recomputation of the active set (testing aid, O(n*d))."""
        twod = 2 * self.nd
        out = set()
        for x in np.nonzero(self.state)[0]:
            x = int(x)
            for k in range(twod):
                z = self._neighbor(x, k)
                if z >= 0 and self._edge_active(x, z):
                    out.add(x * twod + k)
        return out

    def active_edge_set(self) -> set:
        return {int(e) for e in self.act[: self.n_act]}


def advance(
    ks: KernelState,
    t_limit: float,
    stop_on_extinction: bool = False,
    record: bool = False,
    max_events: int = -1,
):
    """Run the CTMC to t_limit (or an earlier stop). Returns (reason, events).

    events is a (times, src, dst, old, new) tuple of arrays when record=True,
    else None. The per-event rule: total rate = number of active directed
    edges, the firing edge is uniform among them, and the target adopts the
    source's state.
    """
    twod = 2 * ks.nd
    ev_t, ev_src, ev_dst, ev_old, ev_new = [], [], [], [], []
    reason = REASON_TIME
    while True:
        if max_events >= 0 and ks.n_events >= max_events:
            break
        k_act = ks.n_act
        if k_act == 0:
            reason = REASON_ABSORBED
            break
        u1 = ks._next_rand()
        dt = -math.log1p(-u1) / k_act
        if ks.t + dt > t_limit:
            ks.t = t_limit
            reason = REASON_TIME
            break
        ks.t += dt
        u2 = ks._next_rand()
        i = int(u2 * k_act)
        e = int(ks.act[i])
        x = e // twod
        kdir = e % twod
        y = ks._neighbor(x, kdir)
        old = int(ks.state[y])
        new = int(ks.state[x])
        ks.state[y] = new
        ks.counts[old] -= 1
        ks.counts[new] += 1
        ks._update_edges_around(y)
        ks.n_events += 1
        if record:
            ev_t.append(ks.t)
            ev_src.append(x)
            ev_dst.append(y)
            ev_old.append(old)
            ev_new.append(new)
        if old != EMPTY and ks.counts[old] == 0 and math.isnan(ks.ext_time[old]):
            ks.ext_time[old] = ks.t
            if stop_on_extinction:
                reason = REASON_EXTINCTION
                break
        if ks.mode == MODE_ABORT and ks._is_boundary(y):
            reason = REASON_BOUNDARY
            break
    events = None
    if record:
        events = (
            np.asarray(ev_t, dtype=np.float64),
            np.asarray(ev_src, dtype=np.int64),
            np.asarray(ev_dst, dtype=np.int64),
            np.asarray(ev_old, dtype=np.int8),
            np.asarray(ev_new, dtype=np.int8),
        )
    return reason, events
