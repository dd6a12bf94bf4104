# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gillespie kernel. Mirrors _kernel_py.advance exactly, including
random-stream consumption, so trajectories are bit-identical to the
pure-Python kernel. Any behavioral change must be made in both files.
"""

from libc.math cimport log1p, isnan

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF EMPTY = 0

DEF MODEL_RICHARDSON = 0
DEF MODEL_COMPETITION = 1
DEF MODEL_VOTER = 2

DEF MODE_ABORT = 0
DEF MODE_CLOSED = 1
DEF MODE_WRAP = 2

DEF REASON_TIME = 0
DEF REASON_ABSORBED = 1
DEF REASON_EXTINCTION = 2
DEF REASON_BOUNDARY = 3

RNG_CHUNK = 8192


cdef inline long long _neighbor(long long x, int k, long long* strides,
                                long long* shape, int mode) nogil:
    cdef int axis = k >> 1
    cdef long long s = strides[axis]
    cdef long long m = shape[axis]
    cdef long long c = (x // s) % m
    if k & 1:
        if c == m - 1:
            if mode == MODE_WRAP:
                return x - (m - 1) * s
            return -1
        return x + s
    if c == 0:
        if mode == MODE_WRAP:
            return x + (m - 1) * s
        return -1
    return x - s


cdef inline bint _is_boundary(long long x, long long* strides, long long* shape,
                              int nd) nogil:
    cdef int axis
    cdef long long c
    for axis in range(nd):
        c = (x // strides[axis]) % shape[axis]
        if c == 0 or c == shape[axis] - 1:
            return True
    return False


cdef inline bint _edge_active(signed char* state, long long x, long long y,
                              int model) nogil:
    cdef signed char sx = state[x]
    if sx == EMPTY:
        return False
    cdef signed char sy = state[y]
    if model == MODEL_RICHARDSON:
        return sy == EMPTY
    if model == MODEL_COMPETITION:
        return sy == EMPTY or sy != sx
    return sy != EMPTY and sy != sx


def advance(object ks, double t_limit, bint stop_on_extinction=False,
            bint record=False, long long max_events=-1):
    """Drop-in replacement for _kernel_py.advance operating on a KernelState."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] strides_arr = ks.strides
    cdef cnp.ndarray[cnp.int64_t, ndim=1] shape_arr = ks.shape
    cdef long long* strides = <long long*> strides_arr.data
    cdef long long* shape = <long long*> shape_arr.data
    cdef int nd = ks.nd
    cdef int twod = 2 * nd
    cdef int model = ks.model
    cdef int mode = ks.mode

    cdef cnp.ndarray[cnp.int8_t, ndim=1] state_arr = ks.state
    cdef signed char* state = <signed char*> state_arr.data
    cdef cnp.ndarray[cnp.int64_t, ndim=1] act_pos_arr = ks.act_pos
    cdef long long* act_pos = <long long*> act_pos_arr.data
    cdef cnp.ndarray[cnp.int64_t, ndim=1] act_arr = ks.act
    cdef long long* act = <long long*> act_arr.data
    cdef long long n_act = ks.n_act
    cdef long long act_cap = act_arr.shape[0]

    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts_arr = ks.counts
    cdef long long* counts = <long long*> counts_arr.data
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ext_arr = ks.ext_time
    cdef double* ext_time = <double*> ext_arr.data

    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf_arr = ks.buf
    cdef double* buf = NULL
    cdef long long buf_len = buf_arr.shape[0]
    cdef long long buf_pos = ks.buf_pos
    if buf_len > 0:
        buf = <double*> buf_arr.data

    cdef double t = ks.t
    cdef long long n_events = ks.n_events

    cdef list ev_t = [], ev_src = [], ev_dst = [], ev_old = [], ev_new = []

    cdef int reason = REASON_TIME
    cdef double u1, u2, dt
    cdef long long e, x, y, z, i, last, p
    cdef int kdir, k
    cdef signed char old, new
    cdef bint active

    while True:
        if max_events >= 0 and n_events >= max_events:
            break
        if n_act == 0:
            reason = REASON_ABSORBED
            break
        # refill rng buffer
        if buf_pos >= buf_len:
            ks.buf = ks.gen.random(RNG_CHUNK)
            buf_arr = ks.buf
            buf = <double*> buf_arr.data
            buf_len = buf_arr.shape[0]
            buf_pos = 0
        u1 = buf[buf_pos]
        buf_pos += 1
        dt = -log1p(-u1) / n_act
        if t + dt > t_limit:
            t = t_limit
            reason = REASON_TIME
            break
        t = t + dt
        if buf_pos >= buf_len:
            ks.buf = ks.gen.random(RNG_CHUNK)
            buf_arr = ks.buf
            buf = <double*> buf_arr.data
            buf_len = buf_arr.shape[0]
            buf_pos = 0
        u2 = buf[buf_pos]
        buf_pos += 1
        i = <long long> (u2 * n_act)
        e = act[i]
        x = e // twod
        kdir = <int> (e % twod)
        y = _neighbor(x, kdir, strides, shape, mode)
        old = state[y]
        new = state[x]
        state[y] = new
        counts[old] -= 1
        counts[new] += 1
        # refresh edges incident to y
        for k in range(twod):
            z = _neighbor(y, k, strides, shape, mode)
            if z < 0:
                continue
            # edge y -> z
            e = y * twod + k
            active = _edge_active(state, y, z, model)
            p = act_pos[e]
            if active and p < 0:
                if n_act == act_cap:
                    ks.n_act = n_act
                    ks.act = np.resize(ks.act, 2 * act_cap)
                    act_arr = ks.act
                    act = <long long*> act_arr.data
                    act_cap = act_arr.shape[0]
                act[n_act] = e
                act_pos[e] = n_act
                n_act += 1
            elif (not active) and p >= 0:
                last = act[n_act - 1]
                act[p] = last
                act_pos[last] = p
                act_pos[e] = -1
                n_act -= 1
            # edge z -> y
            e = z * twod + (k ^ 1)
            active = _edge_active(state, z, y, model)
            p = act_pos[e]
            if active and p < 0:
                if n_act == act_cap:
                    ks.n_act = n_act
                    ks.act = np.resize(ks.act, 2 * act_cap)
                    act_arr = ks.act
                    act = <long long*> act_arr.data
                    act_cap = act_arr.shape[0]
                act[n_act] = e
                act_pos[e] = n_act
                n_act += 1
            elif (not active) and p >= 0:
                last = act[n_act - 1]
                act[p] = last
                act_pos[last] = p
                act_pos[e] = -1
                n_act -= 1
        n_events += 1
        if record:
            ev_t.append(t)
            ev_src.append(x)
            ev_dst.append(y)
            ev_old.append(old)
            ev_new.append(new)
        if old != EMPTY and counts[old] == 0 and isnan(ext_time[old]):
            ext_time[old] = t
            if stop_on_extinction:
                reason = REASON_EXTINCTION
                break
        if mode == MODE_ABORT and _is_boundary(y, strides, shape, nd):
            reason = REASON_BOUNDARY
            break

    ks.t = t
    ks.n_events = n_events
    ks.n_act = n_act
    ks.buf_pos = buf_pos

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
