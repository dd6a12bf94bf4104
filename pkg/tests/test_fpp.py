import itertools
import math

import numpy as np
import pytest

from competition_lab.fpp import (
    duality_check,
    kesten_experiment,
    passage_times,
    richardson_from_fpp,
)
from competition_lab.random_media import Box, EdgeWeightField, SeedSpec


def brute_force_time(field, src, dst, box):
    """Min total weight over all self-avoiding paths (tiny boxes only)."""
    sites = list(box.sites())
    best = math.inf

    def explore(x, visited, acc):
        nonlocal best
        if acc >= best:
            return
        if x == dst:
            best = acc
            return
        for axis in range(box.ndim):
            for sign in (-1, 1):
                y = list(x)
                y[axis] += sign
                y = tuple(y)
                if box.contains(y) and y not in visited:
                    explore(y, visited | {y}, acc + field.weight_for_edge(x, y))

    explore(src, {src}, 0.0)
    return best


def test_dijkstra_matches_bruteforce_enumeration():
    box = Box((0, 0), (2, 2))
    for seed in range(5):
        field = EdgeWeightField(SeedSpec(seed))
        pf = passage_times(field, {(0, 0)}, box)
        for dst in [(2, 2), (1, 2), (2, 0)]:
            assert pf.time_to(dst) == pytest.approx(
                brute_force_time(field, (0, 0), dst, box), rel=1e-12
            )


def test_path_reconstruction_consistent():
    box = Box((0, 0), (4, 4))
    field = EdgeWeightField(SeedSpec(3))
    pf = passage_times(field, {(0, 0)}, box, want_paths=True)
    path = pf.path_to((4, 3))
    assert path[0] == (0, 0) and path[-1] == (4, 3)
    # consecutive sites adjacent
    for a, b in zip(path, path[1:]):
        assert sum(abs(x - y) for x, y in zip(a, b)) == 1
    assert pf.path_time((4, 3)) == pytest.approx(pf.time_to((4, 3)), rel=1e-12)


def test_source_set_minimum():
    box = Box((0,), (10,))
    field = EdgeWeightField(SeedSpec(1))
    multi = passage_times(field, {(0,), (10,)}, box)
    a = passage_times(field, {(0,)}, box)
    b = passage_times(field, {(10,)}, box)
    for x in range(11):
        assert multi.time_to((x,)) == pytest.approx(
            min(a.time_to((x,)), b.time_to((x,))), rel=1e-12
        )


def test_monotone_sublevel_sets():
    box = Box.centered((0, 0), 8)
    field = EdgeWeightField(SeedSpec(4))
    pf = passage_times(field, {(0, 0)}, box)
    s1 = richardson_from_fpp(pf, 1.0)
    s2 = richardson_from_fpp(pf, 2.0)
    assert (0, 0) in s1
    assert s1 <= s2


def test_sublevel_boundary_guard():
    box = Box.centered((0, 0), 3)
    field = EdgeWeightField(SeedSpec(4))
    pf = passage_times(field, {(0, 0)}, box)
    with pytest.raises(ValueError):
        richardson_from_fpp(pf, 50.0)


def test_duality_is_bit_exact():
    box = Box.centered((0, 0), 6)
    gen = np.random.default_rng(0)
    field = EdgeWeightField(SeedSpec(12))
    for _ in range(10):
        pts = {tuple(p) for p in gen.integers(-6, 7, size=(6, 2))}
        pts = sorted(pts)
        f, g = set(pts[:2]), set(pts[2:4])
        if not f or not g or f & g:
            continue
        t_fg, t_gf = duality_check(field, f, g, box)
        assert t_fg == t_gf  # exact float equality


def test_duality_rejects_overlapping_sets():
    field = EdgeWeightField(SeedSpec(0))
    with pytest.raises(ValueError):
        duality_check(field, {(0, 0)}, {(0, 0)}, Box.centered((0, 0), 3))


def test_kesten_tail_decreases_in_s():
    def field_for(rep):
        return EdgeWeightField(SeedSpec(100).child(rep))

    rows, fits = kesten_experiment(
        field_for, (1, 0), [10], [0.0, 0.5, 1.0, 2.0], reps=60, mu_hat=0.42
    )
    freqs = [f for (_, _, f, _) in rows]
    assert freqs[0] == 1.0  # |deviation| > 0 almost surely
    assert all(a >= b for a, b in zip(freqs, freqs[1:]))
    assert 10 in fits
