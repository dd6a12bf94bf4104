import numpy as np
import pytest

from competition_lab import kernels
from competition_lab._kernel_py import KernelState, advance as py_advance
from competition_lab.engines import make_kernel_state, run_competition
from competition_lab.kernels import (
    BLUE,
    EMPTY,
    HAVE_SPEEDUPS,
    MODE_ABORT,
    MODE_CLOSED,
    MODE_WRAP,
    MODEL_COMPETITION,
    MODEL_RICHARDSON,
    MODEL_VOTER,
    REASON_ABSORBED,
    RED,
)
from competition_lab.random_media import Box, SeedSpec

pytestmark = []

BOTH_IMPLS = ["python", "compiled"] if HAVE_SPEEDUPS else ["python"]


def fresh_state(model, mode, seed=0, half=12):
    box = Box.centered((0, 0), half)
    if model == MODEL_VOTER:
        state = np.full(box.nsites, BLUE, dtype=np.int8)
        state[: box.nsites // 2] = RED
        return KernelState(box.shape, state, model, mode, SeedSpec(seed).generator()), box
    ks = make_kernel_state(box, [(0, 0)], [(1, 0)] if model == MODEL_COMPETITION else [], model, mode, SeedSpec(seed))
    return ks, box


@pytest.mark.parametrize("impl", BOTH_IMPLS)
@pytest.mark.parametrize("model", [MODEL_RICHARDSON, MODEL_COMPETITION, MODEL_VOTER])
def test_registry_matches_rescan_after_run(impl, model):
    adv = kernels.get_advance(impl)
    mode = MODE_WRAP if model == MODEL_VOTER else MODE_CLOSED
    ks, _ = fresh_state(model, mode, seed=3)
    adv(ks, 4.0)
    assert ks.active_edge_set() == ks.rescan_active_edges()


@pytest.mark.skipif(not HAVE_SPEEDUPS, reason="compiled extension not built")
@pytest.mark.parametrize("model", [MODEL_RICHARDSON, MODEL_COMPETITION, MODEL_VOTER])
def test_compiled_matches_python_bitwise(model):
    mode = MODE_WRAP if model == MODEL_VOTER else MODE_CLOSED
    results = []
    for impl in ("python", "compiled"):
        adv = kernels.get_advance(impl)
        ks, _ = fresh_state(model, mode, seed=7)
        reason, events = adv(ks, 3.0, False, True)
        results.append((reason, events, ks.state.copy(), ks.t, ks.n_events))
    (r1, e1, s1, t1, n1), (r2, e2, s2, t2, n2) = results
    assert r1 == r2 and t1 == t2 and n1 == n2
    assert np.array_equal(s1, s2)
    for a, b in zip(e1, e2):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("impl", BOTH_IMPLS)
def test_no_resurrection_and_no_spontaneous_birth(impl):
    adv = kernels.get_advance(impl)
    ks, _ = fresh_state(MODEL_COMPETITION, MODE_CLOSED, seed=5)
    _, events = adv(ks, 5.0, False, True)
    _, _, _, old, new = events
    assert np.all(new != EMPTY)  # occupied sites never empty out
    # richardson never overwrites occupied sites
    ks, _ = fresh_state(MODEL_RICHARDSON, MODE_CLOSED, seed=5)
    _, events = adv(ks, 5.0, False, True)
    assert np.all(events[3] == EMPTY)


@pytest.mark.parametrize("impl", BOTH_IMPLS)
def test_voter_conserves_occupancy(impl):
    adv = kernels.get_advance(impl)
    ks, box = fresh_state(MODEL_VOTER, MODE_WRAP, seed=2, half=4)
    n0 = int(ks.counts[RED] + ks.counts[BLUE])
    adv(ks, 2.0)
    assert int(ks.counts[EMPTY]) == 0
    assert int(ks.counts[RED] + ks.counts[BLUE]) == n0 == box.nsites


@pytest.mark.parametrize("impl", BOTH_IMPLS)
def test_event_times_strictly_increase(impl):
    adv = kernels.get_advance(impl)
    ks, _ = fresh_state(MODEL_COMPETITION, MODE_CLOSED, seed=9)
    _, events = adv(ks, 4.0, False, True)
    times = events[0]
    assert np.all(np.diff(times) > 0)
    assert times[-1] <= 4.0


@pytest.mark.parametrize("impl", BOTH_IMPLS)
def test_boundary_abort(impl):
    rec = run_competition(
        [(0, 0)], [(1, 0)], 1000.0, SeedSpec(1), box=Box.centered((0, 0), 6),
        impl=impl,
    )
    assert rec.stop_reason == "boundary"
    assert rec.t_end < 1000.0


@pytest.mark.parametrize("impl", BOTH_IMPLS)
def test_voter_absorbs_at_consensus(impl):
    adv = kernels.get_advance(impl)
    box = Box((0,), (3,))
    state = np.array([RED, BLUE, BLUE, BLUE], dtype=np.int8)
    ks = KernelState(box.shape, state, MODEL_VOTER, MODE_WRAP, SeedSpec(3).generator())
    reason, _ = adv(ks, 1e9)
    assert reason == REASON_ABSORBED
    assert int(ks.counts[RED]) in (0, 4)
    winner = RED if ks.counts[RED] == 4 else BLUE
    loser = BLUE if winner == RED else RED
    assert not np.isnan(ks.ext_time[loser])


@pytest.mark.parametrize("impl", BOTH_IMPLS)
def test_same_seed_reproduces(impl):
    adv = kernels.get_advance(impl)
    runs = []
    for _ in range(2):
        ks, _ = fresh_state(MODEL_COMPETITION, MODE_CLOSED, seed=11)
        adv(ks, 3.0)
        runs.append((ks.t, ks.n_events, ks.state.copy()))
    assert runs[0][0] == runs[1][0]
    assert runs[0][1] == runs[1][1]
    assert np.array_equal(runs[0][2], runs[1][2])


def test_get_advance_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.get_advance("fortran")


def test_mode_wrap_has_no_boundary_abort():
    rec = run_competition(
        [(0, 0)], [(1, 0)], 3.0, SeedSpec(1), box=Box.centered((0, 0), 4),
        mode=MODE_WRAP,
    )
    assert rec.stop_reason in ("time", "absorbed")
