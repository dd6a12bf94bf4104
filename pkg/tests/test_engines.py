import numpy as np
import pytest

from competition_lab import engines
from competition_lab.engines import (
    BLUE,
    RED,
    default_box,
    detect_extinction,
    run_competition,
    run_coupled,
    run_richardson,
    run_voter,
)
from competition_lab.kernels import MODE_CLOSED
from competition_lab.random_media import Box, PercolationStructure, SeedSpec


def test_record_counts_match_sites():
    rec = run_competition([(0, 0)], [(1, 0)], 5.0, SeedSpec(0), box=Box.centered((0, 0), 25))
    assert rec.n_red == len(rec.red_sites())
    assert rec.n_blue == len(rec.blue_sites())
    assert rec.n_red + rec.n_blue == len(rec.occupied)
    assert rec.valid


def test_disjoint_initial_sets_required():
    with pytest.raises(ValueError):
        run_competition([(0, 0)], [(0, 0)], 1.0, SeedSpec(0))


def test_default_box_contains_growth_margin():
    box = default_box([(0, 0), (4, 0)], 10.0)
    assert box.contains((0, 0)) and box.contains((4, 0))
    assert box.shape[0] == box.shape[1]
    # documented sizing: extent + ceil(1.5 t) + margin on each side
    assert box.shape[0] >= 2 * 15 + 1


def test_checkpoints_fire_in_order():
    seen = []
    run_richardson(
        {(0, 0)},
        6.0,
        SeedSpec(4),
        box=Box.centered((0, 0), 30),
        checkpoints=[2.0, 4.0],
        on_checkpoint=lambda t, ks: seen.append(t),
    )
    assert seen == [2.0, 4.0]


def test_checkpoints_stop_when_boundary_hit():
    seen = []
    rec = run_richardson(
        {(0, 0)},
        50.0,
        SeedSpec(4),
        box=Box.centered((0, 0), 8),
        checkpoints=[1.0, 40.0],
        on_checkpoint=lambda t, ks: seen.append(t),
    )
    assert rec.stop_reason == "boundary"
    assert seen == [1.0]
    assert not rec.valid


def test_extinction_detection_and_stop():
    # massive red vs single blue: blue usually dies quickly
    red = [(x, y) for x in range(-3, 4) for y in range(-3, 4) if (x, y) != (0, 0)]
    for seed in range(10):
        rec = run_competition(
            red, [(0, 0)], 50.0, SeedSpec(seed), box=Box.centered((0, 0), 160),
            stop_on_extinction=True,
        )
        if rec.stop_reason == "extinction":
            assert rec.extinction_time_blue is not None
            assert detect_extinction(rec) == ("blue", rec.extinction_time_blue)
            return
    pytest.fail("blue never went extinct in 10 tries (wildly improbable)")


def test_one_dimensional_interval_structure():
    """In d=1 the occupied set stays an interval with red left of blue."""
    rec = run_competition(
        [(-1,)], [(0,)], 25.0, SeedSpec(3), box=Box.centered((0,), 120),
        record_events=True,
    )
    state = {-1: RED, 0: BLUE}
    times, _, dst, old, new = rec.events
    for i in range(len(times)):
        state[int(dst[i][0])] = int(new[i])
        occ = sorted(state)
        assert occ == list(range(occ[0], occ[-1] + 1))  # interval
        colors = [state[x] for x in occ]
        # no BLUE immediately left of RED anywhere
        assert all(
            not (a == BLUE and b == RED) for a, b in zip(colors, colors[1:])
        )


def test_voter_initial_complement():
    rec = run_voter([(0, 0)], (3, 3), 0.0, SeedSpec(0))
    assert rec.n_red == 1 and rec.n_blue == 8


class TestCoupled:
    def run_one(self, seed, **kwargs):
        box = Box.centered((0, 0), 7)
        ps = PercolationStructure(box, 3.0, SeedSpec(seed))
        return run_coupled(
            ps, [(0, 0)], [(1, 0)], [(0, 0)], [(0, 0), (1, 0)],
            mode=MODE_CLOSED, **kwargs,
        )

    def test_coupling_identity(self):
        for seed in range(5):
            cr = self.run_one(seed, check_coupling=True)
            assert cr.coupling_violations == []
            comp = set(map(tuple, cr.competition.occupied))
            rich = set(map(tuple, cr.richardson.occupied))
            assert comp == rich

    def test_voter_red_dominates_competition_red(self):
        for seed in range(5):
            cr = self.run_one(seed, check_voter_subset=True)
            assert cr.monotone_violations == []

    def test_richardson_monotone_in_initial_set(self):
        box = Box.centered((0, 0), 7)
        ps = PercolationStructure(box, 2.0, SeedSpec(9))
        small = run_coupled(ps, [(0, 0)], [], [(0, 0)], [(0, 0)], mode=MODE_CLOSED)
        big = run_coupled(
            ps, [(0, 0)], [], [(0, 0)], [(0, 0), (2, 2)], mode=MODE_CLOSED
        )
        s = set(map(tuple, small.richardson.occupied))
        b = set(map(tuple, big.richardson.occupied))
        assert s <= b


def test_snapshot_text_and_ppm():
    rec = run_competition([(0, 0)], [(1, 0)], 0.0, SeedSpec(0), box=Box.centered((0, 0), 2))
    grid = engines.state_grid(rec)
    txt = engines.snapshot_text(grid)
    assert txt.count("R") == 1 and txt.count("B") == 1
    ppm = engines.snapshot_ppm(grid)
    assert ppm.startswith(b"P6\n5 5\n255\n")
    assert len(ppm) == len(b"P6\n5 5\n255\n") + 75


def test_run_segments_merges_recorded_events():
    rec = run_richardson(
        {(0, 0)}, 4.0, SeedSpec(2), box=Box.centered((0, 0), 25),
        record_events=True, checkpoints=[1.0, 2.0],
    )
    times = rec.events[0]
    assert len(times) == rec.n_events
    assert np.all(np.diff(times) > 0)
