import math

import numpy as np
import pytest

from competition_lab import analytics
from competition_lab.analytics import (
    coexistence_batch,
    curvature_probe,
    estimate_shape,
    nested_sector_monitor,
    oned_interface_stats,
    sector_decomposition,
    stabilization_experiment,
    _clopper_pearson,
)
from competition_lab.engines import run_competition
from competition_lab.geometry import GeometryConfigError, Norm
from competition_lab.random_media import Box, SeedSpec


@pytest.fixture(scope="module")
def small_shape():
    return estimate_shape(
        [20.0, 40.0], reps=6, seed=SeedSpec(11), n_directions=64, fpp_check_n=32
    )


def test_clopper_pearson_bounds():
    lo, hi = _clopper_pearson(0, 50)
    assert lo == 0.0 and 0 < hi < 0.1
    lo, hi = _clopper_pearson(50, 50)
    assert 0.9 < lo < 1 and hi == 1.0
    lo, hi = _clopper_pearson(25, 50)
    assert lo < 0.5 < hi


class TestShape:
    def test_speeds_plausible(self, small_shape):
        for est in small_shape.values():
            assert 1.8 < est.axis_speed() < 2.8
            assert est.dropped == 0
            assert est.per_rep_speeds.shape == (6, 64)

    def test_asymmetry_shrinks_with_time(self, small_shape):
        # not monotone in general, just sane magnitudes
        for est in small_shape.values():
            assert est.raw_asymmetry() < 0.5

    def test_norm_export_is_dihedral_symmetric(self, small_shape):
        nu = small_shape[40.0].to_norm()
        r = np.asarray(nu.radii)
        m = len(r)
        k = np.arange(m)
        assert np.allclose(r, r[(m - k) % m], atol=1e-9)  # x-axis reflection
        assert np.allclose(r, r[(m // 4 - k) % m], atol=1e-9)  # diagonal swap

    def test_fpp_cross_check_present(self, small_shape):
        chk = small_shape[20.0].fpp_speed_check
        assert set(chk) == {"axis", "diagonal"}
        assert all(1.5 < v < 3.0 for v in chk.values())

    def test_sandwich_fraction_high_at_later_time(self, small_shape):
        assert small_shape[40.0].sandwich_fraction(0.25) >= 0.5


class TestCurvature:
    def test_euclidean_disk(self):
        rep = curvature_probe(Norm("L2"), boundary_samples=256, pair_samples=3000,
                              seed=SeedSpec(1))
        assert rep.rho_hat == pytest.approx(1.0, rel=0.02)
        assert rep.uniformly_curved
        assert rep.c_hat is not None and rep.c_hat > 0

    @pytest.mark.parametrize("kind", ["Linf", "L1"])
    def test_polytopes_flagged_flat(self, kind):
        rep = curvature_probe(Norm(kind), boundary_samples=128, pair_samples=0)
        assert not rep.uniformly_curved
        assert rep.flat_points
        assert math.isinf(rep.rho_hat)


class TestSectorDecomposition:
    def run_two_color(self):
        return run_competition(
            [(-1, 0)], [(1, 0)], 25.0, SeedSpec(100), box=Box.centered((0, 0), 90)
        )

    def test_arcs_partition_circle(self):
        dec = sector_decomposition(self.run_two_color(), n_bins=64)
        total = 0.0
        for a in dec.arcs:
            length = (a.end_angle - a.start_angle) % (2 * np.pi)
            total += length if length else 2 * np.pi
        assert total == pytest.approx(2 * np.pi, abs=1e-9)

    def test_adjacent_arcs_alternate_colors(self):
        dec = sector_decomposition(self.run_two_color(), n_bins=64)
        if len(dec.arcs) > 1:
            for a, b in zip(dec.arcs, dec.arcs[1:]):
                assert a.color != b.color


class TestStabilization:
    def test_small_run_counts_consistent(self, small_shape):
        nu = small_shape[40.0].to_norm()
        out = stabilization_experiment(
            [30], 0.5, 0.6, 0.85, 0.9, reps=4, seed=SeedSpec(2), nu=nu
        )[0]
        assert out.reps == 4
        assert len(out.per_rep) == 4
        assert out.fail_b1 == sum(1 for r in out.per_rep if r[2])
        assert 0 <= out.fail_b1_freq <= 1
        lo, hi = out.fail_b1_ci()
        assert 0 <= lo <= out.fail_b1_freq <= hi <= 1

    def test_degenerate_parameters_rejected(self):
        with pytest.raises(GeometryConfigError):
            stabilization_experiment(
                [5], 0.5, 0.6, 0.85, 0.9, reps=1, seed=SeedSpec(0), nu=Norm("Linf")
            )


class TestNested:
    def test_stage_radii_recursion(self, small_shape):
        nu = small_shape[40.0].to_norm()
        tr = nested_sector_monitor(
            T0=12.0, delta=0.4, beta=0.6, alpha=0.85, t_max=40.0,
            seed=SeedSpec(3), nu=nu,
        )
        assert tr.stages
        for s in tr.stages:
            assert s.r1 == pytest.approx(s.r2 - s.T_n ** (0.85 - 1))
        for a, b in zip(tr.stages, tr.stages[1:]):
            assert b.r2 == pytest.approx(a.r1)
            assert b.T_n == pytest.approx(a.T_n * 1.4)

    def test_constraints_enforced(self):
        with pytest.raises(GeometryConfigError):
            nested_sector_monitor(10.0, 0.4, 0.6, 0.7, 20.0, SeedSpec(0), Norm("L2"))


class TestCoexistence:
    def test_batch_bookkeeping(self):
        summ = coexistence_batch(
            [(0, 0)], [(1, 0)], 15.0, reps=25, seed=SeedSpec(4), t_grid=[5.0, 15.0]
        )
        assert summ.valid <= summ.reps
        assert summ.both_alive == summ.censored
        assert summ.both_alive + len(summ.red_extinction_times) + len(
            summ.blue_extinction_times
        ) == summ.valid
        assert summ.both_alive_by_t[5.0] >= summ.both_alive_by_t[15.0]
        assert len(summ.per_rep) == 25

    def test_empty_init_rejected(self):
        with pytest.raises(ValueError):
            coexistence_batch([], [(0, 0)], 1.0, reps=1, seed=SeedSpec(0))


def test_oned_stats_drift_and_variance():
    st = oned_interface_stats(
        [10.0, 20.0], reps=120, seed=SeedSpec(5), red_len=15, blue_len=15
    )
    assert st.mean_x_over_t[-1] == pytest.approx(-1.0, abs=0.15)
    assert st.mean_y_over_t[-1] == pytest.approx(1.0, abs=0.15)
    assert st.var_z_over_2t[-1] == pytest.approx(1.0, abs=0.35)
    assert all(0 <= a <= 1 for a in st.alive_fraction)
    assert len(st.per_rep) == 120


def test_growth_speed_constant_reflects_measurement():
    # guards against accidentally reverting to a too-small default box factor
    assert analytics.GROWTH_SPEED_FACTOR >= 2.5
