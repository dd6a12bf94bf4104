import numpy as np
import pytest

from competition_lab.dual import dual_hit_prob, invasion_experiment, walk_endpoints
from competition_lab.engines import run_voter
from competition_lab.geometry import GeometryConfigError
from competition_lab.random_media import SeedSpec


def test_walk_endpoint_moments():
    """Rate-2d walk: each coordinate has mean 0 and variance 2t."""
    t, reps = 3.0, 40000
    shape = (101, 101)  # large enough that wrapping is negligible
    pos, njumps = walk_endpoints((50, 50), shape, t, reps, SeedSpec(1))
    disp = pos.astype(np.float64) - 50.0
    assert abs(njumps.mean() - 4 * t) < 4 * np.sqrt(4 * t / reps)
    for k in range(2):
        assert abs(disp[:, k].mean()) < 4 * np.sqrt(2 * t / reps)
        assert abs(disp[:, k].var() - 2 * t) < 4 * 2 * t * np.sqrt(3.0 / reps)


def test_walks_reproduce():
    a, _ = walk_endpoints((0, 0), (9, 9), 1.0, 100, SeedSpec(3))
    b, _ = walk_endpoints((0, 0), (9, 9), 1.0, 100, SeedSpec(3))
    assert np.array_equal(a, b)


def test_dual_matches_voter_marginal():
    """P{site x is blue at t} from the engine vs the dual walk, one site."""
    torus = (4, 4)
    blue0 = [(0, 0), (1, 1), (2, 3), (3, 0), (0, 2), (2, 1)]
    red0 = [s for s in np.ndindex(*torus) if tuple(s) not in blue0]
    t, reps = 0.5, 20000
    x = (1, 2)
    hits = 0
    for rep in range(reps):
        rec = run_voter(red0, torus, t, SeedSpec(7).child(rep))
        hits += x in rec.blue_sites()
    p_engine = hits / reps
    p_dual, se_dual = dual_hit_prob(x, t, blue0, torus, reps, SeedSpec(8))
    se_engine = np.sqrt(p_engine * (1 - p_engine) / reps)
    z = abs(p_engine - p_dual) / np.sqrt(se_engine**2 + se_dual**2)
    assert z < 4


def test_invasion_probability_decays_with_rho():
    rows, fit = invasion_experiment(
        [8.0, 20.0, 45.0], beta=0.7, t_fractions=[0.5, 1.0], reps=4000,
        seed=SeedSpec(5),
    )
    worst = {}
    for r in rows:
        worst[r.rho] = max(worst.get(r.rho, 0.0), r.prob)
    probs = [worst[r] for r in sorted(worst)]
    assert probs[0] > probs[-1]
    assert fit is not None and fit > 0


def test_invasion_requires_valid_beta():
    with pytest.raises(GeometryConfigError):
        invasion_experiment([10.0], beta=0.4, t_fractions=[1.0], reps=10, seed=SeedSpec(0))
