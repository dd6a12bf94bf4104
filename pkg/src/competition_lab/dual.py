"""Coalescing-random-walk dual of the voter model and the invasion-time
experiment.

Only the single-site marginal dual is needed: the probability that a site is
blue at time t equals the probability that a continuous-time simple random
walk started there lands in the initial blue set at time t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import GeometryConfigError, Norm, norm_eval
from .random_media import SeedSpec


def walk_endpoints(
    x, torus_shape, t: float, reps: int, seed: SeedSpec
) -> np.ndarray:
    """Endpoints of `reps` independent rate-2d simple random walks from x.

    Returns (reps, d) int coordinates on the torus. Jump counts are
    Poisson(2d*t); steps are uniform over the 2d directions.
    """
    d = len(torus_shape)
    gen = seed.generator()
    njumps = gen.poisson(2 * d * t, size=reps)
    total = int(njumps.sum())
    steps = gen.integers(0, 2 * d, size=total)
    axes = steps >> 1
    signs = np.where(steps & 1, 1, -1).astype(np.int64)
    disp = np.zeros((reps, d), dtype=np.int64)
    bounds = np.concatenate([[0], np.cumsum(njumps)])
    for k in range(d):
        contrib = np.where(axes == k, signs, 0)
        csum = np.concatenate([[0], np.cumsum(contrib)])
        disp[:, k] = csum[bounds[1:]] - csum[bounds[:-1]]
    pos = np.asarray(x, dtype=np.int64)[None, :] + disp
    return np.mod(pos, np.asarray(torus_shape, dtype=np.int64)[None, :]), njumps


def dual_hit_prob(
    x, t: float, blue0, torus_shape, reps: int, seed: SeedSpec
) -> tuple:
    """Monte Carlo estimate (p, stderr) of P{walk from x at time t is in blue0}.

    By duality this equals the voter-model marginal P{x in B(t)} for the
    initial coloring with blue exactly on blue0.
    """
    blue0 = {tuple(int(c) for c in s) for s in blue0}
    pos, _ = walk_endpoints(x, torus_shape, t, reps, seed)
    hits = np.fromiter(
        (tuple(map(int, p)) in blue0 for p in pos), dtype=bool, count=reps
    )
    p = float(hits.mean())
    return p, math.sqrt(p * (1 - p) / reps)


@dataclass
class InvasionRow:
    rho: float
    beta: float
    t: float
    prob: float
    stderr: float
    reps: int


def invasion_experiment(
    rho_grid,
    beta: float,
    t_fractions,
    reps: int,
    seed: SeedSpec,
    norm: Norm | None = None,
    margin_factor: float = 1.0,
) -> tuple:
    """Flip probabilities P{x not in R(t)} for R(0) = disk of radius rho^beta.

    Computed through the dual-walk identity rather than full voter runs: the
    center flips iff the dual walk exits the initial red disk. t_fractions are
    fractions of rho (the admissible window is t in [0, rho]). Returns the
    result rows and the fitted decay rate of max-over-t probability against
    rho^(beta - 1/2).
    """
    if not 0.5 < beta < 1:
        raise GeometryConfigError("beta must lie in (1/2, 1)")
    norm = norm or Norm("Linf")
    rows = []
    for rho in rho_grid:
        r_disk = float(rho) ** beta
        side = int(2 * math.ceil(r_disk + margin_factor * rho) + 3)
        shape = (side,) * 2
        center = (side // 2, side // 2)
        for frac in t_fractions:
            t = float(frac) * float(rho)
            pos, _ = walk_endpoints(center, shape, t, reps, seed.child("invasion", float(rho), float(frac)))
            disp = pos - np.asarray(center, dtype=np.int64)[None, :]
            # unwrap: margin >= rho keeps walks far from the seam
            half = side // 2
            disp = np.where(disp > half, disp - side, disp)
            disp = np.where(disp < -half, disp + side, disp)
            outside = norm_eval(norm, disp.astype(np.float64)) > r_disk
            p = float(np.mean(outside))
            rows.append(
                InvasionRow(float(rho), beta, t, p, math.sqrt(p * (1 - p) / reps), reps)
            )
    # fitted c2: max-over-t flip probability ~ c1 exp(-c2 rho^(beta-1/2))
    maxp = {}
    for r in rows:
        maxp[r.rho] = max(maxp.get(r.rho, 0.0), r.prob)
    pts = [(rho ** (beta - 0.5), p) for rho, p in sorted(maxp.items()) if p > 0]
    fit = None
    if len(pts) >= 2:
        xs = np.array([p[0] for p in pts])
        ys = np.log([p[1] for p in pts])
        fit = float(-np.polyfit(xs, ys, 1)[0])
    return rows, fit
