"""The experiments: shape estimation, curvature probing, sector decomposition,
the annular-sector stabilization experiment, the nested-sector monitor,
coexistence batches, and 1D interface statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from . import geometry as geo
from . import engines
from .engines import BLUE, RED, RunRecord, default_box, run_competition, run_richardson
from .fpp import passage_times
from .geometry import AngularSector, GeometryConfigError, Norm, norm_eval
from .parallel import map_replicates
from .random_media import Box, EdgeWeightField, SeedSpec

# Measured d=2 axis growth speed is ~2.5 sites per unit time; boxes for long
# growth runs are sized with this factor so replicates do not hit the wall.
GROWTH_SPEED_FACTOR = 2.8


def _clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple:
    if n == 0:
        return (0.0, 1.0)
    a = (1 - level) / 2
    lo = 0.0 if k == 0 else float(beta_dist.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(beta_dist.ppf(1 - a, k + 1, n - k))
    return lo, hi


# ---------------------------------------------------------------------------
# shape estimation


@dataclass
class ShapeEstimate:
    """Empirical radial description of the growth limit shape."""

    t: float
    angles: np.ndarray  # (m,)
    speeds: np.ndarray  # (m,) mean radius/t per direction
    stderr: np.ndarray  # (m,)
    per_rep_speeds: np.ndarray  # (reps, m)
    reps_used: int
    dropped: int
    fpp_speed_check: dict | None = None

    def raw_asymmetry(self) -> float:
        """Max relative spread of the (pre-symmetrization) mean radii over the
        dihedral images of each direction."""
        m = len(self.angles)
        pts = np.stack(
            [np.cos(self.angles) * self.speeds, np.sin(self.angles) * self.speeds],
            axis=-1,
        )
        worst = 0.0
        for img in geo._dihedral_images_2d(pts):
            theta = np.mod(np.arctan2(img[:, 1], img[:, 0]), 2 * np.pi)
            k = np.rint(theta * m / (2 * np.pi)).astype(int) % m
            rel = np.abs(np.sqrt((img * img).sum(axis=-1)) - self.speeds[k]) / self.speeds[k]
            worst = max(worst, float(rel.max()))
        return worst

    def to_norm(self, convexify: bool = True) -> Norm:
        return geo.empirical_norm_2d(self.angles, self.speeds, symmetrize=True, convexify=convexify)

    def axis_speed(self) -> float:
        return float(self.speeds[np.argmin(np.abs(self.angles))])

    def sandwich_fraction(self, eps: float = 0.1) -> float:
        """Fraction of replicates with all directional radii inside
        [(1-eps), (1+eps)] times the symmetrized estimate."""
        m = len(self.angles)
        sym = self.to_norm(convexify=False)
        ref = sym._radius_at_angle(self.angles)
        ok = np.all(
            (self.per_rep_speeds >= (1 - eps) * ref[None, :])
            & (self.per_rep_speeds <= (1 + eps) * ref[None, :]),
            axis=1,
        )
        return float(np.mean(ok)) if len(ok) else 0.0


def _directional_radii(occupied: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Max fattened radial extent of the occupied set per direction bin."""
    m = len(angles)
    pts = occupied.astype(np.float64)
    r = np.sqrt((pts * pts).sum(axis=1))
    nz = r > 0
    pts, r = pts[nz], r[nz]
    theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
    k = np.rint(theta * m / (2 * np.pi)).astype(int) % m
    out = np.zeros(m)
    np.maximum.at(out, k, r)
    if np.any(out == 0):
        raise GeometryConfigError(
            "empty direction bin; use fewer directions or a larger time"
        )
    # extension of the unit cube around a radially positioned site
    out += 0.5 * (np.abs(np.cos(angles)) + np.abs(np.sin(angles)))
    return out


def _shape_replicate(rep: int, t_values, n_directions, seed, box_half):
    seed_r = seed.child("shape", rep)
    box = Box.centered((0, 0), box_half)
    angles = 2 * np.pi * np.arange(n_directions) / n_directions
    radii_at = {}

    def cb(tt, ks):
        occ = np.nonzero(ks.state)[0]
        coords = engines._coords_from_linear(box, occ)
        radii_at[tt] = _directional_radii(coords, angles)

    rec = run_richardson(
        {(0, 0)},
        t_values[-1],
        seed_r,
        box=box,
        checkpoints=list(t_values[:-1]),
        on_checkpoint=cb,
    )
    if not rec.valid:
        return None
    radii_at[float(t_values[-1])] = _directional_radii(rec.occupied, angles)
    return radii_at


def estimate_shape(
    t_values,
    reps: int,
    seed: SeedSpec,
    n_directions: int = 256,
    workers: int | None = None,
    speed_factor: float = GROWTH_SPEED_FACTOR,
    fpp_check_n: int | None = 64,
) -> dict:
    """Estimate the growth shape at each time in t_values from shared replicates.

    Returns {t: ShapeEstimate}. Runs the growth model from a single origin
    site; boundary-hitting replicates are dropped and counted. The FPP
    cross-check reports the axis and diagonal speeds implied by point-to-point
    passage times on an independent weight field.
    """
    t_values = sorted(float(t) for t in t_values)
    box_half = int(math.ceil(speed_factor * t_values[-1])) + 8
    angles = 2 * np.pi * np.arange(n_directions) / n_directions
    results = map_replicates(
        _shape_replicate,
        reps,
        workers,
        t_values=t_values,
        n_directions=n_directions,
        seed=seed,
        box_half=box_half,
    )
    fpp_check = None
    if fpp_check_n:
        fpp_check = {}
        fld = EdgeWeightField(seed.child("shape-fpp"))
        for name, u in (("axis", (1, 0)), ("diagonal", (1, 1))):
            target = tuple(fpp_check_n * c for c in u)
            box = Box(
                tuple(min(0, c) - 8 for c in target),
                tuple(max(0, c) + 8 for c in target),
            )
            pf = passage_times(fld, {(0, 0)}, box)
            tt = pf.time_to(target)
            fpp_check[name] = float(np.sqrt(sum(c * c for c in target)) / tt)
    out = {}
    for tv in t_values:
        radii = np.array([r[tv] for r in results if r is not None])
        dropped = sum(1 for r in results if r is None)
        if len(radii) == 0:
            raise RuntimeError("all replicates hit the box boundary")
        speeds = radii / tv
        out[tv] = ShapeEstimate(
            t=tv,
            angles=angles,
            speeds=speeds.mean(axis=0),
            stderr=speeds.std(axis=0, ddof=1) / math.sqrt(len(speeds))
            if len(speeds) > 1
            else np.zeros(n_directions),
            per_rep_speeds=speeds,
            reps_used=len(speeds),
            dropped=dropped,
            fpp_speed_check=fpp_check,
        )
    return out


# ---------------------------------------------------------------------------
# curvature probe


@dataclass
class CurvatureReport:
    rho_hat: float  # sup over boundary points of the minimal enclosing-ball radius
    per_point_radius: np.ndarray
    flat_points: list  # boundary angles where no finite ball exists
    c_hat: float | None  # empirical infimum of the quadratic-gap ratio
    c_hat_triple: tuple | None  # (x, y, ratio) attaining the infimum
    n_pairs: int = 0

    @property
    def uniformly_curved(self) -> bool:
        return not self.flat_points and math.isfinite(self.rho_hat)


def boundary_polygon(nu: Norm, samples: int = 512) -> np.ndarray:
    """Counterclockwise polygon approximating the unit-ball boundary of nu."""
    theta = 2 * np.pi * np.arange(samples) / samples
    units = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    r = np.atleast_1d(norm_eval(nu, units))
    return units / r[:, None]


def curvature_probe(
    nu: Norm,
    boundary_samples: int = 512,
    pair_samples: int = 20000,
    seed: SeedSpec | None = None,
) -> CurvatureReport:
    """Probe uniform curvature of the unit ball of nu (d=2).

    For each boundary point, the smallest ball through it (centered on the
    inward normal) containing the whole polygon has radius
    max_w ||w||^2 / (-2 w.n); a non-negative w.n with ||w|| > 0 means a flat
    or concave stretch, reported as an infinite radius. Also samples the
    quadratic-gap inequality |x-y| >= |x-pi x| + c |pi x - y|^2 and reports
    the empirical infimum of the ratio.
    """
    verts = boundary_polygon(nu, boundary_samples)
    m = len(verts)
    e_prev = verts - np.roll(verts, 1, axis=0)
    e_next = np.roll(verts, -1, axis=0) - verts
    raw_n = np.stack(
        [e_prev[:, 1] + e_next[:, 1], -(e_prev[:, 0] + e_next[:, 0])], axis=-1
    )
    normals = raw_n / np.sqrt((raw_n * raw_n).sum(axis=1))[:, None]

    radii = np.empty(m)
    flat = []
    theta = 2 * np.pi * np.arange(m) / m
    for i in range(m):
        w = verts - verts[i]
        wn = w @ normals[i]
        wsq = (w * w).sum(axis=1)
        mask = wsq > 1e-20
        bad = mask & (wn >= -1e-12)
        if np.any(bad):
            radii[i] = np.inf
            flat.append(float(theta[i]))
            continue
        radii[i] = float(np.max(wsq[mask] / (-2.0 * wn[mask])))
    rho_hat = float(np.max(radii))

    c_hat = None
    triple = None
    n_pairs = 0
    if pair_samples:
        gen = (seed or SeedSpec(0)).child("curvature").generator()
        ang = gen.random(pair_samples * 2) * 2 * np.pi
        xs = np.stack([np.cos(ang[:pair_samples]), np.sin(ang[:pair_samples])], axis=-1)
        ys = np.stack([np.cos(ang[pair_samples:]), np.sin(ang[pair_samples:])], axis=-1)
        rx = np.atleast_1d(norm_eval(nu, xs))
        ry = np.atleast_1d(norm_eval(nu, ys))
        gx = 1.0 + 2.0 * gen.random(pair_samples)  # |x| in (1, 3)
        gy = gen.random(pair_samples)  # |y| in [0, 1)
        X = xs / rx[:, None] * gx[:, None]
        Y = ys / ry[:, None] * gy[:, None]
        PX = xs / rx[:, None]
        num = np.atleast_1d(norm_eval(nu, X - Y)) - (gx - 1.0)
        den = np.atleast_1d(norm_eval(nu, PX - Y)) ** 2
        ok = den > 1e-12
        n_pairs = int(ok.sum())
        ratios = num[ok] / den[ok]
        i = int(np.argmin(ratios))
        c_hat = float(ratios[i])
        triple = (
            tuple(X[ok][i]),
            tuple(Y[ok][i]),
            c_hat,
        )
    return CurvatureReport(
        rho_hat=rho_hat,
        per_point_radius=radii,
        flat_points=flat,
        c_hat=c_hat,
        c_hat_triple=triple,
        n_pairs=n_pairs,
    )


# ---------------------------------------------------------------------------
# sector decomposition


@dataclass
class SectorArc:
    start_angle: float
    end_angle: float
    color: int
    site_count: int


@dataclass
class SectorDecomposition:
    arcs: list
    interface_count: int
    band: float
    n_bins: int


def sector_decomposition(
    record: RunRecord,
    nu: Norm | None = None,
    n_bins: int = 256,
    band: float = 0.1,
) -> SectorDecomposition:
    """Maximal monochromatic angular arcs of the outer occupied layer (d=2).

    The outer layer is the set of occupied sites whose norm radius is within
    `band` (relative) of the maximum in their angular bin; each bin takes its
    majority color and adjacent same-color bins merge into arcs.
    """
    pts = record.occupied.astype(np.float64)
    r = np.atleast_1d(norm_eval(nu or Norm("L2"), pts))
    nz = r > 0
    pts_nz, r_nz, col = pts[nz], r[nz], record.colors[nz]
    theta = np.mod(np.arctan2(pts_nz[:, 1], pts_nz[:, 0]), 2 * np.pi)
    k = np.floor(theta * n_bins / (2 * np.pi)).astype(int) % n_bins
    rmax = np.zeros(n_bins)
    np.maximum.at(rmax, k, r_nz)
    if np.any(rmax == 0):
        raise GeometryConfigError(
            "empty angular bin in the outer layer; widen the band or use fewer bins"
        )
    in_layer = r_nz >= (1 - band) * rmax[k]
    red_ct = np.zeros(n_bins, dtype=np.int64)
    blue_ct = np.zeros(n_bins, dtype=np.int64)
    np.add.at(red_ct, k[in_layer & (col == RED)], 1)
    np.add.at(blue_ct, k[in_layer & (col == BLUE)], 1)
    bin_color = np.where(red_ct >= blue_ct, RED, BLUE)
    counts = red_ct + blue_ct

    # merge circularly
    width = 2 * np.pi / n_bins
    if np.all(bin_color == bin_color[0]):
        arcs = [SectorArc(0.0, 2 * np.pi, int(bin_color[0]), int(counts.sum()))]
        return SectorDecomposition(arcs, 0, band, n_bins)
    # rotate so a color change is at position 0
    changes = np.nonzero(bin_color != np.roll(bin_color, 1))[0]
    start = int(changes[0])
    order = np.r_[start:n_bins, 0:start]
    arcs = []
    cur_color = int(bin_color[order[0]])
    cur_start = start
    cur_count = 0
    cur_len = 0
    for idx in order:
        c = int(bin_color[idx])
        if c != cur_color:
            arcs.append(
                SectorArc(
                    cur_start * width,
                    ((cur_start + cur_len) % n_bins) * width,
                    cur_color,
                    cur_count,
                )
            )
            cur_color = c
            cur_start = idx
            cur_count = 0
            cur_len = 0
        cur_count += int(counts[idx])
        cur_len += 1
    arcs.append(
        SectorArc(
            cur_start * width,
            ((cur_start + cur_len) % n_bins) * width,
            cur_color,
            cur_count,
        )
    )
    return SectorDecomposition(arcs, len(arcs), band, n_bins)


# ---------------------------------------------------------------------------
# stabilization experiment


@dataclass
class StabilizationOutcome:
    n: int
    delta: float
    beta: float
    alpha: float
    a1_aperture: float
    a2_aperture: float
    reps: int
    fail_b1: int  # B(delta n) not contained in B1
    fail_reach_r1: int  # B(delta n) touches R1
    fail_escape: int  # B(delta n) leaves R1 union B1
    invalid: int  # boundary-abort replicates (excluded from counts)
    per_rep: list = field(default_factory=list)  # (rep, valid, fail_b1, reach_r1, escape)

    @property
    def fail_b1_freq(self) -> float:
        return self.fail_b1 / max(1, self.reps - self.invalid)

    def fail_b1_ci(self, level: float = 0.95) -> tuple:
        return _clopper_pearson(self.fail_b1, self.reps - self.invalid, level)


def _stab_replicate(rep, r0, b0, t_run, seed, box_half, impl):
    rec = run_competition(
        [tuple(s) for s in r0],
        [tuple(s) for s in b0],
        t_run,
        seed.child("stab", rep),
        box=Box.centered((0, 0), box_half),
        impl=impl,
    )
    if not rec.valid:
        return None
    return rec.occupied[rec.colors == BLUE]


def stabilization_experiment(
    n_values,
    delta: float,
    beta: float,
    alpha: float,
    a2_aperture: float,
    reps: int,
    seed: SeedSpec,
    nu: Norm | None = None,
    workers: int | None = None,
    speed_factor: float = GROWTH_SPEED_FACTOR,
    impl: str = "auto",
) -> list:
    """Run the annular-sector stabilization experiment for each n.

    Initializes red on R0 and blue on B0, runs to time delta*n, and counts the
    failures of blue containment in B1 (plus the two finer diagnostic events:
    blue reaching R1, and blue escaping R1 union B1). The t=0 geometric
    inclusions (R0 and B0 disjoint, B0 inside B1) are verified exactly before
    any dynamics.
    """
    nu = nu or Norm("Linf")
    center = tuple(geo.project(nu, np.array([1.0, 0.0])))
    out = []
    for n in n_values:
        a2 = AngularSector(center, a2_aperture)
        sets = geo.build_stabilization_sets(n, delta, beta, alpha, a2, nu)
        # exact t=0 geometry checks
        s_r0 = {tuple(map(int, s)) for s in sets.r0}
        s_b0 = {tuple(map(int, s)) for s in sets.b0}
        if s_r0 & s_b0:
            raise GeometryConfigError("R0 and B0 intersect (geometry bug)")
        if not np.all(sets.b1.contains(sets.b0.astype(np.float64))):
            raise GeometryConfigError("B0 is not contained in B1 at t=0")
        t_run = delta * n
        extent = geo.lattice_extent(nu, n + float(n) ** beta)
        box_half = int(math.ceil(extent + speed_factor * t_run)) + 8
        blues = map_replicates(
            _stab_replicate,
            reps,
            workers,
            r0=sets.r0,
            b0=sets.b0,
            t_run=t_run,
            seed=seed.child("stabn", int(n)),
            box_half=box_half,
            impl=impl,
        )
        r1_out = n * (1 + delta) - (n + delta * n) ** beta

        def in_r1(pts):
            dd = np.atleast_1d(norm_eval(nu, pts))
            inside = (dd >= n) & (dd <= r1_out)
            if np.any(inside):
                inside[inside] &= geo.sector_contains(sets.a1, nu, pts[inside])
            return inside

        fail_b1 = fail_r1 = fail_escape = invalid = 0
        per_rep = []
        for rep, b in enumerate(blues):
            if b is None:
                invalid += 1
                per_rep.append((rep, False, False, False, False))
                continue
            pts = b.astype(np.float64)
            f_b1 = f_r1 = f_esc = False
            if len(pts):
                ok_b1 = sets.b1.contains(pts)
                if not np.all(ok_b1):
                    f_b1 = True
                    f_esc = bool(np.any(~ok_b1 & ~in_r1(pts)))
                f_r1 = bool(np.any(in_r1(pts)))
            fail_b1 += f_b1
            fail_r1 += f_r1
            fail_escape += f_esc
            per_rep.append((rep, True, f_b1, f_r1, f_esc))
        out.append(
            StabilizationOutcome(
                n=int(n),
                delta=delta,
                beta=beta,
                alpha=alpha,
                a1_aperture=sets.a1.aperture,
                a2_aperture=a2_aperture,
                reps=reps,
                fail_b1=fail_b1,
                fail_reach_r1=fail_r1,
                fail_escape=fail_escape,
                invalid=invalid,
                per_rep=per_rep,
            )
        )
    return out


# ---------------------------------------------------------------------------
# nested-sector monitor


@dataclass
class NestedStage:
    n: int
    T_n: float
    tau_n: float
    r1: float
    r2: float
    shape_sandwich: bool  # G_n
    sector_clear: bool  # H_n


@dataclass
class NestedSectorTrace:
    T0: float
    delta: float
    beta: float
    alpha: float
    stages: list
    first_failure: int | None
    aperture_exhausted: bool
    truncated: bool  # box exhausted before t_max

    @property
    def all_hold(self) -> bool:
        return self.first_failure is None and not self.truncated


def _shape_sandwich(occupied: np.ndarray, nu: Norm, scale: float, tol: float) -> bool:
    """Lattice-level shape sandwich: every site of norm <= (1-tol)*scale is
    occupied and every occupied site has norm <= (1+tol)*scale."""
    pts = occupied.astype(np.float64)
    if np.any(np.atleast_1d(norm_eval(nu, pts)) > (1 + tol) * scale):
        return False
    inner = geo.lattice_disk(nu, (0.0, 0.0), 0.0, (1 - tol) * scale)
    occ_set = {tuple(map(int, c)) for c in occupied}
    return all(tuple(map(int, s)) in occ_set for s in inner)


def nested_sector_monitor(
    T0: float,
    delta: float,
    beta: float,
    alpha: float,
    t_max: float,
    seed: SeedSpec,
    nu: Norm,
    speed_factor: float = GROWTH_SPEED_FACTOR,
    impl: str = "auto",
) -> NestedSectorTrace:
    """Track the nested-sector events along one competition run.

    The initial condition is a sliced growth shape: the growth model runs from
    two adjacent occupied sites (one at the origin) to time T0, the positive-
    first-coordinate half turns red, the rest blue. Stage n checks, at time
    tau_n = T_n - T0 with T_n = T0 (1+delta)^n, the shape sandwich with
    tolerance T_n^(beta-1) and that no blue site sits in the stage sector
    outside radius T_(n-1). Staging stops when the sector aperture is used up
    or t_max is passed.
    """
    if not (0.5 < beta < alpha < 1 and (beta + 1) / 2 < alpha):
        raise GeometryConfigError("need 1/2 < beta < (beta+1)/2 < alpha < 1")
    base = run_richardson(
        {(0, 0), (1, 0)},
        T0,
        seed.child("nested-init"),
        box=Box.centered((0, 0), int(math.ceil(speed_factor * T0)) + 8),
        impl=impl,
    )
    if not base.valid:
        raise RuntimeError("initial growth run hit its box")
    xi, zeta = geo.slice_richardson(map(tuple, base.occupied))
    if not xi or not zeta:
        raise RuntimeError("degenerate slice: one half is empty")

    center = tuple(geo.project(nu, np.array([1.0, 0.0])))
    # sites exactly on the slicing hyperplane project to the sup distance;
    # shave an epsilon so that float ties there don't count as sector members
    r2 = geo.halfspace_aperture(nu) * (1.0 - 1e-9)
    stages_meta = []
    n = 0
    aperture_exhausted = False
    while True:
        T_n = T0 * (1 + delta) ** n
        tau_n = T_n - T0
        if tau_n > t_max:
            break
        r1 = r2 - T_n ** (alpha - 1)
        if r1 <= 0:
            aperture_exhausted = True
            break
        stages_meta.append((n, T_n, tau_n, r1, r2))
        r2 = r1
        n += 1

    stages: list = []

    def evaluate(stage, occupied, colors):
        nn, T_n, tau_n, r1, r2_n = stage
        tol = T_n ** (beta - 1)
        g = _shape_sandwich(occupied, nu, T_n, tol)
        blue_pts = occupied[colors == BLUE].astype(np.float64)
        T_prev = T0 / (1 + delta) if nn == 0 else T0 * (1 + delta) ** (nn - 1)
        h = True
        if len(blue_pts):
            far = np.atleast_1d(norm_eval(nu, blue_pts)) > T_prev
            if np.any(far):
                sector = AngularSector(center, r2_n)
                h = not bool(np.any(geo.sector_contains(sector, nu, blue_pts[far])))
        stages.append(
            NestedStage(nn, float(T_n), float(tau_n), float(r1), float(r2_n), g, h)
        )

    if not stages_meta:
        return NestedSectorTrace(T0, delta, beta, alpha, [], None, aperture_exhausted, False)

    # stage 0 is evaluated on the initial configuration
    init_occ = base.occupied
    init_col = np.where(init_occ[:, 0] > 0, RED, BLUE).astype(np.int8)
    evaluate(stages_meta[0], init_occ, init_col)

    truncated = False
    later = stages_meta[1:]
    if later:
        t_last = later[-1][2]
        box_half = int(math.ceil(speed_factor * (T0 + t_last))) + 8
        idx = {round(s[2], 9): s for s in later}

        def cb(tt, ks):
            stage = idx.get(round(tt, 9))
            if stage is None:
                return
            box = Box.centered((0, 0), box_half)
            occ_lin = np.nonzero(ks.state)[0]
            coords = engines._coords_from_linear(box, occ_lin)
            evaluate(stage, coords, ks.state[occ_lin].copy())

        rec = run_competition(
            xi,
            zeta,
            t_last,
            seed.child("nested-run"),
            box=Box.centered((0, 0), box_half),
            checkpoints=[s[2] for s in later],
            on_checkpoint=cb,
            impl=impl,
        )
        truncated = not rec.valid

    first_failure = None
    for s in stages:
        if not (s.shape_sandwich and s.sector_clear):
            first_failure = s.n
            break
    return NestedSectorTrace(
        T0, delta, beta, alpha, stages, first_failure, aperture_exhausted, truncated
    )


# ---------------------------------------------------------------------------
# coexistence batch


@dataclass
class CoexistenceSummary:
    reps: int
    valid: int
    both_alive: int
    red_survives: int
    blue_survives: int
    both_alive_freq: float
    both_alive_ci: tuple
    red_extinction_times: list
    blue_extinction_times: list
    censored: int
    t_max: float
    both_alive_by_t: dict = field(default_factory=dict)
    per_rep: list = field(default_factory=list)  # (rep, stop_reason, ext_red, ext_blue)


def _coexist_replicate(rep, red0, blue0, t_max, seed, box_half, impl):
    d = len(red0[0])
    rec = run_competition(
        red0,
        blue0,
        t_max,
        seed.child("coexist", rep),
        box=Box.centered((0,) * d, box_half),
        stop_on_extinction=True,
        impl=impl,
    )
    return (
        rec.stop_reason,
        rec.extinction_time_red,
        rec.extinction_time_blue,
    )


def coexistence_batch(
    red0,
    blue0,
    t_max: float,
    reps: int,
    seed: SeedSpec,
    workers: int | None = None,
    speed_factor: float = GROWTH_SPEED_FACTOR,
    t_grid=None,
    impl: str = "auto",
) -> CoexistenceSummary:
    """Independent competition replicates; survival and extinction summary.

    Survival here means alive at t_max (a censored observation of true
    coexistence); replicates that hit the box wall are excluded and counted.
    """
    red0 = sorted(tuple(map(int, s)) for s in red0)
    blue0 = sorted(tuple(map(int, s)) for s in blue0)
    if not red0 or not blue0:
        raise ValueError("both colors need a nonempty initial set")
    pts = np.asarray(red0 + blue0, dtype=np.int64)
    extent = int(np.abs(pts).max())
    box_half = extent + int(math.ceil(speed_factor * t_max)) + 8
    results = map_replicates(
        _coexist_replicate,
        reps,
        workers,
        red0=red0,
        blue0=blue0,
        t_max=t_max,
        seed=seed,
        box_half=box_half,
        impl=impl,
    )
    valid = both = reds = blues = censored = 0
    red_ext, blue_ext = [], []
    tg = sorted(float(t) for t in (t_grid or []))
    alive_by_t = {t: 0 for t in tg}
    per_rep = [(i, r[0], r[1], r[2]) for i, r in enumerate(results)]
    for reason, ext_r, ext_b in results:
        if reason == "boundary":
            continue
        valid += 1
        if ext_r is None and ext_b is None:
            both += 1
            censored += 1
        if ext_r is None:
            reds += 1
        else:
            red_ext.append(ext_r)
        if ext_b is None:
            blues += 1
        else:
            blue_ext.append(ext_b)
        first_ext = min(
            [v for v in (ext_r, ext_b) if v is not None], default=math.inf
        )
        for t in tg:
            if first_ext > t:
                alive_by_t[t] += 1
    return CoexistenceSummary(
        reps=reps,
        valid=valid,
        both_alive=both,
        red_survives=reds,
        blue_survives=blues,
        both_alive_freq=both / max(1, valid),
        both_alive_ci=_clopper_pearson(both, valid),
        red_extinction_times=red_ext,
        blue_extinction_times=blue_ext,
        censored=censored,
        t_max=t_max,
        both_alive_by_t={t: c / max(1, valid) for t, c in alive_by_t.items()},
        per_rep=per_rep,
    )


# ---------------------------------------------------------------------------
# 1D interface statistics


@dataclass
class OneDStats:
    t_grid: list
    mean_x_over_t: list
    mean_y_over_t: list
    var_z: list  # among runs never exited by that time
    var_z_over_2t: list
    alive_fraction: list
    reps: int
    per_rep: list = field(default_factory=list)  # (rep, x, y, z, exited) at t_grid[-1]


def _oned_replicate(rep, red_len, blue_len, t_max, seed, box_half, t_grid, impl):
    red0 = {(-k,) for k in range(1, red_len + 1)}
    blue0 = {(k,) for k in range(blue_len)}
    rec = run_competition(
        red0,
        blue0,
        t_max,
        seed.child("oned", rep),
        box=Box.centered((0,), box_half),
        record_events=True,
        impl=impl,
    )
    times, _, dst, old, new = rec.events
    x_cur, y_cur, z_cur = -red_len, blue_len - 1, 0
    n_red, n_blue = red_len, blue_len
    out = []
    gi = 0
    exited = False

    def sample(upto):
        nonlocal gi
        while gi < len(t_grid) and t_grid[gi] <= upto:
            out.append((x_cur, y_cur, z_cur, exited, n_red > 0 and n_blue > 0))
            gi += 1

    for i in range(len(times)):
        sample(times[i] - 1e-15)
        y = int(dst[i][0])
        o, nw = int(old[i]), int(new[i])
        x_cur = min(x_cur, y)
        y_cur = max(y_cur, y)
        if o == 0:
            if nw == RED:
                n_red += 1
            else:
                n_blue += 1
        elif nw == RED and o == BLUE:
            n_red += 1
            n_blue -= 1
            z_cur = y + 1
        elif nw == BLUE and o == RED:
            n_red -= 1
            n_blue += 1
            z_cur = y
        if n_red == 0 or n_blue == 0:
            exited = True
    sample(t_max)
    return out


def oned_interface_stats(
    t_grid,
    reps: int,
    seed: SeedSpec,
    red_len: int = 1,
    blue_len: int = 1,
    workers: int | None = None,
    impl: str = "auto",
) -> OneDStats:
    """Track leftmost/rightmost occupied (X, Y) and the red-blue interface (Z)
    for the 1D competition model started from a red interval ending at -1 and
    a blue interval starting at 0.

    Reported X and Y rates are displacement rates (X_t - X_0)/t, so interval
    length does not bias the finite-time estimate of the limiting speeds."""
    t_grid = sorted(float(t) for t in t_grid)
    t_max = t_grid[-1]
    box_half = int(math.ceil(1.7 * t_max)) + max(red_len, blue_len) + 8
    rows = map_replicates(
        _oned_replicate,
        reps,
        workers,
        red_len=red_len,
        blue_len=blue_len,
        t_max=t_max,
        seed=seed,
        box_half=box_half,
        t_grid=t_grid,
        impl=impl,
    )
    mean_x, mean_y, var_z, var_ratio, alive = [], [], [], [], []
    x0, y0 = -red_len, blue_len - 1
    for gi, t in enumerate(t_grid):
        # displacement rates, so interval length does not bias the ratio
        xs = np.array([r[gi][0] - x0 for r in rows], dtype=np.float64)
        ys = np.array([r[gi][1] - y0 for r in rows], dtype=np.float64)
        zs = np.array([r[gi][2] for r in rows], dtype=np.float64)
        never_exited = np.array([not r[gi][3] for r in rows])
        alive_now = np.array([r[gi][4] for r in rows])
        mean_x.append(float(np.mean(xs / t)) if t > 0 else 0.0)
        mean_y.append(float(np.mean(ys / t)) if t > 0 else 0.0)
        v = float(np.var(zs[never_exited], ddof=1)) if never_exited.sum() > 1 else float("nan")
        var_z.append(v)
        var_ratio.append(v / (2 * t) if t > 0 else float("nan"))
        alive.append(float(np.mean(alive_now)))
    return OneDStats(
        t_grid=list(t_grid),
        mean_x_over_t=mean_x,
        mean_y_over_t=mean_y,
        var_z=var_z,
        var_z_over_2t=var_ratio,
        alive_fraction=alive,
        reps=reps,
        per_rep=[(i, *r[-1][:4]) for i, r in enumerate(rows)],
    )
