"""Lattice geometry: norms, sectors, annuli, fattening, and the special
initial-condition sets used by the stabilization experiments.

All geometry is parameterized by a pluggable norm. The gauge of the true
growth shape is unknown mathematically, so experiments either use a built-in
norm (L1/L2/Linf, exact and fast) or an empirical radial norm estimated from
simulation (see analytics.estimate_shape).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np


class GeometryConfigError(ValueError):
    """A geometric parameter constraint was violated."""


def neighbors(x: Sequence[int]) -> list:
    """The 2d nearest neighbors of x, ascending axis, minus before plus."""
    x = tuple(int(c) for c in x)
    out = []
    for axis in range(len(x)):
        for sign in (-1, 1):
            y = list(x)
            y[axis] += sign
            out.append(tuple(y))
    return out


# ---------------------------------------------------------------------------
# norms


def _dihedral_images_2d(points: np.ndarray) -> list:
    """The 8 images of (..., 2) points under coordinate swaps and sign flips."""
    x, y = points[..., 0], points[..., 1]
    combos = [(x, y), (-x, y), (x, -y), (-x, -y), (y, x), (-y, x), (y, -x), (-y, -x)]
    return [np.stack(c, axis=-1) for c in combos]


@dataclass(frozen=True)
class Norm:
    """A norm on R^d given either in closed form or by an empirical radial table.

    kind: "L1" | "L2" | "Linf" | "empirical".
    For the empirical kind in d=2, `angles` (sorted, in [0, 2pi)) and `radii`
    give the boundary of the unit ball; evaluation interpolates the radius
    piecewise-linearly in angle. In d >= 3 a nearest-direction table
    (`directions`, unit L2 rows) is used instead -- a documented approximation.
    """

    kind: str
    angles: np.ndarray | None = None
    radii: np.ndarray | None = None
    directions: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("L1", "L2", "Linf", "empirical"):
            raise GeometryConfigError(f"unknown norm kind {self.kind!r}")
        if self.kind == "empirical":
            if self.radii is None or len(self.radii) == 0:
                raise GeometryConfigError("empirical norm requires a nonempty radial table")
            if np.any(np.asarray(self.radii) <= 0):
                raise GeometryConfigError("empirical norm radii must be positive")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x) -> np.ndarray | float:
        return norm_eval(self, x)

    def distance(self, a, b) -> np.ndarray | float:
        return norm_eval(self, np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))

    def _radius_at_angle(self, theta: np.ndarray) -> np.ndarray:
        """Interpolated boundary radius at angle theta (d=2 empirical only)."""
        ang = np.asarray(self.angles, dtype=np.float64)
        rad = np.asarray(self.radii, dtype=np.float64)
        two_pi = 2.0 * np.pi
        th = np.mod(theta, two_pi)
        # periodic piecewise-linear interpolation
        xp = np.concatenate([ang, [ang[0] + two_pi]])
        fp = np.concatenate([rad, [rad[0]]])
        return np.interp(th, xp, fp)


def norm_eval(nu: Norm, x) -> np.ndarray | float:
    """Gauge of x with respect to nu's unit ball. Accepts (..., d) arrays."""
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if nu.kind == "L1":
        out = np.abs(pts).sum(axis=-1)
    elif nu.kind == "L2":
        out = np.sqrt((pts * pts).sum(axis=-1))
    elif nu.kind == "Linf":
        out = np.abs(pts).max(axis=-1)
    else:
        r2 = np.sqrt((pts * pts).sum(axis=-1))
        out = np.zeros_like(r2)
        nz = r2 > 0
        if pts.shape[-1] == 2:
            theta = np.arctan2(pts[nz, 1], pts[nz, 0])
            out[nz] = r2[nz] / nu._radius_at_angle(theta)
        else:
            dirs = np.asarray(nu.directions, dtype=np.float64)
            units = pts[nz] / r2[nz, None]
            idx = np.argmax(units @ dirs.T, axis=-1)
            out[nz] = r2[nz] / np.asarray(nu.radii, dtype=np.float64)[idx]
    return float(out[0]) if scalar else out


def project(nu: Norm, x) -> np.ndarray:
    """Radial projection x / |x| onto the unit-ball boundary; undefined at 0."""
    arr = np.asarray(x, dtype=np.float64)
    n = norm_eval(nu, arr)
    if np.any(np.asarray(n) == 0):
        raise ValueError("project is undefined at the origin")
    return arr / (np.asarray(n)[..., None] if arr.ndim > 1 else n)


def empirical_norm_2d(angles, radii, symmetrize: bool = True, convexify: bool = True) -> Norm:
    """Build a d=2 empirical radial norm from (angle, radius) samples.

    The table is re-gridded onto a uniform grid closed under the dihedral
    group (multiple of 8 directions), optionally symmetrized (averaging the 8
    images) and convexified (radial function of the convex hull), so the
    resulting unit ball has the lattice symmetries of the growth shape.
    """
    angles = np.asarray(angles, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    if len(angles) == 0:
        raise GeometryConfigError("empty radial table")
    m = max(64, 8 * ((len(angles) + 7) // 8))
    grid = 2.0 * np.pi * np.arange(m) / m
    order = np.argsort(np.mod(angles, 2 * np.pi))
    base = Norm("empirical", angles=np.mod(angles, 2 * np.pi)[order], radii=radii[order])
    vals = base._radius_at_angle(grid)
    if symmetrize:
        pts = np.stack([np.cos(grid) * vals, np.sin(grid) * vals], axis=-1)
        acc = np.zeros(m)
        for img in _dihedral_images_2d(pts):
            theta = np.mod(np.arctan2(img[:, 1], img[:, 0]), 2 * np.pi)
            # images of grid points land exactly on grid points
            k = np.rint(theta * m / (2 * np.pi)).astype(int) % m
            r = np.sqrt((img * img).sum(axis=-1))
            acc[k] += r
        vals = acc / 8.0
    if convexify:
        vals = _convexify_radii(grid, vals)
    return Norm("empirical", angles=grid, radii=vals)


def _convexify_radii(grid: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Radial function of the convex hull of the polar plot (d=2)."""
    from scipy.spatial import ConvexHull

    pts = np.stack([np.cos(grid) * radii, np.sin(grid) * radii], axis=-1)
    hull = ConvexHull(pts)
    verts = pts[hull.vertices]  # counterclockwise
    out = np.empty_like(radii)
    for i, th in enumerate(grid):
        u = np.array([np.cos(th), np.sin(th)])
        # ray-polygon intersection: max r with r*u inside all hull half-planes
        r = np.inf
        for j in range(len(verts)):
            a, b = verts[j], verts[(j + 1) % len(verts)]
            edge = b - a
            n = np.array([edge[1], -edge[0]])  # outward for ccw polygon
            denom = u @ n
            if denom > 1e-15:
                r = min(r, (a @ n) / denom)
        out[i] = r
    return out


def convexification_gap(nu_raw: Norm, nu_convex: Norm) -> float:
    """Max relative radius increase introduced by convexification."""
    raw = np.asarray(nu_raw.radii, dtype=np.float64)
    conv = nu_convex._radius_at_angle(np.asarray(nu_raw.angles, dtype=np.float64))
    return float(np.max((conv - raw) / raw))


def radial_table_to_csv(nu: Norm, path) -> None:
    """Serialize an empirical norm's radial table: rows `angle_radians,radius`."""
    if nu.kind != "empirical":
        raise GeometryConfigError("only empirical norms have a radial table")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if nu.angles is not None:
            w.writerow(["angle_radians", "radius"])
            for a, r in zip(nu.angles, nu.radii):
                w.writerow([repr(float(a)), repr(float(r))])
        else:
            d = nu.directions.shape[1]
            w.writerow([f"u{i + 1}" for i in range(d)] + ["radius"])
            for u, r in zip(nu.directions, nu.radii):
                w.writerow([repr(float(c)) for c in u] + [repr(float(r))])


def radial_table_from_csv(path) -> Norm:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header == ["angle_radians", "radius"]:
        ang = np.array([float(r[0]) for r in body])
        rad = np.array([float(r[1]) for r in body])
        order = np.argsort(ang)
        return Norm("empirical", angles=ang[order], radii=rad[order])
    dirs = np.array([[float(c) for c in r[:-1]] for r in body])
    rad = np.array([float(r[-1]) for r in body])
    return Norm("empirical", directions=dirs, radii=rad)


# ---------------------------------------------------------------------------
# sectors, annuli, predicates


@dataclass(frozen=True)
class AngularSector:
    """Cone of points y whose projection pi(y) is within `aperture` of `center`.

    `center` must lie on the unit-ball boundary of the norm used for
    membership tests. Membership is scale-invariant by construction.
    """

    center: tuple
    aperture: float

    def __post_init__(self):
        if self.aperture <= 0:
            raise GeometryConfigError("sector aperture must be positive")


def sector_contains(sector: AngularSector, nu: Norm, y) -> np.ndarray | bool:
    """d(pi y, center) < aperture, vectorized over (..., d) arrays of y != 0."""
    arr = np.asarray(y, dtype=np.float64)
    scalar = arr.ndim == 1
    pts = np.atleast_2d(arr)
    norms = np.atleast_1d(norm_eval(nu, pts))
    if np.any(norms == 0):
        raise ValueError("sector membership is undefined at the origin")
    proj = pts / norms[:, None]
    dist = np.atleast_1d(norm_eval(nu, proj - np.asarray(sector.center, dtype=np.float64)))
    out = dist < sector.aperture
    return bool(out[0]) if scalar else out


def halfspace_aperture(nu: Norm, samples: int = 4096) -> float:
    """Aperture making the sector centered at pi(e1) approximate the halfspace x1 > 0.

    Computed as the sup, over boundary points y with y_1 >= 0, of d(y, pi e1);
    evaluated numerically on a direction grid (d=2).
    """
    theta = np.linspace(-np.pi / 2, np.pi / 2, samples)
    units = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    bdry = units / np.atleast_1d(norm_eval(nu, units))[:, None]
    center = project(nu, np.array([1.0, 0.0]))
    return float(np.max(norm_eval(nu, bdry - center)))


@dataclass(frozen=True)
class Annulus:
    """D(center; r1, r2) in the given norm; r1 = 0 degenerates to a disk."""

    center: tuple
    r1: float
    r2: float

    def __post_init__(self):
        if not (0 <= self.r1 < self.r2):
            raise GeometryConfigError("annulus requires 0 <= r1 < r2")

    def contains(self, nu: Norm, y) -> np.ndarray | bool:
        d = nu.distance(np.atleast_2d(np.asarray(y, dtype=np.float64)), np.asarray(self.center, dtype=np.float64))
        out = (self.r1 <= d) & (d <= self.r2)
        return bool(out[0]) if np.asarray(y).ndim == 1 else out


@dataclass(frozen=True)
class RegionPredicate:
    """Evaluable membership test over real d-space, with a bounding box."""

    test: Callable[[np.ndarray], np.ndarray]
    bbox_lo: tuple
    bbox_hi: tuple

    def contains(self, pts) -> np.ndarray | bool:
        arr = np.asarray(pts, dtype=np.float64)
        scalar = arr.ndim == 1
        out = self.test(np.atleast_2d(arr))
        return bool(out[0]) if scalar else out


def fatten(sites: Iterable) -> RegionPredicate:
    """Points within L-infinity distance 1/2 (inclusive) of some site of Z."""
    arr = np.asarray(sorted(tuple(s) for s in sites), dtype=np.float64)
    if arr.size == 0:
        raise GeometryConfigError("cannot fatten an empty set")
    lo = tuple(arr.min(axis=0) - 0.5)
    hi = tuple(arr.max(axis=0) + 0.5)

    def test(pts: np.ndarray) -> np.ndarray:
        out = np.zeros(len(pts), dtype=bool)
        for i, p in enumerate(pts):
            out[i] = np.min(np.abs(arr - p).max(axis=1)) <= 0.5
        return out

    return RegionPredicate(test, lo, hi)


# ---------------------------------------------------------------------------
# stabilization sets and slicing


def lattice_disk(nu: Norm, center, r1: float, r2: float) -> np.ndarray:
    """Lattice sites x with r1 <= |x - center| <= r2 (r1=0 gives the full disk)."""
    center = np.asarray(center, dtype=np.float64)
    extent = lattice_extent(nu, r2)
    d = len(center)
    axes = [np.arange(int(np.floor(c - extent)), int(np.ceil(c + extent)) + 1) for c in center]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    dist = norm_eval(nu, pts - center)
    mask = (dist >= r1) & (dist <= r2) if r1 > 0 else dist <= r2
    return pts[mask].astype(np.int64)


def lattice_extent(nu: Norm, r: float) -> float:
    """L-infinity radius in lattice units of the norm ball of radius r."""
    if nu.kind == "Linf":
        return r
    if nu.kind in ("L1", "L2"):
        return r
    # max over boundary directions of the coordinate extent of the unit ball
    ang = np.asarray(nu.angles, dtype=np.float64)
    rad = np.asarray(nu.radii, dtype=np.float64)
    pts = np.stack([np.cos(ang) * rad, np.sin(ang) * rad], axis=-1)
    return r * float(np.max(np.abs(pts)))


@dataclass(frozen=True)
class StabilizationSets:
    """The four special site sets of the stabilization estimate."""

    r0: np.ndarray  # (N, d) int sites
    b0: np.ndarray
    r1: np.ndarray
    b1: RegionPredicate  # infinite set, restricted to the run box
    a1: AngularSector
    a2: AngularSector


def build_stabilization_sets(
    n: int,
    delta: float,
    beta: float,
    alpha: float,
    a2: AngularSector,
    nu: Norm,
    run_box_half_width: float | None = None,
) -> StabilizationSets:
    """Construct the annular-sector sets driving the stabilization experiment.

    R0 = D(0; n/(1+delta), n - n^beta) cap A2
    B0 = D(0; n/(1+delta)) union (D(0; n/(1+delta), n + n^beta) cap A2^c)
    B1 = D(0; n) union A1^c          (returned as a region predicate)
    R1 = D(0; n, n(1+delta) - (n + delta n)^beta) cap A1

    A1 is derived from A2 with aperture gap exactly n^(alpha - 1).
    """
    if not 0 < delta < 1:
        raise GeometryConfigError("delta must lie in (0, 1)")
    if not 0.5 < beta < 1:
        raise GeometryConfigError("beta must lie in (1/2, 1)")
    if not 0.5 < alpha < 1:
        raise GeometryConfigError("alpha must lie in (1/2, 1)")
    if not (beta + 1) / 2 < alpha:
        raise GeometryConfigError("alpha must exceed (beta + 1)/2")
    nb = float(n) ** beta
    if not n - nb > n / (1 + delta):
        raise GeometryConfigError(f"n={n} too small: need n - n^beta > n/(1+delta)")
    gap = float(n) ** (alpha - 1)
    if a2.aperture <= gap:
        raise GeometryConfigError(
            f"A2 aperture {a2.aperture} must exceed the gap n^(alpha-1) = {gap:.4g}"
        )
    a1 = AngularSector(a2.center, a2.aperture - gap)

    r_in = n / (1 + delta)
    r1_out = n * (1 + delta) - (n + delta * n) ** beta
    if r1_out <= n:
        raise GeometryConfigError("degenerate R1: n(1+delta) - (n + delta n)^beta <= n")

    all_sites = lattice_disk(nu, np.zeros(len(a2.center)), 0.0, n + nb)
    dist = norm_eval(nu, all_sites.astype(np.float64))
    nonzero = dist > 0
    in_a2 = np.zeros(len(all_sites), dtype=bool)
    in_a2[nonzero] = sector_contains(a2, nu, all_sites[nonzero].astype(np.float64))
    in_a1 = np.zeros(len(all_sites), dtype=bool)
    in_a1[nonzero] = sector_contains(a1, nu, all_sites[nonzero].astype(np.float64))

    m_r0 = (dist >= r_in) & (dist <= n - nb) & in_a2
    # sites exactly on the inner circle belong to both regions; red wins there
    m_b0 = ((dist <= r_in) | ((dist >= r_in) & (dist <= n + nb) & ~in_a2)) & ~m_r0
    r0 = all_sites[m_r0]
    b0 = all_sites[m_b0]
    r1 = all_sites[(dist >= n) & (dist <= r1_out) & in_a1]
    if len(r0) == 0:
        raise GeometryConfigError("degenerate parameters: R0 is empty")

    half = run_box_half_width if run_box_half_width is not None else lattice_extent(nu, n + nb)

    def b1_test(pts: np.ndarray) -> np.ndarray:
        dd = np.atleast_1d(norm_eval(nu, pts))
        out = dd <= n
        far = ~out & (dd > 0)
        if np.any(far):
            out[far] = ~sector_contains(a1, nu, pts[far])
        return out

    d = len(a2.center)
    b1 = RegionPredicate(b1_test, tuple([-half] * d), tuple([half] * d))
    return StabilizationSets(r0=r0, b0=b0, r1=r1, b1=b1, a1=a1, a2=a2)


def slice_richardson(sites: Iterable) -> tuple:
    """Split a site set into (positive first coordinate, rest)."""
    xi, zeta = set(), set()
    for s in sites:
        s = tuple(int(c) for c in s)
        (xi if s[0] > 0 else zeta).add(s)
    if not xi and not zeta:
        raise GeometryConfigError("cannot slice an empty set")
    return xi, zeta
