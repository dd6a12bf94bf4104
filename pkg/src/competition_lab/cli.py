"""Command-line harness: every experiment behind one tool.

Configs are strict JSON (unknown keys rejected, every value range-checked);
outputs are a manifest, per-replicate JSONL, summary CSV, and optional PPM
snapshots. Same config + same seed means bit-identical files, independent of
the worker count.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, analytics, dual, engines, fpp, geometry as geo, oracle
from .engines import run_competition, run_coupled, run_richardson, run_voter
from .geometry import GeometryConfigError, Norm
from .kernels import MODE_CLOSED, MODE_WRAP
from .parallel import resolve_workers
from .random_media import Box, EdgeWeightField, PercolationStructure, SeedSpec

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(Exception):
    """Invalid or incomplete run configuration; message names the field."""


class RuntimeAbort(Exception):
    """Too many replicates hit their box (or another tolerated-failure limit)."""


# ---------------------------------------------------------------------------
# schema validation (fail-closed)


def _is_site_list(v):
    return isinstance(v, list) and all(
        isinstance(s, list) and len(s) >= 1 and all(isinstance(c, int) for c in s)
        for s in v
    )


_CHECKERS = {
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "bool": lambda v: isinstance(v, bool),
    "str": lambda v: isinstance(v, str),
    "int_list": lambda v: isinstance(v, list)
    and all(isinstance(x, int) and not isinstance(x, bool) for x in v),
    "float_list": lambda v: isinstance(v, list)
    and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v),
    "site_list": _is_site_list,
}


class Field:
    def __init__(self, name, ftype, required=False, default=None, check=None, why=""):
        self.name = name
        self.ftype = ftype
        self.required = required
        self.default = default
        self.check = check
        self.why = why  # human-readable constraint, quoted on failure


def _validate(config: dict, fields: list) -> dict:
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    known = {f.name for f in fields}
    for key in config:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    out = {}
    for f in fields:
        if f.name not in config:
            if f.required:
                raise ConfigError(f"missing required field {f.name!r}")
            out[f.name] = f.default
            continue
        v = config[f.name]
        if not _CHECKERS[f.ftype](v):
            raise ConfigError(f"field {f.name!r} must have type {f.ftype}")
        if f.ftype == "float":
            v = float(v)
        if f.ftype == "float_list":
            v = [float(x) for x in v]
        if f.check is not None and not f.check(v):
            raise ConfigError(f"field {f.name!r} violates constraint: {f.why}")
        out[f.name] = v
    return out


def _in_open(lo, hi):
    return lambda v: lo < v < hi


_COMMON = [
    Field("seed", "int", default=0, check=lambda v: v >= 0, why="seed >= 0"),
    Field("workers", "int", default=None, check=lambda v: v >= 1, why="workers >= 1"),
    Field(
        "max_boundary_fraction",
        "float",
        default=0.2,
        check=lambda v: 0 <= v <= 1,
        why="fraction in [0, 1]",
    ),
]

_NORM_FIELDS = [
    Field(
        "norm",
        "str",
        default="L2",
        check=lambda v: v in ("L1", "L2", "Linf", "empirical"),
        why="one of L1 | L2 | Linf | empirical",
    ),
    Field("norm_csv", "str", default=None),
]


def _resolve_norm(cfg) -> Norm:
    if cfg["norm"] == "empirical":
        if not cfg["norm_csv"]:
            raise ConfigError("field 'norm_csv' is required when norm = 'empirical'")
        try:
            return geo.radial_table_from_csv(cfg["norm_csv"])
        except OSError as e:
            raise ConfigError(f"field 'norm_csv': cannot read {cfg['norm_csv']!r} ({e})")
    return Norm(cfg["norm"])


_SCHEMAS = {
    "simulate": _COMMON
    + [
        Field(
            "model",
            "str",
            required=True,
            check=lambda v: v in ("competition", "richardson", "voter"),
            why="one of competition | richardson | voter",
        ),
        Field("red_sites", "site_list", default=None),
        Field("blue_sites", "site_list", default=None),
        Field("init_sites", "site_list", default=None),
        Field("torus_shape", "int_list", default=None),
        Field("t_max", "float", required=True, check=lambda v: v > 0, why="t_max > 0"),
        Field("reps", "int", default=1, check=lambda v: v >= 1, why="reps >= 1"),
        Field("box_half", "int", default=None, check=lambda v: v >= 1, why="box_half >= 1"),
        Field("snapshot_times", "float_list", default=None),
        Field("snapshot_trigger_half", "int", default=None, check=lambda v: v >= 1, why="half-width >= 1"),
    ],
    "shape": _COMMON
    + [
        Field("t_values", "float_list", required=True, check=lambda v: len(v) > 0 and all(t > 0 for t in v), why="nonempty, all t > 0"),
        Field("reps", "int", required=True, check=lambda v: v >= 2, why="reps >= 2"),
        Field("n_directions", "int", default=256, check=lambda v: v >= 8 and v % 8 == 0, why="multiple of 8, >= 8"),
        Field("speed_factor", "float", default=analytics.GROWTH_SPEED_FACTOR, check=lambda v: v > 0, why="speed_factor > 0"),
        Field("fpp_check_n", "int", default=0, check=lambda v: v >= 0, why="fpp_check_n >= 0"),
        Field("convexify", "bool", default=True),
    ],
    "curvature": _COMMON
    + _NORM_FIELDS
    + [
        Field("boundary_samples", "int", default=512, check=lambda v: v >= 16, why="boundary_samples >= 16"),
        Field("pair_samples", "int", default=20000, check=lambda v: v >= 0, why="pair_samples >= 0"),
    ],
    "stabilize": _COMMON
    + _NORM_FIELDS
    + [
        Field("n_values", "int_list", required=True, check=lambda v: len(v) > 0 and all(n >= 2 for n in v), why="nonempty, all n >= 2"),
        Field("delta", "float", required=True, check=_in_open(0, 1), why="delta in (0, 1)"),
        Field("beta", "float", required=True, check=_in_open(0.5, 1), why="beta in (1/2, 1)"),
        Field("alpha", "float", required=True, check=_in_open(0.5, 1), why="alpha in (1/2, 1)"),
        Field("a2_aperture", "float", default=0.9, check=lambda v: v > 0, why="aperture > 0"),
        Field("reps", "int", required=True, check=lambda v: v >= 1, why="reps >= 1"),
        Field("speed_factor", "float", default=analytics.GROWTH_SPEED_FACTOR, check=lambda v: v > 0, why="speed_factor > 0"),
    ],
    "nested": _COMMON
    + _NORM_FIELDS
    + [
        Field("T0", "float", required=True, check=lambda v: v > 0, why="T0 > 0"),
        Field("delta", "float", required=True, check=_in_open(0, 1), why="delta in (0, 1)"),
        Field("beta", "float", required=True, check=_in_open(0.5, 1), why="beta in (1/2, 1)"),
        Field("alpha", "float", required=True, check=_in_open(0.5, 1), why="alpha in (1/2, 1)"),
        Field("t_max", "float", required=True, check=lambda v: v > 0, why="t_max > 0"),
    ],
    "coexist": _COMMON
    + [
        Field("red_sites", "site_list", required=True, check=lambda v: len(v) > 0, why="nonempty"),
        Field("blue_sites", "site_list", required=True, check=lambda v: len(v) > 0, why="nonempty"),
        Field("t_max", "float", required=True, check=lambda v: v > 0, why="t_max > 0"),
        Field("reps", "int", required=True, check=lambda v: v >= 1, why="reps >= 1"),
        Field("t_grid", "float_list", default=None),
        Field("speed_factor", "float", default=analytics.GROWTH_SPEED_FACTOR, check=lambda v: v > 0, why="speed_factor > 0"),
    ],
    "dual": _COMMON
    + _NORM_FIELDS
    + [
        Field("rho_grid", "float_list", required=True, check=lambda v: len(v) > 0 and all(r > 1 for r in v), why="nonempty, all rho > 1"),
        Field("beta", "float", required=True, check=_in_open(0.5, 1), why="beta in (1/2, 1)"),
        Field("t_fractions", "float_list", default=[0.25, 0.5, 1.0], check=lambda v: all(0 < f <= 1 for f in v), why="fractions in (0, 1]"),
        Field("reps", "int", required=True, check=lambda v: v >= 1, why="reps >= 1"),
    ],
    "oracle-check": _COMMON
    + [
        Field(
            "graph",
            "str",
            required=True,
            check=lambda v: v in ("path", "cycle", "grid"),
            why="one of path | cycle | grid",
        ),
        Field("graph_shape", "int_list", required=True, check=lambda v: 1 <= len(v) <= 2 and all(n >= 2 for n in v), why="1 or 2 sizes, each >= 2"),
        Field(
            "model",
            "str",
            required=True,
            check=lambda v: v in ("competition", "richardson", "voter"),
            why="one of competition | richardson | voter",
        ),
        Field("init", "int_list", required=True, check=lambda v: all(x in (0, 1, 2) for x in v), why="site states in {0, 1, 2}"),
        Field("t", "float", required=True, check=lambda v: v > 0, why="t > 0"),
        Field("reps", "int", required=True, check=lambda v: v >= 100, why="reps >= 100"),
        Field(
            "engine",
            "str",
            default="gillespie",
            check=lambda v: v in ("gillespie", "event-scan", "fpp-richardson"),
            why="one of gillespie | event-scan | fpp-richardson",
        ),
        Field("tol", "float", default=1e-9, check=lambda v: v > 0, why="tol > 0"),
    ],
    "fpp-dev": _COMMON
    + [
        Field("direction", "int_list", required=True, check=lambda v: len(v) >= 1 and any(v), why="a nonzero lattice direction"),
        Field("ns", "int_list", required=True, check=lambda v: len(v) > 0 and all(n >= 1 for n in v), why="nonempty, all n >= 1"),
        Field("s_grid", "float_list", required=True, check=lambda v: len(v) > 0 and all(s >= 0 for s in v), why="nonempty, all s >= 0"),
        Field("reps", "int", required=True, check=lambda v: v >= 2, why="reps >= 2"),
        Field("mu_hat", "float", required=True, check=lambda v: v > 0, why="mu_hat > 0"),
        Field("margin", "int", default=12, check=lambda v: v >= 1, why="margin >= 1"),
    ],
}


# ---------------------------------------------------------------------------
# deterministic writers


def _write_manifest(out: Path, kind: str, cfg: dict) -> None:
    doc = {"kind": kind, "version": __version__, "config": cfg}
    (out / "manifest.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _write_jsonl(out: Path, rows) -> None:
    with open(out / "replicates.jsonl", "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def _write_csv(out: Path, name: str, header, rows) -> None:
    with open(out / name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _fmt_time(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t))


def _check_boundary_fraction(n_bad: int, n_total: int, cfg) -> None:
    if n_total and n_bad / n_total > cfg["max_boundary_fraction"]:
        raise RuntimeAbort(
            f"{n_bad}/{n_total} replicates hit their box "
            f"(tolerated fraction {cfg['max_boundary_fraction']})"
        )


# ---------------------------------------------------------------------------
# experiment runners


def _sites(v):
    return [tuple(s) for s in v]


def _default_sim_box(init_sites, t_max: float) -> Box:
    # documented default sizing: 2*ceil(1.5*t_max) + 11 sites per side
    half = int(math.ceil(1.5 * t_max)) + 5
    pts = np.asarray(_sites(init_sites), dtype=np.int64)
    center = tuple(int(c) for c in np.round(pts.mean(axis=0)).astype(np.int64))
    return Box.centered(center, half + int(np.abs(pts - np.asarray(center)).max()))


def _run_simulate(cfg, seed: SeedSpec, out: Path):
    model = cfg["model"]
    if model == "competition" and not (cfg["red_sites"] and cfg["blue_sites"]):
        raise ConfigError("model 'competition' requires fields 'red_sites' and 'blue_sites'")
    if model == "richardson" and not (cfg["init_sites"] or cfg["red_sites"]):
        raise ConfigError("model 'richardson' requires field 'init_sites'")
    if model == "voter" and not (cfg["red_sites"] and cfg["torus_shape"]):
        raise ConfigError("model 'voter' requires fields 'red_sites' and 'torus_shape'")

    snap_times = sorted(cfg["snapshot_times"] or [])
    trigger = cfg["snapshot_trigger_half"]
    init = cfg["init_sites"] or cfg["red_sites"] or []
    if model != "voter":
        if cfg["box_half"] is not None:
            pts = np.asarray(_sites(init) + _sites(cfg["blue_sites"] or []), dtype=np.int64)
            center = tuple(int(c) for c in np.round(pts.mean(axis=0)).astype(np.int64))
            box = Box.centered(center, cfg["box_half"])
        elif trigger is not None:
            box = Box.centered((0,) * len(init[0]), trigger)
        else:
            box = _default_sim_box(init + (cfg["blue_sites"] or []), cfg["t_max"])
        if len(init[0]) != 2 and (snap_times or trigger is not None):
            raise ConfigError("snapshots require dimension d = 2")

    snaps = []

    def on_checkpoint(t, ks):
        if round(t, 9) in {round(s, 9) for s in snap_times}:
            grid = engines.state_grid(ks.state, box)
            name = f"snap_t{_fmt_time(t)}.ppm"
            (out / name).write_bytes(engines.snapshot_ppm(grid))
            snaps.append(name)

    rows = []
    boundary_hits = 0
    for rep in range(cfg["reps"]):
        rep_seed = seed.child("simulate", rep)
        use_snaps = rep == 0 and snap_times and model != "voter"
        if model == "competition":
            rec = run_competition(
                _sites(cfg["red_sites"]),
                _sites(cfg["blue_sites"]),
                cfg["t_max"],
                rep_seed,
                box=box,
                checkpoints=snap_times if use_snaps else None,
                on_checkpoint=on_checkpoint if use_snaps else None,
            )
        elif model == "richardson":
            rec = run_richardson(
                _sites(init),
                cfg["t_max"],
                rep_seed,
                box=box,
                checkpoints=snap_times if use_snaps else None,
                on_checkpoint=on_checkpoint if use_snaps else None,
            )
        else:
            rec = run_voter(
                _sites(cfg["red_sites"]), tuple(cfg["torus_shape"]), cfg["t_max"], rep_seed
            )
        if rep == 0 and trigger is not None and model != "voter":
            if rec.stop_reason == "boundary":
                grid = engines.state_grid(rec)
                name = f"snap_t{_fmt_time(rec.t_end)}.ppm"
                (out / name).write_bytes(engines.snapshot_ppm(grid))
                snaps.append(name)
            else:
                click.echo(
                    f"warning: snapshot trigger (box half-width {trigger}) "
                    f"never fired before t_max",
                    err=True,
                )
        boundary_hits += rec.stop_reason == "boundary"
        rows.append(
            {
                "rep": rep,
                "stop_reason": rec.stop_reason,
                "t_end": rec.t_end,
                "n_events": rec.n_events,
                "n_red": rec.n_red,
                "n_blue": rec.n_blue,
                "extinction_time_red": rec.extinction_time_red,
                "extinction_time_blue": rec.extinction_time_blue,
            }
        )
    _write_jsonl(out, rows)
    _write_csv(
        out,
        "summary.csv",
        ["reps", "boundary_hits", "mean_n_red", "mean_n_blue", "mean_events", "snapshots"],
        [
            [
                cfg["reps"],
                boundary_hits,
                float(np.mean([r["n_red"] for r in rows])),
                float(np.mean([r["n_blue"] for r in rows])),
                float(np.mean([r["n_events"] for r in rows])),
                ";".join(snaps),
            ]
        ],
    )
    if trigger is None:
        _check_boundary_fraction(boundary_hits, cfg["reps"], cfg)


def _run_shape(cfg, seed: SeedSpec, out: Path):
    estimates = analytics.estimate_shape(
        cfg["t_values"],
        cfg["reps"],
        seed,
        n_directions=cfg["n_directions"],
        workers=cfg["workers"],
        speed_factor=cfg["speed_factor"],
        fpp_check_n=cfg["fpp_check_n"] or None,
    )
    rows, summary = [], []
    for t, est in sorted(estimates.items()):
        for rep in range(est.reps_used):
            rows.append(
                {
                    "rep": rep,
                    "t": t,
                    "axis_speed": float(est.per_rep_speeds[rep][0]),
                    "mean_speed": float(est.per_rep_speeds[rep].mean()),
                }
            )
        summary.append(
            [
                t,
                est.axis_speed(),
                float(est.speeds.mean()),
                est.raw_asymmetry(),
                est.reps_used,
                est.dropped,
            ]
        )
        nu = est.to_norm(convexify=cfg["convexify"])
        geo.radial_table_to_csv(nu, out / f"shape_t{_fmt_time(t)}.csv")
        _check_boundary_fraction(est.dropped, est.reps_used + est.dropped, cfg)
    _write_jsonl(out, rows)
    _write_csv(
        out,
        "summary.csv",
        ["t", "axis_speed", "mean_speed", "raw_asymmetry", "reps_used", "dropped"],
        summary,
    )


def _run_curvature(cfg, seed: SeedSpec, out: Path):
    nu = _resolve_norm(cfg)
    rep = analytics.curvature_probe(
        nu,
        boundary_samples=cfg["boundary_samples"],
        pair_samples=cfg["pair_samples"],
        seed=seed,
    )
    theta = 2 * np.pi * np.arange(cfg["boundary_samples"]) / cfg["boundary_samples"]
    _write_jsonl(
        out,
        [
            {"angle": float(a), "radius": (None if math.isinf(r) else float(r))}
            for a, r in zip(theta, rep.per_point_radius)
        ],
    )
    _write_csv(
        out,
        "summary.csv",
        ["rho_hat", "uniformly_curved", "n_flat_points", "c_hat", "n_pairs"],
        [
            [
                rep.rho_hat if math.isfinite(rep.rho_hat) else "inf",
                rep.uniformly_curved,
                len(rep.flat_points),
                rep.c_hat if rep.c_hat is not None else "",
                rep.n_pairs,
            ]
        ],
    )


def _run_stabilize(cfg, seed: SeedSpec, out: Path):
    nu = _resolve_norm(cfg)
    outcomes = analytics.stabilization_experiment(
        cfg["n_values"],
        cfg["delta"],
        cfg["beta"],
        cfg["alpha"],
        cfg["a2_aperture"],
        cfg["reps"],
        seed,
        nu=nu,
        workers=cfg["workers"],
        speed_factor=cfg["speed_factor"],
    )
    rows, summary = [], []
    for o in outcomes:
        for rep, valid, f_b1, f_r1, f_esc in o.per_rep:
            rows.append(
                {"n": o.n, "rep": rep, "valid": valid, "fail_b1": f_b1,
                 "reach_r1": f_r1, "escape": f_esc}
            )
        lo, hi = o.fail_b1_ci()
        summary.append(
            [o.n, o.reps, o.invalid, o.fail_b1, o.fail_reach_r1, o.fail_escape,
             o.fail_b1_freq, lo, hi, o.a1_aperture]
        )
        _check_boundary_fraction(o.invalid, o.reps, cfg)
    _write_jsonl(out, rows)
    _write_csv(
        out,
        "summary.csv",
        ["n", "reps", "invalid", "fail_b1", "reach_r1", "escape",
         "fail_b1_freq", "ci_lo", "ci_hi", "a1_aperture"],
        summary,
    )


def _run_nested(cfg, seed: SeedSpec, out: Path):
    nu = _resolve_norm(cfg)
    tr = analytics.nested_sector_monitor(
        cfg["T0"], cfg["delta"], cfg["beta"], cfg["alpha"], cfg["t_max"], seed, nu
    )
    rows = [
        {"n": s.n, "T_n": s.T_n, "tau_n": s.tau_n, "r1": s.r1, "r2": s.r2,
         "shape_sandwich": s.shape_sandwich, "sector_clear": s.sector_clear}
        for s in tr.stages
    ]
    _write_jsonl(out, rows)
    _write_csv(
        out,
        "summary.csv",
        ["stages", "first_failure", "all_hold", "aperture_exhausted", "truncated"],
        [[len(tr.stages), tr.first_failure if tr.first_failure is not None else "",
          tr.all_hold, tr.aperture_exhausted, tr.truncated]],
    )
    if tr.truncated:
        raise RuntimeAbort("nested run hit its box before the last stage")


def _run_coexist(cfg, seed: SeedSpec, out: Path):
    summ = analytics.coexistence_batch(
        _sites(cfg["red_sites"]),
        _sites(cfg["blue_sites"]),
        cfg["t_max"],
        cfg["reps"],
        seed,
        workers=cfg["workers"],
        speed_factor=cfg["speed_factor"],
        t_grid=cfg["t_grid"],
    )
    rows = [
        {"rep": rep, "stop_reason": reason, "extinction_time_red": er,
         "extinction_time_blue": eb}
        for rep, reason, er, eb in summ.per_rep
    ]
    _write_jsonl(out, rows)
    lo, hi = summ.both_alive_ci
    _write_csv(
        out,
        "summary.csv",
        ["reps", "valid", "both_alive", "red_survives", "blue_survives",
         "both_alive_freq", "ci_lo", "ci_hi", "censored"],
        [[summ.reps, summ.valid, summ.both_alive, summ.red_survives,
          summ.blue_survives, summ.both_alive_freq, lo, hi, summ.censored]],
    )
    if summ.both_alive_by_t:
        _write_csv(
            out,
            "alive_by_t.csv",
            ["t", "both_alive_freq"],
            [[t, f] for t, f in sorted(summ.both_alive_by_t.items())],
        )
    _check_boundary_fraction(summ.reps - summ.valid, summ.reps, cfg)


def _run_dual(cfg, seed: SeedSpec, out: Path):
    nu = _resolve_norm(cfg)
    rows, fit = dual.invasion_experiment(
        cfg["rho_grid"], cfg["beta"], cfg["t_fractions"], cfg["reps"], seed, norm=nu
    )
    _write_jsonl(
        out,
        [{"rho": r.rho, "t": r.t, "prob": r.prob, "stderr": r.stderr, "reps": r.reps}
         for r in rows],
    )
    _write_csv(
        out,
        "summary.csv",
        ["rho", "beta", "t", "flip_prob", "stderr", "reps"],
        [[r.rho, r.beta, r.t, r.prob, r.stderr, r.reps] for r in rows],
    )
    _write_csv(out, "fit.csv", ["fitted_decay_rate"], [[fit if fit is not None else ""]])


def _tiny_graph_world(cfg):
    shape = tuple(cfg["graph_shape"])
    kind = cfg["graph"]
    if kind == "grid" and len(shape) != 2:
        raise ConfigError("field 'graph_shape' must list 2 sizes for graph = 'grid'")
    if kind in ("path", "cycle") and len(shape) != 1:
        raise ConfigError(f"field 'graph_shape' must list 1 size for graph = {kind!r}")
    if kind == "path":
        g = oracle.TinyGraph.path(shape[0])
        box = Box((0,), (shape[0] - 1,))
        mode = MODE_CLOSED
    elif kind == "cycle":
        g = oracle.TinyGraph.cycle(shape[0])
        box = Box((0,), (shape[0] - 1,))
        mode = MODE_WRAP
    else:
        g = oracle.TinyGraph.grid(*shape)
        box = Box((0, 0), (shape[0] - 1, shape[1] - 1))
        mode = MODE_CLOSED
    return g, box, mode


def _observed_state(rec, box) -> tuple:
    state = [0] * box.nsites
    shape = box.shape
    for coords, color in zip(rec.occupied, rec.colors):
        idx = 0
        for c, l, m in zip(coords, box.lo, shape):
            idx = idx * m + (int(c) - l)
        state[idx] = int(color)
    return tuple(state)


def _run_oracle_check(cfg, seed: SeedSpec, out: Path):
    graph, box, mode = _tiny_graph_world(cfg)
    init = cfg["init"]
    if len(init) != len(graph.sites):
        raise ConfigError(
            f"field 'init' must list {len(graph.sites)} site states, got {len(init)}"
        )
    model = cfg["model"]
    gen = oracle.build_generator(graph, model, init)
    init_canon = gen.states[0]
    dist = oracle.transient_distribution(gen, init_canon, cfg["t"], tol=cfg["tol"])

    sites = list(box.sites())
    red0 = [sites[i] for i, v in enumerate(init_canon) if v == oracle.RED]
    blue0 = [sites[i] for i, v in enumerate(init_canon) if v == oracle.BLUE]
    observed = []
    engine = cfg["engine"]
    if engine == "fpp-richardson" and model != "richardson":
        raise ConfigError("engine 'fpp-richardson' requires model = 'richardson'")
    if engine != "gillespie" and cfg["graph"] == "cycle":
        raise ConfigError(f"engine {engine!r} does not support graph = 'cycle'")
    for rep in range(cfg["reps"]):
        rep_seed = seed.child("oracle", rep)
        if engine == "gillespie":
            if model == "competition":
                rec = run_competition(red0, blue0, cfg["t"], rep_seed, box=box, mode=mode)
            elif model == "richardson":
                rec = run_richardson(red0 + blue0, cfg["t"], rep_seed, box=box, mode=mode)
            else:
                rec = run_voter(red0, box.shape, cfg["t"], rep_seed, mode=mode)
            observed.append(_observed_state(rec, box))
        elif engine == "event-scan":
            structure = PercolationStructure(box, cfg["t"], rep_seed)
            cr = run_coupled(
                structure, red0, blue0, red0, red0 + blue0, mode=MODE_CLOSED
            )
            rec = {"competition": cr.competition, "richardson": cr.richardson,
                   "voter": cr.voter}[model]
            observed.append(_observed_state(rec, box))
        else:
            fld = EdgeWeightField(rep_seed)
            pf = fpp.passage_times(fld, red0 + blue0, box)
            state = tuple(
                oracle.RED if pf.times[i] <= cfg["t"] else 0 for i in range(box.nsites)
            )
            observed.append(state)
    rows = oracle.compare_engine(gen, dist, observed)
    _write_jsonl(
        out,
        [{"state": list(s), "prob": p, "freq": f, "z": z} for s, p, f, z in rows],
    )
    _write_csv(
        out,
        "summary.csv",
        ["engine", "model", "states", "reps", "max_abs_z"],
        [[engine, model, len(gen.states), cfg["reps"], oracle.max_abs_z(rows)]],
    )


def _run_fpp_dev(cfg, seed: SeedSpec, out: Path):
    def field_for(rep):
        return EdgeWeightField(seed.child("fpp-dev", rep))

    rows, fits = fpp.kesten_experiment(
        field_for,
        cfg["direction"],
        cfg["ns"],
        cfg["s_grid"],
        cfg["reps"],
        cfg["mu_hat"],
        margin=cfg["margin"],
    )
    _write_jsonl(
        out, [{"n": n, "s": s, "freq": f, "reps": r} for n, s, f, r in rows]
    )
    _write_csv(out, "summary.csv", ["n", "s", "freq", "reps"],
               [[n, s, f, r] for n, s, f, r in rows])
    _write_csv(
        out,
        "fit.csv",
        ["n", "fitted_decay_rate"],
        [[n, fits[n] if fits[n] is not None else ""] for n in sorted(fits)],
    )


_RUNNERS = {
    "simulate": _run_simulate,
    "shape": _run_shape,
    "curvature": _run_curvature,
    "stabilize": _run_stabilize,
    "nested": _run_nested,
    "coexist": _run_coexist,
    "dual": _run_dual,
    "oracle-check": _run_oracle_check,
    "fpp-dev": _run_fpp_dev,
}


# ---------------------------------------------------------------------------
# click wiring


@click.group()
@click.version_option(__version__)
def main():
    """Simulation laboratory for lattice growth and competition models."""


def _make_command(kind: str):
    @click.command(name=kind)
    @click.option("--config", "config_path", required=True, type=click.Path())
    @click.option("--seed", "seed_override", type=int, default=None)
    @click.option("--workers", "workers_override", type=int, default=None)
    @click.option("--out", "out_dir", type=click.Path(), default=None)
    def cmd(config_path, seed_override, workers_override, out_dir):
        try:
            try:
                raw = json.loads(Path(config_path).read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"cannot parse config {config_path!r}: {e}")
            cfg = _validate(raw, _SCHEMAS[kind])
            if seed_override is not None:
                cfg["seed"] = seed_override
            if workers_override is not None:
                cfg["workers"] = workers_override
            cfg["workers"] = resolve_workers(cfg["workers"])
            out = Path(out_dir) if out_dir else Path("runs") / kind
            out.mkdir(parents=True, exist_ok=True)
            _write_manifest(out, kind, cfg)
            _RUNNERS[kind](cfg, SeedSpec(cfg["seed"]), out)
        except (ConfigError, GeometryConfigError) as e:
            click.echo(f"config error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except RuntimeAbort as e:
            click.echo(f"runtime abort: {e}", err=True)
            sys.exit(EXIT_RUNTIME)
        click.echo(f"wrote {out}")

    return cmd


for _kind in _RUNNERS:
    main.add_command(_make_command(_kind))
