"""Command-line front end: ``swirlframe <subcommand> --config scenario.toml --out dir``.

Exit status 0 on success, 1 when the configuration or input fails validation,
2 when a numerical procedure fails (the failing probe is written to
``error.json`` in the output directory).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .atlas import (
    MAP_COLUMNS,
    RATE_COLUMNS,
    StreamlineMap,
    default_time_step,
    laminar_rate_t,
    laminar_rate_x,
    rate_row,
)
from .config import ScenarioConfig, load_config
from .errors import ConfigError, DomainError, SwirlframeError, UncertifiedFieldError
from .fields import (
    InflowProfile,
    default_sample_grid,
    divergence,
    material_acceleration,
    pressure_gradient_certify,
)
from .frenet import FRAME_COLUMNS, sample_frames, torsion_sign_changes
from .identities import (
    SCAN_COLUMNS,
    check_pressure_identities,
    instability_scan,
    key_inequalities,
    rotation_balance,
)
from .report import emit_report
from .trajectory import TRAJECTORY_COLUMNS, integrate_trajectory, reparametrize_arclength

log = logging.getLogger("swirlframe")

SUBCOMMANDS = ("fields", "trace", "atlas", "frames", "identities", "scan")
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2

IDENTITY_COLUMNS = (
    "probe_s", "residual_tau", "residual_n", "residual_rbar", "residual_zbar",
    "probe_t", "relative_tau", "relative_n", "relative_rbar", "relative_zbar",
    "balance", "balance_alternative", "balance_angular_fd",
)
FIELD_COLUMNS = ("r", "z", "t", "v_r", "v_theta", "v_z", "divergence", "a_r", "a_theta", "a_z")


class Run:
    """Carries the config, output directory and the probe currently being evaluated."""

    def __init__(self, cfg: ScenarioConfig, out: Path, threads: int):
        self.cfg = cfg
        self.out = out
        self.threads = max(1, threads)
        self.probe: dict = {}
        self.written: list[Path] = []

    def json(self, name: str, kind: str, report) -> None:
        self.written.append(emit_report(self.out / name, "json", kind=kind, report=report, config_echo=self.cfg.echo()))

    def csv(self, name: str, columns, rows, description: str) -> None:
        self.written.append(emit_report(self.out / name, "csv", columns=columns, rows=rows, description=description))

    @property
    def tol(self):
        return self.cfg.tolerances


def _pair(values, what: str) -> tuple[float, float]:
    if len(values) != 2:
        raise ConfigError(f"{what} needs two values, got {values!r}")
    return float(values[0]), float(values[1])


def _triple(values, what: str) -> tuple[float, float, float]:
    if len(values) != 3:
        raise ConfigError(f"{what} needs (r, theta, z), got {values!r}")
    return tuple(float(v) for v in values)


def run_fields(run: Run) -> None:
    field = run.cfg.field.build()
    sec = run.cfg.fields
    rows = []
    for t in sec.t_values:
        for z in sec.z_values:
            for r in sec.r_values:
                run.probe = {"r": r, "z": z, "t": t}
                v = field.velocity(r, z, t)
                try:
                    div = divergence(field, r, z, t)
                    acc = material_acceleration(field, r, z, t)
                except DomainError:
                    div, acc = math.nan, np.full(3, math.nan)
                rows.append([r, z, t, *v, div, *acc])
    run.csv("fields.csv", FIELD_COLUMNS, rows, f"field {field.name} on the configured grid")
    t_lo, t_hi = min(sec.t_values), max(sec.t_values)
    z_lo, z_hi = min(sec.z_values), max(sec.z_values)
    grid = default_sample_grid(field, (z_lo, z_hi), (t_lo, t_hi))
    cert = pressure_gradient_certify(field, grid, run.tol.certify_tol)
    run.json("fields.json", "fields", {"field": field.name, "params": field.params, "certification": cert,
                                       "points": len(rows)})


def run_trace(run: Run) -> None:
    field = run.cfg.field.build()
    sec = run.cfg.trace
    span = _pair(sec.t_range, "trace.t_range")
    seeds = [_triple(s, "trace seed") for s in sec.seeds]

    def one(seed):
        return integrate_trajectory(field, seed, span, run.tol.rel_tol, run.tol.abs_tol)

    run.probe = {"seeds": seeds, "t_range": span}
    if run.threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=run.threads) as pool:
            trajs = list(pool.map(one, seeds))
    else:
        trajs = [one(s) for s in seeds]
    summary = []
    for i, (seed, traj) in enumerate(zip(seeds, trajs)):
        times = np.linspace(traj.t0, traj.t_end, sec.samples)
        rows = traj.samples(times)
        run.csv(f"trajectory_{i}.csv", TRAJECTORY_COLUMNS, rows, f"trajectory {i} from seed {list(seed)}")
        R, th, Z, s = traj.state(traj.t_end)
        summary.append({"seed": list(seed), "status": traj.status, "t_end": traj.t_end,
                        "end": {"R": R, "Theta": th, "Z": Z, "s": s, "xyz": traj.position(traj.t_end)}})
    run.json("trace.json", "trace", {"field": field.name, "trajectories": summary})


def run_atlas(run: Run) -> None:
    field = run.cfg.field.build()
    sec = run.cfg.atlas
    z_in = None if math.isnan(sec.z_in) else sec.z_in
    run.probe = {"t": sec.t}
    smap = StreamlineMap(field, sec.t, sec.r0_grid, sec.z_grid, z_in, run.tol.rel_tol, run.tol.abs_tol)
    run.csv("map.csv", MAP_COLUMNS, smap.grid_rows(), f"streamline map of {field.name} at t = {sec.t!r}")
    dt = sec.dt
    if math.isnan(dt):
        g = field.params.get("g")
        dt = default_time_step(InflowProfile(g), sec.t) if g is not None else 1e-3
    rates = []
    for r0 in smap.r0_grid:
        for z in smap.z_grid:
            run.probe = {"t": sec.t, "r0": float(r0), "z": float(z)}
            if sec.time_rates:
                rates.append(laminar_rate_t(field, sec.t, dt, r0, z, smap.z_in, run.tol.rel_tol, run.tol.abs_tol))
            else:
                rates.append(laminar_rate_x(smap, r0, z))
    run.csv("rates.csv", RATE_COLUMNS, [rate_row(r) for r in rates], "laminar rates on the map grid")
    L_x = [r.L_x for r in rates]
    L_t = [r.L_t for r in rates if r.L_t is not None]
    run.json("atlas.json", "atlas", {
        "field": field.name, "t": sec.t, "z_in": smap.z_in, "dt": dt,
        "L_x": {"min": min(L_x), "max": max(L_x)},
        "L_t": {"min": min(L_t), "max": max(L_t)} if L_t else None,
    })


def run_frames(run: Run) -> None:
    field = run.cfg.field.build()
    sec = run.cfg.frames
    seed = _triple(sec.seed, "frames.seed")
    traj = integrate_trajectory(field, seed, _pair(sec.t_range, "frames.t_range"), run.tol.rel_tol, run.tol.abs_tol)
    arc = reparametrize_arclength(traj)
    lo, hi = arc.s_range
    s_values = np.linspace(lo, hi, sec.samples)
    frames = []
    for s in s_values:
        run.probe = {"s": float(s)}
        frames.extend(sample_frames(arc, [s]))
    run.csv("frames.csv", FRAME_COLUMNS, [f.as_row() for f in frames], f"Frenet frames along {field.name}")
    kappa = [f.kappa for f in frames]
    run.json("frames.json", "frames", {
        "field": field.name, "seed": list(seed), "status": traj.status, "length": arc.total_length,
        "kappa": {"min": min(kappa), "max": max(kappa)},
        "torsion_sign_changes": torsion_sign_changes(frames),
    })


def run_identities(run: Run) -> None:
    field = run.cfg.field.build()
    sec = run.cfg.identities
    seed = _triple(sec.seed, "identities.seed")
    traj = integrate_trajectory(field, seed, _pair(sec.t_range, "identities.t_range"),
                                run.tol.rel_tol, run.tol.abs_tol)
    fd_steps = [float(h) for h in sec.fd_steps] or None
    reports, rows = [], []
    for t in sec.probes:
        run.probe = {"t": float(t), "seed": list(seed)}
        rep = check_pressure_identities(field, traj, float(t), fd_steps)
        rep.tolerance = run.tol.identity_tol
        bal = rotation_balance(field, traj, float(t))
        ki = key_inequalities(field, traj, float(t))
        reports.append({"identities": rep, "balance": bal, "key_inequalities": ki})
        r, rel = rep.residuals, rep.relative
        rows.append([rep.probe_s, r["tau"], r["n"], r["rbar"], r["zbar"], rep.probe_t,
                     rel["tau"], rel["n"], rel["rbar"], rel["zbar"], bal.balance, bal.alternative, bal.angular_fd])
    run.csv("identities.csv", IDENTITY_COLUMNS, rows, f"pressure identities along {field.name}")
    run.json("identities.json", "identities", {"field": field.name, "seed": list(seed), "probes": reports})


def run_scan(run: Run) -> None:
    params = run.cfg.scan.params(run.tol)
    run.probe = {"family": run.cfg.scan.family}
    if run.cfg.scan.family not in ("swirl_nozzle", "no_swirl"):
        raise ConfigError(f"unknown scan family {run.cfg.scan.family!r}")
    result = instability_scan(params, run.cfg.scan.family, run.threads)
    run.csv("scan.csv", SCAN_COLUMNS, result.rows, f"instability scan, family {result.family}")
    run.json("scan.json", "scan", result)


RUNNERS = {
    "fields": run_fields,
    "trace": run_trace,
    "atlas": run_atlas,
    "frames": run_frames,
    "identities": run_identities,
    "scan": run_scan,
}


def run_scenario(cfg: ScenarioConfig, subcommand: str, out: Path | None = None, threads: int = 1) -> int:
    """Dispatch ``subcommand``; returns the process exit status."""
    out = Path(out if out is not None else cfg.output)
    run = Run(cfg, out, threads)
    try:
        out.mkdir(parents=True, exist_ok=True)
        RUNNERS[subcommand](run)
    except (ConfigError, UncertifiedFieldError) as exc:
        log.error("validation error: %s", exc)
        return EXIT_VALIDATION
    except SwirlframeError as exc:
        log.error("numerical failure at %s: %s", run.probe, exc)
        emit_report(out / "error.json", "json", kind="error", config_echo=cfg.echo(), report={
            "subcommand": subcommand, "error": type(exc).__name__, "message": str(exc), "probe": run.probe,
        })
        return EXIT_NUMERIC
    for path in run.written:
        log.info("wrote %s", path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swirlframe", description="Run a TOML scenario and write CSV/JSON reports.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="TOML scenario file (environment overrides use SWIRLFRAME_SECTION__KEY)")
    parser.add_argument("--out", help="output directory (overrides the config's output)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for seeds and scan points")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        log.error("--threads must be at least 1")
        return EXIT_VALIDATION
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_VALIDATION
    return run_scenario(cfg, args.subcommand, Path(args.out) if args.out else None, args.threads)


if __name__ == "__main__":
    sys.exit(main())
