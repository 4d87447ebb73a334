"""Command-line entry point: ``memhr {bounds,simulate,verify,oracle,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .bounds import compute_bounds
from .grid import Grid
from .integrator import StepperConfig, homogeneous_trajectory, simulate
from .io import (
    ConfigError, RunConfig, parse_config, write_monitor, write_report, write_snapshot,
)
from .model import PointState
from .verify import check_ode_equivalence, run_ensemble, smooth_random_state

log = logging.getLogger("memhr")


def _set_dotted(doc: dict, key: str, value):
    *parents, leaf = key.split(".")
    node = doc
    for part in parents:
        node = node.setdefault(part, {})
    node[leaf] = value


def _load_doc(path: str, overrides: dict) -> dict:
    doc = json.loads(Path(path).read_text())
    for key, value in overrides.items():
        if value is not None:
            _set_dotted(doc, key, value)
    return doc


def _stepper_overrides(args) -> dict:
    return {"stepper.t_end": getattr(args, "t_end", None), "stepper.dt": getattr(args, "dt", None)}


def cmd_bounds(args) -> int:
    cfg = parse_config(json.dumps(_load_doc(args.config, {})))
    omega = args.omega if args.omega is not None else cfg.grid.measure
    b_norm = args.b_norm if args.b_norm is not None else cfg.ensemble.radius
    bounds = compute_bounds(
        cfg.parameters, omega, b_norm, cfg.embedding.C_hat, cfg.embedding.C_emb, cfg.verify.g_branch
    )
    out = {"bounds": bounds.to_dict(), "parameters": cfg.parameters.to_dict()}
    if cfg.defaults_used:
        out["annotations"] = cfg.annotations()
    text = json.dumps(out, indent=2)
    print(text)
    target = args.out or cfg.outputs.report
    if target:
        Path(target).write_text(text + "\n")
    return 0


def cmd_simulate(args) -> int:
    cfg = parse_config(json.dumps(_load_doc(args.config, _stepper_overrides(args))))
    rng = np.random.default_rng(np.random.SeedSequence(cfg.ensemble.seed).spawn(1)[0])
    s0 = smooth_random_state(rng, cfg.grid, cfg.ensemble.radius)
    stride = cfg.outputs.snapshot_stride if cfg.outputs.snapshot_dir else 0
    traj = simulate(s0, cfg.stepper, cfg.parameters, cfg.grid, snapshot_stride=stride)
    monitor_path = args.monitor or cfg.outputs.monitor or "monitor.csv"
    write_monitor(traj.monitor, monitor_path)
    if stride:
        out_dir = Path(cfg.outputs.snapshot_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, s in enumerate(traj.snapshots):
            write_snapshot(s, cfg.grid, out_dir / f"snapshot_{i:06d}.bin")
    log.info("wrote %d monitor rows to %s", len(traj.monitor), monitor_path)
    return 0


def run_verification(cfg: RunConfig):
    p = cfg.parameters
    report = run_ensemble(
        cfg.ensemble.n_runs, cfg.ensemble.seed, cfg.ensemble.radius, cfg.stepper, p, cfg.grid,
        C_hat=cfg.embedding.C_hat, C_emb=cfg.embedding.C_emb, tol=cfg.verify.tol,
        g_branch=cfg.verify.g_branch,
    )
    v = cfg.verify
    ode_cfg = StepperConfig(dt=v.ode_dt, t_end=v.ode_t_end, diffusion_scheme=cfg.stepper.diffusion_scheme)
    report.records.append(
        check_ode_equivalence(
            PointState(0.0, 0.0, 0.0, 0.0), ode_cfg, p, v.ode_tol,
            grid=Grid((cfg.grid.lengths[0],), (v.ode_cells,)), oracle_dt=v.ode_oracle_dt,
        )
    )
    return report


def _print_report(report, stream=None):
    stream = stream or sys.stdout
    for r in report.records:
        status = "PASS" if r.passed else "FAIL"
        entry = "" if r.entry_time is None else f"  entry={r.entry_time:.6g}"
        print(f"{status}  {r.name:<20} observed={r.observed:.6g}  predicted={r.predicted:.6g}{entry}", file=stream)
    for note in report.notes:
        print(f"note: {note}", file=stream)


def cmd_verify(args) -> int:
    cfg = parse_config(json.dumps(_load_doc(args.config, _stepper_overrides(args))))
    report = run_verification(cfg)
    _print_report(report)
    target = args.report or cfg.outputs.report
    if target:
        write_report(report, target, cfg.annotations())
    return 0 if report.all_passed else 1


def cmd_oracle(args) -> int:
    cfg = parse_config(json.dumps(_load_doc(args.config, {})))
    dt = args.dt if args.dt is not None else cfg.verify.ode_oracle_dt
    s0 = PointState(*args.initial) if args.initial else PointState(0.0, 0.0, 0.0, 0.0)
    times, states = homogeneous_trajectory(s0, dt, args.t_end, cfg.parameters, stride=args.stride)
    out = args.out or "oracle.csv"
    np.savetxt(out, np.column_stack([times, states]), delimiter=",", header="t,u,v,w,rho",
               comments="", fmt="%.17g")
    log.info("wrote %d oracle rows to %s", len(times), out)
    return 0


def _sweep_one(config_text: str, out_dir: str):
    cfg = parse_config(config_text)
    report = run_verification(cfg)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    write_report(report, Path(out_dir) / "report.json", cfg.annotations())
    failing = [r.name for r in report.records if not r.passed]
    return report.all_passed, failing


def cmd_sweep(args) -> int:
    values = [float(x) for x in args.values.split(",") if x.strip()]
    base = _load_doc(args.config, _stepper_overrides(args))
    jobs = []
    for value in values:
        doc = json.loads(json.dumps(base))
        _set_dotted(doc, args.param, value)
        jobs.append((json.dumps(doc), str(Path(args.out_dir) / f"{args.param}={value:g}")))
    for text, _ in jobs:
        parse_config(text)  # fail fast on invalid values
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_sweep_one, *zip(*jobs)))
    else:
        results = [_sweep_one(text, out) for text, out in jobs]
    print(f"{args.param:>12}  all_pass  failing")
    rows = []
    for value, (passed, failing) in zip(values, results):
        print(f"{value:>12g}  {str(passed):<8}  {','.join(failing) or '-'}")
        rows.append({"value": value, "all_pass": passed, "failing": failing})
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    (Path(args.out_dir) / "summary.json").write_text(
        json.dumps({"param": args.param, "rows": rows}, indent=2) + "\n"
    )
    return 0 if all(p for p, _ in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memhr", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="evaluate every dissipativity and attractor constant")
    p.add_argument("--config", required=True)
    p.add_argument("--omega", type=float, help="domain measure (default: from grid)")
    p.add_argument("--b-norm", type=float, help="radius of the initial set (default: ensemble.radius)")
    p.add_argument("--out", help="write the bound report here")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="run one simulation and write the monitor CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--monitor", help="monitor CSV path (overrides outputs.monitor)")
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="ensemble and ODE-equivalence checks; exit 0 iff all pass")
    p.add_argument("--config", required=True)
    p.add_argument("--report", help="report JSON path (overrides outputs.report)")
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="homogeneous RK4 time series to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--initial", type=float, nargs=4, metavar=("U", "V", "W", "RHO"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="repeat verify over values of one parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, help="parameter name, dotted for sections (stepper.dt)")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out-dir", default="sweep")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt", type=float)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
