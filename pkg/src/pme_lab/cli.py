"""Experiment runner: subcommand dispatch, run directories, manifests.

Every run writes into a timestamped directory under the runs root
(`./runs` or $PME_LAB_RUNS_DIR) containing `manifest.json` plus the
subcommand's outputs (trace.csv, report.json, ...).  Runs are free of
randomness: identical config and version give byte-identical numeric
outputs.

Exit codes: 1 usage, 2 validation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import datetime as _dt
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, asymptotics, config as cfgmod, hw_profile, selfsimilar
from . import stationary_profiles as stat
from .errors import ConfigError, NumericsError
from .pme_solver import FrontTrace, Grid, State, evolve
from .threshold import bisect_lambda, classify


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and (np.isnan(obj) or np.isinf(obj)):
        return repr(obj)
    return obj


def runs_root() -> Path:
    return Path(os.environ.get("PME_LAB_RUNS_DIR", "runs"))


def _make_run_dir(subcommand: str) -> Path:
    root = runs_root()
    root.mkdir(parents=True, exist_ok=True)
    stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    base = root / f"{stamp}-{subcommand}"
    path = base
    k = 1
    while path.exists():
        path = Path(f"{base}-{k}")
        k += 1
    path.mkdir()
    return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def run(subcommand: str, cfg: cfgmod.ExperimentConfig) -> dict:
    """Dispatch a subcommand, persist outputs, and return the manifest."""
    handlers = {
        "solve": _cmd_solve,
        "shoot-xi": _cmd_shoot_xi,
        "profile-qb": _cmd_profile_qb,
        "hw-profile": _cmd_hw_profile,
        "find-lambda": _cmd_find_lambda,
        "asymptotics": _cmd_asymptotics,
        "sweep": _cmd_sweep,
    }
    if subcommand not in handlers:
        raise UsageError(f"unknown subcommand {subcommand!r}")
    run_dir = _make_run_dir(subcommand)
    started = time.time()
    outputs = handlers[subcommand](cfg, run_dir)
    finished = time.time()
    manifest = {
        "subcommand": subcommand,
        "artifact_version": __version__,
        "config": cfgmod.serialize(cfg),
        "started_at": started,
        "finished_at": finished,
        "outputs": [{"path": str(p.relative_to(run_dir)), "sha256": _sha256(p)}
                    for p in sorted(outputs)],
        "determinism": "no randomness used; identical config and version "
                       "reproduce identical output digests",
        "run_dir": str(run_dir),
    }
    _write_json(run_dir / "manifest.json", manifest)
    return manifest


def _cmd_solve(cfg, run_dir: Path):
    spec = cfg.reaction.to_spec()
    grid = Grid.symmetric(cfg.grid.x_max, cfg.grid.n)
    psi = cfg.psi.to_shape()
    u0 = State(0.0, cfg.solve.lam * psi.sample(grid.x()))
    trace = evolve(u0, spec, grid, cfg.run.horizon, cfg.run.sample_every,
                   safety=cfg.run.safety, with_reaction=cfg.solve.with_reaction,
                   snapshot_stride=cfg.solve.snapshot_stride)
    trace_path = run_dir / "trace.csv"
    trace.to_csv(trace_path)
    outputs = [trace_path]
    if cfg.solve.snapshot_stride:
        snap_dir = run_dir / "snapshots"
        snap_dir.mkdir()
        for s in trace.snapshots:
            p = snap_dir / f"t{s.t:.6f}.csv"
            with open(p, "w") as fh:
                fh.write("x,u\n")
                for xv, uv in zip(s.x, s.u):
                    fh.write(f"{float(xv)!r},{float(uv)!r}\n")
            outputs.append(p)
    verdict = classify(trace, spec)
    report = {"verdict": verdict.kind, "certificate": verdict.certificate,
              "samples": len(trace), "final_time": trace.t[-1],
              "final_r": trace.r[-1], "meta": trace.meta}
    rp = run_dir / "report.json"
    _write_json(rp, report)
    outputs.append(rp)
    return outputs


def _cmd_shoot_xi(cfg, run_dir: Path):
    spec = cfg.reaction.to_spec()
    profile = selfsimilar.shoot_xi(spec.m, spec.theta, tol=cfg.shoot_xi.tol)
    report = {"m": spec.m, "theta": spec.theta, "y0": profile.y0,
              "upper_bound": spec.theta ** ((spec.m - 1.0) / 2.0)}
    rp = run_dir / "report.json"
    _write_json(rp, report)
    outputs = [rp]
    print(f"y0 = {profile.y0!r}")
    if cfg.shoot_xi.dump_table:
        tp = run_dir / "xi_table.csv"
        with open(tp, "w") as fh:
            fh.write("y,xi\n")
            for y, v in zip(profile.ys, profile.xi):
                fh.write(f"{float(y)!r},{float(v)!r}\n")
        outputs.append(tp)
    return outputs


def _cmd_profile_qb(cfg, run_dir: Path):
    spec = cfg.reaction.to_spec()
    bs = [float(v) for v in cfg.profile_qb.b_list.split(",") if v.strip()]
    table_path = run_dir / "widths.csv"
    outputs = [table_path]
    rows = []
    with open(table_path, "w") as fh:
        fh.write("b,l_b,L_b,slope_at_l\n")
        for b in bs:
            prof = stat.shoot_qb(spec, b)
            fh.write(f"{b!r},{prof.l_b!r},{prof.L_b!r},{prof.slope_at_l!r}\n")
            rows.append({"b": b, "l_b": prof.l_b, "L_b": prof.L_b,
                         "slope_at_l": prof.slope_at_l})
            if cfg.profile_qb.dump_profiles:
                pp = run_dir / f"qb_b{b!r}.csv"
                with open(pp, "w") as ph:
                    ph.write("x,Q\n")
                    for xv, qv in zip(prof.xs, prof.Qs):
                        ph.write(f"{xv!r},{qv!r}\n")
                outputs.append(pp)
    rp = run_dir / "report.json"
    _write_json(rp, {"widths": rows})
    outputs.append(rp)
    return outputs


def _cmd_hw_profile(cfg, run_dir: Path):
    spec = cfg.reaction.to_spec()
    p = cfg.hw_profile.p
    gamma = cfg.hw_profile.gamma_frac * hw_profile.gamma_max(p)
    Y = cfg.hw_profile.Y or None
    prof = hw_profile.solve_phi(p, spec.m, spec.theta, gamma, Y)
    consistency = hw_profile.estimate_A_consistency(prof)
    rp = run_dir / "report.json"
    _write_json(rp, {"p": p, "gamma": gamma, "A": prof.A, "Y": prof.Y,
                     "plateau_slope": prof.plateau_slope,
                     "consistency": consistency})
    tp = run_dir / "phi_table.csv"
    with open(tp, "w") as fh:
        fh.write("y,phi,dphi\n")
        for y, f1, f2 in zip(prof.ys, prof.phi, prof.dphi):
            fh.write(f"{float(y)!r},{float(f1)!r},{float(f2)!r}\n")
    print(f"A = {prof.A!r}")
    return [rp, tp]


def _cmd_find_lambda(cfg, run_dir: Path):
    spec = cfg.reaction.to_spec()
    grid = Grid.symmetric(cfg.grid.x_max, cfg.grid.n)
    psi = cfg.psi.to_shape()
    bracket = bisect_lambda(
        psi, spec, grid, cfg.run.horizon, cfg.find_lambda.tol,
        sample_every=cfg.run.sample_every, safety=cfg.run.safety,
        dwell=cfg.find_lambda.dwell_frac * cfg.run.horizon,
        extend_factor=cfg.find_lambda.extend_factor)
    rp = run_dir / "report.json"
    _write_json(rp, {
        "lambda_lo": bracket.lambda_lo, "lambda_hi": bracket.lambda_hi,
        "midpoint": bracket.midpoint, "rel_width": bracket.rel_width,
        "iterations": bracket.iterations, "psi": bracket.psi.ident,
        "monotone": bracket.monotone_audit(),
        "note": "spreading verdicts are heuristic; see certificate texts",
        "probes": bracket.probes,
    })
    print(f"lambda in [{bracket.lambda_lo!r}, {bracket.lambda_hi!r}]")
    return [rp]


def _cmd_asymptotics(cfg, run_dir: Path):
    spec = cfg.reaction.to_spec()
    if not cfg.asymptotics.trace:
        raise ConfigError(["[asymptotics] trace path is required"])
    outputs = []
    reports = []
    for idx, path in enumerate(cfg.asymptotics.trace.split(",")):
        trace = FrontTrace.from_csv(path.strip(), spec=spec)
        y0 = cfg.asymptotics.y0
        if not y0:
            y0 = selfsimilar.shoot_xi(spec.m, spec.theta).y0
        p = spec.p
        rep = {"trace": path.strip(), "y0": y0}
        try:
            fit = asymptotics.fit_sqrt_law(trace)
            rep["y0_fit"] = fit.y0_fit
        except Exception as e:  # window may be too short; report, don't die
            rep["y0_fit_error"] = str(e)
        try:
            corr = asymptotics.fit_correction(trace, y0)
            rep["q_fit"] = corr.q_fit
            rep["q_stderr"] = corr.stderr
            rep["corridor"] = [0.5 - 1.0 / (p - 1.0) - 0.05,
                               0.5 - 1.0 / (p + 1.0) + 0.05]
            if not corr.unresolved and not np.isnan(corr.q_fit):
                rep["corridor_verdict"] = bool(
                    rep["corridor"][0] <= corr.q_fit <= rep["corridor"][1])
            bounds = asymptotics.check_bounds(trace, y0, p)
            rep["H_fit"] = bounds.H_fit
            rep["h_fit"] = bounds.h_fit
            rep["unshifted_min"] = bounds.unshifted_min
            sel, win = asymptotics.trailing_window(trace)
            t = trace.t[sel]
            lead = 2.0 * y0 * np.sqrt(t)
            upper = lead + bounds.H_fit * t ** (0.5 - 1.0 / (p + 1.0))
            if p > 3.0:
                lower = lead + bounds.h_fit * t ** (0.5 - 1.0 / (p - 1.0))
            else:
                lower = lead - bounds.h_fit
            cp = run_dir / f"corridor_{idx}.csv"
            with open(cp, "w") as fh:
                fh.write("t,r,lead,corr,lower_bound,upper_bound\n")
                for row in zip(t, trace.r[sel], lead, trace.r[sel] - lead,
                               lower, upper):
                    fh.write(",".join(repr(float(v)) for v in row) + "\n")
            outputs.append(cp)
        except Exception as e:
            rep["bounds_error"] = str(e)
        reports.append(rep)
    rp = run_dir / "report.json"
    _write_json(rp, {"reports": reports})
    outputs.append(rp)
    return outputs


def _sweep_cell(args):
    serialized, command, overrides = args
    cfg = cfgmod.parse_config(serialized)
    for path, value in overrides:
        cfgmod.apply_override(cfg, path, value)
    manifest = run(command, cfg)
    return overrides, manifest


def _cmd_sweep(cfg, run_dir: Path):
    grid_spec = cfgmod.parse_vary(cfg.sweep.vary)
    command = cfg.sweep.command
    if command == "sweep":
        raise ConfigError(["[sweep] command cannot be 'sweep'"])
    paths = sorted(grid_spec)
    cells = [[]]
    for path in paths:
        cells = [cell + [(path, v)] for cell in cells for v in grid_spec[path]]
    if not grid_spec:
        cells = []
    base = cfgmod.serialize(cfg)
    results = []
    if cfg.sweep.workers > 1 and len(cells) > 1:
        with concurrent.futures.ProcessPoolExecutor(cfg.sweep.workers) as ex:
            futs = [ex.submit(_sweep_cell, (base, command, cell)) for cell in cells]
            for cell, fut in zip(cells, futs):
                try:
                    results.append((cell, fut.result(), None))
                except Exception as e:
                    results.append((cell, None, str(e)))
    else:
        for cell in cells:
            try:
                results.append((cell, _sweep_cell((base, command, cell))[1], None))
            except Exception as e:
                results.append((cell, None, str(e)))

    summary = run_dir / "summary.csv"
    with open(summary, "w") as fh:
        fh.write(",".join(paths + ["status", "run_dir"]) + "\n")
        for cell, manifest, err in results:
            vals = [v for _, v in cell]
            if err is None:
                fh.write(",".join(vals + ["ok", manifest["run_dir"]]) + "\n")
            else:
                fh.write(",".join(vals + ["failed", ""]) + "\n")
    rp = run_dir / "report.json"
    _write_json(rp, {"cells": len(cells),
                     "failures": [{"cell": c, "error": e}
                                  for c, _, e in results if e is not None]})
    return [summary, rp]


def build_parser() -> _Parser:
    parser = _Parser(prog="pme-lab", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, **flags):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        for flag, kw in flags.items():
            sp.add_argument(flag, **kw)
        return sp

    add("solve", **{"--lam": dict(type=float, default=None)})
    add("shoot-xi", **{"--m": dict(type=float, default=None),
                       "--theta": dict(type=float, default=None),
                       "--dump-table": dict(action="store_true")})
    add("profile-qb", **{"--b-list": dict(default=None)})
    add("hw-profile", **{"--p": dict(type=float, default=None),
                         "--m": dict(type=float, default=None),
                         "--theta": dict(type=float, default=None),
                         "--gamma": dict(type=float, default=None),
                         "--Y": dict(type=float, default=None)})
    add("find-lambda", **{"--tol": dict(type=float, default=None)})
    add("asymptotics", **{"--trace": dict(default=None),
                          "--y0": dict(type=float, default=None)})
    add("sweep", **{"--workers": dict(type=int, default=None)})
    return parser


def _load_config(args) -> cfgmod.ExperimentConfig:
    if args.config:
        cfg = cfgmod.parse_config(Path(args.config).read_text())
    else:
        cfg = cfgmod.ExperimentConfig()
    if getattr(args, "lam", None) is not None:
        cfg.solve.lam = args.lam
    if getattr(args, "m", None) is not None:
        cfg.reaction.m = args.m
    if getattr(args, "theta", None) is not None:
        cfg.reaction.theta = args.theta
    if getattr(args, "dump_table", False):
        cfg.shoot_xi.dump_table = True
    if getattr(args, "b_list", None) is not None:
        cfg.profile_qb.b_list = args.b_list
    if getattr(args, "p", None) is not None:
        cfg.hw_profile.p = args.p
    if getattr(args, "gamma", None) is not None:
        gm = hw_profile.gamma_max(cfg.hw_profile.p)
        cfg.hw_profile.gamma_frac = args.gamma / gm
    if getattr(args, "Y", None) is not None:
        cfg.hw_profile.Y = args.Y
    if getattr(args, "tol", None) is not None:
        cfg.find_lambda.tol = args.tol
    if getattr(args, "trace", None) is not None:
        cfg.asymptotics.trace = args.trace
    if getattr(args, "y0", None) is not None:
        cfg.asymptotics.y0 = args.y0
    if getattr(args, "workers", None) is not None:
        cfg.sweep.workers = args.workers
    # re-validate after overrides
    errors: list[str] = []
    cfgmod._validate(cfg, errors)
    if errors:
        raise ConfigError(errors)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    try:
        cfg = _load_config(args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        manifest = run(args.subcommand, cfg)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (NumericsError, ValueError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    print(f"run dir: {manifest['run_dir']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
