"""Command line entry point: ``python -m vepflow VERB --config FILE``.

Exit codes: 0 success, 1 a reported check failed, 2 bad arguments or
config, 3 blow-up, 4 I/O error, 5 missing artifacts, 6 oracle failure.
Reports are ``key=value`` lines on stdout, shell-quoted where needed.
"""
from __future__ import annotations

import argparse
import logging
import math
import shlex
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from . import experiments as ex
from . import oracles
from .config import ConfigError, load
from .scenarios import make_pair

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_IO, EXIT_MISSING, EXIT_ORACLE = 0, 1, 2, 3, 4, 5, 6

log = logging.getLogger("vepflow")


def _emit(**kv):
    print(" ".join(f"{k}={_fmt(v)}" for k, v in kv.items()))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return shlex.quote(str(v))


def _load(args):
    cfg = load(args.config)
    if args.out is not None:
        cfg.output.dir = args.out
    if args.record_every is not None:
        if args.record_every < 1:
            raise ConfigError("--record-every must be >= 1")
        cfg.output.record_every = args.record_every
    return cfg


def _dim_note(cfg):
    if cfg.scenario.dim == 2:
        _emit(note="two-dimensional test mode")


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "checkpoints" if cfg.output.checkpoint_every else None
    traj = ex.simulate(cfg, checkpoint_dir=ckpt)
    extra = {}
    if cfg.diagnostics.pairs and traj.states:
        extra, info = ex.relen_columns(cfg, traj)
        if info["calibration"] is not None:
            _emit(quantity="K", weight=info["weight"].kind, C=float(info["weight"].C),
                  C_needed=float(info["calibration"].C_needed))
    ex.write_csv(out / "diagnostics.csv", traj, extra)
    last = traj.records[-1]
    _dim_note(cfg)
    _emit(verb="simulate", t_final=float(last.t), E0=float(traj.records[0].E), E_final=float(last.E),
          en_margin_final=float(last.en_margin), min_en_margin=float(min(r.en_margin for r in traj.records)),
          records=len(traj.records), csv=str(out / "diagnostics.csv"))
    if traj.error:
        _emit(status="blowup", error=traj.error, psi_last=float(last.psi))
        return EXIT_BLOWUP
    return EXIT_OK


def _verify_rows(cfg, traj, kind):
    scfg, pot = cfg.solver_config(), cfg.potential.build()
    E0 = traj.records[0].E
    rows = []
    if kind == "energy":
        m = np.array([r.en_margin for r in traj.records])
        tol = -1e-8 * E0
        rows.append(dict(check="energy", quantity="en_margin", anchor="total energy-dissipation inequality",
                         value=float(m.min()), tol=tol, status="pass" if m.min() >= tol else "fail"))
        return rows
    tol = 0.01 * E0
    if kind == "varineq":
        zero = make_pair("zero", cfg.scenario.dim)
        g0 = np.asarray(dg.varineq_gap(traj, zero, pot, scfg))
        pm = np.asarray(dg.partial_stress_margin(traj, scfg))
        diff = float(np.max(np.abs(g0 + pm)))
        rows.append(dict(check="varineq_reduction", pair="zero", value=diff, tol=1e-9 * max(E0, 1.0),
                         status="pass" if diff <= 1e-9 * max(E0, 1.0) else "fail"))
        for name in cfg.diagnostics.pairs:
            g = np.asarray(dg.varineq_gap(traj, make_pair(name, cfg.scenario.dim), pot, scfg))
            rows.append(dict(check="varineq", quantity="gap", anchor="evolutionary variational inequality",
                             pair=name, value=float(g.max()), tol=tol, status="pass" if g.max() <= tol else "fail"))
        return rows
    zero = make_pair("zero", cfg.scenario.dim)
    g0 = dg.relen_series(traj, zero, dg.ZeroWeight(), pot, scfg).gap
    m = np.array([r.en_margin for r in traj.records])
    diff = float(np.max(np.abs(g0 + m)))
    rows.append(dict(check="relen_reduction", pair="zero", value=diff, tol=1e-9 * max(E0, 1.0),
                     status="pass" if diff <= 1e-9 * max(E0, 1.0) else "fail"))
    if cfg.diagnostics.pairs:
        _, info = ex.relen_columns(cfg, traj)
        for name, s in info["series"].items():
            rows.append(dict(check="relen", quantity="gap", anchor="relative energy inequality", pair=name,
                             weight=info["weight"].kind, C=float(info["weight"].C), K_int=float(s.kappa[-1]),
                             value=float(np.max(s.gap)), tol=tol, status="pass" if np.max(s.gap) <= tol else "fail"))
    return rows


def cmd_verify(args) -> int:
    cfg = _load(args)
    need_states = args.kind in ("varineq", "relen")
    out = Path(cfg.output.dir)
    if args.run:
        out.mkdir(parents=True, exist_ok=True)
        cfg.output.checkpoint_every = cfg.output.record_every if need_states else cfg.output.checkpoint_every
        traj = ex.simulate(cfg, keep_states=False, checkpoint_dir=out / "checkpoints" if cfg.output.checkpoint_every else None)
        ex.write_csv(out / "diagnostics.csv", traj)
    try:
        traj = ex.load_trajectory(out, need_states)
    except ex.MissingArtifacts as exc:
        _emit(status="missing", error=str(exc))
        return EXIT_MISSING
    if traj.grid is None:
        traj.grid = cfg.scenario.grid
    rows = _verify_rows(cfg, traj, args.kind)
    if args.compare:
        try:
            fine = ex.load_trajectory(args.compare, need_states)
        except ex.MissingArtifacts as exc:
            _emit(status="missing", error=str(exc))
            return EXIT_MISSING
        if fine.grid is None:
            fine.grid = cfg.scenario.grid
        fine_cfg = cfg
        if fine.grid != traj.grid:
            fine_cfg = replace(cfg, scenario=replace(cfg.scenario, n=fine.grid.n))
        dtf = fine.records[1].t - fine.records[0].t
        fine_cfg = replace(fine_cfg, solver=replace(cfg.solver, dt=dtf / cfg.output.record_every))
        frows = _verify_rows(fine_cfg, fine, args.kind)
        for a, b in zip(rows, frows):
            pa, pb = max(a["value"], 0.0), max(b["value"], 0.0)
            a["value_fine"] = b["value"]
            a["refinement_ratio"] = math.inf if pb == 0 and pa > 0 else (pa / pb if pb > 0 else 1.0)
    ok = True
    for r in rows:
        _emit(**r)
        ok &= r["status"] == "pass"
    return EXIT_OK if ok else EXIT_CHECK


def cmd_weak_strong(args) -> int:
    cfg = _load(args)
    delta = cfg.weak_strong.delta if args.delta is None else args.delta
    if delta < 0:
        raise ConfigError("delta must be >= 0")
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    res = ex.weak_strong(cfg, delta)
    s = res.series
    ex.write_table(out / "weak_strong.csv", {
        "t": s.t, "relen_R": s.R, "lhs": s.lhs, "rhs": s.rhs, "ws_gap": s.gap, "ratio": s.ratio, "K_int": s.kappa,
    })
    _dim_note(cfg)
    ok = bool(np.all(s.lhs <= 1.05 * s.rhs + 1e-300)) if delta > 0 else bool(np.max(s.R) <= 1e-13)
    _emit(verb="weak-strong", quantity="R,K,gap", anchor="weak-strong stability estimate", delta=float(delta),
          R0=float(res.R0), C=float(res.weight.C), K_int=float(s.kappa[-1]), max_gap=res.max_gap,
          max_ratio=res.max_ratio, max_R=float(np.max(s.R)), status="pass" if ok else "fail")
    if res.base.error or res.weak.error:
        return EXIT_BLOWUP
    return EXIT_OK if ok else EXIT_CHECK


def cmd_gamma_sweep(args) -> int:
    cfg = _load(args)
    if not cfg.sweep.gammas:
        raise ConfigError("[sweep] gammas must be a non-empty list")
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    res = ex.gamma_sweep(cfg, threads=args.threads)
    for g, traj in zip(res.gammas, res.runs):
        sub = out / f"gamma_{g:.0e}"
        sub.mkdir(exist_ok=True)
        ex.write_csv(sub / "diagnostics.csv", traj)
    _dim_note(cfg)
    for i, (cs, cv) in enumerate(zip(res.cauchy_S, res.cauchy_v)):
        _emit(row="cauchy", gamma_a=res.gammas[i], gamma_b=res.gammas[i + 1], S_sup_L2=float(cs), v_sup_L2=float(cv))
    if len(res.cauchy_S) > 1:
        _emit(row="cauchy_trend", strictly_decreasing=res.strictly_decreasing)
    ok = res.strictly_decreasing
    E0 = res.runs[-1].records[0].E
    for name, s in res.relen.items():
        g = float(np.max(s.gap))
        _emit(row="relen", form="gamma=0", gamma=res.gammas[-1], pair=name, weight=res.weight.kind,
              C=float(res.weight.C), K_int=float(s.kappa[-1]), gap=g, tol=0.02 * E0,
              status="pass" if g <= 0.02 * E0 else "fail")
        ok &= g <= 0.02 * E0
    if any(r.error for r in res.runs):
        return EXIT_BLOWUP
    return EXIT_OK if ok else EXIT_CHECK


def cmd_prox_selftest(args) -> int:
    report = oracles.selftest(n=args.samples, seed=args.seed)
    ok = True
    for k, v in report.items():
        good = v <= 1e-6
        ok &= good
        _emit(check=k, worst=float(v), tol=1e-6, status="pass" if good else "fail")
    return EXIT_OK if ok else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vepflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for sweep members")
        sp.add_argument("--record-every", type=int, default=None, help="steps between diagnostics records")
        sp.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("simulate", help="run one scenario and write diagnostics"))
    sp = sub.add_parser("verify", help="evaluate an inequality gap on stored artifacts")
    common(sp)
    sp.add_argument("--kind", choices=["energy", "varineq", "relen"], required=True)
    sp.add_argument("--run", action="store_true", help="produce the artifacts first")
    sp.add_argument("--compare", default=None, help="second output directory (finer resolution)")
    sp = sub.add_parser("weak-strong", help="perturbed-data stability experiment")
    common(sp)
    sp.add_argument("--delta", type=float, default=None)
    common(sub.add_parser("gamma-sweep", help="vanishing stress diffusion sweep"))
    sp = sub.add_parser("prox-selftest", help="closed-form prox/conjugate/Moreau checks")
    common(sp, config=False)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    return p


HANDLERS = {
    "simulate": cmd_simulate, "verify": cmd_verify, "weak-strong": cmd_weak_strong,
    "gamma-sweep": cmd_gamma_sweep, "prox-selftest": cmd_prox_selftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return HANDLERS[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        if getattr(args, "config", None) and not Path(args.config).exists():
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
