"""Composite experiments shared by the command line and the test suite."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .config import RunConfig
from .fields import Grid, State, Trajectory, lp_norm, read_checkpoint
from .scenarios import make_pair, perturb
from .solver import DiagnosticsRecord, run

log = logging.getLogger(__name__)

BASE_COLUMNS = ["t", "E", "grad_v_sq", "grad_S_sq", "P_S", "en_margin", "prox_work", "force_work", "stress_power", "psi"]


def simulate(cfg: RunConfig, keep_states: bool | None = None, checkpoint_dir=None) -> Trajectory:
    grid = cfg.scenario.grid
    if keep_states is None:
        keep_states = bool(cfg.diagnostics.pairs)
    return run(
        grid, cfg.scenario.initial_state(), cfg.solver_config(), cfg.potential.build(),
        record_every=cfg.output.record_every, keep_states=keep_states,
        checkpoint_dir=checkpoint_dir, checkpoint_every=cfg.output.checkpoint_every,
    )


def weight_template(cfg: RunConfig):
    w = cfg.diagnostics.weight
    if w.kind == "zero":
        return dg.ZeroWeight()
    if w.kind == "weak_strong":
        return dg.WeakStrongWeight(w.C, w.r, w.p)
    if w.kind == "tilde_s":
        return dg.TildeSWeight(w.C)
    if w.kind == "ks":
        return dg.KsWeight(w.C, w.r)
    raise ValueError(f"unknown weight kind {w.kind!r}")


def calibration_times(t_end: float, count: int) -> np.ndarray:
    return np.linspace(0.0, t_end, max(1, count))


def calibrate_for_pairs(cfg: RunConfig, grid: Grid, pairs, form: str, weight=None, times=None) -> tuple:
    """Calibrate the configured weight jointly over all pairs and sample times."""
    weight = weight if weight is not None else weight_template(cfg)
    if weight.kind == "zero":
        return weight, None
    if not cfg.diagnostics.weight.calibrate:
        return weight, None
    times = calibration_times(cfg.solver.t_end, cfg.diagnostics.calibration_times) if times is None else times
    samples = [p.sample(grid, float(t)) for p in pairs for t in times]
    gamma = cfg.solver.gamma if form == "gamma" else 0.0
    cal = dg.calibrate(weight, grid, samples, cfg.solver.mu, gamma, form, cfg.diagnostics.safety)
    return replace(weight, C=cal.C), cal


def relen_columns(cfg: RunConfig, traj: Trajectory, form: str | None = None, weight=None) -> tuple[dict, dict]:
    """Per-pair relative-energy columns plus the calibration used."""
    form = form or ("gamma" if cfg.solver.gamma > 0 else "zero")
    pairs = [make_pair(n, cfg.scenario.dim) for n in cfg.diagnostics.pairs]
    if weight is None:
        weight, cal = calibrate_for_pairs(cfg, traj.grid, [p for p in pairs if p.name != "zero"] or pairs, form)
    else:
        cal = None
    pot = cfg.potential.build()
    cols, series = {}, {}
    for p in pairs:
        w = dg.ZeroWeight() if p.name == "zero" else weight
        s = dg.relen_series(traj, p, w, pot, cfg.solver_config(), form)
        series[p.name] = s
        cols[f"relen_R:{p.name}"] = s.R
        cols[f"relen_gap:{p.name}"] = s.gap
        cols[f"K_int:{p.name}"] = s.kappa
    return cols, {"weight": weight, "calibration": cal, "series": series, "form": form}


# -- CSV I/O ----------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, traj: Trajectory, extra: dict | None = None) -> None:
    extra = extra or {}
    cols = BASE_COLUMNS + list(extra)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i, r in enumerate(traj.records):
            row = [_fmt(getattr(r, c)) for c in BASE_COLUMNS]
            row += [_fmt(extra[c][i]) for c in extra]
            w.writerow(row)


def write_table(path, columns: dict) -> None:
    keys = list(columns)
    n = len(columns[keys[0]])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for i in range(n):
            w.writerow([_fmt(columns[k][i]) for k in keys])


def read_records(path) -> list[DiagnosticsRecord]:
    names = [f.name for f in fields(DiagnosticsRecord)]
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(DiagnosticsRecord(**{k: float(row[k]) for k in names}))
    return out


class MissingArtifacts(FileNotFoundError):
    pass


def load_trajectory(out_dir, need_states: bool) -> Trajectory:
    out_dir = Path(out_dir)
    csv_path = out_dir / "diagnostics.csv"
    if not csv_path.is_file():
        raise MissingArtifacts(f"{csv_path} not found")
    records = read_records(csv_path)
    if not records:
        raise MissingArtifacts(f"{csv_path} is empty")
    states, grid = [], None
    if need_states:
        files = sorted((out_dir / "checkpoints").glob("state_*.bin"))
        loaded = [read_checkpoint(f) for f in files]
        by_t = {round(s.t, 12): (g, s) for g, s in loaded}
        for r in records:
            key = round(r.t, 12)
            if key not in by_t:
                raise MissingArtifacts(f"no checkpoint for recorded time t={r.t}")
            grid, s = by_t[key]
            states.append(s)
    else:
        files = sorted((out_dir / "checkpoints").glob("state_*.bin"))
        if files:
            grid = read_checkpoint(files[0])[0]
    return Trajectory(grid, states, records)


# -- composite experiments -----------------------------------------------------------

@dataclass
class WeakStrongResult:
    base: Trajectory
    weak: Trajectory
    R0: float
    weight: object
    calibration: object
    series: dg.WeakStrongSeries

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.series.ratio))

    @property
    def max_gap(self) -> float:
        return float(np.max(self.series.gap))


def weak_strong(cfg: RunConfig, delta: float | None = None, seed: int | None = None,
                base: Trajectory | None = None, weight=None, calibration=None) -> WeakStrongResult:
    """Base run versus a run from perturbed initial data; the base plays
    the strong solution and supplies the weight ``K``."""
    delta = cfg.weak_strong.delta if delta is None else delta
    seed = cfg.weak_strong.seed if seed is None else seed
    grid = cfg.scenario.grid
    scfg, P = cfg.solver_config(), cfg.potential.build()
    every = cfg.output.record_every
    if base is None:
        base = run(grid, cfg.scenario.initial_state(), scfg, P, record_every=every)
    init, R0 = perturb(base.states[0], delta, seed, grid)
    weak = run(grid, init, scfg, P, record_every=every)
    if weight is None:
        weight = dg.WeakStrongWeight(cfg.diagnostics.weight.C, cfg.diagnostics.weight.r, cfg.diagnostics.weight.p)
        if cfg.diagnostics.weight.calibrate:
            idx = np.unique(np.linspace(0, len(base.states) - 1, cfg.diagnostics.calibration_times).round().astype(int))
            samples = [dg.sample_from_state(grid, base.states[i]) for i in idx]
            calibration = dg.calibrate(weight, grid, samples, scfg.mu, scfg.gamma, "gamma", cfg.diagnostics.safety)
            weight = replace(weight, C=calibration.C)
    series = dg.weak_strong_series(weak, base, weight, scfg.mu, scfg.gamma)
    return WeakStrongResult(base, weak, R0, weight, calibration, series)


@dataclass
class SweepResult:
    gammas: list
    runs: list
    cauchy_S: list
    cauchy_v: list
    relen: dict
    weight: object
    calibration: object

    @property
    def strictly_decreasing(self) -> bool:
        c = self.cauchy_S
        return all(b < a for a, b in zip(c, c[1:]))


def _sup_l2_diff(grid, a: Trajectory, b: Trajectory, comp: str) -> float:
    if len(a.states) != len(b.states):
        raise ValueError("sweep members recorded different numbers of states")
    return max(lp_norm(grid, getattr(x, comp) - getattr(y, comp)) for x, y in zip(a.states, b.states))


def gamma_sweep(cfg: RunConfig, threads: int = 1, gammas=None) -> SweepResult:
    """Runs one member per ``gamma`` and evaluates the non-diffusive
    relative energy inequality on the smallest-``gamma`` member."""
    from .scenarios import gamma_sweep_specs

    gammas = list(cfg.sweep.gammas if gammas is None else gammas)
    members = gamma_sweep_specs(cfg, gammas)
    grid = cfg.scenario.grid

    def _one(c):
        return run(grid, c.scenario.initial_state(), c.solver_config(), c.potential.build(),
                   record_every=c.output.record_every)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            runs = list(ex.map(_one, members))
    else:
        runs = [_one(c) for c in members]
    cS = [_sup_l2_diff(grid, a, b, "S") for a, b in zip(runs, runs[1:])]
    cv = [_sup_l2_diff(grid, a, b, "v") for a, b in zip(runs, runs[1:])]
    last_cfg = members[-1]
    relen, weight, cal = {}, None, None
    if cfg.diagnostics.pairs:
        cols, info = relen_columns(last_cfg, runs[-1], form="zero")
        relen = info["series"]
        weight, cal = info["weight"], info["calibration"]
    return SweepResult(gammas, runs, cS, cv, relen, weight, cal)
