"""Operator-splitting time stepper.

One step combines three sub-flows:

* explicit transport, Jaumann rotation and coupling (Heun RK2),
* exact Fourier-space diffusion of ``v`` (rate ``mu``) and ``S`` (rate ``gamma``),
* the proximal map of ``dt * P``, i.e. a backward-Euler step for ``dS/dt in -dP(S)``.

Lie order is explicit, diffusion, prox; Strang wraps the explicit stage in
half steps of the other two.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import operators as ops
from . import potentials as pot
from .fields import Grid, State, Trajectory, deviatoric_part, write_checkpoint
from .scenarios import Forcing

log = logging.getLogger(__name__)

BLOWUP_SPEED = 1e6


class CFLViolation(RuntimeError):
    def __init__(self, courant: float, limit: float):
        super().__init__(f"Courant number {courant:.3g} exceeds {limit:.3g}")
        self.courant = courant


class BlowUp(RuntimeError):
    def __init__(self, t: float, reason: str):
        super().__init__(f"blow-up at t={t:.6g}: {reason}")
        self.t = t


@dataclass
class SolverConfig:
    mu: float = 0.1
    eta: float = 1.0
    gamma: float = 0.1
    dt: float = 1e-3
    t_end: float = 1.0
    cfl_safety: float = 0.5
    splitting: str = "lie"
    dealias: bool = True
    forcing: Forcing = field(default_factory=Forcing)

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.eta < 0 or self.gamma < 0:
            raise ValueError("eta and gamma must be nonnegative")
        if not self.dt > 0 or self.t_end < 0:
            raise ValueError("dt must be positive and t_end nonnegative")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        self.splitting = self.splitting.lower()
        if self.splitting not in ("lie", "strang"):
            raise ValueError(f"unknown splitting {self.splitting!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    grad_v_sq: float
    grad_S_sq: float
    P_S: float
    prox_work: float
    force_work: float
    stress_power: float
    psi: float
    en_margin: float = 0.0


def stable_dt(grid: Grid, state: State, config: SolverConfig) -> float:
    vmax = float(np.max(np.sqrt(np.sum(state.v**2, axis=0))))
    return min(config.dt, config.cfl_safety * grid.h / max(vmax, 1e-12))


def _courant(grid: Grid, v: np.ndarray, dt: float) -> float:
    return float(np.max(np.sqrt(np.sum(v**2, axis=0)))) * dt / grid.h


def tendencies(grid: Grid, v: np.ndarray, S: np.ndarray, t: float, config: SolverConfig):
    d = grid.dim
    G = ops.gradient(grid, v)
    dl = (lambda f: ops.dealias(grid, f)) if config.dealias else (lambda f: f)
    conv = dl(sum(v[j] * G[:, j] for j in range(d)))
    rhs_v = -conv + config.eta * ops.divergence_tensor(grid, S)
    if not config.forcing.is_zero:
        rhs_v = rhs_v + config.forcing(grid, t)
    dv = ops.leray_project(grid, rhs_v)

    # flux form keeps S underived, so gamma = 0 never needs grad S
    if config.dealias:
        adv = ops.advect_flux(grid, v, S)
    else:
        ws = ops.workspace(grid)
        adv = ws.inv(sum(1j * ws.k[j] * ws.fwd(v[j] * S) for j in range(d)))
    rot = dl(ops.jaumann_rotation(S, ops.skew_part(G)))
    dS = deviatoric_part(-adv - rot + config.eta * ops.sym_part(G))
    return dv, dS


def explicit_stage(grid: Grid, state: State, config: SolverConfig, dt: float | None = None):
    """Tendencies ``(dv, dS)``; raises :class:`CFLViolation` when the step
    would exceed the advective Courant limit."""
    dt = config.dt if dt is None else dt
    c = _courant(grid, state.v, dt)
    if c > config.cfl_safety:
        raise CFLViolation(c, config.cfl_safety)
    return tendencies(grid, state.v, state.S, state.t, config)


def _heun(grid, v, S, t, dt, config):
    k1v, k1s = tendencies(grid, v, S, t, config)
    v1, S1 = v + dt * k1v, S + dt * k1s
    k2v, k2s = tendencies(grid, v1, S1, t + dt, config)
    return v + 0.5 * dt * (k1v + k2v), S + 0.5 * dt * (k1s + k2s)


def _diffuse(grid, v, S, dt, config):
    ws = ops.workspace(grid)
    v = ws.inv(ws.fwd(v) * np.exp(-config.mu * ws.ksq * dt))
    if config.gamma > 0:
        S = ws.inv(ws.fwd(S) * np.exp(-config.gamma * ws.ksq * dt))
    return v, S


def diffusion_stage(grid: Grid, state: State, config: SolverConfig, dt: float) -> State:
    if not dt > 0:
        raise ValueError("dt must be positive")
    v, S = _diffuse(grid, state.v, state.S, dt, config)
    return State(state.t, v, S)


def _prox(potential, S, dt):
    if potential.kind == "zero":
        return S, 0.0
    Sa = pot.prox_field(potential, dt, S)
    # dt * <G, S_after> with G = (S_before - S_after)/dt in dP(S_after)
    return Sa, float(np.sum((S - Sa) * Sa))


def prox_stage(grid: Grid, state: State, potential, dt: float) -> tuple[State, float]:
    """Returns the relaxed state and the work ``dt * <G, S_after>_L2``."""
    if not dt > 0:
        raise pot.InvalidStep("dt must be positive")
    S, w = _prox(potential, state.S, dt)
    return State(state.t, state.v, S), w * grid.cell_volume


def _finalize(grid, v, S):
    return ops.leray_project(grid, v), deviatoric_part(S)


def _one_step(grid, v, S, t, dt, config, potential):
    work = 0.0
    if config.splitting == "lie":
        v, S = _heun(grid, v, S, t, dt, config)
        v, S = _diffuse(grid, v, S, dt, config)
        S, work = _prox(potential, S, dt)
    else:
        h = 0.5 * dt
        S, w1 = _prox(potential, S, h)
        v, S = _diffuse(grid, v, S, h, config)
        v, S = _heun(grid, v, S, t, dt, config)
        v, S = _diffuse(grid, v, S, h, config)
        S, w2 = _prox(potential, S, h)
        work = w1 + w2
    v, S = _finalize(grid, v, S)
    return v, S, work * grid.cell_volume


def step(grid: Grid, state: State, config: SolverConfig, potential, dt: float | None = None) -> tuple[State, float]:
    """Advance one step of size ``dt`` (default ``config.dt``).

    Returns the new state and the prox work of the step. Raises
    :class:`CFLViolation` before doing anything if the step is too large
    and :class:`BlowUp` if the result is not finite or too fast.
    """
    dt = config.dt if dt is None else dt
    c = _courant(grid, state.v, dt)
    if c > config.cfl_safety:
        raise CFLViolation(c, config.cfl_safety)
    v, S, work = _one_step(grid, state.v, state.S, state.t, dt, config, potential)
    t = state.t + dt
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(S))):
        raise BlowUp(t, "non-finite values")
    vmax = float(np.max(np.abs(v)))
    if vmax > BLOWUP_SPEED:
        raise BlowUp(t, f"|v|_inf = {vmax:.3g}")
    return State(t, v, S), work


def advance(grid, state, config, potential, dt):
    """One macro step of size ``dt``, split into equal substeps when the
    Courant limit would otherwise reject it."""
    sub = dt / max(1, math.ceil(dt / stable_dt(grid, state, replace(config, dt=dt)) - 1e-9))
    remaining, work = dt, 0.0
    while remaining > 1e-12 * dt:
        h = min(sub, remaining)
        try:
            state, w = step(grid, state, config, potential, h)
        except CFLViolation:
            sub *= 0.5
            log.info("CFL rejection at t=%.6g, substep now %.3g", state.t, sub)
            if sub < 1e-12 * dt:
                raise BlowUp(state.t, "step size underflow") from None
            continue
        work += w
        remaining -= h
    return state, work


def make_record(grid, state, config, potential, prox_work) -> DiagnosticsRecord:
    gv = ops.gradient(grid, state.v)
    grad_v_sq = grid.cell_volume * float(np.sum(gv * gv))
    gs = ops.gradient(grid, state.S)
    grad_S_sq = grid.cell_volume * float(np.sum(gs * gs))
    P = pot.total_value(potential, grid, state.S)
    fw = 0.0
    if not config.forcing.is_zero:
        fw = grid.cell_volume * float(np.sum(config.forcing(grid, state.t) * state.v))
    sp = config.eta * grid.cell_volume * float(np.sum(ops.sym_part(gv) * state.S))
    E = 0.5 * grid.cell_volume * (float(np.sum(state.v**2)) + float(np.sum(state.S**2)))
    psi = grad_v_sq + 0.5 * config.gamma * grad_S_sq + P + 1.0
    return DiagnosticsRecord(state.t, E, grad_v_sq, grad_S_sq, P, prox_work, fw, sp, psi)


def _margin_update(prev: DiagnosticsRecord, rec: DiagnosticsRecord, config, E0, acc):
    """Right-endpoint accumulation of dissipation and forcing work."""
    h = rec.t - prev.t
    acc["diss"] += h * (config.mu * rec.grad_v_sq + config.gamma * rec.grad_S_sq + rec.P_S)
    acc["force"] += h * rec.force_work
    rec.en_margin = E0 + acc["force"] - rec.E - acc["diss"]


def run(
    grid: Grid,
    initial: State,
    config: SolverConfig,
    potential,
    record_every: int = 1,
    keep_states: bool = True,
    checkpoint_dir: str | Path | None = None,
    checkpoint_every: int = 0,
) -> Trajectory:
    """Integrate to ``config.t_end`` at fixed ``config.dt``.

    A record (and, with ``keep_states``, the state) is stored every
    ``record_every`` steps. On blow-up the trajectory up to the last valid
    state is returned with ``error`` set.
    """
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    if initial.v.shape != (grid.dim,) + grid.shape or initial.S.shape != (grid.dim, grid.dim) + grid.shape:
        raise ValueError("initial state does not match the grid")
    state = initial
    rec = make_record(grid, state, config, potential, 0.0)
    rec.en_margin = 0.0
    traj = Trajectory(grid, [state] if keep_states else [], [rec])
    E0, acc = rec.E, {"diss": 0.0, "force": 0.0}
    if checkpoint_dir is not None:
        Path(checkpoint_dir).mkdir(parents=True, exist_ok=True)
        write_checkpoint(Path(checkpoint_dir) / "state_000000.bin", grid, state)
    work = 0.0
    for i in range(1, config.n_steps + 1):
        try:
            state, w = advance(grid, state, config, potential, config.dt)
        except BlowUp as exc:
            traj.error = str(exc)
            log.warning("%s; keeping %d records", exc, len(traj.records))
            break
        # recompute t from the step index to keep the grid exactly uniform
        state = State(i * config.dt, state.v, state.S)
        work += w
        if i % record_every == 0:
            new = make_record(grid, state, config, potential, work)
            _margin_update(traj.records[-1], new, config, E0, acc)
            traj.records.append(new)
            if keep_states:
                traj.states.append(state)
            work = 0.0
        if checkpoint_dir is not None and checkpoint_every and i % checkpoint_every == 0:
            write_checkpoint(Path(checkpoint_dir) / f"state_{i:06d}.bin", grid, state)
    traj.final = state
    return traj
