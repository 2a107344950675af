"""Energies, relative energies and the gaps of the inequality hierarchy.

Conventions
-----------
* ``delta = (v - v~, S - S~)`` and ``R = 1/2 |delta|^2_L2``.
* Spatial integrals are ``h**d * sum`` of plain nodewise products.
* Time integrals over the recorded grid use the backward (right-endpoint)
  rectangle rule, which matches the implicit diffusion and prox stages of
  the solver; the exponent ``kappa(t) = int_0^t K`` uses the trapezoid rule.
* Every ``*_gap`` is ``LHS - RHS`` of an inequality of the form
  ``LHS <= RHS``, so a valid solution gives a gap at or below zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse.linalg as sla

from . import operators as ops
from . import potentials as pot
from .fields import Grid, State, Trajectory, deviatoric_part, lp_norm
from .scenarios import Forcing, PairSample, TestPair, ZeroPair


class InsufficientData(ValueError):
    pass


class OrderingError(ValueError):
    pass


def _mm(A, B):
    return np.einsum("ij...,jk...->ik...", A, B)


def _ip(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    return grid.cell_volume * float(np.sum(a * b))


# -- basic functionals -----------------------------------------------------------

def energy(grid: Grid, state: State) -> float:
    return 0.5 * (_ip(grid, state.v, state.v) + _ip(grid, state.S, state.S))


def relative_energy(grid: Grid, state: State, pair: TestPair | PairSample | State, t: float | None = None) -> float:
    other = pair.sample(grid, state.t if t is None else t) if isinstance(pair, TestPair) else pair
    dv, dS = state.v - other.v, state.S - other.S
    return 0.5 * (_ip(grid, dv, dv) + _ip(grid, dS, dS))


def strong_monitor(grid: Grid, state: State, gamma: float, potential) -> float:
    """``|grad v|^2 + gamma/2 |grad S|^2 + P(S) + 1``."""
    P = pot.total_value(potential, grid, state.S)
    if math.isinf(P):
        return math.inf
    gv = ops.gradient(grid, state.v)
    out = _ip(grid, gv, gv) + P + 1.0
    if gamma > 0:
        gs = ops.gradient(grid, state.S)
        out += 0.5 * gamma * _ip(grid, gs, gs)
    return out


def sample_from_state(grid: Grid, state: State) -> PairSample:
    """Wrap a discrete state as a comparison pair (spatial data only)."""
    z = np.full_like
    return PairSample(
        state.t, state.v, state.S, z(state.v, np.nan), z(state.S, np.nan),
        ops.gradient(grid, state.v), ops.gradient(grid, state.S),
        ops.laplacian(grid, state.v), ops.laplacian(grid, state.S),
    )


# -- regularity weights ------------------------------------------------------------

def serrin_conjugate(r: float) -> float:
    if not r > 3:
        raise ValueError(f"Serrin exponent r must exceed 3, got {r}")
    if math.isinf(r):
        return 2.0
    s = 2 * r / (r - 3)
    assert abs(2 / s + 3 / r - 1) <= 1e-12
    return s


@dataclass(frozen=True)
class ZeroWeight:
    C: float = 0.0
    kind = "zero"


@dataclass(frozen=True)
class WeakStrongWeight:
    """``C (|v~|_r^s + |S~|_p^q + |S~|_p^2)`` with Serrin pairs (r, s), (p, q)."""

    C: float = 1.0
    r: float = 6.0
    p: float = 6.0
    kind = "weak_strong"

    def __post_init__(self):
        if self.C < 0:
            raise ValueError("C must be >= 0")
        serrin_conjugate(self.r), serrin_conjugate(self.p)

    @property
    def s(self) -> float:
        return serrin_conjugate(self.r)

    @property
    def q(self) -> float:
        return serrin_conjugate(self.p)


@dataclass(frozen=True)
class TildeSWeight:
    """``C (|S~|_inf^2 + |grad S~|_3^2)``."""

    C: float = 1.0
    kind = "tilde_s"

    def __post_init__(self):
        if self.C < 0:
            raise ValueError("C must be >= 0")


@dataclass(frozen=True)
class KsWeight:
    """``C (|v~|_r^s + |S~|_inf^2 + |grad S~|_3^2)``."""

    C: float = 1.0
    r: float = 6.0
    kind = "ks"

    def __post_init__(self):
        if self.C < 0:
            raise ValueError("C must be >= 0")
        serrin_conjugate(self.r)

    @property
    def s(self) -> float:
        return serrin_conjugate(self.r)


def weight_from_config(cfg: dict):
    cfg = dict(cfg)
    kind = cfg.pop("kind", "zero")
    cfg.pop("calibrate", None)
    table = {"zero": ZeroWeight, "weak_strong": WeakStrongWeight, "tilde_s": TildeSWeight, "ks": KsWeight}
    if kind not in table:
        raise ValueError(f"unknown weight kind {kind!r}")
    return table[kind](**{k: float(v) for k, v in cfg.items()})


def k_eval(weight, grid: Grid, sample: PairSample) -> float:
    if weight.kind == "zero" or weight.C == 0:
        return 0.0
    v, S = sample.v, sample.S
    if weight.kind == "weak_strong":
        nS = lp_norm(grid, S, weight.p)
        val = lp_norm(grid, v, weight.r) ** weight.s + nS**weight.q + nS**2
    else:
        val = lp_norm(grid, S, np.inf) ** 2 + lp_norm(grid, sample.grad_S, 3) ** 2
        if weight.kind == "ks":
            val += lp_norm(grid, v, weight.r) ** weight.s
    return weight.C * val


def exp_weight(weight, pair: TestPair, grid: Grid, s: float, t: float, dt: float) -> float:
    """``exp(int_s^t K)`` with the trapezoid rule on a grid of spacing ~``dt``."""
    if s > t:
        raise OrderingError(f"s={s} exceeds t={t}")
    if s == t or weight.kind == "zero" or weight.C == 0:
        return 1.0
    m = max(1, int(round((t - s) / dt)))
    ts = np.linspace(s, t, m + 1)
    K = np.array([k_eval(weight, grid, pair.sample(grid, tau)) for tau in ts])
    return math.exp(float(np.sum(0.5 * (K[1:] + K[:-1]) * np.diff(ts))))


# -- strong-form operators of a comparison pair --------------------------------------

def a1_apply(grid: Grid, sample: PairSample, forcing: Forcing | None, mu: float, eta: float) -> np.ndarray:
    """``dt v~ + (v~.grad) v~ - div(eta S~ + 2 mu sym grad v~) - f``; uses
    ``div(2 sym grad v~) = lap v~`` for divergence-free ``v~``."""
    conv = np.einsum("jk...,k...->j...", sample.grad_v, sample.v)
    divS = np.einsum("jkk...->j...", sample.grad_S)
    out = sample.dt_v + conv - eta * divS - mu * sample.lap_v
    if forcing is not None and not forcing.is_zero:
        out = out - forcing(grid, sample.t)
    return out


def a2_apply(grid: Grid, sample: PairSample, gamma: float, eta: float) -> np.ndarray:
    """``dt S~ + (v~.grad) S~ + S~W~ - W~S~ - gamma lap S~ - eta sym grad v~``."""
    adv = np.einsum("ijk...,k...->ij...", sample.grad_S, sample.v)
    W = ops.skew_part(sample.grad_v)
    rot = _mm(sample.S, W) - _mm(W, sample.S)
    return sample.dt_S + adv + rot - gamma * sample.lap_S - eta * ops.sym_part(sample.grad_v)


# -- relative dissipation --------------------------------------------------------------

def _w_parts(grid: Grid, dv, dS, sample: PairSample, form: str) -> dict:
    d = grid.dim
    gdv = ops.gradient(grid, dv)
    conv = sum(dv[l] * gdv[:, l] for l in range(d))
    dW = ops.skew_part(gdv)
    parts = {
        "visc": _ip(grid, gdv, gdv),
        "adv_v": -_ip(grid, conv, sample.v),
        "rot": -_ip(grid, _mm(dS, dW) - _mm(dW, dS), sample.S),
    }
    if form == "gamma":
        gdS = ops.gradient(grid, dS)
        parts["grad_S"] = _ip(grid, gdS, gdS)
        parts["adv_S"] = -_ip(grid, sum(dv[l] * gdS[:, :, l] for l in range(d)), sample.S)
    else:
        parts["grad_S"] = 0.0
        adv = sum(dv[l] * sample.grad_S[:, :, l] for l in range(d))
        parts["adv_S"] = _ip(grid, dS, adv)
    return parts


def w_gamma(grid: Grid, state: State, sample: PairSample, weight, mu: float, gamma: float) -> float:
    dv, dS = state.v - sample.v, state.S - sample.S
    p = _w_parts(grid, dv, dS, sample, "gamma")
    R = 0.5 * (_ip(grid, dv, dv) + _ip(grid, dS, dS))
    return mu * p["visc"] + gamma * p["grad_S"] + p["adv_v"] + p["adv_S"] + p["rot"] + k_eval(weight, grid, sample) * R


def w_zero(grid: Grid, state: State, sample: PairSample, weight, mu: float, return_scale: bool = False):
    """Integrated-by-parts form; only the pair's analytic ``grad S~`` is used."""
    dv, dS = state.v - sample.v, state.S - sample.S
    p = _w_parts(grid, dv, dS, sample, "zero")
    R = 0.5 * (_ip(grid, dv, dv) + _ip(grid, dS, dS))
    KR = k_eval(weight, grid, sample) * R
    val = mu * p["visc"] + p["adv_v"] + p["adv_S"] + p["rot"] + KR
    if return_scale:
        return val, mu * p["visc"] + abs(p["adv_v"]) + abs(p["adv_S"]) + abs(p["rot"]) + KR
    return val


# -- calibration of C --------------------------------------------------------------------

@dataclass
class Calibration:
    C: float
    C_needed: float
    safety: float
    lambda_min: list
    k_unit: list


def _quad_operator(grid: Grid, sample: PairSample, mu: float, gamma: float, form: str):
    """Symmetric operator ``A`` with ``Q0(x) = <x, A x>``, where ``Q0`` is the
    relative dissipation without its ``K R`` term, minus the coercive part
    ``mu/2 |grad dv|^2 + gamma/2 |grad dS|^2`` for the ``gamma`` form.
    Inputs are projected onto divergence-free / deviatoric fields."""
    d = grid.dim
    nv = d * grid.n**d
    shape_v, shape_S = (d,) + grid.shape, (d, d) + grid.shape
    vt, St, gSt = sample.v, sample.S, sample.grad_S
    visc = mu / 2 if form == "gamma" else mu
    D = lambda f: ops.gradient(grid, f)

    def proj(x):
        dv = ops.leray_project(grid, x[:nv].reshape(shape_v))
        dS = deviatoric_part(x[nv:].reshape(shape_S))
        return dv, dS

    def matvec(x):
        dv, dS = proj(np.asarray(x, dtype=float).ravel())
        gdv = D(dv)
        gv = -2 * visc * ops.laplacian(grid, dv)
        gS = np.zeros(shape_S)
        # -<(dv.grad) dv, v~>
        gv -= np.einsum("il...,i...->l...", gdv, vt)
        gv += ops.divergence(grid, np.einsum("l...,j...->jl...", dv, vt))
        # -<dS dW - dW dS, S~>
        dW = ops.skew_part(gdv)
        gS -= _mm(dW, St) - _mm(St, dW)
        gv += ops.divergence(grid, _mm(dS, St) - _mm(St, dS))
        if form == "gamma":
            gdS = D(dS)
            gv -= np.einsum("abl...,ab...->l...", gdS, St)
            gS += ops.divergence(grid, np.einsum("l...,ab...->abl...", dv, St))
            gS -= gamma * ops.laplacian(grid, dS)
        else:
            gv += np.einsum("ab...,abl...->l...", dS, gSt)
            gS += np.einsum("l...,abl...->ab...", dv, gSt)
        pv = ops.leray_project(grid, 0.5 * gv)
        pS = deviatoric_part(0.5 * gS)
        return np.concatenate([pv.ravel(), pS.ravel()])

    n = nv + d * d * grid.n**d
    return sla.LinearOperator((n, n), matvec=matvec, dtype=float), proj


def quad_form(grid: Grid, dv, dS, sample: PairSample, mu: float, gamma: float, form: str) -> float:
    """Direct evaluation of ``Q0`` (see :func:`_quad_operator`)."""
    p = _w_parts(grid, dv, dS, sample, form)
    if form == "gamma":
        return 0.5 * mu * p["visc"] + 0.5 * gamma * p["grad_S"] + p["adv_v"] + p["adv_S"] + p["rot"]
    return mu * p["visc"] + p["adv_v"] + p["adv_S"] + p["rot"]


def min_rayleigh(grid: Grid, sample: PairSample, mu: float, gamma: float, form: str, tol: float = 1e-8) -> float:
    """Smallest value of ``Q0(delta)/|delta|^2`` over divergence-free,
    deviatoric perturbations (Lanczos on the projected operator)."""
    A, _ = _quad_operator(grid, sample, mu, gamma, form)
    x0 = np.random.Generator(np.random.Philox(7)).standard_normal(A.shape[0])
    vals = sla.eigsh(A, k=1, which="SA", tol=tol, v0=x0, maxiter=20 * A.shape[0], return_eigenvectors=False)
    return float(vals[0])


def calibrate(
    weight,
    grid: Grid,
    samples: list[PairSample],
    mu: float,
    gamma: float,
    form: str | None = None,
    safety: float = 2.0,
) -> Calibration:
    """Smallest ``C`` with ``Q0 + C K_unit R >= 0`` at every sample, times ``safety``.

    ``form='gamma'`` targets ``W >= mu/2 |grad dv|^2 + gamma/2 |grad dS|^2``,
    ``form='zero'`` targets ``W_0 >= 0``.
    """
    form = form or ("gamma" if gamma > 0 else "zero")
    unit = replace(weight, C=1.0) if weight.kind != "zero" else weight
    lams, units, need = [], [], 0.0
    for smp in samples:
        lam = min_rayleigh(grid, smp, mu, gamma, form)
        ku = k_eval(unit, grid, smp)
        lams.append(lam)
        units.append(ku)
        if lam < 0:
            if ku <= 0:
                raise ValueError("weight vanishes where the quadratic form is indefinite")
            need = max(need, -2 * lam / ku)
    return Calibration(safety * need, need, safety, lams, units)


# -- time quadrature helpers ---------------------------------------------------------------

def _right_cumsum(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    out = np.zeros_like(f, dtype=float)
    out[1:] = np.cumsum(np.diff(t) * f[1:])
    return out


def _trap_cumsum(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    out = np.zeros_like(f, dtype=float)
    out[1:] = np.cumsum(np.diff(t) * 0.5 * (f[1:] + f[:-1]))
    return out


def _pick(times: np.ndarray, series: np.ndarray, t: float | None):
    if t is None:
        return series
    i = int(np.argmin(np.abs(times - t)))
    if abs(times[i] - t) > 1e-9 * max(1.0, abs(t)):
        raise InsufficientData(f"t={t} is not a recorded time")
    return float(series[i])


def _record_arrays(traj: Trajectory) -> dict:
    if len(traj.records) < 2:
        raise InsufficientData("need at least two diagnostics records")
    recs = traj.records
    return {k: np.array([getattr(r, k) for r in recs]) for k in vars(recs[0])}


# -- energy inequalities ---------------------------------------------------------------------

def energy_inequality_margin(traj: Trajectory, config, t: float | None = None):
    """``E0 + int <f,v> - E(t) - int (mu|grad v|^2 + gamma|grad S|^2 + P(S))``."""
    a = _record_arrays(traj)
    diss = config.mu * a["grad_v_sq"] + config.gamma * a["grad_S_sq"] + a["P_S"]
    m = a["E"][0] + _right_cumsum(a["t"], a["force_work"]) - a["E"] - _right_cumsum(a["t"], diss)
    return _pick(a["t"], m, t)


def energy_balance_residual(traj: Trajectory, config, t: float | None = None):
    """Signed defect of the energy balance, with ``<dP(S), S>`` taken from
    the accumulated prox-stage work."""
    a = _record_arrays(traj)
    diss = config.mu * a["grad_v_sq"] + config.gamma * a["grad_S_sq"]
    r = a["E"] + _right_cumsum(a["t"], diss) + np.cumsum(a["prox_work"]) - a["prox_work"][0] \
        - a["E"][0] - _right_cumsum(a["t"], a["force_work"])
    return _pick(a["t"], r, t)


def partial_stress_margin(traj: Trajectory, config, t: float | None = None):
    """``1/2|S0|^2 + int eta sym grad v : S - 1/2|S(t)|^2 - int (gamma|grad S|^2 + P(S))``."""
    a = _record_arrays(traj)
    grid = traj.grid
    half_S = np.array([0.5 * _ip(grid, s.S, s.S) for s in _states_checked(traj)])
    diss = config.gamma * a["grad_S_sq"] + a["P_S"]
    m = half_S[0] + _right_cumsum(a["t"], a["stress_power"]) - half_S - _right_cumsum(a["t"], diss)
    return _pick(a["t"], m, t)


def _states_checked(traj: Trajectory):
    if len(traj.states) != len(traj.records) or len(traj.states) < 2:
        raise InsufficientData("trajectory must keep a state for every record")
    return traj.states


# -- relative energy inequality ----------------------------------------------------------------

@dataclass
class RelenSeries:
    t: np.ndarray
    R: np.ndarray
    F: np.ndarray
    K: np.ndarray
    kappa: np.ndarray
    gap: np.ndarray
    flagged: bool = False


def relen_series(traj: Trajectory, pair: TestPair, weight, potential, config, form: str | None = None) -> RelenSeries:
    """Gap of the relative energy inequality at every recorded time.

    ``form='gamma'`` uses the diffusive relative dissipation and operator,
    ``form='zero'`` the integrated-by-parts variants without ``gamma``.
    """
    grid = traj.grid
    states = _states_checked(traj)
    form = form or ("gamma" if config.gamma > 0 else "zero")
    gamma = config.gamma if form == "gamma" else 0.0
    n = len(states)
    t, R, F, K = (np.zeros(n) for _ in range(4))
    flagged = False
    for i, st in enumerate(states):
        smp = pair.sample(grid, st.t)
        dv, dS = st.v - smp.v, st.S - smp.S
        t[i] = st.t
        R[i] = 0.5 * (_ip(grid, dv, dv) + _ip(grid, dS, dS))
        K[i] = k_eval(weight, grid, smp)
        if form == "gamma":
            W = w_gamma(grid, st, smp, weight, config.mu, gamma)
        else:
            W = w_zero(grid, st, smp, weight, config.mu)
        PS = pot.total_value(potential, grid, st.S)
        Pt = pot.total_value(potential, grid, smp.S)
        if math.isinf(Pt):
            flagged = True
        A1 = a1_apply(grid, smp, config.forcing, config.mu, config.eta)
        A2 = a2_apply(grid, smp, gamma, config.eta)
        F[i] = W + PS - Pt + _ip(grid, A1, dv) + _ip(grid, A2, dS)
    kappa = _trap_cumsum(t, K)
    if flagged:
        gap = np.full(n, -np.inf)
    else:
        inner = _right_cumsum(t, F * np.exp(-kappa))
        gap = R + np.exp(kappa) * (inner - R[0])
    return RelenSeries(t, R, F, K, kappa, gap, flagged)


def relen_gap(traj, pair, weight, potential, config, t: float | None = None, form: str | None = None):
    s = relen_series(traj, pair, weight, potential, config, form)
    return _pick(s.t, s.gap, t)


def varineq_gap(traj: Trajectory, pair: TestPair, potential, config, t: float | None = None, form: str | None = None):
    """Gap of the evolutionary variational inequality for the stress."""
    grid = traj.grid
    states = _states_checked(traj)
    form = form or ("gamma" if config.gamma > 0 else "zero")
    d = grid.dim
    n = len(states)
    t_arr, half, I = np.zeros(n), np.zeros(n), np.zeros(n)
    for i, st in enumerate(states):
        smp = pair.sample(grid, st.t)
        dS = st.S - smp.S
        t_arr[i] = st.t
        half[i] = 0.5 * _ip(grid, dS, dS)
        Pt = pot.total_value(potential, grid, smp.S)
        if math.isinf(Pt):
            return _pick(t_arr, np.full(n, -np.inf), t) if t is None else -math.inf
        gv = ops.gradient(grid, st.v)
        W = ops.skew_part(gv)
        rot = _mm(st.S, W) - _mm(W, st.S)
        val = _ip(grid, smp.dt_S, dS) + pot.total_value(potential, grid, st.S) - Pt
        val -= _ip(grid, rot, smp.S) + config.eta * _ip(grid, ops.sym_part(gv), dS)
        if form == "gamma":
            gS = ops.gradient(grid, st.S)
            val += config.gamma * (_ip(grid, gS, gS) - _ip(grid, gS, smp.grad_S))
            adv = sum(st.v[l] * gS[:, :, l] for l in range(d))
            val -= _ip(grid, adv, smp.S)
        else:
            adv = sum(st.v[l] * smp.grad_S[:, :, l] for l in range(d))
            val += _ip(grid, st.S, adv)
        I[i] = val
    gap = half - half[0] + _right_cumsum(t_arr, I)
    return _pick(t_arr, gap, t)


# -- weak-strong stability ------------------------------------------------------------------

@dataclass
class WeakStrongSeries:
    t: np.ndarray
    R: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    kappa: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.lhs - self.rhs

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.rhs > 0, self.lhs / self.rhs, np.where(self.lhs > 0, np.inf, 0.0))


def weak_strong_series(weak: Trajectory, strong: Trajectory | TestPair, weight, mu: float, gamma: float) -> WeakStrongSeries:
    """``R(t) + int (mu/2|grad dv|^2 + gamma/2|grad dS|^2) e^{int_s^t K}`` versus
    ``R(0) e^{int_0^t K}``; ``K`` is evaluated on the strong member."""
    grid = weak.grid
    ws = _states_checked(weak)
    if isinstance(strong, Trajectory):
        ss = _states_checked(strong)
        if strong.grid != grid or len(ss) != len(ws) or any(abs(a.t - b.t) > 1e-12 for a, b in zip(ws, ss)):
            raise ValueError("weak and strong trajectories must share grid and time points")
        samples = (sample_from_state(grid, s) for s in ss)
    else:
        samples = (strong.sample(grid, s.t) for s in ws)
    n = len(ws)
    t, R, D, K = (np.zeros(n) for _ in range(4))
    for i, (st, smp) in enumerate(zip(ws, samples)):
        dv, dS = st.v - smp.v, st.S - smp.S
        t[i] = st.t
        R[i] = 0.5 * (_ip(grid, dv, dv) + _ip(grid, dS, dS))
        g = ops.gradient(grid, dv)
        D[i] = 0.5 * mu * _ip(grid, g, g)
        if gamma > 0:
            g = ops.gradient(grid, dS)
            D[i] += 0.5 * gamma * _ip(grid, g, g)
        K[i] = k_eval(weight, grid, smp)
    kappa = _trap_cumsum(t, K)
    lhs = R + np.exp(kappa) * _right_cumsum(t, D * np.exp(-kappa))
    rhs = R[0] * np.exp(kappa)
    return WeakStrongSeries(t, R, lhs, rhs, kappa)


def weak_strong_gap(weak, strong, weight, mu, gamma, t: float | None = None):
    s = weak_strong_series(weak, strong, weight, mu, gamma)
    return _pick(s.t, s.gap, t)


# -- monotonicity in the weight ---------------------------------------------------------------

@dataclass
class MonotonicityResult:
    holds: bool
    ordering_ok: bool
    violation_time: float | None
    gap_K: float
    gap_L: float


def monotonicity_check(traj, weight_K, weight_L, pair, potential, config, tol: float = 0.0, form=None) -> MonotonicityResult:
    """Check that ``gap_K <= tol`` implies ``gap_L <= tol`` when ``K <= L``
    pointwise along the trajectory."""
    sK = relen_series(traj, pair, weight_K, potential, config, form)
    sL = relen_series(traj, pair, weight_L, potential, config, form)
    bad = np.nonzero(sK.K > sL.K * (1 + 1e-12) + 1e-300)[0]
    gK, gL = float(np.max(sK.gap)), float(np.max(sL.gap))
    if bad.size:
        return MonotonicityResult(False, False, float(sK.t[bad[0]]), gK, gL)
    return MonotonicityResult(not (gK <= tol) or gL <= tol, True, None, gK, gL)


__all__ = [
    "energy", "relative_energy", "strong_monitor", "serrin_conjugate", "k_eval", "exp_weight",
    "a1_apply", "a2_apply", "w_gamma", "w_zero", "calibrate", "min_rayleigh", "quad_form",
    "energy_inequality_margin", "energy_balance_residual", "partial_stress_margin",
    "relen_series", "relen_gap", "varineq_gap", "weak_strong_series", "weak_strong_gap",
    "monotonicity_check", "ZeroWeight", "WeakStrongWeight", "TildeSWeight", "KsWeight",
    "ZeroPair", "sample_from_state", "InsufficientData", "OrderingError",
]
