"""Initial data, forcings and analytic comparison pairs.

Randomness always comes from ``numpy.random.Philox`` (a 64-bit
counter-based generator) keyed by an explicit integer seed, so every
recipe is reproducible across machines.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .fields import Grid, State, deviatoric_part, lp_norm


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


# -- velocity and stress recipes ----------------------------------------------

def taylor_green(grid: Grid, amplitude: float = 1.0) -> np.ndarray:
    """``A (sin x cos y, -cos x sin y[, 0])`` scaled to the box length."""
    c = 2 * math.pi / grid.length
    X = grid.coords()
    v = grid.zeros(grid.dim)
    v[0] = amplitude * np.sin(c * X[0]) * np.cos(c * X[1])
    v[1] = -amplitude * np.cos(c * X[0]) * np.sin(c * X[1])
    return v


def random_divfree(grid: Grid, seed: int, decay: float = 2.0, amplitude: float = 1.0) -> np.ndarray:
    """Seeded white noise filtered by ``|k|^-decay``, dealiased and projected."""
    if not decay > 1:
        raise ValueError("decay must exceed 1")
    ws = ops.workspace(grid)
    noise = philox(seed).standard_normal((grid.dim,) + grid.shape)
    filt = np.zeros_like(ws.ksq)
    np.power(ws.ksq, -0.5 * decay, out=filt, where=ws.ksq > 0)
    uh = ws.fwd(noise) * (filt * ws.mask)
    return amplitude * ops.leray_project(grid, ws.inv(uh))


def random_deviatoric_field(grid: Grid, seed: int, decay: float = 2.0) -> np.ndarray:
    ws = ops.workspace(grid)
    noise = philox(seed).standard_normal((grid.dim, grid.dim) + grid.shape)
    filt = np.zeros_like(ws.ksq)
    np.power(ws.ksq, -0.5 * decay, out=filt, where=ws.ksq > 0)
    filt[(0,) * grid.dim] = 1.0
    return deviatoric_part(ws.inv(ws.fwd(noise) * (filt * ws.mask)))


def constant_deviatoric(grid: Grid, tensor) -> np.ndarray:
    T = deviatoric_part(np.asarray(tensor, dtype=float))
    if T.shape != (grid.dim, grid.dim):
        raise ValueError(f"tensor must be {grid.dim}x{grid.dim}")
    return np.broadcast_to(T[(...,) + (None,) * grid.dim], (grid.dim, grid.dim) + grid.shape).copy()


def modulated_stress(grid: Grid, amplitude: float = 0.5, mode: int = 1) -> np.ndarray:
    """Deviatoric field of constant magnitude ``amplitude`` whose principal
    axes turn with ``theta = mode (x + y)``."""
    c = 2 * math.pi / grid.length
    X = grid.coords()
    th = mode * c * (X[0] + X[1])
    S = grid.zeros(grid.dim, grid.dim)
    r = amplitude / math.sqrt(2.0)
    S[0, 0] = r * np.cos(th)
    S[1, 1] = -r * np.cos(th)
    S[0, 1] = S[1, 0] = r * np.sin(th)
    return S


# -- forcing -------------------------------------------------------------------

@dataclass(frozen=True)
class Forcing:
    """Time-independent body force; ``kind`` is ``zero``, ``taylor_green`` or ``shear``."""

    kind: str = "zero"
    amplitude: float = 0.0
    mode: int = 1

    def __post_init__(self):
        if self.kind not in ("zero", "taylor_green", "shear"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.amplitude == 0.0

    def __call__(self, grid: Grid, t: float) -> np.ndarray:
        if self.is_zero:
            return grid.zeros(grid.dim)
        if self.kind == "taylor_green":
            return taylor_green(grid, self.amplitude)
        c = 2 * math.pi / grid.length
        f = grid.zeros(grid.dim)
        f[0] = self.amplitude * np.sin(self.mode * c * grid.coords()[1])
        return f


# -- comparison pairs ------------------------------------------------------------

@dataclass
class PairSample:
    """Analytic data of a comparison pair at one instant, sampled on a grid.

    ``grad_v[j, k] = d_k v_j`` and ``grad_S[i, j, k] = d_k S_ij``.
    """

    t: float
    v: np.ndarray
    S: np.ndarray
    dt_v: np.ndarray
    dt_S: np.ndarray
    grad_v: np.ndarray
    grad_S: np.ndarray
    lap_v: np.ndarray
    lap_S: np.ndarray


class TestPair:
    """Base class; subclasses implement ``sample(grid, t)``."""

    __test__ = False  # keep pytest from collecting it
    name = "pair"

    def sample(self, grid: Grid, t: float) -> PairSample:
        raise NotImplementedError

    def validate(self, grid: Grid, t: float = 0.3, dt: float = 1e-4) -> float:
        """Largest relative mismatch between the supplied time derivatives and
        central differences of the supplied values."""
        a, b, m = self.sample(grid, t - dt), self.sample(grid, t + dt), self.sample(grid, t)
        worst = 0.0
        for lo, hi, d in ((a.v, b.v, m.dt_v), (a.S, b.S, m.dt_S)):
            fd = (hi - lo) / (2 * dt)
            scale = max(np.max(np.abs(d)), np.max(np.abs(m.v)), np.max(np.abs(m.S)), 1e-300)
            worst = max(worst, float(np.max(np.abs(fd - d)) / scale))
        return worst


class ZeroPair(TestPair):
    name = "zero"

    def sample(self, grid: Grid, t: float) -> PairSample:
        d = grid.dim
        z = grid.zeros
        return PairSample(t, z(d), z(d, d), z(d), z(d, d), z(d, d), z(d, d, d), z(d), z(d, d))


@dataclass
class TrigMode:
    wavevector: tuple
    amplitude: np.ndarray
    phase: float = 0.0


class TrigPair(TestPair):
    """Separable pair ``v = e^{alpha t} sum A cos(k.x + phi)`` and
    ``S = e^{beta t} sum B cos(k.x + phi)``; amplitudes are projected to be
    orthogonal to ``k`` (velocity) or deviatoric (stress)."""

    def __init__(self, name, dim, v_modes, s_modes, alpha=0.0, beta=0.0):
        self.name = name
        self.dim = dim
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.v_modes = []
        for m in v_modes:
            k = np.asarray(m.wavevector, dtype=float)
            A = np.asarray(m.amplitude, dtype=float)
            if k.shape != (dim,) or A.shape != (dim,):
                raise ValueError("velocity mode has wrong dimension")
            A = A - k * (k @ A) / (k @ k)
            self.v_modes.append(TrigMode(tuple(m.wavevector), A, m.phase))
        self.s_modes = []
        for m in s_modes:
            B = deviatoric_part(np.asarray(m.amplitude, dtype=float))
            if B.shape != (dim, dim):
                raise ValueError("stress mode has wrong dimension")
            self.s_modes.append(TrigMode(tuple(m.wavevector), B, m.phase))

    def _accumulate(self, grid, modes, rank):
        c = 2 * math.pi / grid.length
        X = grid.coords()
        val = grid.zeros(*([grid.dim] * rank))
        grad = grid.zeros(*([grid.dim] * (rank + 1)))
        lap = grid.zeros(*([grid.dim] * rank))
        for m in modes:
            k = c * np.asarray(m.wavevector, dtype=float)
            arg = sum(k[i] * X[i] for i in range(grid.dim)) + m.phase
            cs, sn = np.cos(arg), np.sin(arg)
            A = m.amplitude[(...,) + (None,) * grid.dim]
            val += A * cs
            lap -= (k @ k) * A * cs
            for l in range(grid.dim):
                grad[(Ellipsis, l) + (slice(None),) * grid.dim] -= k[l] * A * sn
        return val, grad, lap

    def sample(self, grid: Grid, t: float) -> PairSample:
        if grid.dim != self.dim:
            raise ValueError(f"pair {self.name} is {self.dim}D, grid is {grid.dim}D")
        av, bs = math.exp(self.alpha * t), math.exp(self.beta * t)
        V, gV, lV = self._accumulate(grid, self.v_modes, 1)
        M, gM, lM = self._accumulate(grid, self.s_modes, 2)
        return PairSample(
            t, av * V, bs * M, self.alpha * av * V, self.beta * bs * M,
            av * gV, bs * gM, av * lV, bs * lM,
        )


class CorotationalPair(TestPair):
    """Shear flow ``v = (2 omega sin y, 0[, 0])`` with a stress that rotates
    rigidly at the local spin ``w(y) = omega cos y``:
    ``S(y, t) = R(w t) S0 R(w t)^T`` in the (x, y) plane.

    The pair solves the stress transport equation with vanishing right-hand
    side (no diffusion, coupling or plasticity)."""

    name = "corotational"

    def __init__(self, dim: int, omega: float = 0.5, s_amp: float = 0.3, s0=None):
        self.dim = dim
        self.omega = float(omega)
        if s0 is None:
            s0 = np.zeros((dim, dim))
            s0[0, 0], s0[1, 1] = 1.0, -1.0
            s0 = s0 / np.linalg.norm(s0)
        self.S0 = float(s_amp) * deviatoric_part(np.asarray(s0, dtype=float))
        J = np.zeros((dim, dim))
        J[0, 1], J[1, 0] = 1.0, -1.0
        self.J = J

    def _comm(self, S):
        J = self.J
        return np.einsum("ij,jk...->ik...", J, S) - np.einsum("ij...,jk->ik...", S, J)

    def sample(self, grid: Grid, t: float) -> PairSample:
        if grid.dim != self.dim:
            raise ValueError(f"pair is {self.dim}D, grid is {grid.dim}D")
        d = self.dim
        c = 2 * math.pi / grid.length
        y = grid.coords()[1]
        om = self.omega
        w, dw, ddw = om * np.cos(c * y), -om * c * np.sin(c * y), -om * c * c * np.cos(c * y)
        u, du, ddu = 2 * om * np.sin(c * y), 2 * w, 2 * dw

        th = w * t
        ct, st = np.cos(th), np.sin(th)
        R = np.zeros((d, d) + grid.shape)
        R[0, 0], R[0, 1], R[1, 0], R[1, 1] = ct, st, -st, ct
        for i in range(2, d):
            R[i, i] = 1.0
        S = np.einsum("ij...,jk,lk...->il...", R, self.S0, R)
        CS = self._comm(S)
        CCS = self._comm(CS)

        v = grid.zeros(d)
        v[0] = u
        grad_v = grid.zeros(d, d)
        grad_v[0, 1] = du
        lap_v = grid.zeros(d)
        lap_v[0] = ddu
        Wskew = 0.5 * (grad_v - np.swapaxes(grad_v, 0, 1))
        dt_S = np.einsum("ij...,jk...->ik...", Wskew, S) - np.einsum("ij...,jk...->ik...", S, Wskew)
        grad_S = grid.zeros(d, d, d)
        grad_S[:, :, 1] = t * dw * CS
        lap_S = t * ddw * CS + (t * dw) ** 2 * CCS
        return PairSample(t, v, S, grid.zeros(d), dt_S, grad_v, grad_S, lap_v, lap_S)


def corotational_pair(grid: Grid, omega: float = 0.5, s_amp: float = 0.3) -> CorotationalPair:
    return CorotationalPair(grid.dim, omega, s_amp)


def tg_decay_pair(dim: int, amplitude: float = 0.8, rate: float = -0.2, s_amp: float = 0.3) -> TrigPair:
    """Taylor-Green velocity decaying at ``rate`` with a slowly relaxing
    two-mode stress."""
    e = np.eye(dim)
    half = 0.5 * amplitude
    vm = [
        TrigMode(tuple(e[0] + e[1]), half * (e[0] - e[1]), -math.pi / 2),
        TrigMode(tuple(e[0] - e[1]), half * (e[0] + e[1]), -math.pi / 2),
    ]
    B1 = np.zeros((dim, dim)); B1[0, 0], B1[1, 1] = 1.0, -1.0
    B2 = np.zeros((dim, dim)); B2[0, 1] = B2[1, 0] = 1.0
    sm = [
        TrigMode(tuple(e[0]), s_amp / 2 * B1, 0.0),
        TrigMode(tuple(e[1]), s_amp / 2 * B2, 0.3),
    ]
    return TrigPair("tg_decay", dim, vm, sm, alpha=rate, beta=-0.5)


def shear_mode_pair(dim: int, amplitude: float = 0.5, s_amp: float = 0.25) -> TrigPair:
    """Oblique velocity mode ``k = (1, 2)`` paired with a growing stress mode."""
    e = np.eye(dim)
    k = e[0] + 2 * e[1]
    vm = [TrigMode(tuple(k), amplitude * (2 * e[0] - e[1]) / math.sqrt(5), 0.4)]
    B = np.zeros((dim, dim)); B[0, 0], B[1, 1], B[0, 1], B[1, 0] = 0.6, -0.6, 0.8, 0.8
    sm = [TrigMode(tuple(2 * e[0] + e[1]), s_amp * B / np.linalg.norm(B), 1.1)]
    return TrigPair("shear_mode", dim, vm, sm, alpha=0.0, beta=0.1)


PAIR_FACTORIES = {
    "zero": lambda dim: ZeroPair(),
    "corotational": lambda dim: CorotationalPair(dim),
    "tg_decay": tg_decay_pair,
    "shear_mode": shear_mode_pair,
}

SMOOTH_PAIRS = ("corotational", "tg_decay", "shear_mode")


def make_pair(name: str, dim: int) -> TestPair:
    try:
        return PAIR_FACTORIES[name](dim)
    except KeyError:
        raise ValueError(f"unknown test pair {name!r}; known: {sorted(PAIR_FACTORIES)}") from None


# -- scenario specs ------------------------------------------------------------

@dataclass
class ScenarioSpec:
    name: str = "scenario"
    dim: int = 2
    n: int = 64
    length: float = 2 * math.pi
    velocity: dict = field(default_factory=lambda: {"kind": "taylor_green", "amplitude": 1.0})
    stress: dict = field(default_factory=lambda: {"kind": "zero"})
    forcing: dict = field(default_factory=lambda: {"kind": "zero"})

    VELOCITY_KEYS = {"taylor_green": {"amplitude"}, "random_divfree": {"seed", "decay", "amplitude"}, "zero": set()}
    STRESS_KEYS = {"zero": set(), "constant_deviatoric": {"tensor"}, "modulated": {"amplitude", "mode"}}
    FORCING_KEYS = {"zero": set(), "taylor_green": {"amplitude"}, "shear": {"amplitude", "mode"}}

    def __post_init__(self):
        for label, recipe, table in (
            ("velocity", self.velocity, self.VELOCITY_KEYS),
            ("stress", self.stress, self.STRESS_KEYS),
            ("forcing", self.forcing, self.FORCING_KEYS),
        ):
            kind = recipe.get("kind")
            if kind not in table:
                raise ValueError(f"unknown {label} recipe {kind!r}")
            extra = set(recipe) - table[kind] - {"kind"}
            if extra:
                raise ValueError(f"unknown keys for {label} recipe {kind!r}: {sorted(extra)}")

    @property
    def grid(self) -> Grid:
        return Grid(self.dim, self.n, self.length)

    def forcing_fn(self) -> Forcing:
        f = dict(self.forcing)
        return Forcing(f.pop("kind"), float(f.get("amplitude", 0.0)), int(f.get("mode", 1)))

    def initial_state(self) -> State:
        grid = self.grid
        vr, sr = dict(self.velocity), dict(self.stress)
        kind = vr.pop("kind")
        if kind == "taylor_green":
            v = taylor_green(grid, float(vr.get("amplitude", 1.0)))
        elif kind == "random_divfree":
            v = random_divfree(grid, int(vr.get("seed", 0)), float(vr.get("decay", 2.0)), float(vr.get("amplitude", 1.0)))
        else:
            v = grid.zeros(grid.dim)
        kind = sr.pop("kind")
        if kind == "constant_deviatoric":
            S = constant_deviatoric(grid, sr["tensor"])
        elif kind == "modulated":
            S = modulated_stress(grid, float(sr.get("amplitude", 0.5)), int(sr.get("mode", 1)))
        else:
            S = grid.zeros(grid.dim, grid.dim)
        return State(0.0, v, S)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "dim": self.dim, "n": self.n, "length": self.length,
            "velocity": dict(self.velocity), "stress": dict(self.stress), "forcing": dict(self.forcing),
        }


def perturb(state: State, delta: float, seed: int, grid: Grid | None = None) -> tuple[State, float]:
    """Add ``delta`` times unit-L2 smooth noise to both components.

    Returns the perturbed state and the relative energy to the original,
    which equals ``delta**2`` up to roundoff.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if grid is None:
        d = state.v.shape[0]
        grid = Grid(d, state.v.shape[-1])
    if delta == 0:
        return State(state.t, state.v.copy(), state.S.copy()), 0.0
    xv = random_divfree(grid, seed, decay=2.0)
    xv /= lp_norm(grid, xv)
    xs = random_deviatoric_field(grid, seed + 1, decay=2.0)
    xs /= lp_norm(grid, xs)
    v = state.v + delta * xv
    S = state.S + delta * xs
    dv, dS = v - state.v, S - state.S
    R = 0.5 * grid.cell_volume * (float(np.sum(dv * dv)) + float(np.sum(dS * dS)))
    return State(state.t, v, S), R


def gamma_sweep_specs(base, gammas) -> list:
    """One copy of ``base`` (any object with a ``gamma`` attribute, or a
    dict with a ``solver.gamma`` entry) per value in ``gammas``."""
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise ValueError("empty gamma list")
    if any(g <= 0 for g in gammas):
        raise ValueError("sweep values must be positive")
    if any(b >= a for a, b in zip(gammas, gammas[1:])):
        raise ValueError("sweep values must be strictly decreasing")
    out = []
    for g in gammas:
        c = copy.deepcopy(base)
        if isinstance(c, dict):
            c["solver"]["gamma"] = g
        elif hasattr(c, "solver"):
            c.solver.gamma = g
        else:
            c.gamma = g
        out.append(c)
    return out
