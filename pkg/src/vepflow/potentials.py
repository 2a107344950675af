"""Integral-form dissipation potentials on deviatoric stresses.

Three density variants are supported::

    zero        P(T) = 0
    quadratic   P(T) = a/2 |T|^2
    yield       P(T) = a/2 |T|^2   if |T| <= sigma_yield,  +inf otherwise

All functions accept a single ``(d, d)`` matrix or a ``(d, d, *spatial)``
field and act nodewise; ``|.|`` is the Frobenius norm.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Grid

FEASIBILITY_RTOL = 1e-12
DEVIATORIC_TOL = 1e-10


class InvalidStep(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ZeroPotential:
    kind = "zero"


@dataclass(frozen=True)
class QuadraticPotential:
    a: float = 1.0
    kind = "quadratic"

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("modulus a must be >= 0")


@dataclass(frozen=True)
class YieldPotential:
    a: float = 1.0
    sigma_yield: float = 1.0
    kind = "yield"

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("modulus a must be >= 0")
        if not self.sigma_yield > 0:
            raise ValueError("sigma_yield must be > 0")


Potential = ZeroPotential | QuadraticPotential | YieldPotential


def from_config(cfg: dict) -> Potential:
    kind = cfg.get("kind", "zero")
    if kind == "zero":
        return ZeroPotential()
    if kind == "quadratic":
        return QuadraticPotential(float(cfg.get("a", 1.0)))
    if kind == "yield":
        return YieldPotential(float(cfg.get("a", 1.0)), float(cfg.get("sigma_yield", 1.0)))
    raise ValueError(f"unknown potential kind {kind!r}")


def frob(T: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(T * T, axis=(0, 1)))


def _pairing(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.sum(A * B, axis=(0, 1))


def _check_deviatoric(T: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(T)))) if T.size else 1.0
    asym = np.max(np.abs(T - np.swapaxes(T, 0, 1)))
    tr = np.max(np.abs(np.trace(T, axis1=0, axis2=1)))
    if asym > DEVIATORIC_TOL * scale or tr > DEVIATORIC_TOL * scale:
        raise ValueError("input is not symmetric trace-free")


def pointwise_value(spec: Potential, T: np.ndarray, check: bool = True) -> np.ndarray | float:
    T = np.asarray(T, dtype=float)
    if check:
        _check_deviatoric(T)
    sq = np.sum(T * T, axis=(0, 1))
    if spec.kind == "zero":
        out = np.zeros_like(sq)
    elif spec.kind == "quadratic":
        out = 0.5 * spec.a * sq
    else:
        out = np.where(
            np.sqrt(sq) <= spec.sigma_yield * (1 + FEASIBILITY_RTOL), 0.5 * spec.a * sq, np.inf
        )
    return float(out) if out.ndim == 0 else out


def total_value(spec: Potential, grid: Grid, S: np.ndarray) -> float:
    vals = pointwise_value(spec, S, check=False)
    if np.any(np.isinf(vals)):
        return np.inf
    return grid.cell_volume * float(np.sum(vals))


def prox_pointwise(spec: Potential, tau: float, X: np.ndarray) -> np.ndarray:
    """Minimiser of ``|X - S|^2/(2 tau) + P(S)`` (closed form, radial)."""
    if not tau > 0:
        raise InvalidStep(f"step must be positive, got {tau}")
    X = np.asarray(X, dtype=float)
    if spec.kind == "zero":
        return X.copy()
    Y = X / (1.0 + spec.a * tau)
    if spec.kind == "quadratic":
        return Y
    nx = frob(X)
    ny = nx / (1.0 + spec.a * tau)
    inside = ny <= spec.sigma_yield
    scale = np.where(inside, 1.0 / (1.0 + spec.a * tau), spec.sigma_yield / np.where(nx > 0, nx, 1.0))
    return X * scale


def prox_field(spec: Potential, tau: float, S: np.ndarray) -> np.ndarray:
    return prox_pointwise(spec, tau, S)


def moreau_value(spec: Potential, eps: float, T: np.ndarray) -> np.ndarray | float:
    if not eps > 0:
        raise InvalidStep(f"epsilon must be positive, got {eps}")
    T = np.asarray(T, dtype=float)
    P = prox_pointwise(spec, eps, T)
    D = T - P
    out = pointwise_value(spec, P, check=False) + np.sum(D * D, axis=(0, 1)) / (2 * eps)
    return float(out) if np.ndim(out) == 0 else out


def moreau_grad(spec: Potential, eps: float, T: np.ndarray) -> np.ndarray:
    if not eps > 0:
        raise InvalidStep(f"epsilon must be positive, got {eps}")
    T = np.asarray(T, dtype=float)
    return (T - prox_pointwise(spec, eps, T)) / eps


def conjugate_pointwise(spec: Potential, G: np.ndarray) -> np.ndarray | float:
    G = np.asarray(G, dtype=float)
    ng = frob(G)
    if spec.kind == "zero" or (spec.kind == "quadratic" and spec.a == 0):
        out = np.where(ng == 0, 0.0, np.inf)
    elif spec.kind == "quadratic":
        out = ng**2 / (2 * spec.a)
    else:
        a, s = spec.a, spec.sigma_yield
        if a == 0:
            out = s * ng
        else:
            out = np.where(ng <= a * s, ng**2 / (2 * a), s * ng - 0.5 * a * s**2)
    return float(out) if np.ndim(out) == 0 else out


def random_deviatoric(rng: np.random.Generator, dim: int, size: int | None = None) -> np.ndarray:
    """Standard Gaussian deviatoric matrices, shape ``(dim, dim[, size])``."""
    shape = (dim, dim) if size is None else (dim, dim, size)
    A = rng.standard_normal(shape)
    A = 0.5 * (A + np.swapaxes(A, 0, 1))
    tr = np.trace(A, axis1=0, axis2=1) / dim
    for i in range(dim):
        A[i, i] -= tr
    return A


def subgradient_check(
    spec: Potential,
    T: np.ndarray,
    G: np.ndarray,
    samples: int = 1000,
    rng: np.random.Generator | None = None,
    tol: float = 1e-10,
) -> tuple[bool, float]:
    """Sampled test of ``P(T~) >= P(T) + G:(T~ - T)``.

    Returns ``(passed, worst)`` where ``worst`` is the smallest observed
    slack; a negative value below ``-tol`` falsifies ``G in dP(T)``.
    """
    T = np.asarray(T, dtype=float)
    G = np.asarray(G, dtype=float)
    PT = pointwise_value(spec, T, check=False)
    if not np.isfinite(PT):
        raise DomainError("T lies outside the domain of the potential")
    rng = rng if rng is not None else np.random.Generator(np.random.Philox(0))
    dim = T.shape[0]
    dirs = random_deviatoric(rng, dim, samples)
    dirs /= frob(dirs)
    # mix of local and global perturbations
    radii = np.concatenate(
        [10.0 ** rng.uniform(-6, 0, samples // 2), rng.uniform(0, 2, samples - samples // 2)]
    )
    scale = getattr(spec, "sigma_yield", max(1.0, float(frob(T))))
    cand = T[..., None] + dirs * (radii * scale)
    if spec.kind == "yield":
        nc = frob(cand)
        over = nc > spec.sigma_yield
        cand = np.where(over, cand * (spec.sigma_yield / np.where(over, nc, 1.0)), cand)
    Pc = pointwise_value(spec, cand, check=False)
    slack = Pc - PT - np.sum(G[..., None] * (cand - T[..., None]), axis=(0, 1))
    worst = float(min(np.min(slack), 0.0 if samples == 0 else np.min(slack)))
    return worst >= -tol, worst
