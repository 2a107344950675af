"""Brute-force reference computations for the closed-form potential maps.

These are deliberately slow and generic: a numerical optimizer in an
orthonormal basis of deviatoric matrices, knowing nothing about the radial
structure of the potentials.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from . import potentials as pot


def deviatoric_basis(dim: int) -> np.ndarray:
    """Frobenius-orthonormal basis of symmetric trace-free ``dim x dim`` matrices."""
    out = []
    for i in range(dim - 1):
        # diag(1,..,1,-k,0,..)/norm
        D = np.zeros((dim, dim))
        D[: i + 1, : i + 1] = np.eye(i + 1)
        D[i + 1, i + 1] = -(i + 1)
        out.append(D / np.linalg.norm(D))
    for i in range(dim):
        for j in range(i + 1, dim):
            E = np.zeros((dim, dim))
            E[i, j] = E[j, i] = 1 / math.sqrt(2)
            out.append(E)
    return np.array(out)


def _coords(B, T):
    return np.einsum("bij,ij->b", B, T)


def _solve(spec, B, objective, grad, x0):
    cons = []
    if spec.kind == "yield":
        s2 = spec.sigma_yield**2
        cons = [{"type": "ineq", "fun": lambda c: s2 - c @ c, "jac": lambda c: -2 * c}]
    res = minimize(objective, x0, jac=grad, method="SLSQP", constraints=cons,
                   options={"ftol": 1e-15, "maxiter": 500})
    return res.x


def brute_prox(spec, tau: float, X: np.ndarray) -> np.ndarray:
    B = deviatoric_basis(X.shape[0])
    x = _coords(B, X)
    a = getattr(spec, "a", 0.0)

    def f(c):
        return (c - x) @ (c - x) / (2 * tau) + 0.5 * a * (c @ c)

    def g(c):
        return (c - x) / tau + a * c

    c = _solve(spec, B, f, g, np.zeros_like(x))
    return np.einsum("b,bij->ij", c, B)


def brute_conjugate(spec, G: np.ndarray) -> float:
    """``sup_T G:T - P(T)`` by constrained maximisation; returns ``inf`` when
    the supremum is unbounded (zero potential with ``G != 0``)."""
    a = getattr(spec, "a", 0.0)
    if spec.kind != "yield" and a == 0:
        return 0.0 if np.allclose(G, 0) else math.inf
    B = deviatoric_basis(G.shape[0])
    g = _coords(B, G)

    def f(c):
        return 0.5 * a * (c @ c) - g @ c

    def df(c):
        return a * c - g

    c = _solve(spec, B, f, df, np.zeros_like(g))
    return -f(c)


def fd_moreau_grad(spec, eps: float, T: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of the Moreau envelope along a deviatoric basis."""
    B = deviatoric_basis(T.shape[0])
    out = np.zeros_like(T)
    for E in B:
        d = (pot.moreau_value(spec, eps, T + h * E) - pot.moreau_value(spec, eps, T - h * E)) / (2 * h)
        out += d * E
    return out


def _sample_regimes(rng, dim, n, sigma, tau, a):
    """Matrices inside, near and beyond the prox boundary ``|X| = (1 + a tau) sigma``."""
    B = deviatoric_basis(dim)
    edge = (1 + a * tau) * sigma
    dirs = rng.standard_normal((n, len(B)))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.concatenate([
        rng.uniform(0.0, 0.9, n - 2 * (n // 3)) * edge,
        edge * (1 + rng.uniform(-1e-3, 1e-3, n // 3)),
        rng.uniform(1.1, 4.0, n // 3) * edge,
    ])
    return np.einsum("nb,bij->nij", dirs * radii[:, None], B)


def selftest(n: int = 200, seed: int = 0, dim: int = 3, specs=None) -> dict:
    """Worst errors of the closed forms against the brute-force oracles.

    Returns a mapping ``check name -> worst absolute/relative error``.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    specs = specs or [
        pot.ZeroPotential(), pot.QuadraticPotential(1.0), pot.YieldPotential(1.0, 1.0), pot.YieldPotential(0.0, 1.0),
    ]
    report = {}
    for spec in specs:
        tag = spec.kind + (f"(a={spec.a:g},sigma={spec.sigma_yield:g})" if spec.kind == "yield"
                           else f"(a={spec.a:g})" if spec.kind == "quadratic" else "")
        tau = 1.0
        Xs = _sample_regimes(rng, dim, n, getattr(spec, "sigma_yield", 1.0), tau, getattr(spec, "a", 0.0))
        perr = max(float(np.linalg.norm(pot.prox_pointwise(spec, tau, X) - brute_prox(spec, tau, X))) for X in Xs)
        report[f"prox_abs_err[{tag}]"] = perr

        gerr = 0.0
        for X in Xs[: n // 2]:
            G = pot.moreau_grad(spec, 0.5, X)
            fd = fd_moreau_grad(spec, 0.5, X)
            gerr = max(gerr, float(np.linalg.norm(G - fd) / max(np.linalg.norm(G), 1e-8)))
        report[f"moreau_grad_rel_err[{tag}]"] = gerr

        if spec.kind != "zero" and not (spec.kind == "quadratic" and spec.a == 0):
            cerr = 0.0
            for G in Xs[: n // 2]:
                exact = pot.conjugate_pointwise(spec, G)
                cerr = max(cerr, abs(exact - brute_conjugate(spec, G)) / max(1.0, abs(exact)))
            report[f"conjugate_rel_err[{tag}]"] = cerr
    return report
