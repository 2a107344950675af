"""Pseudo-spectral differential operators on the periodic box.

Derivatives act through real FFTs over the trailing spatial axes. The
Nyquist wavenumber is zeroed in every derivative multiplier so that the
discrete gradient is exactly skew-adjoint and ``laplacian == div(grad)``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .fields import Grid, ShapeError


class ContractViolation(ValueError):
    pass


class SpectralWorkspace:
    """Cached wavenumbers and the 2/3-rule mask for one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        n, d = grid.n, grid.dim
        scale = 2 * np.pi / grid.length
        full = np.fft.fftfreq(n, 1.0 / n)
        half = np.fft.rfftfreq(n, 1.0 / n)
        ints = [full] * (d - 1) + [half]
        mesh = np.meshgrid(*ints, indexing="ij")
        self.spectral_shape = mesh[0].shape
        k = []
        for m in mesh:
            kk = scale * m
            kk = np.where(np.abs(m) == n // 2, 0.0, kk)
            k.append(kk)
        self.k = np.stack(k)
        self.ksq = np.sum(self.k**2, axis=0)
        self.mask = np.all([3 * np.abs(m) < n for m in mesh], axis=0)
        self.axes = tuple(range(-d, 0))
        inv = np.zeros_like(self.ksq)
        np.divide(1.0, self.ksq, out=inv, where=self.ksq > 0)
        self.inv_ksq = inv
        for arr in (self.k, self.ksq, self.mask, self.inv_ksq):
            arr.flags.writeable = False

    def fwd(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(f, axes=self.axes)

    def inv(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(fh, s=self.grid.shape, axes=self.axes)


@lru_cache(maxsize=32)
def workspace(grid: Grid) -> SpectralWorkspace:
    return SpectralWorkspace(grid)


def _ncomp(grid: Grid, f: np.ndarray) -> int:
    if f.shape[f.ndim - grid.dim:] != grid.shape:
        raise ShapeError(f"field of shape {f.shape} does not live on grid {grid.shape}")
    return f.ndim - grid.dim


def gradient(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Spectral gradient; the new derivative axis is appended after the
    component axes, so ``gradient(v)[j, k] = d_k v_j``."""
    nc = _ncomp(grid, f)
    ws = workspace(grid)
    fh = np.expand_dims(ws.fwd(f), axis=nc)
    return ws.inv(1j * ws.k * fh)


def divergence(grid: Grid, v: np.ndarray) -> np.ndarray:
    """Divergence of a vector field, or row divergence of a tensor field."""
    nc = _ncomp(grid, v)
    if nc == 0:
        raise ShapeError("divergence needs a vector or tensor field")
    ws = workspace(grid)
    vh = ws.fwd(v)
    return ws.inv(np.sum(1j * ws.k * vh, axis=nc - 1))


def divergence_tensor(grid: Grid, S: np.ndarray) -> np.ndarray:
    if _ncomp(grid, S) != 2:
        raise ShapeError("divergence_tensor expects a (dim, dim, ...) field")
    return divergence(grid, S)


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    _ncomp(grid, f)
    ws = workspace(grid)
    return ws.inv(-ws.ksq * ws.fwd(f))


def sym_part(G: np.ndarray) -> np.ndarray:
    return 0.5 * (G + np.swapaxes(G, 0, 1))


def skew_part(G: np.ndarray) -> np.ndarray:
    return 0.5 * (G - np.swapaxes(G, 0, 1))


def dealias(grid: Grid, f: np.ndarray) -> np.ndarray:
    _ncomp(grid, f)
    ws = workspace(grid)
    return ws.inv(ws.mask * ws.fwd(f))


def advect(grid: Grid, v: np.ndarray, X: np.ndarray, dealiased: bool = True) -> np.ndarray:
    """``(v . grad) X`` with the product formed in physical space."""
    nc = _ncomp(grid, X)
    G = np.moveaxis(gradient(grid, X), nc, 0)
    out = sum(v[j] * G[j] for j in range(grid.dim))
    return dealias(grid, out) if dealiased else out


def advect_flux(grid: Grid, v: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Flux form ``div(X (x) v)``; equals ``advect`` for divergence-free ``v``
    and never differentiates ``X`` itself."""
    nc = _ncomp(grid, X)
    ws = workspace(grid)
    acc = None
    for j in range(grid.dim):
        term = 1j * ws.k[j] * ws.fwd(v[j] * X)
        acc = term if acc is None else acc + term
    return ws.inv(ws.mask * acc)


def _matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("ij...,jk...->ik...", A, B)


def jaumann_rotation(S: np.ndarray, W: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Nodewise ``S W - W S`` for symmetric ``S`` and skew ``W``."""
    if S.shape != W.shape:
        raise ShapeError(f"shape mismatch {S.shape} vs {W.shape}")
    defect = np.max(np.abs(W + np.swapaxes(W, 0, 1))) if W.size else 0.0
    if defect > tol * max(1.0, float(np.max(np.abs(W)))):
        raise ContractViolation(f"W is not skew (defect {defect:.3e})")
    R = _matmul(S, W) - _matmul(W, S)
    return 0.5 * (R + np.swapaxes(R, 0, 1))


def leray_project(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Fourier multiplier ``I - k k^T/|k|^2``; the mean mode passes through."""
    if _ncomp(grid, u) != 1 or u.shape[0] != grid.dim:
        raise ShapeError("leray_project expects a vector field")
    ws = workspace(grid)
    uh = ws.fwd(u)
    kdotu = np.sum(ws.k * uh, axis=0)
    return ws.inv(uh - ws.k * (kdotu * ws.inv_ksq))


def spectral_divergence_norm(grid: Grid, u: np.ndarray) -> float:
    """L2 norm of div u evaluated through Parseval (no physical-space roundoff)."""
    ws = workspace(grid)
    uh = ws.fwd(u)
    dh = np.sum(1j * ws.k * uh, axis=0)
    w = np.full(ws.spectral_shape, 2.0)
    w[..., 0] = 1.0
    if grid.n % 2 == 0:
        w[..., -1] = 1.0
    total = np.sum(w * np.abs(dh) ** 2)
    return float(np.sqrt(grid.cell_volume * total / grid.n**grid.dim))
