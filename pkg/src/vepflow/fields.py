"""Periodic grids, field containers, discrete norms and checkpoint I/O.

Fields are plain numpy arrays with the component axes first and the
spatial axes last:

    scalar    (n,)*dim
    vector    (dim, *spatial)
    tensor    (dim, dim, *spatial)

Quadrature is the periodic trapezoid rule ``h**dim * sum``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ShapeError(ValueError):
    """Raised when two fields do not live on the same grid or rank."""


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    length: float = 2 * math.pi

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def volume(self) -> float:
        return self.length**self.dim

    def coords(self) -> tuple[np.ndarray, ...]:
        """Node coordinates, one array per axis (``indexing='ij'``)."""
        x = np.arange(self.n) * self.h
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def zeros(self, *components: int) -> np.ndarray:
        return np.zeros(tuple(components) + self.shape)


def _check_spatial(grid: Grid, f: np.ndarray) -> None:
    if f.shape[f.ndim - grid.dim:] != grid.shape:
        raise ShapeError(f"field of shape {f.shape} does not live on grid {grid.shape}")


def _component_axes(grid: Grid, f: np.ndarray) -> tuple[int, ...]:
    return tuple(range(f.ndim - grid.dim))


def magnitude(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Pointwise Euclidean/Frobenius magnitude of a field."""
    _check_spatial(grid, f)
    axes = _component_axes(grid, f)
    if not axes:
        return np.abs(f)
    return np.sqrt(np.sum(f * f, axis=axes))


def lp_norm(grid: Grid, f: np.ndarray, p: float = 2) -> float:
    """Discrete L^p norm; ``p=np.inf`` gives the nodewise maximum."""
    if not (p >= 1):
        raise ValueError(f"invalid exponent p={p}; need p >= 1")
    _check_spatial(grid, f)
    if p == np.inf:
        return float(np.max(magnitude(grid, f)))
    if p == 2:
        return math.sqrt(grid.cell_volume * float(np.sum(f * f)))
    return (grid.cell_volume * float(np.sum(magnitude(grid, f) ** p))) ** (1.0 / p)


def inner_product_l2(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    _check_spatial(grid, a)
    return grid.cell_volume * float(np.sum(a * b))


def h1_seminorm(grid: Grid, f: np.ndarray) -> float:
    from .operators import gradient

    return lp_norm(grid, gradient(grid, f), 2)


def deviatoric_part(T: np.ndarray) -> np.ndarray:
    """Symmetric trace-free part of a (dim, dim, ...) tensor field or matrix."""
    if T.ndim < 2 or T.shape[0] != T.shape[1]:
        raise ShapeError(f"expected a square tensor, got shape {T.shape}")
    d = T.shape[0]
    S = 0.5 * (T + np.swapaxes(T, 0, 1))
    tr = np.trace(S, axis1=0, axis2=1) / d
    for i in range(d):
        S[i, i] = S[i, i] - tr
    return S


@dataclass(frozen=True)
class State:
    """Solution pair at one instant: divergence-free ``v`` and deviatoric ``S``."""

    t: float
    v: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        for arr in (self.v, self.S):
            arr.flags.writeable = False


@dataclass
class Trajectory:
    grid: Grid
    states: list[State] = field(default_factory=list)
    records: list = field(default_factory=list)
    error: str | None = None
    final: State | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def check_uniform(self, tol: float = 1e-12) -> None:
        t = self.times
        if len(t) < 2:
            return
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if np.max(np.abs(dt - dt[0])) > tol * max(1.0, abs(t[-1])):
            raise ValueError("trajectory times are not uniformly spaced")

    def index_of(self, t: float) -> int:
        times = self.times
        i = int(np.argmin(np.abs(times - t)))
        if abs(times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a recorded time")
        return i


def write_checkpoint(path: str | Path, grid: Grid, state: State) -> None:
    """One file per state: a JSON header line followed by raw ``<f8`` data."""
    d = grid.dim
    data = np.concatenate([state.v.reshape(d, *grid.shape), state.S.reshape(d * d, *grid.shape)])
    header = {"dim": d, "n": grid.n, "length": grid.length, "t": state.t, "components": d + d * d}
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes(order="C"))


def read_checkpoint(path: str | Path) -> tuple[Grid, State]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        raw = fh.read()
    grid = Grid(header["dim"], header["n"], header["length"])
    d = grid.dim
    if header["components"] != d + d * d:
        raise ValueError(f"unexpected component count {header['components']}")
    data = np.frombuffer(raw, dtype="<f8").reshape((header["components"],) + grid.shape)
    v = data[:d].astype(np.float64)
    S = data[d:].reshape((d, d) + grid.shape).astype(np.float64)
    return grid, State(float(header["t"]), v, S)
