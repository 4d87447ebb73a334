"""Cell-centered rectangular grids, the Neumann Laplacian and discrete norms.

Fields are plain ``numpy`` arrays of shape ``grid.shape`` (row-major). Zero
flux is imposed with mirror ghost cells, so the discrete Laplacian is
symmetric, annihilates constants and has zero column sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Rectangle ``prod_d [0, lengths[d]]`` split into ``cells[d]`` cells per axis."""

    lengths: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        lengths = tuple(float(x) for x in np.atleast_1d(self.lengths))
        cells = tuple(int(n) for n in np.atleast_1d(self.cells))
        if len(lengths) != len(cells) or not 1 <= len(cells) <= 3:
            raise ValueError("lengths and cells must have the same length, between 1 and 3")
        if any(n < 1 for n in cells):
            raise ValueError("every axis needs at least one cell")
        if any(not (np.isfinite(x) and x > 0) for x in lengths):
            raise ValueError("lengths must be finite and positive")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "cells", cells)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def measure(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays broadcast to ``shape``."""
        axes = [self.axis_coordinates(d) for d in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def constant(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))


@dataclass
class State:
    """The four fields ``(u, v, w, rho)`` at one instant."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    rho: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        shapes = {np.shape(x) for x in self.fields()}
        if len(shapes) != 1:
            raise ValueError(f"fields must share one grid, got shapes {shapes}")

    def fields(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.u, self.v, self.w, self.rho)

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.w.copy(), self.rho.copy(), self.time)

    @classmethod
    def constant(cls, grid: Grid, point, time: float = 0.0) -> "State":
        u, v, w, rho = (grid.constant(x) for x in point)
        return cls(u, v, w, rho, time)

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> "State":
        return cls.constant(grid, (0.0, 0.0, 0.0, 0.0), time)


def axis_laplacian(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second difference along one axis with mirror ghost cells."""
    n = f.shape[axis]
    out = np.zeros_like(f, dtype=float)
    if n == 1:
        return out
    diff = np.diff(f, axis=axis) / (h * h)
    lo = [slice(None)] * f.ndim
    hi = [slice(None)] * f.ndim
    lo[axis] = slice(0, n - 1)
    hi[axis] = slice(1, n)
    out[tuple(lo)] += diff
    out[tuple(hi)] -= diff
    return out


def laplacian_neumann(f: np.ndarray, grid: Grid) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    out = np.zeros(grid.shape)
    for axis, h in enumerate(grid.spacing):
        out += axis_laplacian(f, axis, h)
    return out


def integral(f: np.ndarray, grid: Grid) -> float:
    return float(np.sum(f) * grid.cell_volume)


def inner(f: np.ndarray, g: np.ndarray, grid: Grid) -> float:
    return float(np.sum(f * g) * grid.cell_volume)


def norm_lp(f: np.ndarray, grid: Grid, p: int = 2) -> float:
    """Midpoint-rule ``L^p`` norm."""
    if p == 2:
        return float(np.sqrt(np.sum(f * f) * grid.cell_volume))
    return float((np.sum(np.abs(f) ** p) * grid.cell_volume) ** (1.0 / p))


def norm_linf(f: np.ndarray) -> float:
    return float(np.max(np.abs(f))) if np.size(f) else 0.0


def h1_seminorm(f: np.ndarray, grid: Grid) -> float:
    """``||grad f||`` from face differences.

    Sums over the ``cells - 1`` interior faces per axis, so that
    ``<-Delta f, f> == h1_seminorm(f)**2`` holds exactly.
    """
    total = 0.0
    for axis, h in enumerate(grid.spacing):
        if f.shape[axis] > 1:
            d = np.diff(f, axis=axis) / h
            total += float(np.sum(d * d))
    return float(np.sqrt(total * grid.cell_volume))


def energy(s: State, grid: Grid, C1: float) -> float:
    """Weighted energy ``C1 ||u||^2 + ||v||^2 + ||w||^2 + ||rho||^2``."""
    vol = grid.cell_volume
    return float(
        (C1 * np.sum(s.u * s.u) + np.sum(s.v * s.v) + np.sum(s.w * s.w) + np.sum(s.rho * s.rho)) * vol
    )


def state_norm_sq(s: State, grid: Grid) -> float:
    """Unweighted ``||g||^2`` in ``L^2(Omega, R^4)``."""
    return energy(s, grid, 1.0)


def h2_surrogate_norm(f: np.ndarray, grid: Grid, eta: float) -> float:
    """``||f|| + eta ||Delta f||``, equivalent to the H2 norm under zero flux."""
    return norm_lp(f, grid, 2) + eta * norm_lp(laplacian_neumann(f, grid), grid, 2)
