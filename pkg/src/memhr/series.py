"""Per-sample norms and energies of a trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, State, h1_seminorm, h2_surrogate_norm, norm_linf

COLUMNS = (
    "t", "energy", "l4u4", "l6u6", "linf_u", "h1semi2_u",
    "l2v", "l2w", "l2rho", "sup_v", "sup_w", "sup_rho", "h2surr_u",
)
_INDEX = {name: i for i, name in enumerate(COLUMNS)}


def monitor_row(s: State, grid: Grid, C1: float, eta: float) -> np.ndarray:
    vol = grid.cell_volume
    u2 = s.u * s.u
    l2v2 = float(np.sum(s.v * s.v) * vol)
    l2w2 = float(np.sum(s.w * s.w) * vol)
    l2r2 = float(np.sum(s.rho * s.rho) * vol)
    return np.array([
        s.time,
        C1 * float(np.sum(u2) * vol) + l2v2 + l2w2 + l2r2,
        float(np.sum(u2 * u2) * vol),
        float(np.sum(u2 * u2 * u2) * vol),
        norm_linf(s.u),
        h1_seminorm(s.u, grid) ** 2,
        np.sqrt(l2v2),
        np.sqrt(l2w2),
        np.sqrt(l2r2),
        norm_linf(s.v),
        norm_linf(s.w),
        norm_linf(s.rho),
        h2_surrogate_norm(s.u, grid, eta),
    ])


@dataclass
class MonitorSeries:
    """Rows of :data:`COLUMNS`.

    ``energy_weight`` is the ``C1`` used in the ``energy`` column; with it the
    unweighted ``||g||^2`` can be recovered from each row.
    """

    data: np.ndarray
    energy_weight: float

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float).reshape(-1, len(COLUMNS))

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, _INDEX[name]]

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def unweighted_norm_sq(self) -> np.ndarray:
        """``||u||^2 + ||v||^2 + ||w||^2 + ||rho||^2`` per row."""
        rest = self.column("l2v") ** 2 + self.column("l2w") ** 2 + self.column("l2rho") ** 2
        u_sq = (self.column("energy") - rest) / self.energy_weight
        return np.maximum(u_sq, 0.0) + rest

    @classmethod
    def from_columns(cls, energy_weight: float = 1.0, **columns) -> "MonitorSeries":
        """Build a series from named columns; unnamed columns are zero."""
        n = len(next(iter(columns.values())))
        data = np.zeros((n, len(COLUMNS)))
        for name, values in columns.items():
            data[:, _INDEX[name]] = values
        return cls(data, energy_weight)
