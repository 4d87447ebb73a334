"""IMEX time stepping for the PDE-ODE system and a homogeneous RK4 oracle.

The membrane potential ``u`` diffuses implicitly; ``v``, ``w`` and ``rho``
decay exactly through exponential (integrating-factor) updates; the reaction
``f(g)`` is explicit.

``BackwardEuler`` is first order: implicit Euler diffusion, forcing frozen at
the step start. ``CrankNicolson`` is a two-stage second-order scheme: the
first-order update is used as a predictor, then ``u`` is corrected with the
trapezoidal average of the reaction under Crank-Nicolson diffusion and
``v, w, rho`` with the ETD2RK correction ``(F1 - F0) * phi2``.

In 2D and 3D the implicit factor is applied one axis at a time. The axis
operators commute on a rectangle, so this keeps the order of the 1D scheme.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bounds import scaling_c1
from .grid import Grid, State
from .model import MemristanceKind, ModelParameters, PointState, linear_rates, reaction_terms
from .series import MonitorSeries, monitor_row

COMPONENTS = ("u", "v", "w", "rho")


class DiffusionScheme(str, enum.Enum):
    BACKWARD_EULER = "backward_euler"
    CRANK_NICOLSON = "crank_nicolson"


class BlowUpError(RuntimeError):
    """A field left the overflow guard; usually ``dt`` is too large."""

    def __init__(self, time: float, component: str, value: float, run_index: int | None = None):
        self.time = time
        self.component = component
        self.value = value
        self.run_index = run_index
        where = f" in run {run_index}" if run_index is not None else ""
        super().__init__(
            f"blow-up{where} at t={time:.6g}: |{component}| reached {value:.3g}; reduce dt"
        )


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    diffusion_scheme: DiffusionScheme = DiffusionScheme.CRANK_NICOLSON
    monitor_stride: int = 1
    reaction_enabled: bool = True
    overflow_guard: float = 1e12

    def __post_init__(self):
        object.__setattr__(self, "diffusion_scheme", DiffusionScheme(self.diffusion_scheme))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be nonnegative")
        if int(self.monitor_stride) != self.monitor_stride or self.monitor_stride < 1:
            raise ValueError("monitor_stride must be an integer >= 1")

    def n_steps(self) -> int:
        """Steps needed to reach ``t_end`` (the step is shrunk to land exactly)."""
        if self.t_end == 0:
            return 0
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))

    def effective_dt(self) -> float:
        n = self.n_steps()
        return self.t_end / n if n else self.dt


@dataclass
class Trajectory:
    monitor: MonitorSeries
    snapshots: list[State] = field(default_factory=list)


def _phi_functions(rate: float, dt: float) -> tuple[float, float, float]:
    """``exp(-rate dt)``, ``(1 - e^{-z}) / rate`` and ``(e^{-z} - 1 + z) / (rate z)``, ``z = rate dt``."""
    z = rate * dt
    decay = math.exp(-z)
    if z < 1e-5:
        phi1 = dt * (1.0 - z / 2.0 + z * z / 6.0)
        phi2 = dt * (0.5 - z / 6.0 + z * z / 24.0)
    else:
        phi1 = -math.expm1(-z) / rate
        phi2 = (math.expm1(-z) + z) / (rate * z)
    return decay, phi1, phi2


class _AxisSolve:
    """Factored ``I - kappa * Delta_axis`` for one axis."""

    def __init__(self, n: int, h: float, kappa: float):
        self.n = n
        s = kappa / (h * h)
        diag = np.full(n, 1.0 + 2.0 * s)
        if n > 1:
            diag[0] = diag[-1] = 1.0 + s
        else:
            diag[0] = 1.0
        self.lower = np.full(n, -s)
        upper = np.full(n, -s)
        self.cprime, self.inv_denom = _kernels.thomas_factor(self.lower, diag, upper)

    def __call__(self, f: np.ndarray, axis: int) -> np.ndarray:
        if self.n == 1:
            return f.copy()
        if axis == 0:
            return self._solve(np.ascontiguousarray(f).reshape(self.n, -1)).reshape(f.shape)
        moved = np.moveaxis(f, axis, 0)
        out = self._solve(np.ascontiguousarray(moved).reshape(self.n, -1))
        return np.moveaxis(out.reshape(moved.shape), 0, axis)

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        out = np.empty_like(rhs)
        _kernels.thomas_solve_columns(self.lower, self.cprime, self.inv_denom, rhs, out)
        # the exact solve preserves every column sum (zero-flux rows); remove elimination roundoff
        out += (rhs.sum(axis=0) - out.sum(axis=0)) / self.n
        return out


class DiffusionSolver:
    """Linear diffusion propagator ``P`` and implicit smoother ``S`` for one step.

    A step of the scheme reads ``u_new = P u + S (dt * forcing)`` where, per
    axis, ``S = (I - theta dt eta Delta)^{-1}`` and
    ``P = S (I + (1 - theta) dt eta Delta)``.
    """

    def __init__(self, grid: Grid, eta: float, dt: float, theta: float):
        self.grid = grid
        self.eta = eta
        self.dt = dt
        self.theta = theta
        kappa = theta * dt * eta
        self._solves = [_AxisSolve(n, h, kappa) for n, h in zip(grid.cells, grid.spacing)]

    def smooth(self, f: np.ndarray) -> np.ndarray:
        for axis, solve in enumerate(self._solves):
            f = solve(f, axis)
        return f

    def propagate(self, u: np.ndarray) -> np.ndarray:
        # S (I + (1 - theta) k Delta) == S / theta - (1 - theta) / theta * I, which avoids
        # forming k Delta u (of size dt / h^2) and the roundoff it would leak into the mean
        keep = (1.0 - self.theta) / self.theta
        for axis, solve in enumerate(self._solves):
            su = solve(u, axis)
            u = su if keep == 0 else su / self.theta - keep * u
        return u


class Stepper:
    """Precomputed one-step map for fixed parameters, grid and step size."""

    def __init__(self, p: ModelParameters, grid: Grid, cfg: StepperConfig, dt: float | None = None):
        self.p = p
        self.grid = grid
        self.cfg = cfg
        self.dt = cfg.dt if dt is None else dt
        self.second_order = cfg.diffusion_scheme is DiffusionScheme.CRANK_NICOLSON
        theta = 0.5 if self.second_order else 1.0
        eta, *decays = linear_rates(p)
        self.diffusion = DiffusionSolver(grid, eta, self.dt, theta)
        self.decay = [_phi_functions(rate, self.dt) for rate in decays]

    def _forcing(self, u, v, w, rho):
        if not self.cfg.reaction_enabled:
            return 0.0, 0.0, 0.0, 0.0
        return reaction_terms(u, v, w, rho, self.p)

    def step(self, s: State) -> State:
        dt = self.dt
        u, v, w, rho = s.u, s.v, s.w, s.rho
        f0 = self._forcing(u, v, w, rho)
        pu = self.diffusion.propagate(u)
        u1 = pu + self.diffusion.smooth(dt * f0[0]) if self.cfg.reaction_enabled else pu
        odes = []
        for x, fx, (decay, phi1, _) in zip((v, w, rho), f0[1:], self.decay):
            odes.append(decay * x + phi1 * fx)
        if self.second_order and self.cfg.reaction_enabled:
            f1 = self._forcing(u1, *odes)
            u1 = pu + self.diffusion.smooth(0.5 * dt * (f0[0] + f1[0]))
            odes = [
                x1 + phi2 * (g1 - g0)
                for x1, g0, g1, (_, _, phi2) in zip(odes, f0[1:], f1[1:], self.decay)
            ]
        out = State(u1, *odes, time=s.time + dt)
        _guard(out, self.cfg.overflow_guard)
        return out


def _guard(s: State, limit: float, run_index: int | None = None):
    if all(np.max(np.abs(x)) <= limit for x in s.fields()):
        return
    for name, x in zip(COMPONENTS, s.fields()):
        peak = float(np.max(np.abs(x)))
        if not peak <= limit:
            raise BlowUpError(s.time, name, peak, run_index)


def step(s: State, cfg: StepperConfig, p: ModelParameters, g: Grid) -> State:
    """Advance ``s`` by one step of ``cfg.dt``.

    Builds the factorizations on every call; loops should use :class:`Stepper`.
    """
    return Stepper(p, g, cfg).step(s)


def simulate(
    s0: State,
    cfg: StepperConfig,
    p: ModelParameters,
    g: Grid,
    snapshot_stride: int = 0,
    snapshot_from: float = 0.0,
    run_index: int | None = None,
) -> Trajectory:
    """Integrate from ``s0`` to ``s0.time + t_end``.

    Monitor rows are taken at the start, every ``monitor_stride`` steps and at
    the final time. With ``snapshot_stride > 0``, copies of the state are kept
    every that many steps once the elapsed time reaches ``snapshot_from``.
    """
    C1 = scaling_c1(p)
    n = cfg.n_steps()
    stepper = Stepper(p, g, cfg, dt=cfg.effective_dt())
    s = s0.copy()
    _guard(s, cfg.overflow_guard, run_index)
    rows = [monitor_row(s, g, C1, p.eta)]
    snapshots = []
    if snapshot_stride and snapshot_from <= 0:
        snapshots.append(s.copy())
    t_start = s0.time
    for k in range(1, n + 1):
        try:
            s = stepper.step(s)
        except BlowUpError as err:
            raise BlowUpError(err.time, err.component, err.value, run_index) from None
        s.time = t_start + k * stepper.dt
        if k % cfg.monitor_stride == 0 or k == n:
            rows.append(monitor_row(s, g, C1, p.eta))
        if snapshot_stride and k % snapshot_stride == 0 and s.time - t_start >= snapshot_from:
            snapshots.append(s.copy())
    return Trajectory(MonitorSeries(np.array(rows), C1), snapshots)


def _param_vector(p: ModelParameters) -> np.ndarray:
    return np.array([getattr(p, name) for name in _kernels.PARAM_ORDER], dtype=float)


def homogeneous_trajectory(
    s0: PointState, dt: float, t_end: float, p: ModelParameters, stride: int = 1, guard: float = 1e12
) -> tuple[np.ndarray, np.ndarray]:
    """RK4 on the spatially constant system. Returns ``(times, states[n, 4])``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = 0 if t_end == 0 else max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / n if n else dt
    times, states, status = _kernels.rk4_homogeneous(
        s0.as_array(), _param_vector(p), p.memristance_kind is MemristanceKind.TANH,
        h, n, max(1, int(stride)), guard,
    )
    if status >= 0:
        bad = int(np.argmax(~(np.abs(states[-1]) <= guard)))
        raise BlowUpError(float(times[-1]), COMPONENTS[bad], float(abs(states[-1, bad])))
    return times, states


def simulate_homogeneous(
    s0: PointState, dt: float, t_end: float, p: ModelParameters, stride: int = 1
) -> list[tuple[float, PointState]]:
    """Classical RK4 on the 4D ODE obeyed by spatially constant solutions."""
    times, states = homogeneous_trajectory(s0, dt, t_end, p, stride)
    return [(float(t), PointState.from_array(x)) for t, x in zip(times, states)]
