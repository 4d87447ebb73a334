"""Executable checks of the dissipativity and attractor bounds on trajectories.

Each check returns a :class:`CheckRecord` holding the predicted bound, the
worst observed value, ``margin = predicted - observed`` and a pass flag.
Checks are pure functions of their inputs, so re-running one on a stored
:class:`~memhr.series.MonitorSeries` reproduces the same record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import AttractorBounds, EnergyBounds, absorbing_time, compute_bounds, decay_rate
from .grid import Grid, State, h2_surrogate_norm, norm_linf
from .integrator import Stepper, StepperConfig, homogeneous_trajectory, simulate
from .model import ModelParameters, PointState
from .series import MonitorSeries

DEFAULT_TOL = 1e-6


@dataclass
class CheckRecord:
    name: str
    predicted: float
    observed: float
    passed: bool
    tol: float
    entry_time: float | None = None
    constants_used: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.predicted - self.observed

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "predicted": self.predicted,
            "observed": self.observed,
            "margin": self.margin,
            "entry_time": self.entry_time,
            "pass": bool(self.passed),
            "tol": self.tol,
            "constants_used": dict(self.constants_used),
        }


@dataclass
class VerificationReport:
    records: list[CheckRecord] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return bool(self.records) and all(r.passed for r in self.records)

    def __getitem__(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "all_pass": self.all_passed,
            "checks": [r.to_dict() for r in self.records],
            "notes": list(self.notes),
        }


def _entry_time(times: np.ndarray, inside: np.ndarray) -> float | None:
    """First sample time from which every later sample is inside, or ``None``."""
    if not inside[-1]:
        return None
    outside = np.flatnonzero(~inside)
    return float(times[0] if outside.size == 0 else times[outside[-1] + 1])


def _require_rows(m: MonitorSeries):
    if len(m) == 0:
        raise ValueError("monitor series is empty")


def check_gronwall(m: MonitorSeries, e: EnergyBounds, tol: float = DEFAULT_TOL) -> CheckRecord:
    """``E(t) <= exp(-lambda t) E(0) + M |Omega|`` on every row.

    Rows may exceed the bound by at most ``tol * (E(0) + M |Omega|)``.
    """
    _require_rows(m)
    t = m.times - m.times[0]
    energy = m.column("energy")
    floor = e.M * e.omega_measure
    bound = np.exp(-e.lam * t) * energy[0] + floor
    excess = energy - bound
    worst = int(np.argmax(excess))
    passed = bool(np.all(excess <= tol * (energy[0] + floor)))
    return CheckRecord(
        "gronwall", float(bound[worst]), float(energy[worst]), passed, tol,
        constants_used={"lambda": e.lam, "M": e.M, "omega_measure": e.omega_measure, "C1": e.C1},
    )


def check_absorbing(
    m: MonitorSeries, e: EnergyBounds, predicted_T0: float, tol: float = DEFAULT_TOL
) -> CheckRecord:
    """Unweighted ``||g||^2`` inside the K-ball after ``predicted_T0``.

    Passes iff every row with ``t > T0`` and the final row are inside
    ``K (1 + tol)``. ``entry_time`` is the measured first time after which the
    orbit stays inside. A series ending before ``T0`` is judged on its tail.
    """
    _require_rows(m)
    t = m.times
    norms = m.unweighted_norm_sq()
    limit = e.K * (1.0 + tol)
    entry = _entry_time(t, norms <= limit)
    late = t > predicted_T0
    if late.any():
        observed = float(norms[late].max())
    elif entry is not None:
        observed = float(norms[t >= entry].max())
    else:
        observed = float(norms[-1])
    return CheckRecord(
        "absorbing", e.K, observed, observed <= limit, tol, entry_time=entry,
        constants_used={"K": e.K, "T0": predicted_T0},
    )


def check_l4(m: MonitorSeries, q_bound: float, tol: float = DEFAULT_TOL, after: float = 0.0) -> CheckRecord:
    """``int u^4 dx <= Q`` on every row with ``t >= after``.

    ``after`` is the post-transient cutoff (callers pass the measured
    absorbing time); ``entry_time`` is the measured time ``T^u``.
    """
    _require_rows(m)
    t = m.times
    l4 = m.column("l4u4")
    limit = q_bound * (1.0 + tol)
    late = t >= after
    observed = float(l4[late].max()) if late.any() else float(l4[-1])
    return CheckRecord(
        "l4", q_bound, observed, observed <= limit, tol,
        entry_time=_entry_time(t, l4 <= limit), constants_used={"Q": q_bound, "after": after},
    )


def check_attractor_region(
    tail: Sequence[State],
    a_b: AttractorBounds,
    e: EnergyBounds,
    grid: Grid,
    eta: float,
    tol: float = DEFAULT_TOL,
) -> list[CheckRecord]:
    """Sup, ``(v, w, rho)`` and H2-surrogate bounds over late-time states.

    Returns three records: ``attractor_u_sup`` (``sup|u|^2 <= R``),
    ``attractor_vwr_sup`` (``max sup|v|,|w|,|rho| <= G``) and
    ``attractor_h2`` (``||u|| + eta ||Delta u|| <= H2 bound``).
    """
    if not tail:
        raise ValueError("attractor tail is empty")
    if grid.dim != 1:
        raise ValueError("attractor-region bounds hold for one-dimensional domains")
    u_sup_sq = max(norm_linf(s.u) ** 2 for s in tail)
    vwr_sup = max(max(norm_linf(s.v), norm_linf(s.w), norm_linf(s.rho)) for s in tail)
    h2 = max(h2_surrogate_norm(s.u, grid, eta) for s in tail)
    used = {"C_emb": a_b.C_emb, "K": e.K}
    checks = [
        ("attractor_u_sup", a_b.R, u_sup_sq),
        ("attractor_vwr_sup", a_b.G, vwr_sup),
        ("attractor_h2", a_b.H2_bound, h2),
    ]
    return [
        CheckRecord(name, pred, obs, obs <= pred * (1.0 + tol), tol, constants_used=dict(used))
        for name, pred, obs in checks
    ]


def check_ode_equivalence(
    s0: PointState,
    cfg: StepperConfig,
    p: ModelParameters,
    tol: float,
    grid: Grid | None = None,
    oracle_dt: float | None = None,
    samples: int = 2000,
) -> CheckRecord:
    """PDE from the constant lift of ``s0`` against the RK4 oracle.

    The oracle step defaults to ``dt / 100``. Both paths are compared at
    about ``samples`` common times, over every cell and component.
    """
    grid = grid or Grid((1.0,), (8,))
    n = cfg.n_steps()
    dt = cfg.effective_dt()
    ratio = max(1, math.ceil(dt / (oracle_dt or dt / 100.0) - 1e-9))
    every = max(1, n // max(1, samples))
    _, ref = homogeneous_trajectory(s0, dt / ratio, n * dt, p, stride=ratio * every, guard=cfg.overflow_guard)
    stepper = Stepper(p, grid, cfg, dt=dt)
    s = State.constant(grid, (s0.u, s0.v, s0.w, s0.rho))
    err = 0.0
    row = 0
    for k in range(1, n + 1):
        s = stepper.step(s)
        if k % every == 0 or k == n:
            row += 1
            for field_values, exact in zip(s.fields(), ref[row]):
                err = max(err, float(np.max(np.abs(field_values - exact))))
    return CheckRecord(
        "ode_equivalence", tol, err, err <= tol, tol,
        constants_used={"dt": dt, "oracle_dt": dt / ratio, "scheme": cfg.diffusion_scheme.value},
    )


def smooth_random_state(rng: np.random.Generator, grid: Grid, radius: float, modes: int = 4) -> State:
    """Random low-mode cosine fields, uniform in the ball ``||g|| <= radius`` of that subspace."""
    if radius == 0:
        return State.zeros(grid)
    axes = [np.arange(min(modes, n)) for n in grid.cells]
    basis = []
    for k in np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, grid.dim):
        phi = np.ones(grid.shape)
        for d, kd in enumerate(k):
            x = grid.axis_coordinates(d)
            shape = [1] * grid.dim
            shape[d] = -1
            phi = phi * np.cos(kd * np.pi * x / grid.lengths[d]).reshape(shape)
        basis.append(phi / math.sqrt(np.sum(phi * phi) * grid.cell_volume))
    basis = np.array(basis)
    dof = 4 * len(basis)
    z = rng.standard_normal(dof)
    target = radius * rng.uniform() ** (1.0 / dof)
    coeffs = (target / np.linalg.norm(z)) * z
    fields = [np.tensordot(c, basis, axes=1) for c in coeffs.reshape(4, -1)]
    actual = math.sqrt(sum(np.sum(f * f) for f in fields) * grid.cell_volume)
    if actual > 0:
        fields = [f * (target / actual) for f in fields]
    return State(*fields)


def _worst(records: list[CheckRecord]) -> tuple[int, CheckRecord]:
    def key(item):
        _, r = item
        scale = abs(r.predicted) or 1.0
        return (r.passed, r.margin / scale)
    return min(enumerate(records), key=key)


def run_ensemble(
    n_runs: int,
    seed: int,
    radius: float,
    cfg: StepperConfig,
    p: ModelParameters,
    g: Grid,
    *,
    C_hat: float = 1.0,
    C_emb: float = 1.0,
    tol: float = DEFAULT_TOL,
    g_branch: str = "printed",
    transient_cutoff: float | None = None,
) -> VerificationReport:
    """Simulate ``n_runs`` random initial states with ``||g0|| <= radius`` and check every bound.

    Runs are seeded from ``SeedSequence(seed)``, so a fixed seed reproduces the
    report bit for bit. Records are aggregated over runs: the worst run (a
    failing one first, then smallest relative margin) is reported, and
    ``entry_time`` is the latest over runs. The attractor checks need a 1D grid
    and use the states after ``transient_cutoff`` (default: the last 20% of the run).
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    bounds = compute_bounds(p, g.measure, radius, C_hat, C_emb, g_branch)
    e = bounds.energy
    T0 = absorbing_time(p, radius**2)
    cutoff = 0.8 * cfg.t_end if transient_cutoff is None else transient_cutoff
    notes = []
    if g.dim == 1 and cfg.t_end < 3.0 / decay_rate(p):
        notes.append(f"attractor tail starts before 3/lambda = {3.0 / decay_rate(p):.6g}")
    per_check: dict[str, list[CheckRecord]] = {}
    children = np.random.SeedSequence(seed).spawn(n_runs)
    for i, child in enumerate(children):
        s0 = smooth_random_state(np.random.default_rng(child), g, radius)
        traj = simulate(
            s0, cfg, p, g,
            snapshot_stride=cfg.monitor_stride if g.dim == 1 else 0,
            snapshot_from=cutoff,
            run_index=i,
        )
        m = traj.monitor
        absorbed = check_absorbing(m, e, T0, tol)
        after = max(1.0, absorbed.entry_time) if absorbed.entry_time is not None else m.times[-1]
        records = [
            check_gronwall(m, e, tol),
            absorbed,
            check_l4(m, bounds.l4.Q, tol, after=min(after, m.times[-1])),
        ]
        if g.dim == 1 and traj.snapshots:
            records += check_attractor_region(traj.snapshots, bounds.attractor, e, g, p.eta, tol)
        for r in records:
            per_check.setdefault(r.name, []).append(r)

    report = VerificationReport(notes=notes)
    for name, recs in per_check.items():
        index, worst = _worst(recs)
        entries = [r.entry_time for r in recs]
        entry = None if None in entries else max(entries)
        report.records.append(
            CheckRecord(
                name, worst.predicted, worst.observed, all(r.passed for r in recs), tol,
                entry_time=entry,
                constants_used={**worst.constants_used, "C_hat": C_hat, "C_emb": C_emb, "worst_run": index},
            )
        )
    return report
