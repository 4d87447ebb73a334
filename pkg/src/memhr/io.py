"""Run configuration and on-disk formats (monitor CSV, report JSON, binary snapshots)."""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid, State
from .integrator import StepperConfig
from .model import POSITIVE_FIELDS, ModelParameters
from .series import COLUMNS, MonitorSeries
from .verify import VerificationReport

REQUIRED_PARAMETERS = (
    "a", "b", "alpha", "beta", "q", "r", "u_e", "J_e", "k1", "k2", "gamma", "delta",
)
NON_PAPER_DEFAULTS = {"c": 1.0, "eta": 1.0}
SNAPSHOT_MAGIC = b"MHRSNAP1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EnsembleConfig:
    n_runs: int = 8
    seed: int = 0
    radius: float = math.sqrt(10.0)


@dataclass(frozen=True)
class EmbeddingConfig:
    C_hat: float = 1.0
    C_emb: float = 1.0


@dataclass(frozen=True)
class OutputConfig:
    monitor: str | None = None
    report: str | None = None
    snapshot_dir: str | None = None
    snapshot_stride: int = 0


@dataclass(frozen=True)
class VerifyConfig:
    tol: float = 1e-6
    g_branch: str = "printed"
    ode_t_end: float = 100.0
    ode_dt: float = 1e-3
    ode_oracle_dt: float = 1e-5
    ode_tol: float = 1e-3
    ode_cells: int = 8


@dataclass(frozen=True)
class RunConfig:
    parameters: ModelParameters
    grid: Grid
    stepper: StepperConfig
    ensemble: EnsembleConfig = EnsembleConfig()
    embedding: EmbeddingConfig = EmbeddingConfig()
    outputs: OutputConfig = OutputConfig()
    verify: VerifyConfig = VerifyConfig()
    defaults_used: tuple[str, ...] = ()

    def annotations(self) -> dict:
        """Echo of parameters that fell back to values not taken from the model literature."""
        return {
            key: f"{getattr(self.parameters, key)!r} (default, not from paper)"
            for key in self.defaults_used
        }


def _section(doc: dict, key: str, cls) -> dict:
    raw = doc.get(key, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"{key} must be a JSON object")
    unknown = set(raw) - set(cls.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown keys in {key}: {', '.join(sorted(unknown))}")
    return raw


def parse_config(text: str) -> RunConfig:
    """Parse a JSON run configuration.

    Model parameters sit at the top level next to ``grid`` and ``stepper``.
    Missing required keys are reported together; positivity violations name
    the parameter.
    """
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")

    missing = [k for k in REQUIRED_PARAMETERS if k not in doc]
    for key in ("grid", "stepper"):
        if key not in doc:
            missing.append(key)
    grid_raw = doc.get("grid")
    stepper_raw = doc.get("stepper")
    if isinstance(grid_raw, dict):
        missing += [f"grid.{k}" for k in ("lengths", "cells") if k not in grid_raw]
    if isinstance(stepper_raw, dict):
        missing += [f"stepper.{k}" for k in ("dt", "t_end") if k not in stepper_raw]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))
    if not isinstance(grid_raw, dict) or not isinstance(stepper_raw, dict):
        raise ConfigError("grid and stepper must be JSON objects")

    values = {}
    for key in REQUIRED_PARAMETERS + ("c", "eta"):
        if key in doc:
            try:
                values[key] = float(doc[key])
            except (TypeError, ValueError):
                raise ConfigError(f"parameter {key} must be a number, got {doc[key]!r}") from None
    defaults_used = tuple(k for k in NON_PAPER_DEFAULTS if k not in values)
    for key in defaults_used:
        values[key] = NON_PAPER_DEFAULTS[key]
    for key in POSITIVE_FIELDS:
        if not values[key] > 0:
            raise ConfigError(
                f"parameter {key} must be > 0 (model parameters are positive constants), got {values[key]!r}"
            )
    kind = doc.get("memristance_kind", "quadratic")
    try:
        params = ModelParameters(**values, memristance_kind=kind)
    except ValueError as err:
        raise ConfigError(f"memristance_kind: {err}") from None

    try:
        grid = Grid(tuple(grid_raw["lengths"]), tuple(grid_raw["cells"]))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"grid: {err}") from None
    try:
        stepper = StepperConfig(
            dt=float(stepper_raw["dt"]),
            t_end=float(stepper_raw["t_end"]),
            diffusion_scheme=stepper_raw.get("diffusion_scheme", "crank_nicolson"),
            monitor_stride=int(stepper_raw.get("monitor_stride", 1)),
            overflow_guard=float(stepper_raw.get("overflow_guard", 1e12)),
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"stepper: {err}") from None

    sections = {}
    for key, cls in (("ensemble", EnsembleConfig), ("embedding", EmbeddingConfig),
                     ("outputs", OutputConfig), ("verify", VerifyConfig)):
        raw = _section(doc, key, cls)
        try:
            sections[key] = cls(**raw)
        except TypeError as err:
            raise ConfigError(f"{key}: {err}") from None
    emb = sections["embedding"]
    for name in ("C_hat", "C_emb"):
        if not getattr(emb, name) > 0:
            raise ConfigError(f"embedding.{name} must be > 0")
    ens = sections["ensemble"]
    if ens.n_runs < 1:
        raise ConfigError("ensemble.n_runs must be >= 1")
    if ens.radius < 0:
        raise ConfigError("ensemble.radius must be >= 0")
    return RunConfig(params, grid, stepper, defaults_used=defaults_used, **sections)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def write_monitor(m: MonitorSeries, path) -> None:
    """CSV with the frozen header and full double precision."""
    np.savetxt(path, m.data, delimiter=",", header=",".join(COLUMNS), comments="", fmt="%.17g")


def read_monitor(path, energy_weight: float = 1.0) -> MonitorSeries:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if tuple(header) != COLUMNS:
        raise ValueError(f"unexpected monitor header {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return MonitorSeries(data, energy_weight)


def report_dict(report: VerificationReport, annotations: dict | None = None) -> dict:
    out = report.to_dict()
    if annotations:
        out["annotations"] = dict(annotations)
    return out


def write_report(report: VerificationReport, path, annotations: dict | None = None) -> None:
    Path(path).write_text(json.dumps(report_dict(report, annotations), indent=2) + "\n")


def write_snapshot(s: State, grid: Grid, path) -> None:
    """Binary snapshot: magic, dim, cells, lengths, time, then u, v, w, rho (little-endian)."""
    parts = [
        SNAPSHOT_MAGIC,
        struct.pack("<q", grid.dim),
        struct.pack(f"<{grid.dim}q", *grid.cells),
        struct.pack(f"<{grid.dim}d", *grid.lengths),
        struct.pack("<d", s.time),
    ]
    for f in s.fields():
        parts.append(np.ascontiguousarray(f, dtype="<f8").tobytes(order="C"))
    Path(path).write_bytes(b"".join(parts))


def read_snapshot(path) -> tuple[State, Grid]:
    raw = Path(path).read_bytes()
    if raw[:8] != SNAPSHOT_MAGIC:
        raise ValueError("not a snapshot file (magic mismatch)")
    offset = 8
    if len(raw) < offset + 8:
        raise ValueError("truncated snapshot header")
    (dim,) = struct.unpack_from("<q", raw, offset)
    offset += 8
    if not 1 <= dim <= 3:
        raise ValueError(f"invalid snapshot dimension {dim}")
    header_end = offset + 16 * dim + 8
    if len(raw) < header_end:
        raise ValueError("truncated snapshot header")
    cells = struct.unpack_from(f"<{dim}q", raw, offset)
    offset += 8 * dim
    lengths = struct.unpack_from(f"<{dim}d", raw, offset)
    offset += 8 * dim
    (time,) = struct.unpack_from("<d", raw, offset)
    offset += 8
    grid = Grid(lengths, cells)
    count = int(np.prod(cells))
    expected = offset + 4 * 8 * count
    if len(raw) != expected:
        raise ValueError(f"snapshot payload is {len(raw)} bytes, header implies {expected}")
    data = np.frombuffer(raw, dtype="<f8", count=4 * count, offset=offset).astype(float)
    u, v, w, rho = (x.reshape(grid.shape).copy() for x in np.split(data, 4))
    return State(u, v, w, rho, time), grid
