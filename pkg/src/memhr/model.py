"""Parameters and pointwise vector field of the memristive Hindmarsh-Rose model.

.. math::

    u_t &= \\eta \\Delta u + a u^2 - b u^3 + v - w + J_e - k_1 \\varphi(\\rho) u \\\\
    v_t &= \\alpha - \\beta u^2 - v \\\\
    w_t &= q (u - u_e) - r w \\\\
    \\rho_t &= u - k_2 \\rho

The right-hand side is split as ``A g + f(g)``: :func:`linear_rates` holds the
diagonal of ``A`` (diffusion for ``u``, linear decay for ``v, w, rho``) and
:func:`reaction` holds ``f``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np


class MemristanceKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    TANH = "tanh"


POSITIVE_FIELDS = ("eta", "a", "b", "alpha", "beta", "q", "r", "J_e", "k1", "k2", "delta")

# Reference values used by the memristive Hindmarsh-Rose literature. ``eta`` and
# ``c`` are not part of that set and fall back to 1.0.
TYPICAL_VALUES = dict(
    J_e=3.2, r=0.002, q=0.008, u_e=-1.6,
    a=3.0, b=1.0, alpha=1.0, beta=5.0,
    gamma=0.4, delta=0.8, k1=0.9, k2=6.5,
)
NON_PAPER_DEFAULTS = dict(eta=1.0, c=1.0)


@dataclass(frozen=True)
class ModelParameters:
    """The fourteen model constants plus the memristance law."""

    a: float
    b: float
    alpha: float
    beta: float
    q: float
    r: float
    u_e: float
    J_e: float
    k1: float
    k2: float
    gamma: float
    delta: float
    c: float = 1.0
    eta: float = 1.0
    memristance_kind: MemristanceKind = MemristanceKind.QUADRATIC

    def __post_init__(self):
        for name in POSITIVE_FIELDS:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")
        for name in ("u_e", "c", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "memristance_kind", MemristanceKind(self.memristance_kind))

    @classmethod
    def typical(cls, **overrides) -> "ModelParameters":
        """Typical bursting parameter set; ``eta`` and ``c`` default to 1.0."""
        values = {**TYPICAL_VALUES, **NON_PAPER_DEFAULTS, **overrides}
        return cls(**values)

    @classmethod
    def unchecked(cls, **values) -> "ModelParameters":
        """Build without the positivity checks.

        Degenerate settings (``J_e = alpha = 0``, couplings switched off) are
        outside the model's parameter range but are handy for oracle tests.
        """
        obj = object.__new__(cls)
        for f in dataclasses.fields(cls):
            if f.name in values:
                value = values.pop(f.name)
            elif f.default is not dataclasses.MISSING:
                value = f.default
            else:
                raise TypeError(f"missing parameter {f.name!r}")
            object.__setattr__(obj, f.name, value)
        if values:
            raise TypeError(f"unknown parameters {sorted(values)}")
        object.__setattr__(obj, "memristance_kind", MemristanceKind(obj.memristance_kind))
        return obj

    def replace(self, **changes) -> "ModelParameters":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["memristance_kind"] = self.memristance_kind.value
        return d


@dataclass(frozen=True)
class PointState:
    u: float
    v: float
    w: float
    rho: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w, self.rho], dtype=float)

    @classmethod
    def from_array(cls, x) -> "PointState":
        return cls(*(float(xi) for xi in x))


def memristance(rho, p: ModelParameters):
    """Induction flux ``phi(rho)``; works on scalars and arrays."""
    if p.memristance_kind is MemristanceKind.TANH:
        return np.tanh(rho)
    return p.c + p.gamma * rho + p.delta * rho * rho


def reaction_terms(u, v, w, rho, p: ModelParameters):
    """Components of the nonlinear map ``f`` (linear decays excluded)."""
    fu = p.a * u * u - p.b * u * u * u + v - w + p.J_e - p.k1 * memristance(rho, p) * u
    fv = p.alpha - p.beta * u * u
    fw = p.q * (u - p.u_e)
    frho = u
    return fu, fv, fw, frho


def reaction(s, p: ModelParameters) -> np.ndarray:
    """``f(g)`` at a point (or elementwise on fields), stacked as a 4-vector."""
    terms = reaction_terms(s.u, s.v, s.w, s.rho, p)
    return np.stack(np.broadcast_arrays(*terms)).astype(float)


def linear_rates(p: ModelParameters) -> tuple[float, float, float, float]:
    """Diagonal of the linear operator: ``(eta, 1, r, k2)``.

    The first entry is the diffusion coefficient of ``u``; the rest are the
    decay rates of ``v``, ``w`` and ``rho``.
    """
    return (p.eta, 1.0, p.r, p.k2)


def full_rhs(s, p: ModelParameters, laplacian_u=0.0) -> np.ndarray:
    """Full time derivative of the system, written out term by term.

    Coded independently of :func:`reaction` so the split form can be checked
    against it. ``laplacian_u`` is ``Delta u`` (zero for spatially constant states).
    """
    u, v, w, rho = s.u, s.v, s.w, s.rho
    if p.memristance_kind is MemristanceKind.TANH:
        phi = np.tanh(rho)
    else:
        phi = p.c + p.gamma * rho + p.delta * rho**2
    du = p.eta * laplacian_u + p.a * u**2 - p.b * u**3 + v - w + p.J_e - p.k1 * phi * u
    dv = p.alpha - p.beta * u**2 - v
    dw = p.q * (u - p.u_e) - p.r * w
    drho = u - p.k2 * rho
    return np.stack(np.broadcast_arrays(du, dv, dw, drho)).astype(float)
