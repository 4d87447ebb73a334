"""Closed-form dissipativity and attractor constants.

Every constant is an explicit function of the model parameters, the domain
measure ``|Omega|`` and, where needed, the radius of the initial bounded set and
two Sobolev embedding constants (``C_hat`` for H1 -> L4, ``C_emb`` for
H1 -> C in one dimension). The constants are conservative by construction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .model import ModelParameters


def _require_positive(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class EnergyBounds:
    C1: float
    C2: float
    C3: float
    lam: float
    M: float
    K: float
    omega_measure: float


@dataclass(frozen=True)
class L4Bounds:
    C_ab: float
    C_b: float
    Q: float
    L: float
    C_hat: float
    B_norm: float


@dataclass(frozen=True)
class AttractorBounds:
    R: float
    G: float
    Phi: float
    D: float
    H2_bound: float
    C_emb: float


def scaling_c1(p: ModelParameters) -> float:
    """Weight of ``||u||^2`` in the energy: ``(beta^2 + 5) / b``."""
    return (p.beta**2 + 5.0) / p.b


def decay_rate(p: ModelParameters) -> float:
    return 0.5 * min(1.0, p.r, p.k2)


def energy_constants(p: ModelParameters, omega_measure: float) -> EnergyBounds:
    """C1, C2, C3, lambda, M and the absorbing radius K."""
    _require_positive(omega_measure=omega_measure)
    C1 = scaling_c1(p)
    C2 = (
        (C1 * p.a) ** 4
        + C1 * p.J_e**2
        + (C1**2 * (2.0 + 1.0 / p.r) + C1) ** 2
        + 2.0 * p.alpha**2
        + p.q**2 * p.u_e**2 / p.r
        + p.q**4 / p.r**2
        + 1.0 / (4.0 * p.k2**2)
    )
    C3 = 2.0 * C2 + 4.0 * C1**2 * p.k1**2 * (abs(p.c) + p.gamma**2 / (4.0 * p.delta)) ** 2
    lam = decay_rate(p)
    M = (C3 + C1**2 / 4.0) / lam
    K = M * omega_measure / min(C1, 1.0) + 1.0
    return EnergyBounds(C1=C1, C2=C2, C3=C3, lam=lam, M=M, K=K, omega_measure=omega_measure)


def absorbing_time(p: ModelParameters, initial_radius_sq: float) -> float:
    """Time after which every orbit from ``{||g||^2 <= initial_radius_sq}`` is in the K-ball."""
    if initial_radius_sq < 0:
        raise ValueError("initial_radius_sq must be nonnegative")
    arg = initial_radius_sq * max(scaling_c1(p), 1.0)
    if arg <= 1.0:
        return 0.0
    return math.log(arg) / decay_rate(p)


def young_constants(p: ModelParameters) -> tuple[float, float]:
    """Explicit ``(C_ab, C_b)`` for the L4 estimate.

    ``a u^5 <= (b/4) u^6 + (4/b)^5 a^6`` is Young's inequality with exponents
    (6/5, 6) and ``eps = b/4``, using ``C(eps, p) = eps^(-q/p)``.
    The products ``u^3 v``, ``u^3 w``, ``u^3 J_e`` share a second ``b/4`` budget,
    ``b/12`` each, and ``x y <= eps x^2 + y^2 / (4 eps)`` gives ``C_b = 3/b``.
    """
    C_ab = (4.0 / p.b) ** 5 * p.a**6
    C_b = 3.0 / p.b
    return C_ab, C_b


def _l6_source(p: ModelParameters, K: float, C_ab: float, C_b: float) -> float:
    # bracket shared by the L4 and L6 estimates, without the leading ``b``
    memristive = 16.0 * p.k1**3 / p.b**2 * (abs(p.c) + p.gamma**2 / p.delta) ** 3
    return C_ab + C_b * (K + p.J_e**2) + memristive


def _h1_budget(p: ModelParameters, e: EnergyBounds, radius_sq: float) -> float:
    # time-averaged H1 bound over a unit interval, divided by C1
    return (max(e.C1, 1.0) * radius_sq + e.lam * e.M * e.omega_measure) / (
        e.C1 * min(p.eta, e.lam)
    )


def l4_bound(p: ModelParameters, omega_measure: float, B_norm: float, C_hat: float = 1.0) -> L4Bounds:
    """Ultimate L4 bound ``Q`` and L6 time-integral bound ``L``."""
    _require_positive(omega_measure=omega_measure, C_hat=C_hat)
    if not (math.isfinite(B_norm) and B_norm >= 0):
        raise ValueError(f"B_norm must be a finite nonnegative number, got {B_norm!r}")
    e = energy_constants(p, omega_measure)
    C_ab, C_b = young_constants(p)
    source = _l6_source(p, e.K, C_ab, C_b)
    Q = (C_hat * _h1_budget(p, e, B_norm**2)) ** 2 + omega_measure / p.b * (p.b + source)
    L = 2.0 / p.b * Q + 4.0 / p.b * omega_measure * source
    return L4Bounds(C_ab=C_ab, C_b=C_b, Q=Q, L=L, C_hat=C_hat, B_norm=B_norm)


def region_g(p: ModelParameters, R: float, g_branch: str = "printed") -> float:
    """Sup bound of ``(v, w, rho)`` on the attractor given the u-bound ``R``.

    ``g_branch="printed"`` uses ``|alpha - beta R|``; ``"sum"`` uses
    ``alpha + beta R``, which is what bounding ``|alpha - beta u^2|`` with
    ``u^2 <= R`` yields.
    """
    if g_branch == "printed":
        first = abs(p.alpha - p.beta * R)
    elif g_branch == "sum":
        first = p.alpha + p.beta * R
    else:
        raise ValueError(f"unknown g_branch {g_branch!r}")
    sqrt_r = math.sqrt(R)
    return max(first, p.q / p.r * (sqrt_r + abs(p.u_e)), sqrt_r / p.k2)


def attractor_region(
    p: ModelParameters, omega_measure: float, C_emb: float = 1.0, g_branch: str = "printed"
) -> AttractorBounds:
    """R, G, Phi, D and the H2 bound for a one-dimensional domain.

    ``R`` is taken at its smallest admissible value.
    """
    _require_positive(omega_measure=omega_measure, C_emb=C_emb)
    e = energy_constants(p, omega_measure)
    K, omega = e.K, omega_measure
    h1 = _h1_budget(p, e, K)
    R = C_emb * h1
    G = region_g(p, R, g_branch)
    sqrt_r = math.sqrt(R)

    local = p.a * R + p.b * R**1.5 + p.J_e + p.k1 * abs(p.c) + p.k1 * p.gamma**2
    Phi = (
        2.0 * p.eta * h1
        + 4.0 * (local**2 + p.k1**2 * (1.0 + p.delta) ** 2 * G**4) * omega
        + 4.0 * (2.0 + p.r**2 + p.k2**2) * K
        + 4.0 * ((p.alpha + p.beta * R) ** 2 + (p.q * sqrt_r + p.q * abs(p.u_e)) ** 2 + R) * omega
    )
    phi_G = p.c + p.gamma * G + p.delta * G**2
    D = 2.0 * (
        3.0 + 2.0 * p.a * sqrt_r + p.k1 * abs(phi_G) + 2.0 * p.k1 * sqrt_r * (abs(p.gamma) + p.delta * G)
    ) * Phi
    H2_bound = (
        math.sqrt(K)
        + math.sqrt(D)
        + (
            p.a * R
            + p.b * R**1.5
            + 2.0 * G
            + p.J_e
            + p.k1 * (abs(p.c) + abs(p.gamma) * G + p.delta * G**2) * sqrt_r
        )
        * math.sqrt(omega)
    )
    return AttractorBounds(R=R, G=G, Phi=Phi, D=D, H2_bound=H2_bound, C_emb=C_emb)


@dataclass(frozen=True)
class BoundSet:
    """All constants for one parameter set, with the inputs that produced them."""

    energy: EnergyBounds
    l4: L4Bounds
    attractor: AttractorBounds
    absorbing_time: float
    initial_radius_sq: float
    g_branch: str

    def to_dict(self) -> dict:
        flat = {}
        flat.update(asdict(self.energy))
        flat.update(asdict(self.l4))
        flat.update(asdict(self.attractor))
        flat["T0"] = self.absorbing_time
        flat["initial_radius_sq"] = self.initial_radius_sq
        flat["g_branch"] = self.g_branch
        return flat


def compute_bounds(
    p: ModelParameters,
    omega_measure: float,
    B_norm: float,
    C_hat: float = 1.0,
    C_emb: float = 1.0,
    g_branch: str = "printed",
) -> BoundSet:
    return BoundSet(
        energy=energy_constants(p, omega_measure),
        l4=l4_bound(p, omega_measure, B_norm, C_hat),
        attractor=attractor_region(p, omega_measure, C_emb, g_branch),
        absorbing_time=absorbing_time(p, B_norm**2),
        initial_radius_sq=B_norm**2,
        g_branch=g_branch,
    )
