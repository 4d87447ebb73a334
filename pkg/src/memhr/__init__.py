"""Simulation and bound verification for the diffusive Hindmarsh-Rose model with memristors."""

from .bounds import (
    AttractorBounds, BoundSet, EnergyBounds, L4Bounds, absorbing_time, attractor_region,
    compute_bounds, energy_constants, l4_bound, scaling_c1, young_constants,
)
from .grid import (
    Grid, State, energy, h1_seminorm, h2_surrogate_norm, integral, laplacian_neumann, norm_linf,
    norm_lp,
)
from .integrator import (
    BlowUpError, DiffusionScheme, StepperConfig, Stepper, Trajectory, simulate,
    simulate_homogeneous, step,
)
from .model import MemristanceKind, ModelParameters, PointState, linear_rates, memristance, reaction
from .series import MonitorSeries
from .verify import (
    CheckRecord, VerificationReport, check_absorbing, check_attractor_region, check_gronwall,
    check_l4, check_ode_equivalence, run_ensemble,
)

__version__ = "0.1.0"
