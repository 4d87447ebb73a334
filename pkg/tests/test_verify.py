import math

import numpy as np
import pytest

from memhr.bounds import attractor_region, energy_constants
from memhr.grid import Grid, State, state_norm_sq
from memhr.integrator import DiffusionScheme, StepperConfig, homogeneous_trajectory, simulate
from memhr.model import ModelParameters, PointState
from memhr.series import MonitorSeries
from memhr.verify import (
    CheckRecord, VerificationReport, check_absorbing, check_attractor_region, check_gronwall,
    check_l4, check_ode_equivalence, run_ensemble, smooth_random_state,
)


@pytest.fixture
def bounds(typical):
    return energy_constants(typical, 1.0)


def _series(t, energy, **cols):
    return MonitorSeries.from_columns(t=np.asarray(t, float), energy=np.asarray(energy, float), **cols)


def test_gronwall_zero_series_passes(bounds):
    rec = check_gronwall(_series([0, 1, 2], [0, 0, 0]), bounds)
    assert rec.passed
    assert rec.margin > 0


def test_gronwall_factor_two_fails(bounds):
    t = np.linspace(0, 100, 11)
    e0 = 5.0
    energy = 2 * (np.exp(-bounds.lam * t) * e0 + bounds.M * bounds.omega_measure)
    energy[0] = e0  # row 0 carries E(0); every later row is twice its bound
    assert not check_gronwall(_series(t, energy), bounds).passed


def test_gronwall_empty_series_errors(bounds):
    with pytest.raises(ValueError):
        check_gronwall(MonitorSeries(np.zeros((0, 13)), 1.0), bounds)


def test_gronwall_pure_decay_tol_zero(typical, rng):
    g = Grid((1.0,), (64,))
    s0 = smooth_random_state(rng, g, 2.0)
    cfg = StepperConfig(dt=0.05, t_end=20.0, reaction_enabled=False)
    traj = simulate(s0, cfg, typical, g)
    assert check_gronwall(traj.monitor, energy_constants(typical, 1.0), tol=0.0).passed


def test_absorbing_inside_from_start(bounds):
    m = _series([0, 1, 2], [1.0, 0.5, 0.2], l2v=[0.1, 0.1, 0.1])
    rec = check_absorbing(m, bounds, predicted_T0=1.5)
    assert rec.passed and rec.entry_time == 0.0


def test_absorbing_constant_2k_fails(bounds):
    m = MonitorSeries.from_columns(t=np.arange(5.0), l2v=np.full(5, math.sqrt(2 * bounds.K)))
    rec = check_absorbing(m, bounds, predicted_T0=1.0)
    assert not rec.passed and rec.entry_time is None


def test_absorbing_measured_entry_time(bounds):
    K = bounds.K
    l2v = np.sqrt([3 * K, 2 * K, 0.5 * K, 0.4 * K])
    rec = check_absorbing(MonitorSeries.from_columns(t=[0.0, 1.0, 2.0, 3.0], l2v=l2v), bounds, 2.5)
    assert rec.passed and rec.entry_time == 2.0


def test_l4_zero_and_exceeding():
    assert check_l4(MonitorSeries.from_columns(t=[0.0, 1.0], l4u4=[0.0, 0.0]), 1.0).passed
    rec = check_l4(MonitorSeries.from_columns(t=[0.0, 1.0, 2.0], l4u4=[3.0, 3.0, 3.0]), 1.0)
    assert not rec.passed and rec.entry_time is None


def test_l4_homogeneous_reduces_to_scalar(typical):
    Q = 50.0
    g = Grid((2.0,), (4,))
    traj = simulate(State.constant(g, (1.5, 0, 0, 0)), StepperConfig(dt=0.01, t_end=1.0), typical, g)
    l4 = traj.monitor.column("l4u4")
    linf = traj.monitor.column("linf_u")
    np.testing.assert_allclose(l4, linf**4 * g.measure, rtol=1e-12)
    assert check_l4(traj.monitor, Q).passed == bool(np.all(linf**4 * g.measure <= Q * (1 + 1e-6)))


def test_attractor_zero_state_inside():
    p = ModelParameters.unchecked(**{**ModelParameters.typical().to_dict(), "J_e": 0.0, "alpha": 0.0, "u_e": 0.0})
    g = Grid((1.0,), (16,))
    recs = check_attractor_region([State.zeros(g)], attractor_region(p, 1.0), energy_constants(p, 1.0), g, p.eta)
    assert [r.name for r in recs] == ["attractor_u_sup", "attractor_vwr_sup", "attractor_h2"]
    assert all(r.passed for r in recs)


def test_attractor_u_sup_violation(typical):
    g = Grid((1.0,), (16,))
    ab = attractor_region(typical, 1.0)
    s = State.constant(g, (2 * math.sqrt(ab.R), 0, 0, 0))
    recs = {r.name: r for r in check_attractor_region([s], ab, energy_constants(typical, 1.0), g, 1.0)}
    assert not recs["attractor_u_sup"].passed


def test_attractor_errors(typical):
    ab, e = attractor_region(typical, 1.0), energy_constants(typical, 1.0)
    with pytest.raises(ValueError):
        check_attractor_region([], ab, e, Grid((1.0,), (4,)), 1.0)
    g2 = Grid((1.0, 1.0), (4, 4))
    with pytest.raises(ValueError):
        check_attractor_region([State.zeros(g2)], ab, e, g2, 1.0)


def test_tolerance_monotone(bounds):
    t = np.linspace(0, 10, 5)
    bound = np.exp(-bounds.lam * t) * 1.0 + bounds.M
    m = _series(t, bound * (1 + 1e-7))
    results = [check_gronwall(m, bounds, tol).passed for tol in (0.0, 1e-8, 1e-6, 1e-3)]
    assert results == sorted(results)
    assert results[-1]


def test_checks_are_pure(bounds):
    m = _series([0, 1, 2], [3.0, 2.0, 1.0], l4u4=[1, 2, 3])
    assert check_gronwall(m, bounds).to_dict() == check_gronwall(m, bounds).to_dict()
    assert check_l4(m, 10.0).to_dict() == check_l4(m, 10.0).to_dict()


def test_ode_equivalence_equilibrium():
    p = ModelParameters.typical(q=1.0, r=1.0, J_e=0.5, alpha=0.5, beta=1.0, k2=1.0)
    # relax to the rest state first so both paths start on it
    _, x = homogeneous_trajectory(PointState(0, 0, 0, 0), 1e-3, 300.0, p, stride=10**9)
    rec = check_ode_equivalence(PointState.from_array(x[-1]), StepperConfig(dt=0.01, t_end=5.0), p, 1e-9)
    assert rec.passed and rec.observed < 1e-9


def test_ode_equivalence_backward_euler_order_one(typical):
    errs = []
    for dt in (2e-3, 1e-3):
        cfg = StepperConfig(dt=dt, t_end=5.0, diffusion_scheme=DiffusionScheme.BACKWARD_EULER)
        errs.append(check_ode_equivalence(PointState(0, 0, 0, 0), cfg, typical, 1.0, oracle_dt=1e-5).observed)
    assert math.log2(errs[0] / errs[1]) == pytest.approx(1.0, abs=0.15)


def test_smooth_random_state_norm(rng):
    g = Grid((1.0,), (64,))
    for _ in range(20):
        s = smooth_random_state(rng, g, math.sqrt(10.0))
        assert state_norm_sq(s, g) <= 10.0 * (1 + 1e-12)
    assert state_norm_sq(smooth_random_state(rng, g, 0.0), g) == 0.0


def test_ensemble_radius_zero(typical):
    g = Grid((1.0,), (16,))
    rep = run_ensemble(1, 0, 0.0, StepperConfig(dt=0.05, t_end=5.0, monitor_stride=10), typical, g)
    for name in ("gronwall", "absorbing", "l4"):
        assert rep[name].passed


def test_ensemble_deterministic(typical):
    g = Grid((1.0,), (16,))
    cfg = StepperConfig(dt=0.05, t_end=5.0, monitor_stride=10)
    a = run_ensemble(2, 7, 1.0, cfg, typical, g).to_dict()
    b = run_ensemble(2, 7, 1.0, cfg, typical, g).to_dict()
    assert a == b
    c = run_ensemble(2, 8, 1.0, cfg, typical, g).to_dict()
    assert c != a


def test_ensemble_records_embedding_constants(typical):
    g = Grid((1.0,), (16,))
    rep = run_ensemble(1, 1, 1.0, StepperConfig(dt=0.05, t_end=2.0, monitor_stride=5), typical, g,
                       C_hat=2.0, C_emb=3.0)
    for r in rep.records:
        assert r.constants_used["C_hat"] == 2.0 and r.constants_used["C_emb"] == 3.0


def test_report_passing_record_margin():
    r = CheckRecord("x", 2.0, 1.5, True, 1e-6)
    d = VerificationReport([r]).to_dict()
    assert d["all_pass"] is True
    assert d["checks"][0]["pass"] is True and d["checks"][0]["margin"] == 0.5
    with pytest.raises(KeyError):
        VerificationReport([r])["missing"]
