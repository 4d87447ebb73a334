import numpy as np
import pytest

from memhr.grid import (
    Grid, State, energy, h1_seminorm, h2_surrogate_norm, inner, integral, laplacian_neumann,
    norm_linf, norm_lp, state_norm_sq,
)


@pytest.mark.parametrize("grid", [Grid((1.0,), (17,)), Grid((2.0, 1.0), (8, 5)), Grid((1, 1, 1), (4, 3, 2))])
def test_laplacian_of_constant_is_zero(grid):
    assert np.all(laplacian_neumann(grid.constant(3.7), grid) == 0.0)


def test_single_cell_laplacian_zero():
    g = Grid((1.0,), (1,))
    assert laplacian_neumann(np.array([5.0]), g)[0] == 0.0


def test_invalid_grids():
    with pytest.raises(ValueError):
        Grid((1.0,), (0,))
    with pytest.raises(ValueError):
        Grid((1.0, 2.0), (4,))
    with pytest.raises(ValueError):
        Grid((-1.0,), (4,))


def _cos_error(n):
    g = Grid((1.0,), (n,))
    x = g.axis_coordinates(0)
    f = np.cos(np.pi * x)
    return norm_linf(laplacian_neumann(f, g) + np.pi**2 * f)


def test_cosine_eigenfunction_second_order():
    errs = np.array([_cos_error(n) for n in (32, 64, 128)])
    slopes = np.log2(errs[:-1] / errs[1:])
    assert np.all(np.abs(slopes - 2) < 0.1), slopes


def test_divergence_theorem(rng):
    g = Grid((1.5, 0.7), (11, 6))
    f = rng.normal(size=g.shape)
    assert abs(integral(laplacian_neumann(f, g), g)) < 1e-10 * norm_linf(f) * g.measure / min(g.spacing) ** 2


def test_self_adjoint_and_negative(rng):
    g = Grid((1.0, 2.0, 0.5), (5, 4, 3))
    f, h = rng.normal(size=(2,) + g.shape)
    lf, lh = laplacian_neumann(f, g), laplacian_neumann(h, g)
    assert inner(lf, h, g) == pytest.approx(inner(f, lh, g), rel=1e-12)
    assert inner(lf, f, g) <= 0
    assert -inner(lf, f, g) == pytest.approx(h1_seminorm(f, g) ** 2, rel=1e-12)


def test_norms_of_constant():
    g = Grid((2.0, 3.0), (4, 6))
    c = g.constant(2.0)
    assert norm_lp(c, g, 2) == pytest.approx(2.0 * np.sqrt(6.0))
    assert norm_lp(c, g, 4) == pytest.approx(2.0 * 6.0**0.25)
    assert norm_lp(c, g, 6) == pytest.approx(2.0 * 6.0 ** (1 / 6))
    assert norm_linf(-c) == 2.0
    assert h1_seminorm(c, g) == 0.0


def test_energy_and_state_norm():
    g = Grid((2.0,), (8,))
    s = State.constant(g, (1.0, 2.0, 3.0, 4.0))
    assert energy(s, g, 30.0) == pytest.approx(2.0 * (30 + 4 + 9 + 16))
    assert state_norm_sq(s, g) == pytest.approx(2.0 * 30)


def test_h2_surrogate():
    g = Grid((1.0,), (64,))
    f = np.cos(np.pi * g.axis_coordinates(0))
    expected = norm_lp(f, g) + 0.5 * norm_lp(laplacian_neumann(f, g), g)
    assert h2_surrogate_norm(f, g, 0.5) == pytest.approx(expected)
    assert h2_surrogate_norm(g.constant(1.0), g, 1.0) == pytest.approx(1.0)


def test_state_shape_mismatch():
    with pytest.raises(ValueError):
        State(np.zeros(3), np.zeros(3), np.zeros(4), np.zeros(3))
