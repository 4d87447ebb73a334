"""Compiled inner loops: banded solves and the homogeneous RK4 oracle."""

from __future__ import annotations

import math

import numba as nb
import numpy as np


@nb.njit(cache=True)
def thomas_factor(lower, diag, upper):
    """Precompute the elimination coefficients of a tridiagonal matrix.

    ``lower[0]`` and ``upper[-1]`` are ignored. Returns ``(cprime, inv_denom)``.
    """
    n = diag.shape[0]
    cprime = np.zeros(n)
    inv_denom = np.zeros(n)
    inv_denom[0] = 1.0 / diag[0]
    if n > 1:
        cprime[0] = upper[0] * inv_denom[0]
    for i in range(1, n):
        inv_denom[i] = 1.0 / (diag[i] - lower[i] * cprime[i - 1])
        if i < n - 1:
            cprime[i] = upper[i] * inv_denom[i]
    return cprime, inv_denom


@nb.njit(cache=True)
def thomas_solve_columns(lower, cprime, inv_denom, rhs, out):
    """Solve the factored system for every column of ``rhs`` (shape ``(n, m)``)."""
    n, m = rhs.shape
    for j in range(m):
        out[0, j] = rhs[0, j] * inv_denom[0]
        for i in range(1, n):
            out[i, j] = (rhs[i, j] - lower[i] * out[i - 1, j]) * inv_denom[i]
        for i in range(n - 2, -1, -1):
            out[i, j] -= cprime[i] * out[i + 1, j]


# parameter vector layout for the compiled right-hand side
PARAM_ORDER = ("a", "b", "alpha", "beta", "q", "r", "u_e", "J_e", "k1", "k2", "gamma", "delta", "c")


@nb.njit(cache=True)
def _ode_rhs(x, prm, tanh_kind, out):
    a, b, alpha, beta, q, r, u_e, J_e, k1, k2, gamma, delta, c = (
        prm[0], prm[1], prm[2], prm[3], prm[4], prm[5], prm[6],
        prm[7], prm[8], prm[9], prm[10], prm[11], prm[12],
    )
    u = x[0]
    v = x[1]
    w = x[2]
    rho = x[3]
    if tanh_kind:
        phi = math.tanh(rho)
    else:
        phi = c + gamma * rho + delta * rho * rho
    out[0] = a * u * u - b * u * u * u + v - w + J_e - k1 * phi * u
    out[1] = alpha - beta * u * u - v
    out[2] = q * (u - u_e) - r * w
    out[3] = u - k2 * rho


@nb.njit(cache=True)
def rk4_homogeneous(x0, prm, tanh_kind, dt, n_steps, stride, guard):
    """Classical RK4 on the 4D ODE; records every ``stride`` steps and the last.

    Returns ``(times, states, status)``; ``status >= 0`` is the step index at
    which the overflow guard tripped, ``-1`` means success.
    """
    n_out = n_steps // stride + 1
    if n_steps % stride != 0:
        n_out += 1
    times = np.empty(n_out)
    states = np.empty((n_out, 4))
    x = x0.copy()
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    times[0] = 0.0
    states[0] = x
    row = 1
    for step in range(1, n_steps + 1):
        _ode_rhs(x, prm, tanh_kind, k1)
        for i in range(4):
            tmp[i] = x[i] + 0.5 * dt * k1[i]
        _ode_rhs(tmp, prm, tanh_kind, k2)
        for i in range(4):
            tmp[i] = x[i] + 0.5 * dt * k2[i]
        _ode_rhs(tmp, prm, tanh_kind, k3)
        for i in range(4):
            tmp[i] = x[i] + dt * k3[i]
        _ode_rhs(tmp, prm, tanh_kind, k4)
        for i in range(4):
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        for i in range(4):
            if not (abs(x[i]) <= guard):
                times[row] = step * dt
                states[row] = x
                return times[: row + 1], states[: row + 1], step
        if step % stride == 0 or step == n_steps:
            times[row] = step * dt
            states[row] = x
            row += 1
    return times[:row], states[:row], -1
