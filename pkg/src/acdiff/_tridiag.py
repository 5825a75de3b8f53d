"""Batched tridiagonal solvers (Thomas algorithm, plus Sherman-Morrison
for periodic systems).

All routines solve along axis 0 and broadcast over any trailing axes, so
one call handles every independent column of a 2D sweep.  The velocity
operators this package builds are strictly diagonally dominant, so no
pivoting is needed.
"""

from __future__ import annotations

import numpy as np


class TridiagError(RuntimeError):
    """Raised when a tridiagonal solve hits a (near-)singular pivot."""


def solve_tridiag(lower, diag, upper, rhs):
    """Solve the tridiagonal system A x = rhs along axis 0.

    Row i reads: lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i],
    with lower[0] and upper[-1] ignored.  All arrays share shape
    (n, ...) and trailing axes are treated as independent systems.
    """
    lower, diag, upper, rhs = np.broadcast_arrays(lower, diag, upper, rhs)
    n = diag.shape[0]
    cp = np.empty(diag.shape)
    dp = np.empty(rhs.shape)
    piv = diag[0]
    _check_pivot(piv)
    cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i] * cp[i - 1]
        if i == n - 1:
            _check_pivot(piv)
        cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / piv
    x = np.empty(rhs.shape)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def solve_periodic_tridiag(lower, diag, upper, rhs, corner_first_last, corner_last_first):
    """Solve a cyclic tridiagonal system via Sherman-Morrison.

    ``corner_first_last`` is A[0, n-1] (the wrap coefficient in the first
    row), ``corner_last_first`` is A[n-1, 0].  Corner arrays broadcast
    against the trailing axes of the band arrays.
    """
    lower, diag, upper, rhs = np.broadcast_arrays(lower, diag, upper, rhs)
    n = diag.shape[0]
    if n < 3:
        raise TridiagError("periodic solve needs n >= 3")
    alpha = np.broadcast_to(np.asarray(corner_first_last, dtype=float), diag.shape[1:])
    beta = np.broadcast_to(np.asarray(corner_last_first, dtype=float), diag.shape[1:])

    # A = A' + u v^T with u = (gamma, 0, .., beta), v = (1, 0, .., alpha/gamma)
    gamma = -diag[0]
    diag_mod = diag.copy()
    diag_mod[0] = diag[0] - gamma
    diag_mod[n - 1] = diag[n - 1] - alpha * beta / gamma

    y = solve_tridiag(lower, diag_mod, upper, rhs)
    u = np.zeros(rhs.shape)
    u[0] = gamma
    u[n - 1] = beta
    q = solve_tridiag(lower, diag_mod, upper, u)

    vy = y[0] + (alpha / gamma) * y[n - 1]
    vq = q[0] + (alpha / gamma) * q[n - 1]
    denom = 1.0 + vq
    _check_pivot(denom)
    return y - q * (vy / denom)


def _check_pivot(piv):
    if not np.all(np.isfinite(piv)) or np.any(np.abs(piv) < 1e-300):
        raise TridiagError(
            f"singular tridiagonal pivot (min |pivot| = {np.min(np.abs(piv)):.3e})"
        )


class PeriodicTridiagSolver:
    """Prefactored cyclic tridiagonal solver for repeated right-hand sides.

    Factors once (LU of the rank-one-corrected band plus the
    Sherman-Morrison correction vector) and then solves each rhs with two
    substitution sweeps.  Shapes follow :func:`solve_tridiag`.
    """

    def __init__(self, lower, diag, upper, corner_first_last, corner_last_first):
        lower, diag, upper = np.broadcast_arrays(lower, diag, upper)
        n = diag.shape[0]
        if n < 3:
            raise TridiagError("periodic solve needs n >= 3")
        alpha = np.broadcast_to(np.asarray(corner_first_last, dtype=float), diag.shape[1:])
        beta = np.broadcast_to(np.asarray(corner_last_first, dtype=float), diag.shape[1:])
        gamma = -diag[0]
        diag_mod = diag.copy()
        diag_mod[0] = diag[0] - gamma
        diag_mod[n - 1] = diag[n - 1] - alpha * beta / gamma

        self.n = n
        self.lower = lower
        self.piv = np.empty(diag.shape)
        self.cp = np.empty(diag.shape)
        self.piv[0] = diag_mod[0]
        _check_pivot(self.piv[0])
        self.cp[0] = upper[0] / self.piv[0]
        for i in range(1, n):
            self.piv[i] = diag_mod[i] - lower[i] * self.cp[i - 1]
            self.cp[i] = upper[i] / self.piv[i]
        _check_pivot(self.piv[n - 1])

        u = np.zeros(diag.shape)
        u[0] = gamma
        u[n - 1] = beta
        self._alpha_over_gamma = alpha / gamma
        self._q = self._solve_core(u)
        self._denom = 1.0 + self._q[0] + self._alpha_over_gamma * self._q[n - 1]
        _check_pivot(self._denom)

    def _solve_core(self, rhs):
        n = self.n
        dp = np.empty(rhs.shape)
        dp[0] = rhs[0] / self.piv[0]
        for i in range(1, n):
            dp[i] = (rhs[i] - self.lower[i] * dp[i - 1]) / self.piv[i]
        x = np.empty(rhs.shape)
        x[n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - self.cp[i] * x[i + 1]
        return x

    def solve(self, rhs):
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (self.n,) + self.piv.shape[1:])
        y = self._solve_core(rhs)
        vy = y[0] + self._alpha_over_gamma * y[self.n - 1]
        return y - self._q * (vy / self._denom)
