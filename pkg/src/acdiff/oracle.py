"""Closed-form ground truth for the free (b = 0) Langevin problem.

With no background flow the velocity is an Ornstein-Uhlenbeck process and
every moment needed by the error analysis is available in closed form via
the filtered noise

    P_t = int_0^t exp(-(t-s)/eps) dW_s ,

a Gaussian process with per-component variance (eps/2)(1 - exp(-2t/eps)).
These formulas are the reference values for the Monte-Carlo estimators;
they are used nowhere inside the simulators themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def ou_sigma_sq(eps, t) -> float:
    """Per-component variance of P_t: (eps/2)(1 - exp(-2t/eps))."""
    e = float(eps)
    if t < 0:
        raise ValueError("t must be nonnegative")
    return 0.5 * e * (-math.expm1(-2.0 * t / e))


def ou_pw_cross(eps, t, n: int) -> float:
    """E[P_t . W_t] = eps * n * (1 - exp(-t/eps)) for n components."""
    e = float(eps)
    if t < 0 or n < 1:
        raise ValueError("need t >= 0 and n >= 1")
    return e * n * (-math.expm1(-t / e))


def ou_p_moment(eps, t, n: int, p) -> float:
    """E|P_t|^p = sigma_t^p 2^(p/2) Gamma((n+p)/2) / Gamma(n/2).

    |P_t|/sigma_t follows a chi distribution with n degrees of freedom.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    sigma = math.sqrt(ou_sigma_sq(eps, t))
    return sigma**p * 2 ** (p / 2) * math.gamma(0.5 * (n + p)) / math.gamma(0.5 * n)


def free_strong_error_sq(eps, t, n: int) -> float:
    """E|X_t - Z_t|^2 for the free problem with V_0 ~ N(0, I_n).

    The coupled difference is eps(1-exp(-t/eps)) V_0 - sqrt(2 eps) P_t with
    V_0 independent of the noise, giving
    n eps^2 [(1 - exp(-t/eps))^2 + (1 - exp(-2t/eps))].
    """
    e = float(eps)
    if t < 0:
        raise ValueError("t must be nonnegative")
    em1 = -math.expm1(-t / e)
    em2 = -math.expm1(-2.0 * t / e)
    return n * e * e * (em1 * em1 + em2)


def free_pathwise_position(eps, t, v0, w_t, p_t) -> np.ndarray:
    """Exact free-flow position from a consistent (W_t, P_t) pair.

    X_t = eps (1 - exp(-t/eps)) V_0 + sqrt(2 eps) (W_t - P_t), relative to
    the starting point.
    """
    e = float(eps)
    v0 = np.asarray(v0, dtype=float)
    w_t = np.asarray(w_t, dtype=float)
    p_t = np.asarray(p_t, dtype=float)
    return e * (-math.expm1(-t / e)) * v0 + math.sqrt(2.0 * e) * (w_t - p_t)


def ou_filter_recursion(eps, dt, dw_increments) -> np.ndarray:
    """Discrete P_t built from Brownian increments with midpoint weighting.

    P_{k+1} = exp(-dt/eps) P_k + exp(-dt/(2 eps)) dW_k, starting from 0.
    Returns the full path P_1..P_K stacked along axis 0.  This is the
    discrete counterpart used by the pathwise self-consistency test.
    """
    e = float(eps)
    dw = np.asarray(dw_increments, dtype=float)
    decay = math.exp(-dt / e)
    half = math.exp(-0.5 * dt / e)
    out = np.empty_like(dw)
    acc = np.zeros_like(dw[0])
    for k in range(dw.shape[0]):
        acc = decay * acc + half * dw[k]
        out[k] = acc
    return out


@dataclass(frozen=True)
class OuMoments:
    """Bundle of the filtered-noise moments at a fixed (eps, t)."""

    eps: float
    t: float
    n: int

    @property
    def sigma_sq(self) -> float:
        return ou_sigma_sq(self.eps, self.t)

    @property
    def ew_cross(self) -> float:
        return ou_pw_cross(self.eps, self.t, self.n)

    def p_moment(self, p) -> float:
        return ou_p_moment(self.eps, self.t, self.n, p)
