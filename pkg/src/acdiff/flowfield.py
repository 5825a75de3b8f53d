"""Background velocity fields on the 2*pi-periodic torus.

A flow field is a triple of callbacks (b, dt_b, jac_b) supplying the
velocity together with its exact time derivative and spatial Jacobian.
All callbacks are vectorized: positions have shape (..., dim) and the
Jacobian returns (..., dim, dim).  Built-in fields keep their derivative
callbacks analytically consistent with the velocity; user-registered
fields are trusted (the test harness cross-checks them against finite
differences).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_torus(x):
    """Reduce each coordinate modulo 2*pi into [0, 2*pi).

    Accepts scalars or arrays; rejects non-finite input.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("torus coordinates must be finite")
    w = np.mod(x, TWO_PI)
    # np.mod can round up to the period itself for tiny negative inputs
    return np.where(w >= TWO_PI, 0.0, w)


@dataclass(frozen=True)
class Eps:
    """Dimensionless velocity-relaxation timescale; the noise/friction ratio mu is pinned to 1."""

    value: float
    mu: float = 1.0

    def __post_init__(self):
        if not (self.value > 0 and np.isfinite(self.value)):
            raise ValueError(f"eps must be a positive finite real, got {self.value}")
        if self.mu != 1.0:
            raise ValueError("mu is fixed at 1")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class FlowField:
    """Velocity field b(x, t) with exact time derivative and Jacobian.

    Immutable and stateless: instances are safe to share across workers.
    ``autonomous`` marks fields with no explicit time dependence so
    solvers may cache coefficient arrays.
    """

    dim: int
    name: str
    b: Callable[[np.ndarray, float], np.ndarray]
    dt_b: Callable[[np.ndarray, float], np.ndarray]
    jac_b: Callable[[np.ndarray, float], np.ndarray]
    autonomous: bool = False
    params: dict = field(default_factory=dict)


def material_acceleration(f: FlowField, x, t: float) -> np.ndarray:
    """Acceleration of a fluid element: dt_b + (jac_b) b, evaluated at (x, t)."""
    x = np.asarray(x, dtype=float)
    bv = f.b(x, t)
    return f.dt_b(x, t) + np.einsum("...ij,...j->...i", f.jac_b(x, t), bv)


def corrected_drift(f: FlowField, eps, x, t: float) -> np.ndarray:
    """Effective drift of the acceleration-corrected diffusion model.

    F(x, t) = b(x, t) - eps * (dt_b + jac_b b).  With eps = 0 this reduces
    to the plain velocity field.
    """
    e = float(eps)
    return f.b(np.asarray(x, dtype=float), t) - e * material_acceleration(f, x, t)


def _as_column(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (dim,):
        raise ValueError(f"expected trailing dimension {dim}, got shape {x.shape}")
    return x


def zero_field(dim: int = 1) -> FlowField:
    """The trivial field b = 0 in any dimension."""

    def b(x, t):
        return np.zeros_like(_as_column(x, dim))

    def jac(x, t):
        x = _as_column(x, dim)
        return np.zeros(x.shape + (dim,))

    return FlowField(dim=dim, name="zero", b=b, dt_b=b, jac_b=jac, autonomous=True,
                     params={"dim": dim})


def pulsating_field() -> FlowField:
    """1D field b(x, t) = sin(x) sin(t) (compressible, time-periodic)."""

    def b(x, t):
        x = _as_column(x, 1)
        return np.sin(x) * np.sin(t)

    def dt_b(x, t):
        x = _as_column(x, 1)
        return np.sin(x) * np.cos(t)

    def jac(x, t):
        x = _as_column(x, 1)
        return (np.cos(x) * np.sin(t))[..., None]

    return FlowField(dim=1, name="sinxsint", b=b, dt_b=dt_b, jac_b=jac, autonomous=False)


def vortex_field() -> FlowField:
    """2D steady divergence-free field b(x) = (sin x2, sin x1)."""

    def b(x, t):
        x = _as_column(x, 2)
        return np.stack([np.sin(x[..., 1]), np.sin(x[..., 0])], axis=-1)

    def dt_b(x, t):
        return np.zeros_like(_as_column(x, 2))

    def jac(x, t):
        x = _as_column(x, 2)
        z = np.zeros_like(x[..., 0])
        row1 = np.stack([z, np.cos(x[..., 1])], axis=-1)
        row2 = np.stack([np.cos(x[..., 0]), z], axis=-1)
        return np.stack([row1, row2], axis=-2)

    return FlowField(dim=2, name="vortex2d", b=b, dt_b=dt_b, jac_b=jac, autonomous=True)


_BUILTIN = {
    "zero": zero_field,
    "sinxsint": pulsating_field,
    "vortex2d": vortex_field,
}


def make_field(name: str, **params) -> FlowField:
    """Look up a built-in field by its config name."""
    try:
        factory = _BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown field {name!r}; choose from {sorted(_BUILTIN)}") from None
    return factory(**params)
