"""Estimators comparing Monte-Carlo ensembles, kinetic marginals and
diffusion solutions: coupled strong/weak errors, Fourier-mode functionals,
log-log slope fits, and periodic kernel density estimation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .addiff import DensityLine
from .flowfield import TWO_PI
from .sde import ParticleEnsemble


class UsageError(ValueError):
    """Raised when estimator inputs are structurally incompatible."""


def torus_distance(a, b) -> np.ndarray:
    """Euclidean length of the per-coordinate wrapped differences.

    Coordinates are compared along the shortest arc:
    d(p, q) = min(|p - q|, 2 pi - |p - q|) per component.
    """
    d = np.abs(np.asarray(a, float) - np.asarray(b, float))
    d = np.minimum(d, TWO_PI - d)
    return np.sqrt((d * d).sum(axis=-1))


def _require_coupled(ea: ParticleEnsemble, eb: ParticleEnsemble):
    if not ea.coupled_with(eb):
        raise UsageError(
            "ensembles are not coupled (need equal base_seed, path count and step count); "
            f"got seeds {ea.base_seed}/{eb.base_seed}, shapes "
            f"{ea.positions.shape}/{eb.positions.shape}, steps {ea.n_steps}/{eb.n_steps}"
        )


def strong_error_p(ea: ParticleEnsemble, eb: ParticleEnsemble, p) -> tuple[float, float]:
    """Sample moment E d(X, Z)^p over coupled paths, with its standard error."""
    if p < 1:
        raise UsageError("p must be >= 1")
    _require_coupled(ea, eb)
    y = torus_distance(ea.positions, eb.positions) ** p
    m = y.shape[0]
    return float(y.mean()), float(y.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0


def weak_error_phi(ea: ParticleEnsemble, eb: ParticleEnsemble, k: int = 1) -> tuple[float, float]:
    """|E phi(X) - E phi(Z)| for phi(x) = cos(k x_1), common random numbers.

    The standard error is that of the paired difference, which is what the
    coupling buys.
    """
    _require_coupled(ea, eb)
    diff = np.cos(k * ea.positions[:, 0]) - np.cos(k * eb.positions[:, 0])
    m = diff.shape[0]
    se = float(diff.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return float(abs(diff.mean())), se


def fourier_cos_mode(u: DensityLine, k: int) -> float:
    """Grid quadrature of int u(x) cos(k x) dx (spectrally accurate on cells)."""
    x = u.grid.centers
    return float((u.values * np.cos(k * x)).sum() * u.grid.dx)


def pde_weak_error(u: DensityLine, g: DensityLine, k: int) -> float:
    """|int (u - g) cos(k x) dx| for two densities on the same grid."""
    if u.grid.n != g.grid.n:
        raise UsageError(f"grid mismatch: {u.grid.n} vs {g.grid.n} cells")
    x = u.grid.centers
    return float(abs(((u.values - g.values) * np.cos(k * x)).sum() * u.grid.dx))


def fit_loglog_slope(points) -> tuple[float, float, float]:
    """Least-squares slope of log(error) against log(eps).

    ``points`` is an iterable of (eps, error) pairs, all positive; returns
    (slope, intercept, r_squared).
    """
    pts = [(float(e), float(v)) for e, v in points]
    if len(pts) < 3:
        raise UsageError("need at least 3 points for a slope fit")
    if any(e <= 0 or v <= 0 for e, v in pts):
        raise UsageError("log-log fit needs positive eps and errors")
    lx = np.log([e for e, _ in pts])
    ly = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid**2).sum()) / ss_tot
    return float(slope), float(intercept), r2


@dataclass
class ErrorReport:
    """(eps, error) series for one experiment, with its fitted rate."""

    experiment: str
    points: list            # rows (eps, error, stderr or None)
    slope: float
    intercept: float
    r_squared: float
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_points(cls, experiment: str, points, metadata=None) -> "ErrorReport":
        pts = sorted(points, key=lambda row: -row[0])
        eps = [row[0] for row in pts]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise UsageError("eps values must be distinct")
        slope, intercept, r2 = fit_loglog_slope([(row[0], row[1]) for row in pts])
        return cls(experiment=experiment, points=pts, slope=slope,
                   intercept=intercept, r_squared=r2, metadata=dict(metadata or {}))


@dataclass
class Density2DEstimate:
    """Kernel density estimate on the cell-centered [0, 2 pi)^2 grid."""

    values: np.ndarray
    bandwidth: tuple[float, float]
    n_samples: int

    @property
    def grid_n(self) -> int:
        return self.values.shape[0]

    @property
    def dx(self) -> float:
        return TWO_PI / self.grid_n

    def mass(self) -> float:
        return float(self.values.sum() * self.dx * self.dx)


def silverman_bandwidth_circular(samples_1d: np.ndarray) -> float:
    """Silverman rule h = 1.06 sigma m^(-1/5) with a circular spread estimate.

    sigma is sqrt(-2 log R) where R is the mean resultant length; for
    nearly uniform samples R is tiny and the raw rule oversmooths, so h
    is capped at 1 (also the validity bound of the 3-image wrapped
    kernel).
    """
    s = np.asarray(samples_1d, dtype=float)
    r = float(np.hypot(np.cos(s).mean(), np.sin(s).mean()))
    r = min(max(r, 1e-12), 1.0 - 1e-12)
    sigma = math.sqrt(-2.0 * math.log(r))
    return min(1.06 * sigma * s.shape[0] ** -0.2, 1.0)


def _axis_kernel(centers: np.ndarray, samples: np.ndarray, h: float) -> np.ndarray:
    d = centers[:, None] - samples[None, :]
    acc = np.zeros_like(d)
    for shift in (-TWO_PI, 0.0, TWO_PI):
        acc += np.exp(-0.5 * ((d + shift) / h) ** 2)
    return acc / (h * math.sqrt(2.0 * math.pi))


def kde_2d(samples, grid_n: int, bandwidth="silverman") -> Density2DEstimate:
    """Wrapped Gaussian product-kernel density estimate on the torus.

    ``bandwidth`` is "silverman" (per-axis circular rule) or an explicit
    h used for both axes.  Kernel images at +-2 pi make the estimate
    periodic; for h < 1 the truncation is far below rounding error.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise UsageError("samples must have shape (m, 2)")
    if samples.shape[0] < 100:
        raise UsageError("kernel density estimate needs at least 100 samples")
    if bandwidth == "silverman":
        hx = silverman_bandwidth_circular(samples[:, 0])
        hy = silverman_bandwidth_circular(samples[:, 1])
    else:
        hx = hy = float(bandwidth)
        if not hx > 0:
            raise UsageError("bandwidth must be positive")
    centers = (np.arange(grid_n) + 0.5) * (TWO_PI / grid_n)
    # fixed-size sample chunks keep memory bounded and the reduction order
    # deterministic
    chunk = 32768
    values = np.zeros((grid_n, grid_n))
    for start in range(0, samples.shape[0], chunk):
        block = samples[start:start + chunk]
        kx = _axis_kernel(centers, block[:, 0], hx)
        ky = _axis_kernel(centers, block[:, 1], hy)
        values += kx @ ky.T
    values /= samples.shape[0]
    return Density2DEstimate(values=values, bandwidth=(hx, hy), n_samples=samples.shape[0])


def density_distance(a, b, norm: str = "l2") -> float:
    """Grid L2 or Linf distance between two fields on the same [0, 2 pi)^d grid."""
    va = np.asarray(getattr(a, "values", a), dtype=float)
    vb = np.asarray(getattr(b, "values", b), dtype=float)
    if va.shape != vb.shape:
        raise UsageError(f"grid mismatch: {va.shape} vs {vb.shape}")
    diff = va - vb
    if norm == "linf":
        return float(np.abs(diff).max())
    if norm == "l2":
        cell = (TWO_PI / va.shape[0]) ** va.ndim if va.ndim else 1.0
        return float(math.sqrt((diff * diff).sum() * cell))
    raise UsageError(f"unknown norm {norm!r}")
