"""Path simulators for the inertial Langevin system and its diffusion
approximations, all drivable from one shared noise stream.

Models
------
langevin   : dX = V dt,  dV = (b(X,t) - V)/eps dt + sqrt(2/eps) dW
corrected  : dZ = [b - eps*(dt_b + Db b)](Z,t) dt + sqrt(2 eps) dW
naive      : dZ = b(Z,t) dt + sqrt(2 eps) dW
ode        : dX/dt = b(X,t)                     (averaged flow, noise-free)
kifer      : X̄ from the averaged flow plus a Gaussian fluctuation
             dR = Db(X̄,t) R dt + sqrt(2) dW, observed at X̄ + sqrt(eps) R

Noise layout
------------
Path i draws from ``default_rng(SeedSequence((base_seed, i)))``: first a
block of n standard normals (initial velocity fluctuation), then one
block of 2n standard normals per step.  The first half of each step
block is the Brownian increment (dW = sqrt(dt) z1) shared by every
model; the second half is the extra Gaussian freedom the exact
Ornstein-Uhlenbeck transition needs.  Because all models read the same
blocks, coupled runs use common random numbers by construction, and the
result for a path never depends on chunking or on which models run
alongside it.

The Langevin exponential scheme freezes b over each step and applies the
exact joint Gaussian transition of (position increment, velocity); it is
exact for constant b and carries an O(dt) bias with an eps-independent
constant otherwise, so it stays robust as eps -> 0.  Euler-Maruyama is
kept as a stiff-limited reference (dt <= eps/10 enforced).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .flowfield import FlowField, corrected_drift, wrap_torus

MODELS = ("langevin", "corrected", "naive", "ode", "kifer")
SCHEMES = ("exponential-ou", "euler-maruyama", "rk4-deterministic")

# The fluctuation SDE of the `kifer` model uses the same dispersion as the
# diffusion approximations: after the sqrt(eps) rescaling of R its noise
# term must match sqrt(2 eps) dW, hence the sqrt(2).
KIFER_NOISE_SCALE = math.sqrt(2.0)


class ConfigurationError(ValueError):
    """Raised for step configurations outside a scheme's validity range."""


@dataclass(frozen=True)
class StepConfig:
    scheme: str
    dt: float
    eps: float

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ConfigurationError("dt must be positive and finite")
        if not (float(self.eps) > 0):
            raise ConfigurationError("eps must be positive")

    def require_em_stability(self):
        if self.dt > float(self.eps) / 10.0 * (1 + 1e-12):
            raise ConfigurationError(
                f"euler-maruyama on the Langevin system needs dt <= eps/10 "
                f"(dt={self.dt:g}, eps={float(self.eps):g})"
            )


@dataclass
class LangevinState:
    x: np.ndarray
    v: np.ndarray
    t: float


@dataclass
class DiffusionState:
    z: np.ndarray
    t: float


@dataclass
class KiferState:
    xbar: np.ndarray
    r: np.ndarray
    t: float

    def position(self, eps) -> np.ndarray:
        """Observable position X̄ + sqrt(eps) R, wrapped to the torus."""
        return wrap_torus(self.xbar + math.sqrt(float(eps)) * self.r)


class NoiseStream:
    """Reproducible per-path stream of standard normals.

    Streams with equal (base_seed, path_index) emit identical sequences.
    """

    def __init__(self, base_seed: int, path_index: int):
        self.base_seed = int(base_seed)
        self.path_index = int(path_index)
        self._gen = np.random.default_rng(
            np.random.SeedSequence((self.base_seed, self.path_index))
        )

    def normals(self, *shape) -> np.ndarray:
        return self._gen.standard_normal(shape)


def _expou_coeffs(eps: float, dt: float):
    """Coefficients of the exact frozen-b Ornstein-Uhlenbeck transition.

    Returns (decay, pos_mem, c_w, c_extra) with
      decay    = exp(-dt/eps)
      pos_mem  = eps (1 - decay)                  position memory of v - b
      c_w      = Cov(xi_v, dW)/sqrt(dt)           loading of xi_v on z1
      c_extra  = sqrt(Var(xi_v) - c_w^2)          loading of xi_v on z2
    and the position noise follows exactly as
      xi_x = sqrt(2 eps) dW - eps xi_v.
    """
    decay = math.exp(-dt / eps)
    one_m = -math.expm1(-dt / eps)
    var_v = -math.expm1(-2.0 * dt / eps)
    cov_wv = math.sqrt(2.0 * eps) * one_m
    c_w = cov_wv / math.sqrt(dt)
    c_extra = math.sqrt(max(var_v - c_w * c_w, 0.0))
    return decay, eps * one_m, c_w, c_extra


def _expou_kernel(x, v, t, f: FlowField, eps: float, dt: float, z1, z2):
    decay, pos_mem, c_w, c_extra = _expou_coeffs(eps, dt)
    dw = math.sqrt(dt) * z1
    xi_v = c_w * z1 + c_extra * z2
    xi_x = math.sqrt(2.0 * eps) * dw - eps * xi_v
    bn = f.b(x, t)
    dv = v - bn
    x_new = wrap_torus(x + bn * dt + dv * pos_mem + xi_x)
    v_new = bn + dv * decay + xi_v
    return x_new, v_new


def _em_kernel(x, v, t, f: FlowField, eps: float, dt: float, dw):
    bn = f.b(x, t)
    x_new = wrap_torus(x + v * dt)
    v_new = v + (bn - v) * (dt / eps) + math.sqrt(2.0 / eps) * dw
    return x_new, v_new


def _rk4_kernel(x, t, f: FlowField, dt: float):
    k1 = f.b(x, t)
    k2 = f.b(x + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f.b(x + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f.b(x + dt * k3, t + dt)
    return wrap_torus(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def step_langevin_em(s: LangevinState, f: FlowField, cfg: StepConfig, dw) -> LangevinState:
    """One Euler-Maruyama step of the Langevin pair; requires dt <= eps/10."""
    cfg.require_em_stability()
    x, v = _em_kernel(np.asarray(s.x, float), np.asarray(s.v, float), s.t,
                      f, float(cfg.eps), cfg.dt, np.asarray(dw, float))
    return LangevinState(x=x, v=v, t=s.t + cfg.dt)


def step_langevin_expou(s: LangevinState, f: FlowField, cfg: StepConfig, noise) -> LangevinState:
    """One exact-relaxation step with b frozen at (x, t).

    ``noise`` holds 2n standard normals: the first n fix the Brownian
    increment of the step, the rest supply the remaining freedom of the
    joint (position, velocity) Gaussian.  No step-size restriction.
    """
    noise = np.asarray(noise, dtype=float)
    n = f.dim
    z1, z2 = noise[..., :n], noise[..., n:]
    x, v = _expou_kernel(np.asarray(s.x, float), np.asarray(s.v, float), s.t,
                         f, float(cfg.eps), cfg.dt, z1, z2)
    return LangevinState(x=x, v=v, t=s.t + cfg.dt)


def step_diffusion(s: DiffusionState, f: FlowField, cfg: StepConfig, drift: str, dw) -> DiffusionState:
    """Euler-Maruyama step of dZ = drift dt + sqrt(2 eps) dW.

    ``drift`` selects "corrected" (acceleration-corrected field) or
    "naive" (plain b).
    """
    if drift not in ("corrected", "naive"):
        raise ValueError(f"drift must be 'corrected' or 'naive', got {drift!r}")
    z = np.asarray(s.z, dtype=float)
    eps = float(cfg.eps)
    if drift == "corrected":
        mu = corrected_drift(f, eps, z, s.t)
    else:
        mu = f.b(z, s.t)
    z_new = wrap_torus(z + mu * cfg.dt + math.sqrt(2.0 * eps) * np.asarray(dw, float))
    return DiffusionState(z=z_new, t=s.t + cfg.dt)


def step_averaged_ode(s: DiffusionState, f: FlowField, cfg: StepConfig) -> DiffusionState:
    """One classical RK4 step of the averaged flow dx/dt = b(x, t)."""
    return DiffusionState(z=_rk4_kernel(np.asarray(s.z, float), s.t, f, cfg.dt), t=s.t + cfg.dt)


def step_kifer(s: KiferState, f: FlowField, cfg: StepConfig, dw) -> KiferState:
    """Advance the averaged path by RK4 and its Gaussian fluctuation by Euler.

    The fluctuation R lives in R^n (never wrapped); only the observable
    position X̄ + sqrt(eps) R is reduced to the torus, at observation time.
    """
    xbar = np.asarray(s.xbar, dtype=float)
    r = np.asarray(s.r, dtype=float)
    jac = f.jac_b(xbar, s.t)
    r_new = r + np.einsum("...ij,...j->...i", jac, r) * cfg.dt \
        + KIFER_NOISE_SCALE * np.asarray(dw, float)
    return KiferState(xbar=_rk4_kernel(xbar, s.t, f, cfg.dt), r=r_new, t=s.t + cfg.dt)


@dataclass
class ParticleEnsemble:
    """Final states of a batch of coupled paths."""

    model: str
    positions: np.ndarray            # (n_paths, dim), wrapped
    velocities: np.ndarray | None    # Langevin only
    eps: float
    dt: float
    t_final: float
    n_steps: int
    base_seed: int
    field_name: str

    @property
    def n_paths(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def coupled_with(self, other: "ParticleEnsemble") -> bool:
        return (
            self.base_seed == other.base_seed
            and self.positions.shape == other.positions.shape
            and self.n_steps == other.n_steps
        )


def _resolve_steps(T: float, dt: float):
    """Fixed-step count hitting T exactly; dt is nudged when T/dt is not an integer."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    if T == 0:
        return 0, dt
    n_steps = max(1, int(round(T / dt)))
    return n_steps, T / n_steps


def _default_chunk(n_steps: int, dim: int, n_paths: int) -> int:
    # cap the materialized noise block around 256 MB
    per_path = max(1, n_steps) * 2 * dim * 8
    return int(min(n_paths, max(64, 2.5e8 // per_path)))


def simulate_coupled(
    models: Sequence[str],
    f: FlowField,
    cfg: StepConfig,
    n_paths: int,
    T: float,
    x0,
    v0_law: str = "std-normal",
    base_seed: int = 0,
    chunk_paths: int | None = None,
) -> dict[str, ParticleEnsemble]:
    """Simulate several models over the identical per-path noise.

    Every path starts at x0 with Langevin velocity b(x0, 0) + V~ where V~
    follows ``v0_law`` ("std-normal" or "zero").  Results are bit-identical
    whether models run together or one at a time, and do not depend on
    ``chunk_paths``.
    """
    for m in models:
        if m not in MODELS:
            raise ValueError(f"unknown model {m!r}; choose from {MODELS}")
    if v0_law not in ("std-normal", "zero"):
        raise ValueError(f"v0_law must be 'std-normal' or 'zero', got {v0_law!r}")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if cfg.scheme == "euler-maruyama" and "langevin" in models:
        cfg.require_em_stability()

    n = f.dim
    eps = float(cfg.eps)
    x0 = wrap_torus(np.asarray(x0, dtype=float).reshape(n))
    n_steps, dt = _resolve_steps(T, cfg.dt)
    chunk = chunk_paths or _default_chunk(n_steps, n, n_paths)

    pos = {m: np.empty((n_paths, n)) for m in models}
    vel = np.empty((n_paths, n)) if "langevin" in models else None

    for start in range(0, n_paths, chunk):
        stop = min(start + chunk, n_paths)
        bsz = stop - start
        v0_noise = np.empty((bsz, n))
        noise = np.empty((n_steps, bsz, 2 * n))
        for i, pidx in enumerate(range(start, stop)):
            stream = NoiseStream(base_seed, pidx)
            v0_noise[i] = stream.normals(n)
            if n_steps:
                noise[:, i, :] = stream.normals(n_steps, 2 * n)

        vtil0 = v0_noise if v0_law == "std-normal" else np.zeros_like(v0_noise)
        for model in models:
            p, v = _run_model_chunk(model, f, eps, dt, n_steps, x0, vtil0, noise)
            pos[model][start:stop] = p
            if model == "langevin":
                vel[start:stop] = v

    out = {}
    for model in models:
        out[model] = ParticleEnsemble(
            model=model,
            positions=pos[model],
            velocities=vel if model == "langevin" else None,
            eps=eps,
            dt=dt,
            t_final=T,
            n_steps=n_steps,
            base_seed=base_seed,
            field_name=f.name,
        )
    return out


def simulate_ensemble(
    model: str,
    f: FlowField,
    cfg: StepConfig,
    n_paths: int,
    T: float,
    x0,
    v0_law: str = "std-normal",
    base_seed: int = 0,
    chunk_paths: int | None = None,
) -> ParticleEnsemble:
    """Single-model convenience wrapper around :func:`simulate_coupled`."""
    return simulate_coupled([model], f, cfg, n_paths, T, x0, v0_law, base_seed,
                            chunk_paths)[model]


def _run_model_chunk(model, f, eps, dt, n_steps, x0, vtil0, noise):
    bsz = vtil0.shape[0]
    n = f.dim
    sq_dt = math.sqrt(dt) if n_steps else 0.0

    if model == "langevin":
        x = np.broadcast_to(x0, (bsz, n)).copy()
        v = f.b(x, 0.0) + vtil0
        for k in range(n_steps):
            t = k * dt
            z1 = noise[k, :, :n]
            z2 = noise[k, :, n:]
            x, v = _expou_kernel(x, v, t, f, eps, dt, z1, z2)
        return x, v

    if model in ("corrected", "naive"):
        z = np.broadcast_to(x0, (bsz, n)).copy()
        for k in range(n_steps):
            t = k * dt
            dw = sq_dt * noise[k, :, :n]
            if model == "corrected":
                mu = corrected_drift(f, eps, z, t)
            else:
                mu = f.b(z, t)
            z = wrap_torus(z + mu * dt + math.sqrt(2.0 * eps) * dw)
        return z, None

    if model == "ode":
        x = np.broadcast_to(x0, (bsz, n)).copy()
        for k in range(n_steps):
            x = _rk4_kernel(x, k * dt, f, dt)
        return x, None

    if model == "kifer":
        xbar = np.broadcast_to(x0, (bsz, n)).copy()
        r = np.zeros((bsz, n))
        sq_eps = math.sqrt(eps)
        for k in range(n_steps):
            t = k * dt
            dw = sq_dt * noise[k, :, :n]
            jac = f.jac_b(xbar, t)
            r = r + np.einsum("...ij,...j->...i", jac, r) * dt + KIFER_NOISE_SCALE * dw
            xbar = _rk4_kernel(xbar, t, f, dt)
        return wrap_torus(xbar + sq_eps * r), None

    raise AssertionError(model)


def write_ensemble_csv(path, ensembles: Iterable[ParticleEnsemble], comment: str = ""):
    """Write final states as CSV: path_index, model, x_1..x_n, v_1..v_n.

    Velocity columns are left empty for models that do not carry one.
    """
    ensembles = list(ensembles)
    if not ensembles:
        raise ValueError("no ensembles to write")
    n = ensembles[0].dim
    cols = ["path_index", "model"] + [f"x_{i+1}" for i in range(n)] + \
        [f"v_{i+1}" for i in range(n)]
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(",".join(cols) + "\n")
        for ens in ensembles:
            vel = ens.velocities
            for i in range(ens.n_paths):
                row = [str(i), ens.model]
                row += [f"{c:.17g}" for c in ens.positions[i]]
                row += [""] * n if vel is None else [f"{c:.17g}" for c in vel[i]]
                fh.write(",".join(row) + "\n")
