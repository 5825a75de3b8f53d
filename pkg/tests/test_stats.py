import math

import numpy as np
import pytest

from acdiff import stats
from acdiff.addiff import DensityLine, Grid1D
from acdiff.flowfield import TWO_PI
from acdiff.sde import ParticleEnsemble
from acdiff.stats import (
    Density2DEstimate,
    ErrorReport,
    UsageError,
    density_distance,
    fit_loglog_slope,
    fourier_cos_mode,
    kde_2d,
    pde_weak_error,
    strong_error_p,
    torus_distance,
    weak_error_phi,
)


def make_ensemble(positions, base_seed=1, model="langevin", n_steps=10):
    positions = np.asarray(positions, dtype=float)
    return ParticleEnsemble(model=model, positions=positions, velocities=None,
                            eps=0.1, dt=0.01, t_final=0.1, n_steps=n_steps,
                            base_seed=base_seed, field_name="test")


def line_on(n, values):
    return DensityLine(values=np.asarray(values, float), grid=Grid1D(n=n, dt=1.0))


# -- torus distance and strong error -----------------------------------------

def test_torus_distance_wraps():
    a = np.array([[0.1, 6.2]])
    b = np.array([[6.2, 0.1]])
    d_direct = np.abs(a - b)
    want = np.sqrt(((TWO_PI - d_direct) ** 2).sum())
    assert torus_distance(a, b)[0] == pytest.approx(want, rel=1e-14)


def test_strong_error_identical_zero():
    e = make_ensemble(np.random.default_rng(0).uniform(0, TWO_PI, (50, 2)))
    val, se = strong_error_p(e, e, 2)
    assert val == 0.0 and se == 0.0


def test_strong_error_antipodal():
    m = 64
    a = make_ensemble(np.zeros((m, 1)))
    b = make_ensemble(np.full((m, 1), np.pi))
    for p in (1, 2, 3):
        val, se = strong_error_p(a, b, p)
        assert val == pytest.approx(np.pi**p, rel=1e-14)
        assert se == pytest.approx(0.0, abs=1e-12)


def test_strong_error_requires_coupling():
    a = make_ensemble(np.zeros((10, 1)), base_seed=1)
    b = make_ensemble(np.zeros((10, 1)), base_seed=2)
    with pytest.raises(UsageError):
        strong_error_p(a, b, 1)
    c = make_ensemble(np.zeros((11, 1)), base_seed=1)
    with pytest.raises(UsageError):
        strong_error_p(a, c, 1)
    with pytest.raises(UsageError):
        strong_error_p(a, a, 0.5)


def test_strong_error_symmetry_and_triangle():
    rng = np.random.default_rng(3)
    xs = [make_ensemble(rng.uniform(0, TWO_PI, (200, 2))) for _ in range(3)]
    ab = strong_error_p(xs[0], xs[1], 1)[0]
    ba = strong_error_p(xs[1], xs[0], 1)[0]
    assert ab == ba
    ac = strong_error_p(xs[0], xs[2], 1)[0]
    cb = strong_error_p(xs[2], xs[1], 1)[0]
    assert ab <= ac + cb + 1e-12


# -- weak error ---------------------------------------------------------------

def test_weak_error_identical_zero():
    e = make_ensemble(np.random.default_rng(1).uniform(0, TWO_PI, (100, 1)))
    val, se = weak_error_phi(e, e, 1)
    assert val == 0.0 and se == 0.0


def test_weak_error_free_flow_closed_form():
    # For b = 0 all laws are Gaussian, so E cos(k X) = cos(k x0) e^{-k^2 s/2}
    # with the exact variances of the coupled pair; the common-random-number
    # estimator must reproduce the closed-form difference.
    from acdiff.flowfield import zero_field
    from acdiff.sde import StepConfig, simulate_coupled

    eps, T, x0 = 0.25, 1.0, 1.0
    ens = simulate_coupled(["langevin", "corrected"], zero_field(1),
                           StepConfig("exponential-ou", dt=T / 64, eps=eps),
                           100_000, T, [x0], base_seed=99)
    e = math.exp(-T / eps)
    var_x = eps**2 * (1 - e) ** 2 + 2 * eps * (
        T - 2 * eps * (1 - e) + 0.5 * eps * (1 - e * e))
    var_z = 2 * eps * T
    want = abs(math.cos(x0)) * abs(math.exp(-var_z / 2) - math.exp(-var_x / 2))
    val, se = weak_error_phi(ens["langevin"], ens["corrected"], 1)
    assert val == pytest.approx(want, abs=3 * se)
    # the difference is resolved far above the coupled noise level
    assert want > 10 * se


def test_weak_error_uniform_vs_point_mass():
    m = 400_000
    rng = np.random.default_rng(7)
    uni = make_ensemble(rng.uniform(0, TWO_PI, (m, 1)))
    point = make_ensemble(np.zeros((m, 1)))
    val, se = weak_error_phi(uni, point, 1)
    assert val == pytest.approx(1.0, abs=5 * se + 1e-3)


# -- PDE mode functionals ------------------------------------------------------

def test_pde_weak_error_zero_and_mismatch():
    u = line_on(64, np.ones(64))
    assert pde_weak_error(u, u, 3) == 0.0
    g = line_on(32, np.ones(32))
    with pytest.raises(UsageError):
        pde_weak_error(u, g, 1)


def test_pde_weak_error_orthogonality():
    n = 256
    grid = Grid1D(n=n, dt=1.0)
    x = grid.centers
    delta = 0.37
    base = np.full(n, 1.0 / TWO_PI)
    u = line_on(n, base + delta * np.cos(2 * x))
    g = line_on(n, base)
    # projection onto its own mode: integral of cos^2 is pi
    assert pde_weak_error(u, g, 2) == pytest.approx(delta * np.pi, rel=1e-12)
    # orthogonal modes vanish on the discrete grid
    assert pde_weak_error(u, g, 1) <= 1e-12
    assert pde_weak_error(u, g, 3) <= 1e-12


def test_pde_weak_error_linear_in_difference():
    n = 128
    rng = np.random.default_rng(2)
    base = rng.uniform(0.1, 0.3, n)
    d1 = rng.normal(0, 0.01, n)
    u1 = line_on(n, base + d1)
    u2 = line_on(n, base + 2 * d1)
    g = line_on(n, base)
    assert pde_weak_error(u2, g, 1) == pytest.approx(2 * pde_weak_error(u1, g, 1), rel=1e-10)


def test_fourier_cos_mode_matches_weak_error():
    n = 128
    rng = np.random.default_rng(4)
    u = line_on(n, rng.uniform(0.1, 0.2, n))
    g = line_on(n, rng.uniform(0.1, 0.2, n))
    want = abs(fourier_cos_mode(u, 2) - fourier_cos_mode(g, 2))
    assert pde_weak_error(u, g, 2) == pytest.approx(want, rel=1e-12)


# -- slope fitting ------------------------------------------------------------

def test_loglog_slope_exact_powers():
    eps = [0.5, 0.25, 0.125]
    slope, intercept, r2 = fit_loglog_slope([(e, e**2) for e in eps])
    assert slope == pytest.approx(2.0, rel=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    slope, intercept, _ = fit_loglog_slope([(e, 3 * e) for e in eps])
    assert slope == pytest.approx(1.0, rel=1e-12)
    assert intercept == pytest.approx(math.log(3.0), rel=1e-10)


def test_loglog_slope_scale_invariance():
    pts = [(0.5, 0.1), (0.25, 0.03), (0.125, 0.011)]
    s1, i1, r1 = fit_loglog_slope(pts)
    s2, i2, r2 = fit_loglog_slope([(e, 7.3 * v) for e, v in pts])
    assert s2 == pytest.approx(s1, rel=1e-12)
    assert i2 == pytest.approx(i1 + math.log(7.3), rel=1e-10)
    assert r2 == pytest.approx(r1, abs=1e-12)


def test_loglog_slope_validation():
    with pytest.raises(UsageError):
        fit_loglog_slope([(0.5, 1.0), (0.25, 0.5)])
    with pytest.raises(UsageError):
        fit_loglog_slope([(0.5, 1.0), (0.25, -0.5), (0.125, 0.1)])


def test_error_report_sorts_and_fits():
    rep = ErrorReport.from_points(
        "demo", [(0.125, 0.125**2, None), (0.5, 0.25, None), (0.25, 0.0625, None)],
        metadata={"field": "test"})
    assert [row[0] for row in rep.points] == [0.5, 0.25, 0.125]
    assert rep.slope == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(UsageError):
        ErrorReport.from_points("bad", [(0.5, 1, None), (0.5, 1, None), (0.25, 1, None)])


# -- KDE ----------------------------------------------------------------------

def test_kde_rejects_bad_input():
    with pytest.raises(UsageError):
        kde_2d(np.zeros((10, 2)), 16)
    with pytest.raises(UsageError):
        kde_2d(np.zeros((200, 3)), 16)
    with pytest.raises(UsageError):
        kde_2d(np.zeros((200, 2)), 16, bandwidth=-1.0)


def test_kde_single_cluster_peak_and_mass():
    h = 0.25
    pts = np.full((150, 2), np.pi)
    est = kde_2d(pts, 32, bandwidth=h)
    # peak sits at the cells nearest (pi, pi) and equals the kernel at ~0
    imax = np.unravel_index(est.values.argmax(), est.values.shape)
    centers = (np.arange(32) + 0.5) * TWO_PI / 32
    assert abs(centers[imax[0]] - np.pi) <= TWO_PI / 32
    assert abs(centers[imax[1]] - np.pi) <= TWO_PI / 32
    assert est.mass() == pytest.approx(1.0, abs=1e-6)


def test_kde_uniform_samples_flat():
    rng = np.random.default_rng(11)
    pts = rng.uniform(0, TWO_PI, (1_000_000, 2))
    est = kde_2d(pts, 32)
    flat = 1.0 / TWO_PI**2
    assert np.abs(est.values - flat).max() <= 0.05 * flat
    assert est.mass() == pytest.approx(1.0, abs=1e-6)


def test_kde_translation_equivariance():
    rng = np.random.default_rng(13)
    m = 5000
    pts = rng.vonmises(0.0, 2.0, size=(m, 2)) % TWO_PI
    n = 32
    est = kde_2d(pts, n, bandwidth=0.3)
    shifted = (pts + np.array([np.pi, 0.0])) % TWO_PI
    est2 = kde_2d(shifted, n, bandwidth=0.3)
    assert np.allclose(np.roll(est.values, n // 2, axis=0), est2.values,
                       rtol=0, atol=1e-12)


def test_silverman_bandwidth_sane():
    rng = np.random.default_rng(17)
    tight = rng.normal(np.pi, 0.1, 10_000) % TWO_PI
    loose = rng.uniform(0, TWO_PI, 10_000)
    h_tight = stats.silverman_bandwidth_circular(tight)
    h_loose = stats.silverman_bandwidth_circular(loose)
    assert 0 < h_tight < h_loose <= 1.0


# -- density distances ---------------------------------------------------------

def test_density_distance_basics():
    a = np.ones((16, 16))
    assert density_distance(a, a, "l2") == 0.0
    b = a + 0.5
    assert density_distance(a, b, "linf") == pytest.approx(0.5, rel=1e-14)
    # constant offset delta over the square torus: L2 = delta * 2 pi
    assert density_distance(a, b, "l2") == pytest.approx(0.5 * TWO_PI, rel=1e-12)
    with pytest.raises(UsageError):
        density_distance(a, np.ones((8, 8)))
    with pytest.raises(UsageError):
        density_distance(a, b, "l7")


def test_density_distance_accepts_estimates():
    est = Density2DEstimate(values=np.ones((8, 8)), bandwidth=(0.1, 0.1), n_samples=100)
    assert density_distance(est, np.ones((8, 8))) == 0.0
