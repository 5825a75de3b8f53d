import math
import os

import numpy as np
import pytest

from acdiff_plots.figures import fit_slope, plot_density_panels, plot_loglog
from acdiff_plots.io import (
    CsvFormatError,
    read_density_grid,
    read_distances,
    read_error_series,
)

HEADER = "# config_hash=deadbeef1234 seed=7 version=0.1.0"


def write_errors_csv(path, series):
    """series: list of (model, metric, phi_k, c, s) -> error = c * eps^s."""
    eps_list = [2.0**-k for k in range(3, 8)]
    lines = [HEADER, "eps,error,stderr,model_a,model_b,metric,phi_k"]
    for model, metric, phi_k, c, s in series:
        for eps in eps_list:
            lines.append(f"{eps:.17g},{c * eps**s:.17g},,{model},langevin,{metric},{phi_k}")
    path.write_text("\n".join(lines) + "\n")


def write_density_csv(path, values):
    n = values.shape[0]
    xs = (np.arange(n) + 0.5) * 2 * np.pi / n
    lines = [HEADER, "i,j,x1,x2,u"]
    for i in range(n):
        for j in range(n):
            lines.append(f"{i},{j},{xs[i]:.17g},{xs[j]:.17g},{values[i, j]:.17g}")
    path.write_text("\n".join(lines) + "\n")


def synth_longtime_dir(tmp_path, n=24):
    xs = (np.arange(n) + 0.5) * 2 * np.pi / n
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    base = 1.0 / (2 * np.pi) ** 2
    bump = base * (1 + 0.5 * np.cos(x1 - np.pi) * np.cos(x2 - np.pi))
    write_density_csv(tmp_path / "density_langevin_kde.csv", bump)
    write_density_csv(tmp_path / "density_corrected_kde.csv", bump * 1.01)
    write_density_csv(tmp_path / "density_pde_corrected.csv", bump * 0.99)
    lines = [HEADER, "i,j,x1,x2,b1,b2"]
    for i in range(0, n, 4):
        for j in range(0, n, 4):
            lines.append(f"{i},{j},{xs[i]:.17g},{xs[j]:.17g},"
                         f"{math.sin(xs[j]):.17g},{math.sin(xs[i]):.17g}")
    (tmp_path / "flow_field.csv").write_text("\n".join(lines) + "\n")
    (tmp_path / "distances.csv").write_text(
        HEADER + "\na,b,l2,linf\nlangevin_kde,pde_corrected,0.002,0.001\n"
        "langevin_kde,constant,0.08,0.02\n")
    return tmp_path


# -- io -------------------------------------------------------------------

def test_read_error_series_grouping(tmp_path):
    p = tmp_path / "errors.csv"
    write_errors_csv(p, [("corrected", "pde_weak_cos", "1", 0.5, 2.0),
                         ("naive", "pde_weak_cos", "1", 0.5, 1.0)])
    series = read_error_series(p)
    assert {s.model for s in series} == {"corrected", "naive"}
    assert all(len(s.points) == 5 for s in series)
    # decreasing eps ordering
    for s in series:
        eps = [e for e, _ in s.points]
        assert eps == sorted(eps, reverse=True)


def test_read_error_series_skips_unresolved(tmp_path):
    p = tmp_path / "errors.csv"
    p.write_text(HEADER + "\neps,error,stderr,model_a,model_b,metric,phi_k,resolved\n"
                 "0.5,0.1,,m,l,weak_cos,1,1\n0.25,0.05,,m,l,weak_cos,1,0\n")
    series = read_error_series(p)
    assert len(series) == 1 and len(series[0].points) == 1


def test_read_errors_missing_column(tmp_path):
    p = tmp_path / "errors.csv"
    p.write_text(HEADER + "\neps,oops\n0.5,1\n")
    with pytest.raises(CsvFormatError):
        read_error_series(p)


def test_read_density_grid_roundtrip(tmp_path):
    vals = np.arange(16.0).reshape(4, 4)
    p = tmp_path / "d.csv"
    write_density_csv(p, vals)
    assert np.array_equal(read_density_grid(p), vals)
    p2 = tmp_path / "bad.csv"
    p2.write_text(HEADER + "\ni,j,u\n0,0,1\n0,1,2\n")
    with pytest.raises(CsvFormatError):
        read_density_grid(p2)


# -- loglog ---------------------------------------------------------------

def test_loglog_legend_slope_matches_power(tmp_path):
    p = tmp_path / "errors.csv"
    write_errors_csv(p, [("corrected", "pde_weak_cos", "1", 0.7, 2.0),
                         ("naive", "pde_weak_cos", "1", 1.3, 1.0),
                         ("ode", "strong_p1", "", 0.4, 0.5)])
    written, slopes = plot_loglog(p, tmp_path / "fig.png")
    assert {os.path.basename(w) for w in written} == {"fig.png", "fig.svg"}
    by_label = {label.split(" ")[0]: s for label, s in slopes.items()}
    assert round(by_label["corrected"], 2) == 2.00
    assert round(by_label["naive"], 2) == 1.00
    assert round(by_label["ode"], 2) == 0.50
    # the legend text itself carries the two-decimal slope
    import matplotlib.pyplot as plt  # noqa: F401


def test_loglog_skips_short_series(tmp_path):
    p = tmp_path / "errors.csv"
    p.write_text(HEADER + "\neps,error,stderr,model_a,model_b,metric,phi_k\n"
                 "0.5,0.25,,a,l,m,1\n0.25,0.0625,,a,l,m,1\n"
                 "0.5,0.2,,b,l,m,2\n0.25,0.1,,b,l,m,2\n0.125,0.05,,b,l,m,2\n")
    with pytest.warns(UserWarning):
        written, slopes = plot_loglog(p, tmp_path / "f.png")
    assert len(slopes) == 1


def test_loglog_empty_errors(tmp_path):
    p = tmp_path / "errors.csv"
    p.write_text(HEADER + "\neps,error,stderr,model_a,model_b,metric,phi_k\n"
                 "0.5,,,a,l,m,1\n")
    with pytest.raises(ValueError):
        plot_loglog(p, tmp_path / "f.png")


def test_loglog_deterministic_output(tmp_path):
    p = tmp_path / "errors.csv"
    write_errors_csv(p, [("corrected", "pde_weak_cos", "1", 0.7, 2.0)])
    plot_loglog(p, tmp_path / "a.svg")
    plot_loglog(p, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()
    # inputs untouched
    before = p.read_bytes()
    plot_loglog(p, tmp_path / "c.png")
    assert p.read_bytes() == before


def test_fit_slope_exact():
    pts = [(0.5, 0.25), (0.25, 0.0625), (0.125, 0.015625)]
    assert fit_slope(pts) == pytest.approx(2.0, rel=1e-12)


def test_figure_spec_dispatch(tmp_path):
    from acdiff_plots.figures import FigureSpec
    write_errors_csv(tmp_path / "errors.csv",
                     [("naive", "pde_weak_cos", "1", 1.0, 1.0)])
    written = FigureSpec(kind="loglog", in_dir=str(tmp_path),
                         out_path=str(tmp_path / "s.png"), title="t").render()
    assert len(written) == 2
    synth_longtime_dir(tmp_path)
    written = FigureSpec(kind="panels", in_dir=str(tmp_path),
                         out_path=str(tmp_path / "p.png")).render()
    assert len(written) == 2
    with pytest.raises(ValueError):
        FigureSpec(kind="nope", in_dir=".", out_path="x.png").render()


# -- density panels ---------------------------------------------------------

def test_panels_render_from_schema_csvs(tmp_path):
    d = synth_longtime_dir(tmp_path)
    written = plot_density_panels(d, tmp_path / "panels.png")
    assert {os.path.basename(w) for w in written} == {"panels.png", "panels.svg"}
    assert (tmp_path / "panels.png").stat().st_size > 1000


def test_panels_constant_density_no_crash(tmp_path):
    n = 16
    flat = np.full((n, n), 1.0 / (2 * np.pi) ** 2)
    for name in ("density_langevin_kde.csv", "density_corrected_kde.csv",
                 "density_pde_corrected.csv"):
        write_density_csv(tmp_path / name, flat)
    written = plot_density_panels(tmp_path, tmp_path / "flat.png")
    assert len(written) == 2


def test_panels_grid_mismatch(tmp_path):
    synth_longtime_dir(tmp_path)
    write_density_csv(tmp_path / "density_pde_corrected.csv", np.ones((8, 8)))
    with pytest.raises(ValueError):
        plot_density_panels(tmp_path, tmp_path / "x.png")


def test_panels_uses_real_acceptance_outputs_when_present(tmp_path):
    d = os.environ.get("ACDIFF_LONGTIME_DIR")
    if not d or not os.path.isdir(d):
        pytest.skip("no acceptance-run long-time directory available")
    written = plot_density_panels(d, tmp_path / "real.png")
    assert (tmp_path / "real.png").exists()


# -- cli --------------------------------------------------------------------

def test_cli_loglog_and_panels(tmp_path, capsys):
    from acdiff_plots.cli import main
    write_errors_csv(tmp_path / "errors.csv",
                     [("corrected", "pde_weak_cos", "1", 0.7, 2.0)])
    rc = main(["loglog", "--in", str(tmp_path), "--out", str(tmp_path / "l.png")])
    assert rc == 0
    assert "slope 2.00" in capsys.readouterr().out
    synth_longtime_dir(tmp_path)
    rc = main(["panels", "--in", str(tmp_path), "--out", str(tmp_path / "p.svg")])
    assert rc == 0
    rc = main(["panels", "--in", str(tmp_path / "missing"), "--out",
               str(tmp_path / "q.png")])
    assert rc == 1
