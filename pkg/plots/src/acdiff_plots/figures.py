"""Figure builders for the convergence and long-time experiments.

Output is deterministic: a fixed style sheet, a fixed SVG id salt, and no
date metadata, so rendering the same CSVs twice gives identical bytes.
Every figure is written as both PNG and SVG next to each other.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import read_density_grid, read_distances, read_error_series, read_flow_field

TWO_PI = 2.0 * np.pi

_STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "acdiff-plots",
}


def _save(fig, out_path):
    base, ext = os.path.splitext(out_path)
    if ext.lower() not in (".png", ".svg"):
        raise ValueError(f"output must end in .png or .svg, got {out_path!r}")
    written = []
    for fmt in ("png", "svg"):
        path = f"{base}.{fmt}"
        fig.savefig(path, format=fmt, metadata=({"Date": None} if fmt == "svg" else None))
        written.append(path)
    plt.close(fig)
    return written


def fit_slope(points) -> float:
    lx = np.log([e for e, _ in points])
    ly = np.log([v for _, v in points])
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input location, kind, output image, labels."""

    kind: str                 # "loglog" | "panels"
    in_dir: str
    out_path: str
    title: str | None = None
    options: dict = field(default_factory=dict)

    def render(self):
        if self.kind == "loglog":
            written, _ = plot_loglog(os.path.join(self.in_dir, "errors.csv"),
                                     self.out_path, title=self.title,
                                     **self.options)
            return written
        if self.kind == "panels":
            return plot_density_panels(self.in_dir, self.out_path, title=self.title)
        raise ValueError(f"unknown figure kind {self.kind!r}")


def plot_loglog(errors_csv, out_path, metric=None, title=None):
    """Log-log error-vs-eps figure, one line per (model, mode) series.

    Legends carry the fitted slope to two decimals; dashed guides show
    first- and second-order reference decay.  Series with fewer than
    three usable points are skipped with a warning.  Returns the written
    paths and the fitted slopes keyed by series label.
    """
    series = read_error_series(errors_csv)
    if metric is not None:
        series = [s for s in series if s.metric == metric]
    slopes = {}
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        all_pts = []
        for s in series:
            if len(s.points) < 3:
                warnings.warn(f"series {s.model}/{s.metric}/k={s.phi_k} has "
                              f"{len(s.points)} usable points; skipped")
                continue
            eps = [e for e, _ in s.points]
            err = [v for _, v in s.points]
            all_pts.extend(s.points)
            label = s.model + (f" k={s.phi_k}" if s.phi_k else "") \
                + (f" [{s.metric}]" if metric is None else "")
            slope = fit_slope(s.points)
            slopes[label] = slope
            ax.loglog(eps, err, marker="o", ms=3.5, lw=1.2,
                      label=f"{label} (slope {slope:.2f})")
        if not slopes:
            plt.close(fig)
            raise ValueError(f"{errors_csv}: no series with at least 3 points")
        e_all = np.array(sorted({e for e, _ in all_pts}))
        v_mid = np.exp(np.mean(np.log([v for _, v in all_pts])))
        anchor = np.exp(np.mean(np.log(e_all)))
        for order, style in ((1.0, ":"), (2.0, "--")):
            ax.loglog(e_all, v_mid * (e_all / anchor) ** order, style, color="0.4",
                      lw=1.0, label=f"slope {order:g} guide")
        ax.set_xlabel("relaxation time eps")
        ax.set_ylabel("error")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=7, loc="best")
        written = _save(fig, out_path)
    return written, slopes


_PANEL_DEFS = (
    ("density_langevin_kde.csv", "inertial particles (sampled)"),
    ("density_corrected_kde.csv", "corrected diffusion (sampled)"),
    ("density_pde_corrected.csv", "corrected diffusion (grid)"),
)


def plot_density_panels(in_dir, out_path, title=None):
    """Long-time density figure: three contour panels plus one heatmap
    with the background-flow arrows overlaid.

    Reads the long-time experiment CSVs from ``in_dir``; all density
    grids must share one shape.  When distances.csv is present, the
    closest pair by L2 is named in the figure title.
    """
    grids = []
    for fname, label in _PANEL_DEFS:
        grids.append((label, read_density_grid(os.path.join(in_dir, fname))))
    shape = grids[0][1].shape
    for label, g in grids:
        if g.shape != shape:
            raise ValueError(f"grid mismatch: {label} has {g.shape}, expected {shape}")

    subtitle = title or "long-time densities"
    dist_path = os.path.join(in_dir, "distances.csv")
    if os.path.exists(dist_path):
        dists = read_distances(dist_path)
        (a, b), _ = min(dists.items(), key=lambda kv: kv[1])
        subtitle += f"  (closest pair: {a} vs {b})"

    n = shape[0]
    centers = (np.arange(n) + 0.5) * TWO_PI / n
    x1, x2 = np.meshgrid(centers, centers, indexing="ij")
    heat_label, heat = grids[-1][0], grids[-1][1]

    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(9.0, 8.0), constrained_layout=True)
        lo = min(g.min() for _, g in grids)
        hi = max(g.max() for _, g in grids)
        levels = np.linspace(lo, hi, 12) if hi > lo else 11
        for ax, (label, g) in zip(axes.flat, grids):
            cs = ax.contourf(x1, x2, g, levels=levels, cmap="viridis")
            ax.contour(x1, x2, g, levels=levels, colors="k", linewidths=0.3)
            ax.set_title(label)
            ax.set_aspect("equal")
        fig.colorbar(cs, ax=axes.flat[:3].tolist(), shrink=0.7)

        ax = axes.flat[3]
        im = ax.pcolormesh(x1, x2, heat, cmap="viridis", shading="auto")
        flow_path = os.path.join(in_dir, "flow_field.csv")
        if os.path.exists(flow_path):
            qx1, qx2, b1, b2 = read_flow_field(flow_path)
            ax.quiver(qx1, qx2, b1, b2, color="w", width=0.004, scale=25)
        ax.set_title(f"{heat_label} + flow")
        ax.set_aspect("equal")
        fig.colorbar(im, ax=ax, shrink=0.7)
        fig.suptitle(subtitle)
        written = _save(fig, out_path)
    return written
