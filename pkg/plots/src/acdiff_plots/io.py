"""Readers for the experiment CSV artifacts.

Every file starts with one '#' metadata line followed by a header row.
Schemas:
  errors.csv    eps, error, stderr, model_a, model_b, metric, phi_k[, resolved]
  density_*.csv i, j, x1, x2, u
  flow_field.csv i, j, x1, x2, b1, b2
  distances.csv a, b, l2, linf
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


class CsvFormatError(ValueError):
    pass


def _read_rows(path, required_columns):
    with open(path) as fh:
        lines = [l for l in fh.read().splitlines() if l and not l.startswith("#")]
    if not lines:
        raise CsvFormatError(f"{path}: empty file")
    reader = csv.DictReader(lines)
    missing = set(required_columns) - set(reader.fieldnames or ())
    if missing:
        raise CsvFormatError(f"{path}: missing columns {sorted(missing)}")
    return list(reader)


@dataclass
class ErrorSeries:
    model: str
    metric: str
    phi_k: str
    points: list  # (eps, error) sorted by decreasing eps


def read_error_series(path) -> list[ErrorSeries]:
    """Group errors.csv rows into plottable series, dropping unusable rows.

    Rows flagged resolved=0 and rows with an empty error column are
    skipped; series keep their (model, metric, mode) identity.
    """
    rows = _read_rows(path, ("eps", "error", "model_a", "metric"))
    grouped: dict[tuple, list] = {}
    for r in rows:
        if r.get("resolved", "1") == "0":
            continue
        if not r["error"]:
            continue
        try:
            eps, err = float(r["eps"]), float(r["error"])
        except ValueError as exc:
            raise CsvFormatError(f"{path}: non-numeric row {r}") from exc
        if err <= 0 or eps <= 0:
            continue
        grouped.setdefault((r["model_a"], r["metric"], r.get("phi_k", "")),
                           []).append((eps, err))
    out = []
    for (model, metric, phi_k), pts in sorted(grouped.items()):
        out.append(ErrorSeries(model=model, metric=metric, phi_k=phi_k,
                               points=sorted(pts, key=lambda p: -p[0])))
    return out


def read_density_grid(path) -> np.ndarray:
    """Load a density CSV into its (n, n) grid array."""
    rows = _read_rows(path, ("i", "j", "u"))
    n = int(math.isqrt(len(rows)))
    if n * n != len(rows):
        raise CsvFormatError(f"{path}: {len(rows)} rows is not a square grid")
    values = np.empty((n, n))
    for r in rows:
        values[int(r["i"]), int(r["j"])] = float(r["u"])
    return values


def read_flow_field(path):
    """Load quiver arrows as (x1, x2, b1, b2) flat arrays."""
    rows = _read_rows(path, ("x1", "x2", "b1", "b2"))
    cols = {k: np.array([float(r[k]) for r in rows]) for k in ("x1", "x2", "b1", "b2")}
    return cols["x1"], cols["x2"], cols["b1"], cols["b2"]


def read_distances(path) -> dict[tuple[str, str], float]:
    """Load pairwise L2 distances keyed by (a, b)."""
    rows = _read_rows(path, ("a", "b", "l2"))
    return {(r["a"], r["b"]): float(r["l2"]) for r in rows}
