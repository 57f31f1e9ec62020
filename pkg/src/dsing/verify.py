"""Certificates for a computed perturbation: numerical rank, grid scans, circle sweeps."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .functions import MatrixValuedFunction, circle_nodes
from .linalg import SVDConvergenceError, det_batch, sigma_min_batch, svd_full

DEFAULT_DELTA = 1e-8


def numerical_rank(M, delta: float = DEFAULT_DELTA) -> int:
    """Number of singular values strictly above ``delta``."""
    if delta < np.finfo(float).eps:
        raise ValueError("threshold must be at least machine precision")
    return sum(t.sigma > delta for t in svd_full(M))


def is_numerically_singular(M, delta: float = DEFAULT_DELTA) -> bool:
    return numerical_rank(M, delta) < np.shape(M)[0]


@dataclass(frozen=True)
class GridSpec:
    x_range: tuple = (-0.9, 0.9)
    y_range: tuple = (-0.9, 0.9)
    step: float = 0.01
    restrict_to_unit_disk: bool = False

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        for lo, hi in (self.x_range, self.y_range):
            if hi < lo:
                raise ValueError("empty grid range")

    @classmethod
    def function_default(cls, step: float = 0.01) -> "GridSpec":
        return cls((-0.9, 0.9), (-0.9, 0.9), step, False)

    @classmethod
    def disk_default(cls, step: float = 0.01) -> "GridSpec":
        return cls((-1.0, 1.0), (-1.0, 1.0), step, True)

    def axis(self, lo, hi) -> np.ndarray:
        # integer counting, like MATLAB's lo:step:hi, avoids drift at the endpoint
        k = int(np.floor((hi - lo) / self.step + 1e-9))
        return lo + self.step * np.arange(k + 1)

    def points(self) -> np.ndarray:
        xs = self.axis(*self.x_range)
        ys = self.axis(*self.y_range)
        X, Y = np.meshgrid(xs, ys)
        Z = (X + 1j * Y).ravel()
        if self.restrict_to_unit_disk:
            Z = Z[np.abs(Z) <= 1 + 1e-12]
        return Z


@dataclass
class GridSummary:
    max_sigma_min: float
    min_sigma_min: float
    count: int
    failures: int = 0
    points: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def fraction_above(self, level: float) -> float:
        if self.values is None:
            raise ValueError("per-node values were not kept")
        return float(np.mean(self.values > level))


def _sigma_chunk(F, delta, eps, pts):
    try:
        return sigma_min_batch(F.evaluate(pts, delta, eps)), 0
    except SVDConvergenceError:
        out = np.empty(len(pts))
        bad = 0
        for k, z in enumerate(pts):
            try:
                out[k] = sigma_min_batch(F.evaluate([z], delta, eps))[0]
            except SVDConvergenceError:
                out[k] = np.nan
                bad += 1
        return out, bad


def grid_sigma_min(
    F: MatrixValuedFunction,
    delta,
    eps: float,
    grid: GridSpec | None = None,
    keep_values: bool = True,
    threads: int = 1,
    chunk: int = 4096,
) -> GridSummary:
    """sigma_min(F(z) + eps*DeltaF(z)) at every grid node; SVD failures are counted."""
    grid = grid or GridSpec.function_default()
    pts = grid.points()
    chunks = [pts[i : i + chunk] for i in range(0, len(pts), chunk)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda c: _sigma_chunk(F, delta, eps, c), chunks))
    else:
        parts = [_sigma_chunk(F, delta, eps, c) for c in chunks]
    vals = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
    failures = sum(p[1] for p in parts)
    good = vals[np.isfinite(vals)]
    return GridSummary(
        float(np.max(good)) if good.size else float("nan"),
        float(np.min(good)) if good.size else float("nan"),
        len(pts),
        failures,
        pts if keep_values else None,
        vals if keep_values else None,
    )


def circle_det_sweep(F: MatrixValuedFunction, delta, eps: float, p: int = 200) -> tuple[float, float]:
    """(max, min) of |det(F(z) + eps*DeltaF(z))| over p equispaced unit-circle nodes."""
    d = np.abs(det_batch(F.evaluate(circle_nodes(p), delta, eps)))
    return float(np.max(d)), float(np.min(d))


def write_grid_csv(path, summary: GridSummary) -> None:
    if summary.values is None:
        raise ValueError("grid summary has no per-node values")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "sigma_min"])
        for z, s in zip(summary.points, summary.values):
            w.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", f"{s:.17g}"])
