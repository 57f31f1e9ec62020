"""Outer iteration: Newton-bisection search for the smallest eps with g(eps) = 0.

g(eps) is the value of G_eps at the stationary point reached by the inner flow,
and g'(eps) = -||P(M)||_F there. Newton steps approach the zero from the left,
bisection shrinks the bracket from the right, and the node count is re-probed
whenever the perturbed coefficients move by more than a relative ``beta``.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .flow import FlowOptions, FlowResult, flow_to_stationary, initial_perturbation
from .functions import MatrixValuedFunction, Monomial, NormalizationRecord, det_function, normalize
from .structure import StructureSpec, project
from .taylor import PointSet, choose_num_points
from .verify import GridSpec, circle_det_sweep, grid_sigma_min

log = logging.getLogger(__name__)


class NotPolynomialError(ValueError):
    pass


@dataclass
class OuterOptions:
    tol1: float | None = None  # None: m * tol1_per_node (unscaled) or 1e-12 (scaled)
    tol1_per_node: float = 1e-10
    tol2: float = 1e-6
    tol3: float = 1e-12
    beta: float = 1e-3
    eps0: float | None = None
    eps_low: float | None = None
    eps_up: float | None = None
    k_max: int = 100
    scaled: bool = False
    num_points: int | None = None  # fixed node count; disables re-probing
    m_min: int = 4
    m_max: int = 512
    normalize_p: int = 64
    seed: int = 0
    flow: FlowOptions = field(default_factory=FlowOptions)
    verify_grid: GridSpec | None = None
    certificate_nodes: int = 200

    def __post_init__(self):
        lo = 0.0 if self.eps_low is None else self.eps_low
        if lo < 0 or (self.eps_up is not None and not lo < self.eps_up):
            raise ValueError("need 0 <= eps_low < eps_up")
        for name in ("tol2", "tol3", "beta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if (self.tol1 is not None and self.tol1 <= 0) or self.tol1_per_node <= 0:
            raise ValueError("tol1 must be positive")

    def tol1_for(self, m: int) -> float:
        if self.tol1 is not None:
            return self.tol1
        return 1e-12 if self.scaled else m * self.tol1_per_node


@dataclass
class IterationRecord:
    eps: float
    g: float
    m: int
    kind: str  # "start" | "newton" | "bisection"
    inner_steps: int = 0
    svd_count: int = 0


@dataclass
class DistanceReport:
    eps_star: float
    eps_star_original: float
    delta: np.ndarray
    normalization: NormalizationRecord
    iterations: list
    m_history: list
    verification: dict
    converged: bool
    eps_low: float
    eps_up: float
    tol1: float
    scaled: bool = False
    m_frozen: bool = False
    svd_count: int = 0
    wall_time: float = 0.0

    @property
    def perturbation(self) -> np.ndarray:
        """Coefficient perturbation [dA_d, ..., dA_1] for the original (unnormalized) function."""
        return self.normalization.alpha * self.eps_star * self.delta

    @property
    def svds_per_iteration(self) -> float:
        return self.svd_count / max(len(self.iterations), 1)


def fta_point_count(n: int, d: int) -> int:
    """(d - 1) n + 1 nodes: one more than the maximal degree of det P for P of degree d - 1."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    return (d - 1) * n + 1


def fta_points_for(F: MatrixValuedFunction) -> int:
    if not all(isinstance(s, Monomial) for s in F.scalars):
        raise NotPolynomialError("node count from the fundamental theorem of algebra needs a matrix polynomial")
    degree = max(s.power for s in F.scalars)
    return fta_point_count(F.n, degree + 1)


def g_and_derivative(
    F: MatrixValuedFunction,
    eps: float,
    delta_warm,
    spec: StructureSpec,
    points: PointSet,
    flow_opts: FlowOptions | None = None,
    scaled: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[float, float, FlowResult]:
    res = flow_to_stationary(F, eps, delta_warm, spec, points, flow_opts, scaled, rng)
    if not res.converged:
        log.info("inner flow at eps=%.6g stopped without convergence (%s)", eps, res.reason)
    return res.G, -float(np.linalg.norm(res.M)), res


def _probe_m(F, delta, eps, opts: OuterOptions) -> int:
    return choose_num_points(det_function(F, delta, eps), opts.m_min, opts.m_max, opts.tol3).m


def distance_to_singularity(
    F: MatrixValuedFunction,
    spec: StructureSpec | None = None,
    opts: OuterOptions | None = None,
) -> DistanceReport:
    """Upper bound for the (structured) distance to singularity of ``F``."""
    t0 = time.perf_counter()
    opts = opts or OuterOptions()
    spec = spec or StructureSpec.unconstrained(F.d, F.n)
    if (spec.d, spec.n) != (F.d, F.n):
        raise ValueError("structure does not conform to the function")
    rng = np.random.default_rng(opts.seed)
    Ft, rec = normalize(F, opts.normalize_p)
    A = Ft.coeffs

    adaptive = opts.num_points is None
    m = _probe_m(Ft, None, 0.0, opts) if adaptive else int(opts.num_points)
    points = PointSet.roots_of_unity(m)
    m_history = [m]
    tol1 = opts.tol1_for(m)
    fopts = opts.flow

    def solve(eps, warm):
        # inner solve; flows stop early once G is far below the classification threshold
        fo = FlowOptions(**{**fopts.__dict__, "g_floor": max(fopts.g_floor, 1e-6 * tol1)})
        return g_and_derivative(Ft, eps, warm, spec, points, fo, opts.scaled, rng)

    delta = initial_perturbation(Ft, spec, points, opts.scaled)
    eps_low = 0.0 if opts.eps_low is None else float(opts.eps_low)
    eps_up = float(opts.eps_up) if opts.eps_up is not None else float(np.linalg.norm(A))
    auto_start = opts.eps0 is None
    # default start: eps_low itself (usually 0, where g and g' need no inner solve)
    eps_k = float(opts.eps0) if not auto_start else eps_low
    eps_k = min(max(eps_k, eps_low), eps_up)
    cap0 = 0.1 * eps_up
    validated = False
    best = None  # (eps, delta) of the smallest iterate classified singular
    iterations: list[IterationRecord] = []
    svd_total = 0
    frozen_m = not adaptive
    kind = "start"
    prev_coeffs = None

    g, gp, res = solve(eps_k, delta)
    svd_total += res.svd_count
    delta = res.delta
    k = 0
    while True:
        if adaptive and not frozen_m and prev_coeffs is not None:
            Ak = A + eps_k * delta
            ratio = np.linalg.norm(Ak - prev_coeffs) / np.linalg.norm(prev_coeffs)
            if ratio > opts.beta:
                m_new = _probe_m(Ft, delta, eps_k, opts)
                m_new = min(max(m_new, m // 2), 2 * m)
                if m_new != m:
                    log.info("node count %d -> %d at eps=%.6g", m, m_new, eps_k)
                    m = m_new
                    points = PointSet.roots_of_unity(m)
                    tol1 = opts.tol1_for(m)
                    g, gp, res = solve(eps_k, delta)
                    svd_total += res.svd_count
                    delta = res.delta
        prev_coeffs = A + eps_k * delta
        m_history.append(m)
        iterations.append(IterationRecord(eps_k, g, m, kind, res.steps, res.svd_count))

        if g > tol1:
            eps_low = max(eps_low, eps_k)
        else:
            eps_up = min(eps_up, eps_k)
            if best is None or eps_k <= best[0]:
                best = (eps_k, delta.copy())
            validated = True
        if adaptive and validated and eps_up - eps_low < 10 * opts.tol2:
            frozen_m = True
        if validated and eps_up - eps_low <= opts.tol2:
            break
        if k >= opts.k_max:
            break

        if g > tol1:
            kind = "newton"
            nxt = eps_k + g / abs(gp) if gp != 0 else math.inf
            if k == 0 and auto_start:
                nxt = min(nxt, max(cap0, eps_k))
            if not validated and nxt > eps_up:
                # bracket top is only a guess until some iterate is classified singular
                nxt = min(nxt, 2 * eps_up)
                eps_up = nxt
        else:
            kind = "bisection"
            nxt = 0.5 * (eps_low + eps_up)
        if not (eps_low <= nxt <= eps_up) or nxt == eps_k:
            kind = "bisection"
            nxt = 0.5 * (eps_low + eps_up)
        k += 1
        eps_k = nxt
        g, gp, res = solve(eps_k, delta)
        svd_total += res.svd_count
        delta = res.delta

    if best is not None:
        eps_star, delta_star = best
    else:
        eps_star, delta_star = eps_k, delta
    converged = validated and eps_up - eps_low <= opts.tol2
    dmax, dmin = circle_det_sweep(Ft, delta_star, eps_star, opts.certificate_nodes)
    verification = {"circle_det_max": dmax, "circle_det_min": dmin, "circle_nodes": opts.certificate_nodes}
    if opts.verify_grid is not None:
        gs = grid_sigma_min(Ft, delta_star, eps_star, opts.verify_grid, keep_values=False)
        verification.update(grid_max_sigma_min=gs.max_sigma_min, grid_min_sigma_min=gs.min_sigma_min, grid_count=gs.count)
    return DistanceReport(
        eps_star=float(eps_star),
        eps_star_original=float(rec.alpha * eps_star),
        delta=delta_star,
        normalization=rec,
        iterations=iterations,
        m_history=m_history,
        verification=verification,
        converged=converged,
        eps_low=float(eps_low),
        eps_up=float(eps_up),
        tol1=tol1,
        scaled=opts.scaled,
        m_frozen=frozen_m and adaptive,
        svd_count=svd_total,
        wall_time=time.perf_counter() - t0,
    )
