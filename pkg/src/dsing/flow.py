"""Inner iteration: minimize G_eps over unit-norm structured perturbations.

G_eps(Delta) = 1/2 sum_j sigma_min(F(mu_j) + eps * DeltaF(mu_j))^2, optionally
divided by m^2 (the scaled functional). The free gradient is
M_i = sum_j sigma_j conj(f_i(mu_j)) u_j v_j^H, and the constrained flow

    dDelta/dt = -P(M) + Re<P(M), Delta> Delta

(P the structure projection) keeps ||Delta||_F = 1 and decreases G.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .functions import MatrixValuedFunction
from .linalg import BatchTriplets, smallest_triplets
from .structure import StructureSpec, project, real_inner
from .taylor import PointSet

log = logging.getLogger(__name__)

DEGENERACY_GAP = 1e-12


@dataclass
class FlowOptions:
    method: str = "lm"  # "lm" (Levenberg-Marquardt on the sphere) or "euler"
    max_steps: int = 2000
    h0: float = 0.1
    h_min: float = 1e-12
    h_max: float = 1e12
    grow: float = 1.25
    stationarity_tol: float = 1e-6
    g_floor: float = 0.0  # stop once G drops to this level
    kick_size: float = 1e-3
    stall_limit: int = 5
    mu0: float = 1e-3  # initial LM damping, relative to the largest squared Jacobian row norm
    keep_path: bool = False  # store every accepted Delta in FlowResult.path


@dataclass
class FlowResult:
    delta: np.ndarray
    G: float
    M: np.ndarray  # projected free gradient at delta
    steps: int
    converged: bool
    G_history: list = field(default_factory=list)
    h: float = 0.1
    svd_count: int = 0
    degenerate_nodes: int = 0
    reason: str = ""
    path: list | None = None


def functional_G(
    F: MatrixValuedFunction, delta, eps: float, points: PointSet, scaled: bool = False
) -> tuple[float, BatchTriplets]:
    trip = smallest_triplets(F.evaluate(points.nodes, delta, eps))
    value = 0.5 * float(np.sum(trip.sigma**2))
    if scaled:
        value /= points.m**2
    return value, trip


def free_gradient(
    F: MatrixValuedFunction, points: PointSet, trip: BatchTriplets, scaled: bool = False
) -> np.ndarray:
    """M_i = sum_j sigma_j conj(f_i(mu_j)) u_j v_j^H, shape (d, n, n)."""
    near = np.count_nonzero(trip.gap < DEGENERACY_GAP)
    if near:
        log.debug("%d node(s) with a nearly multiple smallest singular value", near)
    W = np.conj(F.weights(points.nodes)) * trip.sigma[:, None]  # (m, d)
    M = np.einsum("md,mi,mj->dij", W, trip.u, np.conj(trip.v))
    if scaled:
        M /= points.m**2
    return M


def stationarity_residual(delta, PM) -> float:
    """||P(M) + ||P(M)|| Delta|| / ||P(M)||; zero iff Delta = -P(M)/||P(M)||."""
    nm = np.linalg.norm(PM)
    if nm == 0:
        return 0.0
    return float(np.linalg.norm(PM + nm * delta) / nm)


def initial_perturbation(F, spec: StructureSpec, points: PointSet, scaled: bool = False):
    """Steepest-descent start -P(M)/||P(M)|| at Delta = 0, or normalized structured ones."""
    _, trip = functional_G(F, None, 0.0, points, scaled)
    PM = project(spec, free_gradient(F, points, trip, scaled))
    nm = np.linalg.norm(PM)
    if nm > 0:
        return -PM / nm
    ones = project(spec, np.ones((F.d, F.n, F.n), dtype=complex))
    no = np.linalg.norm(ones)
    if no == 0:
        raise ValueError("the structure admits no nonzero perturbation")
    return ones / no


def _unit(X):
    return X / np.linalg.norm(X)


def flow_to_stationary(
    F: MatrixValuedFunction,
    eps: float,
    delta0,
    spec: StructureSpec,
    points: PointSet,
    opts: FlowOptions | None = None,
    scaled: bool = False,
    rng: np.random.Generator | None = None,
) -> FlowResult:
    """Drive Delta to a stationary point of G_eps on the unit sphere within the structure.

    Every accepted step decreases G, is re-projected onto the structure and
    renormalized. Two steppers are available:

    * ``"euler"``: explicit Euler on the constrained gradient system; rejected
      steps halve h, accepted ones grow it by ``opts.grow``.
    * ``"lm"``: Levenberg-Marquardt on the residuals sigma_j, restricted to the
      tangent space {Z in S : Re<Z, Delta> = 0}. Its stationary points are those
      of the gradient system, but it does not stall when the smallest singular
      values are driven towards zero.
    """
    opts = opts or FlowOptions()
    if opts.method not in ("euler", "lm"):
        raise ValueError(f"unknown inner method {opts.method!r}")
    st = _FlowState(F, eps, spec, points, scaled, opts, rng or np.random.default_rng(0))
    st.start(delta0)
    if eps == 0:
        return st.result(True, "eps = 0: G does not depend on Delta")
    if opts.method == "euler":
        return _euler(st)
    return _levenberg_marquardt(st)


class _FlowState:
    def __init__(self, F, eps, spec, points, scaled, opts, rng):
        self.F, self.eps, self.spec, self.points = F, eps, spec, points
        self.scaled, self.opts, self.rng = scaled, opts, rng
        self.steps = 0
        self.svds = 0
        self.h = opts.h0

    def evaluate(self, delta):
        self.svds += self.points.m
        return functional_G(self.F, delta, self.eps, self.points, self.scaled)

    def start(self, delta0):
        self.delta = _unit(project(self.spec, delta0))
        self.G, self.trip = self.evaluate(self.delta)
        self.PM = project(self.spec, free_gradient(self.F, self.points, self.trip, self.scaled))
        self.history = [self.G]
        self.path = [self.delta] if self.opts.keep_path else None

    def accept(self, delta, G, trip):
        self.delta, self.G, self.trip = delta, G, trip
        self.PM = project(self.spec, free_gradient(self.F, self.points, trip, self.scaled))
        self.history.append(G)
        if self.path is not None:
            self.path.append(delta)
        self.steps += 1

    def done(self):
        if self.G <= self.opts.g_floor:
            return "G below floor"
        if np.linalg.norm(self.PM) == 0 or stationarity_residual(self.delta, self.PM) <= self.opts.stationarity_tol:
            return "stationary"
        return None

    def retract(self, delta):
        return _unit(project(self.spec, delta))

    def result(self, converged, reason):
        return FlowResult(
            self.delta, self.G, self.PM, self.steps, converged, self.history, self.h,
            self.svds, int(np.count_nonzero(self.trip.gap < DEGENERACY_GAP)), reason, self.path,
        )


def _euler(st: _FlowState) -> FlowResult:
    opts = st.opts
    stalls = 0
    while st.steps < opts.max_steps:
        reason = st.done()
        if reason:
            return st.result(True, reason)
        eta = real_inner(st.PM, st.delta)
        direction = -st.PM + eta * st.delta
        while True:
            trial = st.retract(st.delta + st.h * direction)
            G_new, trip_new = st.evaluate(trial)
            if G_new <= st.G:
                break
            st.h *= 0.5
            stalls += 1
            if stalls >= opts.stall_limit and np.any(st.trip.gap < DEGENERACY_GAP):
                # multiple smallest singular value: try a small random structured kick
                shape = st.delta.shape
                Z = project(st.spec, st.rng.standard_normal(shape) + 1j * st.rng.standard_normal(shape))
                Z -= real_inner(Z, st.delta) * st.delta
                if np.linalg.norm(Z) > 0:
                    kicked = st.retract(st.delta + opts.kick_size * _unit(Z))
                    Gk, tk = st.evaluate(kicked)
                    if Gk <= st.G:
                        trial, G_new, trip_new = kicked, Gk, tk
                        break
            if st.h < opts.h_min:
                return st.result(False, "step size underflow")
        stalls = 0
        st.accept(trial, G_new, trip_new)
        st.h = min(st.h * opts.grow, opts.h_max)
    return st.result(False, "max steps reached")


def _residual_jacobian(st: _FlowState):
    """Residuals r_j = sigma_j (over m when scaled) and their tangent gradients, flattened to reals."""
    F, pts, trip = st.F, st.points, st.trip
    c = 1.0 / pts.m if st.scaled else 1.0
    W = np.conj(F.weights(pts.nodes))  # (m, d)
    rows = st.eps * c * np.einsum("md,mi,mj->mdij", W, trip.u, np.conj(trip.v))
    rows = np.stack([project(st.spec, R) for R in rows])
    along = np.real(np.einsum("mdij,dij->m", np.conj(rows), st.delta))
    rows -= along[:, None, None, None] * st.delta
    J = np.concatenate([rows.real.reshape(pts.m, -1), rows.imag.reshape(pts.m, -1)], axis=1)
    return c * trip.sigma, J


def _levenberg_marquardt(st: _FlowState) -> FlowResult:
    opts = st.opts
    shape = st.delta.shape
    half = int(np.prod(shape))
    mu = None
    while st.steps < opts.max_steps:
        reason = st.done()
        if reason:
            return st.result(True, reason)
        r, J = _residual_jacobian(st)
        JJ = J @ J.T
        scale = float(np.max(np.diag(JJ))) or 1.0
        if mu is None:
            mu = opts.mu0 * scale
        while True:
            try:
                y = np.linalg.solve(JJ + mu * np.eye(len(r)), r)
            except np.linalg.LinAlgError:
                y = np.linalg.lstsq(JJ + mu * np.eye(len(r)), r, rcond=None)[0]
            s = -(J.T @ y)
            step = (s[:half] + 1j * s[half:]).reshape(shape)
            trial = st.retract(st.delta + step)
            G_new, trip_new = st.evaluate(trial)
            if G_new <= st.G:
                mu = max(mu / 3.0, 1e-15 * scale)
                break
            mu *= 4.0
            if mu > 1e16 * scale:
                return st.result(False, "no descent step found")
        st.accept(trial, G_new, trip_new)
    return st.result(False, "max steps reached")
