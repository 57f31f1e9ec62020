import numpy as np
import pytest

from dsing import problems as P
from dsing.flow import (
    FlowOptions,
    flow_to_stationary,
    free_gradient,
    functional_G,
    initial_perturbation,
    stationarity_residual,
)
from dsing.functions import Exponential, MatrixValuedFunction, Monomial, normalize
from dsing.linalg import svd_full
from dsing.structure import StructureSpec, is_member, project, real_inner
from dsing.taylor import PointSet

from conftest import crandn


def random_quasi(seed, n=2):
    rng = np.random.default_rng(seed)
    F = MatrixValuedFunction.from_terms(
        [(Monomial(1), crandn(rng, n, n)), (Exponential(-1.0), crandn(rng, n, n)), (Monomial(0), crandn(rng, n, n))]
    )
    return normalize(F)[0]


def unit_block(spec, seed):
    Z = project(spec, crandn(np.random.default_rng(seed), spec.d, spec.n, spec.n))
    return Z / np.linalg.norm(Z)


def test_identity_at_zero_eps():
    pts = PointSet.roots_of_unity(7)
    G, _ = functional_G(P.constant(np.eye(3)), None, 0.0, pts)
    assert G == pytest.approx(3.5)
    Gs, _ = functional_G(P.constant(np.eye(3)), None, 0.0, pts, scaled=True)
    assert Gs == pytest.approx(3.5 / 49)


def test_singular_pencil_gives_zero():
    G, trip = functional_G(P.ddae_limit_pencil(), None, 0.0, PointSet.roots_of_unity(8))
    assert G < 1e-28
    M = free_gradient(P.ddae_limit_pencil(), PointSet.roots_of_unity(8), trip)
    assert np.abs(M).max() < 1e-14


def test_G_against_full_svd():
    F = random_quasi(1)
    spec = StructureSpec.unconstrained(F.d, F.n)
    delta = unit_block(spec, 2)
    pts = PointSet.roots_of_unity(11)
    G, _ = functional_G(F, delta, 0.3, pts)
    ref = 0.5 * sum(svd_full(F.evaluate([z], delta, 0.3)[0])[-1].sigma ** 2 for z in pts.nodes)
    assert abs(G - ref) <= 1e-12 * max(ref, 1)


def test_single_node_gradient():
    A = crandn(np.random.default_rng(3), 3, 3)
    F = P.constant(A)
    pts = PointSet.roots_of_unity(1)
    _, trip = functional_G(F, None, 0.0, pts)
    t = svd_full(A)[-1]
    assert np.allclose(free_gradient(F, pts, trip)[0], t.sigma * np.outer(t.u, t.v.conj()), atol=1e-13)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("real", [False, True])
def test_gradient_identity(seed, real):
    F = random_quasi(seed)
    mask = np.random.default_rng(seed).random((F.d, F.n, F.n)) < 0.3
    spec = StructureSpec(F.d, F.n, tuple(mask), real)
    pts = PointSet.roots_of_unity(9)
    eps, h = 0.2, 1e-6
    delta = unit_block(spec, seed + 100)
    Z = unit_block(spec, seed + 200)
    Z -= real_inner(Z, delta) * delta
    _, trip = functional_G(F, delta, eps, pts)
    PM = project(spec, free_gradient(F, pts, trip))
    fd = (functional_G(F, delta + h * Z, eps, pts)[0] - functional_G(F, delta - h * Z, eps, pts)[0]) / (2 * h)
    exact = eps * real_inner(PM, Z)
    assert abs(fd - exact) <= max(1e-6, 1e-4 * abs(exact))


def test_gradient_identity_scaled():
    F = random_quasi(42)
    spec = StructureSpec.unconstrained(F.d, F.n)
    pts = PointSet.roots_of_unity(9)
    delta, Z = unit_block(spec, 1), unit_block(spec, 2)
    _, trip = functional_G(F, delta, 0.3, pts, scaled=True)
    M = free_gradient(F, pts, trip, scaled=True)
    h = 1e-6
    fd = (functional_G(F, delta + h * Z, 0.3, pts, True)[0] - functional_G(F, delta - h * Z, 0.3, pts, True)[0]) / (2 * h)
    assert fd == pytest.approx(0.3 * real_inner(M, Z), rel=1e-4, abs=1e-9)


@pytest.mark.parametrize("method", ["euler", "lm"])
@pytest.mark.parametrize("real", [False, True])
def test_flow_invariants(method, real):
    F = random_quasi(7, n=3)
    mask = np.random.default_rng(7).random((F.d, F.n, F.n)) < 0.3
    spec = StructureSpec(F.d, F.n, tuple(mask), real)
    pts = PointSet.roots_of_unity(10)
    delta0 = unit_block(spec, 3)
    opts = FlowOptions(method=method, max_steps=300, keep_path=True)
    res = flow_to_stationary(F, 0.3, delta0, spec, pts, opts)
    G = np.array(res.G_history)
    assert np.all(np.diff(G) <= 1e-14)
    for D in res.path:
        assert abs(np.linalg.norm(D) - 1) <= 1e-10
        assert is_member(spec, D)
    assert len(res.path) == res.steps + 1


@pytest.mark.parametrize("method", ["euler", "lm"])
def test_stationary_alignment(method):
    F = random_quasi(11)
    spec = StructureSpec.unconstrained(F.d, F.n)
    pts = PointSet.roots_of_unity(8)
    opts = FlowOptions(method=method, max_steps=20000, stationarity_tol=1e-6)
    res = flow_to_stationary(F, 0.05, initial_perturbation(F, spec, pts), spec, pts, opts)
    assert res.converged and res.reason == "stationary"
    cos = -real_inner(res.M, res.delta) / np.linalg.norm(res.M)
    assert cos >= 1 - 1e-6
    assert stationarity_residual(res.delta, res.M) <= 1e-6


def test_eckart_young_direction():
    F = P.constant(np.diag([1.0, 2.0]))
    spec = StructureSpec.unconstrained(1, 2)
    pts = PointSet.roots_of_unity(5)
    res = flow_to_stationary(F, 1.0, initial_perturbation(F, spec, pts), spec, pts)
    D = res.delta[0]
    # the smallest singular value 1 belongs to e_1, so the optimal rank-one correction sits at (0, 0)
    assert abs(abs(D[0, 0]) - 1) < 1e-8 and np.abs(D).sum() - abs(D[0, 0]) < 1e-8
    assert D[0, 0].real < 0
    assert res.G < 1e-20


def test_zero_eps_returns_immediately():
    F = random_quasi(3)
    spec = StructureSpec.unconstrained(F.d, F.n)
    pts = PointSet.roots_of_unity(6)
    d0 = unit_block(spec, 0)
    res = flow_to_stationary(F, 0.0, d0, spec, pts)
    assert res.steps == 0 and res.converged
    assert res.G == functional_G(F, d0, 0.0, pts)[0]


def test_degenerate_singular_values_are_handled():
    # identity: every node has a double smallest singular value
    F = P.constant(np.eye(2))
    spec = StructureSpec.unconstrained(1, 2)
    pts = PointSet.roots_of_unity(4)
    res = flow_to_stationary(F, 0.5, unit_block(spec, 5), spec, pts, FlowOptions(method="euler", max_steps=500))
    assert np.all(np.diff(res.G_history) <= 1e-14)
    # best possible: remove half of one unit singular value at every node
    assert res.G == pytest.approx(4 * 0.5 * 0.5**2, rel=1e-6)


def test_initial_perturbation_fallback():
    F = P.ddae_limit_pencil()
    spec = StructureSpec.unconstrained(F.d, F.n)
    D = initial_perturbation(F, spec, PointSet.roots_of_unity(4))
    assert np.linalg.norm(D) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        initial_perturbation(F, StructureSpec(F.d, F.n, None, False, frozenset({0, 1})), PointSet.roots_of_unity(4))


def test_unknown_method():
    F = random_quasi(0)
    spec = StructureSpec.unconstrained(F.d, F.n)
    with pytest.raises(ValueError):
        flow_to_stationary(F, 0.1, unit_block(spec, 0), spec, PointSet.roots_of_unity(3), FlowOptions(method="rk4"))
