import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dsing import problems as P
from dsing.functions import (
    AlreadySingularError,
    Exponential,
    MatrixValuedFunction,
    Monomial,
    MonomialExp,
    circle_nodes,
    det_at,
    eval_perturbed,
    eval_scalar,
    normalize,
)

from conftest import crandn


def random_function(seed, n=3):
    rng = np.random.default_rng(seed)
    return MatrixValuedFunction.from_terms(
        [(Monomial(2), crandn(rng, n, n)), (Exponential(-0.7), crandn(rng, n, n)), (MonomialExp(1, 0.3j), crandn(rng, n, n))]
    )


def test_scalar_values():
    assert eval_scalar(Monomial(2), 3) == 9
    assert eval_scalar(Exponential(-1), 1j * np.pi) == pytest.approx(-1)
    assert eval_scalar(MonomialExp(1, -1), 1.0) == pytest.approx(0.367879, abs=1e-6)


@pytest.mark.parametrize("bad", [-1, 1.5])
def test_monomial_power_validated(bad):
    with pytest.raises(ValueError):
        Monomial(bad)


def test_validation():
    with pytest.raises(ValueError, match="leading"):
        MatrixValuedFunction.from_terms([(Monomial(1), np.zeros((2, 2))), (Monomial(0), np.eye(2))])
    with pytest.raises(ValueError):
        MatrixValuedFunction.from_terms([(Monomial(1), np.eye(2)), (Monomial(0), np.eye(3))])
    with pytest.raises(ValueError):
        MatrixValuedFunction.from_terms([(Monomial(0), np.array([[np.inf]]))])


def test_coefficients_are_read_only():
    F = P.time_delay()
    with pytest.raises(ValueError):
        F.coeffs[0, 0, 0] = 1


def test_eval_unperturbed():
    F = MatrixValuedFunction.from_terms([(Monomial(1), np.eye(2))])
    assert np.allclose(eval_perturbed(F, None, 0.0, 2.0), 2 * np.eye(2))


def test_eval_is_linear_in_eps():
    F = random_function(1)
    delta = crandn(np.random.default_rng(2), *F.coeffs.shape)
    lam = 0.3 - 0.4j
    lhs = eval_perturbed(F, delta, 0.25, lam) - eval_perturbed(F, delta, 0.0, lam)
    rhs = 0.25 * sum(f(lam) * D for f, D in zip(F.scalars, delta))
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_perturbation_shape_checked():
    with pytest.raises(ValueError):
        P.time_delay().evaluate([0.0], np.zeros((2, 3, 3)), 1.0)


@pytest.mark.parametrize("tau", [1.0, 1e-5])
def test_ddae_root_at_zero(tau):
    assert abs(det_at(P.ddae_characteristic(tau), None, 0.0, 0.0)) < 1e-15


def test_ddae_closed_form_at_one():
    val = det_at(P.ddae_characteristic(1.0), None, 0.0, 1.0)
    assert val == pytest.approx(2.5 - 3 / np.e + 0.5 / np.e**2, abs=1e-12)
    assert val.real == pytest.approx(1.464029, abs=1e-6)


def test_ddae_closed_form_random_points():
    rng = np.random.default_rng(3)
    lams = rng.uniform(-2, 2, 20) + 1j * rng.uniform(-2, 2, 20)
    for tau in (1.0, 0.3):
        got = det_at(P.ddae_characteristic(tau), None, 0.0, lams)
        ref = P.ddae_closed_form_det(lams, tau)
        assert np.all(np.abs(got - ref) <= 1e-12 * np.abs(ref))


def test_limit_pencil_is_singular():
    assert det_at(P.ddae_limit_pencil(), None, 0.0, 0.7) == 0
    with pytest.raises(AlreadySingularError):
        normalize(P.ddae_limit_pencil())


def test_constant_identity_det():
    assert det_at(P.constant(np.eye(2)), None, 0.0, 0.4 + 2j) == pytest.approx(1.0)


def test_normalize_constant():
    Ft, rec = normalize(P.constant(2 * np.eye(2)))
    assert rec.alpha == pytest.approx(2.0)
    assert np.allclose(Ft.coeffs[0], np.eye(2))


def test_normalize_fixed_point():
    F = P.constant(np.eye(3))
    Ft, rec = normalize(F)
    assert rec.alpha == 1.0 and np.array_equal(Ft.coeffs, F.coeffs)


def test_normalized_max_is_one():
    for F in (P.time_delay(), P.mixed_type(), random_function(4)):
        Ft, rec = normalize(F, 64)
        top = np.max(np.abs(det_at(Ft, None, 0.0, circle_nodes(64))))
        assert abs(top - 1) <= 1e-10


def test_ddae_normalization_against_dense_sampling():
    F = P.ddae_characteristic(1.0)
    _, rec = normalize(F, 64)
    dense = np.max(np.abs(P.ddae_closed_form_det(circle_nodes(4096), 1.0)))
    # 64 samples of a smooth function: close to, and never above, the dense maximum
    assert rec.max_abs_det_before <= dense * (1 + 1e-12)
    assert rec.max_abs_det_before >= 0.95 * dense
    assert rec.alpha == pytest.approx(rec.max_abs_det_before ** 0.5)


@given(st.floats(1e-3, 1e3), st.integers(0, 50))
def test_normalize_scaling_consistency(c, seed):
    F = random_function(seed)
    F1, r1 = normalize(F)
    F2, r2 = normalize(F.scaled(c))
    assert np.allclose(F1.coeffs, F2.coeffs, rtol=0, atol=1e-12 * np.abs(F1.coeffs).max())
    assert r2.alpha / r1.alpha == pytest.approx(c, rel=1e-12)


@given(st.floats(1e-2, 1e2), st.integers(0, 50))
def test_det_homogeneity(c, seed):
    F = random_function(seed)
    lam = np.exp(0.37j * seed)
    a = det_at(F.scaled(c), None, 0.0, lam)
    b = c**F.n * det_at(F, None, 0.0, lam)
    assert abs(a - b) <= 1e-10 * abs(b)


def test_circle_nodes_are_roots_of_unity():
    z = circle_nodes(17)
    assert np.allclose(np.abs(z), 1, atol=1e-15)
    assert np.allclose(z**17, 1, atol=1e-12)
