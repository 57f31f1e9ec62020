"""Builders for the benchmark problems used in tests, scripts and fixture files."""
from __future__ import annotations

import numpy as np

from .functions import Exponential, MatrixValuedFunction, Monomial
from .structure import StructureSpec

# Motivating DDAE  E y'(t) = A y(t) + B y(t - tau)
DDAE_E = np.array([[0.0, 0.0], [1.0, 1.0]])
DDAE_A = np.array([[-1.0, 0.5], [0.0, -1.0]])
DDAE_B = np.array([[1.0, -0.5], [0.0, 0.5]])


def ddae_characteristic(tau: float) -> MatrixValuedFunction:
    """lambda E - A - B exp(-tau lambda)."""
    return MatrixValuedFunction.from_terms(
        [(Monomial(1), DDAE_E), (Monomial(0), -DDAE_A), (Exponential(-tau), -DDAE_B)]
    )


def ddae_closed_form_det(lam, tau: float):
    """Closed form of det(lambda E - A - B exp(-tau lambda))."""
    e = np.exp(-tau * np.asarray(lam, dtype=complex))
    return -1.5 * lam * e + 0.5 * e**2 - 1.5 * e + 1.5 * lam + 1.0


def ddae_limit_pencil() -> MatrixValuedFunction:
    """lambda E - (A + B), the small-delay limit; singular for every lambda."""
    return MatrixValuedFunction.from_terms([(Monomial(1), DDAE_E), (Monomial(0), -(DDAE_A + DDAE_B))])


def _time_delay_coefficients():
    # double non-semisimple eigenvalue at 3*pi*i
    pi = np.pi
    den = 8 + 5 * pi
    a2 = 2 / 5 * (65 * pi + 32) / den
    a1 = 9 * pi**2 * (13 + 5 * pi) / den
    a0 = 324 / 5 * pi**2 * (5 * pi + 4) / den
    b2 = (260 * pi + 128 + 225 * pi**2) / (10 * den)
    b1 = 45 * pi**2 / den
    b0 = 81 * pi**2 * (40 * pi + 32 + 25 * pi**2) / (10 * den)
    companion = np.array([[0, 1, 0], [0, 0, 1], [-a0, -a1, -a2]], dtype=float)
    delayed = np.array([[0, 0, 0], [0, 0, 0], [-b0, -b1, -b2]], dtype=float)
    return companion, delayed


def time_delay() -> MatrixValuedFunction:
    """NLEVP ``time_delay``: -lambda I + C + exp(-lambda) B (3 x 3).

    C is the companion matrix of (a0, a1, a2), B carries (b0, b1, b2) in its last row.
    Terms are ordered [I, C, B] with scalars [-lambda, 1, exp(-lambda)].
    """
    C, B = _time_delay_coefficients()
    return MatrixValuedFunction.from_terms(
        [(Monomial(1), -np.eye(3)), (Monomial(0), C), (Exponential(-1.0), B)]
    )


def time_delay_structures(F: MatrixValuedFunction) -> dict[str, StructureSpec]:
    """The three structures studied for ``time_delay``."""
    last_row = np.zeros((3, 3), dtype=bool)
    last_row[2] = True
    return {
        "real": StructureSpec.unconstrained(F.d, F.n, real=True),
        "sparsity": StructureSpec.sparsity_of(F.coeffs, real=True),
        "time_delay": StructureSpec.from_patterns([np.zeros((3, 3), bool), last_row, last_row], real=True),
    }


def delay_family(tau: float, A2, A1, A0) -> MatrixValuedFunction:
    """lambda A2 + exp(-tau lambda) A1 + A0."""
    return MatrixValuedFunction.from_terms(
        [(Monomial(1), A2), (Exponential(-tau), A1), (Monomial(0), A0)]
    )


def delay_family_matrices(seed: int = 2):
    """Frozen 2 x 2 matrices for the delay sweep: A2 uniform(0,1), A1 and A0 standard normal."""
    rng = np.random.default_rng(seed)
    A2 = rng.random((2, 2))
    A1 = rng.standard_normal((2, 2))
    A0 = rng.standard_normal((2, 2))
    return A2, A1, A0


# Mixed-type (advanced/retarded) example, coefficients as printed to 5 digits.
MIXED_A2 = np.array([[-6.4901e-1, -1.1096, 0.0], [0.0, -8.4555e-1, 0.0], [0.0, 0.0, -1.9686e-1]])
MIXED_A1 = np.array([[5.8644e-1, 0.0, 1.6681e-1], [0.0, 8.7587e-1, 0.0], [0.0, 0.0, -1.2701]])
MIXED_A0 = np.array([[0.0, 0.0, -1.8651], [0.0, 1.7813, 0.0], [-2.7516e-1, 0.0, 0.0]])


def mixed_type(tau1: float = 1.0, tau2: float = 1.0) -> MatrixValuedFunction:
    """lambda A2 + exp(-tau1 lambda) A1 + exp(tau2 lambda) A0."""
    return MatrixValuedFunction.from_terms(
        [(Monomial(1), MIXED_A2), (Exponential(-tau1), MIXED_A1), (Exponential(tau2), MIXED_A0)]
    )


def constant(A) -> MatrixValuedFunction:
    return MatrixValuedFunction.from_terms([(Monomial(0), np.asarray(A))])


def matrix_polynomial(coeffs_high_to_low) -> MatrixValuedFunction:
    """sum_k lambda^k A_k from [A_deg, ..., A_0]."""
    deg = len(coeffs_high_to_low) - 1
    return MatrixValuedFunction.from_terms(
        [(Monomial(deg - k), np.asarray(A)) for k, A in enumerate(coeffs_high_to_low)]
    )


def omnicam_like(seed: int = 7, n: int = 9) -> MatrixValuedFunction:
    """Stand-in with the shape of a 9 x 9 quadratic camera model: lambda^2 Q2 + lambda Q1 + Q0.

    Q2 is full, Q1 has 5 nonzero columns and Q0 a single one, drawn from
    ``default_rng(seed)``. Only the sparsity shape is shared with the
    benchmark it replaces, not its values.
    """
    rng = np.random.default_rng(seed)
    Q2 = rng.standard_normal((n, n))
    Q1 = np.zeros((n, n))
    Q1[:, :5] = rng.standard_normal((n, 5))
    Q0 = np.zeros((n, n))
    Q0[:, 0] = rng.standard_normal(n)
    return matrix_polynomial([Q2, Q1, Q0])


DELAY_SWEEP = (0.5, 1.0, 2.0, 3.0)


def fixture_problems() -> dict:
    """Named problems (with solver options) written to the fixture directory."""
    from .io import Problem
    from .outer import OuterOptions

    td = time_delay()
    tds = time_delay_structures(td)
    ex81 = OuterOptions(tol1=16e-8, tol2=1e-6, tol3=1e-12)
    out = {
        "time_delay_real": Problem(td, tds["real"], ex81, "time_delay, real perturbations"),
        "time_delay_sparsity": Problem(td, tds["sparsity"], ex81, "time_delay, sparsity pattern kept"),
        "time_delay_structured": Problem(td, tds["time_delay"], ex81, "time_delay, last rows of C and B only"),
    }
    mx = mixed_type()
    out["mixed_type"] = Problem(
        mx, StructureSpec.sparsity_of(mx.coeffs, real=True),
        OuterOptions(tol1_per_node=1e-9, tol2=1e-6, tol3=1e-12), "mixed-type, sparsity pattern kept",
    )
    A2, A1, A0 = delay_family_matrices()
    for tau in DELAY_SWEEP:
        F = delay_family(tau, A2, A1, A0)
        out[f"delay_tau_{tau:g}"] = Problem(F, StructureSpec.unconstrained(F.d, F.n), OuterOptions(), f"delay family, tau={tau:g}")
    ddae = ddae_characteristic(1.0)
    out["ddae_tau_1"] = Problem(ddae, StructureSpec.unconstrained(ddae.d, ddae.n), OuterOptions(), "DDAE characteristic matrix, tau=1")
    pen = ddae_limit_pencil()
    out["ddae_pencil"] = Problem(pen, StructureSpec.unconstrained(pen.d, pen.n), OuterOptions(), "singular limit pencil")
    for name, F in [("identity", constant(np.eye(3))), ("diag_1_2", constant(np.diag([1.0, 2.0])))]:
        out[name] = Problem(F, StructureSpec.unconstrained(F.d, F.n), OuterOptions(tol2=1e-4), name)
    lin = matrix_polynomial([np.eye(1), -np.eye(1)])
    out["scalar_linear"] = Problem(lin, StructureSpec.unconstrained(2, 1), OuterOptions(tol2=1e-8, m_min=1), "lambda - 1")
    om = omnicam_like()
    out["omnicam_like"] = Problem(
        om, StructureSpec.unconstrained(om.d, om.n),
        OuterOptions(tol1=1e-12, tol2=1e-6, tol3=1e-11, scaled=True), "9 x 9 quadratic, camera-model sparsity shape",
    )
    return out
