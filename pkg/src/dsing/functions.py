"""Scalar entire functions and matrix-valued functions F(z) = sum_i f_i(z) A_i."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import as_cmatrix, det_batch


class AlreadySingularError(ValueError):
    """The determinant vanishes at every normalization node."""


@dataclass(frozen=True)
class Monomial:
    power: int

    def __post_init__(self):
        if int(self.power) != self.power or self.power < 0:
            raise ValueError("monomial power must be a nonnegative integer")

    def __call__(self, z):
        return np.asarray(z, dtype=complex) ** self.power

    @property
    def is_polynomial(self) -> bool:
        return True


@dataclass(frozen=True)
class Exponential:
    rate: complex

    def __call__(self, z):
        return np.exp(complex(self.rate) * np.asarray(z, dtype=complex))

    @property
    def is_polynomial(self) -> bool:
        return self.rate == 0


@dataclass(frozen=True)
class MonomialExp:
    power: int
    rate: complex

    def __post_init__(self):
        if int(self.power) != self.power or self.power < 0:
            raise ValueError("monomial power must be a nonnegative integer")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z**self.power * np.exp(complex(self.rate) * z)

    @property
    def is_polynomial(self) -> bool:
        return self.rate == 0


@dataclass(frozen=True)
class EntireCallable:
    """Library-only escape hatch: any vectorized callable promised to be entire.

    Not serializable to problem files.
    """

    func: Callable
    name: str = "callable"

    def __call__(self, z):
        return np.asarray(self.func(np.asarray(z, dtype=complex)), dtype=complex)

    @property
    def is_polynomial(self) -> bool:
        return False


ScalarTerm = Monomial | Exponential | MonomialExp | EntireCallable


def eval_scalar(t: ScalarTerm, lam):
    out = t(lam)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MatrixValuedFunction:
    """``F(z) = sum_i f_i(z) A_i`` with terms stored in the order A_d, ..., A_1."""

    scalars: tuple
    coeffs: np.ndarray = field(repr=False)  # (d, n, n)

    def __post_init__(self):
        C = np.asarray(self.coeffs, dtype=complex)
        if C.ndim != 3 or C.shape[1] != C.shape[2]:
            raise ValueError(f"coefficients must have shape (d, n, n), got {C.shape}")
        if len(self.scalars) != C.shape[0]:
            raise ValueError("number of scalar functions and coefficients differ")
        if C.shape[0] == 0:
            raise ValueError("need at least one term")
        if not np.all(np.isfinite(C)):
            raise ValueError("coefficients have non-finite entries")
        if not np.any(C[0]):
            raise ValueError("leading coefficient A_d must be nonzero")
        C.setflags(write=False)
        object.__setattr__(self, "coeffs", C)
        object.__setattr__(self, "scalars", tuple(self.scalars))

    @classmethod
    def from_terms(cls, terms: Sequence[tuple]) -> "MatrixValuedFunction":
        scalars = [t for t, _ in terms]
        mats = [as_cmatrix(A) for _, A in terms]
        shapes = {A.shape for A in mats}
        if len(shapes) != 1:
            raise ValueError(f"coefficient matrices differ in shape: {sorted(shapes)}")
        return cls(tuple(scalars), np.stack(mats))

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    @property
    def is_polynomial(self) -> bool:
        return all(getattr(s, "is_polynomial", False) for s in self.scalars)

    def weights(self, lams) -> np.ndarray:
        """Matrix of f_i(lam_j), shape ``(len(lams), d)``."""
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        return np.stack([np.broadcast_to(f(lams), lams.shape) for f in self.scalars], axis=-1)

    def with_coeffs(self, coeffs) -> "MatrixValuedFunction":
        return MatrixValuedFunction(self.scalars, np.asarray(coeffs, dtype=complex))

    def scaled(self, c: float) -> "MatrixValuedFunction":
        return self.with_coeffs(self.coeffs * c)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def evaluate(self, lams, delta=None, eps: float = 0.0) -> np.ndarray:
        """Stack of ``sum_i f_i(lam)(A_i + eps*Delta_i)`` for each lam."""
        C = self.coeffs
        if delta is not None:
            delta = np.asarray(delta, dtype=complex)
            if delta.shape != C.shape:
                raise ValueError(f"perturbation shape {delta.shape} does not match {C.shape}")
            if eps != 0:
                C = C + eps * delta
        W = self.weights(lams)
        return np.einsum("md,dij->mij", W, C)


def eval_perturbed(F: MatrixValuedFunction, delta, eps: float, lam) -> np.ndarray:
    out = F.evaluate([lam], delta, eps)
    return out[0]


def det_at(F: MatrixValuedFunction, delta, eps: float, lam):
    """det(F(lam) + eps * sum_i f_i(lam) Delta_i); vectorized over ``lam``."""
    if np.ndim(lam) == 0:
        return complex(det_batch(F.evaluate([lam], delta, eps))[0])
    return det_batch(F.evaluate(lam, delta, eps))


def det_function(F: MatrixValuedFunction, delta=None, eps: float = 0.0):
    """The scalar function z -> det(F(z) + eps*DeltaF(z)) as a vectorized callable."""

    def f(z):
        z = np.asarray(z, dtype=complex)
        return det_batch(F.evaluate(z.ravel(), delta, eps)).reshape(z.shape)

    return f


def circle_nodes(p: int) -> np.ndarray:
    """The p-th roots of unity exp(2 pi i j / p), j = 1..p."""
    j = np.arange(1, p + 1)
    return np.exp(2j * np.pi * j / p)


@dataclass(frozen=True)
class NormalizationRecord:
    alpha: float
    p: int
    max_abs_det_before: float


def normalize(F: MatrixValuedFunction, p: int = 64):
    """Divide every coefficient by alpha so that max_j |det F(z_j)| = 1 on p circle nodes.

    alpha = (max |det|)^(1/n); distances computed for the normalized function
    are multiplied by alpha to recover distances for ``F``.
    """
    dets = np.abs(det_at(F, None, 0.0, circle_nodes(p)))
    top = float(np.max(dets))
    if not np.isfinite(top):
        raise ValueError("determinant is not finite on the normalization nodes")
    if top == 0.0:
        raise AlreadySingularError(
            "det F vanishes at all normalization nodes; the function is possibly "
            "already singular (check it with dsing.verify)"
        )
    alpha = top ** (1.0 / F.n)
    return F.scaled(1.0 / alpha), NormalizationRecord(alpha, p, top)
