"""Dense complex linear algebra for the small square matrices used by the solver.

Everything here is a thin, contract-checked layer over LAPACK (through numpy):
determinants by pivoted LU, singular value decompositions by divide and
conquer. Batched variants operate on stacks of shape ``(m, n, n)`` so that
one call covers every evaluation node.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SVDConvergenceError(RuntimeError):
    """Raised when the underlying SVD iteration fails to converge."""


@dataclass(frozen=True)
class SingularTriplet:
    sigma: float
    u: np.ndarray
    v: np.ndarray


def as_cmatrix(M) -> np.ndarray:
    """Validate and convert ``M`` to a square complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def det(M) -> complex:
    return complex(np.linalg.det(as_cmatrix(M)))


def _svd(stack: np.ndarray):
    try:
        return np.linalg.svd(stack)
    except np.linalg.LinAlgError as exc:
        raise SVDConvergenceError(str(exc)) from exc


def _fix_phase(u: np.ndarray, v: np.ndarray):
    # Largest-modulus entry of v made real positive; u rotated by the same phase.
    idx = np.argmax(np.abs(v), axis=-1)
    pivot = np.take_along_axis(v, idx[..., None], axis=-1)
    mag = np.abs(pivot)
    phase = np.where(mag > 0, np.conj(pivot) / np.where(mag > 0, mag, 1.0), 1.0)
    u, v = u * phase, v * phase
    # pin the pivot exactly on the positive real axis
    np.put_along_axis(v, idx[..., None], mag.astype(v.dtype), axis=-1)
    return u, v


def svd_full(M) -> list[SingularTriplet]:
    """All singular triplets of ``M`` in descending order of sigma."""
    A = as_cmatrix(M)
    U, s, Vh = _svd(A)
    V = Vh.conj().T
    out = []
    for k in range(len(s)):
        u, v = _fix_phase(U[:, k], V[:, k])
        out.append(SingularTriplet(float(s[k]), u, v))
    return out


def svd_smallest(M) -> SingularTriplet:
    """Smallest singular triplet, satisfying ``M v = sigma u``."""
    return svd_full(M)[-1]


@dataclass(frozen=True)
class BatchTriplets:
    """Smallest singular triplets of a stack of matrices.

    ``gap`` holds sigma_{n-1} - sigma_n per matrix (infinite when n == 1) and
    is used to flag nodes where the smallest singular value is not simple.
    """

    sigma: np.ndarray  # (m,)
    u: np.ndarray  # (m, n)
    v: np.ndarray  # (m, n)
    gap: np.ndarray  # (m,)


def smallest_triplets(stack: np.ndarray) -> BatchTriplets:
    stack = np.asarray(stack, dtype=complex)
    if not np.all(np.isfinite(stack)):
        raise SVDConvergenceError("non-finite entries in SVD input")
    U, s, Vh = _svd(stack)
    u = U[..., :, -1]
    v = Vh[..., -1, :].conj()
    u, v = _fix_phase(u, v)
    if s.shape[-1] > 1:
        gap = s[..., -2] - s[..., -1]
    else:
        gap = np.full(s.shape[:-1], np.inf)
    return BatchTriplets(s[..., -1].copy(), u, v, gap)


def sigma_min_batch(stack: np.ndarray) -> np.ndarray:
    try:
        s = np.linalg.svd(np.asarray(stack, dtype=complex), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SVDConvergenceError(str(exc)) from exc
    return s[..., -1]


def det_batch(stack: np.ndarray) -> np.ndarray:
    return np.linalg.det(np.asarray(stack, dtype=complex))
