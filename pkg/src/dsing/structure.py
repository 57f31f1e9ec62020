"""Admissible perturbation sets and the orthogonal projection onto them.

A structure is a conjunction of coordinate constraints on the block
``[Delta_d, ..., Delta_1]`` (stored as an array of shape ``(d, n, n)``):
entries forced to zero, whole coefficients frozen, and realness. Each is a
coordinate projection in the real inner product Re<X, Y> = Re trace(X^H Y),
so they commute and their composition is again an orthogonal projection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class StructureSpec:
    """``zero_masks[i]`` is a boolean (n, n) array, True where Delta_i must vanish,
    or None for an unconstrained coefficient. ``frozen`` holds term indices
    (positions in the A_d, ..., A_1 list) whose perturbation is identically zero.
    """

    d: int
    n: int
    zero_masks: tuple = field(default=None, repr=False)
    real: bool = False
    frozen: frozenset = frozenset()

    def __post_init__(self):
        masks = self.zero_masks
        if masks is None:
            masks = (None,) * self.d
        if len(masks) != self.d:
            raise ValueError(f"expected {self.d} masks, got {len(masks)}")
        clean = []
        for i, mk in enumerate(masks):
            if mk is None:
                clean.append(None)
                continue
            mk = np.asarray(mk, dtype=bool)
            if mk.shape != (self.n, self.n):
                raise ValueError(f"mask {i} has shape {mk.shape}, expected {(self.n, self.n)}")
            mk = mk.copy()
            mk.setflags(write=False)
            clean.append(mk)
        frozen = frozenset(int(i) for i in self.frozen)
        if any(i < 0 or i >= self.d for i in frozen):
            raise ValueError(f"frozen indices must lie in 0..{self.d - 1}")
        object.__setattr__(self, "zero_masks", tuple(clean))
        object.__setattr__(self, "frozen", frozen)

    @classmethod
    def unconstrained(cls, d: int, n: int, real: bool = False) -> "StructureSpec":
        return cls(d, n, None, real)

    @classmethod
    def from_patterns(cls, patterns, real: bool = False, frozen=()) -> "StructureSpec":
        """Build from allowed-entry patterns (True/nonzero = may be perturbed)."""
        pats = [None if p is None else ~np.asarray(p, dtype=bool) for p in patterns]
        shapes = {p.shape for p in pats if p is not None}
        if len(shapes) != 1:
            raise ValueError("patterns must all be n x n")
        (shape,) = shapes
        return cls(len(pats), shape[0], tuple(pats), real, frozenset(frozen))

    @classmethod
    def sparsity_of(cls, coeffs, real: bool = False, frozen=()) -> "StructureSpec":
        """Structure that preserves the zero pattern of the given coefficients."""
        C = np.asarray(coeffs)
        return cls.from_patterns([c != 0 for c in C], real, frozen)

    @property
    def is_unconstrained(self) -> bool:
        return not self.real and not self.frozen and all(m is None for m in self.zero_masks)

    def keep_mask(self) -> np.ndarray:
        """Boolean (d, n, n) array of freely perturbable positions."""
        keep = np.ones((self.d, self.n, self.n), dtype=bool)
        for i, mk in enumerate(self.zero_masks):
            if mk is not None:
                keep[i] &= ~mk
        for i in self.frozen:
            keep[i] = False
        return keep

    def dimension(self) -> int:
        """Real dimension of the admissible set."""
        k = int(self.keep_mask().sum())
        return k if self.real else 2 * k


def project(spec: StructureSpec, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    if Z.shape != (spec.d, spec.n, spec.n):
        raise ValueError(f"block shape {Z.shape} does not conform to {(spec.d, spec.n, spec.n)}")
    if spec.is_unconstrained:
        return Z.copy()
    out = np.where(spec.keep_mask(), Z, 0)
    if spec.real:
        out = out.real.astype(complex)
    return out


def is_member(spec: StructureSpec, Z, atol: float = 1e-14) -> bool:
    Z = np.asarray(Z, dtype=complex)
    return bool(np.all(np.abs(project(spec, Z) - Z) <= atol))


def real_inner(X, Y) -> float:
    """Re<X, Y> = Re trace(X^H Y), summed over all blocks."""
    return float(np.real(np.vdot(np.asarray(X), np.asarray(Y))))
