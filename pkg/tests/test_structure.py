import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dsing import problems as P
from dsing.structure import StructureSpec, is_member, project, real_inner

from conftest import crandn


@st.composite
def specs(draw):
    d = draw(st.integers(1, 3))
    n = draw(st.integers(1, 3))
    masks = tuple(
        draw(st.one_of(st.none(), st.lists(st.booleans(), min_size=n * n, max_size=n * n).map(lambda b: np.reshape(b, (n, n)))))
        for _ in range(d)
    )
    frozen = draw(st.frozensets(st.integers(0, d - 1), max_size=d))
    return StructureSpec(d, n, masks, draw(st.booleans()), frozen)


def block(spec, seed):
    return crandn(np.random.default_rng(seed), spec.d, spec.n, spec.n)


def test_unconstrained_is_identity():
    spec = StructureSpec.unconstrained(2, 3)
    Z = block(spec, 0)
    assert np.array_equal(project(spec, Z), Z)


def test_off_diagonal_mask():
    off = ~np.eye(2, dtype=bool)
    spec = StructureSpec(1, 2, (off,))
    assert np.array_equal(project(spec, np.ones((1, 2, 2))), np.eye(2)[None])


def test_real_projection_of_imaginary_block():
    spec = StructureSpec.unconstrained(1, 2, real=True)
    assert not np.any(project(spec, 1j * np.ones((1, 2, 2))))


def test_frozen_terms_vanish():
    spec = StructureSpec(3, 2, None, False, frozenset({1}))
    out = project(spec, np.ones((3, 2, 2)))
    assert not out[1].any() and out[0].all() and out[2].all()


def test_membership():
    spec = StructureSpec(1, 2, (~np.eye(2, dtype=bool),))
    assert is_member(spec, project(spec, np.ones((1, 2, 2))))
    Z = np.eye(2)[None].astype(complex)
    Z[0, 0, 1] = 1e-3
    assert not is_member(spec, Z)


def test_time_delay_coefficients_respect_structures():
    F = P.time_delay()
    for name, spec in P.time_delay_structures(F).items():
        if name == "time_delay":
            # only the rows that carry the delay parameters may change
            assert is_member(spec, F.coeffs * spec.keep_mask())
        else:
            assert is_member(spec, F.coeffs)


def test_validation():
    with pytest.raises(ValueError):
        StructureSpec(2, 2, (None,))
    with pytest.raises(ValueError):
        StructureSpec(1, 2, (np.zeros((3, 3), bool),))
    with pytest.raises(ValueError):
        StructureSpec(2, 2, None, False, frozenset({2}))
    with pytest.raises(ValueError):
        project(StructureSpec.unconstrained(2, 2), np.zeros((1, 2, 2)))


def test_dimension():
    assert StructureSpec.unconstrained(2, 3).dimension() == 36
    assert StructureSpec.unconstrained(2, 3, real=True).dimension() == 18
    assert StructureSpec.sparsity_of(P.time_delay().coeffs, real=True).dimension() == 3 + 5 + 3


@given(specs(), st.integers(0, 1000))
def test_idempotent(spec, seed):
    Z = block(spec, seed)
    once = project(spec, Z)
    assert np.max(np.abs(project(spec, once) - once), initial=0) <= 1e-15


@given(specs(), st.integers(0, 1000))
def test_re_orthogonality(spec, seed):
    Z = block(spec, seed)
    W = project(spec, block(spec, seed + 1))
    lhs, rhs = real_inner(project(spec, Z), W), real_inner(Z, W)
    assert abs(lhs - rhs) <= 1e-12 * np.linalg.norm(Z) * np.linalg.norm(W) + 1e-300


@given(specs(), st.integers(0, 1000))
def test_contraction(spec, seed):
    Z = block(spec, seed)
    assert np.linalg.norm(project(spec, Z)) <= np.linalg.norm(Z)


@given(specs(), st.integers(0, 1000))
def test_component_projections_commute(spec, seed):
    Z = block(spec, seed)
    masks_only = StructureSpec(spec.d, spec.n, spec.zero_masks)
    real_only = StructureSpec.unconstrained(spec.d, spec.n, spec.real)
    frozen_only = StructureSpec(spec.d, spec.n, None, False, spec.frozen)
    parts = [masks_only, real_only, frozen_only]
    ref = project(spec, Z)
    for order in ([0, 1, 2], [2, 1, 0], [1, 0, 2], [1, 2, 0]):
        out = Z
        for k in order:
            out = project(parts[k], out)
        assert np.array_equal(out, ref)
