import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from liouville import (
    FockBasis,
    canonical_operators,
    devectorize,
    hamiltonian,
    hs_inner,
    ladder_operators,
    make_basis,
    trace_functional,
    vectorize,
)
from liouville.exceptions import DimensionMismatchError, ParameterDomainError
from liouville.hilbert import fock_projector, guard_cutoff, hs_norm, matrix_from_csv, matrix_to_csv
from liouville.validation import hermiticity_defect

from .conftest import random_matrix


def test_make_basis_defaults():
    b = make_basis(24, 1, 1, 1)
    assert b.dim == 24 and b.dim2 == 576
    assert (b.hbar, b.mass, b.omega) == (1.0, 1.0, 1.0)


def test_make_basis_stores_constants():
    b = make_basis(16, 0.5, 2, 3)
    assert (b.dim, b.hbar, b.mass, b.omega) == (16, 0.5, 2.0, 3.0)


@pytest.mark.parametrize("args", [(3, 1, 1, 1), (24, 0, 1, 1), (24, 1, -1, 1), (24, 1, 1, np.nan), (4.5, 1, 1, 1)])
def test_make_basis_rejects_bad_domain(args):
    with pytest.raises(ParameterDomainError):
        make_basis(*args)


def test_basis_is_immutable():
    b = make_basis(8)
    with pytest.raises(AttributeError):
        b.dim = 9


def test_guard_cutoff():
    # top quarter and always the top four levels excluded
    assert guard_cutoff(24) == 14
    assert guard_cutoff(12) == 5
    assert guard_cutoff(8) == 2
    assert make_basis(24).guard_levels() == list(range(14))


def test_ladder_entries():
    a, ad = ladder_operators(make_basis(4))
    assert a[0, 1] == 1.0
    assert a[1, 2] == pytest.approx(np.sqrt(2), abs=0)
    np.testing.assert_array_equal(ad, a.conj().T)


def test_number_operator():
    a, ad = ladder_operators(make_basis(7))
    np.testing.assert_allclose(ad @ a, np.diag(np.arange(7.0)), atol=1e-14)


def test_ladder_commutator_truncation_corner():
    d = 6
    a, ad = ladder_operators(make_basis(d))
    expected = np.eye(d)
    expected[d - 1, d - 1] = -(d - 1)
    np.testing.assert_allclose(a @ ad - ad @ a, expected, atol=1e-13)


def test_canonical_operators():
    b = make_basis(8)
    q, p = canonical_operators(b)
    assert q[0, 1] == pytest.approx(1 / np.sqrt(2), rel=1e-15)
    assert hermiticity_defect(p) < 1e-14
    assert hermiticity_defect(q) < 1e-14
    comm = q @ p - p @ q
    np.testing.assert_allclose(comm[:-1, :-1], 1j * np.eye(7), atol=1e-13)
    assert abs(comm[-1, -1] - 1j) > 1


def test_canonical_operators_units():
    b = make_basis(8, hbar=0.5, mass=2, omega=3)
    q, p = canonical_operators(b)
    assert q[0, 1] == pytest.approx(np.sqrt(0.5 / (2 * 2 * 3)), rel=1e-14)
    comm = q @ p - p @ q
    np.testing.assert_allclose(comm[:-1, :-1], 0.5j * np.eye(7), atol=1e-13)


def test_hamiltonian_analytic():
    H = hamiltonian(make_basis(6))
    np.testing.assert_array_equal(np.diag(H).real, [0.5, 1.5, 2.5, 3.5, 4.5, 5.5])
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


def test_hamiltonian_constructed_matches_away_from_corner():
    b = make_basis(8, hbar=0.7, mass=1.3, omega=2.1)
    Ha, Hc = hamiltonian(b, "analytic"), hamiltonian(b, "constructed")
    k = b.dim - 2
    np.testing.assert_allclose(Hc[:k, :k], Ha[:k, :k], atol=1e-12)
    assert abs(Hc[-1, -1] - Ha[-1, -1]) > 0.1


def test_hamiltonian_bad_mode():
    with pytest.raises(ParameterDomainError):
        hamiltonian(make_basis(5), "numeric")


def test_hs_inner_examples(rng):
    d = 5
    I = np.eye(d)
    assert hs_inner(I, I) == d
    E01 = fock_projector(d, 0, 1)
    assert hs_inner(E01, E01) == 1
    A, B = random_matrix(rng, d), random_matrix(rng, d)
    assert abs(hs_inner(A, B) - np.conj(hs_inner(B, A))) < 1e-14 * abs(hs_inner(A, B))
    assert abs(hs_inner(A, B) - np.trace(A.conj().T @ B)) < 1e-12
    with pytest.raises(DimensionMismatchError):
        hs_inner(A, np.eye(4))


def test_vectorize_layout(rng):
    d = 4
    A = random_matrix(rng, d)
    v = vectorize(A)
    for x in range(d):
        for xp in range(d):
            assert v[x * d + xp] == A[x, xp]
    np.testing.assert_array_equal(devectorize(v), A)
    unit = vectorize(fock_projector(d, 2, 3))
    assert unit[2 * d + 3] == 1 and np.count_nonzero(unit) == 1


def test_vectorize_preserves_inner_product(rng):
    for _ in range(20):
        A, B = random_matrix(rng, 4), random_matrix(rng, 4)
        assert abs(hs_inner(A, B) - np.vdot(vectorize(A), vectorize(B))) < 1e-14 * max(1, abs(hs_inner(A, B)))


def test_devectorize_rejects_non_square_length():
    with pytest.raises(DimensionMismatchError):
        devectorize(np.zeros(10))


def test_trace_functional_examples():
    assert trace_functional(vectorize(np.eye(5))) == 5
    assert trace_functional(vectorize(fock_projector(5, 0))) == 1
    assert trace_functional(vectorize(fock_projector(5, 0, 1))) == 0


def test_matrix_csv_roundtrip(rng):
    A = random_matrix(rng, 5)
    A[1, :] = 0
    text = matrix_to_csv(A)
    lines = text.strip().splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 1 + np.count_nonzero(A)
    np.testing.assert_array_equal(matrix_from_csv(text, A.shape), A)
    buf = io.StringIO()
    matrix_to_csv(A, buf)
    assert buf.getvalue() == text


complex_entries = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 7).flatmap(lambda d: arrays(np.complex128, (d, d), elements=complex_entries)))
def test_property_isometry_and_trace(A):
    v = vectorize(A)
    scale = max(1.0, float(np.abs(A).max()))
    assert abs(np.linalg.norm(v) - hs_norm(A)) <= 1e-12 * scale * A.shape[0]
    assert abs(trace_functional(v) - np.trace(A)) <= 1e-13 * scale * A.shape[0]
    np.testing.assert_array_equal(devectorize(v), A)


@settings(max_examples=25, deadline=None)
@given(st.integers(6, 20), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_property_constructed_hamiltonian_agrees(d, hbar, mass, omega):
    b = FockBasis(d, hbar, mass, omega)
    Ha, Hc = hamiltonian(b), hamiltonian(b, "constructed")
    k = d - 2
    scale = hbar * omega * d
    np.testing.assert_allclose(Hc[:k, :k], Ha[:k, :k], atol=1e-12 * scale)
