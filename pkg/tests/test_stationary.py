import json

import numpy as np
import pytest

from liouville import (
    analyze,
    build_closed,
    build_cosine,
    build_fold,
    build_lindblad_poly_h,
    build_nonlinear_friction_canonical,
    classify_state,
    condition_sc_roots,
    fock_scan,
    hamiltonian,
    make_basis,
    null_space,
    state_energy,
    vectorize,
    verify_eigenprojector,
)
from liouville.exceptions import ParameterDomainError
from liouville.hilbert import fock_projector
from liouville.stationary import consistency_table, level_index
from liouville.superops import SuperOperator, zero

from .conftest import random_density


@pytest.fixture(scope="module")
def fold_report(basis24):
    return analyze(build_fold(basis24, 5.25, -5.0, 1.0))


def test_closed_null_space_dimension_d12():
    b = make_basis(12)
    gen = build_closed(b)
    # oracle: the generator is diagonal with entries (E_x - E_x')/i; count exact zeros
    diag = np.diag(gen.matrix)
    assert np.count_nonzero(gen.matrix - np.diag(diag)) == 0
    assert np.sum(np.abs(diag) == 0) == 12
    ns = null_space(gen)
    assert ns.dimension == 12
    assert ns.zero_eigenvalue_count == 12
    for n in range(12):
        assert ns.projector_overlap(n) > 1 - 1e-12


def test_null_space_orthonormal(fold_report):
    K = fold_report.null_basis
    np.testing.assert_allclose(K.conj() @ K.T, np.eye(K.shape[0]), atol=1e-10)


def test_zero_superoperator_full_space():
    ns = null_space(zero(4))
    assert ns.dimension == 16


def test_fold_null_space_contains_projectors(basis24):
    gen = build_fold(basis24, 5.25, -5.0, 1.0)
    ns = null_space(gen)
    assert ns.dimension == 2
    for n in (1, 3):
        assert ns.overlap(vectorize(fock_projector(basis24, n))) > 1 - 1e-8
    assert ns.overlap(vectorize(fock_projector(basis24, 2))) < 1e-6


def test_fold_report(fold_report):
    assert fold_report.null_dimension == 2
    pure = fold_report.pure_states
    assert [s.fock_index for s in pure] == [1, 3]
    np.testing.assert_allclose([s.energy for s in pure], [1.5, 3.5], atol=1e-8)
    for s in pure:
        assert abs(s.density.purity - 1) <= 1e-8
        assert s.residual <= fold_report.tolerance
    assert fold_report.scan_stationary() == [1, 3]
    assert fold_report.sc_roots == [1.5, 3.5]


def test_report_serialization(fold_report):
    doc = json.loads(fold_report.to_json())
    assert doc["null_dimension"] == 2
    assert doc["pure_state_count"] == 2
    assert [st["n"] for st in doc["states"]] == [1, 3]
    assert len(doc["fock_scan"]) == 14
    csv = fold_report.fock_scan_csv().splitlines()
    assert csv[0] == "n,residual" and len(csv) == 15


def test_classify_state_examples():
    d = 6
    s = classify_state(vectorize(fock_projector(d, 0)))
    assert s.purity == 1 and s.is_pure and s.admissible()
    mix = (fock_projector(d, 0) + fock_projector(d, 1)) / 2
    s = classify_state(vectorize(mix))
    assert s.purity == pytest.approx(0.5) and not s.is_pure
    s = classify_state(vectorize(fock_projector(d, 0, 1)))
    assert not s.normalizable and np.isnan(s.purity) and not s.admissible()


def test_classify_state_mixed_bounds(rng):
    rho = random_density(rng, 5)
    s = classify_state(vectorize(rho))
    assert 1 / 5 - 1e-12 <= s.purity <= 1 + 1e-12
    assert s.admissible(1e-10)


def test_state_energy_examples():
    b = make_basis(8)
    H = hamiltonian(b)
    assert state_energy(vectorize(fock_projector(b, 2)), H) == 2.5
    b4 = make_basis(4)
    assert state_energy(vectorize(np.eye(4) / 4), hamiltonian(b4)) == pytest.approx(2.0, abs=1e-15)
    # unnormalized input is trace-normalized
    assert state_energy(vectorize(3 * fock_projector(b, 1)), H) == pytest.approx(1.5)
    with pytest.raises(ParameterDomainError):
        state_energy(vectorize(fock_projector(b, 0, 1)), H)


def test_verify_eigenprojector_examples():
    b = make_basis(8)
    H = hamiltonian(b)
    for n in range(8):
        chk = verify_eigenprojector(vectorize(fock_projector(b, n)), H)
        assert chk.ok and chk.left_residual < 1e-13 and chk.right_residual < 1e-13 and chk.lie_residual < 1e-13
        assert chk.energy == n + 0.5
    off = verify_eigenprojector(vectorize(fock_projector(b, 0, 1)), H)
    assert not off.ok
    mix = verify_eigenprojector(vectorize((fock_projector(b, 0) + fock_projector(b, 1)) / 2), H)
    assert not mix.ok
    assert mix.lie_residual < 1e-13  # stationary under the commutator, yet not an eigenprojector


def test_fock_scan_examples(basis24):
    assert all(r < 1e-13 for _, r in fock_scan(build_closed(basis24), basis24))
    scan = fock_scan(build_cosine(basis24, 3.0), basis24)
    assert [n for n, r in scan if r < 1e-10] == [1, 4, 7, 10, 13]
    assert len(scan) == 14


def test_fock_scan_fold_no_stationary():
    b = make_basis(12)
    scan = fock_scan(build_fold(b, 7.25, -5.0, 1.0), b)
    assert min(r for _, r in scan) > 1e-3


def test_fock_scan_fold_no_stationary_d24(basis24):
    # relative residuals shrink with d because the norm grows with the truncation edge
    scan = fock_scan(build_fold(basis24, 7.25, -5.0, 1.0), basis24)
    assert min(r for _, r in scan) > 1e-5


def test_condition_sc_roots_examples(basis24):
    levels = basis24.level_energy(np.arange(14))
    assert condition_sc_roots(build_cosine(basis24, 1.0), levels) == list(levels)
    fold = build_fold(basis24, 5.25, -5.0, 1.0)
    np.testing.assert_allclose(condition_sc_roots(fold, np.linspace(0, 10, 101)), [1.5, 3.5], atol=1e-9)
    # roots between grid points are found by bisection
    np.testing.assert_allclose(condition_sc_roots(fold, np.linspace(0, 10, 7)), [1.5, 3.5], atol=1e-9)
    fric = build_nonlinear_friction_canonical(basis24, 0.1, 0.5)
    assert condition_sc_roots(fric, levels) == [2.5]
    assert condition_sc_roots(build_closed(basis24), levels) == []


def test_level_index():
    b = make_basis(8, hbar=2, omega=0.5)
    assert level_index(b, 3.5) == 3
    assert level_index(b, 3.2) is None
    assert level_index(b, -0.5) is None


@pytest.mark.parametrize("builder", [
    lambda b: build_fold(b, 5.25, -5.0, 1.0),
    lambda b: build_cosine(b, 3.0),
    lambda b: build_cosine(b, 1.0),
    lambda b: build_nonlinear_friction_canonical(b, 0.1, 0.5),
])
def test_consistency_triangle(builder, basis24):
    gen = builder(basis24)
    for row in consistency_table(gen):
        scan_zero = row["scan_residual"] <= 1e-9
        n_zero = row["n_max"] <= 1e-9
        in_kernel = row["overlap"] > 1 - 1e-6
        assert scan_zero == n_zero == in_kernel, row


@pytest.mark.parametrize("builder,expected", [
    (lambda b: build_fold(b, 5.25, -5.0, 1.0), [1, 3]),
    (lambda b: build_cosine(b, 3.0), [1, 4, 7, 10, 13, 16, 19, 22]),
    (lambda b: build_nonlinear_friction_canonical(b, 0.1, 0.5), [2]),
])
def test_pure_states_are_eigenprojectors(builder, expected, basis24):
    gen = builder(basis24)
    rep = analyze(gen)
    assert rep.stationary_fock_indices == expected
    H = hamiltonian(basis24)
    for s in rep.pure_states:
        assert verify_eigenprojector(s.vector, H).ok
        assert s.energy == pytest.approx(float(basis24.level_energy(s.fock_index)), abs=1e-9)


def test_lindblad_null_space_all_levels(basis24):
    rep = analyze(build_lindblad_poly_h(basis24, [0.0, 1.0]))
    assert rep.null_dimension == 24
    assert rep.stationary_fock_indices == list(range(24))


def test_analyze_bare_matrix():
    b = make_basis(6)
    rep = analyze(SuperOperator(build_closed(b).matrix))
    assert rep.generator_id == "superoperator"
    assert rep.null_dimension == 6
    assert rep.sc_roots == []
