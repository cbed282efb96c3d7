import numpy as np
import pytest

from liouville import (
    build_closed,
    build_cosine,
    build_fold,
    build_lindblad_poly_h,
    build_nonlinear_friction_canonical,
    make_basis,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def basis24():
    return make_basis(24)


@pytest.fixture(scope="session")
def fold_gen(basis24):
    return build_fold(basis24, 5.25, -5.0, 1.0)


@pytest.fixture(scope="session")
def cosine3_gen(basis24):
    return build_cosine(basis24, 3.0)


@pytest.fixture(scope="session")
def friction_gen(basis24):
    return build_nonlinear_friction_canonical(basis24, 0.1, 0.5)


@pytest.fixture(scope="session")
def lindblad_gen(basis24):
    return build_lindblad_poly_h(basis24, [[0.0, 1.0, 0.3]])


@pytest.fixture(scope="session")
def closed_gen(basis24):
    return build_closed(basis24)


def random_matrix(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_hermitian(rng, d):
    A = random_matrix(rng, d)
    return 0.5 * (A + A.conj().T)


def random_density(rng, d):
    G = random_matrix(rng, d)
    rho = G @ G.conj().T
    return rho / np.trace(rho)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
