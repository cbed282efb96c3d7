"""Input validation helpers shared by the functional API and the estimators."""

import math

import numpy as np

from .exceptions import DimensionMismatchError, ParameterDomainError


def check_operator(A, dim=None, name="operator"):
    """Return ``A`` as a complex square 2-D array, optionally of size ``dim``."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"{name} must be a square matrix, got shape {A.shape}")
    if dim is not None and A.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has dimension {A.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(A)):
        raise ParameterDomainError(f"{name} contains non-finite entries")
    return A


def hilbert_dim(dim2):
    """Hilbert-space dimension ``d`` for a Liouville dimension ``d**2``."""
    d = math.isqrt(int(dim2))
    if d * d != dim2 or d == 0:
        raise DimensionMismatchError(f"Liouville dimension {dim2} is not a perfect square")
    return d


def check_liouville_vector(v, dim2=None, name="vector"):
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be one-dimensional, got shape {v.shape}")
    hilbert_dim(v.shape[0])
    if dim2 is not None and v.shape[0] != dim2:
        raise DimensionMismatchError(f"{name} has length {v.shape[0]}, expected {dim2}")
    return v


def check_liouville_batch(X, dim2=None):
    """Validate a batch of Liouville vectors stored as rows (n_samples, d**2).

    A single vector is promoted to a batch of one.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D batch of vectors, got shape {X.shape}")
    hilbert_dim(X.shape[1])
    if dim2 is not None and X.shape[1] != dim2:
        raise DimensionMismatchError(f"vectors have length {X.shape[1]}, expected {dim2}")
    return X


def hermiticity_defect(A):
    """Max-norm distance between ``A`` and its conjugate transpose."""
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def is_hermitian(A, tol=1e-10):
    A = np.asarray(A)
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    return hermiticity_defect(A) <= tol * scale


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ParameterDomainError(f"{name} must be a positive finite number, got {value!r}")
    return value
