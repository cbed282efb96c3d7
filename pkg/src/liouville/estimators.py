"""scikit-learn style wrappers: fit on a generator, then act on batches of states.

Batches are ``(n_samples, d*d)`` arrays of row-major vectorized operators.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .evolution import COND_LIMIT, decompose
from .generators import BuiltGenerator, GeneratorSpec
from .hilbert import DEFAULT_GUARD_FRACTION, FockBasis
from .stationary import DEFAULT_TOL, PURE_TOL, analyze
from .superops import SuperOperator
from .validation import check_liouville_batch, hilbert_dim


def _as_generator(G):
    if isinstance(G, GeneratorSpec):
        return G.build()
    if isinstance(G, (BuiltGenerator, SuperOperator)):
        return G
    M = np.asarray(G, dtype=complex)
    return SuperOperator(M)


def _matrix(G):
    return G.matrix if isinstance(G, (BuiltGenerator, SuperOperator)) else np.asarray(G)


class StationaryStateFinder(TransformerMixin, BaseEstimator):
    """Kernel of a generator with classified stationary states.

    ``fit`` accepts a :class:`GeneratorSpec`, a built generator, a
    :class:`SuperOperator` or a dense matrix.  ``predict`` flags which input
    states are stationary; ``transform`` returns their coordinates in the
    orthonormal kernel basis.

    Attributes
    ----------
    report_ : StationaryReport
    null_basis_ : ndarray of shape (k, d*d)
    stationary_indices_ : list of int
        Fock levels whose projector is a pure stationary state.
    """

    def __init__(self, tol=DEFAULT_TOL, guard_fraction=DEFAULT_GUARD_FRACTION, pure_tol=PURE_TOL):
        self.tol = tol
        self.guard_fraction = guard_fraction
        self.pure_tol = pure_tol

    def fit(self, G, y=None):
        gen = _as_generator(G)
        basis = gen.basis if isinstance(gen, BuiltGenerator) else FockBasis(hilbert_dim(_matrix(gen).shape[0]))
        self.report_ = analyze(gen, basis, self.tol, self.guard_fraction, self.pure_tol)
        self.null_basis_ = self.report_.null_basis
        self.stationary_indices_ = self.report_.stationary_fock_indices
        self._matrix = _matrix(gen)
        self.n_features_in_ = self._matrix.shape[0]
        self._norm = float(np.linalg.norm(self._matrix, 2))
        return self

    def residuals(self, X):
        """``||Lambda v|| / (||Lambda|| ||v||)`` per row."""
        check_is_fitted(self, "report_")
        X = check_liouville_batch(X, self.n_features_in_)
        out = np.linalg.norm(X @ self._matrix.T, axis=1)
        norms = np.linalg.norm(X, axis=1)
        denom = np.where(norms > 0, norms, 1.0) * (self._norm if self._norm > 0 else 1.0)
        return out / denom

    def predict(self, X):
        return self.residuals(X) <= self.tol

    def transform(self, X):
        check_is_fitted(self, "report_")
        X = check_liouville_batch(X, self.n_features_in_)
        return X @ self.null_basis_.conj().T


class Propagator(TransformerMixin, BaseEstimator):
    """``exp(t Lambda)`` applied to batches of states.

    The spectral decomposition is computed once in ``fit`` and reused; the
    path taken (``"eig"`` or ``"expm"``) is exposed as ``method_``.
    """

    def __init__(self, t=1.0, cond_limit=COND_LIMIT):
        self.t = t
        self.cond_limit = cond_limit

    def fit(self, G, y=None):
        gen = _as_generator(G)
        self.decomposition_ = decompose(gen, self.cond_limit)
        self.method_ = self.decomposition_.method
        self.condition_ = self.decomposition_.condition
        self.n_features_in_ = _matrix(gen).shape[0]
        return self

    def transform(self, X, t=None):
        check_is_fitted(self, "decomposition_")
        X = check_liouville_batch(X, self.n_features_in_)
        t = self.t if t is None else t
        if not np.isfinite(t):
            raise ValueError(f"time must be finite, got {t}")
        return np.array([self.decomposition_.propagate(x, t) for x in X])
