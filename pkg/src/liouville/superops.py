"""Superoperators on Liouville space and the algebra of Lie/Jordan multiplications.

A :class:`SuperOperator` is stored densely as a ``(d*d, d*d)`` complex matrix.
With row-major vectorization ``vec(L @ B @ R) = kron(L, R.T) @ vec(B)``, so
left multiplication is ``kron(A, I)`` and right multiplication ``kron(I, A.T)``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import DimensionMismatchError, ParameterDomainError
from .hilbert import devectorize, matrix_to_csv, vectorize
from .validation import check_liouville_vector, check_operator, check_positive, hilbert_dim

MIXED4_NOTE = "mixed4 is checked with a +hbar^2/4 coefficient"
IDENTITY_NAMES = ("lie", "jordan1", "jordan2", "jordan3", "mixed1", "mixed2", "mixed3", "mixed4")


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Dense superoperator, optionally remembering a sum-of-products form.

    ``factors`` is a tuple of ``(left, right)`` operator pairs whose action
    ``B -> sum(left @ B @ right)`` equals the dense matrix.  It is kept only
    while every operation that built the superoperator preserves it.
    """

    matrix: np.ndarray
    factors: tuple = field(default=None, repr=False)

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatchError(f"superoperator must be square, got {M.shape}")
        hilbert_dim(M.shape[0])
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def dim2(self):
        return self.matrix.shape[0]

    @property
    def dim(self):
        return hilbert_dim(self.dim2)

    @cached_property
    def norm(self):
        """Spectral (operator 2-) norm."""
        return float(np.linalg.norm(self.matrix, 2)) if self.matrix.any() else 0.0

    def apply(self, v):
        return apply(self, v)

    def apply_operator(self, B):
        """Action on an operator matrix, returning an operator matrix."""
        return devectorize(self.matrix @ vectorize(B))

    def factored_action(self, B):
        if self.factors is None:
            raise ValueError("superoperator carries no factored form")
        B = check_operator(B, dim=self.dim)
        return sum((L @ B @ R for L, R in self.factors), np.zeros_like(B))

    def __matmul__(self, other):
        return compose(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __neg__(self):
        return scale(-1.0, self)

    def __mul__(self, c):
        return scale(c, self)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return scale(1.0 / c, self)

    def to_csv(self, fh=None):
        return matrix_to_csv(self.matrix, fh)


def _check_same(S1, S2):
    if S1.dim2 != S2.dim2:
        raise DimensionMismatchError(f"superoperators act on spaces of size {S1.dim2} and {S2.dim2}")


def identity(dim):
    I = np.eye(dim, dtype=complex)
    return SuperOperator(np.eye(dim * dim, dtype=complex), ((I, I),))


def zero(dim):
    return SuperOperator(np.zeros((dim * dim, dim * dim), dtype=complex), ())


def left_mult(A):
    """``L_A |B) = |AB)``."""
    A = check_operator(A)
    I = np.eye(A.shape[0], dtype=complex)
    return SuperOperator(np.kron(A, I), ((A, I),))


def right_mult(A):
    """``R_A |B) = |BA)``."""
    A = check_operator(A)
    I = np.eye(A.shape[0], dtype=complex)
    return SuperOperator(np.kron(I, A.T), ((I, A),))


def lie_mult(A, hbar=1.0):
    """``L-_A B = (AB - BA) / (i hbar)``."""
    hbar = check_positive(hbar, "hbar")
    return scale(1.0 / (1j * hbar), add(left_mult(A), scale(-1.0, right_mult(A))))


def jordan_mult(A):
    """``L+_A B = (AB + BA) / 2``."""
    return scale(0.5, add(left_mult(A), right_mult(A)))


def compose(S1, S2):
    """``S1`` applied after ``S2``."""
    _check_same(S1, S2)
    factors = None
    if S1.factors is not None and S2.factors is not None:
        factors = tuple((L1 @ L2, R2 @ R1) for L1, R1 in S1.factors for L2, R2 in S2.factors)
    return SuperOperator(S1.matrix @ S2.matrix, factors)


def add(S1, S2):
    _check_same(S1, S2)
    factors = None
    if S1.factors is not None and S2.factors is not None:
        factors = S1.factors + S2.factors
    return SuperOperator(S1.matrix + S2.matrix, factors)


def scale(c, S):
    c = complex(c)
    factors = None if S.factors is None else tuple((c * L, R) for L, R in S.factors)
    return SuperOperator(c * S.matrix, factors)


def apply(S, v):
    v = check_liouville_vector(v, dim2=S.dim2)
    return S.matrix @ v


def spectral_function(H_diag, f):
    """Superoperator function ``f(L_H, R_H)`` for a diagonal Hamiltonian.

    ``L_H`` and ``R_H`` are simultaneously diagonal in the matrix-unit basis
    with eigenvalues ``E_x`` and ``E_x'`` on ``|x><x'|``, so the function is
    the diagonal superoperator with entries ``f(E_x, E_x')``.  ``f`` must
    accept numpy arrays.
    """
    H = check_operator(H_diag, name="H_diag")
    off = H - np.diag(np.diag(H))
    scale_ = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(off)) > 1e-12 * scale_:
        raise ParameterDomainError("spectral_function needs a diagonal Hamiltonian")
    E = np.diag(H)
    if np.max(np.abs(E.imag)) > 1e-12 * scale_:
        raise ParameterDomainError("spectral_function needs real eigenvalues")
    E = E.real
    values = np.asarray(f(E[:, None], E[None, :]), dtype=complex)
    values = np.broadcast_to(values, (E.size, E.size))
    return SuperOperator(np.diag(values.reshape(-1)))


def power_series_apply(coeffs, S, v):
    """Horner evaluation of ``sum_k coeffs[k] S**k`` applied to ``v``."""
    v = check_liouville_vector(v, dim2=S.dim2)
    coeffs = list(coeffs)
    if not coeffs:
        return np.zeros_like(v)
    out = complex(coeffs[-1]) * v
    for c in reversed(coeffs[:-1]):
        out = S.matrix @ out + complex(c) * v
    return out


def cosine_series_coefficients(scale_, terms):
    """Taylor coefficients of ``cos(scale_ * s)`` in powers of ``s`` (``2*terms`` of them)."""
    coeffs = np.zeros(2 * terms, dtype=float)
    term = 1.0
    for m in range(terms):
        coeffs[2 * m] = term
        term *= -(scale_**2) / ((2 * m + 1) * (2 * m + 2))
    return coeffs


def lie_product(A, B, hbar=1.0):
    """``A . B = (AB - BA) / (i hbar)``."""
    return (A @ B - B @ A) / (1j * hbar)


def jordan_product(A, B):
    """``A o B = (AB + BA) / 2``."""
    return (A @ B + B @ A) / 2


@dataclass
class IdentityReport:
    """Residuals of the Lie, Jordan and mixed superoperator relations.

    ``residuals`` are relative to the max norm of the larger side; ``absolute``
    holds the raw max-norm differences.
    """

    residuals: dict
    absolute: dict
    tolerance: float
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return {name: r <= self.tolerance for name, r in self.residuals.items()}

    @property
    def all_passed(self):
        return all(self.passed.values())

    @property
    def max_residual(self):
        return max(self.residuals.values())


def _residual(lhs, rhs):
    diff = float(np.max(np.abs(lhs - rhs)))
    size = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    return (diff / size if size > 0 else diff), diff


def identity_sides(A, B, C, hbar=1.0, mixed3_factor=0.25):
    """Both sides of every relation as dense matrices, keyed by identity name.

    ``mixed3_factor`` multiplies ``hbar**2`` in the third mixed relation; the
    true value is ``1/4`` and any other value is a negative control.
    """
    A = check_operator(A, name="A")
    B = check_operator(B, dim=A.shape[0], name="B")
    C = check_operator(C, dim=A.shape[0], name="C")
    hb2 = hbar**2

    def Lm(X):
        return lie_mult(X, hbar).matrix

    def Lp(X):
        return jordan_mult(X).matrix

    dot = lie_product(A, B, hbar)
    ab, bc, ac = jordan_product(A, B), jordan_product(B, C), jordan_product(A, C)
    jordan_lhs = Lp(jordan_product(ab, C)) + Lp(B) @ Lp(C) @ Lp(A) + Lp(A) @ Lp(C) @ Lp(B)
    right_sum = Lp(ab) @ Lp(C) + Lp(bc) @ Lp(A) + Lp(ac) @ Lp(B)
    left_sum = Lp(C) @ Lp(ab) + Lp(B) @ Lp(ac) + Lp(A) @ Lp(bc)
    return {
        "lie": (Lm(dot), Lm(A) @ Lm(B) - Lm(B) @ Lm(A)),
        "jordan1": (jordan_lhs, right_sum),
        "jordan2": (jordan_lhs, left_sum),
        "jordan3": (left_sum, right_sum),
        "mixed1": (Lp(dot), Lm(A) @ Lp(B) - Lp(B) @ Lm(A)),
        "mixed2": (Lm(ab), Lp(A) @ Lm(B) + Lp(B) @ Lm(A)),
        "mixed3": (Lp(ab), Lp(A) @ Lp(B) - mixed3_factor * hb2 * Lm(B) @ Lm(A)),
        # Sign chosen so the relation holds: L+_B L+_A - L+_A L+_B = +(hbar^2/4) L-_{A.B}.
        "mixed4": (Lp(B) @ Lp(A) - Lp(A) @ Lp(B), 0.25 * hb2 * Lm(dot)),
    }


def algebra_check(A, B, C, hbar=1.0, tol=1e-10):
    """Evaluate the eight superoperator relations on one operator triple."""
    sides = identity_sides(A, B, C, hbar)
    residuals, absolute = {}, {}
    for name in IDENTITY_NAMES:
        residuals[name], absolute[name] = _residual(*sides[name])
    lhs, rhs = sides["mixed4"]
    printed, _ = _residual(lhs, -rhs)
    notes = [f"{MIXED4_NOTE}; the minus-sign form has relative residual {printed:.3e} here"]
    return IdentityReport(residuals, absolute, tol, notes)


def negative_control(A, B, C, hbar=1.0):
    """Relative residual of the third mixed relation with ``hbar**2/2`` in place of ``hbar**2/4``."""
    lhs, rhs = identity_sides(A, B, C, hbar, mixed3_factor=0.5)["mixed3"]
    return _residual(lhs, rhs)[0]


def random_operator(dim, rng):
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def algebra_suite(dims=(4, 5, 6), trials=50, hbar=1.0, tol=1e-12, seed=42):
    """Run :func:`algebra_check` over random complex triples.

    Returns the worst relative residual per identity, the smallest
    negative-control residual, and the number of triples checked.
    """
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(IDENTITY_NAMES, 0.0)
    worst_abs = dict.fromkeys(IDENTITY_NAMES, 0.0)
    weakest_control = np.inf
    count = 0
    for d in dims:
        for _ in range(trials):
            A, B, C = (random_operator(d, rng) for _ in range(3))
            report = algebra_check(A, B, C, hbar, tol)
            for name, r in report.residuals.items():
                worst[name] = max(worst[name], r)
                worst_abs[name] = max(worst_abs[name], report.absolute[name])
            weakest_control = min(weakest_control, negative_control(A, B, C, hbar))
            count += 1
    return IdentityReport(worst, worst_abs, tol, [MIXED4_NOTE]), float(weakest_control), count
