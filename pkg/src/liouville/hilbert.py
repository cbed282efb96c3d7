"""Truncated Fock-space operators and their embedding in Liouville space.

Operators are plain complex ``(d, d)`` numpy arrays.  Liouville vectors are
``(d*d,)`` arrays in row-major pairing: the component of ``|A)`` at flattened
index ``x*d + x'`` is the kernel element ``<x|A|x'>``.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, ParameterDomainError
from .validation import check_liouville_vector, check_operator, hilbert_dim

MIN_DIM = 4
DEFAULT_GUARD_FRACTION = 0.25
MIN_GUARD_LEVELS = 4


@dataclass(frozen=True)
class FockBasis:
    """Number basis truncated to ``dim`` levels, with the physical constants."""

    dim: int
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if isinstance(self.dim, bool) or int(self.dim) != self.dim:
            raise ParameterDomainError(f"dim must be an integer, got {self.dim!r}")
        if self.dim < MIN_DIM:
            raise ParameterDomainError(f"dim must be at least {MIN_DIM}, got {self.dim}")
        for name in ("hbar", "mass", "omega"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ParameterDomainError(f"{name} must be strictly positive, got {value!r}")
        object.__setattr__(self, "dim", int(self.dim))
        for name in ("hbar", "mass", "omega"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def dim2(self):
        return self.dim * self.dim

    def level_energy(self, n):
        """Oscillator level ``hbar*omega*(n + 1/2)``."""
        return self.hbar * self.omega * (np.asarray(n) + 0.5)

    def guard_cutoff(self, guard_fraction=DEFAULT_GUARD_FRACTION):
        return guard_cutoff(self.dim, guard_fraction)

    def guard_levels(self, guard_fraction=DEFAULT_GUARD_FRACTION):
        """Fock indices trusted by numerical checks (below the guard band)."""
        return list(range(self.guard_cutoff(guard_fraction)))


def make_basis(dim=24, hbar=1.0, mass=1.0, omega=1.0):
    return FockBasis(dim, hbar, mass, omega)


def guard_cutoff(dim, guard_fraction=DEFAULT_GUARD_FRACTION, min_guard=MIN_GUARD_LEVELS):
    """Number of low Fock levels kept once the truncation guard band is removed.

    The top ``ceil(guard_fraction * dim)`` levels are dropped and, on top of
    those, ``min_guard`` more.  ``d=24`` with the default fraction keeps
    ``n = 0..13``.
    """
    if not 0.0 <= guard_fraction <= 0.5:
        raise ParameterDomainError(f"guard_fraction must lie in [0, 0.5], got {guard_fraction}")
    return max(0, dim - math.ceil(guard_fraction * dim - 1e-12) - min_guard)


def ladder_operators(basis):
    """Lowering and raising operators ``(a, a_dag)`` with ``a[n-1, n] = sqrt(n)``."""
    a = np.diag(np.sqrt(np.arange(1, basis.dim, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def canonical_operators(basis):
    """Position and momentum ``(q, p)`` built from the truncated ladder operators."""
    a, ad = ladder_operators(basis)
    hbar, m, w = basis.hbar, basis.mass, basis.omega
    q = math.sqrt(hbar / (2 * m * w)) * (a + ad)
    p = 1j * math.sqrt(hbar * m * w / 2) * (ad - a)
    return q, p


def hamiltonian(basis, mode="analytic"):
    """Linear oscillator Hamiltonian.

    ``"analytic"`` gives the exact diagonal ``hbar*omega*(n + 1/2)``;
    ``"constructed"`` assembles ``p**2/2m + m*omega**2*q**2/2`` from truncated
    ``q, p`` and therefore differs from the analytic one in the last two rows.
    """
    if mode == "analytic":
        return np.diag(basis.level_energy(np.arange(basis.dim))).astype(complex)
    if mode == "constructed":
        q, p = canonical_operators(basis)
        return p @ p / (2 * basis.mass) + 0.5 * basis.mass * basis.omega**2 * (q @ q)
    raise ParameterDomainError(f"unknown Hamiltonian mode {mode!r}")


def fock_projector(basis_or_dim, n, m=None):
    """Matrix unit ``|n><m|`` (``|n><n|`` when ``m`` is omitted)."""
    d = basis_or_dim.dim if isinstance(basis_or_dim, FockBasis) else int(basis_or_dim)
    m = n if m is None else m
    if not (0 <= n < d and 0 <= m < d):
        raise DimensionMismatchError(f"index ({n}, {m}) outside a {d}-level basis")
    P = np.zeros((d, d), dtype=complex)
    P[n, m] = 1.0
    return P


def hs_inner(A, B):
    """Hilbert-Schmidt inner product ``Tr(A^dagger B)``."""
    A = check_operator(A, name="A")
    B = check_operator(B, dim=A.shape[0], name="B")
    return complex(np.vdot(A, B))


def hs_norm(A):
    return math.sqrt(max(hs_inner(A, A).real, 0.0))


def vectorize(A):
    return check_operator(A).reshape(-1).copy()


def devectorize(v):
    v = check_liouville_vector(v)
    d = hilbert_dim(v.shape[0])
    return v.reshape(d, d).copy()


def trace_functional(v):
    """``(I|v)``: sum of the diagonal-pair components of a Liouville vector."""
    v = check_liouville_vector(v)
    d = hilbert_dim(v.shape[0])
    return complex(v[:: d + 1].sum())


def matrix_to_csv(A, fh=None):
    """Dump nonzero entries as ``row,col,re,im`` lines; returns text if ``fh`` is None."""
    A = np.asarray(A)
    out = io.StringIO() if fh is None else fh
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["row", "col", "re", "im"])
    rows, cols = np.nonzero(A)
    for r, c in zip(rows, cols):
        z = complex(A[r, c])
        writer.writerow([int(r), int(c), repr(z.real), repr(z.imag)])
    if fh is None:
        return out.getvalue()
    return None


def matrix_from_csv(text, shape):
    A = np.zeros(shape, dtype=complex)
    reader = csv.DictReader(io.StringIO(text))
    for row in reader:
        A[int(row["row"]), int(row["col"])] = complex(float(row["re"]), float(row["im"]))
    return A
