"""Stationary states of a generator: kernel extraction, classification and checks."""

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import NumericalBreakdownError, ParameterDomainError
from .generators import BuiltGenerator
from .hilbert import DEFAULT_GUARD_FRACTION, FockBasis, devectorize, hamiltonian, vectorize
from .superops import SuperOperator, left_mult, lie_mult, right_mult
from .validation import check_liouville_vector, hermiticity_defect, hilbert_dim

DEFAULT_TOL = 1e-10
PURE_TOL = 1e-8
OVERLAP_TOL = 1e-6


def _superop(lam):
    if isinstance(lam, BuiltGenerator):
        return lam.superop
    if isinstance(lam, SuperOperator):
        return lam
    return SuperOperator(lam)


def _gen_id(lam):
    return lam.generator_id if isinstance(lam, BuiltGenerator) else None


@dataclass(frozen=True)
class NullSpace:
    """Orthonormal kernel basis (rows) plus spectral diagnostics."""

    basis: np.ndarray
    singular_values: np.ndarray
    zero_eigenvalue_count: int
    tol: float

    @property
    def dimension(self):
        return self.basis.shape[0]

    def projector_overlap(self, n):
        """Weight of the Fock projector ``|n><n|`` inside the kernel."""
        d = hilbert_dim(self.basis.shape[1])
        return float(np.sum(np.abs(self.basis[:, n * (d + 1)]) ** 2))

    def overlap(self, v):
        """Squared norm of the projection of unit vector ``v`` onto the kernel."""
        v = np.asarray(v, dtype=complex)
        v = v / np.linalg.norm(v)
        return float(np.sum(np.abs(self.basis.conj() @ v) ** 2))


def null_space(lam, tol=DEFAULT_TOL, generator_id=None):
    """Kernel of ``lam`` as an orthonormal set of Liouville vectors.

    Vectors are the right singular vectors whose singular value is at most
    ``tol`` times the spectral norm.  The count of eigenvalues with
    ``|mu| <= tol * max|mu|`` is reported alongside; it exceeds the kernel
    dimension when the zero eigenvalue is defective.
    """
    S = _superop(lam)
    generator_id = generator_id or _gen_id(lam)
    if not tol > 0:
        raise ParameterDomainError(f"tol must be positive, got {tol}")
    M = S.matrix
    try:
        _, s, Vh = np.linalg.svd(M)
        mu = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdownError(f"dense decomposition failed: {exc}", generator_id) from exc
    if s[0] == 0:
        return NullSpace(np.eye(S.dim2, dtype=complex), s, S.dim2, tol)
    keep = s <= tol * s[0]
    n_zero = int(np.sum(np.abs(mu) <= tol * np.max(np.abs(mu))))
    return NullSpace(Vh[keep].copy(), s, n_zero, tol)


def _localize(K):
    """Rebasis the row space of ``K`` so each row has a unit entry on its own pivot."""
    if K.shape[0] == 0:
        return K
    _, _, piv = scipy.linalg.qr(K, pivoting=True, mode="economic")
    pivots = piv[: K.shape[0]]
    return np.linalg.solve(K[:, pivots], K)


def _hermitian_representative(v):
    M = devectorize(v)
    Hp = 0.5 * (M + M.conj().T)
    if np.max(np.abs(Hp)) <= 1e-10 * np.max(np.abs(M)):
        Hp = -0.5j * (M - M.conj().T)
    tr = np.trace(Hp)
    if abs(tr) > 1e-8 * np.linalg.norm(Hp):
        return vectorize(Hp / tr), True
    return vectorize(Hp / np.linalg.norm(Hp)), False


@dataclass(frozen=True)
class DensityState:
    matrix: np.ndarray = field(repr=False)
    trace: complex
    trace_defect: float
    hermiticity_defect: float
    min_eigenvalue: float
    purity: float
    is_pure: bool
    normalizable: bool

    def admissible(self, tol=1e-8):
        return (self.normalizable and self.trace_defect <= tol
                and self.hermiticity_defect <= tol and self.min_eigenvalue >= -tol)


def classify_state(v, tol=PURE_TOL):
    """Trace, hermiticity, positivity and purity of the state ``devectorize(v)``.

    Purity and ``is_pure`` are evaluated after trace normalization; a
    zero-trace input is reported with ``normalizable=False`` and NaN purity.
    """
    rho = devectorize(v)
    tr = complex(np.trace(rho))
    herm = hermiticity_defect(rho)
    scale = max(float(np.max(np.abs(rho))), np.finfo(float).tiny)
    if abs(tr) <= 1e-12 * scale:
        return DensityState(rho, tr, abs(tr - 1), herm, math.nan, math.nan, False, False)
    r = rho / tr
    hp = 0.5 * (r + r.conj().T)
    min_eig = float(np.linalg.eigvalsh(hp)[0])
    purity = float(np.real(np.trace(r @ r)))
    is_pure = float(np.linalg.norm(r @ r - r)) <= tol
    return DensityState(rho, tr, abs(tr - 1), herm, min_eig, purity, is_pure, True)


def state_energy(v, H):
    """``(I|L_H|rho) = Tr(H rho)`` for the trace-normalized state."""
    rho = devectorize(v)
    tr = np.trace(rho)
    if abs(tr) <= 1e-12 * max(float(np.max(np.abs(rho))), np.finfo(float).tiny):
        raise ParameterDomainError("state has zero trace; energy is undefined")
    return float(np.real(np.trace(np.asarray(H) @ rho) / tr))


@dataclass(frozen=True)
class EigenprojectorCheck:
    ok: bool
    energy: float
    left_residual: float
    right_residual: float
    lie_residual: float


def verify_eigenprojector(v, H, tol=1e-10, hbar=1.0):
    """Check ``L_H v = E v`` and ``R_H v = E v`` with ``E = (I|L_H|v)``.

    Residuals are for ``v`` scaled to unit Hilbert-Schmidt norm.  A zero-trace
    ``v`` uses the Rayleigh quotient of ``L_H`` for ``E``.
    """
    v = check_liouville_vector(v)
    H = np.asarray(H, dtype=complex)
    u = v / np.linalg.norm(v)
    LH, RH = left_mult(H).matrix, right_mult(H).matrix
    try:
        E = state_energy(u, H)
    except ParameterDomainError:
        E = float(np.real(np.vdot(u, LH @ u)))
    left = float(np.linalg.norm(LH @ u - E * u))
    right = float(np.linalg.norm(RH @ u - E * u))
    lie = float(np.linalg.norm(lie_mult(H, hbar).matrix @ u))
    bound = tol * max(float(np.linalg.norm(H, 2)), 1.0)
    return EigenprojectorCheck(left <= bound and right <= bound, E, left, right, lie)


def fock_scan(lam, basis, guard_fraction=DEFAULT_GUARD_FRACTION):
    """``[(n, ||Lambda |n><n|)|| / ||Lambda||)]`` for every level below the guard band."""
    S = _superop(lam)
    d = basis.dim
    cols = S.matrix[:, [n * (d + 1) for n in range(basis.guard_cutoff(guard_fraction))]]
    res = np.linalg.norm(cols, axis=0)
    if S.norm > 0:
        res = res / S.norm
    return [(n, float(r)) for n, r in enumerate(res)]


def condition_sc_roots(gen, E_grid, tol=1e-9, refine=True):
    """Energies on (or bracketed by) ``E_grid`` where every ``N_k(E, E)`` vanishes.

    Grid points with ``max_k |N_k| <= tol`` are returned directly.  With a
    single real ``N`` function, sign changes between neighbouring grid points
    are refined by bisection.
    """
    grid = np.unique(np.asarray(E_grid, dtype=float))
    if not gen.n_functions:
        return []
    values = np.array([[complex(f(E)) for f in gen.n_functions] for E in grid])
    hits = np.max(np.abs(values), axis=1) <= tol
    roots = [float(E) for E in grid[hits]]
    if refine and len(gen.n_functions) == 1 and np.all(np.abs(values.imag) <= tol):
        f = gen.n_functions[0]
        vals = values[:, 0].real
        for i in range(len(grid) - 1):
            if hits[i] or hits[i + 1] or vals[i] * vals[i + 1] >= 0:
                continue
            roots.append(_bisect(f, grid[i], grid[i + 1], tol))
    return sorted(roots)


def _bisect(f, lo, hi, tol, maxiter=200):
    flo = float(np.real(f(lo)))
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = float(np.real(f(mid)))
        if abs(fm) <= tol * 1e-3 or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def level_index(basis, E, tol=1e-9):
    """Fock index ``n`` with ``E = hbar omega (n + 1/2)``, or None."""
    x = E / (basis.hbar * basis.omega) - 0.5
    n = int(round(x))
    if n >= 0 and abs(x - n) <= tol:
        return n
    return None


@dataclass
class StationaryState:
    vector: np.ndarray = field(repr=False)
    density: DensityState = field(repr=False)
    energy: float
    residual: float
    fock_index: int = None
    trace_class: bool = True


@dataclass
class StationaryReport:
    generator_id: str
    params: dict
    null_dimension: int
    zero_eigenvalue_count: int
    states: list
    fock_scan: list
    sc_roots: list
    tolerance: float
    null_basis: np.ndarray = field(repr=False, default=None)

    @property
    def pure_states(self):
        return [s for s in self.states if s.density.is_pure]

    @property
    def stationary_fock_indices(self):
        return sorted(s.fock_index for s in self.pure_states if s.fock_index is not None)

    def scan_stationary(self, tol=1e-9):
        return [n for n, r in self.fock_scan if r <= tol]

    def to_dict(self):
        return {
            "generator_id": self.generator_id,
            "params": _jsonable(self.params),
            "tolerance": self.tolerance,
            "null_dimension": self.null_dimension,
            "zero_eigenvalue_count": self.zero_eigenvalue_count,
            "pure_state_count": len(self.pure_states),
            "states": [
                {
                    "n": s.fock_index,
                    "energy": s.energy,
                    "purity": s.density.purity,
                    "is_pure": s.density.is_pure,
                    "trace_class": s.trace_class,
                    "min_eigenvalue": s.density.min_eigenvalue,
                    "residual": s.residual,
                }
                for s in self.states
            ],
            "sc_roots": self.sc_roots,
            "fock_scan": [{"n": n, "residual": r} for n, r in self.fock_scan],
        }

    def to_json(self, **kwargs):
        return json.dumps(_nan_to_none(self.to_dict()), **kwargs)

    def fock_scan_csv(self):
        lines = ["n,residual"]
        lines += [f"{n},{r!r}" for n, r in self.fock_scan]
        return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return obj.real if obj.imag == 0 else [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def _nan_to_none(obj):
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_nan_to_none(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def stationary_states(lam, basis, ns, pure_tol=PURE_TOL):
    """Representative states spanning the kernel ``ns``.

    Fock projectors lying in the kernel come first; the rest of the kernel is
    localized and rotated to hermitian, unit-trace form where possible.
    """
    S = _superop(lam)
    d = basis.dim
    H = hamiltonian(basis, "analytic")
    K = ns.basis
    picked = [n for n in range(d) if ns.projector_overlap(n) > 1 - OVERLAP_TOL]
    vectors = [(np.eye(d * d, dtype=complex)[n * (d + 1)], True) for n in picked]
    if K.shape[0] > len(picked):
        rest = K
        if picked:
            P = np.array([v for v, _ in vectors])
            rest = K - (K @ P.conj().T) @ P
            _, _, vh = np.linalg.svd(rest, full_matrices=False)
            rest = vh[: K.shape[0] - len(picked)]
        vectors += [_hermitian_representative(v) for v in _localize(rest)]
    norm = S.norm if S.norm > 0 else 1.0
    states = []
    for v, trace_class in vectors:
        dens = classify_state(v, pure_tol)
        energy = state_energy(v, H) if trace_class else math.nan
        residual = float(np.linalg.norm(S.matrix @ v) / (norm * np.linalg.norm(v)))
        n = level_index(basis, energy) if dens.is_pure else None
        if n is not None and not verify_eigenprojector(v, H, hbar=basis.hbar).ok:
            n = None
        states.append(StationaryState(v, dens, energy, residual, n, trace_class))
    return states


def analyze(gen, basis=None, tol=DEFAULT_TOL, guard_fraction=DEFAULT_GUARD_FRACTION,
            pure_tol=PURE_TOL, sc_tol=1e-9):
    """Full stationary-state report for a built generator (or bare superoperator)."""
    if basis is None:
        if not isinstance(gen, BuiltGenerator):
            basis = FockBasis(hilbert_dim(_superop(gen).dim2))
        else:
            basis = gen.basis
    ns = null_space(gen, tol)
    states = stationary_states(gen, basis, ns, pure_tol)
    scan = fock_scan(gen, basis, guard_fraction)
    roots = []
    if isinstance(gen, BuiltGenerator):
        levels = basis.level_energy(np.arange(basis.guard_cutoff(guard_fraction)))
        roots = condition_sc_roots(gen, levels, sc_tol, refine=False)
    gid = _gen_id(gen) or "superoperator"
    params = gen.params if isinstance(gen, BuiltGenerator) else {}
    return StationaryReport(gid, dict(params), ns.dimension, ns.zero_eigenvalue_count, states,
                            scan, roots, tol, ns.basis)


def consistency_table(gen, guard_fraction=DEFAULT_GUARD_FRACTION, tol=1e-9, ns=None):
    """Per guard-band level: scan residual, max ``|N_k(E_n)|`` and kernel overlap."""
    basis = gen.basis
    ns = null_space(gen) if ns is None else ns
    rows = []
    for n, r in fock_scan(gen, basis, guard_fraction):
        E = float(basis.level_energy(n))
        nmax = float(np.max(np.abs(gen.n_values(E)))) if gen.n_functions else 0.0
        rows.append({"n": n, "scan_residual": r, "n_max": nmax, "overlap": ns.projector_overlap(n)})
    return rows

