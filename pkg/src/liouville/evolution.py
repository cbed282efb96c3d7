"""Exact propagation ``|rho_t) = exp(t Lambda) |rho_0)`` with conservation monitors."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import NumericalBreakdownError, ParameterDomainError
from .generators import BuiltGenerator
from .hilbert import devectorize
from .superops import SuperOperator
from .validation import check_liouville_vector, hermiticity_defect

COND_LIMIT = 1e8
# Nearly defective eigenvalues give eigenvectors good only to ~sqrt(eps)
# even when cond(V) is modest, so the eigen-residual is checked as well.
RESIDUAL_LIMIT = 1e-12


@dataclass(frozen=True)
class Decomposition:
    """Cached spectral data of a generator.

    ``method`` is ``"eig"`` when the eigenbasis condition number is at most
    the limit and the relative eigen-residual ``max|M V - V W| / max|M|`` is
    at most ``RESIDUAL_LIMIT``; otherwise ``"expm"`` (scaling and squaring on
    the dense matrix).
    """

    matrix: np.ndarray = field(repr=False)
    method: str
    condition: float
    residual: float = 0.0
    eigenvalues: np.ndarray = field(default=None, repr=False)
    eigenvectors: np.ndarray = field(default=None, repr=False)
    lu: tuple = field(default=None, repr=False)

    def propagate(self, rho0, t):
        rho0 = np.asarray(rho0, dtype=complex)
        if t == 0:
            return rho0.copy()
        if self.method == "eig":
            c = scipy.linalg.lu_solve(self.lu, rho0)
            growth = np.zeros_like(c)
            nz = c != 0
            # exp overflow on unused modes must not turn 0 * inf into NaN.
            with np.errstate(over="ignore", invalid="ignore"):
                growth[nz] = np.exp(t * self.eigenvalues[nz]) * c[nz]
                out = self.eigenvectors @ growth
        else:
            with np.errstate(over="ignore", invalid="ignore"):
                out = scipy.linalg.expm(t * self.matrix) @ rho0
        if not np.all(np.isfinite(out)):
            raise NumericalBreakdownError(f"state diverged at t={t:g} (generator has growing modes)")
        return out


def _matrix(lam):
    if isinstance(lam, BuiltGenerator):
        return lam.matrix
    if isinstance(lam, SuperOperator):
        return lam.matrix
    return np.asarray(lam, dtype=complex)


def decompose(lam, cond_limit=COND_LIMIT, generator_id=None):
    M = _matrix(lam)
    if generator_id is None and isinstance(lam, BuiltGenerator):
        generator_id = lam.generator_id
    try:
        w, V = np.linalg.eig(M)
        cond = float(np.linalg.cond(V))
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdownError(f"eigendecomposition failed: {exc}", generator_id) from exc
    scale = float(np.max(np.abs(M))) if M.any() else 1.0
    resid = float(np.max(np.abs(M @ V - V * w))) / scale
    if not np.isfinite(cond) or cond > cond_limit or resid > RESIDUAL_LIMIT:
        return Decomposition(M, "expm", cond, resid)
    return Decomposition(M, "eig", cond, resid, w, V, scipy.linalg.lu_factor(V))


def propagate(lam, rho0, t, decomposition=None, cond_limit=COND_LIMIT):
    """``exp(t Lambda) rho0`` via the eigenbasis, or the dense exponential if it is ill-conditioned."""
    if not np.isfinite(t):
        raise ParameterDomainError(f"time must be finite, got {t}")
    M = _matrix(lam)
    rho0 = check_liouville_vector(rho0, dim2=M.shape[0], name="rho0")
    if t == 0:
        return rho0.copy()
    dec = decomposition or decompose(lam, cond_limit)
    return dec.propagate(rho0, t)


MONITORS = ("trace_defect", "herm_defect", "purity", "min_eig", "energy")


def monitor(v, H=None):
    rho = devectorize(v)
    tr = np.trace(rho)
    hp = 0.5 * (rho + rho.conj().T)
    return {
        "trace_defect": float(abs(tr - 1)),
        "herm_defect": hermiticity_defect(rho),
        "purity": float(np.real(np.trace(rho @ rho))),
        "min_eig": float(np.linalg.eigvalsh(hp)[0]),
        "energy": float(np.real(np.trace(H @ rho))) if H is not None else float("nan"),
    }


@dataclass
class Trajectory:
    times: np.ndarray
    states: list = field(repr=False)
    monitors: dict = field(repr=False)
    method: str = "eig"

    def __post_init__(self):
        n = len(self.times)
        if len(self.states) != n or any(len(v) != n for v in self.monitors.values()):
            raise ValueError("monitor lengths must equal the number of times")

    def to_csv(self, fh=None):
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", *MONITORS])
        for i, t in enumerate(self.times):
            writer.writerow([repr(float(t))] + [repr(self.monitors[k][i]) for k in MONITORS])
        return out.getvalue() if fh is None else None

    def max_drift(self, name):
        values = np.asarray(self.monitors[name])
        return float(np.max(np.abs(values - values[0])))


def trajectory(lam, rho0, times, H=None, cond_limit=COND_LIMIT):
    """Propagate ``rho0`` to every time in ``times`` (strictly increasing)."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ParameterDomainError("times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) <= 0):
        raise ParameterDomainError("times must be strictly increasing")
    if H is None and isinstance(lam, BuiltGenerator):
        H = lam.hamiltonian
    M = _matrix(lam)
    rho0 = check_liouville_vector(rho0, dim2=M.shape[0], name="rho0")
    gid = lam.generator_id if isinstance(lam, BuiltGenerator) else None
    dec = decompose(lam, cond_limit, gid)
    try:
        states = [dec.propagate(rho0, t) for t in times]
    except NumericalBreakdownError as exc:
        if exc.generator_id is None and gid is not None:
            raise NumericalBreakdownError(str(exc), gid) from None
        raise
    mons = {k: [] for k in MONITORS}
    for v in states:
        for k, val in monitor(v, H).items():
            mons[k].append(val)
    return Trajectory(times, states, mons, dec.method)
