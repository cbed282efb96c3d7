"""Potentials of the stationarity condition, catastrophe normal forms and parameter sweeps.

One energy variable is handled with :class:`numpy.polynomial.Polynomial`;
several variables use a dict ``{multi_index: coefficient}``.
"""

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.ndimage import minimum_filter
from scipy.optimize import brentq

from .exceptions import DimensionMismatchError, ParameterDomainError
from .stationary import analyze, condition_sc_roots, fock_scan

RESONANCE_TOL = 1e-6


def as_polynomial(N):
    """Coerce a coefficient list ``[alpha_0, ..., alpha_N]`` or Polynomial."""
    if isinstance(N, Polynomial):
        p = N
    else:
        p = Polynomial(np.asarray(N, dtype=float))
    coef = p.coef
    if coef.size < 2 or coef[-1] == 0:
        raise ParameterDomainError(f"need degree >= 1 with nonzero leading coefficient, got {list(coef)}")
    return p


def potential_of(N):
    """Antiderivative ``V`` with ``dV/dE = N`` and ``V(0) = 0``."""
    return as_polynomial(N).integ(lbnd=0)


def normal_form_shift(N):
    """Shift ``a`` removing the subleading power, and ``N(x + a)`` as a polynomial in ``x``."""
    p = as_polynomial(N)
    n = p.degree()
    if n < 2:
        raise ParameterDomainError("normal form shift needs degree >= 2")
    c = p.coef
    a = -c[n - 1] / (n * c[n])
    shifted = p(Polynomial([a, 1.0]))
    coef = shifted.coef.copy()
    coef[n - 1] = 0.0
    return float(a), Polynomial(coef)


def poly_derivative(poly, var):
    """Partial derivative of a multivariate polynomial dict with respect to ``var``."""
    out = {}
    for idx, c in poly.items():
        k = idx[var]
        if k == 0 or c == 0:
            continue
        new = list(idx)
        new[var] -= 1
        new = tuple(new)
        out[new] = out.get(new, 0.0) + c * k
    return out


def _poly_diff(p, q):
    keys = set(p) | set(q)
    return max((abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys), default=0.0)


def potentiality_check(N_table, tol=1e-12):
    """Whether the vector field ``N_k(E)`` is a gradient: ``dN_k/dE_l == dN_l/dE_k``.

    Returns ``(is_potential, residual)`` with the largest coefficient asymmetry.
    """
    N_table = list(N_table)
    s = len(N_table)
    if s < 2:
        raise ParameterDomainError("potentiality_check needs at least two variables")
    for poly in N_table:
        if any(len(idx) != s for idx in poly):
            raise DimensionMismatchError(f"multi-indices must have length {s}")
    residual = 0.0
    for k, l in itertools.combinations(range(s), 2):
        residual = max(residual, _poly_diff(poly_derivative(N_table[k], l),
                                            poly_derivative(N_table[l], k)))
    return residual <= tol, residual


def gradient_of(V, nvars):
    return [poly_derivative(V, k) for k in range(nvars)]


def eval_poly(poly, x):
    x = np.asarray(x, dtype=float)
    return sum(c * np.prod(x ** np.array(idx)) for idx, c in poly.items())


@dataclass(frozen=True)
class FoldReport:
    """Roots of ``alpha0 + alpha1 E + alpha2 E^2`` written as ``x^2 - lambda = 0``.

    ``lambda_param = (alpha1^2 - 4 alpha0 alpha2) / (4 alpha2^2)``, so real
    stationary energies exist iff ``lambda_param >= 0``.  At zero the double
    root is reported once with ``degenerate=True``.
    """

    vertex: float
    lambda_param: float
    stationary_energies: tuple
    degenerate: bool
    resonance: tuple = None
    resonant_levels: tuple = ()


def fold_analyze(alpha0, alpha1, alpha2, basis, tol=RESONANCE_TOL):
    if alpha2 == 0:
        raise ParameterDomainError("alpha2 must be nonzero")
    vertex = -alpha1 / (2 * alpha2)
    lam = (alpha1**2 - 4 * alpha0 * alpha2) / (4 * alpha2**2)
    unit = basis.hbar * basis.omega
    degenerate = abs(lam) <= tol * max(1.0, vertex**2)
    if degenerate:
        energies = (vertex,)
    elif lam > 0:
        r = math.sqrt(lam)
        energies = (vertex - r, vertex + r)
    else:
        energies = ()
    resonance, levels = None, ()
    if energies:
        m_real = 2 * math.sqrt(max(lam, 0.0)) / unit
        m = int(round(m_real))
        n_real = vertex / unit - 0.5 - m / 2
        n = int(round(n_real))
        if (m >= 0 and n >= 0 and abs(vertex - unit * (n + 0.5 + m / 2)) <= tol
                and abs(lam - unit**2 * m**2 / 4) <= tol):
            resonance = (n, m)
            levels = (n,) if m == 0 else (n, n + m)
    return FoldReport(vertex, lam, energies, degenerate, resonance, levels)


# Catastrophe normal forms.  Each entry: (number of controls for order n,
# minimum order, number of essential variables).
_FAMILY_RULES = {
    "A": (lambda n: n - 1, 2, 1),
    "D": (lambda n: n - 1, 4, 2),
    "E6": (lambda n: 5, 6, 2),
    "E7": (lambda n: 6, 7, 2),
    "E8": (lambda n: 7, 8, 2),
}


def parse_family(name):
    """``"A+3"`` -> ``("A", +1, 3)``; ``"E7"`` -> ``("E7", +1, 7)``."""
    name = name.replace("±", "").strip()
    if name in ("E7", "E8"):
        return name, 1, int(name[1])
    if name in ("E+6", "E-6"):
        return "E6", (1 if name[1] == "+" else -1), 6
    if len(name) >= 3 and name[0] in "AD" and name[1] in "+-" and name[2:].isdigit():
        return name[0], (1 if name[1] == "+" else -1), int(name[2:])
    raise ParameterDomainError(f"unknown catastrophe family {name!r}")


@dataclass(frozen=True)
class CanonicalPotential:
    """``V = V0(x) + Q(x)`` for one of the elementary catastrophes.

    ``Q`` is the sum of squares of the variables beyond the essential ones.
    """

    family: str
    controls: tuple
    variable_count: int = None

    def __post_init__(self):
        kind, _, n = parse_family(self.family)
        count_rule, min_order, essential = _FAMILY_RULES[kind]
        if n < min_order:
            raise ParameterDomainError(f"{self.family}: order must be at least {min_order}")
        expected = count_rule(n)
        controls = tuple(float(a) for a in self.controls)
        if len(controls) != expected:
            raise ParameterDomainError(f"{self.family} takes {expected} control parameters, got {len(controls)}")
        object.__setattr__(self, "controls", controls)
        nvar = essential if self.variable_count is None else int(self.variable_count)
        if nvar < essential:
            raise ParameterDomainError(f"{self.family} needs at least {essential} variables")
        object.__setattr__(self, "variable_count", nvar)

    @property
    def essential(self):
        return _FAMILY_RULES[parse_family(self.family)[0]][2]

    def __call__(self, x):
        return canonical_potential(self, x)


def canonical_potential(spec, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.variable_count,):
        raise DimensionMismatchError(f"{spec.family} expects a point of dimension {spec.variable_count}, "
                                     f"got {x.shape}")
    kind, sign, n = parse_family(spec.family)
    a = (None,) + spec.controls  # 1-based like the normal-form tables
    x1 = x[0]
    if kind == "A":
        V = sign * x1 ** (n + 1) + sum(a[j] * x1**j for j in range(1, n))
    else:
        x2 = x[1]
        if kind == "D":
            V = (x1**2 * x2 + sign * x2 ** (n - 1)
                 + sum(a[j] * x2**j for j in range(1, n - 2))
                 + sum(a[j] * x1 ** (j - (n - 3)) for j in range(n - 2, n)))
        elif kind == "E6":
            V = (x1**3 + sign * x2**4 + sum(a[j] * x2**j for j in range(1, 3))
                 + sum(a[j] * x1 * x2 ** (j - 3) for j in range(3, 6)))
        elif kind == "E7":
            V = (x1**3 + x1 * x2**3 + sum(a[j] * x2**j for j in range(1, 5))
                 + sum(a[j] * x1 * x2 ** (j - 5) for j in range(5, 7)))
        else:
            V = (x1**3 + x2**5 + sum(a[j] * x2**j for j in range(1, 4))
                 + sum(a[j] * x1 * x2 ** (j - 4) for j in range(4, 8)))
    Q = float(np.sum(x[spec.essential:] ** 2))
    return float(V + Q)


@dataclass(frozen=True)
class CriticalPoint:
    point: np.ndarray
    value: float
    gradient_norm: float
    signature: tuple  # (positive, negative, zero) Hessian eigenvalues

    @property
    def kind(self):
        pos, neg, zero = self.signature
        if zero:
            return "degenerate"
        if neg == 0:
            return "min"
        if pos == 0:
            return "max"
        return "saddle"


def _fd_gradient(f, x, h):
    # five-point stencil, exact for polynomials up to degree four
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x - 2 * e) - 8 * f(x - e) + 8 * f(x + e) - f(x + 2 * e)) / (12 * h)
    return g


def _fd_hessian(f, x, h):
    k = x.size
    Hs = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros_like(x)
        ei[i] = h
        Hs[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h**2
        for j in range(i + 1, k):
            ej = np.zeros_like(x)
            ej[j] = h
            Hs[i, j] = Hs[j, i] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
    return Hs


def critical_points(potential, box, grid=64, refine_tol=1e-10, accept_tol=1e-6, maxiter=200,
                    hess_tol=1e-4):
    """Brute-force critical points of ``potential`` inside ``box``.

    Local minima of the finite-difference gradient norm on a regular grid
    seed a damped Newton iteration on the finite-difference gradient.
    Points whose final gradient norm exceeds ``accept_tol`` are dropped.
    Hessian eigenvalues with magnitude at most ``hess_tol`` count as zero;
    Newton converges only linearly at degenerate points, so the curvature
    left at the stopping point is of order ``refine_tol ** (2/3)``.
    """
    box = [(float(lo), float(hi)) for lo, hi in box]
    dim = len(box)
    if not 1 <= dim <= 3:
        raise ParameterDomainError("critical_points supports 1 to 3 variables")
    if grid < 16:
        raise ParameterDomainError("grid must have at least 16 points per axis")
    widths = np.array([hi - lo for lo, hi in box])
    scale = float(max(1.0, np.max(widths)))
    h_grad, h_hess = 1e-5 * scale, 1e-4 * scale

    def f(x):
        return float(potential(np.asarray(x, dtype=float)))

    axes = [np.linspace(lo, hi, grid) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    values = np.array([f(p) for p in pts]).reshape(mesh[0].shape)
    spacing = [ax[1] - ax[0] for ax in axes]
    grads = np.gradient(values, *spacing) if dim > 1 else [np.gradient(values, spacing[0])]
    gnorm = np.sqrt(sum(g**2 for g in grads))
    seeds = [np.array([axes[k][i] for k, i in enumerate(idx)])
             for idx in np.argwhere(gnorm == minimum_filter(gnorm, size=3, mode="nearest"))]
    if dim == 1:
        # every sign change of V' brackets a root, however close its neighbour
        def fprime(t):
            return _fd_gradient(f, np.array([t]), h_grad)[0]

        dv = np.array([fprime(t) for t in axes[0]])
        bracketed = [brentq(fprime, axes[0][i], axes[0][i + 1], xtol=1e-15)
                     for i in np.flatnonzero(dv[:-1] * dv[1:] < 0)]
        seeds = [np.array([r]) for r in bracketed] + [
            x for x in seeds if all(abs(x[0] - r) > spacing[0] for r in bracketed)]

    found = []
    for x in seeds:
        g = _fd_gradient(f, x, h_grad)
        for _ in range(maxiter):
            gn = np.linalg.norm(g)
            if gn <= refine_tol:
                break
            Hs = _fd_hessian(f, x, h_hess)
            step = -np.linalg.lstsq(Hs, g, rcond=1e-12)[0]
            t = 1.0
            while t > 1e-6:
                x_new = x + t * step
                g_new = _fd_gradient(f, x_new, h_grad)
                if np.linalg.norm(g_new) < gn:
                    break
                t *= 0.5
            else:
                break
            moved = np.linalg.norm(x_new - x)
            x, g = x_new, g_new
            if moved <= 1e-15 * scale:
                break
        gn = float(np.linalg.norm(g))
        inside = all(lo - 1e-9 * scale <= xi <= hi + 1e-9 * scale for xi, (lo, hi) in zip(x, box))
        if gn > accept_tol or not inside:
            continue
        if any(np.linalg.norm(x - c.point) <= 1e-6 * scale for c in found):
            continue
        eig = np.linalg.eigvalsh(_fd_hessian(f, x, h_hess))
        cut = max(hess_tol, 1e-6 * float(np.max(np.abs(eig))))
        signature = (int(np.sum(eig > cut)), int(np.sum(eig < -cut)), int(np.sum(np.abs(eig) <= cut)))
        found.append(CriticalPoint(x, f(x), gn, signature))
    found.sort(key=lambda c: tuple(c.point))
    return found


@dataclass
class SweepPoint:
    value: float
    stationary_indices: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    null_dimension: int = None
    pure_count: int = 0
    root_count: int = 0
    roots: list = field(default_factory=list)
    sc_indices: list = field(default_factory=list)
    error: str = None


@dataclass
class SweepResult:
    axis_name: str
    family: str
    points: list

    @property
    def axis_values(self):
        return [p.value for p in self.points]

    def counts(self, which="pure_count"):
        return [getattr(p, which) for p in self.points]

    def transitions(self, which="root_count"):
        """Midpoints between neighbouring axis values where ``which`` changes."""
        out = []
        for a, b in zip(self.points, self.points[1:]):
            if a.error is None and b.error is None and getattr(a, which) != getattr(b, which):
                out.append(0.5 * (a.value + b.value))
        return out

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["axis_value", "pure_count", "energies", "null_dimension", "root_count"])
        for p in self.points:
            writer.writerow([repr(p.value), p.pure_count, ";".join(repr(e) for e in p.energies),
                             "" if p.null_dimension is None else p.null_dimension, p.root_count])
        return buf.getvalue()

    def to_dict(self):
        return {
            "axis_name": self.axis_name,
            "family": self.family,
            "transitions": {"root_count": self.transitions("root_count"),
                            "pure_count": self.transitions("pure_count")},
            "points": [vars(p) for p in self.points],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _sweep_point(template, axis, value, tol, guard_fraction, with_null_space, root_grid):
    point = SweepPoint(float(value))
    try:
        gen = template.with_param(axis, value).build()
        basis = gen.basis
        scan = fock_scan(gen, basis, guard_fraction)
        point.stationary_indices = [n for n, r in scan if r <= tol]
        levels = basis.level_energy(np.arange(basis.guard_cutoff(guard_fraction)))
        point.sc_indices = [n for n, E in enumerate(levels)
                            if gen.n_functions and np.max(np.abs(gen.n_values(float(E)))) <= tol]
        E_top = float(levels[-1]) if len(levels) else float(basis.level_energy(0))
        grid = np.union1d(np.linspace(0.0, E_top, root_grid), levels)
        point.roots = condition_sc_roots(gen, grid, tol)
        point.root_count = len(point.roots)
        if with_null_space:
            report = analyze(gen, basis, guard_fraction=guard_fraction)
            point.null_dimension = report.null_dimension
            pure = [s for s in report.pure_states if s.fock_index is not None]
            point.pure_count = len(report.pure_states)
            point.energies = [s.energy for s in pure]
        else:
            point.pure_count = len(point.stationary_indices)
            point.energies = [float(basis.level_energy(n)) for n in point.stationary_indices]
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        point.error = f"{type(exc).__name__}: {exc}"
    return point


def sweep(template, axis, values, tol=1e-9, guard_fraction=0.25, with_null_space=True,
          root_grid=801, workers=1):
    """Build the generator at each axis value and count its pure stationary states.

    Failures at a point are recorded in that row and the sweep continues.
    """
    if axis not in template.params:
        raise ParameterDomainError(f"family {template.family!r} has no parameter {axis!r}")
    if not isinstance(template.params[axis], (int, float)):
        raise ParameterDomainError(f"sweep axis {axis!r} must be a real scalar parameter")

    def run(v):
        return _sweep_point(template, axis, float(v), tol, guard_fraction, with_null_space, root_grid)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(run, values))
    else:
        points = [run(v) for v in values]
    return SweepResult(axis, template.family, points)
