"""Generator families ``Lambda = L-_H + sum_k F_k N_k(L_H, R_H)`` and the literal models.

Every builder returns a :class:`BuiltGenerator` holding the dense superoperator,
the scalar functions ``E -> N_k(E, E)`` and the dissipative factors ``F_k``.
Superoperator functions ``N_k`` are always evaluated over the exactly diagonal
(analytic) oscillator Hamiltonian; only the ``F_k`` use truncated ``q, p``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatchError, ParameterDomainError
from .hilbert import FockBasis, canonical_operators, hamiltonian
from .superops import (
    SuperOperator,
    compose,
    jordan_mult,
    left_mult,
    lie_mult,
    right_mult,
    spectral_function,
)
from .validation import check_operator, hermiticity_defect, is_hermitian

FAMILIES = {
    "closed": (),
    "general_fn": ("n_poly",),
    "nonlinear_friction_literal": ("Omega", "beta", "gamma"),
    "nonlinear_friction_canonical": ("beta", "Delta"),
    "cosine": ("epsilon0",),
    "lindblad_poly_h": ("v",),
    "fold": ("alpha0", "alpha1", "alpha2"),
}


@dataclass(frozen=True, eq=False)
class BuiltGenerator:
    superop: SuperOperator
    hamiltonian: np.ndarray
    basis: FockBasis
    family: str = "custom"
    params: dict = field(default_factory=dict)
    n_functions: tuple = ()
    f_superops: tuple = ()

    @property
    def generator_id(self):
        args = ",".join(f"{k}={_fmt(v)}" for k, v in sorted(self.params.items()))
        return f"{self.family}({args})"

    @property
    def matrix(self):
        return self.superop.matrix

    def n_values(self, E):
        return np.array([f(E) for f in self.n_functions])


def _fmt(value):
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ";".join(_fmt(v) for v in value) + "]"
    if isinstance(value, complex):
        return repr(value.real) if value.imag == 0 else repr(value)
    return repr(value) if isinstance(value, float) else str(value)


def _analytic(basis):
    return hamiltonian(basis, "analytic")


def _mean_energy(a, b):
    return 0.5 * (a + b)


def build_closed(basis, H=None, family="closed", params=None):
    """``Lambda = L-_H``.  ``H`` defaults to the analytic oscillator."""
    H = _analytic(basis) if H is None else check_operator(H, dim=basis.dim, name="H")
    if not is_hermitian(H):
        raise ParameterDomainError(f"Hamiltonian is not hermitian (defect {hermiticity_defect(H):.3e})")
    return BuiltGenerator(lie_mult(H, basis.hbar), H, basis, family, dict(params or {}))


def build_general(basis, H=None, F_list=(), N_list=(), family="general_fn", params=None,
                  n_scalars=None):
    """``Lambda = L-_H + sum_k F_k N_k(L_H, R_H)`` with ``N_k`` given as two-argument callables.

    ``n_scalars`` optionally overrides the reported ``E -> N_k(E, E)``
    functions; by default they are ``E -> N_k(E, E)``.
    """
    F_list, N_list = list(F_list), list(N_list)
    if len(F_list) != len(N_list):
        raise DimensionMismatchError(f"{len(F_list)} dissipative factors but {len(N_list)} functions")
    closed = build_closed(basis, H)
    lam = closed.superop
    Ha = _analytic(basis)
    for F, N in zip(F_list, N_list):
        if F.dim != basis.dim:
            raise DimensionMismatchError(f"factor acts on dimension {F.dim}, basis has {basis.dim}")
        lam = lam + compose(F, spectral_function(Ha, N))
    if n_scalars is None:
        n_scalars = [(lambda E, N=N: N(E, E)) for N in N_list]
    return BuiltGenerator(lam, closed.hamiltonian, basis, family, dict(params or {}),
                          tuple(n_scalars), tuple(F_list))


def build_nonlinear_friction_literal(basis, Omega, beta, gamma):
    """Nonlinear oscillator with friction written with ordinary operator products.

    ``d rho/dt = -(i/hbar)[H~, rho] - (i beta / 2 hbar)[q^2, p^2 rho + rho p^2]``
    with ``H~ = p^2/2m + m Omega^2 q^2/2 + gamma q^4/2`` from truncated ``q, p``.
    The friction term equals ``beta * L-_{q^2} L+_{p^2}``.
    """
    q, p = canonical_operators(basis)
    q2, p2 = q @ q, p @ p
    H_nl = p2 / (2 * basis.mass) + 0.5 * basis.mass * Omega**2 * q2 + 0.5 * gamma * (q2 @ q2)
    lam = lie_mult(H_nl, basis.hbar) + beta * compose(lie_mult(q2, basis.hbar), jordan_mult(p2))
    params = {"Omega": Omega, "beta": beta, "gamma": gamma}
    return BuiltGenerator(lam, H_nl, basis, "nonlinear_friction_literal", params)


def build_nonlinear_friction_canonical(basis, beta, Delta):
    """``F = 2 m beta L-_{q^2}``, ``N = (L_H + R_H)/2 - Delta/(2 beta)``.

    Level ``n`` is stationary when ``Delta = 2 beta E_n``.  The anharmonic
    coupling is fixed at ``gamma = beta m^2 omega^2``.
    """
    if beta == 0:
        raise ParameterDomainError("beta must be nonzero for the canonical friction model")
    q, _ = canonical_operators(basis)
    shift = Delta / (2 * beta)
    F = 2 * basis.mass * beta * lie_mult(q @ q, basis.hbar)
    return build_general(
        basis, None, [F], [lambda a, b: _mean_energy(a, b) - shift],
        family="nonlinear_friction_canonical", params={"beta": beta, "Delta": Delta},
        n_scalars=[lambda E: E - shift],
    )


def build_cosine(basis, epsilon0):
    """``Lambda = L-_H + L-_q cos(pi (L_H + R_H) / (2 epsilon0))``."""
    if not epsilon0 > 0:
        raise ParameterDomainError(f"epsilon0 must be positive, got {epsilon0}")
    q, _ = canonical_operators(basis)
    k = math.pi / (2 * epsilon0)
    return build_general(
        basis, None, [lie_mult(q, basis.hbar)], [lambda a, b: np.cos(k * (a + b))],
        family="cosine", params={"epsilon0": epsilon0},
        n_scalars=[lambda E: math.cos(math.pi * E / epsilon0)],
    )


def polynomial_operator(H, coeffs):
    """``sum_n coeffs[n] H**n``."""
    out = np.zeros_like(H)
    power = np.eye(H.shape[0], dtype=complex)
    for c in coeffs:
        out = out + complex(c) * power
        power = power @ H
    return out


def _as_table(v_table):
    table = np.atleast_2d(np.asarray(v_table, dtype=complex))
    if table.ndim != 2:
        raise ParameterDomainError("v_table must be a list of coefficient rows")
    return table


def build_lindblad_poly_h(basis, v_table, H=None):
    """Lindblad generator with jump operators ``V_k = sum_n v[k][n] H**n``.

    ``Lambda = L-_H + (1/2hbar) sum_k (2 L_V R_Vd - L_V L_Vd - R_Vd R_V)``.
    For ``V`` polynomial in ``H`` this reduces to ``N_k(E, E) = 0`` on every
    eigenprojector of ``H``.
    """
    table = _as_table(v_table)
    closed = build_closed(basis, H)
    Hm = closed.hamiltonian
    lam = closed.superop
    f_superops = []
    for row in table:
        V = polynomial_operator(Hm, row)
        Vd = V.conj().T
        D = (2.0 * compose(left_mult(V), right_mult(Vd))
             - compose(left_mult(V), left_mult(Vd))
             - compose(right_mult(Vd), right_mult(V))) / (2 * basis.hbar)
        f_superops.append(D)
        lam = lam + D
    params = {"v": [list(r) for r in table]}
    n_scalars = tuple((lambda E: 0.0) for _ in table)
    return BuiltGenerator(lam, Hm, basis, "lindblad_poly_h", params, n_scalars, tuple(f_superops))


def brownian_hamiltonian(basis, lambda_coupling):
    """``H = p^2/2m + m omega^2 q^2/2 + (lambda/2)(qp + pq)`` from truncated ``q, p``."""
    q, p = canonical_operators(basis)
    H = (p @ p / (2 * basis.mass) + 0.5 * basis.mass * basis.omega**2 * (q @ q)
         + 0.5 * lambda_coupling * (q @ p + p @ q))
    return 0.5 * (H + H.conj().T)


def build_fold(basis, alpha0, alpha1, alpha2):
    """``F = -2 L-_q L+_p``, ``N = alpha0 + alpha1 L+_H + alpha2 (L+_H)^2``."""
    if alpha2 == 0:
        raise ParameterDomainError("alpha2 must be nonzero for the fold model")
    q, p = canonical_operators(basis)
    F = -2.0 * compose(lie_mult(q, basis.hbar), jordan_mult(p))

    def N(a, b):
        s = _mean_energy(a, b)
        return alpha0 + alpha1 * s + alpha2 * s * s

    return build_general(
        basis, None, [F], [N], family="fold",
        params={"alpha0": alpha0, "alpha1": alpha1, "alpha2": alpha2},
        n_scalars=[lambda E: alpha0 + alpha1 * E + alpha2 * E * E],
    )


def n_eigenvalue(gen, k, E):
    """``N_k(E, E)`` for the ``k``-th dissipative channel of ``gen``."""
    if not 0 <= k < len(gen.n_functions):
        raise IndexError(f"generator {gen.generator_id} has {len(gen.n_functions)} N-functions, "
                         f"index {k} requested")
    return gen.n_functions[k](E)


F_FACTORIES = {
    "identity": lambda basis: SuperOperator(np.eye(basis.dim2, dtype=complex)),
    "lie_q": lambda basis: lie_mult(canonical_operators(basis)[0], basis.hbar),
    "lie_q2": lambda basis: lie_mult(canonical_operators(basis)[0] @ canonical_operators(basis)[0],
                                     basis.hbar),
    "fold": lambda basis: -2.0 * compose(lie_mult(canonical_operators(basis)[0], basis.hbar),
                                         jordan_mult(canonical_operators(basis)[1])),
}


def build_general_polynomial(basis, n_poly, f="lie_q"):
    """General ``F N`` generator with ``N = sum_j c_j ((L_H + R_H)/2)^j``.

    ``f`` names one of the built-in dissipative factors in ``F_FACTORIES``.
    """
    coeffs = [float(c) for c in n_poly]
    if f not in F_FACTORIES:
        raise ParameterDomainError(f"unknown dissipative factor {f!r}; choose from {sorted(F_FACTORIES)}")
    poly = np.polynomial.Polynomial(coeffs)
    return build_general(
        basis, None, [F_FACTORIES[f](basis)], [lambda a, b: poly(_mean_energy(a, b))],
        family="general_fn", params={"n_poly": coeffs, "f": f},
        n_scalars=[lambda E: float(poly(E))],
    )


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative description of a generator: family name, basis, parameters."""

    family: str
    basis: FockBasis
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterDomainError(f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}")
        missing = [k for k in FAMILIES[self.family] if k not in self.params]
        if missing:
            raise ParameterDomainError(f"family {self.family!r} requires parameter(s): {', '.join(missing)}")
        if self.family == "fold" and self.params["alpha2"] == 0:
            raise ParameterDomainError("alpha2 must be nonzero for the fold model")
        if self.family == "nonlinear_friction_canonical" and self.params["beta"] == 0:
            raise ParameterDomainError("beta must be nonzero for the canonical friction model")

    def with_param(self, name, value):
        return GeneratorSpec(self.family, self.basis, {**self.params, name: value})

    def build(self):
        return build_from_spec(self)


def _closed_hamiltonian(basis, params):
    mode = params.get("hamiltonian", "analytic")
    if mode == "brownian":
        return brownian_hamiltonian(basis, params.get("coupling", 0.0))
    return hamiltonian(basis, mode)


def build_from_spec(spec):
    b, p = spec.basis, spec.params
    family = spec.family
    if family == "closed":
        return build_closed(b, _closed_hamiltonian(b, p), params=p)
    if family == "general_fn":
        return build_general_polynomial(b, p["n_poly"], p.get("f", "lie_q"))
    if family == "nonlinear_friction_literal":
        return build_nonlinear_friction_literal(b, p["Omega"], p["beta"], p["gamma"])
    if family == "nonlinear_friction_canonical":
        return build_nonlinear_friction_canonical(b, p["beta"], p["Delta"])
    if family == "cosine":
        return build_cosine(b, p["epsilon0"])
    if family == "lindblad_poly_h":
        H = _closed_hamiltonian(b, p) if "hamiltonian" in p else None
        return build_lindblad_poly_h(b, p["v"], H)
    return build_fold(b, p["alpha0"], p["alpha1"], p["alpha2"])


def trace_defect(S, relative=True):
    """Largest ``|(I| S |col)|`` over matrix-unit columns, i.e. failure of trace preservation."""
    S = S.superop if isinstance(S, BuiltGenerator) else S
    d = S.dim
    defect = float(np.max(np.abs(S.matrix[:: d + 1, :].sum(axis=0))))
    if relative and S.norm > 0:
        return defect / S.norm
    return defect


def _swap_permutation(d):
    idx = np.arange(d * d)
    return (idx % d) * d + idx // d


def hermiticity_preservation_defect(S):
    """Relative failure of ``S(A^dagger) = S(A)^dagger``.

    Hermiticity is preserved iff ``S`` commutes with ``vec(A) -> vec(A^dagger)``,
    i.e. ``S = P conj(S) P`` with ``P`` the index swap ``(x, x') -> (x', x)``.
    """
    S = S.superop if isinstance(S, BuiltGenerator) else S
    P = _swap_permutation(S.dim)
    M = S.matrix
    diff = float(np.max(np.abs(M - M[np.ix_(P, P)].conj())))
    size = float(np.max(np.abs(M)))
    return diff / size if size > 0 else diff


def generator_gap(gen_a, gen_b):
    """Spectral norm ``||Lambda_a - Lambda_b||`` (used for literal vs canonical friction)."""
    return float(np.linalg.norm(gen_a.matrix - gen_b.matrix, 2))
