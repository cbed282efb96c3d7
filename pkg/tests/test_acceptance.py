"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python3 -m tests.test_acceptance``.
"""

import time

import numpy as np
import pytest

from liouville import (
    GeneratorSpec,
    analyze,
    build_closed,
    build_cosine,
    build_fold,
    build_lindblad_poly_h,
    build_nonlinear_friction_canonical,
    build_nonlinear_friction_literal,
    critical_points,
    fold_analyze,
    make_basis,
    null_space,
    potential_of,
    potentiality_check,
    propagate,
    sweep,
    trajectory,
    vectorize,
)
from liouville.catastrophe import CanonicalPotential
from liouville.evolution import decompose
from liouville.generators import generator_gap, hermiticity_preservation_defect, trace_defect
from liouville.stationary import fock_scan
from liouville.superops import algebra_suite

from .conftest import random_density
from .test_catastrophe import _hand_formulas

pytestmark = pytest.mark.acceptance

RESULTS = []


def report(number, checks):
    """Record ``checks`` (name -> (ok, detail)) as one line and fail on any miss."""
    ok = all(c[0] for c in checks.values())
    detail = "; ".join(f"{k}: {d}{'' if good else ' [MISS]'}" for k, (good, d) in checks.items())
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def scan_of(gen):
    return dict(fock_scan(gen, gen.basis))


def test_criterion_1_algebra_suite():
    t0 = time.perf_counter()
    rep, control, count = algebra_suite(dims=(4, 5, 6), trials=50, hbar=1.0, tol=1e-12, seed=42)
    elapsed = time.perf_counter() - t0
    report(1, {
        "triples": (count == 150, f"{count}"),
        "max relative residual": (rep.all_passed, f"{rep.max_residual:.2e} <= 1e-12"),
        "negative control": (control > 1e-3, f"{control:.2e} > 1e-3"),
        "runtime": (elapsed < 5.0, f"{elapsed:.2f} s < 5 s"),
    })


def test_criterion_2_closed_oscillator():
    b24 = make_basis(24)
    worst = max(scan_of(build_closed(b24)).values())
    dim12 = null_space(build_closed(make_basis(12))).dimension
    report(2, {
        "max guard-band residual d=24": (worst <= 1e-12, f"{worst:.1e}"),
        "null dimension d=12": (dim12 == 12, f"{dim12}"),
    })


def test_criterion_3_cosine():
    b = make_basis(24)
    s1 = scan_of(build_cosine(b, 1.0))
    s3 = scan_of(build_cosine(b, 3.0))
    stationary = sorted(n for n, r in s3.items() if r <= 1e-10)
    predicted = sorted({2 * k * 1 + k + 1 for k in range(20)} & set(s3))
    others = min(r for n, r in s3.items() if n not in stationary)
    report(3, {
        "eps0=1 max residual": (max(s1.values()) <= 1e-10, f"{max(s1.values()):.1e}"),
        "eps0=3 stationary set": (stationary == [1, 4, 7, 10, 13] == predicted, f"{stationary}"),
        "eps0=3 min non-stationary residual": (others >= 1e-2, f"{others:.3f}"),
    })


def test_criterion_4_fold():
    b = make_basis(24)
    rep = analyze(build_fold(b, 5.25, -5.0, 1.0))
    pure = rep.pure_states
    idx = [s.fock_index for s in pure]
    energies = [s.energy for s in pure]
    energy_ok = len(energies) == 2 and np.allclose(energies, [1.5, 3.5], atol=1e-8, rtol=0)
    rep725 = analyze(build_fold(b, 7.25, -5.0, 1.0))
    spec = GeneratorSpec("fold", b, {"alpha0": 5.25, "alpha1": -5.0, "alpha2": 1.0})
    values = np.linspace(4.0, 7.5, 40)
    step = values[1] - values[0]
    sw = sweep(spec, "alpha0", values, with_null_space=False)
    trans = sw.transitions("root_count")
    V = potential_of([5.25, -5.0, 1.0])
    crit = [float(p.point[0]) for p in critical_points(lambda x: V(x[0]), [(0.0, 5.0)])]
    crit_ok = len(crit) == 2 and np.allclose(crit, energies, atol=1e-8, rtol=0)
    report(4, {
        "alpha0=5.25 pure states": (idx == [1, 3] and rep.null_dimension == 2, f"n={idx}, null dim {rep.null_dimension}"),
        "energies": (energy_ok, f"{[round(e, 12) for e in energies]}"),
        "alpha0=7.25 pure Fock states": (rep725.stationary_fock_indices == [], f"{rep725.stationary_fock_indices}"),
        "sweep transition": (bool(trans) and all(abs(t - 6.25) <= step for t in trans),
                             f"{[round(t, 4) for t in trans]} (step {step:.4f})"),
        "critical points": (crit_ok, f"{[round(c, 10) for c in crit]}"),
    })


def test_criterion_5_lindblad():
    b = make_basis(24)
    rng = np.random.default_rng(5)
    checks = {}
    for label, v in (("V=H", [0.0, 1.0]), ("V=H+0.3H^2", [0.0, 1.0, 0.3])):
        gen = build_lindblad_poly_h(b, v)
        worst = max(scan_of(gen).values())
        td = trace_defect(gen, relative=False)
        traj = trajectory(gen, vectorize(random_density(rng, 24)), [0.0, 10.0])
        tr, herm = max(traj.monitors["trace_defect"]), max(traj.monitors["herm_defect"])
        checks[f"{label} scan"] = (worst <= 1e-10, f"{worst:.1e}")
        checks[f"{label} trace functional"] = (td <= 1e-12, f"{td:.1e}")
        checks[f"{label} t=10 trace/herm"] = (tr <= 1e-9 and herm <= 1e-9, f"{tr:.1e}/{herm:.1e}")
    report(5, checks)


def test_criterion_6_canonical_friction():
    b = make_basis(24)
    beta, Delta = 0.1, 0.5
    can = build_nonlinear_friction_canonical(b, beta, Delta)
    lit = build_nonlinear_friction_literal(b, np.sqrt(b.omega**2 + Delta), beta, beta * b.mass**2 * b.omega**2)
    stationary = sorted(n for n, r in scan_of(can).items() if r <= 1e-10)
    gap = generator_gap(lit, can)
    defects = {k: (trace_defect(g), hermiticity_preservation_defect(g)) for k, g in (("literal", lit), ("canonical", can))}
    report(6, {
        "stationary set": (stationary == [2], f"{stationary}"),
        "literal-canonical gap": (gap > 0, f"{gap:.4g}"),
        **{f"{k} trace/herm": (max(v) <= 1e-11, f"{v[0]:.1e}/{v[1]:.1e}") for k, v in defects.items()},
    })


def test_criterion_7_evolution():
    rng = np.random.default_rng(7)
    b10 = make_basis(10)
    semigroup = 0.0
    for gen in (build_closed(b10), build_cosine(b10, 3.0), build_nonlinear_friction_canonical(b10, 0.1, 0.5),
                build_lindblad_poly_h(b10, [0, 1, 0.3])):
        dec = decompose(gen)
        for _ in range(3):
            v = vectorize(random_density(rng, 10))
            t1, t2 = rng.uniform(0.1, 2.0, size=2)
            a = propagate(gen, v, t1 + t2, dec)
            c = propagate(gen, propagate(gen, v, t1, dec), t2, dec)
            semigroup = max(semigroup, float(np.abs(a - c).max()))
    b = make_basis(24)
    fixed = 0.0
    for gen in (build_fold(b, 5.25, -5.0, 1.0), build_cosine(b, 3.0), build_nonlinear_friction_canonical(b, 0.1, 0.5),
                build_lindblad_poly_h(b, [0, 1, 0.3]), build_closed(b)):
        dec = decompose(gen)
        for s in analyze(gen).pure_states:
            if s.fock_index is None or s.fock_index >= b.guard_cutoff():
                continue
            for t in (1.0, 10.0, 50.0, 100.0):
                fixed = max(fixed, float(np.abs(dec.propagate(s.vector, t) - s.vector).max()))
    traj = trajectory(build_closed(b10), vectorize(random_density(rng, 10)), np.linspace(0, 100, 21))
    drift = traj.max_drift("purity")
    report(7, {
        "semigroup d=10": (semigroup <= 1e-9, f"{semigroup:.1e}"),
        "stationary fixed to t=100": (fixed <= 1e-8, f"{fixed:.1e}"),
        "closed purity drift": (drift <= 1e-9, f"{drift:.1e}"),
    })


def test_criterion_8_catastrophe():
    rng = np.random.default_rng(8)
    roundtrip = all(np.array_equal(potential_of(c).deriv().coef, c)
                    for c in ([5.25, -5.0, 1.0], [0.0, 1.0], [1.0, -3.0, 0.5, 2.0, 1 / 3]))
    sym, _ = potentiality_check([{(0, 1): 1.0}, {(1, 0): 1.0}])
    anti, _ = potentiality_check([{(0, 1): 1.0}, {(1, 0): -1.0}])
    mismatches = 0
    for family, (ncontrols, formula) in _hand_formulas().items():
        for _ in range(10):
            a = tuple(int(v) for v in rng.integers(-4, 5, size=ncontrols))
            x = rng.integers(-3, 4, size=3).astype(float)
            ess = 1 if family.startswith("A") else 2
            expected = formula(a, x) + float(np.sum(x[ess:] ** 2))
            mismatches += CanonicalPotential(family, a, variable_count=3)(x) != expected
    b = make_basis(12)
    worst = 0.0
    for _ in range(20):
        a2 = rng.uniform(0.5, 2.0) * rng.choice([-1, 1])
        r1, r2 = np.sort(rng.uniform(0.5, 9.5, size=2))
        a0, a1 = a2 * r1 * r2, -a2 * (r1 + r2)
        rep = fold_analyze(a0, a1, a2, b)
        V = potential_of([a0, a1, a2])
        pts = [float(p.point[0]) for p in critical_points(lambda x: V(x[0]), [(0, 10)], grid=400)]
        if len(pts) != len(rep.stationary_energies):
            worst = np.inf
            break
        worst = max(worst, float(np.max(np.abs(np.array(pts) - rep.stationary_energies))))
    report(8, {
        "antiderivative roundtrip exact": (roundtrip, f"{roundtrip}"),
        "potentiality symmetric/antisymmetric": (sym and not anti, f"{sym}/{anti}"),
        "canonical spot points (9 families x 10)": (mismatches == 0, f"{mismatches} mismatches"),
        "grid oracle vs fold_analyze (20 triples)": (worst <= 1e-6, f"{worst:.1e}"),
    })


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
