"""Batch driver: ``liouville <command> --config run.ini [--out DIR] [--seed N]``.

The config is an INI file with sections ``[basis]``, ``[generator]``,
``[command]`` and ``[output]``.  All physical quantities are dimensionless
(``hbar = mass = omega = 1`` unless set).  Example::

    [basis]
    dim = 24

    [generator]
    family = fold
    alpha0 = 5.25
    alpha1 = -5
    alpha2 = 1

    [command]
    tol = 1e-10
"""

import argparse
import configparser
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .catastrophe import critical_points, fold_analyze, potential_of, sweep
from .evolution import trajectory
from .exceptions import ConfigError, NumericalBreakdownError, ParameterDomainError
from .generators import FAMILIES, GeneratorSpec, hermiticity_preservation_defect, trace_defect
from .hilbert import FockBasis, fock_projector, vectorize
from .stationary import analyze
from .superops import IDENTITY_NAMES, algebra_suite

log = logging.getLogger(__name__)

COMMANDS = ("algebra-check", "stationary", "evolve", "sweep", "fold", "info")

BASIS_KEYS = {"dim": int, "hbar": float, "mass": float, "omega": float, "guard_fraction": float}
BASIS_DEFAULTS = {"dim": 24, "hbar": 1.0, "mass": 1.0, "omega": 1.0, "guard_fraction": 0.25}

OPTIONAL_GENERATOR_KEYS = {
    "closed": ("hamiltonian", "coupling"),
    "general_fn": ("f",),
    "lindblad_poly_h": ("hamiltonian", "coupling"),
}
STRING_KEYS = {"family", "f", "hamiltonian"}

COMMAND_KEYS = {
    "name": str, "tol": float, "pure_tol": float, "seed": int,
    "trials": int, "dims": "intlist", "algebra_hbar": float,
    "t_max": float, "steps": int, "times": "floatlist", "initial": str,
    "axis": str, "start": float, "stop": float, "points": int, "values": "floatlist",
    "with_null_space": bool, "workers": int,
}
COMMAND_DEFAULTS = {
    "tol": 1e-10, "pure_tol": 1e-8, "seed": 42, "trials": 50, "dims": [4, 5, 6], "algebra_hbar": 1.0,
    "t_max": 10.0, "steps": 101, "initial": "random", "points": 40, "with_null_space": True,
    "workers": 1,
}
OUTPUT_KEYS = {"directory": str, "formats": "strlist"}


@dataclass
class RunConfig:
    basis: FockBasis
    guard_fraction: float
    generator: GeneratorSpec
    command: str
    options: dict = field(default_factory=dict)
    output_dir: str = "out"
    formats: tuple = ("json", "csv")

    @property
    def seed(self):
        return self.options["seed"]


def _parse_value(section, key, raw, kind):
    try:
        if kind is str:
            return raw.strip()
        if kind is bool:
            value = raw.strip().lower()
            if value in ("1", "true", "yes", "on"):
                return True
            if value in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "intlist":
            return [int(x) for x in raw.split(",") if x.strip()]
        if kind == "floatlist":
            return [float(x) for x in raw.split(",") if x.strip()]
        if kind == "strlist":
            return [x.strip() for x in raw.split(",") if x.strip()]
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {getattr(kind, '__name__', kind)}") from None


def _parse_generator_value(key, raw):
    if key in STRING_KEYS:
        return raw.strip()
    if key == "v":
        try:
            return [[complex(x.replace(" ", "")) for x in row.split(",") if x.strip()]
                    for row in raw.split(";") if row.strip()]
        except ValueError:
            raise ConfigError(f"[generator] v = {raw!r}: expected rows like '0, 1; 0, 0, 0.3'") from None
    if key == "n_poly":
        return _parse_value("generator", key, raw, "floatlist")
    return _parse_value("generator", key, raw, float)


def parse_config(text, command=None):
    """Parse and validate an INI run configuration.

    ``command`` (from the command line) overrides ``[command] name``.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    unknown_sections = set(parser.sections()) - {"basis", "generator", "command", "output"}
    if unknown_sections:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown_sections))}")

    def section(name, allowed):
        if not parser.has_section(name):
            return {}
        out = {}
        for key, raw in parser.items(name):
            if key not in allowed:
                raise ConfigError(f"[{name}] unknown key {key!r}")
            out[key] = _parse_value(name, key, raw, allowed[key])
        return out

    basis_opts = {**BASIS_DEFAULTS, **section("basis", BASIS_KEYS)}
    guard = basis_opts.pop("guard_fraction")
    try:
        basis = FockBasis(**basis_opts)
    except ParameterDomainError as exc:
        raise ConfigError(f"[basis] {exc}") from None
    if not 0 <= guard <= 0.5:
        raise ConfigError(f"[basis] guard_fraction must lie in [0, 0.5], got {guard}")

    out = section("output", OUTPUT_KEYS)
    formats = tuple(out.get("formats", ["json", "csv"]))
    bad = set(formats) - {"json", "csv"}
    if bad:
        raise ConfigError(f"[output] unknown format(s): {', '.join(sorted(bad))}")

    options = {**COMMAND_DEFAULTS, **section("command", COMMAND_KEYS)}
    name = command or options.pop("name", None) or "stationary"
    options.pop("name", None)
    if name not in COMMANDS:
        raise ConfigError(f"unknown command {name!r}; choose from {', '.join(COMMANDS)}")

    generator = None
    if parser.has_section("generator"):
        raw = dict(parser.items("generator"))
        family = raw.pop("family", None)
        if family is None:
            raise ConfigError("[generator] missing key 'family'")
        if family not in FAMILIES:
            raise ConfigError(f"[generator] unknown family {family!r}; choose from {', '.join(sorted(FAMILIES))}")
        allowed = set(FAMILIES[family]) | set(OPTIONAL_GENERATOR_KEYS.get(family, ()))
        params = {}
        for key, value in raw.items():
            if key not in allowed:
                raise ConfigError(f"[generator] unknown key {key!r} for family {family!r}")
            params[key] = _parse_generator_value(key, value)
        missing = [k for k in FAMILIES[family] if k not in params]
        if missing:
            raise ConfigError(f"[generator] family {family!r} is missing required key(s): {', '.join(missing)}")
        try:
            generator = GeneratorSpec(family, basis, params)
        except ParameterDomainError as exc:
            raise ConfigError(f"[generator] {exc}") from None
    elif name not in ("algebra-check", "info"):
        raise ConfigError(f"command {name!r} needs a [generator] section")

    if name == "fold" and (generator is None or generator.family != "fold"):
        raise ConfigError("command 'fold' needs a generator of family 'fold'")
    if name == "sweep":
        if "axis" not in options:
            raise ConfigError("[command] sweep needs key 'axis'")
        if options["axis"] not in generator.params:
            raise ConfigError(f"[command] axis {options['axis']!r} is not a parameter of {generator.family!r}")
        if "values" not in options and not ("start" in options and "stop" in options):
            raise ConfigError("[command] sweep needs 'values' or both 'start' and 'stop'")

    return RunConfig(basis, guard, generator, name, options, out.get("directory", "out"), formats)


def _initial_state(spec, basis, rng):
    d = basis.dim
    if spec == "random":
        G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = G @ G.conj().T
        return vectorize(rho / np.trace(rho))
    if spec == "mixed":
        return vectorize(np.eye(d, dtype=complex) / d)
    if spec.startswith("fock:"):
        return vectorize(fock_projector(basis, int(spec[5:])))
    if spec.startswith("superposition:"):
        idx = [int(x) for x in spec.split(":", 1)[1].split(",")]
        psi = np.zeros(d, dtype=complex)
        psi[idx] = 1.0
        psi /= np.linalg.norm(psi)
        return vectorize(np.outer(psi, psi.conj()))
    raise ConfigError(f"[command] unknown initial state {spec!r}")


def _cmd_algebra(cfg):
    o = cfg.options
    report, control, count = algebra_suite(o["dims"], o["trials"], o["algebra_hbar"], o["tol"], o["seed"])
    lines = ["identity,max_relative_residual,max_absolute_residual,passed"]
    for name in IDENTITY_NAMES:
        lines.append(f"{name},{report.residuals[name]!r},{report.absolute[name]!r},{report.passed[name]}")
    lines.append(f"negative_control,{control!r},,{control > 1e-3}")
    doc = {"triples": count, "tolerance": o["tol"], "residuals": report.residuals,
           "absolute": report.absolute, "passed": report.passed,
           "negative_control": control, "notes": report.notes}
    ok = report.all_passed and control > 1e-3
    summary = [f"algebra-check: {count} random triples, dims {o['dims']}",
               f"  max relative residual {report.max_residual:.3e} (tol {o['tol']:.1e})",
               f"  negative control residual {control:.3e}",
               "  all identities pass" if ok else "  FAILED: " + ", ".join(k for k, v in report.passed.items() if not v)]
    return {"report.json": json.dumps(doc, indent=2), "algebra.csv": "\n".join(lines) + "\n"}, summary, ok


def _cmd_stationary(cfg):
    gen = cfg.generator.build()
    rep = analyze(gen, cfg.basis, cfg.options["tol"], cfg.guard_fraction, cfg.options["pure_tol"])
    pure = rep.pure_states
    summary = [f"stationary: {rep.generator_id}",
               f"  null dimension {rep.null_dimension} (zero eigenvalues {rep.zero_eigenvalue_count})",
               f"  {len(pure)} pure state(s): energies "
               + (", ".join(f"{s.energy:.10g}" + (f" (n={s.fock_index})" if s.fock_index is not None else "")
                            for s in pure) or "none"),
               f"  max state residual {max((s.residual for s in rep.states), default=0.0):.3e}",
               f"  fock-scan stationary levels {rep.scan_stationary()}"]
    return {"report.json": rep.to_json(indent=2), "fock_scan.csv": rep.fock_scan_csv()}, summary, True


def _cmd_evolve(cfg):
    o = cfg.options
    gen = cfg.generator.build()
    rng = np.random.default_rng(o["seed"])
    rho0 = _initial_state(o["initial"], cfg.basis, rng)
    times = o.get("times") or list(np.linspace(0.0, o["t_max"], o["steps"]))
    traj = trajectory(gen, rho0, times)
    summary = [f"evolve: {gen.generator_id}, {len(times)} times to t={times[-1]:g} via {traj.method}",
               f"  max trace defect {max(traj.monitors['trace_defect']):.3e}",
               f"  max hermiticity defect {max(traj.monitors['herm_defect']):.3e}",
               f"  purity {traj.monitors['purity'][0]:.6g} -> {traj.monitors['purity'][-1]:.6g}",
               f"  min eigenvalue over run {min(traj.monitors['min_eig']):.3e}"]
    meta = {"generator_id": gen.generator_id, "method": traj.method, "initial": o["initial"]}
    return {"trajectory.csv": traj.to_csv(), "report.json": json.dumps(meta, indent=2)}, summary, True


def _cmd_sweep(cfg):
    o = cfg.options
    values = o.get("values") or list(np.linspace(o["start"], o["stop"], o["points"]))
    res = sweep(cfg.generator, o["axis"], values, tol=1e-9, guard_fraction=cfg.guard_fraction,
                with_null_space=o["with_null_space"], workers=o["workers"])
    errors = [p for p in res.points if p.error]
    summary = [f"sweep: {cfg.generator.family} over {o['axis']} ({len(values)} points)",
               f"  pure-count range {min(res.counts())}..{max(res.counts())}",
               f"  stationary-energy count transitions at {[round(x, 6) for x in res.transitions('root_count')]}",
               f"  pure-count transitions at {[round(x, 6) for x in res.transitions('pure_count')]}",
               f"  {len(errors)} point(s) failed"]
    return {"sweep.csv": res.to_csv(), "sweep.json": res.to_json(indent=2)}, summary, True


def _cmd_fold(cfg):
    p = cfg.generator.params
    rep = fold_analyze(p["alpha0"], p["alpha1"], p["alpha2"], cfg.basis)
    V = potential_of([p["alpha0"], p["alpha1"], p["alpha2"]])
    top = float(cfg.basis.level_energy(cfg.basis.dim))
    crit = critical_points(lambda x: V(x[0]), [(0.0, top)], grid=max(64, 8 * cfg.basis.dim))
    doc = {"vertex": rep.vertex, "lambda": rep.lambda_param, "stationary_energies": list(rep.stationary_energies),
           "degenerate": rep.degenerate, "resonance": rep.resonance, "resonant_levels": list(rep.resonant_levels),
           "critical_points": [{"E": float(c.point[0]), "kind": c.kind} for c in crit]}
    summary = [f"fold: vertex {rep.vertex:.10g}, lambda {rep.lambda_param:.10g}",
               f"  stationary energies {[round(e, 10) for e in rep.stationary_energies]}"
               + (" (double root)" if rep.degenerate else ""),
               f"  resonance (n, m) = {rep.resonance}",
               f"  potential critical points {[round(float(c.point[0]), 8) for c in crit]}"]
    return {"report.json": json.dumps(doc, indent=2)}, summary, True


def _cmd_info(cfg):
    b = cfg.basis
    doc = {"dim": b.dim, "hbar": b.hbar, "mass": b.mass, "omega": b.omega,
           "guard_levels": b.guard_cutoff(cfg.guard_fraction)}
    summary = [f"basis: d={b.dim}, hbar={b.hbar:g}, m={b.mass:g}, omega={b.omega:g}, "
               f"guard-band levels n < {doc['guard_levels']}"]
    if cfg.generator is not None:
        gen = cfg.generator.build()
        doc.update(generator_id=gen.generator_id, norm=gen.superop.norm,
                   trace_defect=trace_defect(gen), hermiticity_defect=hermiticity_preservation_defect(gen))
        summary.append(f"generator {gen.generator_id}: ||Lambda|| = {gen.superop.norm:.6g}, "
                       f"trace defect {doc['trace_defect']:.2e}, hermiticity defect {doc['hermiticity_defect']:.2e}")
    return {"report.json": json.dumps(doc, indent=2)}, summary, True


HANDLERS = {
    "algebra-check": _cmd_algebra, "stationary": _cmd_stationary, "evolve": _cmd_evolve,
    "sweep": _cmd_sweep, "fold": _cmd_fold, "info": _cmd_info,
}


def _write_outputs(directory, files, formats):
    os.makedirs(directory, exist_ok=True)
    chosen = {k: v for k, v in files.items() if k.rsplit(".", 1)[-1] in formats}
    staged = []
    try:
        for name, text in chosen.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=directory)
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, os.path.join(directory, name)))
    except OSError:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]


def run(config, out=None):
    """Execute the configured command; returns a process exit status."""
    out = sys.stdout if out is None else out
    params = config.generator.params if config.generator else {}
    try:
        files, summary, ok = HANDLERS[config.command](config)
    except NumericalBreakdownError as exc:
        print(f"error: numerical breakdown: {exc} (params {params})", file=sys.stderr)
        return 3
    except (ParameterDomainError, ConfigError) as exc:
        print(f"error: {exc} (params {params})", file=sys.stderr)
        return 2
    written = _write_outputs(config.output_dir, files, config.formats)
    for line in summary:
        print(line, file=out)
    for path in written:
        print(f"  wrote {path}", file=out)
    return 0 if ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(prog="liouville", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="INI run configuration")
    parser.add_argument("--out", help="output directory (overrides [output] directory)")
    parser.add_argument("--seed", type=int, help="random seed (overrides [command] seed)")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.config) as fh:
            text = fh.read()
        config = parse_config(text, args.command)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 2
    if args.out:
        config.output_dir = args.out
    if args.seed is not None:
        config.options["seed"] = args.seed
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
