"""
Command-line front end: ``nlgrad run|validate|list-kernels``.

A run is configured by one TOML file with the tables ``[kernel]``, ``[grid]``,
``[experiment]`` and ``[output]`` plus a top-level ``seed``; the accepted keys
and their defaults are the ``*_KEYS`` dictionaries below (see also the
README). Every report embeds the resolved configuration and a version stamp.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure (a
diagnostic JSON report is still written).
"""

from __future__ import annotations

import argparse
import copy
import math
import sys
import types
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .analysis import (TestFunction, fractionalization_error, localization_rate,
                       multiplier_uniformity, poincare_scan)
from .errors import (ConfigParse, ExperimentFailure, GridMismatch, NumericalError,
                     UnresolvedHorizon, ValidationError)
from .grid import Grid, write_field_binary
from .kernels import (Family, KernelSpec, Regime, admissible_delta, check_hypotheses,
                      exponents, limit_exponent, make_kernel, scale_kernel, validate_spec,
                      DEFAULT_LIMIT_DELTAS)
from .operator import make_operator
from .profile import symbol_table
from .reports import write_csv, write_json
from .solver import (Energy, default_datum, default_omega, gamma_sweep_diverging,
                     gamma_sweep_vanishing, minimize)

__all__ = ["main", "run", "validate", "load_config", "resolve_config", "EXIT_OK",
           "EXIT_VALIDATION", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

REQUIRED = object()

KERNEL_KEYS = {"family": REQUIRED, "s": None, "kappa": 1, "s_fn": None, "cutoff": "bump",
               "dim": None}
GRID_KEYS = {"dim": 1, "N": REQUIRED, "L": REQUIRED}
OUTPUT_KEYS = {"directory": "out", "formats": ["json", "csv"]}
TEST_FUNCTION_KEYS = {"kind": "SmoothBump", "alpha": 0.5, "radius": 3.0, "center": None,
                      "concentration": 3.0}
ENERGY_KEYS = {"integrand": "PowerNorm", "p": 2.0, "omega": None, "datum": "default",
               "eps_reg": 1e-8, "M": None, "a": 0.0, "c": 1.0}
SOLVER_KEYS = {"max_iter": None, "grad_tol": None, "memory": 10}

EXPERIMENT_KEYS = {
    "kernel-info": {"tol": 1.05, "limit_deltas": list(DEFAULT_LIMIT_DELTAS)},
    "symbol": {"regime": REQUIRED, "delta": REQUIRED, "method": "auto"},
    "localize": {"delta_list": REQUIRED, "p": "inf", "test_function": TEST_FUNCTION_KEYS,
                 "method": "auto"},
    "fractionalize": {"delta_list": REQUIRED, "p": 2.0, "s_inf": None,
                      "test_function": TEST_FUNCTION_KEYS, "method": "auto"},
    "poincare": {"regime": REQUIRED, "delta_list": REQUIRED, "samples": 32, "p": 2.0,
                 "omega": None, "method": "auto"},
    "multiplier-scan": {"pairs": REQUIRED, "xi_max": 1e3, "points": 2000, "bounds": None},
    "minimize": {"regime": REQUIRED, "delta": REQUIRED, "energy": ENERGY_KEYS,
                 "solver": SOLVER_KEYS, "method": "auto"},
    "gamma-sweep": {"regime": REQUIRED, "delta_list": REQUIRED, "energy": ENERGY_KEYS,
                    "solver": SOLVER_KEYS, "s_inf": None, "method": "auto"},
}

REPORT_STEMS = {"kernel-info": "kernel", "symbol": "symbol", "localize": "rate",
                "fractionalize": "rate", "poincare": "poincare",
                "multiplier-scan": "multiplier", "minimize": "minimize", "gamma-sweep": "gamma"}

FAMILY_NOTES = [
    ("TruncatedFractional", "a", "s", "w(r) r^-(n+s-1)", "sigma = gamma = s"),
    ("LogCorrected", "b", "s, kappa = +-1", "w(r) log(1/r)^kappa r^-(n+s-1)",
     "kappa=+1: (s, (s+1)/2); kappa=-1: (s/2, s)"),
    ("VariableExponent", "c", "s_fn samples on [0, 1]", "w(r) r^-(n+s(r)-1)",
     "(min s, max s)"),
    ("Riesz", "", "s", "r^-(n+s-1), unnormalized", "sigma = gamma = s"),
]


# configuration ----------------------------------------------------------------

def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigParse(f"config file {str(path)!r} not found")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParse(f"{path}: {exc}")


def _fill(block, schema: dict, where: str) -> dict:
    if block is None:
        block = {}
    if not isinstance(block, dict):
        raise ConfigParse(f"[{where}] must be a table")
    unknown = sorted(set(block) - set(schema))
    if unknown:
        raise ConfigParse(f"unknown key {where}.{unknown[0]}")
    out = {}
    for key, default in schema.items():
        if isinstance(default, dict):
            out[key] = _fill(block.get(key), default, f"{where}.{key}")
        elif key in block:
            out[key] = copy.deepcopy(block[key])
        elif default is REQUIRED:
            raise ConfigParse(f"missing required key {where}.{key}")
        else:
            out[key] = copy.deepcopy(default)
    return out


def resolve_config(raw: dict) -> dict:
    """Check keys against the schema and fill in defaults."""
    unknown = sorted(set(raw) - {"kernel", "grid", "experiment", "output", "seed"})
    if unknown:
        raise ConfigParse(f"unknown top-level key {unknown[0]}")
    for table in ("kernel", "grid", "experiment"):
        if table not in raw:
            raise ConfigParse(f"missing required table [{table}]")
    exp = dict(raw["experiment"]) if isinstance(raw["experiment"], dict) else None
    if exp is None:
        raise ConfigParse("[experiment] must be a table")
    kind = exp.pop("type", None)
    if kind is None:
        raise ConfigParse("missing required key experiment.type")
    if kind not in EXPERIMENT_KEYS:
        raise ConfigParse(f"experiment.type must be one of {sorted(EXPERIMENT_KEYS)}, got {kind!r}")
    cfg = {
        "kernel": _fill(raw["kernel"], KERNEL_KEYS, "kernel"),
        "grid": _fill(raw["grid"], GRID_KEYS, "grid"),
        "experiment": {"type": kind, **_fill(exp, EXPERIMENT_KEYS[kind], "experiment")},
        "output": _fill(raw.get("output"), OUTPUT_KEYS, "output"),
        "seed": raw.get("seed", 42),
    }
    if cfg["kernel"]["dim"] is None:
        cfg["kernel"]["dim"] = cfg["grid"]["dim"]
    solver = cfg["experiment"].get("solver")
    if solver is not None and solver["max_iter"] is None:
        solver["max_iter"] = 5000 if kind == "gamma-sweep" else 500
    return cfg


def _number(value, key: str, allow_inf: bool = False) -> float:
    if allow_inf and isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key} must be a number, got {value!r}")
    return float(value)


def _number_list(value, key: str) -> list:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{key} must be a non-empty list of numbers")
    return [_number(v, f"{key}[{i}]") for i, v in enumerate(value)]


def _box(value, grid: Grid, key: str):
    if value is None:
        return default_omega(grid)
    if not isinstance(value, list) or len(value) != grid.dim:
        raise ValidationError(f"{key} must list one [lo, hi] pair per axis")
    return tuple(tuple(_number_list(side, key)) for side in value)


def kernel_spec(cfg: dict) -> KernelSpec:
    k = cfg["kernel"]
    s = None if k["s"] is None else _number(k["s"], "kernel.s")
    try:
        spec = KernelSpec(family=k["family"], s=s, kappa=int(k["kappa"]), s_fn=k["s_fn"],
                          cutoff=k["cutoff"], dim=int(k["dim"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"kernel block: {exc}")
    if spec.family is Family.Custom:
        raise ValidationError("kernel.family Custom needs a profile callable; use the Python API")
    if spec.family in (Family.TruncatedFractional, Family.LogCorrected, Family.Riesz) \
            and s is None:
        raise ValidationError("missing required key kernel.s for this family")
    validate_spec(spec)
    return spec


def make_grid(cfg: dict) -> Grid:
    g = cfg["grid"]
    return Grid(int(g["dim"]), int(g["N"]), _number(g["L"], "grid.L"))


def _epsilon(spec: KernelSpec) -> float:
    return math.inf if spec.family is Family.Riesz else spec.cutoff.epsilon


def _check_deltas(spec: KernelSpec, grid: Grid, deltas, regime: Regime, resolve: bool) -> None:
    stub = types.SimpleNamespace(epsilon=_epsilon(spec))
    for d in deltas:
        admissible_delta(stub, d, regime)
        if resolve and regime is Regime.Vanishing and spec.family is not Family.Riesz \
                and d < 4 * grid.h:
            raise UnresolvedHorizon(f"delta={d} is below 4h={4 * grid.h:.4g} on this grid")


def _test_function(block: dict) -> TestFunction:
    center = block["center"]
    if isinstance(center, list):
        center = tuple(_number_list(center, "experiment.test_function.center"))
    elif center is not None:
        center = _number(center, "experiment.test_function.center")
    tf = TestFunction(kind=str(block["kind"]), alpha=_number(block["alpha"], "alpha"),
                      radius=_number(block["radius"], "radius"), center=center,
                      concentration=_number(block["concentration"], "concentration"))
    if tf.kind.lower() not in ("smoothbump", "holderbump", "w1psample"):
        raise ValidationError(f"unknown experiment.test_function.kind {tf.kind!r}")
    if tf.kind.lower() == "holderbump" and not 0.0 < tf.alpha < 1.0:
        raise ValidationError("experiment.test_function.alpha must lie in (0, 1)")
    return tf


def _energy(block: dict, grid: Grid) -> Energy:
    datum = block["datum"]
    if datum not in ("default", "zero"):
        raise ValidationError(f"experiment.energy.datum must be 'default' or 'zero', got {datum!r}")
    g = default_datum(grid) if datum == "default" else None
    M = block["M"]
    if block["integrand"] == "AnisotropicQuadratic" and M is None:
        M = np.eye(grid.dim).tolist()
    a = _number(block["a"], "experiment.energy.a")
    return Energy(integrand=block["integrand"], omega=_box(block["omega"], grid, "experiment.energy.omega"),
                  p=_number(block["p"], "experiment.energy.p"), g=g,
                  eps_reg=_number(block["eps_reg"], "experiment.energy.eps_reg"),
                  M=None if M is None else np.asarray(M, dtype=float),
                  a=np.full(grid.shape, a) if a else None,
                  c=_number(block["c"], "experiment.energy.c"))


def _solver_opts(block: dict) -> dict:
    opts = {"max_iter": int(block["max_iter"]), "memory": int(block["memory"])}
    if block["grad_tol"] is not None:
        opts["grad_tol"] = _number(block["grad_tol"], "experiment.solver.grad_tol")
    if opts["max_iter"] < 1 or opts["memory"] < 1:
        raise ValidationError("experiment.solver.max_iter and memory must be >= 1")
    return opts


def _gamma_regime(value) -> Regime:
    return Regime.parse(value)


def check_config(cfg: dict) -> dict:
    """Range checks without numerical work. Returns the derived quantities."""
    spec = kernel_spec(cfg)
    grid = make_grid(cfg)
    if spec.dim != grid.dim:
        raise GridMismatch(f"kernel.dim={spec.dim} differs from grid.dim={grid.dim}")
    formats = cfg["output"]["formats"]
    if not isinstance(formats, list) or not set(formats) <= {"json", "csv", "bin"}:
        raise ValidationError("output.formats must be a subset of ['json', 'csv', 'bin']")
    if isinstance(cfg["seed"], bool) or not isinstance(cfg["seed"], int):
        raise ValidationError("seed must be an integer")
    exp = cfg["experiment"]
    kind = exp["type"]
    if "method" in exp and exp["method"] not in ("auto", "exact", "table"):
        raise ValidationError("experiment.method must be auto, exact or table")
    if kind == "kernel-info":
        _number(exp["tol"], "experiment.tol")
        deltas = _number_list(exp["limit_deltas"], "experiment.limit_deltas")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise ValidationError("experiment.limit_deltas must be strictly increasing")
    elif kind in ("symbol", "minimize"):
        _check_deltas(spec, grid, [_number(exp["delta"], "experiment.delta")],
                      Regime.parse(exp["regime"]), resolve=False)
    elif kind == "localize":
        _number(exp["p"], "experiment.p", allow_inf=True)
        _check_deltas(spec, grid, _number_list(exp["delta_list"], "experiment.delta_list"),
                      Regime.Vanishing, resolve=True)
        _test_function(exp["test_function"])
    elif kind == "fractionalize":
        _number(exp["p"], "experiment.p", allow_inf=True)
        deltas = _number_list(exp["delta_list"], "experiment.delta_list")
        _check_deltas(spec, grid, deltas, Regime.Diverging, resolve=False)
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise ValidationError("experiment.delta_list must be increasing")
        _test_function(exp["test_function"])
    elif kind == "poincare":
        _number(exp["p"], "experiment.p", allow_inf=True)
        _check_deltas(spec, grid, _number_list(exp["delta_list"], "experiment.delta_list"),
                      Regime.parse(exp["regime"]), resolve=False)
        if int(exp["samples"]) < 16:
            raise ValidationError("experiment.samples must be at least 16")
        _box(exp["omega"], grid, "experiment.omega")
    elif kind == "multiplier-scan":
        pairs = exp["pairs"]
        if not isinstance(pairs, list) or not pairs:
            raise ValidationError("experiment.pairs must be a non-empty list of [d1, d2]")
        for i, pair in enumerate(pairs):
            vals = _number_list(pair, f"experiment.pairs[{i}]")
            if len(vals) != 2 or not (0.0 < vals[0] <= 1.0 and 0.0 <= vals[1] <= 1.0):
                raise ValidationError(
                    f"experiment.pairs[{i}] must be [d1, d2] with d1 in (0, 1], d2 in [0, 1]")
        if exp["bounds"] is not None and len(_number_list(exp["bounds"], "experiment.bounds")) \
                != len(pairs):
            raise ValidationError("experiment.bounds must have one entry per pair")
        if _number(exp["xi_max"], "experiment.xi_max") <= 1e-3:
            raise ValidationError("experiment.xi_max must exceed 1e-3")
    elif kind == "gamma-sweep":
        regime = _gamma_regime(exp["regime"])
        _check_deltas(spec, grid, _number_list(exp["delta_list"], "experiment.delta_list"),
                      regime, resolve=True)
    if kind in ("minimize", "gamma-sweep"):
        _energy(exp["energy"], grid)
        _solver_opts(exp["solver"])
    sigma, gamma, s0 = exponents(spec)
    return {"sigma": sigma, "gamma": gamma, "s_inf_analytic": s0,
            "epsilon": _epsilon(spec), "h": grid.h, "experiment": kind}


# experiments --------------------------------------------------------------------

@dataclass
class Outcome:
    result: dict
    csv_rows: Optional[list] = None
    fields: dict = field(default_factory=dict)
    failure: Optional[str] = None
    warnings: list = field(default_factory=list)


def _kernel(cfg):
    return make_kernel(kernel_spec(cfg))


def _run_kernel_info(cfg, grid) -> Outcome:
    exp = cfg["experiment"]
    kernel = _kernel(cfg)
    result = {"sigma": kernel.sigma, "gamma": kernel.gamma, "epsilon": kernel.epsilon,
              "norm_const": kernel.norm_const, "family": kernel.family.value}
    rows = None
    if kernel.compact:
        result["mass"] = kernel.mass()
        result["hypotheses"] = check_hypotheses(kernel, tol=exp["tol"]).to_dict()
        deltas = exp["limit_deltas"]
        estimates, s_inf = limit_exponent(kernel, deltas)
        result["limit_exponent"] = {"delta_list": deltas, "estimates": estimates, "s_inf": s_inf}
        rows = [("delta", "s_estimate")] + list(zip(deltas, estimates))
    else:
        result["limit_exponent"] = {"s_inf": kernel.s0}
    return Outcome(result, rows, warnings=list(kernel.warnings))


def _run_symbol(cfg, grid) -> Outcome:
    exp = cfg["experiment"]
    kernel = _kernel(cfg)
    sk = scale_kernel(kernel, exp["delta"], exp["regime"])
    table = symbol_table(sk, grid, exp["method"])
    rows = table.csv_rows()
    result = {"label": table.label, "delta": table.delta, "q_scale": sk.q_scale,
              "distinct_frequencies": len(rows), "xi": [r[0] for r in rows],
              "q_hat": [r[1] for r in rows]}
    return Outcome(result, [("xi", "q_hat")] + rows, warnings=list(table.warnings))


def _p(value) -> float:
    return _number(value, "experiment.p", allow_inf=True)


def _run_localize(cfg, grid) -> Outcome:
    exp = cfg["experiment"]
    rep = localization_rate(_kernel(cfg), _test_function(exp["test_function"]),
                            exp["delta_list"], grid, _p(exp["p"]), exp["method"])
    return Outcome(rep.to_dict(), rep.csv_rows(), warnings=list(rep.warnings))


def _run_fractionalize(cfg, grid) -> Outcome:
    exp = cfg["experiment"]
    u = _test_function(exp["test_function"]).field(grid)
    rep = fractionalization_error(_kernel(cfg), u, exp["delta_list"], _p(exp["p"]),
                                  exp["s_inf"], exp["method"])
    return Outcome(rep.to_dict(), rep.csv_rows(), warnings=list(rep.warnings))


def _run_poincare(cfg, grid) -> Outcome:
    exp = cfg["experiment"]
    omega = _box(exp["omega"], grid, "experiment.omega")
    rep = poincare_scan(_kernel(cfg), exp["regime"], exp["delta_list"], grid, omega,
                        int(exp["samples"]), int(cfg["seed"]), _p(exp["p"]), exp["method"])
    return Outcome(rep.to_dict(), rep.csv_rows())


def _run_multiplier(cfg, grid) -> Outcome:
    exp = cfg["experiment"]
    pairs = [tuple(float(v) for v in pair) for pair in exp["pairs"]]
    bounds = None
    if exp["bounds"] is not None:
        bounds = {pair: float(b) for pair, b in zip(pairs, exp["bounds"])}
    rep = multiplier_uniformity(_kernel(cfg), pairs, float(exp["xi_max"]), bounds,
                                int(exp["points"]))
    failure = None if rep.passed else "a multiplier ratio exceeded its bound or was not finite"
    return Outcome(rep.to_dict(), rep.csv_rows(), failure=failure)


def _run_minimize(cfg, grid) -> Outcome:
    exp = cfg["experiment"]
    op = make_operator(scale_kernel(_kernel(cfg), exp["delta"], exp["regime"]), grid,
                       exp["method"])
    e = _energy(exp["energy"], grid)
    res = minimize(e, op, **_solver_opts(exp["solver"]))
    result = res.to_dict()
    result["energy"] = e.to_dict()
    result["offset"] = e.offset(grid)
    rows = [("iteration", "energy_decrement")] + [
        (i + 1, d) for i, d in enumerate(res.decrements)]
    failure = None if res.converged else res.message
    return Outcome(result, rows, {"u_star": res.u_star}, failure, list(op.warnings))


def _run_gamma(cfg, grid) -> Outcome:
    exp = cfg["experiment"]
    kernel = _kernel(cfg)
    e = _energy(exp["energy"], grid)
    opts = _solver_opts(exp["solver"])
    if _gamma_regime(exp["regime"]) is Regime.Vanishing:
        rep = gamma_sweep_vanishing(kernel, e, exp["delta_list"], grid, opts, exp["method"])
    else:
        rep = gamma_sweep_diverging(kernel, e, exp["delta_list"], grid, opts, exp["method"],
                                    exp["s_inf"])
    failure = "; ".join(rep.flags) if rep.flags else None
    return Outcome(rep.to_dict(), rep.csv_rows(), failure=failure)


RUNNERS: dict[str, Callable] = {
    "kernel-info": _run_kernel_info, "symbol": _run_symbol, "localize": _run_localize,
    "fractionalize": _run_fractionalize, "poincare": _run_poincare,
    "multiplier-scan": _run_multiplier, "minimize": _run_minimize, "gamma-sweep": _run_gamma,
}


# driver ---------------------------------------------------------------------------

def _version_stamp() -> dict:
    return {"package": "nlgrad", "version": __version__}


def _write_outputs(out_dir: Path, stem: str, cfg: dict, outcome: Outcome,
                   status: str) -> list:
    formats = cfg["output"]["formats"]
    written = []
    report = {"experiment": cfg["experiment"]["type"], "status": status, "config": cfg,
              "version": _version_stamp(), "result": outcome.result,
              "warnings": outcome.warnings}
    if outcome.failure:
        report["error"] = {"type": "ExperimentFailure", "message": outcome.failure}
    if "json" in formats:
        write_json(out_dir / f"{stem}.json", report)
        written.append(out_dir / f"{stem}.json")
    if "csv" in formats and outcome.csv_rows:
        write_csv(out_dir / f"{stem}.csv", outcome.csv_rows)
        written.append(out_dir / f"{stem}.csv")
    if "bin" in formats:
        for name, fld in outcome.fields.items():
            write_field_binary(out_dir / f"{name}.bin", fld)
            written.append(out_dir / f"{name}.bin")
    return written


def _write_diagnostic(out_dir: Optional[Path], stem: str, cfg, exc: Exception) -> None:
    if out_dir is None:
        return
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(out_dir / f"{stem}.json", {
            "experiment": None if cfg is None else cfg["experiment"]["type"],
            "status": "failed", "config": cfg, "version": _version_stamp(),
            "error": {"type": type(exc).__name__, "message": str(exc)}})
    except OSError:
        pass


def _output_dir(cfg: dict, override) -> Path:
    return Path(override) if override is not None else Path(cfg["output"]["directory"])


def run(config_path, output_dir=None, stream=None) -> int:
    """Execute the experiment in ``config_path`` and write its reports."""
    stream = stream or sys.stderr
    cfg = None
    out_dir = Path(output_dir) if output_dir is not None else None
    stem = "error"
    try:
        cfg = resolve_config(load_config(config_path))
        out_dir = _output_dir(cfg, output_dir)
        stem = REPORT_STEMS[cfg["experiment"]["type"]]
        check_config(cfg)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ValidationError(f"output directory {str(out_dir)!r} is not writable: {exc}")
        grid = make_grid(cfg)
        outcome = RUNNERS[cfg["experiment"]["type"]](cfg, grid)
    except ValidationError as exc:
        print(f"error: {exc}", file=stream)
        _write_diagnostic(out_dir, stem, cfg, exc)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=stream)
        _write_diagnostic(out_dir, stem, cfg, exc)
        return EXIT_NUMERICAL
    status = "ok" if outcome.failure is None else "failed"
    for path in _write_outputs(out_dir, stem, cfg, outcome, status):
        print(f"wrote {path}", file=stream)
    if outcome.failure is not None:
        print(f"numerical failure: {ExperimentFailure(outcome.failure)}", file=stream)
        return EXIT_NUMERICAL
    return EXIT_OK


def validate(config_path) -> dict:
    """Dry run: schema and range checks plus analytically known derived quantities."""
    cfg = resolve_config(load_config(config_path))
    derived = check_config(cfg)
    return {"ok": True, "config": cfg, "derived": derived, "version": _version_stamp()}


def list_kernels() -> str:
    lines = [f"{'family':<20} {'alias':<6} {'parameters':<24} {'profile':<34} (sigma, gamma)"]
    for name, alias, params, profile, exps in FAMILY_NOTES:
        lines.append(f"{name:<20} {alias:<6} {params:<24} {profile:<34} {exps}")
    lines.append("cutoff w: 'bump' exp(1 - 1/(1-r^2)) (epsilon = 0.9) or 'indicator' (epsilon = 1)")
    return "\n".join(lines)


def main(argv=None) -> int:
    from .reports import dumps

    parser = argparse.ArgumentParser(prog="nlgrad", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by a TOML config")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output", default=None, help="override output.directory")
    p_val = sub.add_parser("validate", help="check a config without computing anything")
    p_val.add_argument("config")
    sub.add_parser("list-kernels", help="describe the shipped kernel families")
    args = parser.parse_args(argv)

    if args.command == "run":
        return run(args.config, args.output)
    if args.command == "validate":
        try:
            report = validate(args.config)
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        sys.stdout.write(dumps(report))
        return EXIT_OK
    print(list_kernels())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
