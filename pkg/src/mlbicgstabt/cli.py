"""Command-line harness: ``solve``, ``sweep`` and ``compare``.

Defaults reproduce the usual experimental protocol: x0 = 0, tol = 1e-7,
at most 10N iterations, kappa = 0, Q = [r0, Rademacher columns], and
b = A e when no right-hand side is supplied.

Exit codes of ``solve``: 0 converged, 2 iteration limit, 3 breakdown,
1 bad configuration. ``sweep`` and ``compare`` record per-row failures
in their tables and exit 0 unless the configuration itself is invalid.
"""

import argparse
import csv
import io as _stdio
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from . import io
from .precond import FactorizationBreakdown, parse_precond
from .shadow import ShadowSpec, ZeroInitialResidual, build_shadow
from .solvers import METHODS, ML_METHODS, Flag, SolverConfig, run_method

OUTPUT_DIR_ENV = "MLBICGSTABT_OUTPUT_DIR"

EXIT_CODES = {Flag.CONVERGED: 0, Flag.MAX_ITERATIONS: 2, Flag.BREAKDOWN: 3}
EXIT_CONFIG = 1

# key=value config entries and their parsers
CONFIG_KEYS = {
    "matrix": str, "rhs": str, "rhs_col": int, "method": str, "n": int, "tol": float,
    "max_it": int, "kappa": float, "precond": str, "seed": int, "out": str, "format": str,
    "shadow_file": str, "breakdown_eps": float, "omega_perturb": float, "sweep": str,
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentPlan:
    instance: io.ProblemInstance
    method: str
    config: SolverConfig
    precond: str = "none"
    shadow_file: Optional[str] = None
    sweep: list = field(default_factory=list)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.sweep and self.method not in ML_METHODS:
            raise ConfigError(f"an n-sweep needs an ML(n) method, not {self.method!r}")


def read_config_file(path):
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{no}: unknown or malformed entry {raw.strip()!r}")
            try:
                out[key] = CONFIG_KEYS[key](value.strip())
            except ValueError:
                raise ConfigError(f"{path}:{no}: bad value for {key}: {value.strip()!r}") from None
    return out


def parse_range(text):
    """'1:8' -> [1..8], '2,4,8' -> [2, 4, 8], '1:16:3' -> [1, 4, ...]."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            lo, hi, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            lo, hi, step = parts
        else:
            raise ConfigError(f"bad range {text!r}")
        values = list(range(lo, hi + 1, step))
    else:
        values = [int(p) for p in text.split(",") if p.strip()]
    if not values or min(values) < 1:
        raise ConfigError(f"bad n range {text!r}")
    return values


def _common_args(p, multi=False):
    act = "append" if multi else "store"
    p.add_argument("--matrix", action=act, help="Matrix Market file (.mtx or .mtx.gz)")
    p.add_argument("--rhs", help="'ones' (b = A e, the default) or a Matrix Market file")
    p.add_argument("--rhs-col", type=int, help="1-based column of a multi-column rhs file")
    p.add_argument("--method", action=act, help=f"one of {', '.join(METHODS)}")
    p.add_argument("--n", type=int, action=act, help="number of shadow vectors")
    p.add_argument("--tol", type=float, help="relative residual tolerance (1e-7)")
    p.add_argument("--max-it", type=int, help="iteration limit (10N)")
    p.add_argument("--kappa", type=float, help="omega control parameter (0)")
    p.add_argument("--precond", help="none | jacobi | ilut:<droptol>[:row|:column] (row drop rule by default)")
    p.add_argument("--seed", type=int, help="seed for the random shadow columns (0)")
    p.add_argument("--shadow-file", help="Matrix Market array file with the Q columns")
    p.add_argument("--out", help="output file (default: $%s/<auto name> if set)" % OUTPUT_DIR_ENV)
    p.add_argument("--format", choices=("csv", "json"), help="report format (csv)")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")


def build_parser():
    parser = argparse.ArgumentParser(prog="mlbicgstabt", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common_args(sub.add_parser("solve", help="run one solve and write its report"))
    sw = sub.add_parser("sweep", help="E(n) sweep over the number of shadow vectors")
    _common_args(sw)
    sw.add_argument("--sweep", help="n values, e.g. 1:8 or 2,4,8,16")
    _common_args(sub.add_parser("compare", help="table over matrices x methods x n"), multi=True)
    return parser


def _merge(args):
    conf = read_config_file(args.config) if args.config else {}
    merged = dict(conf)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _solver_config(opts, n):
    try:
        return SolverConfig(
            n=n,
            tol=opts.get("tol", 1e-7),
            max_it=opts.get("max_it"),
            kappa=opts.get("kappa", 0.0),
            seed=opts.get("seed", 0),
            breakdown_eps=opts.get("breakdown_eps", 1e-14),
            omega_perturb=opts.get("omega_perturb", 1e-14),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _single(value, name):
    if isinstance(value, list):
        if len(value) != 1:
            raise ConfigError(f"--{name} given more than once")
        return value[0]
    return value


def execute(plan, n=None):
    """Run one (plan, n) solve; returns (x, report)."""
    config = plan.config if n is None else replace(plan.config, n=n)
    inst = plan.instance
    A, b = inst.A, inst.b
    Q = None
    if plan.method in ML_METHODS:
        r0 = b.copy()  # x0 = 0
        if plan.shadow_file:
            cols = io.read_dense(plan.shadow_file)
            Q = build_shadow(r0, ShadowSpec(config.n, mode="provided", columns=cols))
        else:
            try:
                Q = build_shadow(r0, ShadowSpec(config.n, config.seed))
            except ZeroInitialResidual:
                Q = None
    M = None
    if plan.method in ("mlbicgstabt-prec", "bicgstab", "bicg"):
        M = parse_precond(plan.precond, A)
    return run_method(plan.method, A, b, None, Q, M, config)


def _output_path(opts, stem):
    if opts.get("out"):
        return Path(opts["out"])
    outdir = os.environ.get(OUTPUT_DIR_ENV)
    if outdir:
        Path(outdir).mkdir(parents=True, exist_ok=True)
        return Path(outdir) / f"{stem}.{opts.get('format', 'csv')}"
    return None


def _load(opts, matrix):
    if not matrix:
        raise ConfigError("--matrix is required")
    try:
        return io.load_problem(matrix, opts.get("rhs", "ones"), opts.get("rhs_col", 1))
    except FileNotFoundError:
        raise ConfigError(f"no such file: {matrix}") from None


def cmd_solve(opts, out=None):
    out = out or sys.stdout
    inst = _load(opts, _single(opts.get("matrix"), "matrix"))
    method = _single(opts.get("method"), "method") or "mlbicgstabt"
    n = _single(opts.get("n"), "n") or 4
    plan = ExperimentPlan(inst, method, _solver_config(opts, n), opts.get("precond", "none"),
                          opts.get("shadow_file"))
    x, rep = execute(plan)
    print(f"matrix       {inst.name} ({inst.A.shape[0]}x{inst.A.shape[1]}, nnz {inst.A.nnz})",
          file=out)
    print(f"method       {method}" + (f" n={plan.config.n}" if method in ML_METHODS else ""),
          file=out)
    print(f"flag         {rep.flag.value}" + (f" ({rep.breakdown_site})" if rep.breakdown_site
                                              else ""), file=out)
    print(f"iterations   {rep.iterations}", file=out)
    print(f"rel resid    {rep.residual_history[-1]:.4e}", file=out)
    print(f"true error   {rep.true_error:.4e}", file=out)
    print(f"resid gap    {rep.residual_gap:.4e}", file=out)
    print("counters     " + " ".join(f"{k}={v}" for k, v in rep.counters.as_dict().items()),
          file=out)
    stem = f"{inst.name}_{method}" + (f"_n{plan.config.n}" if method in ML_METHODS else "")
    path = _output_path(opts, stem)
    if path is not None:
        io.write_report(rep, opts.get("format", "csv"), path)
        print(f"report       {path}", file=out)
    return EXIT_CODES[rep.flag]


SWEEP_HEADER = ["n", "true_error", "iterations", "residual_gap", "relative_residual", "flag"]


def cmd_sweep(opts, out=None):
    out = out or sys.stdout
    inst = _load(opts, _single(opts.get("matrix"), "matrix"))
    method = _single(opts.get("method"), "method") or "mlbicgstabt"
    if not opts.get("sweep"):
        raise ConfigError("sweep needs --sweep, e.g. --sweep 1:8")
    ns = parse_range(opts["sweep"])
    plan = ExperimentPlan(inst, method, _solver_config(opts, ns[0]), opts.get("precond", "none"),
                          opts.get("shadow_file"), ns)
    rows = []
    for n in ns:
        try:
            _, rep = execute(plan, n)
            rows.append([n, repr(rep.true_error), rep.iterations, repr(rep.residual_gap),
                         repr(rep.residual_history[-1]), rep.flag.value])
        except (FactorizationBreakdown, ValueError, ArithmeticError) as exc:
            rows.append([n, "", "", "", "", f"error: {exc}"])
    _emit(SWEEP_HEADER, rows, opts, f"{inst.name}_{method}_sweep", out)
    return 0


COMPARE_HEADER = ["matrix", "method", "n", "iterations", "true_error", "matvec", "flag"]


def cmd_compare(opts, out=None):
    out = out or sys.stdout
    matrices = opts.get("matrix") or []
    if isinstance(matrices, str):
        matrices = [matrices]
    methods = opts.get("method") or ["mlbicgstabt"]
    if isinstance(methods, str):
        methods = [methods]
    ns = opts.get("n") or [4]
    if isinstance(ns, int):
        ns = [ns]
    if not matrices:
        raise ConfigError("compare needs at least one --matrix")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}")
    base = _solver_config(opts, ns[0])
    rows = []
    for matrix in matrices:
        try:
            inst = io.load_problem(matrix, opts.get("rhs", "ones"), opts.get("rhs_col", 1))
        except (OSError, ValueError) as exc:
            for m in methods:
                for n in (ns if m in ML_METHODS else [None]):
                    rows.append([Path(matrix).name, m, "" if n is None else n, "", "", "",
                                 f"missing: {exc}"])
            continue
        for m in methods:
            for n in (ns if m in ML_METHODS else [None]):
                plan = ExperimentPlan(inst, m, base, opts.get("precond", "none"),
                                      opts.get("shadow_file"))
                try:
                    _, rep = execute(plan, n)
                    rows.append([inst.name, m, "" if n is None else n, rep.iterations,
                                 repr(rep.true_error), rep.counters.matvec_A, rep.flag.value])
                except (ValueError, ArithmeticError) as exc:
                    rows.append([inst.name, m, "" if n is None else n, "", "", "",
                                 f"error: {exc}"])
    _emit(COMPARE_HEADER, rows, opts, "compare", out, pretty=True)
    return 0


def _emit(header, rows, opts, stem, out, pretty=False):
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    path = _output_path(dict(opts, format="csv"), stem)
    if path is not None:
        path.write_text(text)
    if pretty:
        widths = [max(len(str(v)) for v in col) for col in zip(header, *rows)]
        for row in [header] + rows:
            print("  ".join(str(v).ljust(wd) for v, wd in zip(row, widths)).rstrip(), file=out)
    else:
        out.write(text)
    if path is not None:
        print(f"# written to {path}", file=sys.stderr)


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "compare": cmd_compare}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        opts = _merge(args)
        return COMMANDS[args.command](opts)
    except (ConfigError, io.MatrixMarketError, FactorizationBreakdown) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
