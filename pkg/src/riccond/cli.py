"""Command-line front end: ``riccond {solve,cond,sce,reproduce,perturb,example}``.

Problem files are JSON documents::

    {"kind": "care", "field": "real", "n": 2,
     "A": [[0, 1], [0, 0]], "G": [[0, 0], [0, 1]], "Q": [[1, 0], [0, 1]],
     "deltas": [1.0, 1.0, 1.0]}

Complex entries are written as ``[re, im]`` pairs and ``deltas`` is
optional.  Exit codes: 0 success, 2 I/O error, 3 parse error, 4 solver
failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .condnum import DeltaParameters, condition_report, default_deltas, zhou_deltas
from .exceptions import RiccondError
from .harness import (PerturbationSpec, example1_problem, example2_problem,
                      reproduce_table1, reproduce_table2, run_perturbation_experiment)
from .riccati import RiccatiProblem, solve
from .sce import SceConfig, sce

__all__ = ["main", "load_problem", "parse_problem", "dump_problem", "ProblemFileError"]

EXIT_IO, EXIT_PARSE, EXIT_SOLVER = 2, 3, 4


class ProblemFileError(ValueError):
    """Malformed problem file; ``line``/``column`` locate JSON syntax errors."""

    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


def _fmt(x):
    return format(float(x), ".17g")


def _parse_matrix(rows, name, n, complex_field):
    if not isinstance(rows, list) or len(rows) != n:
        raise ProblemFileError(f"{name} must be a list of {n} rows")
    out = np.zeros((n, n), dtype=complex if complex_field else float)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ProblemFileError(f"{name}[{i}] must be a list of {n} entries")
        for j, v in enumerate(row):
            if isinstance(v, list):
                if len(v) != 2 or not all(_is_number(t) for t in v):
                    raise ProblemFileError(f"{name}[{i}][{j}] must be a number or [re, im]")
                if not complex_field and v[1] != 0:
                    raise ProblemFileError(f"{name}[{i}][{j}] is complex in a real problem")
                out[i, j] = complex(v[0], v[1]) if complex_field else v[0]
            elif _is_number(v):
                out[i, j] = v
            else:
                raise ProblemFileError(f"{name}[{i}][{j}] is not a number")
    return out


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_problem(text):
    """Parse problem-file text into ``(RiccatiProblem, deltas or None)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise ProblemFileError("top level must be an object")
    for key in ("kind", "A", "G", "Q"):
        if key not in doc:
            raise ProblemFileError(f"missing key {key!r}")
    kind = doc["kind"]
    if kind not in ("care", "dare"):
        raise ProblemFileError("kind must be 'care' or 'dare'")
    fld = doc.get("field", "real")
    if fld not in ("real", "complex"):
        raise ProblemFileError("field must be 'real' or 'complex'")
    n = doc.get("n", len(doc["A"]) if isinstance(doc["A"], list) else None)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ProblemFileError("n must be a positive integer")
    mats = [_parse_matrix(doc[k], k, n, fld == "complex") for k in ("A", "G", "Q")]
    deltas = doc.get("deltas")
    if deltas is not None:
        if (not isinstance(deltas, list) or len(deltas) not in (3, 6)
                or not all(_is_number(d) for d in deltas)):
            raise ProblemFileError("deltas must be a list of 3 or 6 numbers")
        deltas = DeltaParameters(tuple(deltas), "explicit")
    try:
        problem = RiccatiProblem(kind, *mats, field=fld)
    except (RiccondError, ValueError) as exc:
        raise ProblemFileError(str(exc)) from exc
    return problem, deltas


def load_problem(path):
    """Read and parse a problem file; ``OSError`` propagates for I/O failures."""
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _entry_text(z, complex_field):
    if complex_field:
        return f"[{_fmt(z.real)}, {_fmt(z.imag)}]"
    return _fmt(z.real)


def dump_problem(problem, deltas=None):
    """Problem-file text with 17 significant digits (lossless for doubles)."""
    cx = not problem.is_real
    lines = ["{", f'  "kind": "{problem.kind}",', f'  "field": "{problem.field}",',
             f'  "n": {problem.n},']
    for name in ("A", "G", "Q"):
        M = getattr(problem, name)
        rows = ", ".join("[" + ", ".join(_entry_text(z, cx) for z in row) + "]" for row in M)
        lines.append(f'  "{name}": [{rows}],')
    if deltas is not None:
        vals = deltas.values if isinstance(deltas, DeltaParameters) else deltas
        lines.append('  "deltas": [' + ", ".join(_fmt(d) for d in vals) + "],")
    lines[-1] = lines[-1].rstrip(",")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- output helpers ----------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[[float(z.real), float(z.imag)] for z in row] for row in obj]
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit_json(record, out):
    out.write(json.dumps(_jsonable(record), indent=2, sort_keys=True) + "\n")


def _matrix_lines(M, width=14):
    lines = []
    for row in np.atleast_2d(M):
        if np.iscomplexobj(row):
            lines.append("  " + "  ".join(f"{z.real:+.7e}{z.imag:+.7e}j" for z in row))
        else:
            lines.append("  " + "  ".join(f"{x:>{width}.7e}" for x in row))
    return lines


def _num(x):
    return "n/a" if x is None else f"{x:.4e}"


# -- commands ----------------------------------------------------------------

def _resolve_cli_deltas(spec, problem, file_deltas):
    if spec is None:
        return file_deltas
    if spec == "default":
        return default_deltas(problem, "complex")
    if spec == "zhou":
        return zhou_deltas(problem, "real" if problem.is_real else "complex")
    try:
        vals = tuple(float(t) for t in spec.split(","))
        return DeltaParameters(vals, "explicit")
    except ValueError as exc:
        raise ProblemFileError(f"bad --deltas value {spec!r}: {exc}") from exc


def cmd_solve(args, out):
    problem, _ = load_problem(args.problem)
    sol = solve(problem)
    rec = {"kind": problem.kind, "field": problem.field, "solution": sol.solution,
           "residual": sol.residual, "stability_margin": sol.stability_margin,
           "iterations": sol.iterations}
    if args.json:
        _emit_json(rec, out)
        return 0
    out.write(f"{problem.kind.upper()} stabilizing solution ({problem.field}, n={problem.n}):\n")
    out.write("\n".join(_matrix_lines(sol.solution)) + "\n")
    out.write(f"residual (Frobenius): {sol.residual:.3e}\n")
    out.write(f"stability margin:     {sol.stability_margin:.6e}\n")
    return 0


def cmd_cond(args, out):
    problem, file_deltas = load_problem(args.problem)
    deltas = _resolve_cli_deltas(args.deltas, problem, file_deltas)
    X = solve(problem).solution
    zhou = deltas if (deltas is not None and deltas.convention == "zhou"
                      and problem.is_real) else None
    rep = condition_report(problem, X, deltas=deltas, zhou=zhou)
    rec = rep.as_dict()
    if args.json:
        _emit_json(rec, out)
        return 0
    out.write(f"{problem.kind.upper()} condition numbers ({problem.field}, n={problem.n})\n")
    if rep.degenerate:
        out.write("  degenerate: zero solution, relative numbers reported as 0\n")
    rows = [("kappa1 (structured, complex)", rep.kappa1),
            ("kappaU (structured, complex)", rep.kappaU),
            ("kappaU (structured, real)", rep.kappaU_real),
            ("kappa1U (unstructured, real)", rep.unstructured_kappa1U),
            ("m (mixed)", rep.mixed_m), ("c (componentwise)", rep.comp_c),
            ("mU (mixed bound)", rep.mixed_mU), ("cU (componentwise bound)", rep.comp_cU),
            ("cond(operator)", rep.operator_condition)]
    for label, val in rows:
        out.write(f"  {label:<30s} {_num(val)}\n")
    out.write(f"  deltas ({rep.deltas.convention}): "
              + ", ".join(f"{d:.4e}" for d in rep.deltas.values) + "\n")
    if rep.zhou is not None:
        out.write("  unstructured deltas (A, G, Q): "
                  + ", ".join(f"{d:.4e}" for d in rep.zhou.values) + "\n")
    return 0


def cmd_sce(args, out):
    problem, _ = load_problem(args.problem)
    X = solve(problem).solution
    est = sce(problem, X, SceConfig(k=args.k, seed=args.seed, structure=args.structure),
              mode=args.mode)
    rec = {"kind": est.kind, "mode": args.mode, "k": est.k, "seed": est.seed,
           "structure": est.structure, "wallis_ratio": est.wallis_ratio,
           "values": est.values, "absolute": est.absolute}
    if args.json:
        _emit_json(rec, out)
        return 0
    out.write(f"{est.kind} for the {problem.kind.upper()} solution "
              f"(k={est.k}, seed={est.seed}, structure={est.structure}, "
              f"omega_k/omega_p={est.wallis_ratio:.6f})\n")
    out.write("\n".join(_matrix_lines(est.values)) + "\n")
    return 0


def _rows_record(rows, label):
    recs = []
    for r in rows:
        recs.append({label: r.parameter, "epsilon": r.epsilon, "failed": r.failed,
                     "message": r.message,
                     "observed": r.observed, "predicted": r.predicted})
    return recs


def _write_table(rows, label, out):
    eps = rows[0].epsilon if rows else float("nan")
    out.write(f"epsilon = {eps:.1e}\n")
    head = (f"{label:>8s} | {'dX_F/X_F':>11s} {'dX_max/X_max':>12s} {'|dX/X|_max':>11s} | "
            f"{'eps*kU':>11s} {'eps*k1U':>11s} {'eps*m':>11s} {'eps*c':>11s}\n")
    out.write(head)
    out.write("-" * (len(head) - 1) + "\n")
    for r in rows:
        p = r.predicted
        if r.failed:
            obs = f"{'(perturbed problem not solvable)':>37s}"
        else:
            obs = f"{r.rel_fro:11.4e} {r.rel_max:12.4e} {r.rel_comp:11.4e}"
        out.write(f"{r.parameter:>8g} | {obs} | {_num(p['kappaU']):>11s} "
                  f"{_num(p['kappa1U']):>11s} {p['m']:11.4e} {p['c']:11.4e}\n")
    for r in rows:
        if r.failed:
            out.write(f"  {label}={r.parameter:g}: {r.message}\n")


def cmd_reproduce(args, out):
    if args.which == "example1":
        eps = 1e-8 if args.epsilon is None else args.epsilon
        rows, label = reproduce_table1(eps, args.seed), "nu"
    else:
        eps = 1e-12 if args.epsilon is None else args.epsilon
        rows, label = reproduce_table2(eps, args.seed), "m"
    if args.json:
        _emit_json({"which": args.which, "rows": _rows_record(rows, label)}, out)
        return 0
    _write_table(rows, label, out)
    return 0


def cmd_perturb(args, out):
    problem, _ = load_problem(args.problem)
    eps = 1e-8 if args.epsilon is None else args.epsilon
    row = run_perturbation_experiment(problem, PerturbationSpec(eps, args.seed), parameter=0)
    if args.json:
        _emit_json(_rows_record([row], "parameter")[0], out)
        return EXIT_SOLVER if row.failed else 0
    _write_table([row], "run", out)
    return EXIT_SOLVER if row.failed else 0


def cmd_example(args, out):
    if args.which == "example1":
        problem, _ = example1_problem(args.param if args.param is not None else 1.0)
    else:
        problem, _ = example2_problem(args.param if args.param is not None else 1)
    out.write(dump_problem(problem))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="riccond",
        description="Riccati solutions, structured condition numbers and estimates.")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_problem(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("problem", help="problem file (JSON)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    with_problem("solve", "solve the CARE/DARE").set_defaults(func=cmd_solve)
    p = with_problem("cond", "structured condition numbers")
    p.add_argument("--deltas", default=None,
                   help="'default', 'zhou' or a comma-separated list of 3 or 6 values")
    p.set_defaults(func=cmd_cond)
    p = with_problem("sce", "small-sample per-entry condition estimate")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("normwise", "componentwise"), default="normwise")
    p.add_argument("--structure", choices=("real", "complex"), default=None)
    p.set_defaults(func=cmd_sce)
    p = with_problem("perturb", "random componentwise perturbation experiment")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("reproduce", help="benchmark tables for the two example families")
    p.add_argument("which", choices=("example1", "example2"))
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("example", help="write an example problem file to stdout")
    p.add_argument("which", choices=("example1", "example2"))
    p.add_argument("--param", type=float, default=None, help="nu (example1) or m (example2)")
    p.set_defaults(func=cmd_example)
    return ap


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_IO
    except ProblemFileError as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except RiccondError as exc:
        err.write(f"solver failure: {type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
