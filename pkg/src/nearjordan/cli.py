"""Command-line front end.

Subcommands
-----------
solve-family    Newton solve for a parameter family (JSON file or fixture).
solve-matrix    Nearest matrix with a d-fold nonderogatory eigenvalue.
distance-table  Frank-matrix distances for a range of multiplicities.
onestep-field   First Newton steps over a rectangular parameter grid.

Exit codes: 0 success, 1 bad input, 2 non-convergence or numerical failure.
Reports are deterministic JSON (or CSV) with 17 significant digits; wall
clock timings are only included with ``--timings``.
"""

import argparse
import json
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from nearjordan import __version__
from nearjordan.errors import VersalError
from nearjordan.families import (
    family_example1,
    family_swallow_tail,
    family_versal_form,
    matrix_example2,
    matrix_frank,
)
from nearjordan.jsonio import dumps, family_from_dict, matrix_from_dict, result_to_dict, to_csv
from nearjordan.newton import STRATEGIES, NewtonConfig, nearest_defective_matrix, newton_iterate

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILURE = 2
THREADS_ENV = "NEARJORDAN_THREADS"

FAMILY_FIXTURES = ("example1", "swallow-tail", "versal")
MATRIX_FIXTURES = ("frank", "example2")


class InputError(Exception):
    """Bad command-line input; reported with exit code 1."""


# ---------------------------------------------------------------- parsing


def _complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError:
        raise InputError(f"not a number: {text!r}") from None


def parse_vector(text: str) -> np.ndarray:
    """Comma-separated numbers; complex entries use Python syntax (``1+2j``)."""
    parts = [t for t in text.split(",") if t.strip()]
    if not parts:
        raise InputError("empty parameter vector")
    return np.array([_complex(t) for t in parts])


def parse_cluster(text: Optional[str]):
    """``auto``, ``near:VALUE`` or comma-separated Schur-diagonal indices."""
    if text is None or text == "auto":
        return None
    if text.startswith("near:"):
        return _complex(text[5:])
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise InputError(f"cluster must be 'auto', 'near:VALUE' or indices, got {text!r}") from None


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno} "
            f"(char {exc.pos}): {exc.msg}"
        ) from None


def _family(args):
    if args.family is not None:
        data = load_json(args.family)
        try:
            return family_from_dict(data), {"family_file": args.family}
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.family}: invalid family description: {exc}") from None
    name = args.fixture
    if name == "example1":
        return family_example1(), {"fixture": name}
    if name == "swallow-tail":
        return family_swallow_tail(), {"fixture": name}
    return family_versal_form(args.versal_d), {"fixture": name, "versal_d": args.versal_d}


def _matrix(args):
    if args.matrix is not None:
        data = load_json(args.matrix)
        try:
            return matrix_from_dict(data), {"matrix_file": args.matrix}
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.matrix}: invalid matrix description: {exc}") from None
    if args.fixture == "frank":
        return matrix_frank(args.n), {"fixture": "frank", "n": args.n}
    echo = {"fixture": "example2", "epsilon": args.epsilon, "delta": args.delta}
    return matrix_example2(args.epsilon, args.delta), echo


def _config(args, **overrides) -> NewtonConfig:
    kwargs = dict(
        max_iterations=1 if getattr(args, "one_step", False) else args.max_iter,
        step_tolerance=args.tol,
        solve_strategy=args.strategy,
        real_parameters=args.real,
        target_eigenvalue=None if args.target_eigenvalue is None else _complex(args.target_eigenvalue),
        # a one-step approximation is the plain Newton step
        damping=args.damping and not getattr(args, "one_step", False),
    )
    kwargs.update(overrides)
    try:
        return NewtonConfig(**kwargs)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _check_multiplicity(d: int) -> None:
    if d < 2:
        raise InputError("multiplicity must be ≥ 2")


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _grid_map(fn, items: Sequence):
    """Apply fn to each item, possibly in parallel; results keep input order."""
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- reports


def _config_echo(config: NewtonConfig) -> dict:
    return {
        "max_iterations": config.max_iterations,
        "step_tolerance": config.step_tolerance,
        "solve_strategy": config.solve_strategy,
        "real_parameters": config.real_parameters,
        "target_eigenvalue": config.target_eigenvalue,
        "damping": config.damping,
    }


def _error_payload(exc: Exception) -> dict:
    return {"type": type(exc).__name__, "message": str(exc)}


def _report(command: str, mode: str, echo: dict) -> dict:
    return {"tool": "nearjordan", "version": __version__, "command": command, "mode": mode, "input": echo}


def _summary(result) -> dict:
    out = {
        "converged": bool(result.converged),
        "iterations": result.n_iterations,
        "distance": result.distance,
        "one_step_distance": result.one_step_distance,
        "lambda": None if result.chain is None else complex(result.chain.lam),
        "chain_residual": None if result.chain is None else result.chain.residual,
        "cond_U": None if result.chain is None else result.chain.cond,
    }
    return out


def _iteration_rows(result) -> List[dict]:
    rows = []
    for rec in result.iterations:
        rows.append(
            {
                "iteration": rec.iteration,
                "step_norm": rec.step_norm,
                "distance": rec.distance,
                "lambda_app": complex(rec.lambda_app),
                "cluster": list(rec.cluster),
                "point": np.real_if_close(rec.point, tol=0).ravel(),
            }
        )
    return rows


def _emit(args, report: dict, csv_rows: Optional[List[dict]] = None) -> None:
    if args.format == "csv":
        text = to_csv(csv_rows if csv_rows is not None else [])
    else:
        text = dumps(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _exit_code(result, one_step: bool) -> int:
    if one_step:
        return EXIT_OK if result.iterations else EXIT_FAILURE
    return EXIT_OK if result.converged else EXIT_FAILURE


# ---------------------------------------------------------------- commands


def cmd_solve_family(args) -> int:
    _check_multiplicity(args.multiplicity)
    family, echo = _family(args)
    p0 = parse_vector(args.p0)
    if p0.shape != (family.n,):
        raise InputError(f"--p0 has {p0.size} entries but the family has {family.n} parameters")
    config = _config(args)
    real = config.real_parameters if config.real_parameters is not None else family.domain == "real"
    if real:
        if np.any(p0.imag):
            raise InputError("--p0 has complex entries but the parameters are real")
        p0 = p0.real
    cluster = parse_cluster(args.cluster)
    echo.update(
        {
            "m": family.m,
            "n": family.n,
            "domain": family.domain,
            "d": args.multiplicity,
            "p0": p0,
            "cluster": args.cluster,
            "one_step": args.one_step,
            "config": _config_echo(config),
        }
    )
    report = _report("solve-family", "family", echo)
    return _solve(args, report, lambda: newton_iterate(family, p0, args.multiplicity, cluster, config))


def cmd_solve_matrix(args) -> int:
    _check_multiplicity(args.multiplicity)
    A0, echo = _matrix(args)
    if args.multiplicity > A0.shape[0]:
        raise InputError(f"multiplicity {args.multiplicity} exceeds matrix dimension {A0.shape[0]}")
    config = _config(args)
    cluster = parse_cluster(args.cluster)
    echo.update(
        {
            "m": A0.shape[0],
            "d": args.multiplicity,
            "cluster": args.cluster,
            "one_step": args.one_step,
            "config": _config_echo(config),
        }
    )
    report = _report("solve-matrix", "matrix", echo)
    return _solve(args, report, lambda: nearest_defective_matrix(A0, args.multiplicity, cluster, config))


def _solve(args, report, run) -> int:
    t0 = time.perf_counter()
    try:
        result = run()
    except VersalError as exc:
        report["status"] = "failed"
        report["error"] = _error_payload(exc)
        if args.timings:
            report["timings"] = {"total_seconds": time.perf_counter() - t0}
        _emit(args, report, [{"status": "failed", **report["error"]}])
        return EXIT_FAILURE
    except ValueError as exc:
        raise InputError(str(exc)) from None
    elapsed = time.perf_counter() - t0
    report["status"] = "converged" if result.converged else "not-converged"
    report["summary"] = _summary(result)
    if result.mode == "matrix":
        report["summary"]["delta_norm_fro"] = float(np.linalg.norm(result.p_star - result.p0))
    report["result"] = result_to_dict(result)
    if args.timings:
        report["timings"] = {"total_seconds": elapsed}
    _emit(args, report, _iteration_rows(result))
    return _exit_code(result, args.one_step)


def _table_row(args, d: int) -> dict:
    config = NewtonConfig(max_iterations=args.max_iter, step_tolerance=args.tol)
    row = {"d": d}
    t0 = time.perf_counter()
    try:
        res = nearest_defective_matrix(matrix_frank(args.n), d, None, config)
    except VersalError as exc:
        row.update({"converged": False, "error": str(exc)})
        return row
    row.update(
        {
            "one_step_distance": res.one_step_distance,
            "distance": res.distance,
            "iterations": res.n_iterations,
            "cond_U": None if res.chain is None else res.chain.cond,
            "chain_residual": None if res.chain is None else res.chain.residual,
            "lambda": None if res.chain is None else complex(res.chain.lam),
            "converged": bool(res.converged),
            "error": None if res.converged else res.message,
        }
    )
    if args.timings:
        row["seconds"] = time.perf_counter() - t0
    return row


def cmd_distance_table(args) -> int:
    if args.dmin < 2:
        raise InputError("multiplicity must be ≥ 2")
    if args.dmax < args.dmin or args.dmax > args.n:
        raise InputError(f"need {args.dmin} <= dmax <= n = {args.n}")
    ds = list(range(args.dmin, args.dmax + 1))
    rows = _grid_map(lambda d: _table_row(args, d), ds)
    echo = {"fixture": "frank", "n": args.n, "dmin": args.dmin, "dmax": args.dmax,
            "step_tolerance": args.tol, "max_iterations": args.max_iter}
    report = _report("distance-table", "matrix", echo)
    report["rows"] = rows
    if args.write:
        with open(args.write + ".json", "w", encoding="utf-8") as fh:
            fh.write(dumps(report))
        with open(args.write + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(to_csv(rows))
    _emit(args, report, rows)
    return EXIT_OK if all(r.get("converged") for r in rows) else EXIT_FAILURE


def _linspace(spec) -> np.ndarray:
    start, stop, num = spec
    num = int(num)
    if num < 1:
        raise InputError("grid size must be positive")
    return np.linspace(float(start), float(stop), num)


def _field_record(family, p0, d, cluster, config) -> dict:
    rec = {"p0": p0, "d": d}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = newton_iterate(family, p0, d, cluster, config)
    except VersalError as exc:
        rec.update({"p_one_step": None, "step_norm": None, "cluster": None,
                    "eigenvalues": None, "q": None, "error": str(exc)})
        return rec
    it = res.iterations[0]
    rec.update(
        {
            "p_one_step": it.point,
            "step_norm": it.step_norm,
            "cluster": list(it.cluster),
            "eigenvalues": it.cluster_eigenvalues,
            "q": it.q,
            "error": None,
        }
    )
    return rec


def cmd_onestep_field(args) -> int:
    ds = sorted(set(args.multiplicity or [2]))
    for d in ds:
        _check_multiplicity(d)
    family, echo = _family(args)
    if family.n != 2:
        raise InputError(f"onestep-field needs a two-parameter family, got n = {family.n}")
    config = _config(args, max_iterations=1, damping=False)
    cluster = parse_cluster(args.cluster)
    p1s, p2s = _linspace(args.p1), _linspace(args.p2)
    real = config.real_parameters if config.real_parameters is not None else family.domain == "real"
    dtype = float if real else complex
    # grid order: p1 outer, p2 inner, multiplicities innermost
    jobs = [(np.array([a, b], dtype=dtype), d) for a in p1s for b in p2s for d in ds]
    records = _grid_map(lambda job: _field_record(family, job[0], job[1], cluster, config), jobs)
    echo.update({"p1": list(args.p1), "p2": list(args.p2), "d": ds, "cluster": args.cluster,
                 "grid_size": len(p1s) * len(p2s)})
    report = _report("onestep-field", "family", echo)
    report["records"] = records
    _emit(args, report, records)
    return EXIT_OK


# ---------------------------------------------------------------- argparse


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors: exit 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_solver_options(p, default_tol=1e-12):
    p.add_argument("--cluster", default="auto",
                   help="'auto', 'near:VALUE' or comma-separated Schur-diagonal indices")
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--tol", type=float, default=default_tol,
                   help="step tolerance relative to max(1, ||x0||)")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--real", dest="real", action="store_const", const=True, default=None,
                     help="restrict perturbations to real values")
    grp.add_argument("--complex", dest="real", action="store_const", const=False,
                     help="allow complex perturbations of real input")
    p.add_argument("--target-eigenvalue", default=None,
                   help="also pin the multiple eigenvalue to this value")
    p.add_argument("--strategy", choices=STRATEGIES, default="nearest-to-reference")
    p.add_argument("--damping", action="store_true",
                   help="halve steps that increase the residual of the q equations")


def _add_output_options(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", default=None, help="write to a file instead of stdout")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings")


def _add_family_source(p, default_fixture=None):
    src = p.add_mutually_exclusive_group(required=default_fixture is None)
    src.add_argument("--family", metavar="FILE", help="affine family JSON")
    src.add_argument("--fixture", choices=FAMILY_FIXTURES, default=default_fixture)
    p.add_argument("--versal-d", type=int, default=3, help="size of the 'versal' fixture")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="nearjordan",
        description="Nearest matrices and parameters with a multiple nonderogatory eigenvalue.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-family", help="Newton solve for a matrix family")
    _add_family_source(p)
    p.add_argument("-d", "--multiplicity", type=int, required=True)
    p.add_argument("--p0", required=True, help="comma-separated start point, e.g. --p0=-0.03,8.99")
    p.add_argument("--one-step", action="store_true", help="stop after the first Newton step")
    _add_solver_options(p)
    _add_output_options(p)
    p.set_defaults(func=cmd_solve_family)

    p = sub.add_parser("solve-matrix", help="nearest matrix with a d-fold eigenvalue")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", metavar="FILE", help='matrix JSON {"m": .., "entries": ..}')
    src.add_argument("--fixture", choices=MATRIX_FIXTURES)
    p.add_argument("--n", type=int, default=12, help="Frank matrix size")
    p.add_argument("--epsilon", type=float, default=2.2e-15)
    p.add_argument("--delta", type=float, default=1.5e-9)
    p.add_argument("-d", "--multiplicity", type=int, required=True)
    p.add_argument("--one-step", action="store_true")
    _add_solver_options(p)
    _add_output_options(p)
    p.set_defaults(func=cmd_solve_matrix)

    p = sub.add_parser("distance-table", help="Frank-matrix distances for d = dmin..dmax")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--dmin", type=int, default=2)
    p.add_argument("--dmax", type=int, default=6)
    p.add_argument("--tol", type=float, default=1e-15)
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--write", metavar="PREFIX", help="also write PREFIX.json and PREFIX.csv")
    _add_output_options(p)
    p.set_defaults(func=cmd_distance_table)

    p = sub.add_parser("onestep-field", help="first Newton steps over a parameter grid")
    _add_family_source(p, default_fixture="example1")
    p.add_argument("--p1", nargs=3, type=float, metavar=("START", "STOP", "NUM"), required=True)
    p.add_argument("--p2", nargs=3, type=float, metavar=("START", "STOP", "NUM"), required=True)
    p.add_argument("-d", "--multiplicity", type=int, action="append",
                   help="multiplicity; repeat for several (default 2)")
    _add_solver_options(p)
    _add_output_options(p)
    p.set_defaults(func=cmd_onestep_field)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"nearjordan: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
