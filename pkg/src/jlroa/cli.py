"""Command-line front end.

Subcommands: approx (one algorithm on one tensor), compare (paired final
values over random tensors), orderings (ordering sensitivity on a fixed
tensor), condcheck (rank-2 convergence-condition frequency).

Exit codes: 0 success, 1 configuration error, 2 input error,
3 numerical breakdown.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .drivers import (
    BreakdownError,
    ConfigError,
    RunConfig,
    extract_result,
    hosvd_init,
    result_to_dict,
    run_general,
    run_jacobi_g,
    run_jlroa,
    run_shopm,
    run_slroat,
)
from .experiments import (
    EQ_TOL,
    compare_protocol,
    condcheck_protocol,
    orderings_protocol,
)
from .kofidis import kofidis_tensor
from .orderings import PairOrdering
from .symtensor import StructuralError, SymTensor, frobenius_norm, load_tensor

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INPUT = 2
EXIT_BREAKDOWN = 3

BUILTIN_TENSORS = {"@kofidis": kofidis_tensor}


def _load_input(spec: str) -> SymTensor:
    if spec.startswith("@"):
        try:
            return BUILTIN_TENSORS[spec]()
        except KeyError:
            raise StructuralError(
                f"unknown built-in tensor {spec!r}; available: {sorted(BUILTIN_TENSORS)}"
            ) from None
    return load_tensor(spec)


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_approx(args) -> int:
    A = _load_input(args.input)
    n = A.dim
    if args.algo in ("cyclic", "jacobi-g", "general"):
        cfg = RunConfig(
            p=args.p,
            ordering={"cyclic": "cyclic", "general": "explicit", "jacobi-g": "jacobi-g"}[args.algo],
            epsilon=args.epsilon,
            tol_grad=args.tol,
            max_sweeps=args.max_sweeps,
            init=args.init,
            init_seed=args.seed,
        )
        cfg.validate(n)
        if args.algo == "cyclic":
            result, trace = run_jlroa(A, cfg)
        elif args.algo == "jacobi-g":
            result, trace = run_jacobi_g(A, cfg)
        else:
            if not args.ordering_file:
                raise ConfigError("--algo general requires --ordering-file")
            with open(args.ordering_file) as fh:
                ordering = PairOrdering.from_json(fh.read(), n=n, p=args.p)
            result, trace = run_general(A, ordering, cfg)
        payload = result_to_dict(result, trace)
        if args.out:
            _write_json(args.out, payload)
        if args.trace:
            trace.write_csv(args.trace)
        print(
            f"{args.algo}: objective={result.objective:.12g} "
            f"residual_sq={result.residual_sq:.12g} converged={trace.converged} "
            f"sweeps={trace.sweeps}"
        )
        return EXIT_OK

    if args.algo == "shopm":
        if args.p != 1:
            raise ConfigError("shopm supports p=1 only")
        x0 = hosvd_init(A, 1).mat[:, 0]
        x, sigma, trace = run_shopm(A, x0, max_iters=args.max_iters)
        payload = {
            "objective": sigma * sigma,
            "residual_sq": frobenius_norm(A) ** 2 - sigma * sigma,
            "sigmas": [sigma],
            "X": x.tolist(),
            "diagnostics": None,
            "converged": trace.converged,
            "sweeps": trace.iterations,
        }
        if args.out:
            _write_json(args.out, payload)
        if args.trace:
            with open(args.trace, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iter", "sigma"])
                for k, s in enumerate(trace.sigmas):
                    writer.writerow([k, repr(s)])
        print(f"shopm: sigma={sigma:.12g} converged={trace.converged}")
        return EXIT_OK

    if args.algo == "slroat":
        X0 = hosvd_init(A, args.p)
        X, sigmas, trace = run_slroat(A, X0, max_iters=args.max_iters)
        objective = float(np.sum(np.asarray(sigmas) ** 2))
        payload = {
            "objective": objective,
            "residual_sq": frobenius_norm(A) ** 2 - objective,
            "sigmas": [float(s) for s in sigmas],
            "X": X.mat.ravel(order="F").tolist(),
            "diagnostics": None,
            "converged": trace.converged,
            "sweeps": trace.iterations,
        }
        if args.out:
            _write_json(args.out, payload)
        if args.trace:
            with open(args.trace, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iter", "f"])
                for k, f in enumerate(trace.f_values):
                    writer.writerow([k, repr(f)])
        print(f"slroat: objective={objective:.12g} converged={trace.converged}")
        return EXIT_OK

    raise ConfigError(f"unknown algorithm {args.algo!r}")


def _rows_csv(path: str, rows: list) -> None:
    if not rows:
        with open(path, "w", newline="") as fh:
            fh.write("")
        return
    fields = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def _emit_report(args, report, svg: str | None, stem: str) -> None:
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    payload = report.to_dict()
    if args.format == "csv":
        rows = payload.pop("rows")
        _rows_csv(os.path.join(out_dir, f"{stem}_rows.csv"), rows)
    _write_json(os.path.join(out_dir, f"{stem}_report.json"), payload)
    if svg is not None:
        with open(os.path.join(out_dir, f"{stem}_scatter.svg"), "w") as fh:
            fh.write(svg)


def _cmd_compare(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    report, svg = compare_protocol(
        trials=args.trials,
        n=args.n,
        d=args.d,
        p=args.p,
        seed=args.seed,
        algo_a=args.algo_a,
        algo_b=args.algo_b,
        eq_tol=args.eq_tol,
        dist=args.dist,
    )
    _emit_report(args, report, svg, "compare")
    c = report.counts
    print(
        f"compare {args.algo_a} vs {args.algo_b}: greater={c['num_greater']} "
        f"smaller={c['num_smaller']} equal={c['num_equal']}"
    )
    return EXIT_OK


def _cmd_orderings(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    report, svg = orderings_protocol(
        trials=args.trials,
        n=args.n,
        d=args.d,
        p=args.p,
        seed=args.seed,
        eq_tol=args.eq_tol,
        dist=args.dist,
    )
    _emit_report(args, report, svg, "orderings")
    print(
        f"orderings: spread={report.summary['spread']:.6g} "
        f"clusters={report.summary['clusters']}"
    )
    return EXIT_OK


def _cmd_condcheck(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    report = condcheck_protocol(
        trials=args.trials,
        n=args.n,
        iters=args.iters,
        seed=args.seed,
        dist=args.dist,
    )
    _emit_report(args, report, None, "condcheck")
    print(f"condcheck: frequency={report.summary['frequency']:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jlroa",
        description="Jacobi plane-rotation low-rank orthogonal approximation of symmetric tensors",
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--out-dir", default=".", help="directory for report files")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="per-trial rows embedded in JSON or split into CSV")
    sub = parser.add_subparsers(dest="command", required=True)

    ap = sub.add_parser("approx", help="run one algorithm on one tensor")
    ap.add_argument("--input", required=True, help="tensor JSON file or @kofidis")
    ap.add_argument("--p", type=int, required=True, help="target rank")
    ap.add_argument("--algo", default="cyclic",
                    choices=("cyclic", "general", "jacobi-g", "shopm", "slroat"))
    ap.add_argument("--tol", type=float, default=1e-10,
                    help="gradient tolerance relative to max(1, ||A||)")
    ap.add_argument("--max-sweeps", type=int, default=200)
    ap.add_argument("--max-iters", type=int, default=500,
                    help="iteration cap for the shopm/slroat baselines")
    ap.add_argument("--epsilon", type=float, default=None,
                    help="jacobi-g selection threshold in (0, 2/n]")
    ap.add_argument("--init", default="identity",
                    choices=("identity", "random-orthogonal", "hosvd"))
    ap.add_argument("--ordering-file", default=None,
                    help="JSON pair list for --algo general")
    ap.add_argument("--out", default=None, help="result JSON path")
    ap.add_argument("--trace", default=None, help="trace CSV path")
    ap.set_defaults(func=_cmd_approx)

    cp = sub.add_parser("compare", help="paired final values over random tensors")
    cp.add_argument("--trials", type=int, default=100)
    cp.add_argument("--n", type=int, default=10)
    cp.add_argument("--d", type=int, default=3)
    cp.add_argument("--p", type=int, default=2)
    cp.add_argument("--algo-a", default="jlroa")
    cp.add_argument("--algo-b", default="slroat")
    cp.add_argument("--eq-tol", type=float, default=EQ_TOL)
    cp.add_argument("--dist", choices=("uniform", "normal"), default="uniform")
    cp.set_defaults(func=_cmd_compare)

    op = sub.add_parser("orderings", help="ordering sensitivity on a fixed tensor")
    op.add_argument("--trials", type=int, default=50)
    op.add_argument("--n", type=int, default=10)
    op.add_argument("--d", type=int, default=3)
    op.add_argument("--p", type=int, default=2)
    op.add_argument("--eq-tol", type=float, default=EQ_TOL)
    op.add_argument("--dist", choices=("uniform", "normal"), default="uniform")
    op.set_defaults(func=_cmd_orderings)

    cc = sub.add_parser("condcheck", help="rank-2 convergence condition frequency")
    cc.add_argument("--trials", type=int, default=100)
    cc.add_argument("--n", type=int, default=10)
    cc.add_argument("--iters", type=int, default=500)
    cc.add_argument("--dist", choices=("uniform", "normal"), default="uniform")
    cc.set_defaults(func=_cmd_condcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StructuralError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BreakdownError as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN


if __name__ == "__main__":
    sys.exit(main())
