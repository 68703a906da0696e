"""Command-line front door for the masked-outsourcing pipeline.

Subcommands cover the whole flow: ``gen`` builds a random feasible problem,
``keygen``/``encrypt`` mask it, ``solve`` runs the local solver, ``serve``
and ``submit`` move the solve to a TCP worker, ``decrypt``/``verify`` unmask
and check the result, and ``bench``/``distcheck`` run the measurement
harnesses. Exit codes: 0 success, 1 runtime failure, 2 verification or check
rejected, 64 usage error, 65 unparseable or inconsistent input files.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import __version__
from . import bench as bench_mod
from . import distcheck as distcheck_mod
from .client import submit
from .documents import (
    ProblemDocument,
    SolutionDocument,
    canonical_bytes,
    document_to_problem,
    parse_problem_document,
    parse_solution_document,
    problem_to_document,
)
from .errors import DomainError, OnlpError, ParseError
from .generator import GeneratorSpec, generate_feasible
from .kkt import verify_kkt
from .server import configure_logging, parse_bind, serve, solve_document
from .solver import SolverConfig
from .transform import (
    KeyParams,
    decrypt,
    encrypt,
    encrypt_point,
    key_to_bytes,
    keygen,
    read_key_file,
    write_key_file,
)

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2
EXIT_USAGE = 64
EXIT_PARSE = 65


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 64 on usage errors instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _count(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def _positive_count(text: str) -> int:
    value = _count(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _positive_real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (value > 0 and np.isfinite(value)):
        raise argparse.ArgumentTypeError("must be positive and finite")
    return value


def _real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not np.isfinite(value):
        raise argparse.ArgumentTypeError("must be finite")
    return value


def _bind_spec(text: str) -> str:
    try:
        parse_bind(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return text


def _size_list(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated sizes, got {text!r}")
    if not sizes or any(n < 1 for n in sizes):
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return sizes


def _usage_error(args: argparse.Namespace, message: str) -> int:
    print(f"onlp {args.command}: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _emit_doc(model, path: str | None) -> None:
    text = canonical_bytes(model).decode("utf-8") + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _load_problem(path: str) -> ProblemDocument:
    with open(path, "rb") as handle:
        return parse_problem_document(handle.read())


def _load_solution(path: str) -> SolutionDocument:
    with open(path, "rb") as handle:
        return parse_solution_document(handle.read())


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        eps_direction=args.eps_direction,
        eps_feas=args.eps_feas,
        max_outer=args.max_outer,
    )


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--eps-direction", type=_positive_real, default=1e-6, metavar="EPS",
        help="stop once the nonbasic direction 1-norm falls below EPS",
    )
    parser.add_argument(
        "--eps-feas", type=_positive_real, default=1e-8, metavar="EPS",
        help="feasibility target for the restoration steps",
    )
    parser.add_argument(
        "--max-outer", type=_positive_count, default=None, metavar="K",
        help="outer iteration cap (default: 10 * problem dimension)",
    )


def _format_point(x: np.ndarray, limit: int = 12) -> str:
    shown = " ".join(f"{v:.10g}" for v in x[:limit])
    if x.size > limit:
        shown += f" ... ({x.size} values)"
    return shown


def _cmd_gen(args: argparse.Namespace) -> int:
    try:
        spec = GeneratorSpec(args.n, args.m, args.l, args.seed, args.bound_half_width)
    except DomainError as exc:
        return _usage_error(args, str(exc))
    problem, x0 = generate_feasible(spec)
    _emit_doc(problem_to_document(problem, "plain", start_point=x0), args.out)
    return EXIT_OK


def _cmd_keygen(args: argparse.Namespace) -> int:
    if args.problem is not None:
        doc = _load_problem(args.problem)
        dims = (doc.dims.n, doc.dims.m, doc.dims.l)
    elif None not in (args.n, args.m, args.l):
        dims = (args.n, args.m, args.l)
    else:
        return _usage_error(args, "provide --problem or all of --n, --m, --l")
    try:
        params = KeyParams(
            mask_range=args.mask_range,
            c_eq=args.c_eq,
            c_ineq=args.c_ineq,
            seed=args.seed,
        )
    except DomainError as exc:
        return _usage_error(args, str(exc))
    key = keygen(*dims, params)
    if args.out is None:
        sys.stdout.write(key_to_bytes(key).decode("utf-8") + "\n")
    else:
        write_key_file(key, args.out)
    return EXIT_OK


def _cmd_encrypt(args: argparse.Namespace) -> int:
    doc = _load_problem(args.problem)
    if doc.kind != "plain":
        raise DomainError("expected a plain problem document, got an encrypted one")
    problem, start = document_to_problem(doc)
    key = read_key_file(args.key)
    masked = encrypt(problem, key)
    z0 = encrypt_point(start, key) if start is not None else None
    _emit_doc(problem_to_document(masked, "encrypted", start_point=z0), args.out)
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    doc = _load_problem(args.problem)
    try:
        config = _solver_config(args)
    except DomainError as exc:
        return _usage_error(args, str(exc))
    solution = solve_document(doc, config)
    _emit_doc(solution, args.out)
    if solution.status != "solved":
        print(f"solve failed: {solution.termination}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def _cmd_decrypt(args: argparse.Namespace) -> int:
    solution = _load_solution(args.solution)
    key = read_key_file(args.key)
    if solution.z_star is None:
        raise DomainError("solution document carries no point to decrypt")
    z_star = np.asarray(solution.z_star, dtype=float)
    x_star = decrypt(z_star, key)
    out = solution.model_copy(update={"z_star": [float(v) for v in x_star]})
    _emit_doc(out, args.out)
    print("x*: " + _format_point(x_star))
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    problem, _start = document_to_problem(_load_problem(args.problem))
    solution = _load_solution(args.solution)
    if solution.z_star is None:
        raise DomainError("solution document carries no point to verify")
    x_star = np.asarray(solution.z_star, dtype=float)
    if x_star.ndim != 1 or x_star.size != problem.n:
        raise DomainError(
            f"point has {x_star.size} entries, problem has {problem.n} variables"
        )
    report = verify_kkt(problem, x_star, tol=args.tol)
    print(f"feasibility residual:      {report.feasibility_residual:.6e}")
    print(f"stationarity residual:     {report.stationarity_residual:.6e}")
    print(f"complementarity residual:  {report.complementarity_residual:.6e}")
    print(f"min inequality multiplier: {report.min_ineq_multiplier:.6e}")
    print("accepted" if report.accepted else "rejected")
    return EXIT_OK if report.accepted else EXIT_REJECTED


def _cmd_serve(args: argparse.Namespace) -> int:
    configure_logging()
    try:
        config = _solver_config(args)
    except DomainError as exc:
        return _usage_error(args, str(exc))
    serve(args.bind, config)
    return EXIT_OK


def _cmd_serve_http(args: argparse.Namespace) -> int:
    configure_logging()
    try:
        config = _solver_config(args)
    except DomainError as exc:
        return _usage_error(args, str(exc))
    host, port = parse_bind(args.bind)
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(config), host=host, port=port, log_level="info")
    return EXIT_OK


def _cmd_submit(args: argparse.Namespace) -> int:
    doc = _load_problem(args.problem)
    address = parse_bind(args.server)
    reply, round_trip = submit(address, doc, timeout=args.timeout)
    _emit_doc(reply, args.out)
    print(
        f"status: {reply.status}  round-trip: {round_trip * 1000.0:.1f} ms",
        file=sys.stderr,
    )
    return EXIT_OK if reply.status == "solved" else EXIT_ERROR


def _print_record(record: bench_mod.BenchRecord) -> None:
    line = (
        f"n={record.n:5d} m={record.m:4d} l={record.l:4d} "
        f"t_original={record.t_original:.4f}s "
        f"t_cloud={record.t_cloud:.4f}s "
        f"t_client={record.t_client:.4f}s "
        f"speedup={record.speedup:.2f} "
        f"cloud_efficiency={record.cloud_efficiency:.2f}"
    )
    if record.failed:
        line += f" failed={record.failed}/{record.trials}"
    print(line, flush=True)


def _cmd_bench(args: argparse.Namespace) -> int:
    try:
        if args.n is not None:
            m = args.m if args.m is not None else round(bench_mod.LADDER_RATIO * args.n)
            l = args.l if args.l is not None else round(bench_mod.LADDER_RATIO * args.n)
            specs = [GeneratorSpec(args.n, m, l, args.seed)]
        else:
            specs = bench_mod.ladder_specs(args.sizes, args.seed)
        key_params = KeyParams(seed=args.seed)
    except DomainError as exc:
        return _usage_error(args, str(exc))
    server = parse_bind(args.server) if args.server is not None else None
    records = bench_mod.run_bench(
        specs,
        args.trials,
        key_params=key_params,
        server=server,
        tol=args.tol,
        progress=_print_record,
    )
    if args.csv is not None:
        bench_mod.write_csv(records, args.csv)
    return EXIT_OK


def _cmd_distcheck(args: argparse.Namespace) -> int:
    try:
        params = KeyParams(
            mask_range=args.mask_range,
            c_eq=args.c_eq,
            c_ineq=args.c_ineq,
            seed=args.seed,
        )
        if args.mode == "entry":
            trials = args.trials if args.trials is not None else 10000
            report = distcheck_mod.check_entry_masking(args.entry, params, trials)
        else:
            keys = args.trials if args.trials is not None else 1000
            size = args.n if args.n is not None else 10
            report = distcheck_mod.check_shuffle_uniformity(size, keys, params)
    except DomainError as exc:
        return _usage_error(args, str(exc))
    if args.mode == "entry":
        print(f"entry value:    {report.entry_value:g}")
        print(f"trials:         {report.trials}")
        print(f"mask width:     {report.width:g}")
        print(f"KS statistic:   {report.ks_statistic:.6f}")
        print(f"KS p-value:     {report.ks_pvalue:.6f}")
        print(
            f"sign frequency: {report.sign_frequency:.4f}"
            f" (want 0.5 +/- {report.sign_tolerance:.4f})"
        )
    else:
        print(f"size:           {report.size}")
        print(f"keys:           {report.keys}")
        print(f"expected slot frequency: {report.expected_frequency:.4f}")
        print(
            f"max deviation:  {report.max_deviation:.4f}"
            f" (tolerance {report.tolerance:.4f})"
        )
    print("PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_REJECTED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="onlp", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    gen = sub.add_parser("gen", help="generate a random strictly feasible problem")
    gen.add_argument("--n", type=_positive_count, required=True, help="variables")
    gen.add_argument("--m", type=_count, required=True, help="equality constraints")
    gen.add_argument("--l", type=_count, required=True, help="inequality constraints")
    gen.add_argument("--seed", type=_count, default=0)
    gen.add_argument(
        "--bound-half-width", type=_positive_real, default=10.0, metavar="W",
        help="variables live in [-W, W] (default 10)",
    )
    gen.add_argument("--out", metavar="FILE", help="problem file (default stdout)")
    gen.set_defaults(handler=_cmd_gen)

    kg = sub.add_parser("keygen", help="draw a fresh secret key")
    kg.add_argument("--problem", metavar="FILE", help="take dimensions from this problem")
    kg.add_argument("--n", type=_positive_count, help="variables")
    kg.add_argument("--m", type=_count, help="equality constraints")
    kg.add_argument("--l", type=_count, help="inequality constraints")
    kg.add_argument("--seed", type=_count, default=0)
    kg.add_argument(
        "--mask-range", type=_positive_real, default=10.0, metavar="N",
        help="half-width of the scale and shift draws (default 10)",
    )
    kg.add_argument("--c-eq", type=_positive_real, default=1.0, metavar="C")
    kg.add_argument("--c-ineq", type=_positive_real, default=1.0, metavar="C")
    kg.add_argument("--out", metavar="FILE", help="key file (default stdout)")
    kg.set_defaults(handler=_cmd_keygen)

    enc = sub.add_parser("encrypt", help="mask a plain problem with a key")
    enc.add_argument("--problem", required=True, metavar="FILE")
    enc.add_argument("--key", required=True, metavar="FILE")
    enc.add_argument("--out", metavar="FILE", help="masked problem file (default stdout)")
    enc.set_defaults(handler=_cmd_encrypt)

    solve = sub.add_parser("solve", help="solve a problem document locally")
    solve.add_argument("--problem", required=True, metavar="FILE")
    solve.add_argument("--out", metavar="FILE", help="solution file (default stdout)")
    _add_solver_flags(solve)
    solve.set_defaults(handler=_cmd_solve)

    dec = sub.add_parser("decrypt", help="unmask a solution with a key")
    dec.add_argument("--solution", required=True, metavar="FILE")
    dec.add_argument("--key", required=True, metavar="FILE")
    dec.add_argument("--out", metavar="FILE", help="decrypted solution file (default stdout)")
    dec.set_defaults(handler=_cmd_decrypt)

    ver = sub.add_parser("verify", help="check a solution against a problem")
    ver.add_argument("--problem", required=True, metavar="FILE")
    ver.add_argument("--solution", required=True, metavar="FILE")
    ver.add_argument("--tol", type=_positive_real, default=1e-6)
    ver.set_defaults(handler=_cmd_verify)

    srv = sub.add_parser("serve", help="run the TCP solve worker")
    srv.add_argument("--bind", type=_bind_spec, required=True, metavar="HOST:PORT")
    _add_solver_flags(srv)
    srv.set_defaults(handler=_cmd_serve)

    srvh = sub.add_parser("serve-http", help="run the HTTP solve service")
    srvh.add_argument("--bind", type=_bind_spec, required=True, metavar="HOST:PORT")
    _add_solver_flags(srvh)
    srvh.set_defaults(handler=_cmd_serve_http)

    sub_submit = sub.add_parser("submit", help="send a problem to a TCP worker")
    sub_submit.add_argument("--problem", required=True, metavar="FILE")
    sub_submit.add_argument("--server", type=_bind_spec, required=True, metavar="HOST:PORT")
    sub_submit.add_argument("--timeout", type=_positive_real, default=None, metavar="SECONDS")
    sub_submit.add_argument("--out", metavar="FILE", help="solution file (default stdout)")
    sub_submit.set_defaults(handler=_cmd_submit)

    bench = sub.add_parser("bench", help="time the pipeline against local solves")
    bench.add_argument("--n", type=_positive_count, help="single size to bench")
    bench.add_argument("--m", type=_count, help="equalities (default 0.3 n)")
    bench.add_argument("--l", type=_count, help="inequalities (default 0.3 n)")
    bench.add_argument(
        "--sizes", type=_size_list, default=bench_mod.LADDER_SIZES, metavar="N1,N2,...",
        help="ladder of sizes with m = l = 0.3 n (default 200,500,1000,2000)",
    )
    bench.add_argument("--trials", type=_positive_count, default=5)
    bench.add_argument("--seed", type=_count, default=0)
    bench.add_argument("--tol", type=_positive_real, default=1e-6)
    bench.add_argument("--server", type=_bind_spec, default=None, metavar="HOST:PORT")
    bench.add_argument("--csv", metavar="FILE", help="also write records as CSV")
    bench.set_defaults(handler=_cmd_bench, n=None)

    dist = sub.add_parser("distcheck", help="empirical checks on the masking")
    dist.add_argument(
        "--mode", choices=("entry", "shuffle"), default="entry",
        help="entry: KS test on one masked entry; shuffle: slot frequencies",
    )
    dist.add_argument("--entry", type=_real, default=5.0, help="entry value to mask")
    dist.add_argument("--n", type=_positive_count, default=None, help="shuffle size (default 10)")
    dist.add_argument(
        "--trials", type=_positive_count, default=None,
        help="samples (default 10000 for entry, 1000 keys for shuffle)",
    )
    dist.add_argument("--seed", type=_count, default=0)
    dist.add_argument("--mask-range", type=_positive_real, default=10.0, metavar="N")
    dist.add_argument("--c-eq", type=_positive_real, default=1.0, metavar="C")
    dist.add_argument("--c-ineq", type=_positive_real, default=1.0, metavar="C")
    dist.set_defaults(handler=_cmd_distcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, int):
            return exc.code
        return EXIT_OK if exc.code is None else EXIT_ERROR
    try:
        return args.handler(args)
    except ParseError as exc:
        print(f"onlp: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"onlp: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"onlp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return 130
    except OnlpError as exc:
        print(f"onlp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
