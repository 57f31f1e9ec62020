"""Command-line front end: ``dsing probe|solve|grid|compare-poly PROBLEM.json``.

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure
(including non-convergence), 3 input already singular.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .functions import AlreadySingularError, det_function, normalize
from .io import ProblemFormatError, load_problem, load_report, save_report
from .linalg import SVDConvergenceError
from .outer import NotPolynomialError, distance_to_singularity, fta_points_for
from .taylor import TaylorProbe, choose_num_points
from .verify import GridSpec, grid_sigma_min, write_grid_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_SINGULAR = 0, 1, 2, 3

log = logging.getLogger("dsing")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver options (override the problem file)")
    g.add_argument("--tol1", type=float, help="threshold below which g(eps) counts as zero")
    g.add_argument("--tol2", type=float, help="target bracket width")
    g.add_argument("--tol3", type=float, help="Taylor coefficient tolerance for the node count")
    g.add_argument("--beta", type=float, help="relative coefficient change that triggers a node re-probe")
    g.add_argument("--eps0", type=float, help="first eps of the outer iteration")
    g.add_argument("--eps-low", type=float, dest="eps_low")
    g.add_argument("--eps-up", type=float, dest="eps_up")
    g.add_argument("--kmax", type=int, dest="k_max", help="maximum number of outer iterations")
    g.add_argument("--scaled", action="store_true", default=None, help="use the functional divided by m^2")
    g.add_argument("--seed", type=_u64)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("problem", help="problem file (JSON)")
    p.add_argument("--out", type=Path, help="output path")
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads for grid scans")
    p.add_argument("--grid-step", type=float, default=0.01, dest="grid_step")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dsing", description="Distance to singularity of matrix-valued functions.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("probe", help="choose the node count from the Taylor coefficients of det F")
    _add_common(p)
    p.add_argument("--tol3", type=float)
    p.add_argument("--m-min", type=_positive_int, dest="m_min")
    p.add_argument("--m-max", type=_positive_int, dest="m_max")

    p = sub.add_parser("solve", help="compute an upper bound for the distance to singularity")
    _add_common(p)
    _add_solver_flags(p)
    p.add_argument("--no-grid", action="store_true", help="skip the grid certificate")

    p = sub.add_parser("grid", help="write sigma_min of the (perturbed) function on a grid as CSV")
    _add_common(p)
    p.add_argument("--report", type=Path, help="report whose perturbation is applied")
    p.add_argument("--disk", action="store_true", help="[-1, 1]^2 grid restricted to the unit disk")

    p = sub.add_parser("compare-poly", help="adaptive node count vs (d-1)n+1 nodes on a matrix polynomial")
    _add_common(p)
    _add_solver_flags(p)
    return ap


def _options(args, base):
    kw = {}
    for k in ("tol1", "tol2", "tol3", "beta", "eps0", "eps_low", "eps_up", "k_max", "scaled", "seed"):
        v = getattr(args, k, None)
        if v is not None:
            kw[k] = v
    try:
        return replace(base, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _grid_for(F, step):
    return GridSpec.disk_default(step) if F.is_polynomial else GridSpec.function_default(step)


def cmd_probe(args) -> int:
    prob = load_problem(args.problem)
    o = prob.options
    tol = args.tol3 if args.tol3 is not None else o.tol3
    m_min = args.m_min or o.m_min
    m_max = args.m_max or o.m_max
    if m_max < m_min:
        raise UsageError("--m-max must be at least --m-min")
    Ft, rec = normalize(prob.F, o.normalize_p)
    probe = TaylorProbe(det_function(Ft))
    res = choose_num_points(probe.f, m_min, m_max, tol, probe=probe)
    lines = [f"m = {res.m}", f"converged = {str(res.converged).lower()}", f"alpha = {rec.alpha:.17g}", "j,abs_a_j"]
    lines += [f"{j},{a:.6e}" for j, a in res.coeffs.items()]
    _emit("\n".join(lines), args.out)
    return EXIT_OK if res.converged else EXIT_NUMERICAL


def _solve(prob, opts, args, grid=True):
    rep = distance_to_singularity(prob.F, prob.spec, opts)
    if grid:
        Ft, _ = normalize(prob.F, opts.normalize_p)
        t0 = time.perf_counter()
        gs = grid_sigma_min(Ft, rep.delta, rep.eps_star, _grid_for(prob.F, args.grid_step), keep_values=False, threads=args.threads)
        rep.verification.update(
            grid_max_sigma_min=gs.max_sigma_min, grid_min_sigma_min=gs.min_sigma_min,
            grid_count=gs.count, grid_failures=gs.failures,
        )
        rep.wall_time += time.perf_counter() - t0
    return rep


def _summary(rep) -> str:
    v = rep.verification
    out = [
        f"eps_star = {rep.eps_star:.10g} (normalized), {rep.eps_star_original:.10g} (original scale)",
        f"converged = {str(rep.converged).lower()}, iterations = {len(rep.iterations)}, m = {rep.m_history[-1]}",
        f"max |det| on {v['circle_nodes']} circle nodes = {v['circle_det_max']:.4e}",
    ]
    if "grid_max_sigma_min" in v:
        out.append(f"grid sigma_min: max {v['grid_max_sigma_min']:.4e}, min {v['grid_min_sigma_min']:.4e} ({v['grid_count']} nodes)")
    return "\n".join(out)


def cmd_solve(args) -> int:
    prob = load_problem(args.problem)
    opts = _options(args, prob.options)
    rep = _solve(prob, opts, args, grid=not args.no_grid)
    if args.out:
        save_report(args.out, rep)
    print(_summary(rep))
    return EXIT_OK if rep.converged else EXIT_NUMERICAL


def cmd_grid(args) -> int:
    prob = load_problem(args.problem)
    try:
        Ft, _ = normalize(prob.F, prob.options.normalize_p)
    except AlreadySingularError:
        # nothing to scale; scan the function as given
        Ft = prob.F
    delta, eps = None, 0.0
    if args.report:
        rep = load_report(args.report)
        if rep.delta.shape != Ft.coeffs.shape:
            raise UsageError(f"report perturbation has shape {rep.delta.shape}, problem needs {Ft.coeffs.shape}")
        delta, eps = rep.delta, rep.eps_star
    spec = GridSpec.disk_default(args.grid_step) if args.disk else GridSpec.function_default(args.grid_step)
    gs = grid_sigma_min(Ft, delta, eps, spec, keep_values=True, threads=args.threads)
    if args.out:
        write_grid_csv(args.out, gs)
    print(f"{gs.count} nodes, sigma_min max {gs.max_sigma_min:.6e}, min {gs.min_sigma_min:.6e}, failures {gs.failures}")
    return EXIT_OK if gs.failures == 0 else EXIT_NUMERICAL


def comparison_table(rows) -> str:
    """Rows are (label, report); columns mirror the usual comparison tables."""
    head = ["", *[r[0] for r in rows]]
    body = [
        ["Distance", *[f"{r.eps_star:.6e}" for _, r in rows]],
        ["Num. points", *[str(max(r.m_history)) for _, r in rows]],
        ["Time [s]", *[f"{r.wall_time:.2f}" for _, r in rows]],
        ["Iter.", *[str(len(r.iterations)) for _, r in rows]],
        ["SVDs/iter.", *[f"{r.svds_per_iteration:.1f}" for _, r in rows]],
        ["Max sigma_min", *[f"{r.verification.get('grid_max_sigma_min', float('nan')):.4e}" for _, r in rows]],
        ["Min sigma_min", *[f"{r.verification.get('grid_min_sigma_min', float('nan')):.4e}" for _, r in rows]],
    ]
    width = [max(len(row[c]) for row in [head, *body]) for c in range(len(head))]
    fmt = lambda row: "  ".join(s.ljust(w) for s, w in zip(row, width))  # noqa: E731
    return "\n".join([fmt(head), *map(fmt, body)])


def cmd_compare_poly(args) -> int:
    prob = load_problem(args.problem)
    if not prob.F.is_polynomial:
        raise UsageError("compare-poly needs a matrix polynomial (monomial terms only)")
    m_fta = fta_points_for(prob.F)
    base = _options(args, replace(prob.options, scaled=True))
    runs = [
        ("adaptive", _solve(prob, replace(base, num_points=None), args)),
        ("fta", _solve(prob, replace(base, num_points=m_fta), args)),
    ]
    table = comparison_table(runs)
    print(table)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        for label, rep in runs:
            save_report(args.out / f"{label}.json", rep)
        (args.out / "comparison.txt").write_text(table + "\n")
    return EXIT_OK if all(r.converged for _, r in runs) else EXIT_NUMERICAL


def _emit(text: str, out: Path | None) -> None:
    print(text)
    if out:
        Path(out).write_text(text + "\n")


COMMANDS = {"probe": cmd_probe, "solve": cmd_solve, "grid": cmd_grid, "compare-poly": cmd_compare_poly}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ProblemFormatError, UsageError, NotPolynomialError, OSError) as exc:
        print(f"dsing: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AlreadySingularError as exc:
        print(f"dsing: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (SVDConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"dsing: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
