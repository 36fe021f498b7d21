"""Command-line front end: ``volpen <subcommand> [options]``.

Every study writes CSV (to ``--out`` or standard output) and prints a
short summary.  Exit status is 0 on success and 2 on invalid input or
solver failure, with a one-line diagnostic on standard error.
"""

from __future__ import annotations

import argparse
import contextlib
import sys

from . import analytic, experiments
from .csvio import CONVERGENCE_HEADER, EIGDIST_HEADER, SPECTRUM_HEADER, write_rows
from .geometry import diffusivity, write_mask_csv
from .operator import assemble_1d, write_coo
from .solver import SolverError


def _n_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty resolution list")
    return vals


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _strategy(text):
    if text in experiments.STRATEGIES or text.startswith("replace-index="):
        return text
    raise argparse.ArgumentTypeError(
        f"unknown strategy {text!r}; choose from {', '.join(experiments.STRATEGIES)} or replace-index=K")


@contextlib.contextmanager
def _sink(path):
    """Open `path` for writing, or yield stdout for '-' / None."""
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _report(args):
    # summaries share stdout only when the CSV goes to a file
    return sys.stderr if args.out in (None, "-") else sys.stdout


def _slope_line(rows, label=""):
    hs = [r.h for r in rows]
    if len(rows) < 3:
        return f"{label}too few resolutions for a slope fit"
    return (f"{label}slope linf {experiments.asymptotic_slope(hs, [r.linf for r in rows]):.4f}, "
            f"slope l2 {experiments.asymptotic_slope(hs, [r.l2 for r in rows]):.4f}")


def cmd_solve1d(args):
    res = experiments.solve_1d(args.m, args.eta, args.n, args.strategy, args.interface_value)
    x = res.grid.points
    with _sink(args.out) as fh:
        write_rows(fh, ("index", "x", "chi", "u", "v", "w"),
                   ((i, x[i], res.mask.values[i], res.u[i], res.v[i], res.w[i]) for i in range(res.grid.n)))
    if args.mask_out:
        with open(args.mask_out, "w", newline="") as fh:
            write_mask_csv(res.mask, fh)
    if args.matrix_out:
        with open(args.matrix_out, "w", newline="") as fh:
            write_coo(assemble_1d(diffusivity(res.mask, args.eta), res.grid), fh)
    out = _report(args)
    print(f"fluid error vs w: l2 {res.err_w[0]:.6e}, linf {res.err_w[1]:.6e}", file=out)
    print(f"fluid error vs v: l2 {res.err_v[0]:.6e}, linf {res.err_v[1]:.6e}", file=out)
    print(f"penalization error |w - v| (exact): linf {analytic.penalization_error(args.m, args.eta, 'Linf'):.6e}",
          file=out)


def cmd_converge1d(args):
    rows = experiments.convergence_study_1d(args.m, args.eta, args.n, args.target, args.strategy)
    with _sink(args.out) as fh:
        write_rows(fh, CONVERGENCE_HEADER, (r.astuple() for r in rows))
    print(_slope_line(rows), file=_report(args))


def cmd_spectrum(args):
    rep = experiments.spectrum_study(args.n, args.eta)
    with _sink(args.out) as fh:
        write_rows(fh, SPECTRUM_HEADER, zip(range(rep.n), rep.eigenvalues, rep.branches()))
    out = _report(args)
    print(f"kernel dimension {rep.kernel_dim}, zero mode {rep.zero_mode:.3e}", file=out)
    print(f"lower branch: slope {rep.lower[0]:.4f}, prefactor/eta {rep.lower[1] / rep.eta:.4f}", file=out)
    print(f"upper branch: slope {rep.upper[0]:.4f}, prefactor {rep.upper[1]:.4f}", file=out)
    print("first upper eigenvalues: " + ", ".join(f"{v:.6g}" for v in rep.upper_eigenvalues()[:3]), file=out)


def cmd_eigdist(args):
    rows = experiments.eigenfunction_study(args.n, args.eta)
    with _sink(args.out) as fh:
        write_rows(fh, EIGDIST_HEADER, rows)
    out = _report(args)
    for mode in experiments.EIGDIST_MODES:
        sub = [r for r in rows if r[2] == mode]
        if len(sub) >= 3:
            s, _ = experiments.fit_slope([r[0] for r in sub], [r[3] for r in sub])
            print(f"mode cos {mode}x: l2 distance slope vs n {s:.4f}", file=out)


def cmd_solve2d(args):
    res = experiments.solve_2d(args.case, args.eta, args.n, args.strategy)
    X, Y = res.grid.mesh()
    X, Y = X.ravel(), Y.ravel()
    with _sink(args.out) as fh:
        write_rows(fh, ("index", "x", "y", "chi", "u", "exact"),
                   ((k, X[k], Y[k], res.mask.values[k], res.u[k], res.exact[k]) for k in range(res.grid.size)))
    if args.mask_out:
        with open(args.mask_out, "w", newline="") as fh:
            write_mask_csv(res.mask, fh)
    print(f"fluid error vs exact: l2 {res.err[0]:.6e}, linf {res.err[1]:.6e}", file=_report(args))


def cmd_converge2d(args):
    rows = experiments.convergence_study_2d(args.case, args.eta, args.n, args.strategy)
    with _sink(args.out) as fh:
        write_rows(fh, CONVERGENCE_HEADER, (r.astuple() for r in rows))
    print(_slope_line(rows), file=_report(args))


def cmd_exact(args):
    with _sink(args.out) as fh:
        if args.coefficients:
            sol = analytic.penalized_coefficients(args.m, args.eta)
            write_rows(fh, ("name", "value"),
                       [("A1", sol.a1), ("A2", sol.a2), ("B1", sol.b1), ("B2", sol.b2),
                        ("penalization_linf", analytic.penalization_error(args.m, args.eta, "Linf")),
                        ("penalization_l2", analytic.penalization_error(args.m, args.eta, "L2"))])
        elif args.fourier:
            coeffs = [(k, analytic.fourier_coefficient(k, args.m, args.eta)) for k in args.fourier]
            write_rows(fh, ("k", "re", "im"), ((k, c.real, c.imag) for k, c in coeffs))
        else:
            roots = analytic.exact_eigenvalues(args.eta, args.lambda_max, args.tol)
            write_rows(fh, ("index", "lambda"), enumerate(roots))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="volpen", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_type=int, n_default=None, m=True):
        sp.add_argument("--eta", type=_positive, default=1e-8, help="penalization parameter (default 1e-8)")
        if m:
            sp.add_argument("--m", type=int, default=1, help="forcing mode (default 1)")
        sp.add_argument("--n", type=n_type, default=n_default, required=n_default is None,
                        help="grid points per direction" + (" (comma-separated list)" if n_type is _n_list else ""))
        sp.add_argument("--out", default=None, help="CSV output path (default: standard output)")

    s = sub.add_parser("solve1d", help="single 1D solve, dumps u, v and w samples")
    common(s, n_default=64)
    s.add_argument("--strategy", type=_strategy, default="replace-first")
    s.add_argument("--interface-value", type=float, default=0.5, help="mask value at x=0 and x=pi")
    s.add_argument("--mask-out", default=None)
    s.add_argument("--matrix-out", default=None)
    s.set_defaults(func=cmd_solve1d)

    s = sub.add_parser("converge1d", help="1D grid-refinement study")
    common(s, _n_list, [16, 32, 64, 128, 256, 512])
    s.add_argument("--target", choices=("w", "v"), default="w")
    s.add_argument("--strategy", type=_strategy, default="replace-first")
    s.set_defaults(func=cmd_converge1d)

    s = sub.add_parser("spectrum", help="discrete spectrum with branch fits")
    common(s, n_default=512, m=False)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("eigdist", help="eigenfunction distance study")
    common(s, _n_list, [64, 128, 256, 512], m=False)
    s.set_defaults(func=cmd_eigdist)

    for name, nl, default, func in (("solve2d", int, 64, cmd_solve2d),
                                    ("converge2d", _n_list, [], cmd_converge2d)):
        s = sub.add_parser(name, help="2D " + ("single solve" if nl is int else "grid-refinement study"))
        common(s, nl, default, m=False)
        s.add_argument("--case", choices=("square", "disc"), required=True)
        s.add_argument("--strategy", type=_strategy, default="replace-first")
        if nl is int:
            s.add_argument("--mask-out", default=None)
        s.set_defaults(func=func)

    s = sub.add_parser("exact", help="evaluate closed-form objects")
    s.add_argument("--eta", type=_positive, default=1e-8)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--out", default=None)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--coefficients", action="store_true", help="penalized solution coefficients")
    g.add_argument("--fourier", type=lambda t: [int(k) for k in t.split(",")], help="Fourier coefficients at k list")
    g.add_argument("--g-roots", action="store_true", help="roots of the characteristic determinant")
    s.add_argument("--lambda-max", type=_positive, default=5.0)
    s.add_argument("--tol", type=_positive, default=1e-12)
    s.set_defaults(func=cmd_exact)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "converge2d" and not args.n:
        args.n = [16, 32, 64, 128] if args.case == "square" else [31, 63, 127, 255]
    try:
        args.func(args)
    except (ValueError, SolverError, OSError) as exc:
        print(f"volpen {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
