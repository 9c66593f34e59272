"""``genperm`` command line.

Exit codes: 0 ok, 2 validation failure, 3 I/O error, 4 parameter error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction

from . import __version__
from .approx import approximate, interpolate_parameters
from .core import (
    BudgetExceededError,
    DomainError,
    GenpermError,
    OrderedSelection,
    Permutation,
    ShapeError,
    StructureError,
    TieError,
    permutations_of,
    validate_lambda_permuton,
)
from .diagnostics import DEFAULT_MAX_K, ConvergenceReport, converge
from .embed import embed_selection, extract_selection
from .io import (
    FormatError,
    loads,
    permuton_to_dict,
    read_measure,
    read_permuton,
    read_selection,
    selection_to_dict,
    to_csv,
    write_json,
)
from .metrics import d_inf, d_square
from .patterns import (
    DEFAULT_BUDGET,
    density_in_permuton_mc,
    density_in_selection,
    density_in_step_permuton_exact,
    pattern_of_points,
)
from .rng import make_rng
from .sampling import concentration_experiment, sample_points

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_PARAM = 0, 2, 3, 4

log = logging.getLogger("genperm")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: {message}", EXIT_PARAM)


def _load(reader, path):
    """Read an input file; unreadable or malformed files are I/O errors,
    well-formed files with invalid content are validation failures."""
    try:
        return reader(path)
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror or e}", EXIT_IO) from None
    except FormatError as e:
        raise CliError(str(e), EXIT_IO) from None
    except (GenpermError, ValueError) as e:
        raise CliError(f"{path}: {e}", EXIT_VALIDATION) from None


def _emit(args, text: str):
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as e:
            raise CliError(f"cannot write {args.output}: {e.strerror or e}", EXIT_IO) from None
    else:
        sys.stdout.write(text)


def _emit_table(args, obj, header, rows):
    if args.format == "csv":
        _emit(args, to_csv(header, rows))
    else:
        _emit(args, write_json(obj))


# -- commands --------------------------------------------------------------

def _planted_params(mu, n: int, m: int, N, M):
    lam = Fraction(m, n)
    if abs(float(mu.lam) - float(lam)) > 1e-12:
        raise CliError(f"m/n = {lam} does not match the target's lambda {mu.lam}", EXIT_PARAM)
    if N is None and M is None:
        N, M = lam.denominator, lam.numerator
    elif N is None or M is None:
        raise CliError("--N and --M must be given together", EXIT_PARAM)
    if N < 1 or M < 1 or n % N or m % M or n // N != m // M:
        raise CliError(f"cannot factor (n, m) = ({n}, {m}) as (N k, M k) with N={N}, M={M}",
                       EXIT_PARAM)
    return N, M, n // N


def cmd_generate(args):
    if args.m > args.n or args.m < 1:
        raise CliError("need 1 <= m <= n", EXIT_PARAM)
    if args.model == "uniform":
        rng = make_rng(args.seed)
        vals = tuple(int(v) + 1 for v in rng.choice(args.n, args.m, replace=False))
        nu = OrderedSelection(args.n, args.m, vals)
        extra = {}
    else:
        if not args.target:
            raise CliError("the planted model needs --target", EXIT_PARAM)
        mu = _load(read_permuton, args.target)
        N, M, k = _planted_params(mu, args.n, args.m, args.N, args.M)
        res = approximate(mu, N, M, k, args.seed)
        nu = res.selection
        extra = {"N": N, "M": M, "k": k, "certificate": res.certificate,
                 "d_inf_to_target": res.d_inf_to_target}
    rows = [(i + 1, v) for i, v in enumerate(nu.values)]
    _emit_table(args, {**selection_to_dict(nu), **extra}, ("position", "value"), rows)


def cmd_embed(args):
    mu = embed_selection(_load(read_selection, args.selection))
    rows = [(i, j, mu.cell_mass[i, j]) for i, j in mu.active_cells()]
    _emit_table(args, permuton_to_dict(mu), ("column", "row", "mass"), rows)


def cmd_extract(args):
    mu = _load(read_permuton, args.permuton)
    nu = extract_selection(mu)
    _emit_table(args, selection_to_dict(nu), ("position", "value"),
                [(i + 1, v) for i, v in enumerate(nu.values)])


def _patterns(args):
    if args.tau:
        return [Permutation.parse(t) for t in args.tau]
    return [tau for k in range(1, args.max_k + 1) for tau in permutations_of(k)]


def cmd_density(args):
    try:
        taus = _patterns(args)
    except (ValueError, DomainError) as e:
        raise CliError(f"bad pattern: {e}", EXIT_PARAM) from None
    results = []
    if args.method != "mc":
        try:
            nu = _load(read_selection, args.measure)
        except CliError:
            nu = None
        if nu is not None and args.method != "embedding":
            results = [density_in_selection(t, nu) for t in taus]
    if not results:
        mu = _load(read_measure, args.measure)
        for tau in taus:
            if args.method == "mc":
                r = density_in_permuton_mc(tau, mu, args.samples, args.seed, workers=args.workers)
            else:
                try:
                    r = density_in_step_permuton_exact(tau, mu, args.budget)
                except BudgetExceededError:
                    if args.method == "exact":
                        raise
                    log.info("enumeration over budget; using Monte Carlo for %s", tau)
                    r = density_in_permuton_mc(tau, mu, args.samples, args.seed,
                                               workers=args.workers)
            results.append(r)
    recs = [r.to_record() for r in results]
    _emit_table(args, recs, ("tau", "value", "method", "std_error", "samples"),
                [(str(r.tau), r.value, r.method, r.std_error, r.sample_count) for r in results])


def cmd_dist(args):
    a = _load(read_measure, args.a)
    b = _load(read_measure, args.b)
    res = d_inf(a, b) if args.metric == "inf" else d_square(a, b)
    obj = {"metric": args.metric, "value": res.value, "witness": list(res.witness)}
    _emit_table(args, obj, ("metric", "value", "witness"),
                [(args.metric, res.value, " ".join(str(w) for w in res.witness))])


def cmd_sample(args):
    mu = _load(read_measure, args.measure)
    batch = sample_points(mu, args.k, args.seed)
    sigma = pattern_of_points(batch.points)
    obj = {"seed": args.seed, "k": args.k, "sigma": list(sigma.values),
           "points": batch.points.tolist(), "resamples": batch.resample_count}
    _emit_table(args, obj, ("x", "y"), [tuple(p) for p in batch.points.tolist()])


def cmd_concentrate(args):
    mu = _load(read_measure, args.measure)
    rep = concentration_experiment(mu, args.k, args.trials, args.seed,
                                   d_square_budget=args.d_square_budget)
    header = ("trial", "d_inf", "d_square", "threshold_inf", "threshold_square")
    rows = list(rep.rows())
    if args.format == "csv":
        _emit(args, to_csv(header, rows))
    else:
        obj = {**rep.summary(), "trials_detail": [dict(zip(header, r)) for r in rows]}
        _emit(args, write_json(obj))


def cmd_approximate(args):
    mu = _load(read_permuton, args.target)
    report = validate_lambda_permuton(mu)
    if not report.ok and not args.no_validate:
        raise CliError(f"target is not a lambda-permuton: {report.violations[0]}", EXIT_VALIDATION)
    res = approximate(mu, args.N, args.M, args.k, args.seed, validate=False)
    rec = res.to_record()
    _emit_table(args, rec, ("field", "value"),
                [(k, v) for k, v in rec.items() if not isinstance(v, (list, dict))])
    if not res.certified:
        raise CliError("measured distance exceeds the certificate", EXIT_VALIDATION)


def cmd_interpolate(args):
    beta = _load(read_measure, args.beta)
    nu = extract_selection(beta)
    if nu.n % args.N or nu.m % args.M or nu.n // args.N != nu.m // args.M:
        raise CliError(f"board {nu.n} x {nu.m} is not (N(k+1), M(k+1))", EXIT_PARAM)
    k = nu.n // args.N - 1
    rep = interpolate_parameters(beta, args.N, args.M, k)
    recs = rep.to_records()
    if args.format == "csv":
        _emit(args, to_csv(("step", "phase", "n", "m", "d_inf_step", "bound"),
                           [(i, r["phase"], r["n"], r["m"], r["d_inf_step"], r["bound"])
                            for i, r in enumerate(recs)]))
    else:
        _emit(args, write_json({"N": args.N, "M": args.M, "k": k, "steps": recs,
                                "cumulative": rep.cumulative,
                                "cumulative_bound": rep.cumulative_bound,
                                "within_bounds": rep.within_bounds}))
    if not rep.within_bounds:
        raise CliError("an interpolation step exceeds its bound", EXIT_VALIDATION)


def cmd_converge(args):
    mu = _load(read_measure, args.target)
    seq = [_load(read_selection, p) for p in args.sequence]
    rep = converge(seq, mu, args.max_k, args.tolerance, args.seed, workers=args.workers)
    _emit(args, rep.to_csv() if args.format == "csv" else write_json(rep.to_dict()))


def cmd_export(args):
    def read_report(path):
        with open(path) as fh:
            text = fh.read()
        try:
            return ConvergenceReport.from_dict(loads(text))
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"{path}: not a convergence report ({e})") from None

    rep = _load(read_report, args.report)
    _emit(args, rep.to_csv())


# -- parser ----------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--seed", type=int, help="RNG seed (u64)", **(kw or {"default": 0}))
    p.add_argument("--format", choices=("json", "csv"), **(kw or {"default": "json"}))
    p.add_argument("--tolerance", type=float, **(kw or {"default": 1e-9}))
    p.add_argument("-o", "--output", help="write to a file instead of stdout",
                   **(kw or {"default": None}))
    p.add_argument("-v", "--verbose", action="store_true", **(kw or {"default": False}))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="genperm", description="Generalized permutons: embeddings, "
                     "pattern densities, distances and approximations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("generate", cmd_generate, "draw an ordered selection")
    p.add_argument("model", choices=("uniform", "planted"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--target", help="target step permuton (planted model)")
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)

    p = add("embed", cmd_embed, "selection -> step permuton")
    p.add_argument("selection")

    p = add("extract", cmd_extract, "embedding-form step permuton -> selection")
    p.add_argument("permuton")

    p = add("density", cmd_density, "pattern densities")
    p.add_argument("measure", help="selection or step permuton file")
    p.add_argument("--tau", action="append", help="pattern, e.g. 231 (repeatable)")
    p.add_argument("--max-k", type=int, default=DEFAULT_MAX_K,
                   help="all patterns up to this length when --tau is absent")
    p.add_argument("--method", choices=("auto", "exact", "mc", "embedding"), default="auto",
                   help="'embedding' treats a selection file as its step permuton")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--workers", type=int, default=1)

    p = add("dist", cmd_dist, "distance between two measures")
    p.add_argument("--metric", choices=("inf", "square"), default="inf")
    p.add_argument("a")
    p.add_argument("b")

    p = add("sample", cmd_sample, "k iid points and their pattern")
    p.add_argument("measure")
    p.add_argument("--k", type=int, required=True)

    p = add("concentrate", cmd_concentrate, "distance to random subpermutons")
    p.add_argument("measure")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--d-square-budget", type=int, default=5 * 10**7)

    p = add("approximate", cmd_approximate, "certified (Nk, Mk)-selection for a target")
    p.add_argument("target")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--no-validate", action="store_true")

    p = add("interpolate", cmd_interpolate, "walk from (N(k+1), M(k+1)) down to (Nk, Mk)")
    p.add_argument("beta")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)

    p = add("converge", cmd_converge, "convergence diagnostics of a sequence")
    p.add_argument("--target", required=True)
    p.add_argument("sequence", nargs="*")
    p.add_argument("--max-k", type=int, default=DEFAULT_MAX_K)
    p.add_argument("--workers", type=int, default=1)

    p = add("export", cmd_export, "convergence report JSON -> CSV")
    p.add_argument("report")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (StructureError, TieError) as e:
        print(f"validation failure: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DomainError, ShapeError, BudgetExceededError) as e:
        print(f"parameter error: {e}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
