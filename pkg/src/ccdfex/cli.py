"""Command-line interface: ``ccdfex <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error or a failed check, and 2 on a
usage error (bad flags or an unparseable model specification).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis as A
from . import measures as M
from .dataio import gof_report, read_paired_csv, render_report
from .distributions import PairedSample, closed_form_ccdfex, sample
from .errors import CcdfexError
from .estimators import BandwidthSpec, empirical_ccdfex, kernel_ccdfex
from .modelspec import CATALOG, GRAMMAR, ModelSpecError, parse_model
from .numerics import QuadSpec
from .simulation import TABLE_PAIRS, StudyConfig, oracle_truth, run_study, summarize

__all__ = ["main", "run", "build_parser", "parse_grid", "emit_figure_grid"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> M.TimePair:
    vals = _floats(text)
    if len(vals) != 2:
        raise UsageError(f"expected a pair t1,t2, got {text!r}")
    return M.TimePair(*vals)


def parse_grid(text: str, model) -> A.Grid2:
    """``default``, ``grid:N``, ``diag:N``, ``table`` or explicit ``t1,t2;t1,t2;...``."""
    text = text.strip()
    if text == "default":
        return A.default_grid(model)
    if text == "table":
        return A.Grid2(TABLE_PAIRS, "table pairs")
    kind, _, arg = text.partition(":")
    if kind in ("grid", "diag"):
        try:
            k = int(arg)
        except ValueError:
            raise UsageError(f"bad grid size in {text!r}") from None
        if k < 1:
            raise UsageError("grid size must be positive")
        return A.uniform_grid(model, k) if kind == "grid" else A.diagonal_grid(model, k)
    return A.Grid2(tuple(_pair(p) for p in text.split(";") if p.strip()), "explicit points")


def _model(text: str):
    try:
        return parse_model(text)
    except ModelSpecError as exc:
        raise UsageError(str(exc)) from None


def _quad(args) -> QuadSpec:
    return QuadSpec(abs_tol=args.abs_tol, rel_tol=args.rel_tol, max_depth=args.max_depth)


def _bandwidth(text: str) -> BandwidthSpec:
    if text == "scott":
        return BandwidthSpec()
    try:
        return BandwidthSpec.fixed(float(text))
    except ValueError:
        raise UsageError(f"bandwidth must be 'scott' or a positive number, got {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_compute(args) -> int:
    model = _model(args.model)
    t = _pair(args.t)
    spec = _quad(args)
    i = args.i
    measure = args.measure
    if measure == "ccdfex":
        v = M.ccdfex(model, i, t, spec=spec, use_closed=not args.quadrature)
    elif measure == "df":
        v = float(model.df(*t))
    elif measure == "brhr":
        v = M.brhr(model, i, t)
    elif measure == "eit":
        v = M.eit(model, i, t, spec=spec)
    elif measure == "entropy":
        v = M.failure_entropy(model, i, t, spec=spec)
    elif measure == "cond-ccdfex":
        v = M.conditional_ccdfex(model, i, t, kappa=args.kappa, spec=spec)
    elif measure == "cond-brhr":
        v = M.conditional_brhr(model, i, t)
    elif measure == "cond-eit":
        v = M.conditional_eit(model, i, t, spec=spec)
    else:  # closed
        v = closed_form_ccdfex(model, i, *t)
        if v is None:
            raise CcdfexError(f"{model.name} has no closed form")
    print(_fmt(v))
    return 0


def _sample_from(args) -> PairedSample:
    if args.data:
        return read_paired_csv(args.data, args.col1, args.col2)
    if not args.model:
        raise UsageError("estimate needs --data or --model with --n")
    return sample(_model(args.model), args.n, args.seed)


def cmd_estimate(args) -> int:
    s = _sample_from(args)
    points = [_pair(p) for p in args.t.split(";") if p.strip()]
    bw = _bandwidth(args.bandwidth)
    h = bw.resolve(s) if args.estimator in ("kernel", "both") else None
    rows = []
    for p in points:
        row = [p.t1, p.t2]
        if args.estimator in ("empirical", "both"):
            row.append(empirical_ccdfex(s, args.i, p))
        if args.estimator in ("kernel", "both"):
            row.append(kernel_ccdfex(s, h, args.i, p))
        rows.append(row)
    header = ["t1", "t2"] + [e for e in ("empirical", "kernel") if args.estimator in (e, "both")]
    if args.format == "json":
        body = {"n": s.n, "bandwidth": h, "rows": [dict(zip(header, r)) for r in rows]}
        _emit(json.dumps(body, indent=2) + "\n", args.out)
    else:
        _emit(_csv(header, rows), args.out)
    return 0


def cmd_simulate(args) -> int:
    kw = {}
    if args.config == "quick":
        kw.update(sizes=(80, 250), replications=100)
    elif args.config != "default":
        raise UsageError(f"unknown study config {args.config!r} (default, quick)")
    if args.model:
        kw["model"] = _model(args.model)
    if args.sizes:
        kw["sizes"] = tuple(int(v) for v in _floats(args.sizes))
    if args.replications:
        kw["replications"] = args.replications
    if args.grid:
        kw["grid"] = tuple(_pair(p) for p in args.grid.split(";") if p.strip())
    if args.estimators:
        kw["estimators"] = tuple(e.strip() for e in args.estimators.split(","))
    try:
        config = StudyConfig(
            seed=args.seed,
            component=args.i,
            bandwidth=_bandwidth(args.bandwidth),
            truth=args.truth,
            workers=args.workers,
            **kw,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_study(config)
    if args.format == "table":
        text = report.table()
        if set(config.estimators) == {"empirical", "kernel"}:
            text += "\nn      avg|bias| emp   avg mse emp   avg|bias| ker   avg mse ker   lower mse\n"
            for r in summarize(report):
                text += (
                    f"{r.n:<6} {r.empirical_abs_bias:>13.6f} {r.empirical_mse:>13.3e} "
                    f"{r.kernel_abs_bias:>15.6f} {r.kernel_mse:>13.3e}   {r.better_mse}\n"
                )
        _emit(text, args.out)
    else:
        _emit(render_report(report, args.format), args.out)
    flagged = [r for r in report.rows if r.flagged]
    for r in flagged:
        print(f"warning: {r.estimator} n={r.n} t=({r.t1}, {r.t2}): {r.excluded} undefined replications", file=sys.stderr)
    return 0


CHECKS = (
    "eit-bound",
    "entropy-bound",
    "monotonicity",
    "proportionality",
    "characterization",
    "compare",
    "brhr-ordering",
    "cprhr",
    "dispersive",
    "zeta",
    "conditional",
    "derivative-identity",
)


def cmd_verify(args) -> int:
    model = _model(args.model)
    grid = parse_grid(args.grid, model)
    tol = args.tol
    check = args.check
    if check in ("compare", "brhr-ordering") and not args.model_b:
        raise UsageError(f"{check} needs --model-b")
    if check == "eit-bound":
        v = A.check_eit_bound(model, grid, tol if tol is not None else A.CLOSED_TOL)
    elif check == "entropy-bound":
        v = A.check_entropy_bound(model, grid, tol if tol is not None else A.CLOSED_TOL)
    elif check == "monotonicity":
        res = A.check_monotonicity_class(model, args.i, grid, tol if tol is not None else A.QUAD_TOL)
        print(f"component {args.i}: {res.classification} (criterion {res.criterion}, finite differences {res.finite_difference})")
        return 0 if res.agree else 1
    elif check == "proportionality":
        v = A.check_proportionality(model, args.k, grid, tol if tol is not None else A.QUAD_TOL)
    elif check == "characterization":
        v = A.check_characterization(model, args.kind, grid, tol if tol is not None else 1e-8)
    elif check == "compare":
        v = A.compare_ccdfex(model, _model(args.model_b), grid, tol if tol is not None else A.QUAD_TOL, verify_premise=args.verify_premise)
    elif check == "brhr-ordering":
        v = A.check_brhr_ordering(model, _model(args.model_b), grid, tol if tol is not None else A.QUAD_TOL)
    elif check == "cprhr":
        v = A.check_cprhr(model, args.theta, grid, tol if tol is not None else A.QUAD_TOL)
    elif check == "dispersive":
        v = A.check_dispersive(model, args.c, grid, tol if tol is not None else A.QUAD_TOL)
    elif check == "zeta":
        v = A.check_zeta_representation(model, grid, args.mc_n, args.seed, args.sigmas)
    elif check == "conditional":
        other = _model(args.model_b) if args.model_b else None
        v = A.check_conditional_bounds(model, grid, tol if tol is not None else A.CLOSED_TOL, other=other)
    else:
        v = A.check_derivative_identity(model, grid, tol if tol is not None else 1e-4, conditional=args.conditional)
    if args.out:
        _emit(render_report(v, args.format), args.out)
    status = "holds" if v.holds else "fails"
    print(
        f"{v.check}: {status} on {v.checked} evaluations; worst margin {_fmt(v.worst_violation)} "
        f"(tol {_fmt(v.tolerance)}, premise {v.premise}, {len(v.counterexamples)} counterexamples)"
    )
    return 0 if v.holds else 1


def cmd_gof(args) -> int:
    s = read_paired_csv(args.data, args.col1, args.col2)
    reports = [gof_report(s.x1, str(args.col1)), gof_report(s.x2, str(args.col2))]
    _emit(render_report(reports, args.format), args.out)
    return 0


def cmd_catalog(args) -> int:
    width = max(len(k) for k in CATALOG)
    for name, text in CATALOG.items():
        print(f"{name:<{width}}  {text}")
    print()
    print(GRAMMAR.strip())
    return 0


FIGURE_DEFAULTS = {
    "fig1": "power:m=2,n=2,theta=-1.5",
    "fig2": "gumbeluniform:theta=-0.2",
    "fig3": "sumuniform",
    "fig4": "uniform",
}


def emit_figure_grid(kind: str, model_spec: str | None = None, *, ts=None, pairs=None, model_b: str | None = None,
                     n: int = 100, seed: int = 0) -> str:
    """CSV grid for an external plot.

    fig1: EIT-bound margins ``J_i + m_i/2`` along ``t1 = t2 = t``.
    fig2: entropy-bound margins ``(H_i - m_i)/2 - J_i`` along the diagonal.
    fig3: ordering gaps ``J_i(model) - J_i(model_b)`` along the diagonal
    (default sumuniform against uniform).
    fig4: truth, kernel and empirical estimates at ``pairs`` from one seeded
    sample of size ``n``.
    """
    if kind not in FIGURE_DEFAULTS:
        raise UsageError(f"unknown figure kind {kind!r}; choose from {', '.join(FIGURE_DEFAULTS)}")
    model = parse_model(model_spec or FIGURE_DEFAULTS[kind])
    if ts is None:
        ts = [k / 10 for k in range(1, 10)]
    if kind == "fig1":
        rows = [(t, *(M.ccdfex(model, i, (t, t)) + 0.5 * M.eit(model, i, (t, t)) for i in (1, 2))) for t in ts]
        return _csv(["t", "zeta1", "zeta2"], rows)
    if kind == "fig2":
        rows = []
        for t in ts:
            p = (t, t)
            rows.append((t, *(0.5 * (M.failure_entropy(model, i, p) - M.eit(model, i, p)) - M.ccdfex(model, i, p) for i in (1, 2))))
        return _csv(["t", "xi1", "xi2"], rows)
    if kind == "fig3":
        other = parse_model(model_b or "uniform")
        rows = [(t, *(M.ccdfex(model, i, (t, t)) - M.ccdfex(other, i, (t, t)) for i in (1, 2))) for t in ts]
        return _csv(["t", "gap1", "gap2"], rows)
    pairs = [M.TimePair(*p) for p in (pairs or [(t, t) for t in ts])]
    s = sample(model, n, seed)
    h = BandwidthSpec().resolve(s)
    truth = oracle_truth(StudyConfig(model=model, grid=tuple(pairs), truth="closed_form"))
    rows = [(p.t1, p.t2, truth[p], kernel_ccdfex(s, h, 1, p), empirical_ccdfex(s, 1, p)) for p in pairs]
    return _csv(["t1", "t2", "truth", "kernel", "empirical"], rows)


def cmd_figure(args) -> int:
    ts = _floats(args.t_values) if args.t_values else None
    pairs = [_pair(p) for p in args.pairs.split(";") if p.strip()] if args.pairs else None
    try:
        text = emit_figure_grid(args.kind, args.model, ts=ts, pairs=pairs, model_b=args.model_b, n=args.n, seed=args.seed)
    except ModelSpecError as exc:
        raise UsageError(str(exc)) from None
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    epilog = "model specifications:\n" + GRAMMAR
    p = argparse.ArgumentParser(prog="ccdfex", description="Bivariate failure extropy toolkit.", epilog=epilog, formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, **kw):
        return sub.add_parser(name, help=help_, description=help_, epilog=epilog, formatter_class=fmt, **kw)

    def quad_flags(sp):
        sp.add_argument("--abs-tol", type=float, default=1e-10, help="quadrature absolute tolerance")
        sp.add_argument("--rel-tol", type=float, default=1e-10, help="quadrature relative tolerance")
        sp.add_argument("--max-depth", type=int, default=50, help="maximum bisection depth")

    c = add("compute", "evaluate a measure of a model at a time pair")
    c.add_argument("--model", required=True, help="model specification")
    c.add_argument(
        "--measure",
        default="ccdfex",
        choices=["ccdfex", "closed", "df", "brhr", "eit", "entropy", "cond-ccdfex", "cond-brhr", "cond-eit"],
    )
    c.add_argument("--i", type=int, default=1, choices=[1, 2], help="component")
    c.add_argument("--t", required=True, help="time pair t1,t2")
    c.add_argument("--kappa", type=float, default=0.5, help="prefactor of the conditional CCDFEx (0.5 or 1)")
    c.add_argument("--quadrature", action="store_true", help="ignore the closed form")
    quad_flags(c)
    c.set_defaults(func=cmd_compute)

    e = add("estimate", "estimate CCDFEx from data or a seeded simulated sample")
    e.add_argument("--data", help="CSV of paired lifetimes")
    e.add_argument("--col1", default="0", help="first column (index or header name)")
    e.add_argument("--col2", default="1", help="second column (index or header name)")
    e.add_argument("--model", help="simulate from this model instead of reading data")
    e.add_argument("--n", type=int, default=100, help="simulated sample size")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--estimator", default="both", choices=["empirical", "kernel", "both"])
    e.add_argument("--bandwidth", default="scott", help="'scott' or a fixed positive value")
    e.add_argument("--i", type=int, default=1, choices=[1, 2])
    e.add_argument("--t", required=True, help="time pairs t1,t2;t1,t2;...")
    e.add_argument("--format", default="csv", choices=["csv", "json"])
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    s = add("simulate", "Monte Carlo bias/MSE study of the estimators")
    s.add_argument("--config", default="default", help="default or quick")
    s.add_argument("--model", help="model specification (default downton:mean1=2,mean2=0.5,rho=0.5)")
    s.add_argument("--sizes", help="comma-separated sample sizes")
    s.add_argument("--replications", type=int)
    s.add_argument("--grid", help="time pairs t1,t2;t1,t2;...")
    s.add_argument("--estimators", help="empirical,kernel")
    s.add_argument("--i", type=int, default=1, choices=[1, 2])
    s.add_argument("--seed", type=int, default=StudyConfig.seed)
    s.add_argument("--bandwidth", default="scott")
    s.add_argument("--truth", default="oracle_df_quadrature", choices=["oracle_df_quadrature", "closed_form"])
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--format", default="csv", choices=["csv", "json", "table"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    for name in ("verify", "order-check"):
        v = add(name, "check a bound, ordering or characterization on a grid")
        v.add_argument("--check", required=True, choices=CHECKS)
        v.add_argument("--model", required=True)
        v.add_argument("--model-b", help="second model for compare/brhr-ordering/conditional")
        v.add_argument("--grid", default="default", help="default, grid:N, diag:N, table or t1,t2;t1,t2;...")
        v.add_argument("--tol", type=float, help="tolerance (defaults depend on the check)")
        v.add_argument("--i", type=int, default=1, choices=[1, 2])
        v.add_argument("--k", type=float, default=1.0, help="proportionality constant")
        v.add_argument("--kind", default="power", choices=["power", "gumbel_uniform"])
        v.add_argument("--theta", type=float, default=2.0, help="CPRHR exponent")
        v.add_argument("--c", type=float, default=2.0, help="dilation scale")
        v.add_argument("--mc-n", type=int, default=100_000)
        v.add_argument("--sigmas", type=float, default=3.0)
        v.add_argument("--seed", type=int, default=0)
        v.add_argument("--verify-premise", action="store_true")
        v.add_argument("--conditional", action="store_true", help="use the conditional measures")
        v.add_argument("--format", default="json", choices=["csv", "json"])
        v.add_argument("--out", help="write the verdict report here")
        v.set_defaults(func=cmd_verify)

    g = add("gof", "exponential fit and Anderson-Darling test per column")
    g.add_argument("--data", required=True)
    g.add_argument("--col1", default="0")
    g.add_argument("--col2", default="1")
    g.add_argument("--format", default="csv", choices=["csv", "json"])
    g.add_argument("--out")
    g.set_defaults(func=cmd_gof)

    k = add("catalog", "list the model catalog and the specification grammar")
    k.set_defaults(func=cmd_catalog)

    f = add("figure", "write CSV grids for plotting")
    f.add_argument("--kind", required=True, choices=list(FIGURE_DEFAULTS))
    f.add_argument("--model")
    f.add_argument("--model-b")
    f.add_argument("--t-values", help="comma-separated diagonal points")
    f.add_argument("--pairs", help="time pairs for fig4")
    f.add_argument("--n", type=int, default=100)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out")
    f.set_defaults(func=cmd_figure)
    return p


def _col(value: str):
    return int(value) if value.isdigit() else value


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name in ("col1", "col2"):
        if hasattr(args, name):
            setattr(args, name, _col(getattr(args, name)))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ccdfex {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (CcdfexError, ValueError, OSError, TypeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
