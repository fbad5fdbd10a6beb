"""Monte Carlo bias/MSE study of the CCDFEx estimators.

Each replication draws a fresh sample from the model with a seed derived from
``(seed, size index, replication index)``, evaluates every estimator at every
grid point and stores the estimate in a fixed slot. Aggregation happens only
after all slots are filled, so the report does not depend on scheduling.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np

from .distributions import BivariateModel, MoranDowntonExponential, _other, sample
from .errors import CcdfexError, ConvergenceError, DegenerateConditioningError
from .estimators import BandwidthSpec, empirical_ccdfex, kernel_ccdfex
from .measures import TimePair, ccdfex
from .numerics import QuadSpec, integrate_adaptive

__all__ = [
    "TABLE_PAIRS",
    "StudyConfig",
    "StudyRow",
    "StudyReport",
    "SummaryRow",
    "density_df",
    "oracle_truth",
    "run_study",
    "summarize",
]

TABLE_PAIRS = (
    TimePair(0.57, 0.59),
    TimePair(0.60, 0.60),
    TimePair(0.61, 0.73),
    TimePair(0.65, 0.78),
    TimePair(0.71, 0.73),
    TimePair(0.81, 0.83),
    TimePair(0.93, 0.95),
)
ESTIMATORS = ("empirical", "kernel")
CSV_HEADER = ("estimator", "t1", "t2", "n", "bias", "mse", "truth", "excluded")
FLAG_FRACTION = 0.10


@dataclass(frozen=True)
class StudyConfig:
    """Settings of a simulation study.

    ``truth`` selects how the reference value is obtained:
    ``oracle_df_quadrature`` integrates the model density for the DF, while
    ``closed_form`` uses the model's closed-form CCDFEx (or quadrature of its
    DF). ``truth_override`` replaces the computed truth by fixed values.
    """

    model: BivariateModel = field(default_factory=lambda: MoranDowntonExponential(2.0, 0.5, 0.5))
    sizes: tuple[int, ...] = (80, 150, 200, 250)
    replications: int = 1000
    grid: tuple[TimePair, ...] = TABLE_PAIRS
    estimators: tuple[str, ...] = ESTIMATORS
    component: int = 1
    seed: int = 20240601
    truth: Literal["oracle_df_quadrature", "closed_form"] = "oracle_df_quadrature"
    bandwidth: BandwidthSpec = BandwidthSpec()
    truth_override: float | Mapping[TimePair, float] | None = None
    workers: int = 1

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes or any(n < 1 for n in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sizes must be positive and strictly increasing")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        grid = tuple(TimePair(float(a), float(b)) for a, b in self.grid)
        if not grid:
            raise ValueError("grid must be nonempty")
        if not self.estimators or any(e not in ESTIMATORS for e in self.estimators):
            raise ValueError(f"estimators must be a nonempty subset of {ESTIMATORS}")
        if self.truth not in ("oracle_df_quadrature", "closed_form"):
            raise ValueError(f"unknown truth mode {self.truth!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        _other(self.component)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "estimators", tuple(self.estimators))


@dataclass(frozen=True)
class StudyRow:
    estimator: str
    t1: float
    t2: float
    n: int
    bias: float
    mse: float
    truth: float
    excluded: int
    flagged: bool = False


@dataclass
class StudyReport:
    rows: list[StudyRow]
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.estimator, repr(r.t1), repr(r.t2), r.n, repr(r.bias), repr(r.mse), repr(r.truth), r.excluded])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> StudyReport:
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected study header {header}")
        rows = []
        for rec in reader:
            if not rec:
                continue
            est, t1, t2, n, bias, mse, truth, excl = rec
            rows.append(StudyRow(est, float(t1), float(t2), int(n), float(bias), float(mse), float(truth), int(excl)))
        return cls(rows)

    def cell(self, estimator: str, t: Sequence[float], n: int) -> StudyRow:
        t1, t2 = t
        for r in self.rows:
            if r.estimator == estimator and r.n == n and r.t1 == t1 and r.t2 == t2:
                return r
        raise KeyError((estimator, tuple(t), n))

    def table(self) -> str:
        """Text table with one block per estimator: bias, MSE in parentheses below."""
        out = []
        sizes = sorted({r.n for r in self.rows})
        for est in dict.fromkeys(r.estimator for r in self.rows):
            comp = self.metadata.get("component", 1)
            out.append(f"Bias and MSE of the {est} estimator of J_{comp}(t1, t2)")
            out.append(f"{'(t1, t2)':<14}" + "".join(f"{n:>13}" for n in sizes))
            pairs = list(dict.fromkeys((r.t1, r.t2) for r in self.rows if r.estimator == est))
            for t in pairs:
                cells = [self.cell(est, t, n) for n in sizes]
                out.append(f"{f'({t[0]:.2f}, {t[1]:.2f})':<14}" + "".join(f"{c.bias:>13.5f}" for c in cells))
                out.append(f"{'':<14}" + "".join(f"{f'({c.mse:.2e})':>13}" for c in cells))
            out.append("")
        return "\n".join(out)


# ---------------------------------------------------------------------------
# truth
# ---------------------------------------------------------------------------


def density_df(model: BivariateModel, t1: float, t2: float, spec: QuadSpec) -> float:
    """DF by iterated quadrature of the model density from the lower limits."""
    if model.pdf is None:
        raise CcdfexError(f"{model.name} has no density for the quadrature oracle")
    lo1, lo2 = model.lower_limit(1), model.lower_limit(2)
    inner = lambda x: integrate_adaptive(lambda y: float(model.pdf(x, y)), lo2, t2, spec)
    return integrate_adaptive(inner, lo1, t1, spec)


def _oracle_point(model: BivariateModel, i: int, t: TimePair, tol: float) -> float:
    inner = QuadSpec(abs_tol=tol * 1e-3, rel_tol=tol * 1e-3, max_depth=60)
    outer = QuadSpec(abs_tol=tol, rel_tol=tol, max_depth=60)
    mass = density_df(model, t.t1, t.t2, inner)
    if not mass > 0:
        raise DegenerateConditioningError(f"oracle DF vanishes at {tuple(t)}")
    if i == 1:
        section = lambda x: density_df(model, x, t.t2, inner)
    else:
        section = lambda x: density_df(model, t.t1, x, inner)
    return -0.5 * integrate_adaptive(lambda x: (section(x) / mass) ** 2, model.lower_limit(i), t.component(i), outer)


def oracle_truth(config: StudyConfig, tol: float = 1e-8) -> dict[TimePair, float]:
    """Reference CCDFEx at every grid point of ``config``.

    Raises
    ------
    ConvergenceError
        If the oracle quadrature does not converge.
    """
    out = {}
    for t in config.grid:
        if config.truth == "oracle_df_quadrature" and config.model.pdf is not None:
            try:
                out[t] = _oracle_point(config.model, config.component, t, tol)
            except ConvergenceError as exc:
                raise ConvergenceError(f"oracle diverged at {tuple(t)}: {exc}") from exc
        else:
            out[t] = ccdfex(config.model, config.component, t)
    return out


def _truths(config: StudyConfig) -> dict[TimePair, float]:
    ov = config.truth_override
    if ov is None:
        return oracle_truth(config)
    if isinstance(ov, Mapping):
        return {t: float(ov[t]) for t in config.grid}
    return {t: float(ov) for t in config.grid}


# ---------------------------------------------------------------------------
# replications
# ---------------------------------------------------------------------------


def _estimate(kind: str, s, h: float, i: int, t: TimePair) -> float:
    if kind == "empirical":
        return empirical_ccdfex(s, i, t)
    return kernel_ccdfex(s, h, i, t)


def _run_block(config: StudyConfig, n_idx: int, reps: range) -> np.ndarray:
    """Estimates of shape (len(reps), estimators, grid); NaN marks undefined."""
    out = np.full((len(reps), len(config.estimators), len(config.grid)), np.nan)
    n = config.sizes[n_idx]
    for row, r in enumerate(reps):
        s = sample(config.model, n, np.random.SeedSequence(config.seed, spawn_key=(n_idx, r)))
        h = None
        for e, kind in enumerate(config.estimators):
            if kind == "kernel":
                try:
                    h = config.bandwidth.resolve(s)
                except ValueError:
                    continue
            for g, t in enumerate(config.grid):
                try:
                    out[row, e, g] = _estimate(kind, s, h, config.component, t)
                except DegenerateConditioningError:
                    pass
    return out


def _blocks(config: StudyConfig, chunk: int = 50):
    for n_idx in range(len(config.sizes)):
        for start in range(0, config.replications, chunk):
            yield n_idx, range(start, min(start + chunk, config.replications))


def run_study(config: StudyConfig = StudyConfig()) -> StudyReport:
    """Bias and MSE of each estimator at each size and grid point."""
    truth = _truths(config)
    est = np.empty((len(config.sizes), config.replications, len(config.estimators), len(config.grid)))
    blocks = list(_blocks(config))
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_run_block, [config] * len(blocks), [b[0] for b in blocks], [b[1] for b in blocks]))
    else:
        results = [_run_block(config, n_idx, reps) for n_idx, reps in blocks]
    for (n_idx, reps), res in zip(blocks, results):
        est[n_idx, reps.start : reps.stop] = res

    rows = []
    for e, kind in enumerate(config.estimators):
        for g, t in enumerate(config.grid):
            for k, n in enumerate(config.sizes):
                vals = est[k, :, e, g]
                ok = vals[np.isfinite(vals)]
                excluded = config.replications - ok.size
                if ok.size:
                    err = ok - truth[t]
                    bias, mse = float(np.mean(err)), float(np.mean(err * err))
                else:
                    bias = mse = math.nan
                flagged = excluded > FLAG_FRACTION * config.replications
                rows.append(StudyRow(kind, t.t1, t.t2, n, bias, mse, truth[t], excluded, flagged))
    meta = {
        "seed": config.seed,
        "model": config.model.name,
        "bandwidth": config.bandwidth.mode if config.bandwidth.mode == "scott" else f"fixed={config.bandwidth.fixed_value}",
        "replications": config.replications,
        "component": config.component,
    }
    return StudyReport(rows, meta)


# ---------------------------------------------------------------------------
# summary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SummaryRow:
    n: int
    empirical_abs_bias: float
    empirical_mse: float
    kernel_abs_bias: float
    kernel_mse: float
    better_bias: str
    better_mse: str


def _better(kernel: float, empirical: float) -> str:
    if kernel == empirical:
        return "tie"
    return "kernel" if kernel < empirical else "empirical"


def summarize(report: StudyReport) -> list[SummaryRow]:
    """Per-size averages over grid points, with kernel-vs-empirical flags."""
    kinds = {r.estimator for r in report.rows}
    if not set(ESTIMATORS) <= kinds:
        raise ValueError("summary needs rows for both the empirical and the kernel estimator")
    out = []
    for n in sorted({r.n for r in report.rows}):
        stats = {}
        for kind in ESTIMATORS:
            cells = [r for r in report.rows if r.n == n and r.estimator == kind]
            stats[kind] = (float(np.mean([abs(c.bias) for c in cells])), float(np.mean([c.mse for c in cells])))
        (eb, em), (kb, km) = stats["empirical"], stats["kernel"]
        out.append(SummaryRow(n, eb, em, kb, km, _better(kb, eb), _better(km, em)))
    return out
