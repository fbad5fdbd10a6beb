"""Reading paired lifetimes, exponential goodness of fit and report files."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .distributions import PairedSample

__all__ = [
    "GofReport",
    "read_paired_csv",
    "exp_fit",
    "ad_test_exponential",
    "gof_report",
    "write_report",
    "read_report",
    "STEPHENS_EXPONENTIAL",
]

# Upper-tail critical values of the modified statistic A*(1 + 0.6/n) for the
# exponential with estimated rate (Stephens 1974), as (alpha, critical value).
STEPHENS_EXPONENTIAL = (
    (0.15, 0.922),
    (0.10, 1.078),
    (0.05, 1.341),
    (0.025, 1.606),
    (0.01, 1.957),
)
U_CLIP = 1e-12


@dataclass(frozen=True)
class GofReport:
    column: str
    lambda_hat: float
    loglik: float
    aic: float
    bic: float
    ad_stat: float
    p_value: float


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_paired_csv(path: str | Path, col1: int | str = 0, col2: int | str = 1) -> PairedSample:
    """Paired lifetimes from a comma-separated file.

    A first row that does not parse as numbers is taken as a header, and
    columns may then be named. Every error message names the offending line.
    """
    with open(path, newline="") as fh:
        rows = [(k + 1, rec) for k, rec in enumerate(csv.reader(fh)) if any(cell.strip() for cell in rec)]
    if not rows:
        raise ValueError(f"{path}: file is empty")
    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    idx = []
    for col in (col1, col2):
        if isinstance(col, str) and not col.isdigit():
            if header is None or col not in header:
                raise ValueError(f"{path}: no column named {col!r}")
            idx.append(header.index(col))
        else:
            idx.append(int(col))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    pairs = []
    for line, rec in rows:
        vals = []
        for c in idx:
            if c >= len(rec) or not rec[c].strip():
                raise ValueError(f"{path}:{line}: missing value in column {c}")
            try:
                v = float(rec[c])
            except ValueError:
                raise ValueError(f"{path}:{line}: malformed number {rec[c]!r}") from None
            if not math.isfinite(v):
                raise ValueError(f"{path}:{line}: non-finite value {rec[c]!r}")
            if v < 0:
                raise ValueError(f"{path}:{line}: negative lifetime {v}")
            vals.append(v)
        pairs.append(vals)
    return PairedSample.from_rows(pairs)


def _positive(data: Sequence[float]) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("need at least one observation")
    if not np.all(x > 0) or not np.all(np.isfinite(x)):
        raise ValueError("exponential fitting needs positive finite data")
    return x


def exp_fit(data: Sequence[float]) -> tuple[float, float, float, float]:
    """Exponential rate MLE with ``(lambda_hat, loglik, aic, bic)``."""
    x = _positive(data)
    n = x.size
    lam = 1.0 / float(np.mean(x))
    loglik = n * math.log(lam) - lam * float(np.sum(x))
    return lam, loglik, 2.0 - 2.0 * loglik, math.log(n) - 2.0 * loglik


def _p_value(a_star: float) -> float:
    """Log-linear interpolation of the tail probability in the critical table."""
    alphas = np.log([a for a, _ in STEPHENS_EXPONENTIAL])
    crit = np.array([c for _, c in STEPHENS_EXPONENTIAL])
    if a_star <= crit[0]:
        k = 0
    elif a_star >= crit[-1]:
        k = len(crit) - 2
    else:
        k = int(np.searchsorted(crit, a_star)) - 1
    slope = (alphas[k + 1] - alphas[k]) / (crit[k + 1] - crit[k])
    return float(min(1.0, max(0.0, math.exp(alphas[k] + slope * (a_star - crit[k])))))


def ad_test_exponential(data: Sequence[float]) -> tuple[float, float]:
    """Anderson-Darling statistic against the fitted exponential, and its p-value.

    The p-value comes from the modified statistic ``A^2 (1 + 0.6/n)``
    interpolated in :data:`STEPHENS_EXPONENTIAL`; beyond the table it is
    extrapolated and clipped to ``[0, 1]``.
    """
    x = np.sort(_positive(data))
    n = x.size
    lam = 1.0 / float(np.mean(x))
    u = -np.expm1(-lam * x)
    if np.any(u < U_CLIP) or np.any(u > 1.0 - U_CLIP):
        warnings.warn("fitted CDF values at 0 or 1 were clipped", RuntimeWarning, stacklevel=2)
        u = np.clip(u, U_CLIP, 1.0 - U_CLIP)
    k = np.arange(1, n + 1)
    a2 = -n - float(np.sum((2 * k - 1) * (np.log(u) + np.log1p(-u[::-1])))) / n
    return a2, _p_value(a2 * (1.0 + 0.6 / n))


def gof_report(data: Sequence[float], column: str = "x") -> GofReport:
    lam, ll, aic, bic = exp_fit(data)
    a2, p = ad_test_exponential(data)
    return GofReport(str(column), lam, ll, aic, bic, a2, p)


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _gof_rows(reports: Sequence[GofReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(GofReport)])
    for r in reports:
        w.writerow([r.column] + [repr(getattr(r, f.name)) for f in fields(GofReport)[1:]])
    return buf.getvalue()


def _verdict_csv(v) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "holds", "checked", "worst_violation", "tolerance", "premise"])
    w.writerow([v.check, v.holds, v.checked, repr(v.worst_violation), repr(v.tolerance), v.premise])
    w.writerow([])
    w.writerow(["index", "t1", "t2", "component", "margin"])
    for c in v.counterexamples:
        w.writerow([c.index, repr(c.point.t1), repr(c.point.t2), c.component, repr(c.margin)])
    return buf.getvalue()


def render_report(report, fmt: Literal["csv", "json"] = "csv") -> str:
    """Text form of a GofReport (or list of them), StudyReport or OrderingVerdict."""
    from .analysis import OrderingVerdict
    from .simulation import StudyReport

    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(report, GofReport):
        report = [report]
    if isinstance(report, (list, tuple)) and all(isinstance(r, GofReport) for r in report):
        if fmt == "csv":
            return _gof_rows(report)
        return json.dumps([asdict(r) for r in report], indent=2) + "\n"
    if isinstance(report, StudyReport):
        if fmt == "csv":
            return report.to_csv()
        body = {"metadata": report.metadata, "rows": [asdict(r) for r in report.rows]}
        return json.dumps(_json_safe(body), indent=2) + "\n"
    if isinstance(report, OrderingVerdict):
        if fmt == "csv":
            return _verdict_csv(report)
        return json.dumps(_json_safe(report.to_dict()), indent=2) + "\n"
    raise TypeError(f"cannot serialize {type(report).__name__}")


def write_report(report, path: str | Path, fmt: Literal["csv", "json"] = "csv") -> None:
    text = render_report(report, fmt)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_report(path: str | Path, kind: Literal["gof", "study", "verdict"]):
    """Parse a file written by :func:`write_report` (json for verdicts)."""
    from .simulation import StudyReport, StudyRow

    text = Path(path).read_text()
    is_json = text.lstrip().startswith(("{", "["))
    if kind == "gof":
        if is_json:
            return [GofReport(**d) for d in json.loads(text)]
        rows = list(csv.reader(io.StringIO(text)))
        return [GofReport(r[0], *map(float, r[1:])) for r in rows[1:] if r]
    if kind == "study":
        if is_json:
            body = json.loads(text)
            rows = [StudyRow(**{k: (float(v) if isinstance(v, str) and k not in ("estimator",) else v) for k, v in d.items()}) for d in body["rows"]]
            return StudyReport(rows, body["metadata"])
        return StudyReport.from_csv(text)
    if kind == "verdict":
        if not is_json:
            raise ValueError("verdicts are read back from json")
        return json.loads(text)
    raise ValueError(f"unknown report kind {kind!r}")
