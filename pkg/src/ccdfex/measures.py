"""Reliability measures of a bivariate model evaluated at a time pair ``(t1, t2)``.

All integrals run from the lower integration limit of component ``i`` (the
support bound, or a truncation floor for infinite supports) up to ``t_i``.
Component ``i`` varies while the other coordinate stays fixed at ``t_j``.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .distributions import BivariateModel, _diff_step, _other, conditional_df, sample
from .errors import DegenerateConditioningError
from .numerics import DEFAULT_QUAD, QuadSpec, central_diff, integrate_adaptive

__all__ = [
    "TimePair",
    "ExtropyVector",
    "ccdfex",
    "ccdfex_vector",
    "univariate_dfe",
    "brhr",
    "eit",
    "zeta",
    "failure_entropy",
    "conditional_ccdfex",
    "conditional_brhr",
    "conditional_eit",
    "recover_brhr",
    "zeta_expectation_mc",
]


class TimePair(NamedTuple):
    t1: float
    t2: float

    def component(self, i: int) -> float:
        return self.t1 if i == 1 else self.t2

    def replace_component(self, i: int, value: float) -> TimePair:
        return TimePair(value, self.t2) if i == 1 else TimePair(self.t1, value)


class ExtropyVector(NamedTuple):
    j1: float
    j2: float


def _pair(t: Sequence[float]) -> TimePair:
    t1, t2 = t
    return TimePair(float(t1), float(t2))


def _section(model: BivariateModel, i: int, t: TimePair) -> Callable[[float], float]:
    """``x -> F(x, t_j)`` for ``i = 1`` or ``x -> F(t_j, x)`` for ``i = 2``."""
    if i == 1:
        return lambda x: float(model.df(x, t.t2))
    return lambda x: float(model.df(t.t1, x))


def _lower(model: BivariateModel, i: int, lower: float | None) -> float:
    return model.lower_limit(i) if lower is None else float(lower)


def _joint_mass(model: BivariateModel, t: TimePair) -> float:
    mass = float(model.df(t.t1, t.t2))
    if not mass > 0:
        raise DegenerateConditioningError(f"F{tuple(t)} = {mass}: conditioning event has no mass")
    return mass


def ccdfex(
    model: BivariateModel,
    i: int,
    t: Sequence[float],
    *,
    lower: float | None = None,
    spec: QuadSpec = DEFAULT_QUAD,
    use_closed: bool = True,
) -> float:
    """Component ``i`` of the conditional dynamic failure extropy.

    ``-1/2 * int_lower^{t_i} (F(x_i, t_j) / F(t1, t2))^2 dx_i``. The model's
    closed form is used when available (and ``use_closed``), quadrature otherwise.
    """
    _other(i)
    t = _pair(t)
    mass = _joint_mass(model, t)
    if use_closed and model.closed_ccdfex is not None:
        value = model.closed_ccdfex(i, t.t1, t.t2, lower)
        if value is not None:
            return float(value)
    section = _section(model, i, t)
    lo = _lower(model, i, lower)
    return -0.5 * integrate_adaptive(lambda x: (section(x) / mass) ** 2, lo, t.component(i), spec)


def ccdfex_vector(model: BivariateModel, t: Sequence[float], **kwargs) -> ExtropyVector:
    return ExtropyVector(ccdfex(model, 1, t, **kwargs), ccdfex(model, 2, t, **kwargs))


def univariate_dfe(df1: Callable[[float], float], lo: float, t: float, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """Dynamic failure extropy ``-1/(2 F(t)^2) int_lo^t F(x)^2 dx`` of a univariate DF."""
    ft = float(df1(t))
    if not ft > 0:
        raise DegenerateConditioningError(f"F({t}) = {ft}")
    return -0.5 * integrate_adaptive(lambda x: float(df1(x)) ** 2, lo, t, spec) / ft**2


def brhr(model: BivariateModel, i: int, t: Sequence[float], *, h: float | None = None) -> float:
    """Reversed hazard component ``d/dt_i log F(t1, t2)``.

    Analytic when the model supplies it, otherwise a central difference of
    ``log F`` with step ``h`` (default ``1e-5`` times the support span).
    """
    _other(i)
    t = _pair(t)
    _joint_mass(model, t)
    if model.brhr is not None and h is None:
        return float(model.brhr(i, t.t1, t.t2))
    section = _section(model, i, t)
    ti = t.component(i)
    step = h if h is not None else _diff_step(model, i, ti, 1e-5)
    return central_diff(lambda x: math.log(section(x)), ti, step)


def eit(
    model: BivariateModel,
    i: int,
    t: Sequence[float],
    *,
    lower: float | None = None,
    spec: QuadSpec = DEFAULT_QUAD,
) -> float:
    """Expected inactivity time ``E(t_i - X_i | X1 < t1, X2 < t2)``."""
    _other(i)
    t = _pair(t)
    mass = _joint_mass(model, t)
    lo = _lower(model, i, lower)
    return integrate_adaptive(_section(model, i, t), lo, t.component(i), spec) / mass


def zeta(model: BivariateModel, i: int, c: float, d: float, t_other: float, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """``int_c^d F(x, t_other) dx`` along component ``i``."""
    _other(i)
    if c > d:
        raise ValueError(f"zeta needs c <= d, got c={c}, d={d}")
    t = TimePair(d, t_other) if i == 1 else TimePair(t_other, d)
    return integrate_adaptive(_section(model, i, t), c, d, spec)


def failure_entropy(
    model: BivariateModel,
    i: int,
    t: Sequence[float],
    *,
    lower: float | None = None,
    spec: QuadSpec = DEFAULT_QUAD,
) -> float:
    """Dynamic failure entropy ``-int (F/F(t)) log(F/F(t)) dx_i`` (nonnegative)."""
    _other(i)
    t = _pair(t)
    mass = _joint_mass(model, t)
    section = _section(model, i, t)

    def integrand(x):
        u = section(x) / mass
        return -u * math.log(u) if u > 0 else 0.0

    return integrate_adaptive(integrand, _lower(model, i, lower), t.component(i), spec)


# ---------------------------------------------------------------------------
# conditionally specified versions: X_i | X_i < t_i, X_j = t_j
# ---------------------------------------------------------------------------


def _conditional_section(model: BivariateModel, i: int, t: TimePair) -> Callable[[float], float]:
    tj = t.component(_other(i))
    return lambda x: float(conditional_df(model, i, x, tj))


def _conditional_mass(model: BivariateModel, i: int, t: TimePair) -> float:
    mass = float(conditional_df(model, i, t.component(i), t.component(_other(i))))
    if not mass > 0:
        raise DegenerateConditioningError(f"conditional DF vanishes at {tuple(t)}")
    return mass


def conditional_ccdfex(
    model: BivariateModel,
    i: int,
    t: Sequence[float],
    *,
    kappa: float = 0.5,
    spec: QuadSpec = DEFAULT_QUAD,
) -> float:
    """``-kappa * int (F_i*(x|t_j) / F_i*(t_i|t_j))^2 dx_i``.

    ``kappa=0.5`` makes independent components reduce to the univariate
    dynamic failure extropy; ``kappa=1`` is the unhalved variant.
    """
    _other(i)
    t = _pair(t)
    mass = _conditional_mass(model, i, t)
    section = _conditional_section(model, i, t)
    integral = integrate_adaptive(lambda x: (section(x) / mass) ** 2, model.lower_limit(i), t.component(i), spec)
    return -kappa * integral


def conditional_brhr(model: BivariateModel, i: int, t: Sequence[float], *, h: float | None = None) -> float:
    """``d/dt_i log F_i*(t_i | t_j)`` by central differences."""
    _other(i)
    t = _pair(t)
    _conditional_mass(model, i, t)
    section = _conditional_section(model, i, t)
    ti = t.component(i)
    step = h if h is not None else _diff_step(model, i, ti, 1e-5)
    return central_diff(lambda x: math.log(section(x)), ti, step)


def conditional_eit(model: BivariateModel, i: int, t: Sequence[float], *, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """``E(t_i - X_i | X_i < t_i, X_j = t_j)``."""
    _other(i)
    t = _pair(t)
    mass = _conditional_mass(model, i, t)
    section = _conditional_section(model, i, t)
    return integrate_adaptive(section, model.lower_limit(i), t.component(i), spec) / mass


def recover_brhr(
    jfun: Callable[[float], float],
    i: int,
    t: Sequence[float],
    h: float | None = None,
    *,
    lower: float = 0.0,
) -> float:
    """Reversed hazard recovered from CCDFEx alone.

    Inverts ``dJ/dt_i = -2 J h_i - 1/2``; ``jfun`` maps ``t_i`` to the CCDFEx
    with the other coordinate held fixed.
    """
    _other(i)
    t = _pair(t)
    ti = t.component(i)
    j = float(jfun(ti))
    if j == 0.0:
        raise DegenerateConditioningError("CCDFEx vanishes; reversed hazard is not recoverable")
    step = h if h is not None else 1e-4 * (ti - lower)
    return -(central_diff(jfun, ti, step) + 0.5) / (2.0 * j)


def _cumulative_section(model: BivariateModel, i: int, t: TimePair, lo: float, cells: int = 1024):
    """Knots and cumulative integral of ``F(., t_j)`` from ``lo`` on a fine grid."""
    knots = np.linspace(lo, t.component(i), cells + 1)
    nodes, weights = np.polynomial.legendre.leggauss(6)
    a, b = knots[:-1], knots[1:]
    xs = 0.5 * (b - a)[:, None] * nodes + 0.5 * (a + b)[:, None]
    tj = t.component(_other(i))
    try:
        vals = model.df(xs, np.full_like(xs, tj)) if i == 1 else model.df(np.full_like(xs, tj), xs)
        vals = np.asarray(vals, dtype=float).reshape(xs.shape)
    except Exception:
        section = _section(model, i, t)
        vals = np.array([[section(x) for x in row] for row in xs])
    cell = 0.5 * (b - a) * (vals @ weights)
    return knots, np.concatenate([[0.0], np.cumsum(cell)])


def zeta_expectation_mc(model: BivariateModel, i: int, t: Sequence[float], n: int, seed) -> tuple[float, float, int]:
    """Monte Carlo estimate of ``E[zeta_i(X_i, t_i; t_j) | X1 < t1, X2 < t2]``.

    Returns ``(mean, standard_error, accepted_draws)``.
    """
    _other(i)
    t = _pair(t)
    draws = sample(model, n, seed)
    keep = (draws.x1 < t.t1) & (draws.x2 < t.t2)
    accepted = int(keep.sum())
    if accepted < 2:
        return math.nan, math.nan, accepted
    xi = draws.column(i)[keep]
    lo = model.lower_limit(i)
    knots, cum = _cumulative_section(model, i, t, lo)
    z = cum[-1] - np.interp(np.maximum(xi, lo), knots, cum)
    return float(z.mean()), float(z.std(ddof=1) / math.sqrt(accepted)), accepted
