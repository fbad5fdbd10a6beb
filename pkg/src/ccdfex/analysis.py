"""Grid verifiers for bounds, orderings, monotonicity classes and characterizations.

Every check evaluates a *margin* at each grid point (and component); a
negative margin is a violation. A verdict holds when the smallest margin is at
least ``-tol``, and it lists the offending points in grid order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Literal, NamedTuple, Sequence

import numpy as np

from . import measures as M
from .distributions import (
    BivariateModel,
    GumbelTypeUniform,
    _diff_step,
    _other,
    _PowerFamily,
    conditional_df,
    linear_transform,
    power_transform,
)
from .errors import CcdfexError
from .measures import TimePair
from .numerics import central_diff

__all__ = [
    "Grid2",
    "Counterexample",
    "OrderingVerdict",
    "MonotonicityResult",
    "default_grid",
    "diagonal_grid",
    "uniform_grid",
    "check_eit_bound",
    "check_entropy_bound",
    "check_monotonicity_class",
    "check_proportionality",
    "check_characterization",
    "compare_ccdfex",
    "check_brhr_ordering",
    "check_cprhr",
    "check_dispersive",
    "check_zeta_representation",
    "check_conditional_bounds",
    "check_derivative_identity",
    "check_transform_monotonicity",
]

CLOSED_TOL = 1e-9
QUAD_TOL = 1e-6


@dataclass(frozen=True)
class Grid2:
    points: tuple[TimePair, ...]
    description: str = ""

    def __post_init__(self):
        pts = tuple(TimePair(float(a), float(b)) for a, b in self.points)
        if not pts:
            raise ValueError("a grid needs at least one point")
        object.__setattr__(self, "points", pts)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def validate(self, *models: BivariateModel) -> Grid2:
        for model in models:
            for p in self.points:
                if not model.support.interior(p.t1, p.t2):
                    raise ValueError(f"grid point {tuple(p)} is outside the support of {model.name}")
        return self


def _span(model: BivariateModel, i: int) -> tuple[float, float]:
    lo = model.lower_limit(i)
    hi = model.support.hi(i)
    if not math.isfinite(hi):
        # use the 99% marginal quantile as the effective upper end
        x, step = max(lo, 0.0) + 1.0, 1.0
        while model.marginal_df(i, x) < 0.99:
            x += step
            step *= 2.0
        hi = x
    return lo, hi


def uniform_grid(model: BivariateModel, k: int = 7, lo_frac: float = 0.1, hi_frac: float = 0.9) -> Grid2:
    axes = []
    for i in (1, 2):
        lo, hi = _span(model, i)
        axes.append(lo + (hi - lo) * np.linspace(lo_frac, hi_frac, k))
    pts = tuple(TimePair(a, b) for a in axes[0] for b in axes[1])
    return Grid2(pts, f"{k}x{k} grid at {lo_frac:.0%}-{hi_frac:.0%} of the support")


def default_grid(model: BivariateModel) -> Grid2:
    return uniform_grid(model, 7)


def diagonal_grid(model: BivariateModel, k: int = 50, lo_frac: float = 0.02, hi_frac: float = 0.98) -> Grid2:
    lo = max(_span(model, 1)[0], _span(model, 2)[0])
    hi = min(_span(model, 1)[1], _span(model, 2)[1])
    ts = lo + (hi - lo) * np.linspace(lo_frac, hi_frac, k)
    return Grid2(tuple(TimePair(t, t) for t in ts), f"diagonal t1=t2, {k} points")


class Counterexample(NamedTuple):
    index: int
    point: TimePair
    component: int
    margin: float


@dataclass
class OrderingVerdict:
    """Outcome of a grid check. ``worst_violation`` is the smallest margin seen."""

    check: str
    holds: bool
    checked: int
    worst_violation: float
    tolerance: float
    counterexamples: list[Counterexample] = field(default_factory=list)
    premise: str = "none"
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["counterexamples"] = [
            {"index": c.index, "t1": c.point.t1, "t2": c.point.t2, "component": c.component, "margin": c.margin}
            for c in self.counterexamples
        ]
        return out


def _verdict(
    check: str,
    records: Iterable[tuple[int, TimePair, int, float]],
    tol: float,
    *,
    premise: str = "none",
    details: dict | None = None,
) -> OrderingVerdict:
    records = sorted(records, key=lambda r: (r[0], r[2]))
    margins = [r[3] for r in records]
    worst = min(margins) if margins else 0.0
    bad = [Counterexample(idx, p, comp, m) for idx, p, comp, m in records if not m >= -tol]
    return OrderingVerdict(
        check=check,
        holds=not bad,
        checked=len(records),
        worst_violation=float(worst),
        tolerance=tol,
        counterexamples=bad,
        premise=premise,
        details=details or {},
    )


def _each(grid: Grid2, components: Sequence[int]):
    for idx, p in enumerate(grid):
        for i in components:
            yield idx, p, i


def _grid(model: BivariateModel, grid: Grid2 | Sequence | None) -> Grid2:
    if grid is None:
        return default_grid(model)
    if not isinstance(grid, Grid2):
        grid = Grid2(tuple(grid))
    return grid


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def check_eit_bound(model: BivariateModel, grid: Grid2 | None = None, tol: float = CLOSED_TOL, components=(1, 2)) -> OrderingVerdict:
    """CCDFEx is bounded below by minus half the expected inactivity time."""
    grid = _grid(model, grid).validate(model)
    recs = [(idx, p, i, M.ccdfex(model, i, p) + 0.5 * M.eit(model, i, p)) for idx, p, i in _each(grid, components)]
    return _verdict("eit-bound", recs, tol)


def check_entropy_bound(model: BivariateModel, grid: Grid2 | None = None, tol: float = CLOSED_TOL, components=(1, 2)) -> OrderingVerdict:
    """CCDFEx is bounded above by half of (failure entropy - EIT)."""
    grid = _grid(model, grid).validate(model)
    recs = []
    for idx, p, i in _each(grid, components):
        bound = 0.5 * (M.failure_entropy(model, i, p) - M.eit(model, i, p))
        recs.append((idx, p, i, bound - M.ccdfex(model, i, p)))
    return _verdict("entropy-bound", recs, tol)


# ---------------------------------------------------------------------------
# monotonicity classes
# ---------------------------------------------------------------------------


@dataclass
class MonotonicityResult:
    classification: Literal["increasing", "decreasing", "mixed"]
    criterion: str
    finite_difference: str
    agree: bool
    checked: int


def _classify(values: Sequence[float], tol: float) -> str:
    """Class of a function from the signs of its derivative samples."""
    up = all(v >= -tol for v in values)
    down = all(v <= tol for v in values)
    if up and not down:
        return "increasing"
    if down and not up:
        return "decreasing"
    if up and down:
        # flat to tolerance: both readings are true, report the weak one
        return "decreasing"
    return "mixed"


def _jfun(model: BivariateModel, i: int, p: TimePair) -> Callable[[float], float]:
    return lambda x: M.ccdfex(model, i, p.replace_component(i, x))


def _fd_slope(f: Callable[[float], float], model: BivariateModel, i: int, x: float, rel: float = 1e-4) -> float:
    return central_diff(f, x, _diff_step(model, i, x, rel))


def check_monotonicity_class(model: BivariateModel, i: int, grid: Grid2 | None = None, tol: float = QUAD_TOL) -> MonotonicityResult:
    """Classify CCDFEx in ``t_i`` two ways and require them to agree.

    The criterion ``J + 1/(4 h_i)`` is nonnegative exactly where ``J`` is
    nonincreasing in ``t_i``; the second reading differentiates ``J`` directly.
    """
    _other(i)
    grid = _grid(model, grid).validate(model)
    crit, slopes = [], []
    for p in grid:
        j = M.ccdfex(model, i, p)
        crit.append(-(j + 1.0 / (4.0 * M.brhr(model, i, p))))
        slopes.append(_fd_slope(_jfun(model, i, p), model, i, p.component(i)))
    by_crit = _classify(crit, tol)
    by_fd = _classify(slopes, tol)
    return MonotonicityResult(by_crit if by_crit == by_fd else "mixed", by_crit, by_fd, by_crit == by_fd, len(grid))


def check_transform_monotonicity(
    model: BivariateModel, mu: tuple[float, float], eta: tuple[float, float], i: int, grid: Grid2 | None = None, tol: float = QUAD_TOL
) -> OrderingVerdict:
    """Finite-difference monotone class of CCDFEx survives an increasing affine map."""
    grid = _grid(model, grid).validate(model)
    moved = linear_transform(model, mu[0], mu[1], eta[0], eta[1])
    mapped = Grid2(tuple(TimePair(mu[0] * p.t1 + eta[0], mu[1] * p.t2 + eta[1]) for p in grid))
    base = check_monotonicity_class(model, i, grid, tol)
    other = check_monotonicity_class(moved, i, mapped, tol)
    same = base.finite_difference == other.finite_difference
    recs = [(0, grid.points[0], i, 0.0 if same else -1.0)]
    return _verdict(
        "transform-monotonicity",
        recs,
        0.0,
        details={"base": base.finite_difference, "transformed": other.finite_difference},
    )


# ---------------------------------------------------------------------------
# characterizations
# ---------------------------------------------------------------------------


def check_proportionality(model: BivariateModel, k: float, grid: Grid2 | None = None, tol: float = QUAD_TOL) -> OrderingVerdict:
    """Compare ``J_1 = k J_2`` against ``h_2 = k h_1`` point by point.

    The margin is ``-max(|J_1 - k J_2|, |h_2 - k h_1|)``; ``details`` records
    whether each relation holds on its own and whether the two co-occur.
    """
    grid = _grid(model, grid).validate(model)
    recs, j_gap, h_gap = [], [], []
    for idx, p in enumerate(grid):
        a = abs(M.ccdfex(model, 1, p) - k * M.ccdfex(model, 2, p))
        b = abs(M.brhr(model, 2, p) - k * M.brhr(model, 1, p))
        j_gap.append(a)
        h_gap.append(b)
        recs.append((idx, p, 0, -max(a, b)))
    j_ok = max(j_gap) <= tol
    h_ok = max(h_gap) <= tol
    details = {
        "ccdfex_relation_holds": j_ok,
        "brhr_relation_holds": h_ok,
        "co_occur": j_ok == h_ok,
        "max_ccdfex_gap": max(j_gap),
        "max_brhr_gap": max(h_gap),
    }
    return _verdict("proportionality", recs, tol, details=details)


def check_characterization(
    model: BivariateModel,
    kind: Literal["gumbel_uniform", "power"],
    grid: Grid2 | None = None,
    tol: float = 1e-8,
) -> OrderingVerdict:
    """CCDFEx proportional to the EIT with the family's factor.

    ``gumbel_uniform``: ``J = omega_i(t_j) m_i``. ``power``:
    ``J = -C_i(t_j) m_i / 2`` with ``1/2 < C_i < 1``. Both sides are computed
    by quadrature, independently of the closed forms.
    """
    if kind == "gumbel_uniform":
        if not isinstance(model, GumbelTypeUniform):
            raise TypeError("gumbel_uniform characterization needs a GumbelTypeUniform model")
    elif kind == "power":
        if not isinstance(model, _PowerFamily):
            raise TypeError("power characterization needs a power-family model")
    else:
        raise ValueError(f"unknown characterization {kind!r}")
    grid = _grid(model, grid).validate(model)
    recs, c_range_ok = [], True
    for idx, p, i in _each(grid, (1, 2)):
        tj = p.component(_other(i))
        j = M.ccdfex(model, i, p, use_closed=False)
        m = M.eit(model, i, p)
        if kind == "gumbel_uniform":
            gap = abs(j - model.omega(i, tj) * m)
        else:
            a = model._exponent(i, tj)
            c = (1.0 + a) / (1.0 + 2.0 * a)
            if not 0.5 < c < 1.0:
                c_range_ok = False
                gap = math.inf
            else:
                gap = abs(j + 0.5 * c * m)
        recs.append((idx, p, i, -gap))
    return _verdict(f"characterization-{kind}", recs, tol, details={"factor_in_range": c_range_ok})


# ---------------------------------------------------------------------------
# orderings
# ---------------------------------------------------------------------------


def _ratio_order_holds(a: BivariateModel, b: BivariateModel, i: int, p: TimePair, conditional: bool, k: int = 24, tol: float = 1e-12) -> bool:
    """``A``'s DF ratio lies below ``B``'s on ``(lo, t_i)`` (``A`` larger in the usual order)."""
    lo = max(a.lower_limit(i), b.lower_limit(i))
    ti, tj = p.component(i), p.component(_other(i))
    xs = lo + (ti - lo) * np.linspace(0.02, 0.98, k)
    if conditional:
        fa = lambda x: float(conditional_df(a, i, x, tj))
        fb = lambda x: float(conditional_df(b, i, x, tj))
    else:
        fa = M._section(a, i, p)
        fb = M._section(b, i, p)
    ma, mb = fa(ti), fb(ti)
    return all(fa(x) / ma <= fb(x) / mb + tol for x in xs)


def compare_ccdfex(
    a: BivariateModel,
    b: BivariateModel,
    grid: Grid2 | None = None,
    tol: float = QUAD_TOL,
    *,
    verify_premise: bool = False,
) -> OrderingVerdict:
    """Does ``A >= B`` in the CCDFEx order hold on the grid?

    With ``verify_premise`` the DF-ratio (stochastic) ordering that implies the
    conclusion is checked numerically as well; otherwise it is labelled
    ``assumed``.
    """
    grid = _grid(a, grid).validate(a, b)
    recs = [(idx, p, i, M.ccdfex(a, i, p) - M.ccdfex(b, i, p)) for idx, p, i in _each(grid, (1, 2))]
    premise = "assumed"
    if verify_premise:
        ok = all(_ratio_order_holds(a, b, i, p, conditional=False) for _, p, i in _each(grid, (1, 2)))
        premise = "verified" if ok else "failed"
    return _verdict("compare", recs, tol, premise=premise)


def check_brhr_ordering(a: BivariateModel, b: BivariateModel, grid: Grid2 | None = None, tol: float = QUAD_TOL) -> OrderingVerdict:
    """If ``h_i^A <= h_i^B`` everywhere on the grid then ``B >= A`` in CCDFEx."""
    grid = _grid(a, grid).validate(a, b)
    premise_ok = all(M.brhr(a, i, p) <= M.brhr(b, i, p) + tol for _, p, i in _each(grid, (1, 2)))
    verdict = compare_ccdfex(b, a, grid, tol)
    verdict.check = "brhr-ordering"
    verdict.premise = "verified" if premise_ok else "failed"
    return verdict


def check_cprhr(base: BivariateModel, theta: float, grid: Grid2 | None = None, tol: float = QUAD_TOL) -> OrderingVerdict:
    """``F = G^theta``: CCDFEx of ``F`` dominates that of ``G`` iff ``theta > 1``."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    powered = power_transform(base, theta)
    grid = _grid(base, grid).validate(base)
    sign = 1.0 if theta >= 1 else -1.0
    recs = []
    for idx, p, i in _each(grid, (1, 2)):
        jf = M.ccdfex(powered, i, p)
        jg = M.ccdfex(base, i, p)
        recs.append((idx, p, i, sign * (jf - jg)))
    return _verdict("cprhr", recs, tol, details={"theta": theta, "direction": "J_F >= J_G" if sign > 0 else "J_F <= J_G"})


def check_dispersive(model: BivariateModel, c: float, grid: Grid2 | None = None, tol: float = QUAD_TOL) -> OrderingVerdict:
    """Dilation ``Y = c X`` (``c >= 1``) with CCDFEx of ``X`` decreasing gives ``J_Y >= J_X``.

    Components whose premise (decrease in ``t_i`` across the grid, by finite
    differences) fails are skipped and reported as not applicable.
    """
    if not c >= 1:
        raise ValueError("a dilation needs c >= 1")
    grid = _grid(model, grid).validate(model)
    dilated = linear_transform(model, c, c, 0.0, 0.0)
    recs, applicable = [], []
    for i in (1, 2):
        slopes = [_fd_slope(_jfun(model, i, p), model, i, p.component(i)) for p in grid]
        if all(s <= QUAD_TOL for s in slopes):
            applicable.append(i)
    for idx, p, i in _each(grid, applicable):
        recs.append((idx, p, i, M.ccdfex(dilated, i, p) - M.ccdfex(model, i, p)))
    premise = "verified" if len(applicable) == 2 else ("not applicable" if not applicable else "partial")
    return _verdict("dispersive", recs, tol, premise=premise, details={"applicable_components": applicable})


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------


def check_zeta_representation(
    model: BivariateModel,
    grid: Grid2 | Sequence,
    mc_n: int = 100_000,
    seed: int = 0,
    tol_sigmas: float = 3.0,
    components=(1, 2),
    min_accepted: int = 100,
) -> OrderingVerdict:
    """Monte Carlo check of ``E[zeta_i | X1 < t1, X2 < t2] = -2 F(t) J_i``.

    The margin is ``tol_sigmas * se - |mc - exact|``. Points with fewer than
    ``min_accepted`` conditioned draws are listed under ``insufficient``.
    """
    grid = _grid(model, grid)
    recs, insufficient = [], []
    for idx, p, i in _each(grid, components):
        ss = np.random.SeedSequence(seed, spawn_key=(idx, i))
        mean, se, accepted = M.zeta_expectation_mc(model, i, p, mc_n, ss)
        if accepted < min_accepted:
            insufficient.append({"index": idx, "component": i, "accepted": accepted})
            continue
        target = -2.0 * float(model.df(p.t1, p.t2)) * M.ccdfex(model, i, p)
        recs.append((idx, p, i, tol_sigmas * se - abs(mean - target)))
    verdict = _verdict("zeta-representation", recs, 0.0, details={"insufficient": insufficient, "mc_n": mc_n})
    if insufficient:
        verdict.holds = False
    return verdict


def check_derivative_identity(
    model: BivariateModel,
    grid: Grid2 | None = None,
    tol: float = 1e-4,
    *,
    conditional: bool = False,
    components=(1, 2),
) -> OrderingVerdict:
    """``dJ/dt_i + 2 J h_i + 1/2 = 0`` by central differences.

    With ``conditional=True`` the conditionally specified measures are used.
    """
    grid = _grid(model, grid).validate(model)
    recs = []
    for idx, p, i in _each(grid, components):
        if conditional:
            f = lambda x, p=p, i=i: M.conditional_ccdfex(model, i, p.replace_component(i, x))
            j = f(p.component(i))
            h = M.conditional_brhr(model, i, p)
        else:
            f = _jfun(model, i, p)
            j = f(p.component(i))
            h = M.brhr(model, i, p)
        slope = _fd_slope(f, model, i, p.component(i))
        recs.append((idx, p, i, -abs(slope + 2.0 * j * h + 0.5)))
    return _verdict("conditional-derivative-identity" if conditional else "derivative-identity", recs, tol)


def check_conditional_bounds(
    model: BivariateModel,
    grid: Grid2 | None = None,
    tol: float = CLOSED_TOL,
    *,
    other: BivariateModel | None = None,
    components=(1, 2),
) -> OrderingVerdict:
    """Bounds and orderings for the conditionally specified CCDFEx.

    Margins are ``J* + m*/2`` (lower bound). ``details`` carries the
    monotone-class cross-validation and, when ``other`` is given, the
    comparison ``J*_model - J*_other`` under the conditional ratio order.
    """
    grid = _grid(model, grid).validate(model)
    recs, details = [], {}
    for idx, p, i in _each(grid, components):
        recs.append((idx, p, i, M.conditional_ccdfex(model, i, p) + 0.5 * M.conditional_eit(model, i, p)))

    classes = {}
    for i in components:
        crit, slopes = [], []
        for p in grid:
            j = M.conditional_ccdfex(model, i, p)
            crit.append(-(j + 1.0 / (4.0 * M.conditional_brhr(model, i, p))))
            f = lambda x, p=p, i=i: M.conditional_ccdfex(model, i, p.replace_component(i, x))
            slopes.append(_fd_slope(f, model, i, p.component(i)))
        a, b = _classify(crit, QUAD_TOL), _classify(slopes, QUAD_TOL)
        classes[i] = {"criterion": a, "finite_difference": b, "agree": a == b}
    details["monotonicity"] = classes

    if other is not None:
        grid.validate(other)
        order_recs = []
        premise_ok = True
        for idx, p, i in _each(grid, components):
            if not _ratio_order_holds(model, other, i, p, conditional=True):
                premise_ok = False
            gap = M.conditional_ccdfex(model, i, p) - M.conditional_ccdfex(other, i, p)
            order_recs.append((idx, p, i, gap))
        sub = _verdict("conditional-order", order_recs, QUAD_TOL, premise="verified" if premise_ok else "failed")
        details["ordering"] = sub.to_dict()

    verdict = _verdict("conditional-bounds", recs, tol, details=details)
    if not all(c["agree"] for c in classes.values()):
        verdict.holds = False
    if other is not None and details["ordering"]["premise"] == "verified" and not details["ordering"]["holds"]:
        verdict.holds = False
    return verdict

