"""Bivariate lifetime models: a small catalog with closed forms plus combinators.

A model is queried through its joint distribution function ``df``; every other
capability (density, conditional DF, sampler, closed-form CCDFEx, analytic
reversed hazard) is optional and set to ``None`` when a model cannot provide it::

    >>> m = BivariateUniform(1.0, 1.0)
    >>> m.df(0.3, 0.5)
    0.15
    >>> m.closed_ccdfex(1, 0.3, 0.7)
    -0.05

Closed forms accept an explicit lower integration limit; by default it is the
lower end of the component's support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import DegenerateConditioningError, UnavailableError
from .numerics import bessel_i0, central_diff, exp_e1

__all__ = [
    "SupportRect",
    "PairedSample",
    "BivariateModel",
    "FunctionalModel",
    "BivariateUniform",
    "SumUniform",
    "GumbelTypeUniform",
    "BivariateExtremeValue",
    "BivariatePower",
    "GeneralPower",
    "MoranDowntonExponential",
    "Margin",
    "uniform_margin",
    "exponential_margin",
    "gumbel_margin",
    "df",
    "conditional_df",
    "marginal_density",
    "closed_form_ccdfex",
    "sample",
    "product",
    "linear_transform",
    "power_transform",
]

# marginal mass left below the truncated lower limit of an infinite support
FLOOR_MASS = 1e-12
DENSITY_FLOOR = 1e-12


@dataclass(frozen=True)
class SupportRect:
    """Open rectangle ``(lo1, hi1) x (lo2, hi2)``; bounds may be infinite."""

    lo1: float = 0.0
    hi1: float = 1.0
    lo2: float = 0.0
    hi2: float = 1.0

    def __post_init__(self):
        if not (self.lo1 < self.hi1 and self.lo2 < self.hi2):
            raise ValueError(f"empty support rectangle: {self}")

    def lo(self, i: int) -> float:
        return self.lo1 if i == 1 else self.lo2

    def hi(self, i: int) -> float:
        return self.hi1 if i == 1 else self.hi2

    def interior(self, t1: float, t2: float) -> bool:
        return self.lo1 < t1 < self.hi1 and self.lo2 < t2 < self.hi2

    def span(self, i: int) -> float:
        return self.hi(i) - self.lo(i)


@dataclass(frozen=True, eq=False)
class PairedSample:
    """``n`` observed lifetime pairs, stored column-wise as read-only arrays."""

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        x1 = np.array(self.x1, dtype=float).ravel()
        x2 = np.array(self.x2, dtype=float).ravel()
        if x1.shape != x2.shape:
            raise ValueError("columns must have equal length")
        if x1.size < 1:
            raise ValueError("a sample needs at least one pair")
        if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
            raise ValueError("sample coordinates must be finite")
        x1.setflags(write=False)
        x2.setflags(write=False)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> PairedSample:
        arr = np.asarray(rows, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def n(self) -> int:
        return self.x1.size

    @property
    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.x1.tolist(), self.x2.tolist()))

    def column(self, i: int) -> np.ndarray:
        return self.x1 if i == 1 else self.x2

    def scaled(self, c1: float, c2: float | None = None) -> PairedSample:
        return PairedSample(self.x1 * c1, self.x2 * (c1 if c2 is None else c2))

    def __eq__(self, other):
        if not isinstance(other, PairedSample):
            return NotImplemented
        return np.array_equal(self.x1, other.x1) and np.array_equal(self.x2, other.x2)

    __hash__ = None


def _other(i: int) -> int:
    if i not in (1, 2):
        raise ValueError(f"component index must be 1 or 2, got {i!r}")
    return 3 - i


def _scalar_or_array(value):
    if np.ndim(value) == 0:
        return float(value)
    return value


class BivariateModel:
    """Base class; subclasses implement :meth:`raw_df` on the support interior.

    Optional capabilities are plain attributes that default to ``None``; a
    subclass provides one by defining a method of the same name:

    ``pdf(x1, x2)``, ``conditional_df(i, x_i, t_j)``, ``sampler(n, rng)``,
    ``closed_ccdfex(i, t1, t2, lower=None)`` and ``brhr(i, t1, t2)``.
    """

    support: SupportRect = SupportRect()
    name: str = "model"
    pdf = None
    conditional_df = None
    sampler = None
    closed_ccdfex = None
    brhr = None

    def raw_df(self, t1, t2):
        raise NotImplementedError

    def df(self, t1, t2):
        """Joint DF, clamped: 0 below the support, boundary value above it."""
        s = self.support
        t1 = np.minimum(t1, s.hi1)
        t2 = np.minimum(t2, s.hi2)
        inside = (t1 > s.lo1) & (t2 > s.lo2)
        if np.ndim(inside) == 0:
            if not inside:
                return 0.0
            return float(np.clip(self.raw_df(t1, t2), 0.0, 1.0))
        t1 = np.where(inside, t1, s.hi1 if math.isfinite(s.hi1) else s.lo1 + 1.0)
        t2 = np.where(inside, t2, s.hi2 if math.isfinite(s.hi2) else s.lo2 + 1.0)
        with np.errstate(all="ignore"):
            vals = np.clip(self.raw_df(t1, t2), 0.0, 1.0)
        return np.where(inside, vals, 0.0)

    def marginal_df(self, i: int, x):
        _other(i)
        if i == 1:
            return self.df(x, self.support.hi2)
        return self.df(self.support.hi1, x)

    def lower_limit(self, i: int) -> float:
        """Finite lower integration limit for component ``i``.

        Equal to the support bound when finite; otherwise the point below
        which the marginal DF falls under ``FLOOR_MASS``.
        """
        lo = self.support.lo(i)
        if math.isfinite(lo):
            return lo
        return _find_floor(lambda x: self.marginal_df(i, x), self.support.hi(i))

    def sample(self, n: int, seed) -> PairedSample:
        return sample(self, n, seed)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def _find_floor(marginal: Callable[[float], float], hi: float) -> float:
    x = min(0.0, hi - 1.0) if math.isfinite(hi) else 0.0
    step = 1.0
    while marginal(x) >= FLOOR_MASS:
        x -= step
        step *= 2.0
        if step > 1e12:
            raise ValueError("could not locate a lower integration floor")
    lo, up = x, x + step / 2.0
    for _ in range(80):
        mid = 0.5 * (lo + up)
        if marginal(mid) < FLOOR_MASS:
            lo = mid
        else:
            up = mid
    return lo


class FunctionalModel(BivariateModel):
    """A model assembled from user callables (used by the combinators)."""

    def __init__(
        self,
        df: Callable,
        support: SupportRect,
        *,
        pdf: Callable | None = None,
        conditional_df: Callable | None = None,
        sampler: Callable | None = None,
        closed_ccdfex: Callable | None = None,
        brhr: Callable | None = None,
        floor: tuple[float, float] | None = None,
        name: str = "functional",
    ):
        self._df = df
        self.support = support
        self.pdf = pdf
        self.conditional_df = conditional_df
        self.sampler = sampler
        self.closed_ccdfex = closed_ccdfex
        self.brhr = brhr
        self._floor = floor
        self.name = name

    def raw_df(self, t1, t2):
        return self._df(t1, t2)

    def lower_limit(self, i: int) -> float:
        if self._floor is not None and not math.isfinite(self.support.lo(i)):
            return self._floor[i - 1]
        return super().lower_limit(i)


# ---------------------------------------------------------------------------
# power family: F = (t1/b1)^c1 (t2/b2)^c2 exp(theta log(t1/b1) log(t2/b2))
# ---------------------------------------------------------------------------


class _PowerFamily(BivariateModel):
    """Shared machinery for the uniform, Gumbel-type and power catalog entries.

    For this family the DF ratio in component ``i`` is ``(x/t_i)^a`` with
    ``a = c_i + theta * log(t_j / b_j)``, which yields every closed form.
    """

    def __init__(self, b1: float, b2: float, c1: float, c2: float, theta: float):
        if not (b1 > 0 and b2 > 0):
            raise ValueError("scale parameters b1, b2 must be positive")
        if not (c1 > 0 and c2 > 0):
            raise ValueError("shape parameters must be positive")
        self.b = (float(b1), float(b2))
        self.c = (float(c1), float(c2))
        self.theta = float(theta)
        self.support = SupportRect(0.0, self.b[0], 0.0, self.b[1])

    def _exponent(self, i: int, tj):
        j = _other(i)
        return self.c[i - 1] + self.theta * np.log(tj / self.b[j - 1])

    def raw_df(self, t1, t2):
        l1 = np.log(t1 / self.b[0])
        l2 = np.log(t2 / self.b[1])
        return np.exp(self.c[0] * l1 + self.c[1] * l2 + self.theta * l1 * l2)

    def pdf(self, x1, x2):
        a1 = self._exponent(1, x2)
        a2 = self._exponent(2, x1)
        return _scalar_or_array(self.raw_df(x1, x2) * (a1 * a2 + self.theta) / (x1 * x2))

    def conditional_df(self, i: int, x, tj):
        j = _other(i)
        bi = self.b[i - 1]
        x = np.clip(x, 0.0, bi)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = x / bi
            val = u ** self._exponent(i, tj) * (self.c[j - 1] + self.theta * np.log(u)) / self.c[j - 1]
        val = np.where(u > 0, val, 0.0)
        return _scalar_or_array(val)

    def brhr(self, i: int, t1, t2):
        ti, tj = (t1, t2) if i == 1 else (t2, t1)
        return _scalar_or_array(self._exponent(i, tj) / ti)

    def eit(self, i: int, t1, t2):
        ti, tj = (t1, t2) if i == 1 else (t2, t1)
        return _scalar_or_array(ti / (1.0 + self._exponent(i, tj)))

    def closed_ccdfex(self, i: int, t1, t2, lower=None):
        ti, tj = (t1, t2) if i == 1 else (t2, t1)
        p = 2.0 * self._exponent(i, tj) + 1.0
        if lower is None or lower <= 0:
            return _scalar_or_array(-ti / (2.0 * p))
        return _scalar_or_array(-(ti - lower * (lower / ti) ** (p - 1.0)) / (2.0 * p))

    def _marginal_ppf(self, j: int, u):
        return self.b[j - 1] * u ** (1.0 / self.c[j - 1])

    def sampler(self, n: int, rng: np.random.Generator) -> PairedSample:
        # X2 from its margin, then X1 | X2 by bisection on the conditional DF
        x2 = self._marginal_ppf(2, rng.random(n))
        u = rng.random(n)
        lo = np.zeros(n)
        hi = np.full(n, self.b[0])
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self.conditional_df(1, mid, x2) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return PairedSample(0.5 * (lo + hi), x2)


class BivariateUniform(_PowerFamily):
    """Independent uniforms, ``F = t1 t2 / (c1 c2)`` on ``(0,c1) x (0,c2)``."""

    def __init__(self, c1: float = 1.0, c2: float = 1.0):
        super().__init__(c1, c2, 1.0, 1.0, 0.0)
        self.name = f"uniform:c1={c1:g},c2={c2:g}"

    def raw_df(self, t1, t2):
        return t1 * t2 / (self.b[0] * self.b[1])

    def sampler(self, n, rng):
        return PairedSample(self.b[0] * rng.random(n), self.b[1] * rng.random(n))


class GumbelTypeUniform(_PowerFamily):
    """``F = t1^(1 + theta ln t2) t2`` on the unit square, ``theta <= 0``.

    A proper distribution (nonnegative density) only for ``-1 <= theta <= 0``;
    other negative values are accepted for the formula-level checks.
    """

    def __init__(self, theta: float = 0.0):
        if theta > 0:
            raise ValueError(f"GumbelTypeUniform needs theta <= 0, got {theta}")
        super().__init__(1.0, 1.0, 1.0, 1.0, theta)
        self.name = f"gumbeluniform:theta={theta:g}"

    def omega(self, i: int, tj):
        """Proportionality factor between CCDFEx and the EIT."""
        lt = self.theta * np.log(tj)
        return _scalar_or_array(-(lt + 2.0) / (2.0 * (2.0 * lt + 3.0)))

    @property
    def sampler(self):
        if self.theta < -1.0:
            return None
        return super().sampler


class BivariatePower(_PowerFamily):
    """``F = t1^(2m-1 + theta log t2) t2^(2n-1)`` on the unit square, ``theta < 0``."""

    def __init__(self, m: float, n: float, theta: float):
        if not (m > 0.5 and n > 0.5):
            raise ValueError("power model needs m, n > 1/2 for a proper DF")
        if not theta < 0:
            raise ValueError(f"power model needs theta < 0, got {theta}")
        super().__init__(1.0, 1.0, 2.0 * m - 1.0, 2.0 * n - 1.0, theta)
        self.m, self.n = float(m), float(n)
        self.name = f"power:m={m:g},n={n:g},theta={theta:g}"


class GeneralPower(_PowerFamily):
    """``F = (t1/b1)^c1 (t2/b2)^(c2 + theta log(t1/b1))`` with ``theta <= 0``."""

    def __init__(self, b1: float = 1.0, b2: float = 1.0, c1: float = 1.0, c2: float = 1.0, theta: float = 0.0):
        if theta > 0:
            raise ValueError(f"GeneralPower needs theta <= 0, got {theta}")
        super().__init__(b1, b2, c1, c2, theta)
        self.name = f"generalpower:b1={b1:g},b2={b2:g},c1={c1:g},c2={c2:g},theta={theta:g}"

    def proportionality(self, i: int, tj):
        """``C_i(t_j)`` such that CCDFEx = -C_i(t_j) * EIT / 2."""
        a = self._exponent(i, tj)
        return _scalar_or_array((1.0 + a) / (1.0 + 2.0 * a))


class SumUniform(BivariateModel):
    """``F = t1 t2 (t1 + t2) / 2`` on the unit square (density ``t1 + t2``)."""

    support = SupportRect()
    name = "sumuniform"

    def raw_df(self, t1, t2):
        return 0.5 * t1 * t2 * (t1 + t2)

    def pdf(self, x1, x2):
        return _scalar_or_array(np.asarray(x1 + x2, dtype=float))

    def conditional_df(self, i, x, tj):
        _other(i)
        x = np.clip(x, 0.0, 1.0)
        return _scalar_or_array(x * (x + 2.0 * tj) / (2.0 * tj + 1.0))

    def brhr(self, i, t1, t2):
        ti = t1 if i == 1 else t2
        return _scalar_or_array(1.0 / ti + 1.0 / (t1 + t2))

    def closed_ccdfex(self, i, t1, t2, lower=None):
        ti, tj = (t1, t2) if i == 1 else (t2, t1)
        if lower is None or lower <= 0:
            return _scalar_or_array(
                -ti * (6 * ti**2 + 15 * ti * tj + 10 * tj**2) / (60.0 * (ti + tj) ** 2)
            )

        def prim(x):
            return x**5 / 5 + tj * x**4 / 2 + tj**2 * x**3 / 3

        return _scalar_or_array(-0.5 * (prim(ti) - prim(lower)) / (ti * (ti + tj)) ** 2)

    def sampler(self, n, rng):
        x2 = 0.5 * (np.sqrt(1.0 + 8.0 * rng.random(n)) - 1.0)
        u = rng.random(n)
        x1 = -x2 + np.sqrt(x2**2 + u * (2.0 * x2 + 1.0))
        return PairedSample(x1, x2)


class BivariateExtremeValue(BivariateModel):
    """Independent Gumbel margins, ``F = exp(-e^-t1 - e^-t2)`` on the plane."""

    support = SupportRect(-math.inf, math.inf, -math.inf, math.inf)
    name = "extremevalue"

    def raw_df(self, t1, t2):
        return np.exp(-np.exp(-t1) - np.exp(-t2))

    def pdf(self, x1, x2):
        return _scalar_or_array(np.exp(-x1 - x2 - np.exp(-x1) - np.exp(-x2)))

    def conditional_df(self, i, x, tj):
        _other(i)
        return _scalar_or_array(np.exp(-np.exp(-np.asarray(x, dtype=float))))

    def brhr(self, i, t1, t2):
        return _scalar_or_array(np.exp(-(t1 if i == 1 else t2)))

    def closed_ccdfex(self, i, t1, t2, lower=None):
        """``-1/2 exp(2e^-t)(E1(2e^-t) - E1(2e^-lower))``; lower defaults to -inf.

        ``lower=0`` gives the textbook expression that integrates from the origin.
        """
        ti = float(t1 if i == 1 else t2)
        u = 2.0 * math.exp(-ti)
        tail = 0.0 if lower is None or lower == -math.inf else exp_e1(2.0 * math.exp(-lower))
        return -0.5 * math.exp(u) * (exp_e1(u) - tail)

    def sampler(self, n, rng):
        return PairedSample(rng.gumbel(size=n), rng.gumbel(size=n))


class MoranDowntonExponential(BivariateModel):
    """Moran-Downton bivariate exponential with given means and correlation ``rho``.

    Conditionally on a shared geometric count ``N`` (success probability
    ``1 - rho``), the coordinates are independent Gamma(N) variables with scales
    ``(1 - rho) * mean_i``. Margins are exponential and the Pearson correlation
    is exactly ``rho``. The DF is evaluated from this mixture representation;
    the Bessel-form density is kept as an independent route.
    """

    def __init__(self, mean1: float = 2.0, mean2: float = 0.5, rho: float = 0.5):
        if not (mean1 > 0 and mean2 > 0):
            raise ValueError("means must be positive")
        if not 0.0 <= rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {rho}")
        self.mean = (float(mean1), float(mean2))
        self.rho = float(rho)
        self.scale = ((1.0 - rho) * mean1, (1.0 - rho) * mean2)
        self.support = SupportRect(0.0, math.inf, 0.0, math.inf)
        self.name = f"downton:mean1={mean1:g},mean2={mean2:g},rho={rho:g}"
        if rho == 0.0:
            kmax = 1
        else:
            kmax = int(math.ceil(math.log(1e-18) / math.log(rho))) + 1
        self._k = np.arange(1, max(kmax, 1) + 1, dtype=float)
        self._logp = np.log1p(-rho) + (self._k - 1.0) * (math.log(rho) if rho > 0 else 0.0)
        if rho == 0.0:
            self._logp = np.zeros(1)

    def _cdf_terms(self, i, x):
        x = np.asarray(x, dtype=float)[..., None]
        return special.gammainc(self._k, x / self.scale[i - 1])

    def _log_pdf_terms(self, i, x):
        x = np.asarray(x, dtype=float)[..., None]
        s = self.scale[i - 1]
        return special.xlogy(self._k - 1.0, x) - x / s - special.gammaln(self._k) - self._k * math.log(s)

    def raw_df(self, t1, t2):
        p = np.exp(self._logp)
        val = np.sum(p * self._cdf_terms(1, t1) * self._cdf_terms(2, t2), axis=-1)
        return _scalar_or_array(val)

    def pdf(self, x1, x2):
        if np.ndim(x1) or np.ndim(x2):
            return np.vectorize(self.pdf, otypes=[float])(x1, x2)
        if x1 < 0 or x2 < 0:
            return 0.0
        l1, l2 = 1.0 / self.mean[0], 1.0 / self.mean[1]
        r = self.rho
        arg = 2.0 * math.sqrt(r * l1 * l2 * x1 * x2) / (1.0 - r)
        return l1 * l2 / (1.0 - r) * math.exp(-(l1 * x1 + l2 * x2) / (1.0 - r)) * bessel_i0(arg)

    def marginal_pdf(self, i, x):
        lam = 1.0 / self.mean[i - 1]
        return _scalar_or_array(lam * np.exp(-lam * np.asarray(x, dtype=float)))

    def conditional_df(self, i, x, tj):
        j = _other(i)
        tj = float(tj)
        fj = self.marginal_pdf(j, tj)
        if fj < DENSITY_FLOOR:
            raise DegenerateConditioningError(f"marginal density {fj:g} at t_j={tj}")
        w = np.exp(self._logp + self._log_pdf_terms(j, tj))
        val = np.sum(w * self._cdf_terms(i, np.maximum(x, 0.0)), axis=-1) / fj
        return _scalar_or_array(np.clip(val, 0.0, 1.0))

    def brhr(self, i, t1, t2):
        j = _other(i)
        ti, tj = (t1, t2) if i == 1 else (t2, t1)
        w = np.exp(self._logp + self._log_pdf_terms(i, ti))
        num = np.sum(w * self._cdf_terms(j, tj), axis=-1)
        return _scalar_or_array(num / self.raw_df(t1, t2))

    def sampler(self, n, rng):
        count = rng.geometric(1.0 - self.rho, size=n)
        return PairedSample(self.scale[0] * rng.gamma(count), self.scale[1] * rng.gamma(count))


# ---------------------------------------------------------------------------
# univariate margins and combinators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Margin:
    """A univariate DF with support ``(lo, hi)`` and optional density / quantile."""

    df: Callable
    lo: float
    hi: float
    pdf: Callable | None = None
    ppf: Callable | None = None
    name: str = "margin"
    floor: float | None = field(default=None, compare=False)


def uniform_margin(c: float = 1.0) -> Margin:
    return Margin(
        df=lambda x: np.clip(np.asarray(x, dtype=float) / c, 0.0, 1.0),
        lo=0.0,
        hi=c,
        pdf=lambda x: np.where((np.asarray(x) > 0) & (np.asarray(x) < c), 1.0 / c, 0.0),
        ppf=lambda u: c * u,
        name=f"uniform({c:g})",
    )


def exponential_margin(rate: float = 1.0) -> Margin:
    if not rate > 0:
        raise ValueError("rate must be positive")
    return Margin(
        df=lambda x: -np.expm1(-rate * np.maximum(np.asarray(x, dtype=float), 0.0)),
        lo=0.0,
        hi=math.inf,
        pdf=lambda x: np.where(np.asarray(x) >= 0, rate * np.exp(-rate * np.asarray(x, dtype=float)), 0.0),
        ppf=lambda u: -np.log1p(-u) / rate,
        name=f"exponential({rate:g})",
    )


def gumbel_margin() -> Margin:
    return Margin(
        df=lambda x: np.exp(-np.exp(-np.asarray(x, dtype=float))),
        lo=-math.inf,
        hi=math.inf,
        pdf=lambda x: np.exp(-np.asarray(x, dtype=float) - np.exp(-np.asarray(x, dtype=float))),
        ppf=lambda u: -np.log(-np.log(u)),
        name="gumbel",
    )


def _as_margin(obj, lo, hi) -> Margin:
    if isinstance(obj, Margin):
        return obj
    return Margin(df=obj, lo=lo, hi=hi)


def product(df1, df2, support: SupportRect | None = None, *, name: str | None = None) -> FunctionalModel:
    """Independent model ``F(t1, t2) = F1(t1) F2(t2)``.

    ``df1``/``df2`` are either plain callables (then ``support`` is required) or
    :class:`Margin` objects, whose densities and quantiles enable the pdf and
    the sampler.
    """
    if support is None:
        if not (isinstance(df1, Margin) and isinstance(df2, Margin)):
            raise ValueError("support is required for bare DF callables")
        support = SupportRect(df1.lo, df1.hi, df2.lo, df2.hi)
    m1 = _as_margin(df1, support.lo1, support.hi1)
    m2 = _as_margin(df2, support.lo2, support.hi2)
    margins = (m1, m2)

    def joint(t1, t2):
        return m1.df(t1) * m2.df(t2)

    def cond(i, x, tj):
        _other(i)
        return _scalar_or_array(margins[i - 1].df(x))

    def rh(i, t1, t2):
        m = margins[i - 1]
        t = t1 if i == 1 else t2
        if m.pdf is not None:
            return _scalar_or_array(m.pdf(t) / m.df(t))
        h = 1e-6 * max(1.0, abs(t))
        return central_diff(lambda x: math.log(float(m.df(x))), float(t), h)

    pdf = None
    if m1.pdf is not None and m2.pdf is not None:
        def pdf(x1, x2):
            return _scalar_or_array(m1.pdf(x1) * m2.pdf(x2))

    sampler = None
    if m1.ppf is not None and m2.ppf is not None:
        def sampler(n, rng):
            return PairedSample(m1.ppf(rng.random(n)), m2.ppf(rng.random(n)))

    floor = None
    if not (math.isfinite(support.lo1) and math.isfinite(support.lo2)):
        floor = tuple(
            support.lo(i) if math.isfinite(support.lo(i))
            else (margins[i - 1].floor if margins[i - 1].floor is not None
                  else _find_floor(margins[i - 1].df, support.hi(i)))
            for i in (1, 2)
        )

    model = FunctionalModel(
        joint,
        support,
        pdf=pdf,
        conditional_df=cond,
        sampler=sampler,
        brhr=rh,
        floor=floor,
        name=name or f"product({m1.name},{m2.name})",
    )
    model.margins = margins
    return model


def linear_transform(model: BivariateModel, mu1: float, mu2: float, eta1: float = 0.0, eta2: float = 0.0) -> FunctionalModel:
    """Model of ``(mu1 X1 + eta1, mu2 X2 + eta2)`` for ``X ~ model``."""
    if not (mu1 > 0 and mu2 > 0):
        raise ValueError("scale factors must be positive")
    mu = (float(mu1), float(mu2))
    eta = (float(eta1), float(eta2))
    s = model.support
    support = SupportRect(
        mu[0] * s.lo1 + eta[0], mu[0] * s.hi1 + eta[0], mu[1] * s.lo2 + eta[1], mu[1] * s.hi2 + eta[1]
    )

    def back(k, y):
        return (y - eta[k - 1]) / mu[k - 1]

    def joint(t1, t2):
        return model.df(back(1, t1), back(2, t2))

    pdf = cond = brhr = closed = sampler = None
    if model.pdf is not None:
        def pdf(x1, x2):
            return model.pdf(back(1, x1), back(2, x2)) / (mu[0] * mu[1])
    if model.conditional_df is not None:
        def cond(i, x, tj):
            return model.conditional_df(i, back(i, x), back(_other(i), tj))
    if model.brhr is not None:
        def brhr(i, t1, t2):
            return model.brhr(i, back(1, t1), back(2, t2)) / mu[i - 1]
    if model.closed_ccdfex is not None:
        def closed(i, t1, t2, lower=None):
            low = None if lower is None else back(i, lower)
            return mu[i - 1] * model.closed_ccdfex(i, back(1, t1), back(2, t2), low)
    if model.sampler is not None:
        def sampler(n, rng):
            base = model.sampler(n, rng)
            return PairedSample(mu[0] * base.x1 + eta[0], mu[1] * base.x2 + eta[1])

    floor = (mu[0] * model.lower_limit(1) + eta[0], mu[1] * model.lower_limit(2) + eta[1])
    return FunctionalModel(
        joint,
        support,
        pdf=pdf,
        conditional_df=cond,
        sampler=sampler,
        closed_ccdfex=closed,
        brhr=brhr,
        floor=floor,
        name=f"linear(mu={mu[0]:g},{mu[1]:g};eta={eta[0]:g},{eta[1]:g})@{model.name}",
    )


def _validation_grid(model: BivariateModel, k: int = 9) -> tuple[np.ndarray, np.ndarray]:
    axes = []
    for i in (1, 2):
        lo, hi = model.lower_limit(i), model.support.hi(i)
        if not math.isfinite(hi):
            hi = lo + 10.0 * max(1.0, abs(lo))
        axes.append(np.linspace(lo, hi, k + 2)[1:-1])
    return axes[0], axes[1]


def power_transform(model: BivariateModel, theta1, theta2=None) -> FunctionalModel:
    """Model with DF ``G ** theta`` (conditional proportional reversed hazards).

    ``theta1`` is a function of ``t2`` (or a constant) giving the exponent seen
    by component 1; ``theta2`` a function of ``t1`` for component 2. A single
    joint DF requires ``G^theta1(t2) == G^theta2(t1)``, which is checked on a
    validation grid together with coordinatewise monotonicity.
    """
    th1 = theta1 if callable(theta1) else (lambda t, c=float(theta1): c)
    if theta2 is None:
        th2 = th1 if not callable(theta1) else None
    else:
        th2 = theta2 if callable(theta2) else (lambda t, c=float(theta2): c)

    def joint(t1, t2):
        return model.df(t1, t2) ** th1(t2)

    g1, g2 = _validation_grid(model)
    for a in g1:
        prev = 0.0
        for b in g2:
            e1 = th1(b)
            if not e1 > 0:
                raise ValueError("exponent functions must be positive")
            val = joint(a, b)
            if th2 is not None and abs(val - model.df(a, b) ** th2(a)) > 1e-9:
                raise ValueError("theta1 and theta2 do not define a common joint DF")
            if val < prev - 1e-12:
                raise ValueError("powered function is not a DF: decreasing in t2")
            prev = val
    for b in g2:
        prev = 0.0
        for a in g1:
            val = joint(a, b)
            if val < prev - 1e-12:
                raise ValueError("powered function is not a DF: decreasing in t1")
            prev = val

    brhr = None
    constant = not callable(theta1) and (theta2 is None or not callable(theta2))
    if constant and model.brhr is not None:
        c = float(theta1)

        def brhr(i, t1, t2):
            return c * model.brhr(i, t1, t2)

    label = f"{theta1:g}" if constant else "fn"
    return FunctionalModel(
        joint,
        model.support,
        brhr=brhr,
        floor=(model.lower_limit(1), model.lower_limit(2)),
        name=f"powertransform(theta={label})@{model.name}",
    )


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def df(model: BivariateModel, t1, t2):
    return model.df(t1, t2)


def _diff_step(model: BivariateModel, k: int, t: float, rel: float) -> float:
    lo, hi = model.support.lo(k), model.support.hi(k)
    scale = hi - lo if math.isfinite(hi - lo) else max(1.0, abs(t))
    h = rel * scale
    # stay inside the support
    room = min(t - lo, hi - t)
    return min(h, 0.5 * room)


def marginal_density(model: BivariateModel, j: int, t: float) -> float:
    if getattr(model, "marginal_pdf", None) is not None:
        return float(model.marginal_pdf(j, t))
    h = _diff_step(model, j, t, 1e-5)
    return central_diff(lambda x: float(model.marginal_df(j, x)), t, h)


def conditional_df(model: BivariateModel, i: int, x_i, t_j: float):
    """DF of ``X_i`` given ``X_j = t_j`` evaluated at ``x_i``.

    Uses the model's analytic conditional when present; otherwise the partial
    derivative of ``F`` in ``t_j`` (central difference) divided by the marginal
    density of ``X_j``.
    """
    j = _other(i)
    if model.conditional_df is not None:
        return model.conditional_df(i, x_i, t_j)
    if not model.support.lo(j) < t_j < model.support.hi(j):
        raise DegenerateConditioningError(f"t_j={t_j} is not interior to the support")
    fj = marginal_density(model, j, t_j)
    if not fj > DENSITY_FLOOR:
        raise DegenerateConditioningError(f"marginal density {fj:g} at t_j={t_j}")
    h = _diff_step(model, j, t_j, 1e-5)
    if i == 1:
        def g(t):
            return float(model.df(x_i, t))
    else:
        def g(t):
            return float(model.df(t, x_i))
    if np.ndim(x_i):
        return np.array([conditional_df(model, i, float(v), t_j) for v in np.ravel(x_i)]).reshape(np.shape(x_i))
    return float(np.clip(central_diff(g, t_j, h) / fj, 0.0, 1.0))


def closed_form_ccdfex(entry: BivariateModel, i: int, t1: float, t2: float, lower: float | None = None):
    """Catalog closed form of CCDFEx, or ``None`` when the entry has none."""
    _other(i)
    if entry.closed_ccdfex is None:
        return None
    return entry.closed_ccdfex(i, t1, t2, lower)


def sample(model: BivariateModel, n: int, seed) -> PairedSample:
    """Draw ``n`` pairs; the same ``(n, seed)`` always yields the same sample.

    ``seed`` may be an int, a :class:`numpy.random.SeedSequence` or a Generator.
    """
    if model.sampler is None:
        raise UnavailableError(f"{model.name} has no sampler")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return model.sampler(int(n), rng)
