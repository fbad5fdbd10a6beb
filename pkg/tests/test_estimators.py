import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccdfex.distributions import MoranDowntonExponential, PairedSample, sample
from ccdfex.errors import DegenerateConditioningError
from ccdfex.estimators import (
    BandwidthSpec,
    empirical_ccdfex,
    empirical_df,
    epanechnikov_cdf,
    kernel_ccdfex,
    kernel_df,
    scott_bandwidth,
)
from ccdfex.measures import univariate_dfe
from ccdfex.simulation import StudyConfig, oracle_truth


def riemann_empirical(s, i, t, step=1e-6):
    """Midpoint sum of the squared empirical ratio (an independent oracle)."""
    ti, tj = (t[0], t[1]) if i == 1 else (t[1], t[0])
    xi, xj = s.column(i), s.column(3 - i)
    keep = np.sort(xi[xj <= tj])
    total = np.count_nonzero((xi <= ti) & (xj <= tj))
    grid = np.arange(0.0, ti, step) + step / 2
    counts = np.searchsorted(keep, grid, side="right")
    return -0.5 * float(np.sum((counts / total) ** 2)) * step


def test_kernel_cdf_shape():
    assert epanechnikov_cdf(-1.0) == 0.0 and epanechnikov_cdf(1.0) == 1.0
    assert epanechnikov_cdf(0.0) == 0.5
    assert epanechnikov_cdf(-3.0) == 0.0 and epanechnikov_cdf(7.0) == 1.0
    z = np.linspace(-1, 1, 201)
    from scipy import integrate

    for zz in z[::20]:
        ref, _ = integrate.quad(lambda v: 0.75 * (1 - v * v), -1, zz)
        assert epanechnikov_cdf(zz) == pytest.approx(ref, abs=1e-12)
    assert np.all(np.diff(epanechnikov_cdf(np.linspace(-2, 2, 401))) >= 0)


def test_empirical_df():
    s = PairedSample.from_rows([(1, 1), (2, 2)])
    assert empirical_df(s, 1.5, 2) == 0.5
    assert empirical_df(s, 5, 5) == 1.0
    assert empirical_df(s, 0.5, 5) == 0.0
    assert empirical_df(s, 1, 1) == 0.5  # right-continuous


def test_empirical_hand_cases():
    s = PairedSample.from_rows([(1, 1), (2, 2)])
    assert empirical_ccdfex(s, 1, (2, 2)) == -0.125
    one = PairedSample.from_rows([(0.3, 0.4)])
    assert empirical_ccdfex(one, 1, (1.3, 1.4)) == pytest.approx(-0.5)
    with pytest.raises(DegenerateConditioningError):
        empirical_ccdfex(s, 1, (0.5, 0.5))


def test_empirical_reduces_to_univariate_when_other_coordinate_is_loose():
    rng = np.random.default_rng(0)
    x = rng.exponential(1.0, 12)
    s = PairedSample(x, rng.uniform(0, 1, 12))
    t1 = float(np.quantile(x, 0.7))
    edf = lambda v: np.mean(x <= v)
    ref = univariate_dfe(edf, 0.0, t1)
    # the univariate route integrates a step function by quadrature, so allow its error
    assert empirical_ccdfex(s, 1, (t1, 2.0)) == pytest.approx(ref, abs=1e-6)


def test_empirical_matches_riemann_oracle():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = int(rng.integers(1, 11))
        s = PairedSample(rng.uniform(0, 1, n), rng.uniform(0, 1, n))
        t = (float(rng.uniform(0.5, 1.0)), float(rng.uniform(0.5, 1.0)))
        if empirical_df(s, *t) == 0:
            continue
        for i in (1, 2):
            assert empirical_ccdfex(s, i, t) == pytest.approx(riemann_empirical(s, i, t), abs=1e-6)


def test_scott_bandwidth():
    # a sample with unit standard deviations in both coordinates
    base = np.tile([-1.0, 1.0], 32) * math.sqrt(63 / 64)
    s = PairedSample(base, base[::-1].copy())
    assert scott_bandwidth(s) == pytest.approx(0.5)
    assert scott_bandwidth(s.scaled(3.0, 3.0)) == pytest.approx(1.5)
    d = sample(MoranDowntonExponential(2, 0.5, 0.5), 80, 7)
    ref = 0.5 * (np.std(d.x1, ddof=1) + np.std(d.x2, ddof=1)) * 80 ** (-1 / 6)
    assert scott_bandwidth(d) == pytest.approx(ref, rel=1e-14)
    with pytest.raises(ValueError):
        scott_bandwidth(PairedSample.from_rows([(1, 1), (1, 1)]))
    with pytest.raises(ValueError):
        scott_bandwidth(PairedSample.from_rows([(1, 1)]))


def test_bandwidth_spec():
    with pytest.raises(ValueError):
        BandwidthSpec("fixed")
    with pytest.raises(ValueError):
        BandwidthSpec("silverman")
    assert BandwidthSpec.fixed(0.3).resolve(PairedSample.from_rows([(1, 1)])) == 0.3


def test_kernel_df_values():
    s = PairedSample.from_rows([(0, 0)])
    assert kernel_df(s, 1.0, 1, 1) == 1.0
    assert kernel_df(s, 1.0, 0, 0) == 0.25
    with pytest.raises(ValueError):
        kernel_df(s, 0.0, 0, 0)


def test_kernel_df_small_bandwidth_limit():
    s = PairedSample.from_rows([(0.2, 0.5), (0.6, 0.1), (0.9, 0.8)])
    for t in [(0.3, 0.6), (0.95, 0.95), (0.7, 0.2), (0.1, 0.9)]:
        assert kernel_df(s, 1e-6, *t) == pytest.approx(empirical_df(s, *t), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 30), st.floats(0.05, 1.0), st.integers(0, 10_000))
def test_kernel_df_is_monotone_probability(n, h, seed):
    rng = np.random.default_rng(seed)
    s = PairedSample(rng.uniform(0, 1, n), rng.uniform(0, 1, n))
    g = np.linspace(-0.5, 1.5, 25)
    vals = kernel_df(s, h, g[:, None], g[None, :])
    assert np.all((vals >= 0) & (vals <= 1))
    assert np.all(np.diff(vals, axis=0) >= -1e-15) and np.all(np.diff(vals, axis=1) >= -1e-15)


def test_kernel_single_point_against_riemann():
    s = PairedSample.from_rows([(0, 0)])
    step = 1e-6
    x = np.arange(0, 1, step) + step / 2
    ref = -0.5 * float(np.sum(epanechnikov_cdf(x) ** 2)) * step
    assert kernel_ccdfex(s, 1.0, 1, (1, 1)) == pytest.approx(ref, abs=1e-8)
    # closed form of the same integral: -1/2 * int_0^1 ((2 + 3x - x^3)/4)^2 dx
    assert kernel_ccdfex(s, 1.0, 1, (1, 1)) == pytest.approx(-0.5 * 383 / 560, abs=1e-14)


def test_kernel_exact_and_adaptive_agree():
    d = sample(MoranDowntonExponential(2, 0.5, 0.5), 60, 3)
    for t in [(0.6, 0.6), (0.93, 0.95), (2.5, 0.3)]:
        for i in (1, 2):
            a = kernel_ccdfex(d, "scott", i, t)
            b = kernel_ccdfex(d, "scott", i, t, method="adaptive")
            assert a == pytest.approx(b, abs=1e-11)
            assert a <= 0


def test_kernel_degenerate_limit():
    rng = np.random.default_rng(8)
    for _ in range(5):
        s = PairedSample(rng.uniform(0, 1, 8), rng.uniform(0, 1, 8))
        t = (0.77, 0.81)
        if empirical_df(s, *t) == 0:
            continue
        assert kernel_ccdfex(s, 1e-6, 1, t) == pytest.approx(empirical_ccdfex(s, 1, t), abs=1e-6)


def test_kernel_vanishing_mass():
    s = PairedSample.from_rows([(5, 5)])
    with pytest.raises(DegenerateConditioningError):
        kernel_ccdfex(s, 0.1, 1, (1, 1))
    with pytest.raises(ValueError):
        kernel_ccdfex(s, 0.1, 1, (6, 6), method="simpson")


def test_consistency_error_shrinks_with_n():
    model = MoranDowntonExponential(2, 0.5, 0.5)
    t = (0.6, 0.6)
    truth = oracle_truth(StudyConfig(grid=(t,)))[t]
    errs = {}
    for n in (80, 250):
        e_emp, e_ker = [], []
        for r in range(200):
            s = sample(model, n, np.random.SeedSequence(99, spawn_key=(n, r)))
            e_emp.append(abs(empirical_ccdfex(s, 1, t) - truth))
            e_ker.append(abs(kernel_ccdfex(s, "scott", 1, t) - truth))
        errs[n] = (np.mean(e_emp), np.mean(e_ker))
    assert errs[250][0] < errs[80][0]
    assert errs[250][1] < errs[80][1]
