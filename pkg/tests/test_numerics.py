import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from ccdfex.errors import ConvergenceError
from ccdfex.numerics import QuadSpec, bessel_i0, central_diff, exp_e1, integrate_adaptive


def test_polynomial_is_exact():
    assert integrate_adaptive(lambda x: 3 * x**2, 0.0, 1.0) == pytest.approx(1.0, abs=1e-14)


def test_empty_and_reversed_intervals():
    assert integrate_adaptive(math.exp, 0.3, 0.3) == 0.0
    fwd = integrate_adaptive(math.sin, 0.0, 2.0)
    assert integrate_adaptive(math.sin, 2.0, 0.0) == pytest.approx(-fwd, abs=1e-15)


def test_endpoint_singularity():
    val = integrate_adaptive(lambda x: 1.0 / math.sqrt(x), 0.0, 1.0, QuadSpec(1e-9, 1e-9, 60))
    assert val == pytest.approx(2.0, abs=1e-8)


def test_infinite_limits_rejected():
    with pytest.raises(ValueError):
        integrate_adaptive(math.exp, -math.inf, 0.0)


def test_depth_exhaustion_raises():
    with pytest.raises(ConvergenceError):
        integrate_adaptive(lambda x: math.sin(1.0 / x), 1e-12, 1.0, QuadSpec(1e-14, 0.0, 5))


def test_non_finite_integrand_raises():
    with pytest.raises(ConvergenceError):
        integrate_adaptive(lambda x: math.inf, 0.0, 1.0)


@pytest.mark.parametrize("bad", [dict(abs_tol=0.0), dict(rel_tol=-1.0), dict(max_depth=0)])
def test_quadspec_validation(bad):
    with pytest.raises(ValueError):
        QuadSpec(**bad)


def test_halved_spec_changes_little():
    f = lambda x: math.exp(-x) * math.cos(3 * x)
    a = integrate_adaptive(f, 0.0, 4.0)
    b = integrate_adaptive(f, 0.0, 4.0, QuadSpec().halved())
    assert abs(a - b) < 1e-10


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.1, 3.0))
def test_matches_scipy_quad(a, w):
    f = lambda x: math.exp(-a * x) * math.sin(w * x) ** 2
    ref, _ = integrate.quad(f, 0.0, 3.0, epsabs=1e-13, epsrel=1e-13)
    assert integrate_adaptive(f, 0.0, 3.0) == pytest.approx(ref, abs=1e-9)


def test_central_diff():
    assert central_diff(math.sin, 0.7, 1e-5) == pytest.approx(math.cos(0.7), abs=1e-9)
    with pytest.raises(ValueError):
        central_diff(math.sin, 0.0, 0.0)


@pytest.mark.parametrize("x", [1e-6, 0.01, 0.5, 1.0, 1.0 + 1e-9, 2.0, 5.0, 20.0, 100.0])
def test_e1_against_scipy(x):
    assert exp_e1(x) == pytest.approx(special.exp1(x), rel=1e-13)


def test_e1_against_quadrature():
    # independent route: substitute u = x + s and integrate a smooth tail
    x = 0.8
    ref, _ = integrate.quad(lambda s: math.exp(-(x + s)) / (x + s), 0.0, math.inf, epsabs=1e-14)
    assert exp_e1(x) == pytest.approx(ref, rel=1e-12)


def test_e1_domain():
    with pytest.raises(ValueError):
        exp_e1(0.0)


@pytest.mark.parametrize("x", [0.0, 1e-3, 0.5, 3.0, 10.0, 50.0, 300.0])
def test_i0_against_scipy(x):
    assert bessel_i0(x) == pytest.approx(special.i0(x), rel=1e-13)


def test_i0_integral_representation():
    x = 2.5
    ref, _ = integrate.quad(lambda th: math.exp(x * math.cos(th)), 0.0, math.pi, epsabs=1e-14)
    assert bessel_i0(x) == pytest.approx(ref / math.pi, rel=1e-13)


def test_i0_domain():
    with pytest.raises(ValueError):
        bessel_i0(-1.0)
    assert bessel_i0(0.0) == 1.0
