"""One-line model specifications, e.g. ``power:m=2,n=2,theta=-1.5``.

Grammar::

    spec     := name [":" params] | wrapper ":" params "@" spec
    params   := key "=" value ("," key "=" value)*

Base names and their keys (defaults in parentheses):

    uniform        c1 (1), c2 (1)
    sumuniform     -
    gumbeluniform  theta (0)
    extremevalue   -
    power          m, n, theta
    generalpower   b1 (1), b2 (1), c1 (1), c2 (1), theta (0)
    downton        mean1 (2), mean2 (0.5), rho (0.5)
    product        margin1, margin2 in {exponential, uniform, gumbel}
                   (exponential); rate1, rate2 (1); c1, c2 (1)

Wrappers apply to the spec after ``@``:

    linear         mu1, mu2 (1), eta1, eta2 (0)
    powertransform theta
"""

from __future__ import annotations

from .distributions import (
    BivariateExtremeValue,
    BivariateModel,
    BivariatePower,
    BivariateUniform,
    GeneralPower,
    GumbelTypeUniform,
    MoranDowntonExponential,
    SumUniform,
    exponential_margin,
    gumbel_margin,
    linear_transform,
    power_transform,
    product,
    uniform_margin,
)

__all__ = ["ModelSpecError", "parse_model", "GRAMMAR", "CATALOG"]

GRAMMAR = __doc__

CATALOG = {
    "uniform": "independent uniforms, F = (t1/c1)(t2/c2)",
    "sumuniform": "F = t1 t2 (t1 + t2)/2 on the unit square",
    "gumbeluniform": "Gumbel-type uniform, F = t1 t2 exp(theta ln t1 ln t2)",
    "extremevalue": "independent Gumbel margins on the plane",
    "power": "bivariate power, F = t1^(2m-1) t2^(2n-1) exp(theta ln t1 ln t2)",
    "generalpower": "general power family on (0,b1)x(0,b2)",
    "downton": "Moran-Downton bivariate exponential",
    "product": "independent model with exponential/uniform/gumbel margins",
    "linear": "wrapper: (mu1 X1 + eta1, mu2 X2 + eta2)",
    "powertransform": "wrapper: F = G^theta",
}


class ModelSpecError(ValueError):
    """The model specification string does not follow the grammar."""


def _params(text: str, allowed: dict[str, object], name: str) -> dict:
    out = dict(allowed)
    if not text:
        return _check_required(out, name)
    for item in text.split(","):
        if "=" not in item:
            raise ModelSpecError(f"{name}: expected key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if key not in allowed:
            raise ModelSpecError(f"{name}: unknown parameter {key!r} (allowed: {', '.join(allowed) or 'none'})")
        if isinstance(allowed[key], str) or key.startswith("margin"):
            out[key] = value
        else:
            try:
                out[key] = float(value)
            except ValueError:
                raise ModelSpecError(f"{name}: {key}={value!r} is not a number") from None
    return _check_required(out, name)


def _check_required(params: dict, name: str) -> dict:
    missing = [k for k, v in params.items() if v is None]
    if missing:
        raise ModelSpecError(f"{name}: missing parameter(s) {', '.join(missing)}")
    return params


def _margin(kind: str, rate: float, c: float):
    if kind in ("exponential", "exp"):
        return exponential_margin(rate)
    if kind == "uniform":
        return uniform_margin(c)
    if kind == "gumbel":
        return gumbel_margin()
    raise ModelSpecError(f"product: unknown margin {kind!r}")


def parse_model(spec: str) -> BivariateModel:
    """Build a model from its one-line specification (see module docstring)."""
    spec = spec.strip()
    if not spec:
        raise ModelSpecError("empty model specification")
    head, _, rest = spec.partition("@")
    name, _, ptext = head.partition(":")
    name = name.strip().lower()
    if rest:
        base = parse_model(rest)
        if name == "linear":
            p = _params(ptext, {"mu1": 1.0, "mu2": 1.0, "eta1": 0.0, "eta2": 0.0}, name)
            return linear_transform(base, p["mu1"], p["mu2"], p["eta1"], p["eta2"])
        if name == "powertransform":
            p = _params(ptext, {"theta": None}, name)
            return power_transform(base, p["theta"])
        raise ModelSpecError(f"{name!r} is not a wrapper; only linear and powertransform take '@'")
    if name in ("linear", "powertransform"):
        raise ModelSpecError(f"{name} needs a base model: {name}:...@<model>")
    if name == "uniform":
        p = _params(ptext, {"c1": 1.0, "c2": 1.0}, name)
        return BivariateUniform(p["c1"], p["c2"])
    if name == "sumuniform":
        _params(ptext, {}, name)
        return SumUniform()
    if name == "gumbeluniform":
        return GumbelTypeUniform(_params(ptext, {"theta": 0.0}, name)["theta"])
    if name == "extremevalue":
        _params(ptext, {}, name)
        return BivariateExtremeValue()
    if name == "power":
        p = _params(ptext, {"m": None, "n": None, "theta": None}, name)
        return BivariatePower(p["m"], p["n"], p["theta"])
    if name == "generalpower":
        p = _params(ptext, {"b1": 1.0, "b2": 1.0, "c1": 1.0, "c2": 1.0, "theta": 0.0}, name)
        return GeneralPower(p["b1"], p["b2"], p["c1"], p["c2"], p["theta"])
    if name == "downton":
        p = _params(ptext, {"mean1": 2.0, "mean2": 0.5, "rho": 0.5}, name)
        return MoranDowntonExponential(p["mean1"], p["mean2"], p["rho"])
    if name == "product":
        p = _params(
            ptext,
            {"margin1": "exponential", "margin2": "exponential", "rate1": 1.0, "rate2": 1.0, "c1": 1.0, "c2": 1.0},
            name,
        )
        return product(_margin(p["margin1"], p["rate1"], p["c1"]), _margin(p["margin2"], p["rate2"], p["c2"]))
    raise ModelSpecError(f"unknown model {name!r}; known: {', '.join(CATALOG)}")
