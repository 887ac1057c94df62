"""Catalog of (unnormalised) measure densities with declared structural attributes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import ConvexBody, GeometryError

FAMILIES = ("lebesgue", "gaussian", "exponential", "power_law", "body_indicator", "wedge", "wedge_pair",
            "s_cone", "s_tail")


class DensityError(ValueError):
    pass


@dataclass(frozen=True)
class Attributes:
    even: bool
    radially_decreasing: bool
    quasiconcave: bool
    s_class: float | None  # paper exponent s: density is (1/s)-concave; 0.0 tags log-concave
    max_at_origin: bool
    sup_value: float


@dataclass(frozen=True)
class Density:
    family: str
    n: int
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    attributes: Attributes
    params: dict = field(default_factory=dict)
    support_radius: float = math.inf

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise DensityError(f"density on R^{self.n} evaluated at points of R^{X.shape[1]}")
        return self.evaluator(X)

    @property
    def is_lebesgue(self) -> bool:
        return self.family == "lebesgue"

    def to_config(self) -> dict:
        out = {"family": self.family, "n": self.n}
        out.update({k: v for k, v in self.params.items() if k != "body"})
        return out


@dataclass(frozen=True)
class ProductDensity:
    """Density of mu_1 x ... x mu_p on (R^n)^p."""

    factors: tuple

    @property
    def n(self) -> int:
        return sum(f.n for f in self.factors)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.ones(X.shape[0])
        c = 0
        for f in self.factors:
            out = out * f(X[:, c:c + f.n])
            c += f.n
        return out


_SMOOTH = ("gaussian", "exponential", "power_law", "s_cone", "s_tail", "lifted")


def product_density(factors) -> Density:
    """mu_1 x ... x mu_p as a single Density on the product space."""
    factors = tuple(factors)
    prod = ProductDensity(factors)
    n = prod.n
    if all(f.is_lebesgue for f in factors):
        return make_density("lebesgue", n)
    attrs = [f.attributes for f in factors]
    sup = math.prod(a.sup_value for a in attrs)
    att = Attributes(all(a.even for a in attrs), False, False, None,
                     all(a.max_at_origin for a in attrs), sup)
    smooth = all(f.family in _SMOOTH or f.is_lebesgue for f in factors)
    return Density("product", n, prod, att, {"smooth": smooth})


def lifted_density(d: Density, extra: int) -> Density:
    """phi(x) on R^n x R^extra, constant along the added coordinates."""
    if d.is_lebesgue:
        return make_density("lebesgue", d.n + extra)
    n = d.n
    a = d.attributes
    att = Attributes(a.even, a.radially_decreasing, a.quasiconcave, None, a.max_at_origin, a.sup_value)
    return Density("lifted", n + extra, lambda X: d.evaluator(X[:, :n]), att,
                   {"base": d.family, "smooth": d.family in _SMOOTH})


def _norm(X):
    return np.linalg.norm(X, axis=1)


def make_density(family: str, n: int, **params) -> Density:
    if n < 1:
        raise DensityError("n must be >= 1")
    if family == "lebesgue":
        return Density(family, n, lambda X: np.ones(len(X)), Attributes(True, True, True, None, True, 1.0))
    if family == "gaussian":
        sigma = float(params.get("sigma", 1.0))
        if sigma <= 0:
            raise DensityError("sigma must be positive")
        return Density(family, n, lambda X: np.exp(-0.5 * np.sum(X * X, axis=1) / sigma ** 2),
                       Attributes(True, True, True, 0.0, True, 1.0), {"sigma": sigma})
    if family == "exponential":
        return Density(family, n, lambda X: np.exp(-_norm(X)), Attributes(True, True, True, 0.0, True, 1.0))
    if family == "power_law":
        beta = float(params.get("beta", 2 * n))
        if beta <= n:
            raise DensityError(f"power_law needs beta > n = {n}")
        # (1+|x|)^-beta is (-1/beta)-concave, i.e. paper exponent s = -beta
        return Density(family, n, lambda X: (1.0 + _norm(X)) ** (-beta),
                       Attributes(True, True, True, -beta, True, 1.0), {"beta": beta})
    if family == "body_indicator":
        body: ConvexBody = params["body"]
        if body.dim != n:
            raise DensityError("indicator body dimension mismatch")
        if not body.contains_many(np.zeros((1, n)))[0] or body.ray_exit(np.zeros(n), np.eye(n)).min() <= 0:
            raise DensityError("body_indicator requires 0 in the interior of the body")
        sym = _is_origin_symmetric(body)
        return Density(family, n, lambda X: body.contains_many(X).astype(float),
                       Attributes(sym, True, True, None, True, 1.0), {"body": body},
                       support_radius=body.bound)
    if family in ("wedge", "wedge_pair"):
        if n != 2:
            raise DensityError("wedge densities live in the plane only")
        k = float(params.get("k", 100))
        if k <= 0:
            raise DensityError("k must be positive")
        angle = 1.0 / k
        if family == "wedge":
            def ev(X):
                th = np.arctan2(X[:, 1], X[:, 0])
                return ((th >= 0) & (th <= angle)).astype(float)
            attrs = Attributes(False, True, True, None, True, 1.0)
        else:
            def ev(X):
                th = np.arctan2(X[:, 1], X[:, 0])
                th2 = np.arctan2(-X[:, 1], -X[:, 0])
                return (((th >= 0) & (th <= angle)) | ((th2 >= 0) & (th2 <= angle))).astype(float)
            attrs = Attributes(True, True, False, None, True, 1.0)
        return Density(family, n, ev, attrs, {"k": k})
    if family == "s_cone":
        s = float(params.get("s", 1.0))
        if s <= 0:
            raise DensityError("s_cone needs s > 0")
        return Density(family, n, lambda X: np.maximum(0.0, 1.0 - _norm(X)) ** s,
                       Attributes(True, True, True, s, True, 1.0), {"s": s}, support_radius=1.0)
    if family == "s_tail":
        s = float(params.get("s", -1.0))
        if not -n < s < 0:
            raise DensityError(f"s_tail needs -n < s < 0, got {s}")
        return Density(family, n, lambda X: (1.0 + _norm(X)) ** s,
                       Attributes(True, True, True, s, True, 1.0), {"s": s})
    raise DensityError(f"unknown density family {family!r}")


def _is_origin_symmetric(body: ConvexBody, samples: int = 512) -> bool:
    rng = np.random.default_rng(0)
    X = rng.uniform(-body.bound, body.bound, size=(samples, body.dim))
    return bool(np.all(body.contains_many(X) == body.contains_many(-X)))


@dataclass
class Violation:
    attribute: str
    witness: tuple


def validate_attributes(d: Density, samples: int = 4096, seed: int = 0, box: float | None = None) -> list[Violation]:
    """Monte Carlo falsification of each declared attribute."""
    rng = np.random.default_rng(seed)
    R = box if box is not None else (min(d.support_radius, 3.0) if math.isfinite(d.support_radius) else 3.0)
    X = rng.uniform(-R, R, size=(samples, d.n))
    Y = rng.uniform(-R, R, size=(samples, d.n))
    fx, fy = d(X), d(Y)
    out: list[Violation] = []
    a = d.attributes
    if np.any(~np.isfinite(fx)) or np.any(fx < 0):
        i = int(np.flatnonzero(~np.isfinite(fx) | (fx < 0))[0])
        out.append(Violation("nonnegative", (X[i],)))
    if np.any(fx > a.sup_value * (1 + 1e-12)):
        i = int(np.argmax(fx))
        out.append(Violation("sup_value", (X[i],)))
    if a.max_at_origin and abs(float(d(np.zeros((1, d.n)))[0]) - a.sup_value) > 1e-12:
        out.append(Violation("max_at_origin", (np.zeros(d.n),)))
    if a.even:
        bad = np.flatnonzero(np.abs(fx - d(-X)) > 1e-12 * (1 + np.abs(fx)))
        if bad.size:
            out.append(Violation("even", (X[bad[0]], -X[bad[0]])))
    if a.radially_decreasing:
        t = rng.uniform(0, 1, size=(samples, 1))
        bad = np.flatnonzero(d(t * X) < fx - 1e-12)
        if bad.size:
            out.append(Violation("radially_decreasing", (X[bad[0]], float(t[bad[0], 0]))))
    if a.quasiconcave:
        lam = rng.uniform(0, 1, size=(samples, 1))
        mid = d((1 - lam) * X + lam * Y)
        bad = np.flatnonzero(mid < np.minimum(fx, fy) - 1e-12)
        if bad.size:
            out.append(Violation("quasiconcave", (X[bad[0]], Y[bad[0]])))
    if a.s_class is not None and a.s_class != 0.0:
        s = a.s_class
        lam = rng.uniform(0, 1, size=(samples, 1))
        mid = d((1 - lam) * X + lam * Y)
        pos = (fx > 0) & (fy > 0)
        with np.errstate(divide="ignore"):
            rhs = ((1 - lam[:, 0]) * fx ** (1 / s) + lam[:, 0] * fy ** (1 / s)) ** s
        bad = np.flatnonzero(pos & (mid < rhs * (1 - 1e-10) - 1e-14))
        if bad.size:
            out.append(Violation("s_class", (X[bad[0]], Y[bad[0]])))
    elif a.s_class == 0.0:
        lam = rng.uniform(0, 1, size=(samples, 1))
        mid = d((1 - lam) * X + lam * Y)
        pos = (fx > 0) & (fy > 0)
        rhs = np.where(pos, fx ** (1 - lam[:, 0]) * fy ** lam[:, 0], 0.0)
        bad = np.flatnonzero(mid < rhs * (1 - 1e-10) - 1e-14)
        if bad.size:
            out.append(Violation("log_concave", (X[bad[0]], Y[bad[0]])))
    return out


def declare(d: Density, **overrides) -> Density:
    """Copy of d with some attributes overridden (used to test the validator)."""
    attrs = Attributes(**{**d.attributes.__dict__, **overrides})
    return Density(d.family, d.n, d.evaluator, attrs, d.params, d.support_radius)
