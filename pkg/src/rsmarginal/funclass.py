"""s-concave function catalog and the functional transforms built on it.

Concavity is tracked by the exponent ``alpha`` of alpha-concavity (the largest
alpha for which the function is alpha-concave); the paper-style exponent is
``s = 1/alpha``.  A function is alpha'-concave for every alpha' <= alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.special import gammaincc, gamma as gamma_fn

from .geometry import Ball, ConvexBody, GeometryError, Implicit, Polytope, difference_body

INF = math.inf


class FunctionError(ValueError):
    pass


# ------------------------------------------------------------------ means

def alpha_mean(a: float, b: float, alpha: float, lam: float | None = None) -> float:
    """Weighted alpha-mean M_alpha^lam(a, b); lam=None gives the unweighted M_alpha of the difference function."""
    if a < 0 or b < 0:
        raise FunctionError("alpha_mean needs non-negative arguments")
    if lam is not None and not 0 <= lam <= 1:
        raise FunctionError("lam must lie in [0, 1]")
    if a * b == 0:
        return 0.0
    if alpha == INF:
        return max(a, b)
    if alpha == -INF:
        return min(a, b)
    if lam is None:
        if alpha == 0:
            return a * b
        return (a ** alpha + b ** alpha) ** (1.0 / alpha)
    if alpha == 0:
        return a ** (1 - lam) * b ** lam
    return ((1 - lam) * a ** alpha + lam * b ** alpha) ** (1.0 / alpha)


def alpha_mean_array(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """Vectorised unweighted M_alpha."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pos = (a > 0) & (b > 0)
    out = np.zeros(np.broadcast(a, b).shape)
    aa, bb = np.broadcast_arrays(a, b)
    aa, bb = aa[pos], bb[pos]
    if alpha == INF:
        v = np.maximum(aa, bb)
    elif alpha == -INF:
        v = np.minimum(aa, bb)
    elif alpha == 0:
        v = aa * bb
    else:
        v = (aa ** alpha + bb ** alpha) ** (1.0 / alpha)
    out[pos] = v
    return out


def self_mean(a: np.ndarray, alpha: float) -> np.ndarray:
    """M_alpha(a, a)."""
    return alpha_mean_array(a, a, alpha)


# ------------------------------------------------------------------ functions

@dataclass(frozen=True)
class SConcaveFunction:
    family: str
    n: int
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    alpha: float
    sup_value: float
    level_radius: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False, compare=False)
    level_body: ConvexBody | None = field(default=None, repr=False, compare=False)
    support_radius: float = INF
    even: bool = True
    params: dict = field(default_factory=dict, compare=False)
    shift: np.ndarray | None = field(default=None, compare=False)  # f(x) = g(x + shift)

    @property
    def s(self) -> float:
        """Paper exponent: f is (1/s)-concave."""
        if self.alpha == 0:
            return -INF
        if math.isinf(self.alpha):
            return 0.0
        return 1.0 / self.alpha

    @property
    def has_level_sets(self) -> bool:
        return self.level_radius is not None or self.level_body is not None

    @property
    def radial(self) -> bool:
        return self.level_radius is not None and self.shift is None

    @property
    def unbounded_levels(self) -> bool:
        return self.level_radius is not None and math.isinf(self.support_radius)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise FunctionError(f"function on R^{self.n} evaluated at points of R^{X.shape[1]}")
        if self.shift is not None:
            X = X + self.shift
        return self.evaluator(X)

    def level_set(self, t: float) -> ConvexBody:
        """C_t(f) = {x : f(x) >= t ||f||_inf} for t in (0, 1]."""
        if not 0 < t <= 1:
            raise FunctionError("level t must lie in (0, 1]")
        if self.level_body is not None:
            body = self.level_body
        elif self.level_radius is not None:
            r = float(self.level_radius(np.array([t]))[0])
            if r <= 0:
                raise FunctionError("level set at t has empty interior")
            body = Ball(np.zeros(self.n), r)
        else:
            raise FunctionError(f"{self.family} has no closed-form level sets")
        if self.shift is not None:
            body = body.translate(-self.shift)
        return body

    def translated(self, z) -> "SConcaveFunction":
        """x -> f(x + z)."""
        z = np.asarray(z, dtype=float)
        total = z if self.shift is None else self.shift + z
        return SConcaveFunction(self.family, self.n, self.evaluator, self.alpha, self.sup_value, self.level_radius,
                                self.level_body, self.support_radius + float(np.linalg.norm(z)), False,
                                self.params, total)

    def scaled(self, c: float) -> "SConcaveFunction":
        if c <= 0:
            raise FunctionError("scale must be positive")
        ev = self.evaluator
        return SConcaveFunction(self.family, self.n, lambda X: c * ev(X), self.alpha, c * self.sup_value,
                                self.level_radius, self.level_body, self.support_radius, self.even,
                                {**self.params, "scale": c * self.params.get("scale", 1.0)}, self.shift)

    def level_tail_bound(self, t0: float, m: int) -> float:
        """Bound on int_0^t0 vol_m(C_t ∩ plane) dt for unbounded level sets (radius R(t) balls)."""
        from .constants import unit_ball_volume
        w = unit_ball_volume(m)
        if self.family == "gaussian":
            a = m / 2 + 1
            return w * gammaincc(a, math.log(1 / t0)) * gamma_fn(a)
        if self.family == "laplace":
            a = m + 1
            return w * gammaincc(a, math.log(1 / t0)) * gamma_fn(a)
        if self.family == "power_decay":
            p = self.params["p"]
            return w * t0 ** (1 - m / p) / (1 - m / p)
        return 0.0

    def to_config(self) -> dict:
        return {"family": self.family, "n": self.n, **{k: v for k, v in self.params.items() if k != "body"}}


def make_function(family: str, n: int, **params) -> SConcaveFunction:
    if n < 1:
        raise FunctionError("n must be >= 1")
    nrm = lambda X: np.linalg.norm(X, axis=1)  # noqa: E731
    if family == "indicator":
        K: ConvexBody = params["body"]
        if K.dim != n:
            raise FunctionError("indicator body dimension mismatch")
        sym = bool(np.allclose(K.interior_point, 0)) and _symmetric(K)
        return SConcaveFunction(family, n, lambda X: K.contains_many(X).astype(float), INF, 1.0,
                                level_body=K, support_radius=K.bound, even=sym, params={"body": K})
    if family == "gaussian":
        return SConcaveFunction(family, n, lambda X: np.exp(-np.sum(X * X, axis=1)), 0.0, 1.0,
                                level_radius=lambda t: np.sqrt(np.log(1.0 / np.asarray(t))))
    if family == "laplace":
        return SConcaveFunction(family, n, lambda X: np.exp(-nrm(X)), 0.0, 1.0,
                                level_radius=lambda t: np.log(1.0 / np.asarray(t)))
    if family == "cone":
        s = float(params.get("s", 1.0))
        if s <= 0:
            raise FunctionError("cone needs s > 0")
        return SConcaveFunction(family, n, lambda X: np.maximum(0.0, 1.0 - nrm(X)) ** s, 1.0 / s, 1.0,
                                level_radius=lambda t: 1.0 - np.asarray(t) ** (1.0 / s), support_radius=1.0,
                                params={"s": s})
    if family == "power_decay":
        p = float(params.get("p", n + 1.0))
        if p <= n:
            raise FunctionError(f"power_decay needs p > n = {n}")
        return SConcaveFunction(family, n, lambda X: (1.0 + nrm(X)) ** (-p), -1.0 / p, 1.0,
                                level_radius=lambda t: np.asarray(t) ** (-1.0 / p) - 1.0, params={"p": p})
    raise FunctionError(f"unknown function family {family!r}")


def _symmetric(K: ConvexBody) -> bool:
    if isinstance(K, Ball):
        return bool(np.allclose(K.center, 0))
    rng = np.random.default_rng(1)
    X = rng.uniform(-K.bound, K.bound, size=(1024, K.dim))
    return bool(np.all(K.contains_many(X) == K.contains_many(-X)))


def admissible(f: SConcaveFunction, alpha: float) -> bool:
    """f is alpha-concave for every alpha <= f.alpha."""
    return alpha <= f.alpha


# ------------------------------------------------------------------ difference functions

@dataclass
class DeltaConfig:
    restarts: int = 16
    step_tol: float = 1e-8
    value_tol: float = 1e-10
    seed: int = 0
    closed_form: bool = True
    max_iter: int = 2000


@dataclass
class DeltaResult:
    value: np.ndarray
    converged: np.ndarray
    argmax: np.ndarray


def delta_alpha(f: SConcaveFunction, alpha: float, x, cfg: DeltaConfig | None = None) -> float:
    res = delta_alpha_many(f, alpha, np.atleast_2d(np.asarray(x, dtype=float)), cfg)
    return float(res.value[0])


def delta_alpha_many(f: SConcaveFunction, alpha: float, X: np.ndarray, cfg: DeltaConfig | None = None) -> DeltaResult:
    """Delta_alpha f at each row of X: sup over x = x1 - x2 of M_alpha(f(x1), f(x2))."""
    cfg = cfg or DeltaConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if cfg.closed_form:
        if f.family == "indicator" and f.shift is None:
            D = difference_body(f.level_body)
            inside = D.contains_many(X)
            val = np.where(inside, self_mean(np.array(f.sup_value), alpha), 0.0)
            return DeltaResult(val, np.ones(len(X), bool), X / 2)
        if f.even and alpha <= f.alpha:
            # even and alpha-concave: the split x1 = x/2 is optimal
            half = f(X / 2)
            return DeltaResult(self_mean(half, alpha), np.ones(len(X), bool), X / 2)
    if alpha == -INF and f.has_level_sets:
        return _delta_quasi_bisect(f, X)
    return _delta_search(f, alpha, X, cfg)


def _delta_quasi_bisect(f: SConcaveFunction, X: np.ndarray, tol: float = 1e-12) -> DeltaResult:
    """sup{t : x in C_t - C_t} by bisection in t (times ||f||)."""
    out = np.zeros(len(X))
    for i, x in enumerate(X):
        lo, hi = 0.0, 1.0
        if f.level_radius is not None and f.shift is None:
            inside = lambda t: np.linalg.norm(x) <= 2 * float(f.level_radius(np.array([t]))[0]) + 1e-12  # noqa
        else:
            inside = lambda t: difference_body(f.level_set(t)).contains_many(x[None, :])[0]  # noqa
        if inside(1.0):
            out[i] = 1.0
            continue
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid > 0 and inside(mid):
                lo = mid
            else:
                hi = mid
        out[i] = lo
    return DeltaResult(out * f.sup_value, np.ones(len(X), bool), X / 2)


def _delta_search(f: SConcaveFunction, alpha: float, X: np.ndarray, cfg: DeltaConfig) -> DeltaResult:
    """Batched multi-start compass search over x1, maximising M_alpha(f(x1), f(x1 - x))."""
    P, n = X.shape
    rng = np.random.default_rng(cfg.seed)
    R = f.support_radius if math.isfinite(f.support_radius) else 3.0
    starts = [X / 2, X.copy(), np.zeros_like(X)]
    while len(starts) < cfg.restarts:
        starts.append(rng.uniform(-R, R, size=X.shape))
    starts = starts[:max(cfg.restarts, 3)]
    S = len(starts)
    Z = np.concatenate(starts)  # (S*P, n)
    Xr = np.tile(X, (S, 1))

    def obj(Zc, Xc):
        return alpha_mean_array(f(Zc), f(Zc - Xc), alpha)

    val = obj(Z, Xr)
    step = np.full(len(Z), 0.25 * max(R, 1.0))
    D = np.vstack([np.eye(n), -np.eye(n)])
    if n > 1:
        diag = np.array([[1, 1], [1, -1]]) / math.sqrt(2) if n == 2 else None
        if diag is not None:
            D = np.vstack([D, diag, -diag])
    for _ in range(cfg.max_iter):
        active = step > cfg.step_tol
        if not active.any():
            break
        ia = np.flatnonzero(active)
        cand = Z[ia, None, :] + step[ia, None, None] * D[None]
        k = D.shape[0]
        fv = obj(cand.reshape(-1, n), np.repeat(Xr[ia], k, axis=0)).reshape(len(ia), k)
        j = np.argmax(fv, axis=1)
        best = fv[np.arange(len(ia)), j]
        better = best > val[ia] + cfg.value_tol * np.maximum(np.abs(val[ia]), 1e-300)
        mv = ia[better]
        Z[mv] = cand[better, j[better]]
        val[mv] = best[better]
        step[ia[~better]] *= 0.5
    V = val.reshape(S, P)
    Zs = Z.reshape(S, P, n)
    order = np.argsort(-V, axis=0, kind="stable")
    top = V[order[0], np.arange(P)]
    second = V[order[1], np.arange(P)]
    conv = np.abs(top - second) <= 1e-4 * np.maximum(np.abs(top), 1e-300)
    return DeltaResult(top, conv, Zs[order[0], np.arange(P)])


# ------------------------------------------------------------------ Ball bodies

def adaptive_simpson(g: Callable[[float], float], a: float, b: float, rel_tol: float = 1e-10,
                     max_depth: int = 60) -> tuple[float, float]:
    """Adaptive Simpson; returns (value, error estimate)."""
    fa, fm, fb = g(a), g(0.5 * (a + b)), g(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    scale = abs(whole) if whole != 0 else 1.0
    err_total = [0.0]

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        diff = left + right - whole
        if depth >= max_depth or abs(diff) <= 15 * tol:
            err_total[0] += abs(diff) / 15
            return left + right + diff / 15
        return rec(a, m, fa, flm, fm, left, tol / 2, depth + 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth + 1)

    # seed with a few panels so narrow features are not skipped
    edges = np.linspace(a, b, 9)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        f0, f1, f2 = g(lo), g(0.5 * (lo + hi)), g(hi)
        w = (hi - lo) / 6 * (f0 + 4 * f1 + f2)
        total += rec(lo, hi, f0, f1, f2, w, rel_tol * scale / 8, 0)
    return total, err_total[0]


@dataclass
class RadialIntegral:
    rho: float
    truncation_radius: float
    error: float


def ball_radial(f: SConcaveFunction, m: int, u: np.ndarray, rel_tol: float = 1e-10) -> RadialIntegral:
    """rho(u) = ((m/||f||) int_0^inf r^(m-1) f(r u) dr)^(1/m), truncated where f < 1e-12 ||f||."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    fs = f.sup_value
    g1 = lambda r: float(f((r * u)[None, :])[0])  # noqa: E731
    R = min(f.support_radius, 1.0) if math.isfinite(f.support_radius) else 1.0
    while g1(R) >= 1e-12 * fs and R < 1e12:
        R *= 2.0
    if math.isfinite(f.support_radius):
        R = min(R, f.support_radius)
    if R >= 1e12:
        raise FunctionError("radial integral diverges (f does not decay)")
    integrand = lambda r: m * r ** (m - 1) * g1(r) / fs  # noqa: E731
    val, err = adaptive_simpson(integrand, 0.0, R, rel_tol)
    return RadialIntegral(val ** (1.0 / m), R, err)


def ball_body(f: SConcaveFunction, m: int) -> Implicit:
    """K_m(f), the star body with radial function rho_{K_m(f)}."""
    if not 1 <= m <= f.n:
        raise FunctionError("need 1 <= m <= n")
    if float(f(np.zeros((1, f.n)))[0]) < f.sup_value * (1 - 1e-12):
        raise FunctionError("K_m(f) needs f(0) = ||f||_inf")
    cache: dict = {}

    def radial(U):
        U = np.atleast_2d(U)
        if f.radial:
            if "r" not in cache:
                cache["r"] = ball_radial(f, m, np.eye(f.n)[0]).rho
            return np.full(len(U), cache["r"])
        return np.array([ball_radial(f, m, u).rho for u in U])

    def member(X):
        X = np.atleast_2d(X)
        r = np.linalg.norm(X, axis=1)
        out = r == 0
        nz = ~out
        if nz.any():
            out[nz] = r[nz] <= radial(X[nz] / r[nz, None]) * (1 + 1e-9)
        return out

    bound = radial(np.eye(f.n)[:1])[0] * 4 if f.radial else _bound_scan(radial, f.n)
    return Implicit(member, f.n, bound, np.zeros(f.n), radial=radial)


def _bound_scan(radial, n):
    rng = np.random.default_rng(0)
    U = rng.standard_normal((64, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return float(np.max(radial(U))) * 2.0


def level_body_Lm(f: SConcaveFunction, m: int) -> ConvexBody:
    """L_m(f) = {f >= ||f|| e^{-m}}."""
    t = math.exp(-m)
    if f.has_level_sets:
        return f.level_set(t)
    thr = f.sup_value * t
    return Implicit(lambda X: f(X) >= thr * (1 - 1e-12), f.n, 1e6, np.zeros(f.n))


# ------------------------------------------------------------------ lifts

def _lift_bound(f: SConcaveFunction, extra: float) -> float:
    if not math.isfinite(f.support_radius):
        raise FunctionError("lifted bodies need f with bounded support")
    return math.hypot(f.support_radius, extra)


def lift_A(f: SConcaveFunction, s: int) -> Implicit:
    """A_{f,s} = {(x, y) in R^n x R^s : x in supp f, |y| <= f(x)^(1/s)}."""
    if not isinstance(s, (int, np.integer)) or s < 1:
        raise FunctionError("lift_A needs a positive integer s")
    n = f.n

    def member(Z):
        Z = np.atleast_2d(Z)
        fx = f(Z[:, :n])
        y = np.linalg.norm(Z[:, n:], axis=1)
        return (fx > 0) & (y <= fx ** (1.0 / s) * (1 + 1e-12) + 1e-12)

    return Implicit(member, n + s, _lift_bound(f, f.sup_value ** (1.0 / s)), np.zeros(n + s))


def lift_B(f: SConcaveFunction, p: int, q: int) -> Implicit:
    """B_{f,s} in (R^n)^q x R^p for s = p/q in lowest terms."""
    if p < 1 or q < 1 or Fraction(p, q).denominator != q:
        raise FunctionError(f"{p}/{q} is not a reduced positive rational")
    n = f.n

    def member(Z):
        Z = np.atleast_2d(Z)
        prod = np.ones(len(Z))
        for i in range(q):
            prod = prod * f(Z[:, i * n:(i + 1) * n])
        y = np.linalg.norm(Z[:, n * q:], axis=1)
        return (prod > 0) & (y <= prod ** (1.0 / p) * (1 + 1e-12) + 1e-12)

    bound = math.hypot(math.sqrt(q) * f.support_radius, f.sup_value ** (q / p)) if math.isfinite(
        f.support_radius) else _lift_bound(f, 0)
    return Implicit(member, n * q + p, bound, np.zeros(n * q + p))


def lift_A_of_delta(f: SConcaveFunction, s: int, cfg: DeltaConfig | None = None) -> Implicit:
    """A_{Delta_{1/s} f, s}, with Delta evaluated pointwise."""
    n = f.n
    alpha = 1.0 / s

    def member(Z):
        Z = np.atleast_2d(Z)
        d = delta_alpha_many(f, alpha, Z[:, :n], cfg).value
        y = np.linalg.norm(Z[:, n:], axis=1)
        return (d > 0) & (y <= d ** (1.0 / s) * (1 + 1e-12) + 1e-12)

    bound = 2 * _lift_bound(f, f.sup_value ** (1.0 / s))
    return Implicit(member, n + s, bound, np.zeros(n + s))
