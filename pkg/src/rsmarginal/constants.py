"""Exact and floating constants appearing in the inequality catalog."""

from __future__ import annotations

import math
from fractions import Fraction


def binom(a: int, b: int) -> int:
    """Exact binomial coefficient (Python integers never overflow)."""
    if b < 0 or b > a:
        return 0
    return math.comb(a, b)


def rs_constant(n: int) -> int:
    return binom(2 * n, n)


def schneider_constant(n: int, p: int) -> int:
    return binom(n * p + n, n)


def marginal_constant(n: int, m: int) -> int:
    return binom(n + m, n)


def psi(n: int, m: int) -> float:
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    return min(n / m, math.sqrt(m))


def beta(x: float, y: float) -> float:
    if x <= 0 or y <= 0:
        raise ValueError("beta needs positive arguments")
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


def beta_exact(x: int, y: int) -> Fraction:
    """B(x, y) = (x-1)!(y-1)!/(x+y-1)! for positive integers."""
    if x < 1 or y < 1:
        raise ValueError("beta_exact needs positive integers")
    return Fraction(math.factorial(x - 1) * math.factorial(y - 1), math.factorial(x + y - 1))


def unit_ball_volume(s: int | float) -> float:
    """Volume of the Euclidean unit ball in R^s (omega_s)."""
    return math.pi ** (s / 2) / math.gamma(s / 2 + 1)


def sphere_area(m: int) -> float:
    """Surface measure of S^{m-1}; equals m * omega_m."""
    return m * unit_ball_volume(m)


def beta_s_constant(n: int, m: int, s: float) -> float:
    """Denominator (n+s) B(n+s, m) of the s-concave sectional bound."""
    if s == 0 or s <= -n:
        raise ValueError("need s != 0 and s > -n")
    return (n + s) * beta(n + s, m)


def beta_s_proof_constant(n: int, m: int, s: float) -> float:
    """m B(n+s+1, m): the radial-profile constant produced by the (1-r/rho)^(n+s) lower bound."""
    if s == 0 or s <= -n:
        raise ValueError("need s != 0 and s > -n")
    return m * beta(n + s + 1, m)


def s_limit_identity(n: int, m: int) -> tuple[Fraction, Fraction]:
    """Both sides of 1/(n B(n,m)) = m/(n+m) C(n+m,n), exactly."""
    left = 1 / (n * beta_exact(n, m))
    right = Fraction(m, n + m) * binom(n + m, n)
    return left, right


def lift_constant(n: int, m: int, s: int) -> int:
    """Marginal binomial constant applied in dimension n+s to a subspace of dimension m+s."""
    return binom(n + m + 2 * s, n + s)


def lift_constant_rational(n: int, m: int, p: int, q: int) -> float:
    """q-th root of C((nq+p)+(mq+p), nq+p), used for s = p/q in lowest terms."""
    if math.gcd(p, q) != 1:
        raise ValueError(f"{p}/{q} is not in lowest terms")
    c = binom(n * q + p + m * q + p, n * q + p)
    return float(c) ** (1.0 / q)
