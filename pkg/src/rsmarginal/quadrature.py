"""Sectional measures, function marginals, layer-cake integrals and the nested marginal integral.

Every routine returns an :class:`Estimate`.  Sections of dimension m <= 2 of
polyhedral bodies and balls are integrated deterministically (chord or fan
cubature around a base point, i.e. polar coordinates with exact radial
extents); everything else falls back to chunked, seeded Monte Carlo over the
section's bounding box.  Monte Carlo chunks derive their streams from
``SeedSequence([seed, chunk])`` and are reduced in order, so thread count never
changes a result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from .density import Density
from .funclass import SConcaveFunction
from .geometry import Ball, ConvexBody, Polytope, Subspace, halfspaces

T0_DEFAULT = 1e-6


@dataclass(frozen=True)
class EstimatorConfig:
    samples: int = 2 ** 20
    seed: int = 0
    method: str = "auto"  # auto | box_mc | polar
    t_nodes: int = 64
    bisection_tol: float = 1e-10
    chunk: int = 2 ** 16
    threads: int = 1
    outer: int = 2 ** 12
    inner: int = 2 ** 18
    gl_nodes: int = 16

    def __post_init__(self):
        if self.samples < 1 or self.chunk < 1 or self.outer < 1 or self.inner < 1:
            raise ValueError("sample counts must be >= 1")
        if self.bisection_tol <= 0:
            raise ValueError("bisection_tol must be positive")
        if self.method not in ("auto", "box_mc", "polar", "layer_cake"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.t_nodes < 2:
            raise ValueError("t_nodes must be >= 2")

    def with_seed(self, seed: int) -> "EstimatorConfig":
        return replace(self, seed=int(seed) % 2 ** 63)


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    method: str
    truncation_bound: float = 0.0
    samples_used: int = 0
    notes: tuple = field(default=())

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")

    @property
    def rel_error(self) -> float:
        if self.value == 0:
            return 0.0 if self.std_error == 0 else math.inf
        return (self.std_error + self.truncation_bound) / abs(self.value)

    def scaled(self, c: float) -> "Estimate":
        return replace(self, value=c * self.value, std_error=abs(c) * self.std_error,
                       truncation_bound=abs(c) * self.truncation_bound)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["notes"] = list(self.notes)
        return d

    def __str__(self):
        return f"{self.value:.10g} ± {self.std_error:.3g} ({self.method})"


def exact(value: float, method: str = "exact") -> Estimate:
    return Estimate(float(value), 0.0, method)


def combine_product(parts: list[Estimate], method: str = "product") -> Estimate:
    v = math.prod(p.value for p in parts)
    rel = math.sqrt(sum(p.rel_error ** 2 for p in parts if p.value != 0))
    return Estimate(v, abs(v) * rel, method, 0.0, sum(p.samples_used for p in parts))


def relative_sigma(a: Estimate, b: Estimate) -> float:
    """Combined relative standard error of a ratio a/b."""
    return math.hypot(a.rel_error, b.rel_error)


# ------------------------------------------------------------------ Monte Carlo core

def derive_seed(seed: int, *keys: int) -> int:
    """A child seed that depends only on (seed, keys)."""
    ss = np.random.SeedSequence([int(seed) % 2 ** 63, *[int(k) for k in keys]])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) % 2 ** 63, index]))


def mc_box_mean(fn: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray, samples: int, seed: int,
                chunk: int = 2 ** 16, threads: int = 1) -> tuple[float, float, int]:
    """Mean of fn over the box [lo, hi] with its standard error, chunked and seeded."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    sizes = [chunk] * (samples // chunk) + ([samples % chunk] if samples % chunk else [])

    def run(i):
        rng = chunk_rng(seed, i)
        U = lo + (hi - lo) * rng.random((sizes[i], len(lo)))
        v = np.asarray(fn(U), dtype=float)
        return float(v.sum()), float(np.dot(v, v))

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    s = sq = 0.0
    for a, b in parts:  # ordered reduction
        s += a
        sq += b
    mean = s / samples
    var = max(sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / max(samples - 1, 1)), samples


def sample_in_body(body: ConvexBody, count: int, seed: int, chunk: int = 2 ** 14) -> np.ndarray:
    """Uniform points in the body by seeded rejection from its bounding box."""
    lo, hi = _body_box(body)
    out, got, i = [], 0, 0
    while got < count:
        rng = chunk_rng(seed, i)
        U = lo + (hi - lo) * rng.random((chunk, body.dim))
        U = U[body.contains_many(U)]
        out.append(U)
        got += len(U)
        i += 1
        if i > 10_000:
            raise RuntimeError("rejection sampling acceptance too low")
    return np.concatenate(out)[:count]


def _body_box(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(body, Polytope):
        return body.vertices.min(axis=0) - 1e-6, body.vertices.max(axis=0) + 1e-6
    if isinstance(body, Ball):
        return body.center - body.radius - 1e-6, body.center + body.radius + 1e-6
    lo, hi = body.box()
    return lo - 1e-6, hi + 1e-6


# ------------------------------------------------------------------ density pieces

def _density_pieces(d: Density):
    """Describe d as smooth, or as an indicator of a union of convex pieces.

    Returns ("smooth", []) or ("indicator", [("hs", A, b) | ("ball", c, r), ...]).
    """
    fam = d.family
    if fam == "lebesgue":
        return "indicator", [("hs", np.zeros((0, d.n)), np.zeros(0))]
    if fam == "body_indicator":
        body = d.params["body"]
        hs = halfspaces(body)
        if hs is not None:
            return "indicator", [("hs", hs[0], hs[1])]
        if isinstance(body, Ball):
            return "indicator", [("ball", body.center, body.radius)]
        return None, []
    if fam in ("wedge", "wedge_pair"):
        a = 1.0 / d.params["k"]
        A = np.array([[0.0, -1.0], [-math.sin(a), math.cos(a)]])
        pieces = [("hs", A, np.zeros(2))]
        if fam == "wedge_pair":
            pieces.append(("hs", -A, np.zeros(2)))
        return "indicator", pieces
    if fam in ("product", "lifted") and not d.params.get("smooth", False):
        return None, []
    return "smooth", []


# ------------------------------------------------------------------ 1-D sections

_GL_CACHE: dict = {}


def gauss_legendre(k: int) -> tuple[np.ndarray, np.ndarray]:
    if k not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(k)
        _GL_CACHE[k] = (0.5 * (x + 1), 0.5 * w)  # on [0, 1]
    return _GL_CACHE[k]


def _hs_interval(A, b, y, u):
    """{t : A (y + t u) <= b} for each row of y (shape (P, n)) -> lo, hi arrays."""
    a = A @ u
    r = b[None, :] - y @ A.T
    lo = np.full(len(y), -np.inf)
    hi = np.full(len(y), np.inf)
    pos, neg = a > 1e-14, a < -1e-14
    if pos.any():
        hi = np.min(r[:, pos] / a[pos], axis=1)
    if neg.any():
        lo = np.max(r[:, neg] / a[neg], axis=1)
    zero = ~(pos | neg)
    if zero.any():
        bad = np.any(r[:, zero] < -1e-12, axis=1)
        lo = np.where(bad, 0.0, lo)
        hi = np.where(bad, 0.0, hi)
    return lo, hi


def _ball_interval(c, r, y, u):
    w = y - c
    bu = w @ u
    disc = bu ** 2 - (np.sum(w * w, axis=1) - r * r)
    ok = disc >= 0
    s = np.sqrt(np.where(ok, disc, 0.0))
    return np.where(ok, -bu - s, 0.0), np.where(ok, -bu + s, 0.0)


def _generic_interval(body: ConvexBody, y, u, tol: float):
    """Chord of an implicit body along y + t u, by a grid scan then bisection."""
    R = body.bound + float(np.max(np.linalg.norm(y, axis=1))) + 1.0
    grid = np.linspace(-R, R, 513)
    lo = np.zeros(len(y))
    hi = np.zeros(len(y))
    for i, yi in enumerate(y):
        inside = body.contains_many(yi + grid[:, None] * u)
        idx = np.flatnonzero(inside)
        if idx.size == 0:
            continue
        c = yi + grid[idx[len(idx) // 2]] * u
        t0 = grid[idx[len(idx) // 2]]
        fwd = _bisect_line(body, c, u, R, tol)
        bwd = _bisect_line(body, c, -u, R, tol)
        lo[i], hi[i] = t0 - bwd, t0 + fwd
    return lo, hi


def _bisect_line(body, c, u, R, tol):
    a, b = 0.0, 2 * R
    while b - a > tol * max(1.0, R):
        m = 0.5 * (a + b)
        if body.contains_many((c + m * u)[None, :])[0]:
            a = m
        else:
            b = m
    return a


def body_intervals(body: ConvexBody, y: np.ndarray, u: np.ndarray, tol: float = 1e-10):
    y = np.atleast_2d(y)
    hs = halfspaces(body)
    if hs is not None:
        return _hs_interval(hs[0], hs[1], y, u)
    if isinstance(body, Ball):
        return _ball_interval(body.center, body.radius, y, u)
    return _generic_interval(body, y, u, tol)


def _chord_integrals(d: Density, y: np.ndarray, u: np.ndarray, lo: np.ndarray, hi: np.ndarray, k: int):
    """int_lo^hi phi(y + t u) dt for each row, composite Gauss-Legendre split at the point nearest the origin."""
    x, w = gauss_legendre(k)
    out = np.zeros(len(y))
    if math.isfinite(d.support_radius):
        # keep the support edge of the density off the interior of the rule
        slo, shi = _ball_interval(np.zeros(d.n), d.support_radius, y, u)
        lo, hi = np.maximum(lo, slo), np.minimum(hi, shi)
    ok = hi > lo
    if not ok.any():
        return out
    y, lo, hi = y[ok], lo[ok], hi[ok]
    tstar = np.clip(-(y @ u), lo, hi)
    total = np.zeros(len(y))
    for a, b in ((lo, tstar), (tstar, hi)):
        L = b - a
        T = a[:, None] + L[:, None] * x[None, :]
        P = y[:, None, :] + T[..., None] * u
        vals = d(P.reshape(-1, d.n)).reshape(T.shape)
        total += L * (vals @ w)
    out[ok] = total
    return out


def line_measures(body: ConvexBody, d: Density, y: np.ndarray, u: np.ndarray, k: int = 16,
                  tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray] | None:
    """mu(body ∩ (y + R u)) for many base points y; returns (values, error estimates) or None if unsupported."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    lo, hi = body_intervals(body, y, u, tol)
    kind, pieces = _density_pieces(d)
    if kind is None:
        return None
    if kind == "indicator":
        total = np.zeros(len(y))
        for p in pieces:
            if p[0] == "hs":
                plo, phi_ = _hs_interval(p[1], p[2], y, u) if len(p[2]) else (lo, hi)
            else:
                plo, phi_ = _ball_interval(p[1], p[2], y, u)
            total += np.maximum(np.minimum(hi, phi_) - np.maximum(lo, plo), 0.0)
        return total, np.zeros(len(y))
    v1 = _chord_integrals(d, y, u, lo, hi, k)
    v2 = _chord_integrals(d, y, u, lo, hi, 2 * k)
    return v2, np.abs(v2 - v1)


# ------------------------------------------------------------------ 2-D sections

def _clip_polygon(P: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon against a.x <= b."""
    if len(P) == 0:
        return P
    s = P @ a - b
    out = []
    n = len(P)
    for i in range(n):
        j = (i + 1) % n
        si, sj = s[i], s[j]
        if si <= 0:
            out.append(P[i])
        if (si < 0 < sj) or (sj < 0 < si):
            t = si / (si - sj)
            out.append(P[i] + t * (P[j] - P[i]))
    return np.array(out) if out else np.zeros((0, 2))


def section_polygon(A: np.ndarray, b: np.ndarray, y: np.ndarray, B: np.ndarray, R: float) -> np.ndarray:
    """Polygon {t in R^2 : A (y + B^T t) <= b} in plane coordinates (clipped to a box of half-width R)."""
    A2 = A @ B.T
    r = b - A @ y
    P = np.array([[-R, -R], [R, -R], [R, R], [-R, R]], dtype=float)
    for a, bi in zip(A2, r):
        na = np.linalg.norm(a)
        if na < 1e-14:
            if bi < -1e-12:
                return np.zeros((0, 2))
            continue
        P = _clip_polygon(P, a, bi)
        if len(P) < 3:
            return np.zeros((0, 2))
    return P


def _polygon_area(P):
    x, y = P[:, 0], P[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _fan_integral(P: np.ndarray, c: np.ndarray, g: Callable[[np.ndarray], np.ndarray], k: int) -> float:
    """Integral of g over the convex polygon P via a triangle fan from c with collapsed Gauss-Legendre rules."""
    x, w = gauss_legendre(k)
    V = P - c
    V2 = np.roll(V, -1, axis=0)
    det = np.abs(V[:, 0] * V2[:, 1] - V[:, 1] * V2[:, 0])  # (T,)
    xi, eta = np.meshgrid(x, x, indexing="ij")
    W = (w[:, None] * w[None, :]) * xi  # Jacobian factor xi
    pts = c + xi[None, ..., None] * ((1 - eta)[None, ..., None] * V[:, None, None, :]
                                     + eta[None, ..., None] * V2[:, None, None, :])
    vals = g(pts.reshape(-1, 2)).reshape(len(V), k, k)
    return float(np.sum(det[:, None, None] * W[None] * vals))


def _disk_integral(c: np.ndarray, r: float, g: Callable[[np.ndarray], np.ndarray], k: int) -> float:
    x, w = gauss_legendre(k)
    nth = 4 * k
    th = 2 * np.pi * np.arange(nth) / nth
    U = np.stack([np.cos(th), np.sin(th)], axis=1)
    rr = r * x
    pts = c + rr[:, None, None] * U[None, :, :]
    vals = g(pts.reshape(-1, 2)).reshape(k, nth)
    return float((2 * np.pi / nth) * r * np.sum(w[:, None] * rr[:, None] * vals))


def plane_measure(body: ConvexBody, d: Density, y: np.ndarray, H: Subspace, k: int = 8):
    """mu(body ∩ (y + H)) for dim H = 2 by fan cubature; returns (value, error) or None if unsupported."""
    B = H.basis
    kind, pieces = _density_pieces(d)
    if kind is None:
        return None
    hs = halfspaces(body)
    R = body.bound + float(np.linalg.norm(y)) + 1.0
    g_plane = lambda T: d(y + T @ B)  # noqa: E731
    general = _plane_general(body, hs, kind, pieces, d, y, B, g_plane, k)
    if general is not None:
        return general
    if hs is not None:
        if kind == "indicator":
            total = 0.0
            for p in pieces:
                if p[0] != "hs":
                    return None
                A = np.vstack([hs[0], p[1]])
                b = np.concatenate([hs[1], p[2]])
                P = section_polygon(A, b, y, B, R)
                total += _polygon_area(P) if len(P) >= 3 else 0.0
            return total, 0.0
        if math.isfinite(d.support_radius):
            return None
        P = section_polygon(hs[0], hs[1], y, B, R)
        if len(P) < 3:
            return 0.0, 0.0
        # fan from the origin's foot when it lies in the section (smooths radial kinks), else the centroid
        c = P.mean(axis=0)
        foot = -(B @ y)
        if np.all(_inside_polygon(P, foot)):
            c = foot
        v1 = _fan_integral(P, c, g_plane, k)
        v2 = _fan_integral(P, c, g_plane, 2 * k)
        return v2, abs(v2 - v1)
    if isinstance(body, Ball):
        w = y - body.center
        c_amb = -w @ B.T  # plane coords of the projected centre
        dist2 = float(w @ w - c_amb @ c_amb)
        r2 = body.radius ** 2 - dist2
        if r2 <= 0:
            return 0.0, 0.0
        r = math.sqrt(r2)
        if kind == "indicator":
            if all(p[0] == "hs" and len(p[2]) == 0 for p in pieces):
                return math.pi * r2, 0.0
            return None
        if math.isfinite(d.support_radius):
            return None
        v1 = _disk_integral(c_amb, r, g_plane, 2 * k)
        v2 = _disk_integral(c_amb, r, g_plane, 4 * k)
        return v2, abs(v2 - v1)
    return None


def _region_rho(c, U, lines, disks):
    """Ray exits from c along unit rows of U for {a.t <= r} ∩ disks; returns (rho, active constraint index)."""
    rho = np.full(len(U), np.inf)
    act = np.full(len(U), -1)
    A2, r = lines
    if len(r):
        au = U @ A2.T
        slack = r - A2 @ c
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(au > 1e-15, slack[None, :] / au, np.inf)
        j = np.argmin(t, axis=1)
        rho = t[np.arange(len(U)), j]
        act = j
    for i, (cd, rd) in enumerate(disks):
        q = c - cd
        bu = U @ q
        disc = np.maximum(bu ** 2 - (q @ q - rd * rd), 0.0)
        t = -bu + np.sqrt(disc)
        better = t < rho
        rho = np.where(better, t, rho)
        act = np.where(better, len(r) + i, act)
    return np.maximum(rho, 0.0), act


def _region_point(lines, disks):
    """A point inside {a.t <= r} ∩ disks, or None when the region is (numerically) empty."""
    A2, r = lines
    th = 2 * np.pi * np.arange(64) / 64
    if disks:
        cd, rd = disks[0]
        P = cd + rd * math.cos(math.pi / 64) * np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        return None
    for cd, rd in disks[1:]:
        for tt in th:
            a = np.array([math.cos(tt), math.sin(tt)])
            P = _clip_polygon(P, a, float(a @ cd) + rd * math.cos(math.pi / 64))
            if len(P) < 3:
                return None
    for a, b in zip(A2, r):
        P = _clip_polygon(P, a, b)
        if len(P) < 3:
            return None
    if _polygon_area(P) < 1e-18:
        return None
    return P.mean(axis=0)


def _star_region_integral(c, lines, disks, g, k: int) -> float:
    """int of g over {a.t <= r} ∩ disks in polar coordinates about the interior point c.

    The angle range is split wherever the active constraint changes, so the
    radial extent is smooth on every panel and Gauss-Legendre converges fast.
    """
    grid = 2 * np.pi * np.arange(1024) / 1024
    U = np.stack([np.cos(grid), np.sin(grid)], axis=1)
    _, act = _region_rho(c, U, lines, disks)
    breaks = [0.0]
    for i in np.nonzero(act != np.roll(act, -1))[0]:
        a, b = grid[i], grid[i] + 2 * np.pi / 1024
        ia = act[i]
        for _ in range(50):
            mid = 0.5 * (a + b)
            _, am = _region_rho(c, np.array([[math.cos(mid), math.sin(mid)]]), lines, disks)
            if am[0] == ia:
                a = mid
            else:
                b = mid
        breaks.append(0.5 * (a + b))
    breaks = np.unique(np.array(breaks + [2 * np.pi]))
    x, w = gauss_legendre(k)
    nlines = len(lines[1])
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a < 1e-15:
            continue
        mid = 0.5 * (a + b)
        ends = np.array([[math.cos(a), math.sin(a)], [math.cos(b), math.sin(b)], [math.cos(mid), math.sin(mid)]])
        rho_e, act_e = _region_rho(c, ends, lines, disks)
        if act_e[2] < nlines:
            # straight edge: the panel is the triangle (c, exit(a), exit(b))
            total += _triangle_integral(c, c + rho_e[0] * ends[0], c + rho_e[1] * ends[1], g, k)
            continue
        th = a + (b - a) * x
        Ut = np.stack([np.cos(th), np.sin(th)], axis=1)
        rho, _ = _region_rho(c, Ut, lines, disks)
        rr = rho[None, :] * x[:, None]
        pts = c + rr[..., None] * Ut[None, :, :]
        vals = g(pts.reshape(-1, 2)).reshape(k, k)
        total += float((b - a) * np.sum(w[None, :] * w[:, None] * rho[None, :] * rr * vals))
    return total


def _triangle_integral(c, p, q, g, k: int) -> float:
    """Collapsed Gauss-Legendre rule on the triangle (c, p, q)."""
    x, w = gauss_legendre(k)
    xi, eta = np.meshgrid(x, x, indexing="ij")
    V, V2 = p - c, q - c
    det = abs(V[0] * V2[1] - V[1] * V2[0])
    pts = c + xi[..., None] * ((1 - eta)[..., None] * V + eta[..., None] * V2)
    vals = g(pts.reshape(-1, 2)).reshape(k, k)
    return float(det * np.sum((w[:, None] * w[None, :]) * xi * vals))


def _plane_region(lines, disks, g, foot, k):
    """(value, error) of int g over a polygon ∩ disks region; zero for empty regions."""
    A2, r = lines
    if not disks:
        return None
    c = None
    if np.all(A2 @ foot <= r - 1e-12) and all(np.sum((foot - cd) ** 2) < (rd * (1 - 1e-12)) ** 2
                                               for cd, rd in disks):
        c = foot
    if c is None:
        c = _region_point(lines, disks)
        if c is None:
            return 0.0, 0.0
    v1 = _star_region_integral(c, lines, disks, g, k)
    v2 = _star_region_integral(c, lines, disks, g, 2 * k)
    return v2, abs(v2 - v1)


def _plane_general(body, hs, kind, pieces, d, y, B, g_plane, k):
    """Star-region cubature for the combinations the fan and disk rules do not cover."""
    def ball_disk(c, r):
        w = y - c
        c2 = -w @ B.T
        r2 = r * r - float(w @ w - c2 @ c2)
        return None if r2 <= 0 else (c2, math.sqrt(r2))

    def body_lines_disks():
        if hs is not None:
            return (hs[0] @ B.T, hs[1] - hs[0] @ y), []
        if isinstance(body, Ball):
            dk = ball_disk(body.center, body.radius)
            return (np.zeros((0, 2)), np.zeros(0)), ([] if dk is None else [dk])
        return None

    foot = -(B @ y)
    if kind == "indicator":
        needs = any(p[0] == "ball" for p in pieces) or (isinstance(body, Ball) and any(
            p[0] == "hs" and len(p[2]) for p in pieces))
        if not needs:
            return None
        base = body_lines_disks()
        if base is None:
            return None
        (A2, r), disks = base
        if isinstance(body, Ball) and not disks:
            return 0.0, 0.0
        total, err = 0.0, 0.0
        one = lambda T: np.ones(len(T))  # noqa: E731
        for p in pieces:
            if p[0] == "hs":
                lines = (np.vstack([A2, p[1] @ B.T]), np.concatenate([r, p[2] - p[1] @ y]))
                dk = list(disks)
            else:
                extra = ball_disk(p[1], p[2])
                if extra is None:
                    continue
                lines = (A2, r)
                dk = list(disks) + [extra]
            if not dk:
                return None
            res = _plane_region(lines, dk, one, foot, k)
            total += res[0]
            err += res[1]
        return total, err
    if kind == "smooth" and math.isfinite(d.support_radius):
        base = body_lines_disks()
        if base is None:
            return None
        (A2, r), disks = base
        if isinstance(body, Ball) and not disks:
            return 0.0, 0.0
        supp = ball_disk(np.zeros(len(y)), d.support_radius)
        if supp is None:
            return 0.0, 0.0
        return _plane_region((A2, r), list(disks) + [supp], g_plane, foot, k)
    return None


def _inside_polygon(P, x):
    V = P - x
    V2 = np.roll(V, -1, axis=0)
    cross = V[:, 0] * V2[:, 1] - V[:, 1] * V2[:, 0]
    return np.all(cross >= -1e-14) or np.all(cross <= 1e-14)


# ------------------------------------------------------------------ public section routines

def _section_box(body: ConvexBody, H: Subspace, y: np.ndarray, d: Density):
    """Bounding box of body ∩ (y + H) in plane coordinates."""
    B = H.basis
    if isinstance(body, Polytope) and not (body.dim > 3 and len(body.vertices) > 10_000):
        proj = (body.vertices - y) @ B.T
        lo, hi = proj.min(axis=0), proj.max(axis=0)
    else:
        yh = B @ y
        yperp = y - yh @ B
        R2 = body.bound ** 2 - float(yperp @ yperp)
        # bound is a norm bound for bodies containing the origin; otherwise inflate by |interior point|
        R = math.sqrt(max(R2, 0.0)) if np.linalg.norm(body.interior_point) == 0 else body.bound + np.linalg.norm(
            body.interior_point)
        lo, hi = -yh - R, -yh + R
        if isinstance(body, Ball):
            c = (body.center - y) @ B.T
            lo, hi = c - body.radius, c + body.radius
    if math.isfinite(d.support_radius):
        yh = B @ y
        lo = np.maximum(lo, -yh - d.support_radius)
        hi = np.minimum(hi, -yh + d.support_radius)
    return lo - 1e-6, hi + 1e-6


def measure_section(body: ConvexBody, H: Subspace, y, d: Density, cfg: EstimatorConfig | None = None) -> Estimate:
    """int_H phi(y + h) chi_body(y + h) dh.  Only the H-orthogonal part of y matters."""
    cfg = cfg or EstimatorConfig()
    y = np.asarray(y, dtype=float)
    if body.dim != H.ambient_dim or d.n != body.dim or y.shape != (body.dim,):
        raise ValueError("dimension mismatch in measure_section")
    m = H.dim
    if cfg.method in ("auto", "polar", "layer_cake"):
        res = None
        if m == 1:
            res = line_measures(body, d, y[None, :], H.basis[0], cfg.gl_nodes, cfg.bisection_tol)
            if res is not None:
                res = (float(res[0][0]), float(res[1][0]))
        elif m == 2:
            res = plane_measure(body, d, y, H, max(cfg.gl_nodes // 2, 4))
        if res is not None:
            return Estimate(res[0], res[1], "polar")
        if cfg.method == "polar":
            notes = ("polar unavailable for this body/density; fell back to box_mc",)
        else:
            notes = ()
    else:
        notes = ()
    return _box_mc_section(body, H, y, d, cfg, notes)


def _box_mc_section(body, H, y, d, cfg, notes=()) -> Estimate:
    B = H.basis
    lo, hi = _section_box(body, H, y, d)
    if np.any(hi <= lo):
        return Estimate(0.0, 0.0, "box_mc", samples_used=0, notes=notes)
    vol = float(np.prod(hi - lo))

    def fn(T):
        X = y + T @ B
        return d(X) * body.contains_many(X)

    mean, se, ns = mc_box_mean(fn, lo, hi, cfg.samples, cfg.seed, cfg.chunk, cfg.threads)
    return Estimate(vol * mean, vol * se, "box_mc", samples_used=ns, notes=tuple(notes))


def integrate_pointwise_section(g: Callable[[np.ndarray], np.ndarray], n: int, radius: float, H: Subspace, y,
                                d: Density, cfg: EstimatorConfig | None = None,
                                center: np.ndarray | None = None) -> Estimate:
    """int_H g(y+h) phi(y+h) dh for g supported in Ball(center, radius)."""
    cfg = cfg or EstimatorConfig()
    y = np.asarray(y, dtype=float)
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    B = H.basis
    m = H.dim
    supp = Ball(center, radius)
    gd = lambda X: g(X) * d(X)  # noqa: E731
    kind, _ = _density_pieces(d)
    smooth_phi = kind == "smooth" or d.family == "lebesgue"
    if m == 1 and smooth_phi and cfg.method != "box_mc":
        u = B[0]
        lo, hi = _ball_interval(center, radius, y[None, :], u)
        if hi[0] <= lo[0]:
            return Estimate(0.0, 0.0, "polar")
        vals = []
        for k in (cfg.gl_nodes * 2, cfg.gl_nodes * 4):
            vals.append(_composite_line(gd, y, u, lo[0], hi[0], k))
        return Estimate(vals[1], abs(vals[1] - vals[0]), "polar")
    if m == 2 and smooth_phi and cfg.method != "box_mc":
        w = y - center
        c_amb = -w @ B.T
        r2 = radius ** 2 - float(w @ w - c_amb @ c_amb)
        if r2 <= 0:
            return Estimate(0.0, 0.0, "polar")
        foot = -(B @ y)
        g_plane = lambda T: gd(y + T @ B)  # noqa: E731
        # polar about the origin's foot (where radial kinks sit) when it lies in the disk
        if np.sum((foot - c_amb) ** 2) < r2:
            v = [_star_disk_integral(foot, c_amb, math.sqrt(r2), g_plane, k) for k in (32, 64)]
        else:
            v = [_disk_integral(c_amb, math.sqrt(r2), g_plane, k) for k in (32, 64)]
        return Estimate(v[1], abs(v[1] - v[0]), "polar")

    def fn(T):
        X = y + T @ B
        return gd(X) * supp.contains_many(X)

    c = (center - y) @ B.T
    lo, hi = c - radius, c + radius
    vol = float(np.prod(hi - lo))
    mean, se, ns = mc_box_mean(fn, lo, hi, cfg.samples, cfg.seed, cfg.chunk, cfg.threads)
    return Estimate(vol * mean, vol * se, "box_mc", samples_used=ns)


def _composite_line(gd, y, u, lo, hi, k, panels: int = 8) -> float:
    x, w = gauss_legendre(k)
    tstar = float(np.clip(-(y @ u), lo, hi))
    total = 0.0
    for a, b in ((lo, tstar), (tstar, hi)):
        if b <= a:
            continue
        edges = np.linspace(a, b, panels + 1)
        T = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
        vals = gd(y + T[:, None] * u)
        total += float(np.sum(np.tile(w, panels) * np.repeat(np.diff(edges), k) * vals))
    return total


def _star_disk_integral(p, c, r, g, k) -> float:
    """Polar integral over a disk about an interior point p (radial extent from the circle equation)."""
    x, w = gauss_legendre(k)
    nth = 4 * k
    th = 2 * np.pi * (np.arange(nth) + 0.5) / nth
    U = np.stack([np.cos(th), np.sin(th)], axis=1)
    q = p - c
    bu = U @ q
    rho = -bu + np.sqrt(bu ** 2 - (q @ q - r * r))
    rr = rho[None, :] * x[:, None]  # (k, nth)
    pts = p + rr[..., None] * U[None, :, :]
    vals = g(pts.reshape(-1, 2)).reshape(k, nth)
    return float((2 * np.pi / nth) * np.sum(w[:, None] * rho[None, :] * rr * vals))


# ------------------------------------------------------------------ function marginals

def _t_rule(f: SConcaveFunction, k: int, t0: float):
    """Nodes/weights for int_0^1 g(t) dt; unbounded level sets use t = exp(-u^2) truncated at t0."""
    x, w = gauss_legendre(k)
    if f.unbounded_levels:
        umax = math.sqrt(math.log(1 / t0))
        u = umax * x
        t = np.exp(-u * u)
        return t, umax * w * 2 * u * t
    return x, w


def _t0_for(f: SConcaveFunction) -> float:
    return 1e-30 if f.family == "power_decay" else T0_DEFAULT


def integrate_function_section(f: SConcaveFunction, H: Subspace, y, d: Density,
                               cfg: EstimatorConfig | None = None) -> Estimate:
    """int_{H+y} f dmu by the layer-cake formula when level sets are available."""
    cfg = cfg or EstimatorConfig()
    y = np.asarray(y, dtype=float)
    if f.level_body is not None:
        body = f.level_set(1.0)
        return measure_section(body, H, y, d, cfg).scaled(f.sup_value)
    if f.level_radius is None:
        R = f.support_radius if math.isfinite(f.support_radius) else 12.0
        return integrate_pointwise_section(f, f.n, R, H, y, d, cfg)
    t0 = _t0_for(f)

    def quad(k):
        t, w = _t_rule(f, k, t0)
        vals, errs, ns = [], [], 0
        for tj in t:
            e = measure_section(f.level_set(float(tj)), H, y, d, cfg)
            vals.append(e.value)
            errs.append(e.std_error)
            ns += e.samples_used
        vals, errs = np.array(vals), np.array(errs)
        return float(w @ vals), float(np.sqrt(np.sum((w * errs) ** 2))), ns

    k = cfg.t_nodes
    v1, _, _ = quad(k // 2)
    v2, se, ns = quad(k)
    tail = f.level_tail_bound(t0, H.dim) * _phi_max(d) if f.unbounded_levels else 0.0
    s = f.sup_value
    return Estimate(s * v2, s * math.hypot(se, abs(v2 - v1)), "layer_cake", s * tail, ns)


def _phi_max(d: Density) -> float:
    return d.attributes.sup_value


def layer_cake(f: SConcaveFunction, node_value: Callable[[ConvexBody, int], Estimate], t_nodes: int,
               m: int, phi_max: float = 1.0) -> tuple[Estimate, list]:
    """int_0^1 node_value(C_t(f)) dt with node doubling; returns (estimate without ||f||, per-node records)."""
    t0 = _t0_for(f)
    if f.level_body is not None:
        e = node_value(f.level_set(1.0), 0)
        return e, [(1.0, e)]

    def quad(k, tag):
        t, w = _t_rule(f, k, t0)
        es = [node_value(f.level_set(float(tj)), tag * 1000 + j) for j, tj in enumerate(t)]
        vals = np.array([e.value for e in es])
        errs = np.array([e.std_error for e in es])
        return float(w @ vals), float(np.sqrt(np.sum((w * errs) ** 2))), list(zip(t.tolist(), es))

    v1, _, _ = quad(t_nodes // 2, 1)
    v2, se, recs = quad(t_nodes, 2)
    tail = f.level_tail_bound(t0, m) * phi_max if f.unbounded_levels else 0.0
    return Estimate(v2, math.hypot(se, abs(v2 - v1)), "layer_cake", tail,
                    sum(e.samples_used for _, e in recs)), recs


# ------------------------------------------------------------------ nested marginal integral

def nested_rhs(K: Polytope, densities: list[Density], subspaces: list[Subspace], cfg: EstimatorConfig | None = None,
               companions: list[ConvexBody] | None = None) -> Estimate:
    """E_{y ~ U(K)} prod_i mu_i((y + L_i) ∩ H_i), with L_i = -K unless companions are given."""
    cfg = cfg or EstimatorConfig()
    p = len(densities)
    if len(subspaces) != p:
        raise ValueError("densities and subspaces must have equal length")
    Ls = [K.reflect()] * p if companions is None else list(companions)
    Y = sample_in_body(K, cfg.outer, cfg.seed)
    prod = np.ones(len(Y))
    qerr = np.zeros(len(Y))
    ns = 0
    for i, (d, H, L) in enumerate(zip(densities, subspaces, Ls)):
        vals, errs = _section_profile(L, H, d, Y, cfg.with_seed(derive_seed(cfg.seed, i)))
        with np.errstate(invalid="ignore", divide="ignore"):
            qerr = np.where(vals > 0, qerr + errs / np.where(vals > 0, vals, 1.0), qerr)
        prod = prod * vals
        ns += len(Y)
    mean = float(prod.mean())
    se = float(prod.std(ddof=1) / math.sqrt(len(prod))) if len(prod) > 1 else 0.0
    qe = float(np.mean(prod * qerr))
    return Estimate(mean, math.hypot(se, qe), "nested_mc", samples_used=ns)


def _section_profile(L: ConvexBody, H: Subspace, d: Density, Y: np.ndarray, cfg: EstimatorConfig):
    """mu((y + L) ∩ H) for each row y of Y."""
    if H.dim == 1 and cfg.method != "box_mc":
        # (y + L) ∩ R u = {t u : t u - y in L}: chord of L along u from base point -y, shifted
        res = _line_measures_shifted(L, d, Y, H.basis[0], cfg)
        if res is not None:
            return res
    vals = np.zeros(len(Y))
    errs = np.zeros(len(Y))
    inner = replace(cfg, samples=cfg.inner)
    for j, y in enumerate(Y):
        e = measure_section(L.translate(y), H, np.zeros(L.dim), d, inner.with_seed(derive_seed(cfg.seed, j)))
        vals[j] = e.value
        errs[j] = e.std_error
    return vals, errs


def _line_measures_shifted(L, d, Y, u, cfg):
    """Vectorised mu((y + L) ∩ R u) over rows y."""
    hs = halfspaces(L)
    kind, pieces = _density_pieces(d)
    if kind is None:
        return None
    zeros = np.zeros_like(Y)
    if hs is not None:
        lo, hi = _hs_interval(hs[0], hs[1], -Y, u)
    elif isinstance(L, Ball):
        lo, hi = _ball_interval(L.center, L.radius, -Y, u)
    else:
        return None
    # chord in L along -y + t u equals chord of y + L along t u
    if kind == "indicator":
        total = np.zeros(len(Y))
        for p in pieces:
            if p[0] == "hs":
                plo, phi_ = _hs_interval(p[1], p[2], zeros, u) if len(p[2]) else (lo, hi)
            else:
                plo, phi_ = _ball_interval(p[1], p[2], zeros, u)
            total += np.maximum(np.minimum(hi, phi_) - np.maximum(lo, plo), 0.0)
        return total, np.zeros(len(Y))
    v1 = _chord_integrals(d, zeros, u, lo, hi, cfg.gl_nodes)
    v2 = _chord_integrals(d, zeros, u, lo, hi, 2 * cfg.gl_nodes)
    return v2, np.abs(v2 - v1)
