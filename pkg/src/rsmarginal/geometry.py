"""Convex bodies, Minkowski algebra, p-difference bodies and sections.

Bodies are immutable. Every body answers vectorised membership queries
(``contains_many``), which is what the Monte Carlo estimators use; the
single-point ``contains`` goes through an LP for polytope-derived bodies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import nnls
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from . import lp

TAU_MEM = 1e-9
TAU_BIS = 1e-10


class GeometryError(ValueError):
    pass


def _vec(x, dim: int | None = None) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if dim is not None and x.shape[-1] != dim:
        raise GeometryError(f"dimension mismatch: expected {dim}, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise GeometryError("non-finite coordinates")
    return x


def _unit(u, dim: int) -> np.ndarray:
    u = _vec(u, dim)
    nrm = np.linalg.norm(u)
    if nrm < 1e-15:
        raise GeometryError("zero direction")
    return u / nrm


# ---------------------------------------------------------------- subspaces

@dataclass(frozen=True)
class Subspace:
    """An m-dimensional linear subspace H of R^n with an orthonormal basis (rows)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.basis, dtype=float))
        m, n = B.shape
        if not 1 <= m <= n:
            raise GeometryError(f"need 1 <= m <= n, got m={m}, n={n}")
        if np.max(np.abs(B @ B.T - np.eye(m))) > 1e-10:
            raise GeometryError("basis is not orthonormal")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def from_vectors(cls, vectors) -> "Subspace":
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        Q, R = np.linalg.qr(V.T)
        if np.min(np.abs(np.diag(R))) < 1e-12:
            raise GeometryError("spanning vectors are dependent")
        return cls(Q.T)

    @classmethod
    def coordinate(cls, n: int, axes) -> "Subspace":
        return cls(np.eye(n)[list(axes)])

    @classmethod
    def random(cls, n: int, m: int, seed: int) -> "Subspace":
        rng = np.random.default_rng(seed)
        return cls.from_vectors(rng.standard_normal((m, n)))

    def complement(self) -> np.ndarray:
        """Orthonormal basis (rows) of the orthogonal complement; shape (n-m, n)."""
        n, m = self.ambient_dim, self.dim
        if m == n:
            return np.zeros((0, n))
        _, _, Vt = np.linalg.svd(self.basis)
        return Vt[m:]

    def perp_component(self, y) -> np.ndarray:
        y = _vec(y, self.ambient_dim)
        return y - (self.basis @ y) @ self.basis

    def embed(self, t: np.ndarray) -> np.ndarray:
        """Map H-coordinates (..., m) to points of R^n."""
        return np.asarray(t) @ self.basis

    def to_record(self) -> list[list[float]]:
        return self.basis.tolist()


def product_subspace(subspaces: list[Subspace]) -> Subspace:
    """H_1 x ... x H_p inside (R^n)^p."""
    n = sum(H.ambient_dim for H in subspaces)
    m = sum(H.dim for H in subspaces)
    B = np.zeros((m, n))
    r = c = 0
    for H in subspaces:
        B[r:r + H.dim, c:c + H.ambient_dim] = H.basis
        r += H.dim
        c += H.ambient_dim
    return Subspace(B)


# ---------------------------------------------------------------- bodies

class ConvexBody:
    """Base class. Subclasses set ``dim``, ``bound`` and ``interior_point``."""

    dim: int
    bound: float
    interior_point: np.ndarray
    kind = "body"

    def contains_many(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x) -> bool:
        x = _vec(x, self.dim)
        return bool(self.contains_many(x[None, :])[0])

    def support(self, u) -> float:
        u = _unit(u, self.dim)
        # generic: boundary point along u from the interior point, then radial bracketing
        c = self.interior_point
        dirs = _sphere_grid(self.dim, 2048, seed=0)
        dirs = np.vstack([dirs, u[None, :]])
        r = self.ray_exit(c, dirs)
        pts = c + r[:, None] * dirs
        return float(np.max(pts @ u))

    def ray_exit(self, c, U: np.ndarray) -> np.ndarray:
        """Largest t with c + t u in the body, for each row u of U (c assumed inside)."""
        return _bisect_exit(self, c, U)

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        E = np.eye(self.dim)
        hi = np.array([self.support(e) for e in E])
        lo = -np.array([self.support(-e) for e in E])
        return lo, hi

    def translate(self, v) -> "ConvexBody":
        v = _vec(v, self.dim)
        return Implicit(lambda X: self.contains_many(X - v), self.dim, self.bound + np.linalg.norm(v),
                        self.interior_point + v)

    def reflect(self) -> "ConvexBody":
        return Implicit(lambda X: self.contains_many(-X), self.dim, self.bound, -self.interior_point)

    def scale(self, a: float) -> "ConvexBody":
        if a <= 0:
            raise GeometryError("scale factor must be positive")
        return Implicit(lambda X: self.contains_many(X / a), self.dim, self.bound * a, self.interior_point * a)

    def to_record(self) -> str:
        raise GeometryError(f"{self.kind} bodies have no plain-text record")


def _bisect_exit(body: ConvexBody, c, U: np.ndarray, rel_tol: float = TAU_BIS) -> np.ndarray:
    U = np.atleast_2d(U)
    c = np.broadcast_to(np.asarray(c, dtype=float), U.shape)
    hi = np.full(U.shape[0], 2.0 * body.bound + np.linalg.norm(c, axis=1).max() + 1.0)
    lo = np.zeros(U.shape[0])
    iters = int(math.ceil(math.log2(max(hi.max(), 1.0) / rel_tol))) + 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = body.contains_many(c + mid[:, None] * U)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return lo


def _sphere_grid(d: int, k: int, seed: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        th = np.linspace(0, 2 * np.pi, k, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    g = np.random.default_rng(seed).standard_normal((k, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class Polytope(ConvexBody):
    """V-polytope; the facet description {A x <= b} is computed once and carried along."""

    kind = "vpolytope"

    def __init__(self, vertices, seed: int | None = None, _hrep=None):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if V.ndim != 2:
            raise GeometryError("vertices must be a 2-D array")
        self.dim = V.shape[1]
        self.seed = seed
        if _hrep is not None:
            self.vertices, self.A, self.b, self._volume = _hrep
        else:
            self.vertices, self.A, self.b, self._volume = _hull(V)
        for arr in (self.vertices, self.A, self.b):
            arr.setflags(write=False)
        self.bound = float(np.max(np.linalg.norm(self.vertices, axis=1)))
        self.interior_point = self.vertices.mean(axis=0)

    @property
    def volume(self) -> float:
        return self._volume

    def contains_many(self, X):
        X = np.atleast_2d(X)
        return np.all(X @ self.A.T <= self.b + TAU_MEM, axis=1)

    def contains(self, x) -> bool:
        x = _vec(x, self.dim)
        return lp.convex_combination_feasible(self.vertices, x)

    def support(self, u) -> float:
        u = _unit(u, self.dim)
        return float(np.max(self.vertices @ u))

    def ray_exit(self, c, U):
        U = np.atleast_2d(U)
        c = np.asarray(c, dtype=float)
        slack = self.b - c @ self.A.T  # (F,) or (k, F)
        rate = U @ self.A.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(rate > 1e-15, slack / rate, np.inf)
        return np.maximum(np.min(t, axis=-1), 0.0)

    def translate(self, v):
        v = _vec(v, self.dim)
        return Polytope(self.vertices + v, seed=self.seed,
                        _hrep=(self.vertices + v, self.A, self.b + self.A @ v, self._volume))

    def reflect(self):
        return Polytope(-self.vertices, seed=self.seed, _hrep=(-self.vertices, -self.A, self.b, self._volume))

    def scale(self, a):
        if a <= 0:
            raise GeometryError("scale factor must be positive")
        return Polytope(a * self.vertices, seed=self.seed,
                        _hrep=(a * self.vertices, self.A, a * self.b, self._volume * a ** self.dim))

    def to_record(self) -> str:
        lines = ["kind: vpolytope", f"dim: {self.dim}"]
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        lines += ["vertex: " + " ".join(repr(float(v)) for v in row) for row in self.vertices]
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"Polytope(dim={self.dim}, vertices={len(self.vertices)})"


def _hull(V: np.ndarray):
    d = V.shape[1]
    if d == 1:
        lo, hi = V.min(), V.max()
        if hi - lo < 1e-12:
            raise GeometryError("degenerate interval")
        return (np.array([[lo], [hi]]), np.array([[1.0], [-1.0]]), np.array([hi, -lo]), float(hi - lo))
    if V.shape[0] < d + 1:
        raise GeometryError(f"need at least {d + 1} vertices in dimension {d}")
    try:
        hull = ConvexHull(V)
    except QhullError as exc:
        raise GeometryError(f"vertices are not full-dimensional: {exc}") from None
    eq = hull.equations
    A, b = eq[:, :-1], -eq[:, -1]
    # merge coplanar facets (qhull triangulates)
    key = np.round(np.hstack([A, b[:, None]]), 10)
    _, idx = np.unique(key, axis=0, return_index=True)
    idx = np.sort(idx)
    return V[np.sort(hull.vertices)], A[idx], b[idx], float(hull.volume)


class Ball(ConvexBody):
    kind = "ball"

    def __init__(self, center, radius: float):
        self.center = _vec(center)
        if radius <= 0:
            raise GeometryError("ball radius must be positive")
        self.radius = float(radius)
        self.dim = self.center.size
        self.bound = float(np.linalg.norm(self.center) + self.radius)
        self.interior_point = self.center.copy()

    @property
    def volume(self) -> float:
        from .constants import unit_ball_volume
        return unit_ball_volume(self.dim) * self.radius ** self.dim

    def contains_many(self, X):
        X = np.atleast_2d(X)
        return np.linalg.norm(X - self.center, axis=1) <= self.radius * (1 + TAU_MEM) + TAU_MEM

    def support(self, u):
        u = _unit(u, self.dim)
        return float(self.center @ u + self.radius)

    def ray_exit(self, c, U):
        U = np.atleast_2d(U)
        w = np.asarray(c, dtype=float) - self.center
        bu = np.sum(U * w, axis=-1)
        disc = bu ** 2 - (np.sum(w * w, axis=-1) - self.radius ** 2)
        return np.maximum(-bu + np.sqrt(np.maximum(disc, 0.0)), 0.0)

    def translate(self, v):
        return Ball(self.center + _vec(v, self.dim), self.radius)

    def reflect(self):
        return Ball(-self.center, self.radius)

    def scale(self, a):
        return Ball(a * self.center, a * self.radius)

    def to_record(self) -> str:
        return (f"kind: ball\ndim: {self.dim}\ncenter: " + " ".join(repr(float(v)) for v in self.center)
                + f"\nradius: {self.radius!r}\n")

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"


class Implicit(ConvexBody):
    """Convex body known only through a vectorised membership predicate."""

    kind = "implicit"

    def __init__(self, member: Callable[[np.ndarray], np.ndarray], dim: int, bound: float, interior_point,
                 radial: Callable[[np.ndarray], np.ndarray] | None = None):
        self._member = member
        self.dim = dim
        self.bound = float(bound)
        self.interior_point = _vec(interior_point, dim)
        self._radial = radial
        if not bool(self._member(self.interior_point[None, :])[0]):
            raise GeometryError("interior point is not a member")

    def contains_many(self, X):
        X = np.atleast_2d(X)
        return np.asarray(self._member(X), dtype=bool)

    def ray_exit(self, c, U):
        U = np.atleast_2d(U)
        if self._radial is not None and np.allclose(c, self.interior_point):
            return np.asarray(self._radial(U), dtype=float)
        return _bisect_exit(self, c, U)

    def radial(self, U) -> np.ndarray:
        return self.ray_exit(self.interior_point, U)


class ProjectedPolytope(ConvexBody):
    """{x : exists z with M z + G x <= c}, the shadow of a polyhedron.

    Membership is decided two ways: a single LP per point (``contains``), and for
    batches through the Farkas certificate rays of {y >= 0 : M^T y = 0}, which
    turn the shadow into an explicit inequality system P x <= q.
    """

    kind = "projected_polytope"

    def __init__(self, M, G, c, interior_point, bound: float):
        self.M = np.asarray(M, dtype=float)
        self.G = np.asarray(G, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.dim = self.G.shape[1]
        self.bound = float(bound)
        self.interior_point = _vec(interior_point, self.dim)
        self.P, self.q = _shadow_inequalities(self.M, self.G, self.c)

    def contains_many(self, X):
        X = np.atleast_2d(X)
        return np.all(X @ self.P.T <= self.q + TAU_MEM, axis=1)

    def contains(self, x) -> bool:
        x = _vec(x, self.dim)
        return lp.halfspace_feasible(self.M, self.c - self.G @ x)

    def support(self, u) -> float:
        u = _unit(u, self.dim)
        k = self.M.shape[1]
        A = np.hstack([self.M, self.G])
        A2 = np.hstack([A, -A])
        cost = -np.concatenate([np.zeros(k), u])
        res = lp.linprog(np.concatenate([cost, -cost]), A_ub=A2, b_ub=self.c)
        if res.status != "optimal":
            raise GeometryError(f"support LP {res.status}")
        return -res.objective

    def ray_exit(self, c, U):
        U = np.atleast_2d(U)
        slack = self.q - np.asarray(c, dtype=float) @ self.P.T
        rate = U @ self.P.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(rate > 1e-15, slack / rate, np.inf)
        return np.maximum(np.min(t, axis=-1), 0.0)

    def translate(self, v):
        v = _vec(v, self.dim)
        return ProjectedPolytope(self.M, self.G, self.c + self.G @ v, self.interior_point + v,
                                 self.bound + np.linalg.norm(v))

    def reflect(self):
        return ProjectedPolytope(self.M, -self.G, self.c, -self.interior_point, self.bound)

    def scale(self, a):
        if a <= 0:
            raise GeometryError("scale factor must be positive")
        return ProjectedPolytope(self.M, self.G / a, self.c, a * self.interior_point, a * self.bound)

    def vertices(self) -> np.ndarray:
        """Vertices via halfspace intersection (fine up to dimension ~6)."""
        hs = HalfspaceIntersection(np.hstack([self.P, -self.q[:, None]]), self.interior_point)
        return hs.intersections

    @property
    def volume(self) -> float:
        if self.dim == 1:
            v = self.vertices()
            return float(v.max() - v.min())
        return float(ConvexHull(self.vertices()).volume)


def _shadow_inequalities(M: np.ndarray, G: np.ndarray, c: np.ndarray):
    rows, k = M.shape
    rays = []
    norms = np.linalg.norm(M, axis=1)
    for j in np.flatnonzero(norms < 1e-14):
        e = np.zeros(rows)
        e[j] = 1.0
        rays.append(e)
    live = np.flatnonzero(norms >= 1e-14)
    for size in range(2, k + 2):
        combos = np.array(list(itertools.combinations(live, size)), dtype=int)
        if combos.size == 0:
            continue
        if len(combos) > 3_000_000:
            raise GeometryError("too many constraint subsets for certificate enumeration")
        for start in range(0, len(combos), 200_000):
            S = combos[start:start + 200_000]
            Ms = M[S]  # (N, size, k)
            _, sv, Vt = np.linalg.svd(np.transpose(Ms, (0, 2, 1)), full_matrices=True)
            smax = np.maximum(sv[:, 0], 1e-300)
            rank = np.sum(sv > 1e-10 * smax[:, None], axis=1)
            ok = rank == size - 1
            y = Vt[:, -1, :]
            pos = np.all(y > 1e-12, axis=1) | np.all(y < -1e-12, axis=1)
            sel = ok & pos
            for Si, yi in zip(S[sel], y[sel]):
                e = np.zeros(rows)
                e[Si] = np.abs(yi)
                rays.append(e)
    R = np.array(rays)
    P = R @ G
    q = R @ c
    nrm = np.linalg.norm(P, axis=1)
    if np.any((nrm < 1e-12) & (q < -1e-9)):
        raise GeometryError("shadow polytope is empty")
    keep = nrm >= 1e-12
    P, q = P[keep] / nrm[keep, None], q[keep] / nrm[keep]
    key = np.round(np.hstack([P, q[:, None]]), 9)
    _, idx = np.unique(key, axis=0, return_index=True)
    idx = np.sort(idx)
    return P[idx], q[idx]


class ImplicitSum(ConvexBody):
    """K + L for bodies given only by membership, decided by gauge minimisation.

    x is in K + L iff min_z max(g_K(z), g_L(x - z)) <= 1, where g is the gauge about
    each body's interior point. The convex minimisation is a batched pattern search.
    """

    kind = "implicit_sum"

    def __init__(self, K: ConvexBody, L: ConvexBody, seed: int = 0):
        if K.dim != L.dim:
            raise GeometryError("dimension mismatch")
        self.K, self.L = K, L
        self.dim = K.dim
        self.bound = K.bound + L.bound
        self.interior_point = K.interior_point + L.interior_point
        self.seed = seed

    def _gauge(self, body: ConvexBody, Z: np.ndarray) -> np.ndarray:
        w = Z - body.interior_point
        r = np.linalg.norm(w, axis=1)
        out = np.zeros(len(Z))
        nz = r > 1e-15
        if np.any(nz):
            U = w[nz] / r[nz, None]
            rho = body.ray_exit(body.interior_point, U)
            out[nz] = r[nz] / np.maximum(rho, 1e-300)
        return out

    def min_gauge(self, X: np.ndarray, max_iter: int = 400) -> np.ndarray:
        X = np.atleast_2d(X)
        P, d = X.shape
        rng = np.random.default_rng(self.seed)

        def F(Z, Xr):
            return np.maximum(self._gauge(self.K, Z), self._gauge(self.L, Xr - Z))

        # start at the point dividing x in proportion to the two bodies' sizes
        cK, cL = self.K.interior_point, self.L.interior_point
        Z = cK + (X - cK - cL) * (self.K.bound / max(self.K.bound + self.L.bound, 1e-300))
        val = F(Z, X)
        step = np.full(P, 0.5 * (self.K.bound + self.L.bound))
        floor = 1e-10 * max(self.bound, 1.0)
        active = np.ones(P, dtype=bool)
        for _ in range(max_iter):
            active &= (step > floor) & (val > 1.0 - 1e-12)
            if not active.any():
                break
            Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
            D = np.vstack([np.eye(d), -np.eye(d), Q, -Q])
            ia = np.flatnonzero(active)
            cand = Z[ia, None, :] + step[ia, None, None] * D[None, :, :]
            k = D.shape[0]
            fv = F(cand.reshape(-1, d), np.repeat(X[ia], k, axis=0)).reshape(len(ia), k)
            j = np.argmin(fv, axis=1)
            best = fv[np.arange(len(ia)), j]
            better = best < val[ia] - 1e-15
            mv = ia[better]
            Z[mv] = cand[better, j[better]]
            val[mv] = best[better]
            step[ia[~better]] *= 0.5
        return val

    def contains_many(self, X):
        return self.min_gauge(X) <= 1.0 + 1e-7


# ---------------------------------------------------------------- operations

def contains(body: ConvexBody, x) -> bool:
    return body.contains(x)


def support(body: ConvexBody, u) -> float:
    return body.support(u)


def reflect(body: ConvexBody) -> ConvexBody:
    return body.reflect()


def minkowski_sum(K: ConvexBody, L: ConvexBody) -> ConvexBody:
    if K.dim != L.dim:
        raise GeometryError(f"dimension mismatch: {K.dim} vs {L.dim}")
    d = K.dim
    if isinstance(K, Polytope) and isinstance(L, Polytope):
        if d <= 3:
            S = (K.vertices[:, None, :] + L.vertices[None, :, :]).reshape(-1, d)
            return Polytope(S)
        M = np.vstack([K.A, -L.A])
        G = np.vstack([np.zeros_like(K.A), L.A])
        c = np.concatenate([K.b, L.b])
        return ProjectedPolytope(M, G, c, K.interior_point + L.interior_point, K.bound + L.bound)
    if isinstance(K, Ball) and isinstance(L, Ball):
        return Ball(K.center + L.center, K.radius + L.radius)
    if isinstance(L, Polytope) and isinstance(K, Ball):
        K, L = L, K
    if isinstance(K, Polytope) and isinstance(L, Ball):
        V, ball = K.vertices, L

        def member(X):
            return np.array([_dist_to_hull(V, x - ball.center) <= ball.radius * (1 + TAU_MEM) + TAU_MEM
                             for x in np.atleast_2d(X)])

        return Implicit(member, d, K.bound + L.bound, K.interior_point + L.center)
    return ImplicitSum(K, L)


def _dist_to_hull(V: np.ndarray, y: np.ndarray) -> float:
    """Euclidean distance from y to conv(V), via NNLS with a heavily weighted simplex row."""
    w = 1e4 * (1.0 + np.abs(V).max())
    A = np.vstack([V.T, w * np.ones((1, V.shape[0]))])
    b = np.concatenate([y, [w]])
    lam, _ = nnls(A, b, maxiter=50 * V.shape[0])
    lam = lam / lam.sum()
    return float(np.linalg.norm(V.T @ lam - y))


def difference_body(K: ConvexBody) -> ConvexBody:
    return minkowski_sum(K, K.reflect())


def intersect(K: Polytope, L: Polytope) -> Polytope:
    """Intersection of two full-dimensional polytopes."""
    if K.dim != L.dim:
        raise GeometryError("dimension mismatch")
    A = np.vstack([K.A, L.A])
    b = np.concatenate([K.b, L.b])
    if K.dim == 1:
        hi = np.min(b[A[:, 0] > 0] / A[A[:, 0] > 0, 0])
        lo = np.max(b[A[:, 0] < 0] / A[A[:, 0] < 0, 0])
        if hi - lo < 1e-12:
            raise GeometryError("empty or degenerate intersection")
        return Polytope([[lo], [hi]])
    cc = lp.chebyshev_center(A, b)
    if cc is None or cc[1] < 1e-10:
        raise GeometryError("empty or degenerate intersection")
    hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), cc[0])
    return Polytope(hs.intersections)


@dataclass(frozen=True)
class PDifferenceSpec:
    base: Polytope
    p: int
    companions: tuple | None = None

    def __post_init__(self):
        if self.p < 1:
            raise GeometryError("p must be >= 1")
        if self.companions is not None:
            if len(self.companions) != self.p:
                raise GeometryError("need exactly p companion bodies")
            if any(L.dim != self.base.dim for L in self.companions):
                raise GeometryError("dimension mismatch")


DP_VERTEX_LIMIT = 200_000


def dp_body(spec: PDifferenceSpec, form: str = "auto") -> ConvexBody:
    """p-difference body in R^{np}.

    Standard form: tuples with K ∩ ⋂(x_i + K) nonempty.  General form with
    companions L_i: K ∩ ⋂(x_i - L_i) nonempty, requiring 0 in int(K ∩ ⋂(-L_i)).
    form="auto" returns the hull of vertex combinations when that set is small;
    form="projection" always returns the lifted description {x : ∃z, ...}.
    """
    if form not in ("auto", "projection"):
        raise GeometryError(f"unknown form {form!r}")
    K, p = spec.base, spec.p
    if not isinstance(K, Polytope):
        raise GeometryError("dp_body needs polytope bodies")
    n = K.dim
    if spec.companions is None:
        Ls = [K.reflect()] * p
    else:
        Ls = list(spec.companions)
        if not all(isinstance(L, Polytope) for L in Ls):
            raise GeometryError("dp_body needs polytope bodies")
        if np.any(K.b <= 1e-12) or any(np.any(L.b <= 1e-12) for L in Ls):
            raise GeometryError("0 must be interior to K ∩ ⋂(-L_i)")
    count = len(K.vertices) * int(np.prod([len(L.vertices) for L in Ls]))
    if form == "auto" and count <= DP_VERTEX_LIMIT and n * p <= 8:
        # x_i = z + w_i with z in K, w_i in L_i: a linear image of K x L_1 x ... x L_p
        grids = np.meshgrid(*[np.arange(len(B.vertices)) for B in [K] + Ls], indexing="ij")
        idx = [g.ravel() for g in grids]
        z = K.vertices[idx[0]]
        X = np.hstack([z + L.vertices[idx[i + 1]] for i, L in enumerate(Ls)])
        return Polytope(X)
    blocks_M = [K.A]
    blocks_G = [np.zeros((len(K.b), n * p))]
    blocks_c = [K.b]
    for i, L in enumerate(Ls):
        # x_i - z in L  <=>  -A_L z + A_L x_i <= b_L
        blocks_M.append(-L.A)
        g = np.zeros((len(L.b), n * p))
        g[:, i * n:(i + 1) * n] = L.A
        blocks_G.append(g)
        blocks_c.append(L.b)
    bound = p * (K.bound + max(L.bound for L in Ls))
    return ProjectedPolytope(np.vstack(blocks_M), np.vstack(blocks_G), np.concatenate(blocks_c),
                             np.zeros(n * p), bound)


def section_radial(body: ConvexBody, H: Subspace, y, u, rel_tol: float = TAU_BIS) -> float:
    """Radial extent from base point y along u in H: y + t u in body iff t <= rho."""
    y = _vec(y, body.dim)
    u = _unit(u, body.dim)
    if np.linalg.norm(u - H.basis.T @ (H.basis @ u)) > 1e-9:
        raise GeometryError("direction does not lie in H")
    if not body.contains_many(y[None, :])[0]:
        return 0.0
    if isinstance(body, (Polytope, Ball, ProjectedPolytope)):
        return float(body.ray_exit(y, u[None, :])[0])
    return float(_bisect_exit(body, y, u[None, :], rel_tol)[0])


def make_body(kind: str, n: int, N: int | None = None, seed: int | None = None, radius: float = 1.0) -> ConvexBody:
    if n < 1:
        raise GeometryError("n must be >= 1")
    if kind == "simplex":
        return Polytope(np.vstack([np.zeros(n), np.eye(n)]))
    if kind == "cube":
        return Polytope(np.array(list(itertools.product([0.0, 1.0], repeat=n))))
    if kind == "ball":
        return Ball(np.zeros(n), radius)
    if kind == "cross":
        return Polytope(np.vstack([np.eye(n), -np.eye(n)]))
    if kind == "random_polytope":
        if N is None or N < n + 1:
            raise GeometryError(f"random_polytope needs N >= n+1 = {n + 1}")
        if seed is None:
            raise GeometryError("random_polytope needs a seed")
        rng = np.random.default_rng(seed)
        for _ in range(1000):
            pts = rng.uniform(-1.0, 1.0, size=(N, n))
            try:
                P = Polytope(pts, seed=seed)
            except GeometryError:
                continue
            if P.volume > 1e-6:
                return P
        raise GeometryError("could not draw a full-dimensional polytope")
    raise GeometryError(f"unknown body kind {kind!r}")


def body_from_record(text: str) -> ConvexBody:
    fields: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise GeometryError(f"line {lineno}: expected 'key: value'")
        k, v = (s.strip() for s in line.split(":", 1))
        fields.setdefault(k, []).append(v)
    kind = fields.get("kind", [None])[0]
    dim = int(fields["dim"][0])
    if kind == "vpolytope":
        V = np.array([[float(t) for t in row.split()] for row in fields["vertex"]])
        if V.shape[1] != dim:
            raise GeometryError("vertex rows do not match dim")
        seed = int(fields["seed"][0]) if "seed" in fields else None
        return Polytope(V, seed=seed)
    if kind == "ball":
        c = np.array([float(t) for t in fields["center"][0].split()])
        return Ball(c, float(fields["radius"][0]))
    raise GeometryError(f"unknown record kind {kind!r}")


def halfspaces(body: ConvexBody) -> tuple[np.ndarray, np.ndarray] | None:
    """(A, b) with body = {A x <= b} when the body carries an explicit H-representation."""
    if isinstance(body, Polytope):
        return body.A, body.b
    if isinstance(body, ProjectedPolytope):
        return body.P, body.q
    return None
