"""Small dense two-phase simplex.

The problems solved here are tiny (a few dozen rows), so a tableau with
Bland's rule is plenty. The same code runs over float64 or over
``fractions.Fraction`` (object arrays) for exact tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

FEAS_TOL = 1e-9
DEGENERACY_BAND = 1e-7


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded"
    x: np.ndarray | None
    objective: float | Fraction  # Fraction in exact mode
    infeasibility: float


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] = T[r] / T[r, c]
    col = T[:, c].copy()
    col[r] = 0
    T -= np.outer(col, T[r])


def _simplex(T: np.ndarray, basis: list[int], ncols: int, tol) -> str:
    """Minimise the objective stored in the last row of T over the first ncols columns."""
    m = T.shape[0] - 1
    for _ in range(50 * (m + ncols) + 100):
        obj = T[-1, :ncols]
        entering = next((j for j in range(ncols) if obj[j] < -tol), None)
        if entering is None:
            return "optimal"
        best, leave = None, None
        for i in range(m):
            a = T[i, entering]
            if a > tol:
                ratio = T[i, -1] / a
                if best is None or ratio < best - tol or (abs(ratio - best) <= tol and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return "unbounded"
        _pivot(T, leave, entering)
        basis[leave] = entering
    raise RuntimeError("simplex iteration limit reached")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, exact: bool = False) -> LPResult:
    """Minimise c @ x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0."""
    conv = (lambda a: np.array([[Fraction(v) for v in row] for row in np.atleast_2d(a)], dtype=object)) if exact else (
        lambda a: np.atleast_2d(np.asarray(a, dtype=float)))
    convv = (lambda a: np.array([Fraction(v) for v in np.ravel(a)], dtype=object)) if exact else (
        lambda a: np.asarray(a, dtype=float).ravel())
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    tol = 0 if exact else FEAS_TOL * 1e-3

    c = convv(c)
    nvar = c.size
    blocks_A, blocks_b, nslack = [], [], 0
    if A_ub is not None and len(A_ub):
        Au, bu = conv(A_ub), convv(b_ub)
        nslack = Au.shape[0]
        blocks_A.append(np.hstack([Au, _eye(nslack, exact)]))
        blocks_b.append(bu)
    if A_eq is not None and len(A_eq):
        Ae, be = conv(A_eq), convv(b_eq)
        pad = np.full((Ae.shape[0], nslack), zero, dtype=object if exact else float)
        blocks_A.append(np.hstack([Ae, pad]))
        blocks_b.append(be)
    A = np.vstack(blocks_A)
    b = np.concatenate(blocks_b)
    m, ncols = A.shape
    neg = b < 0
    A[neg] = -A[neg]
    b[neg] = -b[neg]

    # phase 1: artificial variables on every row
    T = np.full((m + 1, ncols + m + 1), zero, dtype=object if exact else float)
    T[:m, :ncols] = A
    T[:m, ncols:ncols + m] = _eye(m, exact)
    T[:m, -1] = b
    T[-1, :ncols] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(ncols, ncols + m))
    _simplex(T, basis, ncols + m, tol)
    infeas = -T[-1, -1]
    infeas_f = float(infeas)
    if infeas_f > (0 if exact else FEAS_TOL):
        return LPResult("infeasible", None, float("nan"), infeas_f)

    # drive remaining artificials out of the basis where possible
    for i, bv in enumerate(basis):
        if bv >= ncols:
            for j in range(ncols):
                if abs(T[i, j]) > tol:
                    _pivot(T, i, j)
                    basis[i] = j
                    break

    T2 = np.concatenate([T[:m, :ncols], T[:m, -1:]], axis=1)
    keep = [i for i, bv in enumerate(basis) if bv < ncols]
    T2 = T2[keep]
    basis = [basis[i] for i in keep]
    full_c = np.concatenate([c, np.full(ncols - nvar, zero, dtype=object if exact else float)])
    obj = np.concatenate([full_c, [zero]])
    for i, bv in enumerate(basis):
        obj = obj - full_c[bv] * T2[i]
    T2 = np.vstack([T2, obj])
    status = _simplex(T2, basis, ncols, tol)
    if status == "unbounded":
        return LPResult("unbounded", None, float("-inf"), infeas_f)
    x = np.full(ncols, zero, dtype=object if exact else float)
    for i, bv in enumerate(basis):
        x[bv] = T2[i, -1]
    x = x[:nvar]
    val = -T2[-1, -1]
    return LPResult("optimal", x if exact else x.astype(float), val if exact else float(val), infeas_f)


def _eye(k: int, exact: bool) -> np.ndarray:
    if not exact:
        return np.eye(k)
    e = np.full((k, k), Fraction(0), dtype=object)
    for i in range(k):
        e[i, i] = Fraction(1)
    return e


def convex_combination_feasible(V: np.ndarray, x: np.ndarray, exact_fallback: bool = True) -> bool:
    """Is x in conv(rows of V)?  Points within FEAS_TOL (in residual) count as inside."""
    V = np.asarray(V, dtype=float)
    x = np.asarray(x, dtype=float)
    N = V.shape[0]
    A_eq = np.vstack([V.T, np.ones((1, N))])
    b_eq = np.concatenate([x, [1.0]])
    res = linprog(np.zeros(N), A_eq=A_eq, b_eq=b_eq)
    if res.status != "infeasible":
        return True
    if exact_fallback and res.infeasibility <= DEGENERACY_BAND and V.shape[1] <= 3:
        exact = linprog(np.zeros(N), A_eq=A_eq, b_eq=b_eq, exact=True)
        return exact.status != "infeasible"
    return False


def halfspace_feasible(A: np.ndarray, c: np.ndarray) -> bool:
    """Is {z : A z <= c} non-empty?  z is free, so it is split as z = u - v."""
    A = np.asarray(A, dtype=float)
    A2 = np.hstack([A, -A])
    res = linprog(np.zeros(A2.shape[1]), A_ub=A2, b_ub=np.asarray(c, dtype=float) + FEAS_TOL)
    return res.status != "infeasible"


def chebyshev_center(A: np.ndarray, b: np.ndarray, A_eq=None, b_eq=None) -> tuple[np.ndarray, float] | None:
    """Centre and radius of the largest ball in {A z <= b} (optionally on an affine set)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    d = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    # variables: u (d), v (d), r ; z = u - v
    A_ub = np.hstack([A, -A, norms[:, None]])
    c = np.zeros(2 * d + 1)
    c[-1] = -1.0
    A_ub = np.vstack([A_ub, np.concatenate([np.zeros(2 * d), [1.0]])])
    b_ub = np.concatenate([b, [1e6]])
    Ae = be = None
    if A_eq is not None:
        A_eq = np.asarray(A_eq, dtype=float)
        Ae = np.hstack([A_eq, -A_eq, np.zeros((A_eq.shape[0], 1))])
        be = np.asarray(b_eq, dtype=float)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=Ae, b_eq=be)
    if res.status != "optimal":
        return None
    z = res.x[:d] - res.x[d:2 * d]
    return z, res.x[-1]
