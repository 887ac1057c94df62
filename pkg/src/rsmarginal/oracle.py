"""Brute-force grid oracles in dimension <= 3.

Deliberately plain: cell-centre counting, no adaptivity, no early exits.
Error bounds count the cells whose membership differs from a neighbour's.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .density import Density
from .geometry import ConvexBody, Subspace


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    h: float
    lo: tuple | None = None
    hi: tuple | None = None

    def __post_init__(self):
        if self.h <= 0:
            raise OracleError("grid cell size must be positive")


@dataclass
class GridResult:
    value: float
    error_bound: float
    cells: int


def _centres(lo, hi, h):
    axes = [np.arange(a + h / 2, b, h) for a, b in zip(lo, hi)]
    return axes


def _boundary_cells(mask: np.ndarray) -> int:
    b = np.zeros_like(mask)
    for ax in range(mask.ndim):
        diff = np.diff(mask.astype(np.int8), axis=ax) != 0
        sl_a = [slice(None)] * mask.ndim
        sl_b = [slice(None)] * mask.ndim
        sl_a[ax] = slice(0, -1)
        sl_b[ax] = slice(1, None)
        b[tuple(sl_a)] |= diff
        b[tuple(sl_b)] |= diff
    return int(b.sum())


def _box(body: ConvexBody, grid: GridSpec):
    if grid.lo is not None:
        return np.asarray(grid.lo, float), np.asarray(grid.hi, float)
    E = np.eye(body.dim)
    hi = np.array([body.support(e) for e in E]) + grid.h
    lo = -np.array([body.support(-e) for e in E]) - grid.h
    return lo, hi


def grid_volume(body: ConvexBody, grid: GridSpec) -> GridResult:
    if body.dim > 3:
        raise OracleError("grid oracles stop at dimension 3")
    lo, hi = _box(body, grid)
    axes = _centres(lo, hi, grid.h)
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=1)
    mask = np.zeros(len(X), dtype=bool)
    for s in range(0, len(X), 2 ** 18):
        mask[s:s + 2 ** 18] = body.contains_many(X[s:s + 2 ** 18])
    mask = mask.reshape(mesh[0].shape)
    cell = grid.h ** body.dim
    return GridResult(float(mask.sum()) * cell, _boundary_cells(mask) * cell, int(mask.size))


def grid_section_measure(body: ConvexBody, H: Subspace, y, d: Density, grid: GridSpec) -> GridResult:
    """Grid sum of phi * chi_body over y + H (m <= 2)."""
    m = H.dim
    if m > 2:
        raise OracleError("grid section oracle needs dim H <= 2")
    y = np.asarray(y, dtype=float)
    B = H.basis
    if grid.lo is not None:
        lo, hi = np.asarray(grid.lo, float), np.asarray(grid.hi, float)
    else:
        yb = B @ y
        hi = np.array([body.support(b) for b in B]) - yb + grid.h
        lo = -np.array([body.support(-b) for b in B]) - yb - grid.h
    axes = _centres(lo, hi, grid.h)
    mesh = np.meshgrid(*axes, indexing="ij")
    T = np.stack([m_.ravel() for m_ in mesh], axis=1)
    total = 0.0
    mask = np.zeros(len(T), dtype=bool)
    phimax = 0.0
    for s in range(0, len(T), 2 ** 18):
        X = y + T[s:s + 2 ** 18] @ B
        inside = body.contains_many(X)
        mask[s:s + 2 ** 18] = inside
        if inside.any():
            ph = d(X[inside])
            total += float(ph.sum())
            phimax = max(phimax, float(ph.max()))
    cell = grid.h ** m
    err = _boundary_cells(mask.reshape(mesh[0].shape)) * cell * max(phimax, d.attributes.sup_value)
    return GridResult(total * cell, err, int(len(T)))


def grid_sup_translate(body: ConvexBody, H: Subspace, d: Density, grid: GridSpec, y_grid: GridSpec | None = None,
                       candidates: np.ndarray | None = None) -> tuple[np.ndarray, GridResult]:
    """Exhaustive max over translates of mu((body - y) ∩ H).

    Candidates default to a grid over the projection of the body's box onto H^perp
    (Lebesgue measure, where only that component matters) or over the whole box.
    """
    n = body.dim
    if candidates is None:
        yg = y_grid or GridSpec(grid.h * 4)
        if d.is_lebesgue:
            C = H.complement()
            k = C.shape[0]
            if k > 2:
                raise OracleError("sup oracle needs dim H^perp <= 2")
            R = body.bound
            ax = np.arange(-R, R + yg.h / 2, yg.h)
            Z = np.array(list(itertools.product(ax, repeat=k))) if k else np.zeros((1, 0))
            candidates = Z @ C if k else np.zeros((1, n))
        else:
            if n > 2:
                raise OracleError("sup oracle over all translates needs n <= 2")
            R = body.bound
            ax = np.arange(-R, R + yg.h / 2, yg.h)
            candidates = np.array(list(itertools.product(ax, repeat=n)))
    best_y, best = None, None
    for yv in np.atleast_2d(candidates):
        r = grid_section_measure(body.translate(-yv), H, np.zeros(n), d, grid)
        if best is None or r.value > best.value + 1e-15 or (
                abs(r.value - best.value) <= 1e-15 and np.linalg.norm(yv) < np.linalg.norm(best_y)):
            best_y, best = yv, r
    return np.asarray(best_y), best
