"""Derivative-free maximisation over translates.

The objectives here are sectional measures y -> mu((K - y) ∩ H) evaluated
with a fixed seed (common random numbers), so each run sees a deterministic
surface and a plain compass search is enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import Estimate


@dataclass(frozen=True)
class SupConfig:
    restarts: int = 16
    step_tol: float = 1e-6  # relative to the domain radius
    seed: int = 0
    max_evals: int = 20_000


@dataclass
class SupResult:
    argmax: np.ndarray
    value: Estimate
    restarts_agreeing: int
    converged: bool
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {"argmax": [float(v) for v in self.argmax], "value": self.value.to_dict(),
                "restarts_agreeing": self.restarts_agreeing, "converged": self.converged,
                "evaluations": self.evaluations}


def _starts(k: int, R: float, cfg: SupConfig, extra: list | None) -> list[np.ndarray]:
    pts = [np.zeros(k)] + [np.asarray(e, dtype=float) for e in (extra or [])]
    for i in range(k):
        for sgn in (1.0, -1.0):
            e = np.zeros(k)
            e[i] = sgn * 0.5 * R
            pts.append(e)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 7919]))
    while len(pts) < cfg.restarts:
        g = rng.standard_normal(k)
        g *= R * rng.random() ** (1.0 / k) / np.linalg.norm(g)
        pts.append(g)
    return pts[:max(cfg.restarts, 1)]


def sup_translate(objective: Callable[[np.ndarray], Estimate], k: int, domain_radius: float,
                  cfg: SupConfig | None = None, extra_starts: list | None = None) -> SupResult:
    """Maximise objective(z) over z in the k-dimensional ball of radius domain_radius."""
    cfg = cfg or SupConfig()
    R = float(domain_radius)
    if k == 0:
        e = objective(np.zeros(0))
        return SupResult(np.zeros(0), e, 1, True, 1)
    evals = 0
    cache: dict = {}

    def f(z):
        nonlocal evals
        key = tuple(np.round(z, 14))
        if key not in cache:
            if np.linalg.norm(z) > R * (1 + 1e-12):
                cache[key] = None
            else:
                cache[key] = objective(z)
                evals += 1
        return cache[key]

    dirs = np.vstack([np.eye(k), -np.eye(k)])
    finals = []
    for z0 in _starts(k, R, cfg, extra_starts):
        z = z0.copy()
        cur = f(z)
        step = 0.25 * R
        while step > cfg.step_tol * R and evals < cfg.max_evals:
            best_j, best_e = -1, cur
            for j, dvec in enumerate(dirs):
                e = f(z + step * dvec)
                if e is not None and e.value > best_e.value * (1 + 1e-12) + 1e-300:
                    best_j, best_e = j, e
            if best_j >= 0:
                z = z + step * dirs[best_j]
                cur = best_e
            else:
                step *= 0.5
        finals.append((cur, z))
    best_val = max(e.value for e, _ in finals)
    best_e = next(e for e, _ in finals if e.value == best_val)
    tol = 3 * best_e.std_error + 1e-9 * abs(best_val)
    near = [(e, z) for e, z in finals if e.value >= best_val - tol]
    # flat optimum: report the smallest-norm argmax, then lexicographic for determinism
    near.sort(key=lambda ez: (round(float(np.linalg.norm(ez[1])), 12), tuple(ez[1])))
    e_rep, z_rep = near[0]
    vals = sorted((e for e, _ in finals), key=lambda e: -e.value)
    if len(vals) > 1:
        a, b = vals[0], vals[1]
        conv = a.value - b.value <= 3 * math.hypot(a.std_error, b.std_error) + 1e-6 * abs(a.value)
    else:
        conv = True
    return SupResult(z_rep, e_rep if e_rep.value >= best_val - tol else best_e, len(near), conv, evals)
