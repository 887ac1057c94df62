"""The 20-case estimator-vs-oracle regression set (n <= 3, m <= 2).

Each case returns (fast Estimate, oracle GridResult). They agree when
|fast - grid| <= max(3 sigma_fast, 2 grid_error).
"""

import math

import numpy as np

from rsmarginal.density import make_density
from rsmarginal.geometry import Ball, PDifferenceSpec, Subspace, difference_body, dp_body, make_body
from rsmarginal.oracle import GridSpec, grid_section_measure, grid_sup_translate, grid_volume
from rsmarginal.quadrature import EstimatorConfig, exact, measure_section
from rsmarginal.verify import sup_section

CFG = EstimatorConfig(samples=2 ** 18, seed=11)
TRI = make_body("simplex", 2)
X_AXIS = Subspace.coordinate(2, [0])
LEB2 = make_density("lebesgue", 2)
GAUSS2 = make_density("gaussian", 2)


def _vol(body, h):
    return lambda: exact(body.volume), lambda: grid_volume(body, GridSpec(h))


def _sec(body, H, y, d, h, box=None):
    y = np.asarray(y, dtype=float)
    grid = GridSpec(h, *box) if box else GridSpec(h)
    return (lambda: measure_section(body, H, y, d, CFG),
            lambda: grid_section_measure(body, H, y, d, grid))


def _sup(body, H, d, h, candidates=None, radius=None, extra=None):
    def fast():
        return sup_section(body, H, d, CFG, radius, extra).value

    def oracle():
        return grid_sup_translate(body, H, d, GridSpec(h), candidates=candidates)[1]

    return fast, oracle


def _wedge_candidates():
    bis = np.array([math.cos(0.005), math.sin(0.005)])
    return np.array([-c * bis for c in np.linspace(60.0, 300.0, 13)])


def cases():
    K3 = make_body("random_polytope", 3, N=9, seed=21)
    wedge = make_density("wedge", 2, k=100)
    disk = Ball(np.zeros(2), 0.5)
    cube = make_body("cube", 2)
    return [
        ("vol-triangle", *_vol(TRI, 1 / 200)),
        ("vol-hexagon", *_vol(difference_body(TRI), 1 / 200)),
        ("vol-disk", *_vol(Ball(np.zeros(2), 1.0), 1 / 200)),
        ("vol-random-3d", *_vol(K3, 0.02)),
        ("vol-D2-interval", *_vol(dp_body(PDifferenceSpec(make_body("cube", 1), 2)), 1 / 200)),
        ("vol-D3-interval", *_vol(dp_body(PDifferenceSpec(make_body("cube", 1), 3)), 0.02)),
        ("sec-disk-axis", *_sec(Ball(np.zeros(2), 1.0), X_AXIS, [0, 0], LEB2, 1e-4)),
        ("sec-big-disk-gauss", *_sec(Ball(np.zeros(2), 10.0), X_AXIS, [0, 0], GAUSS2, 1e-3)),
        ("sec-square-offset", *_sec(cube, X_AXIS, [0, 0.5], LEB2, 1e-4)),
        ("sec-gauss-marginal", *_sec(make_body("cube", 2).translate([-0.5, -0.5]).scale(10.0), X_AXIS, [0, 0],
                                     GAUSS2, 1e-3)),
        ("sec-triangle-gauss", *_sec(TRI, X_AXIS, [0, 0.2], GAUSS2, 1e-4)),
        ("sec-tetra-plane-gauss", *_sec(make_body("simplex", 3), Subspace.coordinate(3, [0, 1]), [0, 0, 0.3],
                                        make_density("gaussian", 3), 1 / 400)),
        ("sec-wedge-halfdisk", *_sec(difference_body(disk).scale(0.5), Subspace.coordinate(2, [0, 1]), [0, 0],
                                     wedge, 1 / 2000)),
        ("sec-tetra-random-plane", *_sec(make_body("simplex", 3), Subspace.random(3, 2, seed=4), [0.1, 0.1, 0.1],
                                         make_density("lebesgue", 3), 1 / 400)),
        ("sec-square-scone", *_sec(make_body("cube", 2).translate([-0.3, -0.6]), Subspace.coordinate(2, [0, 1]),
                                   [0, 0], make_density("s_cone", 2, s=1), 1 / 400)),
        ("sec-random-line-exp", *_sec(K3, Subspace.random(3, 1, seed=2), [0.05, 0.0, 0.0],
                                      make_density("exponential", 3), 1e-4)),
        ("sup-square-axis", *_sup(cube, X_AXIS, LEB2, 1 / 400)),
        ("sup-cross-gauss", *_sup(make_body("cross", 2), X_AXIS, GAUSS2, 1 / 200)),
        ("sup-wedge-disk", *_sup(disk, Subspace.coordinate(2, [0, 1]), wedge, 1 / 200,
                                 candidates=_wedge_candidates(), radius=300.0, extra=list(_wedge_candidates()))),
        ("sup-triangle-axis", *_sup(TRI, X_AXIS, LEB2, 1 / 400)),
    ]


def compare(name, fast_fn, oracle_fn):
    fast = fast_fn()
    grid = oracle_fn()
    tol = max(3 * fast.std_error, 2 * grid.error_bound)
    return {"name": name, "fast": fast.value, "sigma": fast.std_error, "grid": grid.value,
            "grid_error": grid.error_bound, "ok": abs(fast.value - grid.value) <= tol}
