import math

import numpy as np
import pytest

from rsmarginal.density import make_density
from rsmarginal.funclass import make_function
from rsmarginal.geometry import Ball, Subspace, make_body
from rsmarginal.quadrature import (Estimate, EstimatorConfig, combine_product, derive_seed, exact,
                                   integrate_function_section, mc_box_mean, measure_section, nested_rhs,
                                   relative_sigma)
from rsmarginal.verify import layer_sup_integral

X2 = Subspace.coordinate(2, [0])
LEB2 = make_density("lebesgue", 2)
CFG = EstimatorConfig(samples=2 ** 16, seed=3)


def within(est: Estimate, target: float, floor: float = 1e-9) -> bool:
    tol = max(3 * est.std_error, floor * max(1.0, abs(target))) + float(est.truncation_bound or 0.0)
    return abs(est.value - target) <= tol


def test_measure_section_examples():
    assert within(measure_section(Ball(np.zeros(2), 1.0), X2, [0, 0], LEB2, CFG), 2.0)
    g = measure_section(Ball(np.zeros(2), 10.0), X2, [0, 0], make_density("gaussian", 2), CFG)
    assert within(g, math.sqrt(2 * math.pi), 1e-8)
    assert within(measure_section(make_body("cube", 2), X2, [0, 0.5], LEB2, CFG), 1.0)


def test_box_mc_path_is_consistent():
    cfg = EstimatorConfig(samples=2 ** 18, seed=5, method="box_mc")
    T = make_body("simplex", 3)
    e = measure_section(T, Subspace.coordinate(3, [0, 1]), [0, 0, 0.25], make_density("gaussian", 3), cfg)
    ref = measure_section(T, Subspace.coordinate(3, [0, 1]), [0, 0, 0.25], make_density("gaussian", 3), CFG)
    assert e.method == "box_mc" and e.std_error > 0
    assert abs(e.value - ref.value) <= 3 * e.std_error + 1e-9


def test_function_sections():
    g = make_function("gaussian", 2)
    assert within(integrate_function_section(g, X2, [0, 0], LEB2, CFG), math.sqrt(math.pi), 1e-6)
    K = make_body("simplex", 2)
    ind = make_function("indicator", 2, body=K)
    a = integrate_function_section(ind, X2, [0, 0.25], LEB2, CFG)
    b = measure_section(K, X2, [0, 0.25], LEB2, CFG)
    assert abs(a.value - b.value) <= 3 * math.hypot(a.std_error, b.std_error) + 1e-9
    cone = make_function("cone", 1, s=1)
    assert within(integrate_function_section(cone, Subspace.coordinate(1, [0]), [0.0], make_density("lebesgue", 1),
                                             CFG), 1.0, 1e-6)


def test_layer_sup_integral():
    g = make_function("gaussian", 2)
    est, _ = layer_sup_integral(g, X2, LEB2, CFG)
    assert est.value == pytest.approx(math.sqrt(math.pi), rel=2e-3)
    est64, _ = layer_sup_integral(g, X2, LEB2, CFG, t_nodes=64)
    assert abs(est64.value - est.value) < 1e-3 * est.value
    K = make_body("cross", 2)
    ind, _ = layer_sup_integral(make_function("indicator", 2, body=K), X2, LEB2, CFG)
    assert ind.value == pytest.approx(2.0, rel=1e-6)


def test_nested_rhs():
    B = make_body("cube", 2).translate([-0.5, -0.5])
    v = nested_rhs(B, [LEB2], [X2], CFG)
    assert 0 < v.value <= 1.0 + 3 * v.std_error
    # swapping identical factors leaves the estimate unchanged
    T = make_body("simplex", 2)
    g = make_density("gaussian", 2)
    a = nested_rhs(T, [g, g], [X2, Subspace.coordinate(2, [1])], CFG)
    b = nested_rhs(T, [g, g], [Subspace.coordinate(2, [1]), X2], CFG)
    assert a.value == pytest.approx(b.value, rel=1e-12)


def test_mc_determinism_across_threads():
    f = lambda X: (np.sum(X * X, axis=1) <= 1).astype(float)  # noqa: E731
    lo, hi = -np.ones(3), np.ones(3)
    runs = [mc_box_mean(f, lo, hi, 2 ** 17, 9, chunk=2 ** 14, threads=t) for t in (1, 4, 8)]
    assert runs[0] == runs[1] == runs[2]
    assert abs(8 * runs[0][0] - 4 * math.pi / 3) <= 3 * 8 * runs[0][1]


def test_estimate_algebra():
    a, b = Estimate(2.0, 0.02, "x"), Estimate(4.0, 0.08, "y")
    assert relative_sigma(a, b) == pytest.approx(math.hypot(0.01, 0.02))
    p = combine_product([a, b])
    assert p.value == pytest.approx(8.0) and p.rel_error == pytest.approx(math.hypot(0.01, 0.02))
    assert exact(3.0).std_error == 0.0
    assert derive_seed(1, 2) == derive_seed(1, 2) != derive_seed(1, 3)
    with pytest.raises(ValueError):
        Estimate(1.0, -1.0, "bad")
