import math

import numpy as np
import pytest

import regression_cases as rc
from rsmarginal.density import make_density
from rsmarginal.geometry import Ball, Subspace, difference_body, make_body
from rsmarginal.oracle import GridSpec, OracleError, grid_section_measure, grid_sup_translate, grid_volume


def test_grid_volumes():
    h = GridSpec(1 / 200)
    assert grid_volume(make_body("cube", 2), h).value == pytest.approx(1.0, abs=0.02)
    assert grid_volume(Ball(np.zeros(2), 1.0), h).value == pytest.approx(math.pi, abs=0.05)
    assert grid_volume(make_body("simplex", 2), h).value == pytest.approx(0.5, abs=0.02)
    with pytest.raises(OracleError):
        grid_volume(make_body("cube", 4), h)


def test_grid_sections():
    X = Subspace.coordinate(2, [0])
    r = grid_section_measure(Ball(np.zeros(2), 1.0), X, np.zeros(2), make_density("lebesgue", 2), GridSpec(1e-4))
    assert r.value == pytest.approx(2.0, abs=1e-3)
    # wedge(100) on the half-size difference body of Ball(0, 1/2): sector of angle 1/100 and radius 1/2
    K = difference_body(Ball(np.zeros(2), 0.5)).scale(0.5)
    w = grid_section_measure(K, Subspace.coordinate(2, [0, 1]), np.zeros(2), make_density("wedge", 2, k=100),
                             GridSpec(1 / 4000))
    assert w.value == pytest.approx(0.5 * 0.01 * 0.25, rel=0.02)
    sq = make_body("cube", 2).translate([-0.5, -0.5]).scale(10.0)
    g = grid_section_measure(sq, X, np.zeros(2), make_density("gaussian", 2), GridSpec(1e-3))
    assert g.value == pytest.approx(math.sqrt(2 * math.pi), abs=1e-2)


def test_grid_sups():
    X = Subspace.coordinate(2, [0])
    C = make_body("cross", 2)
    y, r = grid_sup_translate(C, X, make_density("gaussian", 2), GridSpec(1 / 100))
    assert np.linalg.norm(y) <= 1 / 100 * 4 + 1e-12
    y, r = grid_sup_translate(make_body("cube", 2), X, make_density("lebesgue", 2), GridSpec(1 / 200))
    assert r.value == pytest.approx(1.0)
    bis = np.array([math.cos(0.005), math.sin(0.005)])
    cand = np.array([-c * bis for c in (10.0, 50.0, 150.0)])
    y, r = grid_sup_translate(Ball(np.zeros(2), 0.5), Subspace.coordinate(2, [0, 1]), make_density("wedge", 2, k=100),
                              GridSpec(1 / 200), candidates=cand)
    assert r.value == pytest.approx(math.pi / 4, abs=0.03)
    assert np.allclose(y, cand[2])


@pytest.mark.parametrize("case", rc.cases(), ids=lambda c: c[0])
def test_regression_set_agrees_with_oracles(case):
    r = rc.compare(*case)
    assert r["ok"], r
