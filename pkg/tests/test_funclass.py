import math

import numpy as np
import pytest

from rsmarginal.funclass import (INF, DeltaConfig, alpha_mean, admissible, ball_body, ball_radial, delta_alpha,
                                 delta_alpha_many, level_body_Lm, lift_A, lift_A_of_delta, lift_B, make_function)
from rsmarginal.geometry import Ball, difference_body, make_body, minkowski_sum


def test_alpha_means():
    assert alpha_mean(1, 4, 0, 0.5) == pytest.approx(2.0)
    assert alpha_mean(3, 7, INF) == 7 and alpha_mean(3, 7, -INF) == 3
    for a in (-INF, -2.0, 0.0, 0.5, 1.0, INF):
        assert alpha_mean(3.0, 0.0, a) == 0.0
    # the unweighted mean: M_alpha(a, a) = 2^(1/alpha) a
    assert alpha_mean(2.0, 2.0, 1.0) == pytest.approx(4.0)


def test_function_examples():
    g = make_function("gaussian", 2)
    L = g.level_set(math.exp(-1))
    assert isinstance(L, Ball) and L.radius == pytest.approx(1.0)
    K = make_body("simplex", 2)
    ind = make_function("indicator", 2, body=K)
    for t in (0.1, 0.5, 1.0):
        assert ind.level_set(t) is K
    assert make_function("cone", 2, s=1)(np.array([[0.25, 0.0]]))[0] == pytest.approx(0.75)


def test_delta_of_indicator_is_difference_body():
    K = make_body("simplex", 2)
    ind = make_function("indicator", 2, body=K)
    X = np.random.default_rng(0).uniform(-1.2, 1.2, (1000, 2))
    D = difference_body(K)
    assert np.array_equal(delta_alpha_many(ind, -INF, X).value, D.contains_many(X).astype(float))
    # the level-set bisection agrees with the closed form away from the boundary
    slow = delta_alpha_many(ind, -INF, X[:200], DeltaConfig(closed_form=False)).value
    assert np.mean(slow != D.contains_many(X[:200])) < 0.02


def test_delta_gaussian_closed_form_and_search():
    g = make_function("gaussian", 2)
    x = np.array([1.0, 0.0])
    assert delta_alpha(g, 0.0, x) == pytest.approx(math.exp(-0.5))
    X = np.random.default_rng(1).uniform(-2, 2, (20, 2))
    closed = delta_alpha_many(g, 0.0, X).value
    searched = delta_alpha_many(g, 0.0, X, DeltaConfig(closed_form=False)).value
    assert np.allclose(closed, np.exp(-np.sum(X ** 2, axis=1) / 2), rtol=1e-12)
    assert np.allclose(searched, closed, rtol=1e-6)
    assert delta_alpha(g, 0.0, np.zeros(2)) == pytest.approx(1.0)  # ||Delta_0 f|| = ||f||^2


def test_ball_body_examples():
    lap = make_function("laplace", 3)
    U = np.random.default_rng(2).standard_normal((5, 3))
    assert np.allclose(ball_body(lap, 2).radial(U / np.linalg.norm(U, axis=1, keepdims=True)), math.sqrt(2), rtol=1e-8)
    C = make_body("cube", 2).translate([-0.5, -0.5]).scale(2.0)
    ind = make_function("indicator", 2, body=C)
    u = np.array([1.0, 1.0]) / math.sqrt(2)
    assert ball_radial(ind, 2, u).rho == pytest.approx(math.sqrt(2), rel=1e-6)


def test_level_body_and_inclusion():
    assert level_body_Lm(make_function("gaussian", 2), 1).radius == pytest.approx(1.0)
    K = make_body("cross", 2)
    assert level_body_Lm(make_function("indicator", 2, body=K), 3) is K
    lap = make_function("laplace", 3)
    U = np.random.default_rng(3).standard_normal((1000, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    assert np.all(ball_body(lap, 2).radial(U) <= level_body_Lm(lap, 2).radius)


def test_admissibility():
    assert admissible(make_function("gaussian", 2), 0.0)
    assert admissible(make_function("gaussian", 2), -1.0)
    assert not admissible(make_function("gaussian", 2), 0.5)
    assert admissible(make_function("cone", 2, s=2), 0.5)


def test_lifts():
    ind = make_function("indicator", 2, body=Ball(np.zeros(2), 1.0))
    A = lift_A(ind, 1)
    assert A.contains(np.array([0.5, 0.0, 0.99]))
    assert not A.contains(np.array([0.5, 0.0, 1.01]))
    assert not A.contains(np.array([1.5, 0.0, 0.0]))
    cone = make_function("cone", 1, s=1)
    B = lift_B(cone, 1, 2)
    assert B.contains(np.array([0.5, 0.5, 0.24]))
    assert not B.contains(np.array([0.5, 0.5, 0.26]))
    with pytest.raises(ValueError):
        lift_B(cone, 2, 4)


def test_lift_identity_membership():
    cone = make_function("cone", 1, s=1)
    A = lift_A(cone, 1)
    S = minkowski_sum(A, A.reflect())
    D = lift_A_of_delta(cone, 1)
    X = np.random.default_rng(4).uniform(-2.2, 2.2, (1000, 2))
    rad = delta_alpha_many(cone, 1.0, X[:, :1]).value
    keep = np.abs(np.abs(X[:, 1]) - rad) > 1e-3
    assert np.array_equal(D.contains_many(X[keep]), S.contains_many(X[keep]))
