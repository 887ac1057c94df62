import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rsmarginal.geometry import (Ball, GeometryError, PDifferenceSpec, Polytope, Subspace, contains, difference_body,
                                 dp_body, intersect, make_body, minkowski_sum, section_radial, support)

TRI = Polytope(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
SQUARE = make_body("cube", 2)


def test_contains_examples():
    assert contains(SQUARE, [0.5, 0.5])
    assert not contains(TRI, [0.9, 0.9])
    D = dp_body(PDifferenceSpec(make_body("cube", 1), 2))
    assert not contains(D, [0.6, -0.6])
    assert contains(D, [0.0, 0.0])


def test_support_examples():
    assert support(TRI, [1.0, 0.0]) == pytest.approx(1.0)
    B = Ball(np.zeros(3), 2.5)
    for u in np.random.default_rng(0).standard_normal((5, 3)):
        assert support(B, u) == pytest.approx(2.5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_support_additive_over_sums(seed):
    K = make_body("random_polytope", 3, N=7, seed=seed)
    L = make_body("random_polytope", 3, N=6, seed=seed + 1)
    S = minkowski_sum(K, L)
    u = np.random.default_rng(seed).standard_normal(3)
    u /= np.linalg.norm(u)  # support is taken over unit directions
    brute = np.max(K.vertices @ u) + np.max(L.vertices @ u)
    assert support(S, u) == pytest.approx(support(K, u) + support(L, u), abs=1e-9)
    assert support(S, u) == pytest.approx(brute, abs=1e-9)


def test_minkowski_examples():
    S = minkowski_sum(SQUARE, SQUARE.translate([-1.0, -1.0]))
    assert S.volume == pytest.approx(4.0)
    assert support(S, [1, 0]) == pytest.approx(1.0) and support(S, [-1, 0]) == pytest.approx(1.0)
    B = minkowski_sum(Ball(np.zeros(2), 1.0), Ball(np.zeros(2), 2.0))
    X = np.random.default_rng(1).uniform(-4, 4, (1000, 2))
    assert np.array_equal(B.contains_many(X), np.linalg.norm(X, axis=1) <= 3.0)


def test_difference_body_of_triangle_is_hexagon():
    D = difference_body(TRI)
    assert D.volume == pytest.approx(3.0)
    assert D.volume / TRI.volume == pytest.approx(6.0)
    expected = {(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)}
    got = {tuple(int(round(v)) for v in row) for row in D.vertices}
    assert got == expected


def test_difference_body_interval_and_symmetry():
    D = difference_body(make_body("cube", 1))
    assert support(D, [1.0]) == pytest.approx(1.0) and support(D, [-1.0]) == pytest.approx(1.0)
    K = make_body("random_polytope", 3, N=9, seed=3)
    DK = difference_body(K)
    X = np.random.default_rng(2).uniform(-2, 2, (1000, 3))
    assert np.array_equal(DK.contains_many(X), DK.contains_many(-X))


def test_dp_p1_is_difference_body():
    K = make_body("random_polytope", 2, N=6, seed=5)
    D1 = dp_body(PDifferenceSpec(K, 1))
    DK = difference_body(K)
    X = np.random.default_rng(3).uniform(-2, 2, (1000, 2))
    assert np.array_equal(D1.contains_many(X), DK.contains_many(X))


def test_dp_interval_p2_area_three():
    K = make_body("cube", 1)
    D = dp_body(PDifferenceSpec(K, 2))
    assert D.volume == pytest.approx(3.0)
    X = np.random.default_rng(4).uniform(-1.5, 1.5, (2000, 2))
    ref = (np.abs(X[:, 0]) <= 1) & (np.abs(X[:, 1]) <= 1) & (np.abs(X[:, 0] - X[:, 1]) <= 1)
    inside = D.contains_many(X)
    margin = np.minimum.reduce([1 - np.abs(X[:, 0]), 1 - np.abs(X[:, 1]), 1 - np.abs(X[:, 0] - X[:, 1])])
    far = np.abs(margin) > 1e-9
    assert np.array_equal(inside[far], ref[far])


@pytest.mark.parametrize("n,p", [(2, 2), (2, 3), (3, 2)])
def test_dp_vertex_hull_matches_projection(n, p):
    K = make_body("random_polytope", n, N=6, seed=n + p)
    hull = dp_body(PDifferenceSpec(K, p))
    proj = dp_body(PDifferenceSpec(K, p), form="projection")
    X = np.random.default_rng(5).uniform(-1.5, 1.5, (1500, n * p)) * np.max(np.abs(K.vertices))
    assert np.mean(hull.contains_many(X) != proj.contains_many(X)) < 2e-3


def test_dp_simplex_schneider_equality():
    K = make_body("simplex", 2)
    from math import comb
    assert dp_body(PDifferenceSpec(K, 2)).volume == pytest.approx(comb(6, 2) * K.volume ** 2)


def test_section_radial_examples():
    H = Subspace.coordinate(2, [0])
    e1 = [1.0, 0.0]
    assert section_radial(Ball(np.zeros(2), 1.0), H, [0, 0], e1) == pytest.approx(1.0)
    assert section_radial(difference_body(TRI), H, [0, 0], e1) == pytest.approx(1.0)
    C = make_body("cube", 2).translate([-0.5, -0.5]).scale(2.0)
    full = Subspace.coordinate(2, [0, 1])
    u = np.array([1.0, 1.0]) / np.sqrt(2)
    assert section_radial(C, full, [0, 0], u) == pytest.approx(np.sqrt(2), rel=1e-8)
    assert section_radial(TRI, H, [5.0, 5.0], e1) == 0.0
    with pytest.raises(GeometryError):
        section_radial(TRI, H, [0.1, 0.1], [0.0, 1.0])


def test_make_body_examples():
    S = make_body("simplex", 2)
    assert len(S.vertices) == 3 and S.volume == pytest.approx(0.5)
    Q = make_body("cube", 3)
    assert len(Q.vertices) == 8 and Q.volume == pytest.approx(1.0)
    a = make_body("random_polytope", 2, N=6, seed=7)
    b = make_body("random_polytope", 2, N=6, seed=7)
    assert np.array_equal(a.vertices, b.vertices)


def test_intersect_and_errors():
    C = make_body("cube", 2).translate([-0.5, -0.5]).scale(2.0)
    I = intersect(C, C.scale(0.5))
    assert I.volume == pytest.approx(1.0)
    with pytest.raises(GeometryError):
        minkowski_sum(make_body("cube", 2), make_body("cube", 3))


def test_subspace_complement_is_orthogonal():
    H = Subspace.random(4, 2, seed=1)
    Cm = H.complement()
    assert Cm.shape == (2, 4)
    assert np.allclose(Cm @ H.basis.T, 0, atol=1e-12)
    assert np.allclose(Cm @ Cm.T, np.eye(2), atol=1e-12)
