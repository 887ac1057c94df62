import math
from fractions import Fraction

import pytest

from rsmarginal import constants as C


def test_binomials_exact():
    assert C.rs_constant(2) == 6 and C.rs_constant(3) == 20
    assert C.rs_constant(60) == math.comb(120, 60)
    assert C.schneider_constant(1, 2) == 3 and C.schneider_constant(1, 3) == 4
    assert C.marginal_constant(3, 2) == 10


def test_psi():
    assert C.psi(9, 3) == pytest.approx(math.sqrt(3))
    assert C.psi(4, 4) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        C.psi(2, 3)


@pytest.mark.parametrize("x,y", [(1, 1), (3, 2), (5, 7), (10, 10), (20, 3)])
def test_beta_against_rationals(x, y):
    exact = C.beta_exact(x, y)
    assert abs(C.beta(x, y) - float(exact)) <= 1e-12 * float(exact)


def test_s_limit_identity_exact():
    left, right = C.s_limit_identity(3, 2)
    assert left == right == Fraction(4)
    for n in range(1, 11):
        for m in range(1, 11):
            left, right = C.s_limit_identity(n, m)
            assert left == right


def test_beta_s_constants():
    assert C.beta_s_constant(2, 1, 1) == pytest.approx(1.0)
    assert C.beta_s_proof_constant(2, 1, 1) == pytest.approx(0.25)
    for n, m, s in [(2, 1, 1), (3, 2, 1), (3, 1, -1), (2, 1, 2)]:
        ratio = C.beta_s_constant(n, m, s) / C.beta_s_proof_constant(n, m, s)
        assert ratio == pytest.approx((n + s + m) / m)


def test_unit_balls_and_lift_constants():
    assert C.unit_ball_volume(1) == pytest.approx(2.0)
    assert C.unit_ball_volume(2) == pytest.approx(math.pi)
    assert C.sphere_area(3) == pytest.approx(4 * math.pi)
    assert C.lift_constant(2, 1, 1) == math.comb(5, 3)
    assert C.lift_constant_rational(2, 1, 2, 1) == pytest.approx(C.lift_constant(2, 1, 2))
