import numpy as np
import pytest

from rsmarginal.density import (DensityError, declare, lifted_density, make_density, product_density,
                                validate_attributes)
from rsmarginal.geometry import Ball


def test_values():
    assert make_density("gaussian", 2)(np.zeros((1, 2)))[0] == 1.0
    w = make_density("wedge", 2, k=100)
    assert w(np.array([[1.0, 0.001]]))[0] == 1.0
    assert w(np.array([[1.0, 0.02]]))[0] == 0.0
    assert make_density("s_cone", 2, s=2)(np.array([[0.5, 0.0]]))[0] == pytest.approx(0.25)
    assert make_density("lebesgue", 3)(np.ones((4, 3))).tolist() == [1.0] * 4


@pytest.mark.parametrize("family,params", [("gaussian", {}), ("exponential", {}), ("power_law", {"beta": 3}),
                                           ("s_cone", {"s": 1}), ("s_tail", {"s": -1}), ("lebesgue", {})])
def test_declared_attributes_survive(family, params):
    assert validate_attributes(make_density(family, 2, **params), samples=4096, seed=1) == []


def test_body_indicator_of_ball_is_valid():
    d = make_density("body_indicator", 2, body=Ball(np.zeros(2), 1.0))
    assert validate_attributes(d) == []
    assert d.attributes.even and d.attributes.quasiconcave


def test_wrong_declarations_are_caught():
    w = declare(make_density("wedge", 2, k=100), even=True)
    bad = validate_attributes(w, samples=20_000, seed=0)
    names = [v.attribute for v in bad]
    assert "even" in names
    x, mx = next(v.witness for v in bad if v.attribute == "even")
    assert np.allclose(x, -mx)
    # a wide pair: uniform sampling rarely lands in both arms of a thin one
    pair = declare(make_density("wedge_pair", 2, k=2), quasiconcave=True)
    assert "quasiconcave" in [v.attribute for v in validate_attributes(pair, samples=20_000)]


def test_parameter_errors():
    with pytest.raises(DensityError):
        make_density("power_law", 2, beta=2)
    with pytest.raises(DensityError):
        make_density("s_tail", 2, s=-3)
    with pytest.raises(DensityError):
        make_density("nope", 2)


def test_product_and_lifted():
    g = make_density("gaussian", 1)
    prod = product_density([g, make_density("lebesgue", 1)])
    X = np.array([[1.0, 5.0], [0.0, -3.0]])
    assert np.allclose(prod(X), [np.exp(-0.5), 1.0])
    assert product_density([make_density("lebesgue", 2)] * 2).is_lebesgue
    lift = lifted_density(make_density("gaussian", 2), 1)
    assert lift.n == 3
    assert lift(np.array([[0.0, 0.0, 7.0]]))[0] == 1.0
