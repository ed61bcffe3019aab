import numpy as np
import pytest

from hardyrellich.weights import (
    WeightParams,
    weight_asymptotics_check,
    weight_derivative,
    weight_log_derivative,
    weight_value,
)


def test_pure_power_reduction():
    for sigma in (0.0, 0.5, 2.0):
        w = WeightParams(sigma, sigma)
        s = np.geomspace(1e-4, 1e4, 40)
        assert np.allclose(weight_value(w, s), s**sigma, rtol=1e-14)


def test_single_substitution():
    w = WeightParams(1.0, 3.0)
    assert weight_value(w, 1.0) == pytest.approx(4.0, abs=1e-14)
    ld = weight_log_derivative(w, 1.0)
    assert ld == pytest.approx(2.0, abs=1e-14)
    assert 1.0 <= ld <= 3.0


def test_derivative_matches_finite_differences(rng):
    # independent central-difference oracle
    for _ in range(50):
        w = WeightParams(
            rng.uniform(0.0, 3.0),
            rng.uniform(0.0, 3.0),
            rng.uniform(0.5, 2.0),
            rng.uniform(0.5, 2.0),
        )
        s = 10.0 ** rng.uniform(-2.0, 2.0)
        h = 1e-6 * s
        fd = (weight_value(w, s + h) - weight_value(w, s - h)) / (2.0 * h)
        an = weight_derivative(w, s)
        assert an == pytest.approx(fd, rel=1e-8)


def test_asymptotics_infinity_plain():
    w = WeightParams(0.0, 2.0)
    _, ratios, limit = weight_asymptotics_check(w, "infinity")
    assert limit == 1.0
    assert ratios[-1] == pytest.approx(1.0, abs=1e-3)


def test_asymptotics_zero_general_coefficients():
    w = WeightParams(0.0, 1.0, a=2.0, b=1.0)
    _, ratios, limit = weight_asymptotics_check(w, "zero")
    assert limit == pytest.approx(2.0)
    assert ratios[-1] == pytest.approx(2.0, abs=1e-3)


def test_asymptotics_constant_ratio_for_equal_exponents():
    w = WeightParams(1.5, 1.5)
    _, ratios, limit = weight_asymptotics_check(w, "zero")
    assert limit == 1.0
    assert np.allclose(ratios, 1.0, atol=1e-12)


def test_log_derivative_bounds_on_log_grid(rng):
    s = np.geomspace(1e-6, 1e6, 200)
    for _ in range(30):
        w = WeightParams(
            rng.uniform(0.0, 4.0),
            rng.uniform(0.0, 4.0),
            rng.uniform(0.2, 5.0),
            rng.uniform(0.2, 5.0),
        )
        ld = weight_log_derivative(w, s)
        assert np.all(ld >= w.wedge - 1e-12)
        assert np.all(ld <= w.vee + 1e-12)


def test_positivity():
    w = WeightParams(2.0, 0.5, a=0.7, b=1.3)
    s = np.geomspace(1e-8, 1e8, 100)
    assert np.all(weight_value(w, s) > 0)


def test_role_swap_symmetry(rng):
    # swapping (delta, a) <-> (delta', b) together with s <-> 1/s reproduces
    # the log-derivative exactly, hence preserves its bounds
    for _ in range(25):
        w = WeightParams(
            rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0),
            rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0),
        )
        swapped = WeightParams(w.delta_prime, w.delta, w.b, w.a)
        s = 10.0 ** rng.uniform(-3.0, 3.0)
        assert weight_log_derivative(swapped, 1.0 / s) == pytest.approx(
            weight_log_derivative(w, s), rel=1e-12
        )


def test_boundary_value():
    assert weight_value(WeightParams(1.0, 2.0), 0.0) == 0.0
    assert weight_value(WeightParams(0.0, 2.0, a=3.0), 0.0) == pytest.approx(9.0)


def test_errors():
    with pytest.raises(ValueError):
        weight_value(WeightParams(), -1.0)
    with pytest.raises(ValueError):
        weight_derivative(WeightParams(), 0.0)
    with pytest.raises(ValueError):
        weight_log_derivative(WeightParams(), -2.0)
    with pytest.raises(ValueError):
        WeightParams(-1.0, 0.0)
    with pytest.raises(ValueError):
        WeightParams(0.0, 0.0, a=0.0)


def test_json_round_trip():
    w = WeightParams(0.25, 1.75, a=1.5, b=0.5)
    assert WeightParams.from_json(w.to_json()) == w
