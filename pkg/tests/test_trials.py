import numpy as np
import pytest

from hardyrellich.geometry import AffineSubspace, Ball, Halfspace, distance
from hardyrellich.profiles import chi_n, log_cutoff, power_ramp, smooth_cutoff
from hardyrellich.trials import PowerLocalizedTrial, ProductTrial, RadialDistanceTrial


def _fd_gradient(fn, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return g


def test_radial_trial_evaluation():
    body = Ball([0.0, 0.0], 1.0)
    trial = RadialDistanceTrial(chi_n(100.0))
    x = np.array([2.5, 0.0])  # distance 1.5, inside the cutoff band
    assert trial.value(body, x) == pytest.approx(chi_n(100.0).value(1.5))


def test_radial_trial_gradient_matches_fd(rng):
    body = Ball([0.2, -0.1], 0.7)
    trial = RadialDistanceTrial(power_ramp(0.6, 50.0, smooth_cutoff(1.0, 2.0)))
    for _ in range(20):
        x = rng.normal(scale=1.5, size=2)
        s = distance(body, x)
        if not 0.1 < s < 1.9:
            continue
        g = trial.gradient(body, x)
        fd = _fd_gradient(lambda y: float(trial.value(body, y)), x)
        assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(g)))


def test_product_trial_gradient_matches_fd(rng):
    line = AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]])
    trial = ProductTrial(smooth_cutoff(3.0, 6.0), power_ramp(0.5, 50.0, smooth_cutoff(1.0, 2.0)))
    count = 0
    while count < 20:
        x = rng.normal(scale=2.0, size=3)
        s = distance(line, x)
        if not 0.1 < s < 1.9:
            continue
        g = trial.gradient(line, x)
        fd = _fd_gradient(lambda y: float(trial.value(line, y)), x)
        assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(g)))
        count += 1


def test_product_trial_halfspace_split():
    hs = Halfspace([0.0, 1.0], 1.0)  # K = {x2 <= 1}
    trial = ProductTrial(smooth_cutoff(2.0, 4.0), chi_n(10.0))
    tau, r, u_tau, u_norm = trial.split(hs, np.array([3.0, 2.5]))
    assert r == pytest.approx(1.5)
    assert tau == pytest.approx(3.0)
    assert np.allclose(u_norm, [0.0, 1.0])
    assert np.allclose(u_tau, [1.0, 0.0])


def test_product_trial_support_vanishes():
    line = AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]])
    trial = ProductTrial(smooth_cutoff(1.0, 2.0), chi_n(10.0))
    assert trial.value(line, np.array([5.0, 0.5, 0.0])) == 0.0  # tangentially outside
    assert trial.value(line, np.array([0.0, 3.0, 0.0])) == 0.0  # normal radius beyond cutoff


def test_power_localized_records_alpha():
    trial = PowerLocalizedTrial(0.75, chi_n(100.0))
    assert trial.alpha == 0.75
    assert trial.profile.meta["alpha"] == 0.75
    body = Ball([0.0, 0.0], 1.0)
    x = np.array([2.2, 0.0])
    s = distance(body, x)
    assert trial.value(body, x) == pytest.approx(s**-0.75 * chi_n(100.0).value(s))


def test_trial_support_distance_positive():
    trial = RadialDistanceTrial(power_ramp(0.5, 100.0, log_cutoff(1.0, 3.0)))
    lo, hi = trial.support_shell()
    assert lo > 0 and np.isfinite(hi)
