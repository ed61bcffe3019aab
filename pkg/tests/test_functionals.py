import math

import numpy as np
import pytest

from hardyrellich.constants import ProblemSpec, hardy_constant, rellich_constants
from hardyrellich.functionals import (
    QuadratureSpec,
    hardy_directional_quotient,
    hardy_quotient,
    hardy_split_bound,
    lambda_split,
    lemma31_residual,
    plateau_cutoff_quotient,
    rellich_quotient,
    split_equality_point,
    weighted_operator_apply,
)
from hardyrellich.geometry import (
    AffineSubspace,
    Ball,
    Box,
    Halfspace,
    SinglePoint,
    VPolytope,
    sample_outside,
)
from hardyrellich.profiles import (
    chi_n,
    log_cutoff,
    power_profile,
    power_ramp,
    power_sigma,
    sigma_profile,
    smooth_cutoff,
)
from hardyrellich.suite import rellich_trials_for
from hardyrellich.trials import ProductTrial, RadialDistanceTrial
from hardyrellich.weights import WeightParams


def point_spec(d, p=2.0, delta=0.0, delta_prime=None):
    dp = delta if delta_prime is None else delta_prime
    return ProblemSpec(d, SinglePoint([0.0] * d), p, WeightParams(delta, dp))


# ---------------------------------------------------------------------------
# the elementary split inequality


def test_lambda_split_symmetric_equality():
    assert lambda_split(1.0, 1.0, 0.5, 2.0) == pytest.approx(4.0)


def test_lambda_split_equality_point_oracle(rng):
    # oracle: dense grid minimization of the right-hand side over lambda
    for _ in range(25):
        s, t = rng.uniform(0.1, 5.0, size=2)
        p = rng.uniform(1.2, 4.0)
        lam_star = split_equality_point(s, t, p)
        assert lambda_split(s, t, lam_star, p) == pytest.approx((s + t) ** p, rel=1e-10)
        grid = np.linspace(1e-4, 1.0 - 1e-4, 4001)
        vals = [lambda_split(s, t, float(l), p) for l in grid]
        i = int(np.argmin(vals))
        assert grid[i] == pytest.approx(lam_star, abs=2e-3)
        assert min(vals) >= (s + t) ** p - 1e-9


def test_lambda_split_blows_up_at_zero():
    assert lambda_split(1.0, 2.0, 1e-12, 2.0) > 1e10


def test_lambda_split_inequality_many_draws(rng):
    s = rng.uniform(0.0, 10.0, size=100_000)
    t = rng.uniform(0.0, 10.0, size=100_000)
    lam = rng.uniform(1e-3, 1.0 - 1e-3, size=100_000)
    p = rng.uniform(1.1, 4.0, size=100_000)
    lhs = (s + t) ** p
    rhs = (1.0 - lam) ** (-(p - 1.0)) * s**p + lam ** (-(p - 1.0)) * t**p
    assert np.all(lhs <= rhs * (1.0 + 1e-12) + 1e-12)


def test_lambda_split_domain_errors():
    with pytest.raises(ValueError):
        lambda_split(-1.0, 1.0, 0.5, 2.0)
    with pytest.raises(ValueError):
        lambda_split(1.0, 1.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        lambda_split(1.0, 1.0, 0.5, 1.0)


# ---------------------------------------------------------------------------
# first-order quotients


def test_hardy_quotient_scaling_invariance():
    spec = point_spec(3)
    trial = RadialDistanceTrial(power_ramp(0.5, 100.0, smooth_cutoff(1.0, 2.0)))
    q1 = hardy_quotient(spec, trial).quotient
    q2 = hardy_quotient(spec, trial.scaled(17.0)).quotient
    assert q1 == pytest.approx(q2, rel=1e-12)


def test_hardy_quotient_point_family_range_and_decrease():
    # frozen from the 1-D adaptive oracle on the reduced integrals
    spec = point_spec(3)
    quotients = []
    for n in (1e2, 1e3, 1e4):
        trial = RadialDistanceTrial(power_ramp(0.5, n, log_cutoff(1.0, 6.0)))
        q = hardy_quotient(spec, trial)
        quotients.append(q.quotient)
        assert q.error < 1e-8
    assert 0.25 <= quotients[1] <= 0.40
    assert quotients[0] > quotients[1] > quotients[2] >= 0.25


def test_hardy_product_matches_monte_carlo_three_figures():
    line = AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]])
    spec = ProblemSpec(3, line, 2.0, WeightParams(0.0, 1.0))
    trial = ProductTrial(smooth_cutoff(3.0, 6.0), power_ramp(1.0, 100.0, smooth_cutoff(1.0, 2.0)))
    qt = hardy_quotient(spec, trial)
    qm = hardy_quotient(spec, trial, QuadratureSpec(method="monte-carlo", seed=4, max_evals=3_000_000))
    assert qm.quotient == pytest.approx(qt.quotient, rel=2e-3)
    assert abs(qm.quotient - qt.quotient) <= 4.0 * (qm.error + qt.error)


def test_directional_radial_equality():
    spec = point_spec(3)
    trial = RadialDistanceTrial(power_ramp(0.5, 1e3, smooth_cutoff(1.0, 2.0)))
    full = hardy_quotient(spec, trial)
    direc = hardy_directional_quotient(spec, trial)
    assert direc.quotient == pytest.approx(full.quotient, rel=1e-12)


def test_directional_below_full_for_product(rng):
    line = AffineSubspace([0.0] * 4, [[0.0, 0.0, 0.0, 1.0]])
    spec = ProblemSpec(4, line, 2.0, WeightParams(0.5, 0.5))
    bound = hardy_constant(spec).a_p_pow_p
    for _ in range(3):
        trial = ProductTrial(
            smooth_cutoff(rng.uniform(2, 8), rng.uniform(9, 15)),
            power_ramp(rng.uniform(0.2, 0.7), 10 ** rng.uniform(2, 4), smooth_cutoff(1.0, 2.0)),
        )
        full = hardy_quotient(spec, trial)
        direc = hardy_directional_quotient(spec, trial)
        assert direc.numerator <= full.numerator * (1.0 + 1e-12)
        assert direc.quotient >= bound * (1.0 - 1e-6)
        assert full.quotient >= bound * (1.0 - 1e-6)


def test_directional_integrand_vanishes_on_plateau():
    # a trial locally constant along the distance direction has zero
    # directional integrand there, while the full one keeps the bump part
    line = AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]])
    trial = ProductTrial(smooth_cutoff(2.0, 4.0), chi_n(10.0, smooth_cutoff(2.0, 4.0)))
    x = np.array([3.0, 1.5, 0.0])  # normal radius 1.5: ramp done, cutoff not started
    grad = trial.gradient(line, x)
    from hardyrellich.geometry import distance_gradient

    gd = distance_gradient(line, x)
    assert abs(float(grad @ gd)) <= 1e-14
    assert np.linalg.norm(grad) > 0  # the tangential bump is decaying at tau = 3


def test_route_independence_radial():
    spec = ProblemSpec(3, Ball([0.0, 0.0, 0.0], 1.0), 2.0, WeightParams(1.5, 1.5))
    trial = RadialDistanceTrial(power_ramp(0.25, 100.0, smooth_cutoff(1.0, 2.0)))
    q_ad = hardy_quotient(spec, trial, QuadratureSpec(method="radial-1d"))
    q_tg = hardy_quotient(spec, trial, QuadratureSpec(method="tensor-grid"))
    q_mc = hardy_quotient(spec, trial, QuadratureSpec(method="monte-carlo", seed=2, max_evals=2_000_000))
    assert q_tg.quotient == pytest.approx(q_ad.quotient, rel=1e-9)
    assert abs(q_mc.quotient - q_ad.quotient) <= 4.0 * (q_mc.error + q_ad.error) + 2e-3 * q_ad.quotient


def test_hardy_box_and_segment_bodies(rng):
    box = Box([-1.0, -1.0], [1.0, 1.0])
    spec = ProblemSpec(2, box, 1.5, WeightParams(1.0, 1.0))
    bound = hardy_constant(spec).a_p_pow_p
    trial = RadialDistanceTrial(power_ramp(0.3, 200.0, smooth_cutoff(1.0, 2.0)))
    q = hardy_quotient(spec, trial)
    assert q.quotient >= bound * (1.0 - 1e-6)
    seg = VPolytope([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    spec2 = ProblemSpec(3, seg, 1.5, WeightParams(0.0, 0.0))
    q2 = hardy_quotient(spec2, RadialDistanceTrial(chi_n(100.0)))
    assert q2.quotient >= hardy_constant(spec2).a_p_pow_p * (1.0 - 1e-6)


def test_support_violations_raise():
    spec = point_spec(3)
    with pytest.raises(ValueError):
        hardy_quotient(spec, RadialDistanceTrial(smooth_cutoff()))  # support touches 0
    with pytest.raises(ValueError):
        hardy_quotient(spec, RadialDistanceTrial(power_profile(0.5)))  # unbounded support
    hs_spec = ProblemSpec(2, Halfspace([1.0, 0.0], 0.0), 1.5, WeightParams(1.0, 1.0))
    with pytest.raises(ValueError):
        hardy_quotient(hs_spec, RadialDistanceTrial(chi_n(10.0)))  # unbounded body
    with pytest.raises(ValueError):
        # zero trial: denominator underflow
        hardy_quotient(spec, RadialDistanceTrial(chi_n(10.0).scaled(0.0)))


# ---------------------------------------------------------------------------
# weighted operator


def test_operator_power_law_on_plateau():
    # analytic Laplacian oracle: H |x|^-a = a (d - 2 - a) |x|^-(a+2) where the
    # localizer is identically one
    d, alpha = 3, 0.8
    spec = point_spec(d)
    trial = RadialDistanceTrial(power_profile(alpha) * chi_n(20.0, smooth_cutoff(4.0, 8.0)))
    x = np.array([1.2, 1.0, 0.9])  # distance ~ 1.8: ramp and cutoff both flat
    s = float(np.linalg.norm(x))
    expect = alpha * (d - 2.0 - alpha) * s ** (-alpha - 2.0)
    assert weighted_operator_apply(spec, trial, x) == pytest.approx(expect, rel=1e-12)
    assert weighted_operator_apply(spec, trial, x, method="fd") == pytest.approx(expect, rel=1e-6)


def test_lemma31_equality_case(rng):
    # K = {0}, unweighted, equal exponents: the profile inequality is an identity
    spec = point_spec(4)
    pts = sample_outside(spec.body, 200, rng, shell=(0.2, 8.0))
    mn, residual, _ = lemma31_residual(spec, 1.5, 1.5, pts)
    assert np.max(np.abs(residual)) <= 1e-8


def test_lemma31_halfspace_nonnegative(rng):
    spec = ProblemSpec(3, Halfspace([0.0, 0.0, 1.0], 0.0), 2.0, WeightParams())
    pts = sample_outside(spec.body, 1000, rng, shell=(0.05, 20.0))
    mn, _, _ = lemma31_residual(spec, 1.0, 1.0, pts)
    assert mn >= -1e-10


def test_lemma31_zero_exponents(rng):
    spec = point_spec(5)
    pts = sample_outside(spec.body, 50, rng)
    mn, residual, _ = lemma31_residual(spec, 0.0, 0.0, pts)
    assert np.max(np.abs(residual)) == 0.0


def test_grushin_matches_fd_on_random_product_trials(rng):
    line = AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]])
    spec = ProblemSpec(3, line, 2.0, WeightParams(0.5, 1.0))
    trial = ProductTrial(smooth_cutoff(2.0, 4.0), power_sigma(0.5, 50.0, smooth_cutoff(1.0, 2.0)))
    checked = 0
    while checked < 10:
        x = rng.normal(scale=1.5, size=3)
        from hardyrellich.geometry import distance

        s = distance(line, x)
        if not 0.15 < s < 1.8:
            continue
        hg = weighted_operator_apply(spec, trial, x)
        hf = weighted_operator_apply(spec, trial, x, method="fd")
        assert hg == pytest.approx(hf, rel=1e-4, abs=1e-8)
        checked += 1


# ---------------------------------------------------------------------------
# second-order quotients


def test_rellich_point_family_decreasing_above_bound():
    spec = point_spec(5)
    C2_sq = rellich_constants(spec).C_p ** 2
    prev = None
    for n in (1e2, 1e3):
        trial = RadialDistanceTrial(power_sigma(0.5, n, log_cutoff(1.0, 6.0)))
        q = rellich_quotient(spec, trial)
        assert q.quotient >= C2_sq * (1.0 - 1e-6)
        if prev is not None:
            assert q.quotient < prev
        prev = q.quotient


def test_rellich_scaling_invariance():
    spec = point_spec(5)
    trial = RadialDistanceTrial(power_sigma(0.5, 100.0, smooth_cutoff(1.0, 2.0)))
    q1 = rellich_quotient(spec, trial).quotient
    q2 = rellich_quotient(spec, trial.scaled(-3.0)).quotient
    assert q1 == pytest.approx(q2, rel=1e-12)


def test_rellich_random_trials_weighted(rng):
    spec = ProblemSpec(7, SinglePoint([0.0] * 7), 2.0, WeightParams(1.0, 1.0))
    bound = rellich_constants(spec).C_p ** 2
    for trial in rellich_trials_for(spec, rng, 20):
        q = rellich_quotient(spec, trial)
        assert q.quotient >= bound * (1.0 - 1e-5)


def test_rellich_rejects_kinked_trials():
    spec = point_spec(5)
    with pytest.raises(ValueError):
        rellich_quotient(spec, RadialDistanceTrial(chi_n(100.0)))


def test_rellich_product_route_against_mc():
    line = AffineSubspace([0.0] * 4, [[1.0, 0.0, 0.0, 0.0]])
    spec = ProblemSpec(4, line, 2.0, WeightParams())
    trial = ProductTrial(smooth_cutoff(3.0, 6.0), power_sigma(0.5, 50.0, smooth_cutoff(1.0, 2.0)))
    qt = rellich_quotient(spec, trial)
    qm = rellich_quotient(spec, trial, QuadratureSpec(method="monte-carlo", seed=9, max_evals=2_000_000))
    assert abs(qm.quotient - qt.quotient) <= 4.0 * (qm.error + qt.error) + 5e-3 * qt.quotient
    assert qt.quotient >= rellich_constants(spec).C_p ** 2 * (1.0 - 1e-6)


# ---------------------------------------------------------------------------
# the first-order split bound


def test_split_bound_boundary_case_and_limit():
    line = AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]])
    spec = ProblemSpec(3, line, 2.0, WeightParams())
    trial = ProductTrial(smooth_cutoff(5.0, 10.0), chi_n(1e4))
    sb = hardy_split_bound(spec, trial, beta=2.0, lam=0.1)
    assert sb.first_term == 0.0  # (beta + delta - p)/p = 0
    assert sb.bound == pytest.approx(10.0 * sb.ratio)
    small = hardy_split_bound(
        spec, ProductTrial(smooth_cutoff(5.0, 10.0), chi_n(1e2)), beta=2.0, lam=0.1
    )
    assert sb.ratio < small.ratio  # divergent denominator keeps taming the ratio


def test_split_bound_lambda_limit_first_term():
    line = AffineSubspace([0.0] * 4, [[1.0, 0.0, 0.0, 0.0]])
    spec = ProblemSpec(4, line, 2.0, WeightParams())
    trial = ProductTrial(smooth_cutoff(5.0, 10.0), chi_n(1e3))
    target = abs((3.0 + 0.0 - 2.0) / 2.0) ** 2  # -> 1/4 as lambda -> 0
    for lam in (1e-2, 1e-4, 1e-6):
        sb = hardy_split_bound(spec, trial, beta=3.0, lam=lam)
        if lam <= 1e-6:
            break
    assert sb.first_term == pytest.approx(target / (1.0 - 1e-6), rel=1e-5)
    # the split bound is a genuine upper bound for the optimal constant (= 1/4 here)
    assert sb.bound >= 0.25 - 1e-9


def test_split_bound_ratio_decay():
    # log-tent normal profiles compressed into (0, 1]: both ramp energies decay
    # like 1/log n while the weighted mass diverges, so the ratio drops ~1/L^2
    line = AffineSubspace([0.0] * 4, [[1.0, 0.0, 0.0, 0.0]])
    spec = ProblemSpec(4, line, 2.0, WeightParams())

    def ratio(n):
        s1 = n**-0.5
        from hardyrellich.profiles import log_ramp

        tent = log_ramp(math.sqrt(n)).rescaled(s1) * log_cutoff(s1, 0.5 * math.log(n))
        trial = ProductTrial(smooth_cutoff(8.0, 16.0), tent)
        return hardy_split_bound(spec, trial, beta=3.0, lam=0.5).ratio

    assert ratio(1e4) < ratio(1e2) / 2.0


def test_split_bound_requires_pure_power():
    line = AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]])
    spec = ProblemSpec(3, line, 2.0, WeightParams(0.0, 1.0))
    trial = ProductTrial(smooth_cutoff(2.0, 4.0), chi_n(10.0))
    with pytest.raises(ValueError):
        hardy_split_bound(spec, trial, beta=2.0, lam=0.5)


# ---------------------------------------------------------------------------
# plateau cutoff decay


def test_plateau_quotient_decays_inversely():
    q10 = plateau_cutoff_quotient(10.0, 2.0)
    q100 = plateau_cutoff_quotient(100.0, 2.0)
    slope = math.log(q100 / q10) / math.log(10.0)
    assert slope == pytest.approx(-1.0, abs=0.1)
