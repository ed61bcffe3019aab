"""Seeded generators of valid specs and admissible trials for the sweep suites."""

from __future__ import annotations

import numpy as np

from .constants import ProblemSpec, hardy_constant, rellich_constants
from .geometry import AffineSubspace, Ball, Box, Halfspace, SinglePoint, VPolytope
from .profiles import chi_n, log_cutoff, power_profile, sigma_profile, smooth_cutoff
from .trials import ProductTrial, RadialDistanceTrial
from .weights import WeightParams

__all__ = [
    "HARDY_BODY_KINDS",
    "RELLICH_BODY_KINDS",
    "random_hardy_spec",
    "random_rellich_spec",
    "hardy_trials_for",
    "rellich_trials_for",
    "trial_id",
]

HARDY_BODY_KINDS = ("point", "line", "segment", "halfspace", "ball", "box")
RELLICH_BODY_KINDS = ("point", "ball", "line")

_MARGIN = 0.1  # validity margin kept between the condition and its boundary


def _unit(rng, d):
    v = rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_hardy_spec(rng, kind: str | None = None) -> ProblemSpec:
    """A random spec with the first-order validity condition satisfied with margin."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    kind = kind or HARDY_BODY_KINDS[rng.integers(len(HARDY_BODY_KINDS))]
    if kind == "point":
        d = int(rng.integers(2, 7))
        body = SinglePoint(rng.normal(size=d))
        codim = d
    elif kind == "line":
        d = int(rng.integers(3, 6))
        k = int(rng.integers(1, d - 1)) if d > 3 else 1
        basis = np.linalg.qr(rng.normal(size=(d, k)))[0].T
        body = AffineSubspace(rng.normal(size=d), basis)
        codim = d - k
    elif kind == "segment":
        d = int(rng.integers(2, 5))
        a = rng.normal(size=d)
        body = VPolytope(np.vstack([a, a + 2.0 * _unit(rng, d)]))
        codim = d - 1
    elif kind == "halfspace":
        d = int(rng.integers(2, 5))
        body = Halfspace(_unit(rng, d), float(rng.normal()))
        codim = 1
    elif kind == "ball":
        d = int(rng.integers(2, 5))
        body = Ball(rng.normal(size=d), float(rng.uniform(0.5, 2.0)))
        codim = 1
    elif kind == "box":
        d = int(rng.integers(2, 5))
        lo = rng.normal(size=d)
        body = Box(lo, lo + rng.uniform(0.5, 2.0, size=d))
        codim = 1
    else:
        raise ValueError(f"unknown body kind {kind!r}")

    # choose (p, delta, delta') with codim + min(delta, delta') - p >= margin
    if codim >= 2:
        p = float(rng.uniform(1.1, min(3.0, codim - _MARGIN)))
        extra = rng.uniform(0.0, 2.0)
    else:
        p = float(rng.uniform(1.05, 2.2))
        extra = p - 1.0 + rng.uniform(_MARGIN, 1.5)
    wedge = max(0.0, p - codim + _MARGIN) + extra * rng.uniform(0.0, 1.0) if codim >= 2 else extra
    spread = rng.uniform(0.0, 1.0)
    if rng.uniform() < 0.5:
        delta, delta_prime = wedge, wedge + spread
    else:
        delta, delta_prime = wedge + spread, wedge
    a = float(rng.uniform(0.5, 2.0)) if rng.uniform() < 0.3 else 1.0
    b = float(rng.uniform(0.5, 2.0)) if rng.uniform() < 0.3 else 1.0
    spec = ProblemSpec(d, body, p, WeightParams(float(delta), float(delta_prime), a, b))
    assert hardy_constant(spec).valid, "generator produced an invalid spec"
    return spec


def random_rellich_spec(rng, kind: str | None = None) -> ProblemSpec:
    """A random pure-power-weight spec with the second-order condition satisfied."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    kind = kind or RELLICH_BODY_KINDS[rng.integers(len(RELLICH_BODY_KINDS))]
    if kind == "point":
        d = int(rng.integers(3, 8))
        body = SinglePoint(rng.normal(size=d))
        codim = d
    elif kind == "ball":
        d = int(rng.integers(2, 5))
        body = Ball(rng.normal(size=d), float(rng.uniform(0.5, 2.0)))
        codim = 1
    elif kind == "line":
        d = int(rng.integers(4, 7))
        k = int(rng.integers(1, d - 2))
        basis = np.linalg.qr(rng.normal(size=(d, k)))[0].T
        body = AffineSubspace(rng.normal(size=d), basis)
        codim = d - k
    else:
        raise ValueError(f"unknown body kind {kind!r}")

    # need codim + p delta - 2p >= margin with delta in [0, 2)
    if codim > 4:
        p = float(rng.uniform(1.2, (codim - _MARGIN) / 2.0))
        delta = float(rng.uniform(0.0, 1.9)) if rng.uniform() < 0.5 else 0.0
    else:
        delta = float(rng.uniform(1.2, 1.9))
        p_max = (codim - _MARGIN) / (2.0 - delta)
        if p_max <= 1.05:
            delta = 1.9
            p_max = (codim - _MARGIN) / 0.1
        p = float(rng.uniform(1.05, min(p_max, 3.0)))
    if codim + p * delta - 2 * p < _MARGIN:
        delta = min(1.95, (2 * p - codim + _MARGIN) / p)
    spec = ProblemSpec(d, body, p, WeightParams(delta, delta))
    assert rellich_constants(spec).valid, "generator produced an invalid spec"
    return spec


def _random_cutoff(rng):
    if rng.uniform() < 0.5:
        r0 = float(rng.uniform(0.5, 1.5))
        return smooth_cutoff(r0, r0 * float(rng.uniform(1.5, 3.0)))
    return log_cutoff(float(rng.uniform(0.5, 1.5)), float(rng.uniform(2.0, 6.0)))


def _bump_for(rng):
    rho = float(rng.uniform(3.0, 20.0))
    return smooth_cutoff(rho, rho * float(rng.uniform(1.5, 2.5)))


def hardy_trials_for(spec: ProblemSpec, rng, count: int = 1):
    """Admissible first-order trials for the body structure of the spec."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    w = spec.weights
    threshold = (spec.d - spec.d_H + min(w.delta, w.delta_prime) - spec.p) / spec.p
    trials = []
    for _ in range(count):
        n = float(10.0 ** rng.uniform(1.3, 4.0))
        cutoff = _random_cutoff(rng)
        style = rng.integers(3)
        if style == 0:
            profile = chi_n(n, cutoff)
        elif style == 1:
            alpha = float(rng.uniform(0.2, 1.0)) * max(threshold, 0.2)
            profile = power_profile(alpha) * chi_n(n, cutoff)
        else:
            alpha = float(rng.uniform(0.2, 1.0)) * max(threshold, 0.2)
            profile = power_profile(alpha) * sigma_profile(n, cutoff)
        profile.meta["n"] = n
        if isinstance(spec.body, (AffineSubspace, Halfspace)):
            trials.append(ProductTrial(_bump_for(rng), profile))
        else:
            trials.append(RadialDistanceTrial(profile))
    return trials


def rellich_trials_for(spec: ProblemSpec, rng, count: int = 1):
    """Admissible second-order trials: C1 ramps with piecewise second derivatives."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    w = spec.weights
    threshold = (spec.d - spec.d_H + spec.p * min(w.delta, w.delta_prime) - 2 * spec.p) / spec.p
    trials = []
    for _ in range(count):
        n = float(10.0 ** rng.uniform(1.3, 4.0))
        cutoff = _random_cutoff(rng)
        if rng.uniform() < 0.4:
            profile = sigma_profile(n, cutoff)
        else:
            alpha = float(rng.uniform(0.2, 1.0)) * max(threshold, 0.2)
            profile = power_profile(alpha) * sigma_profile(n, cutoff)
        profile.meta["n"] = n
        if isinstance(spec.body, (AffineSubspace, Halfspace)):
            trials.append(ProductTrial(_bump_for(rng), profile))
        else:
            trials.append(RadialDistanceTrial(profile))
    return trials


def trial_id(trial) -> str:
    if isinstance(trial, ProductTrial):
        return f"product[{trial.bump.name}|{trial.chi.name}]"
    return f"radial[{trial.profile.name}]"
