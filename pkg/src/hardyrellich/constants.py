"""Closed-form constants and validity conditions for the weighted inequalities.

All formulas are rational functions of (d, d_H, p, delta, delta'); they are
evaluated in exact Fraction arithmetic on the binary-rational inputs and only
converted to float at the end, so algebraically identical routes produce
bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .geometry import ConvexBody, body_from_json, boundary_dimension
from .weights import WeightParams

__all__ = [
    "ProblemSpec",
    "HardyConstant",
    "RellichConstants",
    "OptimalityStatus",
    "ConstantsReport",
    "hardy_constant",
    "hardy_constant_convex",
    "rellich_exponents",
    "b_alpha",
    "rellich_constants",
    "rellich_constant_mixed_zero",
    "rellich_l2_constant",
    "optimal_hardy_case",
    "optimal_rellich_case",
    "constants_report",
]


def _fr(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(eq=False)
class ProblemSpec:
    """One experiment: ambient dimension, obstacle K, exponent p, weight."""

    d: int
    body: ConvexBody
    p: float
    weights: WeightParams

    def __post_init__(self):
        self.d = int(self.d)
        if self.body.d != self.d:
            raise ValueError("body dimension does not match ambient dimension")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.body.body_dim == self.d and self.d < 1:
            raise ValueError("ambient dimension must be >= 1")

    @cached_property
    def k(self) -> int:
        return self.body.body_dim

    @cached_property
    def d_H(self) -> int:
        return boundary_dimension(self.body)

    @cached_property
    def k_inf(self) -> int:
        return self.body.recession_dim

    @property
    def q(self) -> float:
        """Conjugate exponent p/(p-1)."""
        if self.p == 1:
            return float("inf")
        return self.p / (self.p - 1.0)

    def to_json(self):
        return {
            "d": self.d,
            "body": self.body.to_json(),
            "p": self.p,
            "weights": self.weights.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "ProblemSpec":
        return cls(
            d=int(obj["d"]),
            body=body_from_json(obj["body"]),
            p=float(obj["p"]),
            weights=WeightParams.from_json(obj["weights"]),
        )


@dataclass(frozen=True)
class HardyConstant:
    a_p: float
    a_p_pow_p: float
    b_p: float  # unnormalized constant d - d_H + (delta ^ delta') - p
    valid: bool


def _hardy_frac(d, d_H, p, delta, delta_prime):
    wedge = min(_fr(delta), _fr(delta_prime))
    b_p = _fr(d) - _fr(d_H) + wedge - _fr(p)
    a_p = b_p / _fr(p)
    return a_p, b_p


def hardy_constant(spec: ProblemSpec) -> HardyConstant:
    """a_p = (d - d_H + min(delta, delta') - p)/p; valid iff a_p > 0."""
    a_p, b_p = _hardy_frac(spec.d, spec.d_H, spec.p, spec.weights.delta, spec.weights.delta_prime)
    return HardyConstant(
        a_p=float(a_p),
        a_p_pow_p=float(a_p) ** spec.p if a_p > 0 else float("nan"),
        b_p=float(b_p),
        valid=a_p > 0,
    )


def hardy_constant_convex(spec_or_p, delta=None, delta_prime=None):
    """Constant ((p - 1 - max(delta, delta'))/p)^p for the convex-domain variant.

    Accepts either a ProblemSpec or explicit (p, delta, delta').  Valid iff
    p - 1 - max(delta, delta') > 0.
    """
    if isinstance(spec_or_p, ProblemSpec):
        p = spec_or_p.p
        delta = spec_or_p.weights.delta
        delta_prime = spec_or_p.weights.delta_prime
    else:
        p = spec_or_p
    vee = max(_fr(delta), _fr(delta_prime))
    base = (_fr(p) - 1 - vee) / _fr(p)
    valid = base > 0
    value = float(base) ** float(p) if valid else float("nan")
    return value, bool(valid)


def rellich_exponents(spec: ProblemSpec):
    """alpha_p = (2 - delta)(p - 1) and alpha'_p = (2 - delta')(p - 1)."""
    w = spec.weights
    if w.delta >= 2 or w.delta_prime >= 2:
        raise ValueError("delta out of [0,2)")
    p = _fr(spec.p)
    return float((2 - _fr(w.delta)) * (p - 1)), float((2 - _fr(w.delta_prime)) * (p - 1))


def b_alpha(spec: ProblemSpec, alpha: float, alpha_prime: float) -> float:
    """(d - d_H + min(delta, delta')) min(a, a') - max(a, a')(max(a, a') + 2)."""
    if alpha < 0 or alpha_prime < 0:
        raise ValueError("alpha exponents must be nonnegative")
    w = spec.weights
    wedge = min(_fr(w.delta), _fr(w.delta_prime))
    lo = min(_fr(alpha), _fr(alpha_prime))
    hi = max(_fr(alpha), _fr(alpha_prime))
    return float((_fr(spec.d) - _fr(spec.d_H) + wedge) * lo - hi * (hi + 2))


@dataclass(frozen=True)
class RellichConstants:
    alpha_p: float
    alpha_prime_p: float
    b_alpha_p: float
    gamma_p: float
    c_p: float
    C_p: float
    valid: bool


def _rellich_frac(d, d_H, p, delta, delta_prime):
    d, d_H, p = _fr(d), _fr(d_H), _fr(p)
    delta, delta_prime = _fr(delta), _fr(delta_prime)
    wedge, vee = min(delta, delta_prime), max(delta, delta_prime)

    alpha = (2 - delta) * (p - 1)
    alpha_prime = (2 - delta_prime) * (p - 1)
    a_lo, a_hi = min(alpha, alpha_prime), max(alpha, alpha_prime)
    b_ap = (d - d_H + wedge) * a_lo - a_hi * (a_hi + 2)
    gamma = b_ap / (a_hi * a_hi) if a_hi > 0 else Fraction(0)
    c_p = (p + gamma * (p - 1)) * b_ap / (p * p)
    C_p = (p - 1) * (d - d_H) * (d - d_H + p * wedge - 2 * p) / (p * p)
    # validity: d - d_H + p (delta ^ delta') - 2p >= 2p|delta - delta'|/(2 - delta v delta'),
    # plus b_{alpha_p} > 0 so the conclusion is not vacuous (at boundary equality
    # the profile lower bound can degenerate to zero)
    lhs = d - d_H + p * wedge - 2 * p
    rhs = 2 * p * abs(delta - delta_prime) / (2 - vee)
    valid = lhs >= rhs and b_ap > 0
    return alpha, alpha_prime, b_ap, gamma, c_p, C_p, valid


def rellich_constants(spec: ProblemSpec) -> RellichConstants:
    """Constant chain alpha_p -> b_{alpha_p} -> gamma_p -> c_p, plus C_p and validity."""
    w = spec.weights
    if w.delta >= 2 or w.delta_prime >= 2:
        raise ValueError("delta out of [0,2)")
    if spec.p <= 1:
        raise ValueError("the second-order inequality needs p > 1")
    alpha, alpha_prime, b_ap, gamma, c_p, C_p, valid = _rellich_frac(
        spec.d, spec.d_H, spec.p, w.delta, w.delta_prime
    )
    return RellichConstants(
        alpha_p=float(alpha),
        alpha_prime_p=float(alpha_prime),
        b_alpha_p=float(b_ap),
        gamma_p=float(gamma),
        c_p=float(c_p),
        C_p=float(C_p),
        valid=bool(valid),
    )


def rellich_constant_mixed_zero(spec: ProblemSpec, delta=None) -> float:
    """c_p(delta, 0) = (p-1)(d-d_H)((d-d_H)(1-delta/2) - 2p)(1-delta/2)/p^2."""
    if delta is None:
        delta = spec.weights.delta
    if not 0 <= delta < 2:
        raise ValueError("delta out of [0,2)")
    d, d_H, p, delta = _fr(spec.d), _fr(spec.d_H), _fr(spec.p), _fr(delta)
    m = d - d_H
    half = 1 - delta / 2
    return float((p - 1) * m * (m * half - 2 * p) * half / (p * p))


def rellich_l2_constant(spec: ProblemSpec):
    """p = 2 constant by two routes: (a_2^2 - nu)^2 and C_2^2.

    nu = (1 - min(delta, delta')/2)^2; a_2 = (d - d_H + min(delta,delta') - 2)/2.
    Returns (via_a2_nu, via_C2_sq, valid) where valid is the condition
    d - d_H + 2 min(delta, delta') - 4 > 0.
    """
    if spec.p != 2:
        raise ValueError("this constant is specific to p = 2")
    d, d_H = _fr(spec.d), _fr(spec.d_H)
    wedge = min(_fr(spec.weights.delta), _fr(spec.weights.delta_prime))
    a2 = (d - d_H + wedge - 2) / 2
    nu = (1 - wedge / 2) ** 2
    via_anu = (a2 * a2 - nu) ** 2
    C2 = (d - d_H) * (d - d_H + 2 * wedge - 4) / 4
    valid = d - d_H + 2 * wedge - 4 > 0
    return float(via_anu), float(C2 * C2), bool(valid)


@dataclass(frozen=True)
class OptimalityStatus:
    """Known status of an optimal constant: exact value, two-sided bracket, or unknown."""

    kind: str  # "exact" | "bracket" | "unknown"
    value: float | None = None
    lower: float | None = None
    upper: float | None = None
    theorem: str | None = None

    def to_json(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "theorem": self.theorem,
        }


def _pow(base: Fraction, p: float) -> float:
    return float(base) ** float(p)


def optimal_hardy_case(spec: ProblemSpec) -> OptimalityStatus:
    """Case analysis for the optimal first-order constant mu_p."""
    w = spec.weights
    a_p, _ = _hardy_frac(spec.d, spec.d_H, spec.p, w.delta, w.delta_prime)
    if a_p <= 0:
        return OptimalityStatus(kind="unknown", theorem=None)
    lower = _pow(a_p, spec.p)
    k = spec.k
    if k == 0:
        return OptimalityStatus(kind="exact", value=lower, theorem="Prop4.1")
    local = (_fr(spec.d) - _fr(spec.d_H) + _fr(w.delta) - _fr(spec.p)) / _fr(spec.p)
    if 1 <= k <= spec.d - 1:
        upper = _pow(local, spec.p) if local > 0 else 0.0
        if w.delta <= w.delta_prime:
            return OptimalityStatus(kind="exact", value=upper, theorem="Thm4.2")
        if spec.k_inf == k:
            return OptimalityStatus(kind="exact", value=lower, theorem="Thm4.5")
        return OptimalityStatus(kind="bracket", lower=lower, upper=upper, theorem="Thm1.1+Thm4.2")
    # full-dimensional K: no matching upper bound is known
    return OptimalityStatus(kind="bracket", lower=lower, upper=None, theorem="Thm1.1")


def optimal_rellich_case(spec: ProblemSpec) -> OptimalityStatus:
    """Case analysis for the optimal second-order constant nu_p."""
    w = spec.weights
    rc = rellich_constants(spec)
    d, d_H, p = _fr(spec.d), _fr(spec.d_H), _fr(spec.p)
    wedge = min(_fr(w.delta), _fr(w.delta_prime))
    k = spec.k

    exact_shape = k == 0 or (1 <= k <= spec.d - 1 and spec.k_inf == k)
    if rc.valid and w.delta == w.delta_prime and exact_shape:
        tag = "Prop4.2" if k == 0 else "Thm4.8"
        return OptimalityStatus(kind="exact", value=rc.C_p ** spec.p, theorem=tag)

    # the p = 2 route stands on its own condition, independent of the chain's
    if spec.p == 2 and d - d_H + 2 * wedge - 4 > 0:
        C2 = (d - d_H) * (d - d_H + 2 * wedge - 4) / 4
        return OptimalityStatus(kind="exact", value=_pow(C2 * C2, 1.0), theorem="Prop4.6")

    if not rc.valid:
        return OptimalityStatus(kind="unknown", theorem=None)

    uppers = []
    tags = []
    if k == 0:
        base = (p - 1) * d * (d + p * wedge - 2 * p) / (p * p)
        uppers.append(_pow(base, spec.p))
        tags.append("Rem4.3")
    elif k <= spec.d - 1:
        m = d - _fr(k)
        local = (p - 1) * m * (m + p * _fr(w.delta) - 2 * p) / (p * p)
        if local > 0:
            uppers.append(_pow(local, spec.p))
            tags.append("Thm4.8-local")
        if spec.k_inf == k:
            glob = (p - 1) * m * (m + p * wedge - 2 * p) / (p * p)
            uppers.append(_pow(glob, spec.p))
            tags.append("Thm4.8-global")
    lower = rc.c_p ** spec.p if rc.c_p > 0 else 0.0
    if uppers:
        best = min(uppers)
        tag = tags[int(np.argmin(uppers))]
        return OptimalityStatus(kind="bracket", lower=lower, upper=best, theorem="Thm1.2+" + tag)
    return OptimalityStatus(kind="bracket", lower=lower, upper=None, theorem="Thm1.2")


@dataclass
class ConstantsReport:
    spec: dict
    geometry: dict
    hardy_a_p: float
    hardy_b_p: float
    hardy_valid: bool
    hardy_a_p_pow_p: float
    hardy_convex_constant: float
    hardy_convex_valid: bool
    rellich_alpha_p: float | None
    rellich_alpha_prime_p: float | None
    rellich_b_alpha_p: float | None
    rellich_gamma_p: float | None
    rellich_c_p: float | None
    rellich_C_p: float | None
    rellich_valid: bool
    mu_p_status: OptimalityStatus
    nu_p_status: OptimalityStatus | None

    def to_json(self):
        out = {
            "schema_version": 1,
            "spec": self.spec,
            "geometry": self.geometry,
            "hardy": {
                "a_p": self.hardy_a_p,
                "b_p": self.hardy_b_p,
                "a_p_pow_p": self.hardy_a_p_pow_p,
                "valid": self.hardy_valid,
                "convex_domain_constant": self.hardy_convex_constant,
                "convex_domain_valid": self.hardy_convex_valid,
            },
            "rellich": {
                "alpha_p": self.rellich_alpha_p,
                "alpha_prime_p": self.rellich_alpha_prime_p,
                "b_alpha_p": self.rellich_b_alpha_p,
                "gamma_p": self.rellich_gamma_p,
                "c_p": self.rellich_c_p,
                "C_p": self.rellich_C_p,
                "valid": self.rellich_valid,
            },
            "mu_p": self.mu_p_status.to_json(),
            "nu_p": self.nu_p_status.to_json() if self.nu_p_status else None,
        }
        return out


def constants_report(spec: ProblemSpec) -> ConstantsReport:
    """Evaluate every closed-form constant for a spec, with optimality case tags."""
    hc = hardy_constant(spec)
    a_pow = float(hc.a_p) ** spec.p if hc.valid else float("nan")
    convex_val, convex_ok = hardy_constant_convex(spec)
    w = spec.weights
    rell = None
    if spec.p > 1 and w.delta < 2 and w.delta_prime < 2:
        rell = rellich_constants(spec)
    nu_status = None
    if rell is not None:
        nu_status = optimal_rellich_case(spec)
    return ConstantsReport(
        spec=spec.to_json(),
        geometry={"d": spec.d, "k": spec.k, "d_H": spec.d_H, "k_inf": spec.k_inf},
        hardy_a_p=hc.a_p,
        hardy_b_p=hc.b_p,
        hardy_valid=hc.valid,
        hardy_a_p_pow_p=a_pow,
        hardy_convex_constant=convex_val,
        hardy_convex_valid=convex_ok,
        rellich_alpha_p=rell.alpha_p if rell else None,
        rellich_alpha_prime_p=rell.alpha_prime_p if rell else None,
        rellich_b_alpha_p=rell.b_alpha_p if rell else None,
        rellich_gamma_p=rell.gamma_p if rell else None,
        rellich_c_p=rell.c_p if rell else None,
        rellich_C_p=rell.C_p if rell else None,
        rellich_valid=rell.valid if rell else False,
        mu_p_status=optimal_hardy_case(spec),
        nu_p_status=nu_status,
    )
