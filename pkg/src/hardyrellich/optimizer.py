"""Derivative-free minimization over trial families, sweeps in n, and brackets.

The sweep families use a threshold-power core times a log ramp times a
log-wide plateau cutoff; their quotients approach the optimal constant like
C/log(n), which fixes the extrapolation model q(n) = q_inf + A (log n)^-(p-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    OptimalityStatus,
    ProblemSpec,
    hardy_constant,
    optimal_hardy_case,
    optimal_rellich_case,
    rellich_constants,
)
from .functionals import QuadratureSpec, hardy_quotient, rellich_quotient
from .geometry import AffineSubspace, Halfspace
from .profiles import Profile1D, chi_n, log_cutoff, power_profile, sigma_profile, smooth_cutoff
from .trials import PowerLocalizedTrial, ProductTrial, RadialDistanceTrial

__all__ = [
    "golden_section",
    "AlphaMinimum",
    "minimize_alpha",
    "SweepResult",
    "sequence_sweep",
    "hardy_sweep_trial",
    "rellich_sweep_trial",
    "Bracket",
    "bracket_mu",
    "bracket_nu",
    "DEFAULT_N_LIST",
]

DEFAULT_N_LIST = (1e2, 1e3, 1e4, 1e5)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo: float, hi: float, tol: float = 1e-5, max_iter: int = 200):
    """Golden-section minimum of a unimodal f on [lo, hi]; returns (x, f(x), nev)."""
    if hi <= lo:
        return lo, f(lo), 1
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    nev = 2
    for _ in range(max_iter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        nev += 1
    x = 0.5 * (a + b)
    return x, min(fc, fd), nev


# ---------------------------------------------------------------------------
# sweep trial families


def _hardy_threshold_alpha(spec: ProblemSpec) -> float:
    w = spec.weights
    return (spec.d - spec.d_H + min(w.delta, w.delta_prime) - spec.p) / spec.p


def _rellich_threshold_alpha(spec: ProblemSpec) -> float:
    w = spec.weights
    return (spec.d - spec.d_H + spec.p * min(w.delta, w.delta_prime) - 2.0 * spec.p) / spec.p


def _cap_n(n: float, alpha: float, p: float, order: int, stretch: float = 1.0) -> float:
    """Cap the ramp parameter so profile powers stay inside double range.

    stretch > 1 accounts for support compression beyond 1/n (scaled cutoffs).
    """
    exponent = p * (alpha + order) * stretch
    if exponent <= 0:
        return n
    return min(n, 10.0 ** (260.0 / exponent))


def _default_bump(spec: ProblemSpec, eta_plateau: float, eta_width: float) -> Profile1D:
    return smooth_cutoff(eta_plateau, eta_plateau + eta_width)


def _sweep_profile(spec, n, core, cutoff_log_width, cutoff_scale, alpha, product):
    """Assemble power-core times ramp times cutoff, with optional width scaling.

    For product bodies the tail must not inflate the normal-factor mass that
    multiplies the tangential-gradient term: fixed widths are capped at 2 and
    scaled-width profiles are compressed back into (0, 1].
    """
    if cutoff_scale is not None:
        width = max(2.0, cutoff_scale * math.log(n))
    else:
        width = min(cutoff_log_width, 2.0) if product else cutoff_log_width
    profile = power_profile(alpha) * core(n, log_cutoff(1.0, width))
    if product and cutoff_scale is not None and width > 2.0:
        profile = profile.rescaled(math.exp(-width))
    profile.meta.update({"alpha": alpha, "n": n})
    return profile


def hardy_sweep_trial(
    spec: ProblemSpec,
    n: float,
    cutoff_log_width: float = 6.0,
    alpha: float | None = None,
    eta_plateau: float = 20.0,
    eta_width: float = 20.0,
    cutoff_scale: float | None = None,
):
    """Sweep trial for the first-order quotient, adapted to the body structure.

    cutoff_scale, when given, makes the tail log-width grow like
    cutoff_scale * log n, which keeps the quotient's correction law inside the
    extrapolation model for every p (the fixed-width tail contributes a 1/log n
    term that the (log n)^-(p-1) model only captures at p = 2).
    """
    if alpha is None:
        alpha = _hardy_threshold_alpha(spec)
    stretch = 1.0 + (cutoff_scale or 0.0)
    n = _cap_n(n, alpha, spec.p, 1, stretch)
    product = isinstance(spec.body, (AffineSubspace, Halfspace))
    profile = _sweep_profile(spec, n, chi_n, cutoff_log_width, cutoff_scale, alpha, product)
    if product:
        return ProductTrial(_default_bump(spec, eta_plateau, eta_width), profile)
    return RadialDistanceTrial(profile)


def rellich_sweep_trial(
    spec: ProblemSpec,
    n: float,
    cutoff_log_width: float = 6.0,
    alpha: float | None = None,
    eta_plateau: float = 20.0,
    eta_width: float = 20.0,
    cutoff_scale: float | None = None,
):
    """Sweep trial for the second-order quotient (C1 ramp, usable under H)."""
    if alpha is None:
        alpha = _rellich_threshold_alpha(spec)
    stretch = 1.0 + (cutoff_scale or 0.0)
    n = _cap_n(n, alpha, spec.p, 2, stretch)
    product = isinstance(spec.body, (AffineSubspace, Halfspace))
    profile = _sweep_profile(spec, n, sigma_profile, cutoff_log_width, cutoff_scale, alpha, product)
    if product:
        return ProductTrial(_default_bump(spec, eta_plateau, eta_width), profile)
    return RadialDistanceTrial(profile)


# ---------------------------------------------------------------------------
# sweeps and the log-law extrapolation


@dataclass
class SweepResult:
    parameter: list
    quotients: list
    errors: list
    q_inf: float
    amplitude: float
    fit_residual: float
    model: str
    heuristic: bool
    lower_bound: float | None

    def to_json(self):
        return {
            "parameter": list(self.parameter),
            "quotients": list(self.quotients),
            "errors": list(self.errors),
            "q_inf": self.q_inf,
            "amplitude": self.amplitude,
            "fit_residual": self.fit_residual,
            "model": self.model,
            "heuristic": self.heuristic,
            "lower_bound": self.lower_bound,
        }


def _fit_log_law(ns, qs, p):
    x = np.array([math.log(n) ** (1.0 - p) for n in ns])
    y = np.asarray(qs, dtype=float)
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), resid


def sequence_sweep(
    spec: ProblemSpec,
    which: str = "hardy",
    n_list=DEFAULT_N_LIST,
    quadspec: QuadratureSpec | None = None,
    cutoff_log_width: float = 6.0,
    eta_plateau: float = 20.0,
    eta_width: float = 20.0,
    cutoff_scale: float | None = None,
) -> SweepResult:
    """Quotients of the sweep family over n_list with the log-law extrapolation."""
    if len(n_list) < 3:
        raise ValueError("a sweep needs at least three ramp parameters")
    if spec.p <= 1:
        raise ValueError("the extrapolation model needs p > 1")
    quadspec = quadspec or QuadratureSpec()
    qs, errs, ns_used = [], [], []
    lower = None
    for n in n_list:
        if which == "hardy":
            trial = hardy_sweep_trial(
                spec, n, cutoff_log_width, eta_plateau=eta_plateau,
                eta_width=eta_width, cutoff_scale=cutoff_scale,
            )
            res = hardy_quotient(spec, trial, quadspec)
            hc = hardy_constant(spec)
            lower = hc.a_p_pow_p if hc.valid else None
        elif which == "rellich":
            trial = rellich_sweep_trial(
                spec, n, cutoff_log_width, eta_plateau=eta_plateau,
                eta_width=eta_width, cutoff_scale=cutoff_scale,
            )
            res = rellich_quotient(spec, trial, quadspec)
            rc = rellich_constants(spec)
            lower = rc.c_p ** spec.p if rc.valid else None
        else:
            raise ValueError("which must be 'hardy' or 'rellich'")
        n_used = trial.profile.meta.get("n", n) if hasattr(trial, "profile") else trial.chi.meta.get("n", n)
        ns_used.append(n_used)
        qs.append(res.quotient)
        errs.append(res.error)
    q_inf, amp, resid = _fit_log_law(ns_used, qs, spec.p)
    return SweepResult(
        parameter=ns_used,
        quotients=qs,
        errors=errs,
        q_inf=q_inf,
        amplitude=amp,
        fit_residual=resid,
        model="q_inf + A (log n)^-(p-1)",
        heuristic=(which == "rellich"),
        lower_bound=lower,
    )


# ---------------------------------------------------------------------------
# 1-D exponent minimization


@dataclass
class AlphaMinimum:
    alpha: float
    quotient: float
    neval: int
    starts: list
    starts_agree: bool


def minimize_alpha(
    spec: ProblemSpec,
    bracket: tuple,
    localizer: Profile1D | None = None,
    quadspec: QuadratureSpec | None = None,
    n_starts: int = 3,
    seed: int = 0,
    tol: float = 1e-4,
) -> AlphaMinimum:
    """Golden-section minimum of the first-order quotient over the power exponent.

    The power-localized family keeps a fixed localizer; unimodality is assumed
    and cross-checked by restarting from randomly shrunk brackets.
    """
    a_lo, a_hi = bracket
    if a_hi < a_lo:
        raise ValueError("bracket must be ordered")
    quadspec = quadspec or QuadratureSpec()
    localizer = localizer if localizer is not None else chi_n(1e4, log_cutoff(1.0, 6.0))

    def q_of_alpha(alpha):
        trial = PowerLocalizedTrial(alpha, localizer)
        return hardy_quotient(spec, trial, quadspec).quotient

    if a_hi == a_lo:
        return AlphaMinimum(a_lo, q_of_alpha(a_lo), 1, [(a_lo, None)], True)

    rng = np.random.default_rng(seed)
    starts = []
    nev_total = 0
    for i in range(max(1, n_starts)):
        if i == 0:
            lo, hi = a_lo, a_hi
        else:
            shrink = rng.uniform(0.0, 0.08, size=2)
            lo = a_lo + shrink[0] * (a_hi - a_lo)
            hi = a_hi - shrink[1] * (a_hi - a_lo)
        x, fx, nev = golden_section(q_of_alpha, lo, hi, tol=tol)
        nev_total += nev
        starts.append((x, fx))
    best = min(starts, key=lambda s: s[1])
    spread = max(s[1] for s in starts) - min(s[1] for s in starts)
    agree = spread <= max(1e-3 * abs(best[1]), 1e-9)
    return AlphaMinimum(
        alpha=best[0],
        quotient=best[1],
        neval=nev_total,
        starts=starts,
        starts_agree=bool(agree),
    )


# ---------------------------------------------------------------------------
# two-sided brackets


@dataclass
class Bracket:
    lower: float | None
    upper: float | None
    gap: float | None
    status: OptimalityStatus
    numeric_upper: float | None
    extrapolated: float | None
    provenance: dict
    sweep: SweepResult | None = None

    def to_json(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "status": self.status.to_json(),
            "numeric_upper": self.numeric_upper,
            "extrapolated": self.extrapolated,
            "provenance": self.provenance,
            "sweep": self.sweep.to_json() if self.sweep else None,
        }


def _assemble_bracket(status, lower, sweep):
    numeric_upper = min(sweep.quotients) if sweep else None
    uppers = []
    prov = {"lower": "validity theorem", "upper": []}
    if status.kind == "exact":
        uppers.append(status.value)
        prov["upper"].append(status.theorem)
        lower = status.value
        prov["lower"] = status.theorem
    elif status.kind == "bracket" and status.upper is not None:
        uppers.append(status.upper)
        prov["upper"].append(status.theorem)
    if numeric_upper is not None:
        uppers.append(numeric_upper)
        prov["upper"].append("best sweep quotient")
    upper = min(uppers) if uppers else None
    gap = (upper - lower) if (upper is not None and lower is not None) else None
    return Bracket(
        lower=lower,
        upper=upper,
        gap=gap,
        status=status,
        numeric_upper=numeric_upper,
        extrapolated=sweep.q_inf if sweep else None,
        provenance=prov,
        sweep=sweep,
    )


def bracket_mu(
    spec: ProblemSpec,
    quadspec: QuadratureSpec | None = None,
    n_list=DEFAULT_N_LIST,
    run_sweep: bool = True,
    cutoff_log_width: float = 6.0,
) -> Bracket:
    """Two-sided bracket for the optimal first-order constant."""
    hc = hardy_constant(spec)
    status = optimal_hardy_case(spec)
    if not hc.valid:
        return Bracket(
            lower=None, upper=None, gap=None, status=status,
            numeric_upper=None, extrapolated=None,
            provenance={"diagnosis": "validity condition fails: d - d_H + min(delta, delta') - p <= 0"},
        )
    sweep = None
    if run_sweep and spec.p > 1:
        sweep = sequence_sweep(spec, "hardy", n_list, quadspec, cutoff_log_width)
    return _assemble_bracket(status, hc.a_p_pow_p, sweep)


def bracket_nu(
    spec: ProblemSpec,
    quadspec: QuadratureSpec | None = None,
    n_list=DEFAULT_N_LIST,
    run_sweep: bool = True,
    cutoff_log_width: float = 6.0,
) -> Bracket:
    """Two-sided bracket for the optimal second-order constant."""
    rc = rellich_constants(spec)
    status = optimal_rellich_case(spec)
    if not rc.valid:
        return Bracket(
            lower=None, upper=None, gap=None, status=status,
            numeric_upper=None, extrapolated=None,
            provenance={"diagnosis": "validity condition of the second-order theorem fails"},
        )
    sweep = None
    if run_sweep:
        sweep = sequence_sweep(spec, "rellich", n_list, quadspec, cutoff_log_width)
    return _assemble_bracket(status, rc.c_p ** spec.p, sweep)
