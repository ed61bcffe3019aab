"""One-dimensional extremal profiles with exact derivatives and integral oracles.

The building blocks are the logarithmic ramp, its square, smooth plateau
cutoffs (linear- or log-scale), the twice-differentiable ramp obtained by
linearly correcting the squared ramp's derivative, and the two-exponent decay
profile s^(-alpha) (1+s)^(alpha-alpha').  Products of profiles carry exact
product-rule derivatives, so every spatial trial function built from them has
analytic gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

__all__ = [
    "Profile1D",
    "log_ramp",
    "log_ramp_squared",
    "smooth_cutoff",
    "log_cutoff",
    "smooth_step_up",
    "sigma_profile",
    "rho_profile",
    "rellich_profile",
    "power_profile",
    "chi_n",
    "power_ramp",
    "power_sigma",
    "IntegralResult",
    "profile_integral",
    "log_ramp_energy",
    "log_ramp_mass",
    "ramp_squared_bend_energy",
]

_DIV_SLOPE_TOL = 1e-9


def _smoothstep(t):
    """Quintic smoothstep S with S(0)=0, S(1)=1, S'(0)=S'(1)=S''(0)=S''(1)=0."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def _smoothstep_d1(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    out = np.zeros_like(t)
    ti = t[inside]
    out[inside] = 30.0 * ti**2 * (ti - 1.0) ** 2
    return out


def _smoothstep_d2(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    out = np.zeros_like(t)
    ti = t[inside]
    out[inside] = 60.0 * ti * (2.0 * ti - 1.0) * (ti - 1.0)
    return out


def _eval_pieces(s, pieces):
    """Evaluate piecewise callables; pieces = [(lo, hi, fn), ...] covering [0, inf)."""
    s_arr = np.asarray(s, dtype=float)
    out = np.zeros(s_arr.shape if s_arr.ndim else (1,))
    flat = s_arr.reshape(-1) if s_arr.ndim else s_arr.reshape(1)
    res = np.zeros_like(flat)
    for lo, hi, fn in pieces:
        m = (flat >= lo) & (flat < hi)
        if np.any(m):
            res[m] = fn(flat[m])
    res = res.reshape(s_arr.shape) if s_arr.ndim else res
    return res if s_arr.ndim else float(res[0])


@dataclass
class Profile1D:
    """Scalar profile on (0, inf) with derivatives, knots, and support metadata.

    smoothness is the highest derivative order that is globally continuous
    ("C0"/"C1"/"C2"); deriv2 may still be evaluated piecewise for lower tags.
    support = (lo, hi) means the profile vanishes identically outside [lo, hi].
    """

    value_fn: object
    d1_fn: object
    d2_fn: object
    knots: tuple
    support: tuple
    smoothness: str
    name: str
    meta: dict = field(default_factory=dict)

    def value(self, s):
        return self.value_fn(s)

    def deriv1(self, s):
        return self.d1_fn(s)

    def deriv2(self, s):
        if self.d2_fn is None:
            raise ValueError(f"profile {self.name} has no second derivative")
        return self.d2_fn(s)

    def deriv(self, j: int):
        if j == 0:
            return self.value_fn
        if j == 1:
            return self.d1_fn
        if j == 2:
            if self.d2_fn is None:
                raise ValueError(f"profile {self.name} has no second derivative")
            return self.d2_fn
        raise ValueError("derivative order must be 0, 1 or 2")

    def __mul__(self, other: "Profile1D") -> "Profile1D":
        lo = max(self.support[0], other.support[0])
        hi = min(self.support[1], other.support[1])
        knots = tuple(sorted({k for k in self.knots + other.knots if lo < k < hi} | ({lo} if lo > 0 else set())))
        d2 = None
        if self.d2_fn is not None and other.d2_fn is not None:
            def d2(s, a=self, b=other):
                return a.value(s) * b.deriv2(s) + 2.0 * a.deriv1(s) * b.deriv1(s) + a.deriv2(s) * b.value(s)
        order = {"C0": 0, "C1": 1, "C2": 2}
        smoothness = f"C{min(order[self.smoothness], order[other.smoothness])}"
        return Profile1D(
            value_fn=lambda s, a=self, b=other: a.value(s) * b.value(s),
            d1_fn=lambda s, a=self, b=other: a.deriv1(s) * b.value(s) + a.value(s) * b.deriv1(s),
            d2_fn=d2,
            knots=knots,
            support=(lo, hi),
            smoothness=smoothness,
            name=f"{self.name}*{other.name}",
            meta={**self.meta, **other.meta},
        )

    def scaled(self, c: float) -> "Profile1D":
        """Scalar multiple c * profile (for homogeneity checks)."""
        d2 = None if self.d2_fn is None else (lambda s, a=self: c * a.deriv2(s))
        return Profile1D(
            value_fn=lambda s, a=self: c * a.value(s),
            d1_fn=lambda s, a=self: c * a.deriv1(s),
            d2_fn=d2,
            knots=self.knots,
            support=self.support,
            smoothness=self.smoothness,
            name=f"{c}*{self.name}",
            meta=dict(self.meta),
        )

    def rescaled(self, c: float) -> "Profile1D":
        """Argument rescaling s -> s/c (support and knots dilate by c)."""
        if c <= 0:
            raise ValueError("rescaling factor must be positive")
        d2 = None if self.d2_fn is None else (lambda s, a=self: a.deriv2(np.asarray(s) / c) / c**2)
        lo, hi = self.support
        return Profile1D(
            value_fn=lambda s, a=self: a.value(np.asarray(s) / c),
            d1_fn=lambda s, a=self: a.deriv1(np.asarray(s) / c) / c,
            d2_fn=d2,
            knots=tuple(k * c for k in self.knots),
            support=(lo * c, hi * c if np.isfinite(hi) else np.inf),
            smoothness=self.smoothness,
            name=f"{self.name}@{c:g}",
            meta=dict(self.meta),
        )


def log_ramp(n: float) -> Profile1D:
    """Ramp 0 -> 1 that is linear in log s between 1/n and 1; constant outside."""
    if n <= 1:
        raise ValueError("ramp parameter n must exceed 1")
    L = math.log(n)
    inv_n = 1.0 / n
    pieces_v = [
        (0.0, inv_n, lambda s: np.zeros_like(s)),
        (inv_n, 1.0, lambda s: (np.log(s) + L) / L),
        (1.0, np.inf, lambda s: np.ones_like(s)),
    ]
    pieces_d1 = [(inv_n, 1.0, lambda s: 1.0 / (s * L))]
    pieces_d2 = [(inv_n, 1.0, lambda s: -1.0 / (s * s * L))]
    return Profile1D(
        value_fn=lambda s: _eval_pieces(s, pieces_v),
        d1_fn=lambda s: _eval_pieces(s, pieces_d1),
        d2_fn=lambda s: _eval_pieces(s, pieces_d2),
        knots=(inv_n, 1.0),
        support=(inv_n, np.inf),
        smoothness="C0",
        name=f"ramp[n={n:g}]",
        meta={"n": n},
    )


def log_ramp_squared(n: float) -> Profile1D:
    """Square of the log ramp; its derivative is continuous at 1/n but jumps at 1."""
    if n <= 1:
        raise ValueError("ramp parameter n must exceed 1")
    L = math.log(n)
    inv_n = 1.0 / n
    pieces_v = [
        (0.0, inv_n, lambda s: np.zeros_like(s)),
        (inv_n, 1.0, lambda s: ((np.log(s) + L) / L) ** 2),
        (1.0, np.inf, lambda s: np.ones_like(s)),
    ]
    pieces_d1 = [(inv_n, 1.0, lambda s: 2.0 * (np.log(s) + L) / (s * L * L))]
    pieces_d2 = [(inv_n, 1.0, lambda s: 2.0 * (1.0 - (np.log(s) + L)) / (s * s * L * L))]
    return Profile1D(
        value_fn=lambda s: _eval_pieces(s, pieces_v),
        d1_fn=lambda s: _eval_pieces(s, pieces_d1),
        d2_fn=lambda s: _eval_pieces(s, pieces_d2),
        knots=(inv_n, 1.0),
        support=(inv_n, np.inf),
        smoothness="C0",
        name=f"ramp2[n={n:g}]",
        meta={"n": n},
    )


def smooth_cutoff(r0: float = 1.0, r1: float = 2.0) -> Profile1D:
    """C2 plateau cutoff: 1 on [0, r0], quintic-smoothstep decay to 0 at r1."""
    if not 0 < r0 < r1:
        raise ValueError("cutoff needs 0 < r0 < r1")
    w = r1 - r0
    pieces_v = [
        (0.0, r0, lambda s: np.ones_like(s)),
        (r0, r1, lambda s: 1.0 - _smoothstep((s - r0) / w)),
    ]
    pieces_d1 = [(r0, r1, lambda s: -_smoothstep_d1((s - r0) / w) / w)]
    pieces_d2 = [(r0, r1, lambda s: -_smoothstep_d2((s - r0) / w) / (w * w))]
    return Profile1D(
        value_fn=lambda s: _eval_pieces(s, pieces_v),
        d1_fn=lambda s: _eval_pieces(s, pieces_d1),
        d2_fn=lambda s: _eval_pieces(s, pieces_d2),
        knots=(r0, r1),
        support=(0.0, r1),
        smoothness="C2",
        name=f"cutoff[{r0:g},{r1:g}]",
        meta={},
    )


def log_cutoff(r0: float = 1.0, log_width: float = 6.0) -> Profile1D:
    """C2 plateau cutoff decaying over [r0, r0 e^w]; u = log(s/r0)/w drives the smoothstep.

    Log-scale decay keeps the first-derivative energy integrals O(1/w), which
    is what makes wide cutoffs numerically efficient trial tails.
    """
    if r0 <= 0 or log_width <= 0:
        raise ValueError("log cutoff needs r0 > 0 and positive width")
    w = log_width
    r1 = r0 * math.exp(w)
    logr0 = math.log(r0)

    def u(s):
        return (np.log(s) - logr0) / w

    pieces_v = [
        (0.0, r0, lambda s: np.ones_like(s)),
        (r0, r1, lambda s: 1.0 - _smoothstep(u(s))),
    ]
    pieces_d1 = [(r0, r1, lambda s: -_smoothstep_d1(u(s)) / (s * w))]
    pieces_d2 = [
        (r0, r1, lambda s: (-_smoothstep_d2(u(s)) / w + _smoothstep_d1(u(s))) / (s * s * w))
    ]
    return Profile1D(
        value_fn=lambda s: _eval_pieces(s, pieces_v),
        d1_fn=lambda s: _eval_pieces(s, pieces_d1),
        d2_fn=lambda s: _eval_pieces(s, pieces_d2),
        knots=(r0, r1),
        support=(0.0, r1),
        smoothness="C2",
        name=f"logcutoff[{r0:g},w={w:g}]",
        meta={},
    )


def smooth_step_up(r0: float, r1: float) -> Profile1D:
    """C2 ramp 0 -> 1 over [r0, r1] (plateau 1 beyond r1)."""
    if not 0 <= r0 < r1:
        raise ValueError("step needs 0 <= r0 < r1")
    w = r1 - r0
    pieces_v = [
        (r0, r1, lambda s: _smoothstep((s - r0) / w)),
        (r1, np.inf, lambda s: np.ones_like(s)),
    ]
    pieces_d1 = [(r0, r1, lambda s: _smoothstep_d1((s - r0) / w) / w)]
    pieces_d2 = [(r0, r1, lambda s: _smoothstep_d2((s - r0) / w) / (w * w))]
    return Profile1D(
        value_fn=lambda s: _eval_pieces(s, pieces_v),
        d1_fn=lambda s: _eval_pieces(s, pieces_d1),
        d2_fn=lambda s: _eval_pieces(s, pieces_d2),
        knots=(r0, r1),
        support=(r0, np.inf),
        smoothness="C2",
        name=f"step[{r0:g},{r1:g}]",
        meta={},
    )


def rho_profile(n: float) -> Profile1D:
    """Twice-differentiable ramp 0 -> 1 over [1/n, 1].

    Built by removing the endpoint jump of the squared-ramp derivative with a
    linear correction and renormalizing the integral; the first derivative is
    continuous everywhere (it vanishes at both knots), the second derivative is
    piecewise continuous.
    """
    if n <= 1:
        raise ValueError("ramp parameter n must exceed 1")
    L = math.log(n)
    inv_n = 1.0 / n
    span = 1.0 - inv_n
    c1 = 1.0 - span / L  # integral of the corrected derivative over [1/n, 1]

    def val(s):
        u = (np.log(s) + L) / L
        return (u * u - (s - inv_n) ** 2 / (L * span)) / c1

    def d1(s):
        return (2.0 * (np.log(s) + L) / (s * L * L) - 2.0 * (s - inv_n) / (L * span)) / c1

    def d2(s):
        return (2.0 * (1.0 - (np.log(s) + L)) / (s * s * L * L) - 2.0 / (L * span)) / c1

    pieces_v = [
        (0.0, inv_n, lambda s: np.zeros_like(s)),
        (inv_n, 1.0, val),
        (1.0, np.inf, lambda s: np.ones_like(s)),
    ]
    return Profile1D(
        value_fn=lambda s: _eval_pieces(s, pieces_v),
        d1_fn=lambda s: _eval_pieces(s, [(inv_n, 1.0, d1)]),
        d2_fn=lambda s: _eval_pieces(s, [(inv_n, 1.0, d2)]),
        knots=(inv_n, 1.0),
        support=(inv_n, np.inf),
        smoothness="C1",
        name=f"rho[n={n:g}]",
        meta={"n": n},
    )


def sigma_profile(n: float, cutoff: Profile1D | None = None) -> Profile1D:
    """Twice-differentiable compactly supported ramp: rho_n times a plateau cutoff."""
    if cutoff is None:
        cutoff = smooth_cutoff()
    return rho_profile(n) * cutoff


def chi_n(n: float, cutoff: Profile1D | None = None) -> Profile1D:
    """Log ramp times a plateau cutoff (the compactly supported C0 ramp family)."""
    if cutoff is None:
        cutoff = smooth_cutoff()
    return log_ramp(n) * cutoff


def rellich_profile(alpha: float, alpha_prime: float) -> Profile1D:
    """Decay profile s^(-alpha) (1 + s)^(alpha - alpha') with analytic derivatives.

    Satisfies -s^{-1} chi (alpha v alpha') <= chi' <= -s^{-1} chi (alpha ^ alpha')
    and chi'' <= s^{-2} chi (alpha v alpha')(alpha v alpha' + 1).
    """
    if alpha < 0 or alpha_prime < 0:
        raise ValueError("decay exponents must be nonnegative")
    a, ap = float(alpha), float(alpha_prime)

    def val(s):
        s = np.asarray(s, dtype=float)
        return np.exp(-a * np.log(s) + (a - ap) * np.log1p(s))

    def d1(s):
        s = np.asarray(s, dtype=float)
        return -val(s) * (a + ap * s) / (s * (1.0 + s))

    def d2(s):
        s = np.asarray(s, dtype=float)
        quad_poly = a * (a + 1.0) + 2.0 * a * (ap + 1.0) * s + ap * (ap + 1.0) * s * s
        return val(s) * quad_poly / (s * s * (1.0 + s) ** 2)

    def wrap(fn):
        def inner(s):
            s_arr = np.asarray(s, dtype=float)
            out = fn(np.where(s_arr > 0, s_arr, 1.0))
            out = np.where(s_arr > 0, out, 0.0)
            return out if s_arr.ndim else float(out)
        return inner

    return Profile1D(
        value_fn=wrap(val),
        d1_fn=wrap(d1),
        d2_fn=wrap(d2),
        knots=(1.0,),
        support=(0.0, np.inf),
        smoothness="C2",
        name=f"chi[{a:g},{ap:g}]",
        meta={"alpha": a, "alpha_prime": ap},
    )


def power_profile(alpha: float) -> Profile1D:
    """Pure power s^(-alpha)."""
    return rellich_profile(alpha, alpha)


def power_ramp(alpha: float, n: float, cutoff: Profile1D | None = None) -> Profile1D:
    """s^(-alpha) localized by the log ramp and a plateau cutoff (C0 kinks at knots)."""
    prof = power_profile(alpha) * chi_n(n, cutoff)
    prof.meta["alpha"] = alpha
    prof.meta["n"] = n
    return prof


def power_sigma(alpha: float, n: float, cutoff: Profile1D | None = None) -> Profile1D:
    """s^(-alpha) localized by the twice-differentiable ramp and a plateau cutoff."""
    prof = power_profile(alpha) * sigma_profile(n, cutoff)
    prof.meta["alpha"] = alpha
    prof.meta["n"] = n
    return prof


# ---------------------------------------------------------------------------
# closed-form oracles


def log_ramp_energy(n: float, p: float) -> float:
    """int_0^1 r^(p-1) |ramp'|^p dr = (log n)^(1-p)."""
    return math.log(n) ** (1.0 - p)


def log_ramp_mass(n: float, p: float) -> float:
    """int_{1/n}^1 r^(-1) ramp^p dr = log(n)/(p+1)."""
    return math.log(n) / (p + 1.0)


def ramp_squared_bend_energy(n: float, p: float) -> float:
    """int_{1/n}^1 r^(2p-1) |(ramp^2)''|^p dr in closed form.

    Substituting u = log(rn) gives 2^p (log n)^(-2p) int_0^L |1-u|^p du with
    L = log n; for L >= 1 this is 2^p (log n)^(-2p) (1 + (L-1)^(p+1))/(p+1).
    """
    L = math.log(n)
    if L >= 1.0:
        core = (1.0 + (L - 1.0) ** (p + 1.0)) / (p + 1.0)
    else:
        core = (1.0 - (1.0 - L) ** (p + 1.0)) / (p + 1.0)
    return 2.0**p * L ** (-2.0 * p) * core


# ---------------------------------------------------------------------------
# adaptive quadrature of profile integrals


@dataclass
class IntegralResult:
    value: float
    error: float
    diverged: bool
    neval: int

    def to_json(self):
        return {
            "value": self.value,
            "error": self.error,
            "diverged": self.diverged,
            "neval": self.neval,
        }


def oracle_csv_rows(n_values=(10.0, 1e2, 1e4), p_values=(1.5, 2.0, 3.0), rel_tol=1e-9):
    """Ramp-integral sweep rows: (kind, n, p, quadrature, closed_form, rel_error).

    Covers the three closed-form oracles (ramp gradient energy, weighted ramp
    mass, squared-ramp bend energy); ready for CSV export.
    """
    rows = []
    for n in n_values:
        for p in p_values:
            xi = log_ramp(n)
            xi2 = log_ramp_squared(n)
            cases = (
                ("ramp_energy", xi, p - 1.0, 1, log_ramp_energy(n, p), (0.0, 1.0)),
                ("ramp_mass", xi, -1.0, 0, log_ramp_mass(n, p), (1.0 / n, 1.0)),
                ("ramp_sq_bend", xi2, 2.0 * p - 1.0, 2, ramp_squared_bend_energy(n, p), (1.0 / n, 1.0)),
            )
            for kind, prof, gamma, j, exact, bounds in cases:
                res = profile_integral(prof, gamma=gamma, j=j, p=p, rel_tol=rel_tol, bounds=bounds)
                rel = abs(res.value - exact) / abs(exact)
                rows.append((kind, n, p, res.value, exact, rel))
    return rows


def _local_slope(g, r_hi, direction):
    """Log-log slope of g near 0 (direction=-1) or near infinity (+1)."""
    if direction < 0:
        ra, rb = r_hi * 1e-7, r_hi * 1e-9
    else:
        ra, rb = r_hi * 1e7, r_hi * 1e9
    ga, gb = g(ra), g(rb)
    if ga == 0.0 and gb == 0.0:
        return None  # identically zero tail
    if ga <= 0.0 or gb <= 0.0:
        return 0.0
    return math.log(gb / ga) / math.log(rb / ra)


def profile_integral(
    profile: Profile1D,
    gamma: float,
    j: int,
    p: float,
    rel_tol: float = 1e-9,
    limit: int = 800,
    bounds: tuple | None = None,
) -> IntegralResult:
    """Adaptive quadrature of int r^gamma |profile^(j)(r)|^p dr.

    Integrates over the profile support intersected with optional explicit
    bounds, splitting exactly at the profile knots; wide or endpoint pieces are
    integrated in log coordinates.  Flags divergence when the integrand's local
    power at a support endpoint is not integrable.
    """
    fj = profile.deriv(j)

    def g(r):
        return float(r**gamma * abs(float(np.asarray(fj(r)).reshape(-1)[0])) ** p)

    lo, hi = profile.support
    if bounds is not None:
        lo = max(lo, bounds[0])
        hi = min(hi, bounds[1])
        if hi <= lo:
            return IntegralResult(0.0, 0.0, False, 0)
    cuts = sorted({k for k in profile.knots if lo < k < hi})
    bounds = [lo] + cuts + [hi]

    neval = 0
    total = 0.0
    err = 0.0

    # divergence analysis at the endpoints
    if lo == 0.0:
        anchor = bounds[1] if len(bounds) > 1 and np.isfinite(bounds[1]) else 1.0
        slope = _local_slope(g, anchor, -1)
        if slope is not None and slope <= -1.0 + _DIV_SLOPE_TOL:
            return IntegralResult(value=math.inf, error=math.inf, diverged=True, neval=4)
    if not np.isfinite(hi):
        anchor = bounds[-2] if len(bounds) > 1 and bounds[-2] > 0 else 1.0
        slope = _local_slope(g, anchor, +1)
        if slope is None:
            bounds[-1] = anchor  # derivative vanishes identically beyond the last knot
            if bounds[-1] <= bounds[0]:
                return IntegralResult(0.0, 0.0, False, 4)
        elif slope >= -1.0 - _DIV_SLOPE_TOL:
            return IntegralResult(value=math.inf, error=math.inf, diverged=True, neval=4)

    counter = {"n": 0}

    def g_counted(r):
        counter["n"] += 1
        return g(r)

    for a, b in zip(bounds[:-1], bounds[1:]):
        if a >= b:
            continue
        if a == 0.0:
            # integrable endpoint: integrate in u = log r, truncated where the
            # local power makes the remaining tail negligible
            slope = _local_slope(g, b, -1)
            if slope is None:
                continue
            decay = slope + 1.0
            du = min(45.0 / max(decay, 0.02), 700.0)
            ub = math.log(b)
            val, e = quad(
                lambda u: g_counted(math.exp(u)) * math.exp(u),
                ub - du,
                ub,
                epsabs=1e-300,
                epsrel=rel_tol,
                limit=limit,
            )
        elif not np.isfinite(b):
            slope = _local_slope(g, a, +1)
            if slope is None:
                continue
            decay = -(slope + 1.0)
            du = min(45.0 / max(decay, 0.02), 700.0)
            ua = math.log(a)
            val, e = quad(
                lambda u: g_counted(math.exp(u)) * math.exp(u),
                ua,
                ua + du,
                epsabs=1e-300,
                epsrel=rel_tol,
                limit=limit,
            )
        elif b / a > 30.0:
            val, e = quad(
                lambda u: g_counted(math.exp(u)) * math.exp(u),
                math.log(a),
                math.log(b),
                epsabs=1e-300,
                epsrel=rel_tol,
                limit=limit,
            )
        else:
            val, e = quad(g_counted, a, b, epsabs=1e-300, epsrel=rel_tol, limit=limit)
        total += val
        err += e

    return IntegralResult(value=total, error=err, diverged=False, neval=counter["n"] + 4)
