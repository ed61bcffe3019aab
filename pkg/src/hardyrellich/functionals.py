"""Quadrature engine for the first- and second-order Rayleigh quotients.

Three independent integration routes back every quotient:

* "radial-1d": exact reduction of radial-in-distance integrands to 1-D
  integrals against the offset-surface-area polynomial (adaptive QUADPACK).
* "tensor-grid": deterministic fixed-order Gauss cells (log-scaled where the
  range is wide), used for product trials and as an independent 1-D route.
* "monte-carlo": seeded, stratified sampling of the trial support with
  fixed-order reduction, bit-stable for a fixed (spec, seed, method).

Quotient error is reported as |q| (rel_num + rel_den), never absorbed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .constants import ProblemSpec, b_alpha
from .geometry import (
    AffineSubspace,
    Ball,
    ConvexBody,
    Halfspace,
    SinglePoint,
    distance,
    sphere_area,
    unit_ball_volume,
)
from .profiles import Profile1D, rellich_profile, smooth_cutoff, smooth_step_up
from .trials import ProductTrial, RadialDistanceTrial, product_frame
from .weights import WeightParams

__all__ = [
    "QuadratureSpec",
    "QuotientResult",
    "hardy_quotient",
    "hardy_directional_quotient",
    "rellich_quotient",
    "weighted_operator_apply",
    "lambda_split",
    "split_equality_point",
    "hardy_split_bound",
    "SplitBound",
    "lemma31_residual",
    "plateau_cutoff_quotient",
]

_G_HI = np.polynomial.legendre.leggauss(24)
_G_LO = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class QuadratureSpec:
    """How to integrate: route, tolerance, budget, and the seed for Monte Carlo."""

    method: str = "auto"  # auto | radial-1d | tensor-grid | monte-carlo
    rel_tol: float = 1e-7
    max_evals: int = 400_000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-2:
            raise ValueError("relative tolerance must lie in (0, 1e-2]")
        if self.method not in ("auto", "radial-1d", "tensor-grid", "monte-carlo"):
            raise ValueError(f"unknown quadrature method {self.method!r}")


@dataclass
class QuotientResult:
    numerator: float
    denominator: float
    quotient: float
    error: float
    neval: int
    method: str

    def to_json(self):
        return {
            "numerator": self.numerator,
            "denominator": self.denominator,
            "quotient": self.quotient,
            "error": self.error,
            "neval": self.neval,
            "method": self.method,
        }


def _make_result(num, num_err, den, den_err, neval, method):
    if not den > 1e-290:
        raise ValueError("denominator underflow: trial function is numerically zero")
    q = num / den
    rel = num_err / num if num > 0 else num_err
    rel += den_err / den
    return QuotientResult(
        numerator=num,
        denominator=den,
        quotient=q,
        error=abs(q) * rel,
        neval=neval,
        method=method,
    )


# ---------------------------------------------------------------------------
# 1-D and 2-D deterministic integration


def _sign_roots(fn, a, b, n_scan=129):
    """Interior sign changes of fn on (a, b), located by bisection."""
    if a <= 0 or b / a > 1e4:
        grid = np.geomspace(max(a, 1e-300), b, n_scan) if a > 0 else np.linspace(a, b, n_scan)
    else:
        grid = np.linspace(a, b, n_scan)
    vals = np.asarray(fn(grid))
    roots = []
    sign = np.sign(vals)
    for i in range(len(grid) - 1):
        if sign[i] != 0 and sign[i + 1] != 0 and sign[i] != sign[i + 1]:
            lo, hi = grid[i], grid[i + 1]
            flo = vals[i]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = float(np.asarray(fn(mid)))
                if fm == 0.0:
                    lo = hi = mid
                    break
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
                if hi - lo <= 1e-14 * hi:
                    break
            roots.append(0.5 * (lo + hi))
    return roots


def _build_cells(a, b, knots=(), roots_fn=None, max_log=2.0):
    """Cells [(lo, hi, use_log)] covering [a, b], split at knots and sign roots."""
    pts = {a, b}
    pts.update(k for k in knots if a < k < b)
    pts = sorted(pts)
    if roots_fn is not None:
        extra = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            extra.extend(_sign_roots(roots_fn, lo, hi))
        pts = sorted(set(pts) | set(extra))
    cells = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        width = math.log(hi) - math.log(lo) if lo > 0 else math.inf
        if lo > 0 and width > max_log:
            m = int(math.ceil(width / max_log))
            edges = np.geomspace(lo, hi, m + 1)
            cells.extend((edges[i], edges[i + 1], True) for i in range(m))
        else:
            cells.append((lo, hi, lo > 0 and width > 1.0))
    return cells


def _gauss_cell_1d(f, lo, hi, use_log, rule):
    x, w = rule
    if use_log:
        ua, ub = math.log(lo), math.log(hi)
        u = 0.5 * (ub - ua) * x + 0.5 * (ua + ub)
        r = np.exp(u)
        return 0.5 * (ub - ua) * float(np.sum(w * f(r) * r))
    r = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(np.sum(w * f(r)))


def _integrate_cells_1d(f, cells):
    total, err, neval = 0.0, 0.0, 0
    for lo, hi, use_log in cells:
        hi_val = _gauss_cell_1d(f, lo, hi, use_log, _G_HI)
        lo_val = _gauss_cell_1d(f, lo, hi, use_log, _G_LO)
        total += hi_val
        err += abs(hi_val - lo_val)
        neval += len(_G_HI[0]) + len(_G_LO[0])
    return total, err, neval


def _adaptive_1d(f, cells, rel_tol, limit=400):
    total, err, neval = 0.0, 0.0, 0
    counter = {"n": 0}

    def f1(r):
        counter["n"] += 1
        return float(np.asarray(f(np.array([r])))[0])

    with warnings.catch_warnings():
        # kinked |.|^p integrands trip QUADPACK's roundoff heuristics; the
        # returned error estimates stay honest and are propagated
        warnings.simplefilter("ignore", IntegrationWarning)
        for lo, hi, use_log in cells:
            if use_log:
                val, e = quad(
                    lambda u: f1(math.exp(u)) * math.exp(u),
                    math.log(lo), math.log(hi),
                    epsabs=1e-300, epsrel=rel_tol, limit=limit,
                )
            else:
                val, e = quad(f1, lo, hi, epsabs=1e-300, epsrel=rel_tol, limit=limit)
            total += val
            err += e
    return total, err, counter["n"]


def _nodes_cell(lo, hi, use_log, rule):
    x, w = rule
    if use_log:
        ua, ub = math.log(lo), math.log(hi)
        u = 0.5 * (ub - ua) * x + 0.5 * (ua + ub)
        r = np.exp(u)
        return r, 0.5 * (ub - ua) * w * r
    r = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    return r, 0.5 * (hi - lo) * w * np.ones_like(r)


def _integrate_cells_2d(f, cells_t, cells_r):
    """Integral of f(tau, r) over the cell product; f must accept meshgrids."""
    total, err, neval = 0.0, 0.0, 0
    for ct in cells_t:
        for cr in cells_r:
            t_hi, wt_hi = _nodes_cell(*ct, _G_HI)
            r_hi, wr_hi = _nodes_cell(*cr, _G_HI)
            T, R = np.meshgrid(t_hi, r_hi, indexing="ij")
            hi_val = float(np.einsum("i,j,ij->", wt_hi, wr_hi, f(T, R)))
            t_lo, wt_lo = _nodes_cell(*ct, _G_LO)
            r_lo, wr_lo = _nodes_cell(*cr, _G_LO)
            T, R = np.meshgrid(t_lo, r_lo, indexing="ij")
            lo_val = float(np.einsum("i,j,ij->", wt_lo, wr_lo, f(T, R)))
            total += hi_val
            err += abs(hi_val - lo_val)
            neval += len(t_hi) * len(r_hi) + len(t_lo) * len(r_lo)
    return total, err, neval


# ---------------------------------------------------------------------------
# body-specific data for the reductions


def _steiner_fn(body: ConvexBody):
    coeffs = body.steiner_area_coeffs()
    if coeffs is None:
        return None
    return lambda s: np.polynomial.polynomial.polyval(np.asarray(s, dtype=float), coeffs)


def _kappa_profile(body: ConvexBody):
    """(Lap d^2 / 2 - 1)/s as a function of s, for bodies whose offsets are spheres."""
    if isinstance(body, SinglePoint):
        d = body.d
        return lambda s: (d - 1.0) / np.asarray(s, dtype=float)
    if isinstance(body, Ball):
        d, R = body.d, body.radius
        return lambda s: (d - 1.0) / (R + np.asarray(s, dtype=float))
    return None


def _h_radial_profile(w: WeightParams, prof: Profile1D, kappa):
    """H acting on prof(d(.)) as a 1-D function of s, for spherical-offset bodies."""

    def h(s):
        s = np.asarray(s, dtype=float)
        c = w.value(s)
        cp = w.derivative(s)
        d1 = prof.deriv1(s)
        d2 = prof.deriv2(s)
        return -c * d2 - cp * d1 - c * d1 * kappa(s)

    return h


def _require_compact_radial(spec: ProblemSpec, trial: RadialDistanceTrial):
    lo, hi = trial.profile.support
    if lo <= 0:
        raise ValueError("trial support touches the boundary (profile support must start above 0)")
    if not np.isfinite(hi):
        raise ValueError("trial support is not compact (profile support unbounded)")
    if not spec.body.is_bounded:
        raise ValueError("radial-in-distance trials need a bounded body for compact support")


def _require_product(spec: ProblemSpec, trial: ProductTrial):
    frame = product_frame(spec.body)
    lo, hi = trial.chi.support
    if lo <= 0 or not np.isfinite(hi):
        raise ValueError("normal profile must be supported in a compact shell away from 0")
    blo, bhi = trial.bump.support
    if not np.isfinite(bhi):
        raise ValueError("tangential bump must be compactly supported")
    return frame


# ---------------------------------------------------------------------------
# Hardy quotients


def _hardy_radial(spec, trial, quadspec, directional=False):
    # directional and full quotients coincide: the gradient is parallel to grad d
    _require_compact_radial(spec, trial)
    area = _steiner_fn(spec.body)
    if area is None:
        raise ValueError("no offset-area polynomial for this body; use the monte-carlo route")
    w = spec.weights
    prof = trial.profile
    p = spec.p
    lo, hi = prof.support

    def f_num(s):
        return area(s) * w.value(s) * np.abs(prof.deriv1(s)) ** p

    def f_den(s):
        return area(s) * w.value(s) * s ** (-p) * np.abs(prof.value(s)) ** p

    cells_n = _build_cells(lo, hi, prof.knots, roots_fn=prof.deriv1)
    cells_d = _build_cells(lo, hi, prof.knots)
    if quadspec.method in ("auto", "radial-1d"):
        num, ne, n1 = _adaptive_1d(f_num, cells_n, quadspec.rel_tol)
        den, de, n2 = _adaptive_1d(f_den, cells_d, quadspec.rel_tol)
        method = "radial-1d"
    else:
        num, ne, n1 = _integrate_cells_1d(f_num, cells_n)
        den, de, n2 = _integrate_cells_1d(f_den, cells_d)
        method = "tensor-grid"
    return _make_result(num, ne, den, de, n1 + n2, method)


def _tangential_weight(frame):
    j = frame["j"]
    return lambda t: sphere_area(j) * np.asarray(t, dtype=float) ** (j - 1)


def _normal_weight(frame):
    m = frame["m"]
    if frame["one_sided"]:
        return lambda r: np.asarray(r, dtype=float) ** (m - 1)
    return lambda r: sphere_area(m) * np.asarray(r, dtype=float) ** (m - 1)


def _hardy_product(spec, trial, quadspec, directional=False):
    frame = _require_product(spec, trial)
    w = spec.weights
    p = spec.p
    bump, chi = trial.bump, trial.chi
    wt = _tangential_weight(frame)
    wn = _normal_weight(frame)
    tlo, thi = bump.support
    rlo, rhi = chi.support
    cells_t = _build_cells(max(tlo, 0.0), thi, bump.knots)
    cells_r = _build_cells(rlo, rhi, chi.knots, roots_fn=chi.deriv1)

    def den_t(t):
        return wt(t) * np.abs(bump.value(t)) ** p

    def den_r(r):
        return wn(r) * w.value(r) * r ** (-p) * np.abs(chi.value(r)) ** p

    dt, dte, n1 = _integrate_cells_1d(den_t, cells_t)
    dr, dre, n2 = _integrate_cells_1d(den_r, cells_r)
    den = dt * dr
    den_err = abs(dt) * dre + abs(dr) * dte
    neval = n1 + n2

    if directional:
        def num_r(r):
            return wn(r) * w.value(r) * np.abs(chi.deriv1(r)) ** p

        nr, nre, n3 = _integrate_cells_1d(num_r, cells_r)
        num = dt * nr
        num_err = abs(dt) * nre + abs(nr) * dte
        return _make_result(num, num_err, den, den_err, neval + n3, "tensor-grid")

    if p == 2.0:
        def bump_grad(t):
            return wt(t) * np.abs(bump.deriv1(t)) ** 2

        def bump_sq(t):
            return wt(t) * np.abs(bump.value(t)) ** 2

        def chi_grad(r):
            return wn(r) * w.value(r) * np.abs(chi.deriv1(r)) ** 2

        def chi_sq(r):
            return wn(r) * w.value(r) * np.abs(chi.value(r)) ** 2

        bg, bge, n3 = _integrate_cells_1d(bump_grad, cells_t)
        bs, bse, n4 = _integrate_cells_1d(bump_sq, cells_t)
        cg, cge, n5 = _integrate_cells_1d(chi_grad, cells_r)
        cs, cse, n6 = _integrate_cells_1d(chi_sq, cells_r)
        num = bg * cs + bs * cg
        num_err = abs(bg) * cse + abs(cs) * bge + abs(bs) * cge + abs(cg) * bse
        return _make_result(num, num_err, den, den_err, neval + n3 + n4 + n5 + n6, "tensor-grid")

    def f_num(T, R):
        grad_sq = (bump.deriv1(T) * chi.value(R)) ** 2 + (bump.value(T) * chi.deriv1(R)) ** 2
        return wt(T) * wn(R) * w.value(R) * grad_sq ** (p / 2.0)

    num, num_err, n3 = _integrate_cells_2d(f_num, cells_t, cells_r)
    return _make_result(num, num_err, den, den_err, neval + n3, "tensor-grid")


# ---------------------------------------------------------------------------
# Monte Carlo routes


def _mc_strata_rngs(seed, n_strata):
    return [np.random.default_rng([int(seed), 7919, i]) for i in range(n_strata)]


def _mc_annulus(spec, trial, quadspec, integrands):
    """Log-shell stratified sampling for radial trials on point/ball bodies."""
    body = spec.body
    d = spec.d
    lo, hi = trial.profile.support
    if isinstance(body, SinglePoint):
        center, R = body.point, 0.0
    else:
        center, R = body.center, body.radius
    a, b = R + lo, R + hi
    n_strata = min(96, max(16, int(4.0 * math.log(b / a))))
    per = max(64, quadspec.max_evals // (n_strata * max(len(integrands), 1)))
    edges = np.geomspace(a, b, n_strata + 1)
    totals = [0.0] * len(integrands)
    errs = [0.0] * len(integrands)
    neval = 0
    rngs = _mc_strata_rngs(quadspec.seed, n_strata)
    kd = unit_ball_volume(d)
    for i in range(n_strata):
        ea, eb = edges[i], edges[i + 1]
        vol = kd * (eb**d - ea**d)
        rng = rngs[i]
        u = rng.uniform(size=per)
        radii = (ea**d + u * (eb**d - ea**d)) ** (1.0 / d)
        dirs = rng.normal(size=(per, d))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        pts = center + dirs * radii[:, None]
        neval += per
        for idx, fn in enumerate(integrands):
            vals = fn(pts)
            totals[idx] += vol * float(np.mean(vals))
            errs[idx] += vol * float(np.std(vals)) / math.sqrt(per)
    return totals, errs, neval


def _mc_box_quotient(spec, trial, quadspec, f_num, f_den):
    body = spec.body
    lo_s, hi_s = trial.profile.support
    blo, bhi = body.bounding_box()
    if not (np.all(np.isfinite(blo)) and np.all(np.isfinite(bhi))):
        raise ValueError("monte-carlo box sampling needs a bounded body")
    blo, bhi = blo - hi_s, bhi + hi_s
    vol = float(np.prod(bhi - blo))
    n_strata = 24
    per = max(256, quadspec.max_evals // (2 * n_strata))
    rngs = _mc_strata_rngs(quadspec.seed, n_strata)
    num_means, den_means = [], []
    neval = 0
    for i in range(n_strata):
        pts = rngs[i].uniform(blo, bhi, size=(per, spec.d))
        neval += per
        num_means.append(vol * float(np.mean(f_num(pts))))
        den_means.append(vol * float(np.mean(f_den(pts))))
    num = math.fsum(num_means) / n_strata
    den = math.fsum(den_means) / n_strata
    num_err = float(np.std(num_means)) / math.sqrt(n_strata)
    den_err = float(np.std(den_means)) / math.sqrt(n_strata)
    return _make_result(num, num_err, den, den_err, neval, "monte-carlo")


def _mc_tube_quotient(spec, trial, quadspec, f_num, f_den):
    """Stratified tube sampling (tangential ball x normal annulus) for product trials."""
    frame = product_frame(spec.body)
    j, m = frame["j"], frame["m"]
    body = spec.body
    rlo, rhi = trial.chi.support
    _, thi = trial.bump.support
    n_strata = min(96, max(16, int(4.0 * math.log(rhi / rlo))))
    per = max(256, quadspec.max_evals // (2 * n_strata))
    edges = np.geomspace(rlo, rhi, n_strata + 1)
    rngs = _mc_strata_rngs(quadspec.seed, n_strata)
    ball_vol_t = unit_ball_volume(j) * thi**j
    num_parts, num_errs, den_parts, den_errs = [], [], [], []
    neval = 0
    if isinstance(body, AffineSubspace):
        basis_t = body.basis
        normal_basis = _orthogonal_complement(body.basis)
        origin = body.offset
    else:  # halfspace: tangential plane basis + inward/outward normal
        normal_basis = body.normal[None, :]
        basis_t = _orthogonal_complement(normal_basis)
        origin = body.normal * body.offset
    for i in range(n_strata):
        rng = rngs[i]
        ea, eb = edges[i], edges[i + 1]
        if frame["one_sided"]:
            shell_vol = eb - ea  # m = 1, one-sided segment of normal coordinate
            radii = rng.uniform(ea, eb, size=per)
            zdir = np.ones((per, 1))
        else:
            shell_vol = unit_ball_volume(m) * (eb**m - ea**m)
            u = rng.uniform(size=per)
            radii = (ea**m + u * (eb**m - ea**m)) ** (1.0 / m)
            zdir = rng.normal(size=(per, m))
            zdir /= np.linalg.norm(zdir, axis=1)[:, None]
        tdir = rng.normal(size=(per, j))
        tdir /= np.linalg.norm(tdir, axis=1)[:, None]
        trad = thi * rng.uniform(size=per) ** (1.0 / j)
        pts = origin + (tdir * trad[:, None]) @ basis_t + (zdir * radii[:, None]) @ normal_basis
        vol = shell_vol * ball_vol_t
        neval += per
        nv = f_num(pts)
        dv = f_den(pts)
        num_parts.append(vol * float(np.mean(nv)))
        num_errs.append(vol * float(np.std(nv)) / math.sqrt(per))
        den_parts.append(vol * float(np.mean(dv)))
        den_errs.append(vol * float(np.std(dv)) / math.sqrt(per))
    num = math.fsum(num_parts)
    den = math.fsum(den_parts)
    num_err = math.fsum(num_errs)
    den_err = math.fsum(den_errs)
    return _make_result(num, num_err, den, den_err, neval, "monte-carlo")


def _orthogonal_complement(basis):
    """Orthonormal basis of the orthogonal complement of the given row space."""
    d = basis.shape[1]
    u, sv, vt = np.linalg.svd(basis, full_matrices=True)
    rank = int(np.sum(sv > 1e-12))
    return vt[rank:]


def _hardy_mc(spec, trial, quadspec, directional=False):
    w = spec.weights
    p = spec.p
    body = spec.body

    if isinstance(trial, ProductTrial):
        def f_num(pts):
            grad = trial.gradient(body, pts)
            s = distance(body, pts)
            val = w.value(s) * np.linalg.norm(grad, axis=1) ** p
            return val

        def f_num_dir(pts):
            grad = trial.gradient(body, pts)
            s = distance(body, pts)
            gd = np.abs(np.einsum("ij,ij->i", grad, _grad_dist(body, pts)))
            return w.value(s) * gd**p

        def f_den(pts):
            s = distance(body, pts)
            v = np.abs(trial.value(body, pts)) ** p
            out = np.zeros_like(s)
            m = s > 0
            out[m] = w.value(s[m]) * s[m] ** (-p) * v[m]
            return out

        return _mc_tube_quotient(spec, trial, quadspec, f_num_dir if directional else f_num, f_den)

    lo, hi = trial.profile.support

    def f_num(pts):
        s = distance(body, pts)
        out = np.zeros_like(s)
        m = (s > lo) & (s < hi)
        if np.any(m):
            out[m] = w.value(s[m]) * np.abs(trial.profile.deriv1(s[m])) ** p
        return out

    def f_den(pts):
        s = distance(body, pts)
        out = np.zeros_like(s)
        m = (s > lo) & (s < hi)
        if np.any(m):
            out[m] = w.value(s[m]) * s[m] ** (-p) * np.abs(trial.profile.value(s[m])) ** p
        return out

    if isinstance(body, (SinglePoint, Ball)):
        totals, errs, neval = _mc_annulus(spec, trial, quadspec, [f_num, f_den])
        return _make_result(totals[0], errs[0], totals[1], errs[1], neval, "monte-carlo")
    return _mc_box_quotient(spec, trial, quadspec, f_num, f_den)


def _grad_dist(body, pts):
    from .geometry import distance_gradient

    return distance_gradient(body, pts)


def hardy_quotient(spec: ProblemSpec, trial, quadspec: QuadratureSpec | None = None) -> QuotientResult:
    """First-order Rayleigh quotient int c |grad phi|^p / int c d^-p |phi|^p."""
    quadspec = quadspec or QuadratureSpec()
    if isinstance(trial, ProductTrial):
        _require_product(spec, trial)
        if quadspec.method == "monte-carlo":
            return _hardy_mc(spec, trial, quadspec)
        if quadspec.method == "radial-1d":
            raise ValueError("product trials have no radial-1d reduction")
        return _hardy_product(spec, trial, quadspec)
    if quadspec.method == "monte-carlo":
        _require_compact_radial(spec, trial)
        return _hardy_mc(spec, trial, quadspec)
    if quadspec.method == "tensor-grid":
        return _hardy_radial(spec, trial, QuadratureSpec("tensor-grid", quadspec.rel_tol, quadspec.max_evals, quadspec.seed))
    try:
        return _hardy_radial(spec, trial, quadspec)
    except ValueError:
        if quadspec.method == "auto":
            _require_compact_radial(spec, trial)
            return _hardy_mc(spec, trial, quadspec)
        raise


def hardy_directional_quotient(spec: ProblemSpec, trial, quadspec: QuadratureSpec | None = None) -> QuotientResult:
    """Quotient with |(grad d).(grad phi)|^p in the numerator (<= the full quotient)."""
    quadspec = quadspec or QuadratureSpec()
    if isinstance(trial, ProductTrial):
        if quadspec.method == "monte-carlo":
            return _hardy_mc(spec, trial, quadspec, directional=True)
        return _hardy_product(spec, trial, quadspec, directional=True)
    # radial trials: gradient is parallel to grad d, directional == full
    return hardy_quotient(spec, trial, quadspec)


# ---------------------------------------------------------------------------
# the weighted operator and the second-order quotient


def weighted_operator_apply(spec: ProblemSpec, trial, x, method: str = "auto"):
    """(H phi)(x) for H = -div(c(d) grad .), via the structure-adapted formula.

    Radial trials use the distance-composition identity with the body's exact
    Laplacian of d^2; product trials use the split form
    c(r) chi(r) (-Lap eta)(y) + eta(y) (H_m chi)(r); method="fd" forces central
    finite differences (five-point, with the analytic weight gradient).
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = x[None, :] if scalar else x
    w = spec.weights
    body = spec.body

    if method == "fd":
        out = _h_fd(spec, trial, pts)
        return float(out[0]) if scalar else out

    if isinstance(trial, RadialDistanceTrial):
        s = distance(body, pts)
        lam = np.asarray(body.laplacian_dist_sq(pts), dtype=float)
        c = w.value(s)
        cp = w.derivative(s)
        d1 = np.asarray(trial.profile.deriv1(s))
        d2 = np.asarray(trial.profile.deriv2(s))
        out = -(1.0 / s) * c * d1 * lam / 2.0 - (cp * d1 - (1.0 / s) * c * d1 + c * d2)
        return float(out[0]) if scalar else out

    if isinstance(trial, ProductTrial):
        frame = product_frame(body)
        tau, r, _, _ = trial.split(body, pts)
        out = _grushin_h(spec, trial, frame, np.asarray(tau), np.asarray(r))
        return float(out[0]) if scalar else out

    raise ValueError("unsupported trial structure for the weighted operator")


def _grushin_h(spec, trial, frame, tau, r):
    w = spec.weights
    j, m = frame["j"], frame["m"]
    bump, chi = trial.bump, trial.chi
    c = w.value(r)
    cp = w.derivative(r)
    chi_v = chi.value(r)
    chi_1 = chi.deriv1(r)
    chi_2 = chi.deriv2(r)
    h_m = -c * chi_2 - cp * chi_1 - (m - 1) * c * chi_1 / r
    b_v = bump.value(tau)
    b_1 = bump.deriv1(tau)
    b_2 = bump.deriv2(tau)
    with np.errstate(invalid="ignore", divide="ignore"):
        lap_bump = np.where(tau > 0, b_2 + (j - 1) * np.where(tau > 0, b_1 / np.where(tau > 0, tau, 1.0), 0.0), (j) * b_2)
    return c * chi_v * (-lap_bump) + b_v * h_m


def _h_fd(spec, trial, pts, h_rel=1e-3):
    """-c Lap(phi) - c'(d) (grad d).(grad phi) by five-point central differences."""
    body = spec.body
    w = spec.weights
    d = spec.d
    out = np.empty(len(pts))
    for idx, x in enumerate(pts):
        s = distance(body, x)
        h = max(1e-5, h_rel * s)
        lap = 0.0
        grad = np.zeros(d)
        for axis in range(d):
            e = np.zeros(d)
            e[axis] = h
            stencil = np.array([x - 2 * e, x - e, x, x + e, x + 2 * e])
            v = np.array([float(trial.value(body, p_)) for p_ in stencil])
            lap += (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
            grad[axis] = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
        gd = _grad_dist(body, x[None, :])[0]
        out[idx] = -w.value(s) * lap - w.derivative(s) * float(gd @ grad)
    return out


def _rellich_radial(spec, trial, quadspec):
    _require_compact_radial(spec, trial)
    kappa = _kappa_profile(spec.body)
    if kappa is None:
        raise ValueError("no radial reduction of H for this body; use monte-carlo")
    if trial.profile.smoothness == "C0":
        raise ValueError("second-order quotient needs a trial with continuous first derivative")
    area = _steiner_fn(spec.body)
    w = spec.weights
    p = spec.p
    prof = trial.profile
    lo, hi = prof.support
    h_prof = _h_radial_profile(w, prof, kappa)

    def f_num(s):
        return area(s) * np.abs(h_prof(s)) ** p

    def f_den(s):
        return area(s) * w.value(s) ** p * s ** (-2.0 * p) * np.abs(prof.value(s)) ** p

    cells_n = _build_cells(lo, hi, prof.knots, roots_fn=h_prof)
    cells_d = _build_cells(lo, hi, prof.knots)
    if quadspec.method in ("auto", "radial-1d"):
        num, ne, n1 = _adaptive_1d(f_num, cells_n, quadspec.rel_tol)
        den, de, n2 = _adaptive_1d(f_den, cells_d, quadspec.rel_tol)
        method = "radial-1d"
    else:
        num, ne, n1 = _integrate_cells_1d(f_num, cells_n)
        den, de, n2 = _integrate_cells_1d(f_den, cells_d)
        method = "tensor-grid"
    return _make_result(num, ne, den, de, n1 + n2, method)


def _rellich_product(spec, trial, quadspec):
    frame = _require_product(spec, trial)
    if trial.chi.smoothness == "C0" or trial.bump.smoothness == "C0":
        raise ValueError("second-order quotient needs C1 profiles with piecewise second derivatives")
    w = spec.weights
    p = spec.p
    bump, chi = trial.bump, trial.chi
    wt = _tangential_weight(frame)
    wn = _normal_weight(frame)
    tlo, thi = bump.support
    rlo, rhi = chi.support

    def h_m(r):
        c = w.value(r)
        cp = w.derivative(r)
        return -c * chi.deriv2(r) - cp * chi.deriv1(r) - (frame["m"] - 1) * c * chi.deriv1(r) / r

    cells_t = _build_cells(max(tlo, 0.0), thi, bump.knots)
    cells_r = _build_cells(rlo, rhi, chi.knots, roots_fn=h_m)

    def f_num(T, R):
        c = w.value(R)
        b2 = bump.deriv2(T)
        with np.errstate(invalid="ignore", divide="ignore"):
            lap_b = b2 + (frame["j"] - 1) * np.where(T > 0, bump.deriv1(T) / np.where(T > 0, T, 1.0), 0.0)
        val = c * chi.value(R) * (-lap_b) + bump.value(T) * h_m(R)
        return wt(T) * wn(R) * np.abs(val) ** p

    def den_t(t):
        return wt(t) * np.abs(bump.value(t)) ** p

    def den_r(r):
        return wn(r) * w.value(r) ** p * r ** (-2.0 * p) * np.abs(chi.value(r)) ** p

    num, num_err, n1 = _integrate_cells_2d(f_num, cells_t, cells_r)
    dt, dte, n2 = _integrate_cells_1d(den_t, cells_t)
    dr, dre, n3 = _integrate_cells_1d(den_r, cells_r)
    den = dt * dr
    den_err = abs(dt) * dre + abs(dr) * dte
    return _make_result(num, num_err, den, den_err, n1 + n2 + n3, "tensor-grid")


def _rellich_mc(spec, trial, quadspec):
    w = spec.weights
    p = spec.p
    body = spec.body

    if isinstance(trial, ProductTrial):
        def f_num(pts):
            return np.abs(weighted_operator_apply(spec, trial, pts)) ** p

        def f_den(pts):
            s = distance(body, pts)
            out = np.zeros_like(s)
            m = s > 0
            out[m] = w.value(s[m]) ** p * s[m] ** (-2.0 * p) * np.abs(trial.value(body, pts[m])) ** p
            return out

        return _mc_tube_quotient(spec, trial, quadspec, f_num, f_den)

    lo, hi = trial.profile.support

    def f_num(pts):
        s = distance(body, pts)
        out = np.zeros_like(s)
        msk = (s > lo) & (s < hi)
        if np.any(msk):
            out[msk] = np.abs(weighted_operator_apply(spec, trial, pts[msk])) ** p
        return out

    def f_den(pts):
        s = distance(body, pts)
        out = np.zeros_like(s)
        msk = (s > lo) & (s < hi)
        if np.any(msk):
            out[msk] = w.value(s[msk]) ** p * s[msk] ** (-2.0 * p) * np.abs(trial.profile.value(s[msk])) ** p
        return out

    if isinstance(body, (SinglePoint, Ball)):
        totals, errs, neval = _mc_annulus(spec, trial, quadspec, [f_num, f_den])
        return _make_result(totals[0], errs[0], totals[1], errs[1], neval, "monte-carlo")
    return _mc_box_quotient(spec, trial, quadspec, f_num, f_den)


def rellich_quotient(spec: ProblemSpec, trial, quadspec: QuadratureSpec | None = None) -> QuotientResult:
    """Second-order quotient int |H phi|^p / int (c d^-2 |phi|)^p."""
    quadspec = quadspec or QuadratureSpec()
    if spec.p <= 1:
        raise ValueError("the second-order quotient needs p > 1")
    if isinstance(trial, ProductTrial):
        if quadspec.method == "monte-carlo":
            return _rellich_mc(spec, trial, quadspec)
        if quadspec.method == "radial-1d":
            raise ValueError("product trials have no radial-1d reduction")
        return _rellich_product(spec, trial, quadspec)
    if trial.profile.smoothness == "C0":
        raise ValueError("second-order quotient needs a trial with continuous first derivative")
    if quadspec.method == "monte-carlo":
        _require_compact_radial(spec, trial)
        return _rellich_mc(spec, trial, quadspec)
    try:
        return _rellich_radial(spec, trial, quadspec)
    except ValueError:
        if quadspec.method == "auto":
            _require_compact_radial(spec, trial)
            return _rellich_mc(spec, trial, quadspec)
        raise


# ---------------------------------------------------------------------------
# elementary split inequality and the first-order split bound


def lambda_split(s: float, t: float, lam: float, p: float) -> float:
    """Right-hand side (1-lam)^-(p-1) s^p + lam^-(p-1) t^p of the split inequality."""
    if s < 0 or t < 0:
        raise ValueError("split inequality needs s, t >= 0")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if p <= 1:
        raise ValueError("split inequality needs p > 1")
    return (1.0 - lam) ** (-(p - 1.0)) * s**p + lam ** (-(p - 1.0)) * t**p


def split_equality_point(s: float, t: float, p: float) -> float:
    """lambda* = t/(s+t) minimizing the split bound; at it the bound equals (s+t)^p."""
    if s < 0 or t < 0 or s + t == 0:
        raise ValueError("equality point needs s, t >= 0, not both zero")
    return t / (s + t)


@dataclass
class SplitBound:
    first_term: float
    ratio: float
    bound: float
    ratio_numerator: float
    ratio_denominator: float
    neval: int

    def to_json(self):
        return {
            "first_term": self.first_term,
            "ratio": self.ratio,
            "bound": self.bound,
            "ratio_numerator": self.ratio_numerator,
            "ratio_denominator": self.ratio_denominator,
            "neval": self.neval,
        }


def hardy_split_bound(spec: ProblemSpec, trial: ProductTrial, beta: float, lam: float, quadspec=None) -> SplitBound:
    """Upper bound (1-lam)^-(p-1) |(beta+delta-p)/p|^p + lam^-(p-1) I1/I2 on mu_p.

    I1 = int d^(p-beta) |grad phi|^p and I2 = int d^(-beta) |phi|^p over the
    product-trial support; requires a pure power weight (delta = delta').
    """
    if spec.weights.delta != spec.weights.delta_prime:
        raise ValueError("the split bound is stated for pure power weights (delta = delta')")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    quadspec = quadspec or QuadratureSpec()
    frame = _require_product(spec, trial)
    p, delta = spec.p, spec.weights.delta
    bump, chi = trial.bump, trial.chi
    wt = _tangential_weight(frame)
    wn = _normal_weight(frame)
    cells_t = _build_cells(max(bump.support[0], 0.0), bump.support[1], bump.knots)
    cells_r = _build_cells(chi.support[0], chi.support[1], chi.knots, roots_fn=chi.deriv1)

    def f_i1(T, R):
        grad_sq = (bump.deriv1(T) * chi.value(R)) ** 2 + (bump.value(T) * chi.deriv1(R)) ** 2
        return wt(T) * wn(R) * R ** (p - beta) * grad_sq ** (p / 2.0)

    i1, i1e, n1 = _integrate_cells_2d(f_i1, cells_t, cells_r)

    def den_t(t):
        return wt(t) * np.abs(bump.value(t)) ** p

    def den_r(r):
        return wn(r) * r ** (-beta) * np.abs(chi.value(r)) ** p

    dt, dte, n2 = _integrate_cells_1d(den_t, cells_t)
    dr, dre, n3 = _integrate_cells_1d(den_r, cells_r)
    i2 = dt * dr
    ratio = i1 / i2
    first = (1.0 - lam) ** (-(p - 1.0)) * abs((beta + delta - p) / p) ** p
    return SplitBound(
        first_term=first,
        ratio=ratio,
        bound=first + lam ** (-(p - 1.0)) * ratio,
        ratio_numerator=i1,
        ratio_denominator=i2,
        neval=n1 + n2 + n3,
    )


# ---------------------------------------------------------------------------
# pointwise lower-bound residuals for the decay profile


def lemma31_residual(spec: ProblemSpec, alpha: float, alpha_prime: float, points):
    """Pointwise residual H chi_Omega - b_alpha d^-2 c_Omega chi_Omega.

    chi is the two-exponent decay profile composed with the distance field; the
    residual must be nonnegative (up to rounding at the magnitude of the two
    sides) for every spec.  Returns (min residual, residuals, scales) where
    scales carries |H chi| + |b_alpha d^-2 c chi| per point for tolerance
    normalization.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    body = spec.body
    w = spec.weights
    chi = rellich_profile(alpha, alpha_prime)
    s = distance(body, pts)
    if np.any(s <= 0):
        raise ValueError("residual points must lie outside K")
    lam = np.asarray(body.laplacian_dist_sq(pts), dtype=float)
    c = w.value(s)
    cp = w.derivative(s)
    d1 = np.asarray(chi.deriv1(s))
    d2 = np.asarray(chi.deriv2(s))
    h_chi = -(1.0 / s) * c * d1 * lam / 2.0 - (cp * d1 - (1.0 / s) * c * d1 + c * d2)
    b = b_alpha(spec, alpha, alpha_prime)
    rhs = b * s ** (-2.0) * c * np.asarray(chi.value(s))
    residual = h_chi - rhs
    scale = np.abs(h_chi) + np.abs(rhs)
    return float(np.min(residual)), residual, scale


# ---------------------------------------------------------------------------
# plateau-cutoff decay on a quadrant (tangential-factor gradient quotient)


def plateau_cutoff_quotient(r: float, p: float, ramp_width: float = 1.0) -> float:
    """Quotient int |grad eta_r|^p / int |eta_r|^p for a plateau cutoff on a quadrant.

    eta_r(y1, y2) = F(y1) F(y2) on the quadrant in the plane, with F rising
    smoothly over [0, ramp_width] and decaying over [r, r+1]. The quotient
    decays like 1/r, which is what drives the tangential infimum to zero for
    sets whose dimension at infinity equals their dimension.
    """
    if r <= 2 * ramp_width:
        raise ValueError("plateau radius must exceed the ramp width")
    F = smooth_step_up(0.0, ramp_width) * smooth_cutoff(r, r + 1.0)
    knots = tuple(sorted(set(F.knots)))
    cells = _build_cells(0.0, r + 1.0, knots, max_log=1e9)

    def num_f(Y1, Y2):
        g = (F.deriv1(Y1) * F.value(Y2)) ** 2 + (F.value(Y1) * F.deriv1(Y2)) ** 2
        return g ** (p / 2.0)

    num, _, _ = _integrate_cells_2d(num_f, cells, cells)

    def den_f(y):
        return np.abs(F.value(y)) ** p

    den_1d, _, _ = _integrate_cells_1d(den_f, cells)
    return num / (den_1d * den_1d)
