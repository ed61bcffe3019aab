"""Spatial trial functions on the complement of a convex body.

Three structures, all driven by 1-D profiles with analytic derivatives:

* RadialDistanceTrial: phi(x) = profile(d(x)), compactly supported in Omega
  when the body is bounded and the profile support stays away from 0.
* PowerLocalizedTrial: d(x)^(-alpha) times a localizer profile (a convenience
  wrapper that records alpha for integrability bookkeeping).
* ProductTrial: phi = bump(tangential radius) * chi(normal radius) for affine
  subspaces and halfspaces, where the distance field is exactly the normal
  radius on the support.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import AffineSubspace, ConvexBody, Halfspace, distance, distance_gradient
from .profiles import Profile1D, power_profile, sigma_profile

__all__ = [
    "RadialDistanceTrial",
    "PowerLocalizedTrial",
    "ProductTrial",
    "product_frame",
    "power_ramp_trial",
    "power_sigma_trial",
]


@dataclass
class RadialDistanceTrial:
    """phi(x) = profile(d(x)); gradient profile'(d) grad d."""

    profile: Profile1D
    structure: str = field(default="radial-distance", init=False)

    def support_shell(self):
        return self.profile.support

    def value(self, body: ConvexBody, x):
        return self.profile.value(distance(body, x))

    def gradient(self, body: ConvexBody, x):
        x = np.asarray(x, dtype=float)
        s = distance(body, x)
        g = distance_gradient(body, x)
        d1 = self.profile.deriv1(s)
        if x.ndim == 1:
            return d1 * g
        return np.asarray(d1)[:, None] * g

    def scaled(self, c: float):
        return RadialDistanceTrial(self.profile.scaled(c))


@dataclass
class PowerLocalizedTrial(RadialDistanceTrial):
    """d(x)^(-alpha) * localizer(d(x)); alpha kept for integrability checks."""

    alpha: float = 0.0
    localizer: Profile1D | None = None

    def __init__(self, alpha: float, localizer: Profile1D):
        profile = power_profile(alpha) * localizer
        profile.meta["alpha"] = alpha
        super().__init__(profile=profile)
        self.alpha = alpha
        self.localizer = localizer
        self.structure = "power-localized"


def product_frame(body: ConvexBody):
    """Tangential/normal dimensions (j, m) and reference data for product trials."""
    if isinstance(body, AffineSubspace):
        k = body.body_dim
        return {"j": k, "m": body.d - k, "one_sided": False}
    if isinstance(body, Halfspace):
        return {"j": body.d - 1, "m": 1, "one_sided": True}
    raise ValueError("product trials require an affine subspace or halfspace body")


@dataclass
class ProductTrial:
    """phi = bump(|tangential|) * chi(|normal|); d(x) equals the normal radius."""

    bump: Profile1D
    chi: Profile1D
    structure: str = field(default="product", init=False)

    def split(self, body: ConvexBody, x):
        """(tau, r, u_tau, u_norm): tangential/normal radii and unit directions."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 1
        pts = x[None, :] if scalar else x
        if isinstance(body, AffineSubspace):
            rel = pts - body.offset
            y = rel @ body.basis.T
            proj = body.offset + y @ body.basis
            zvec = pts - proj
            tau = np.linalg.norm(y, axis=1)
            r = np.linalg.norm(zvec, axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                u_tau = np.where(tau[:, None] > 0, (y / np.where(tau[:, None] > 0, tau[:, None], 1.0)) @ body.basis, 0.0)
                u_norm = np.where(r[:, None] > 0, zvec / np.where(r[:, None] > 0, r[:, None], 1.0), 0.0)
        elif isinstance(body, Halfspace):
            x0 = body.normal * body.offset
            rel = pts - x0
            r = rel @ body.normal
            tang = rel - np.outer(r, body.normal)
            tau = np.linalg.norm(tang, axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                u_tau = np.where(tau[:, None] > 0, tang / np.where(tau[:, None] > 0, tau[:, None], 1.0), 0.0)
            u_norm = np.broadcast_to(body.normal, pts.shape)
        else:
            raise ValueError("product trials require an affine subspace or halfspace body")
        if scalar:
            return float(tau[0]), float(r[0]), u_tau[0], u_norm[0]
        return tau, r, u_tau, u_norm

    def value(self, body: ConvexBody, x):
        tau, r, _, _ = self.split(body, x)
        return self.bump.value(tau) * self.chi.value(r)

    def gradient(self, body: ConvexBody, x):
        tau, r, u_tau, u_norm = self.split(body, x)
        bt = np.asarray(self.bump.deriv1(tau))
        bv = np.asarray(self.bump.value(tau))
        cv = np.asarray(self.chi.value(r))
        cd = np.asarray(self.chi.deriv1(r))
        if np.ndim(tau) == 0:
            return float(bt) * float(cv) * u_tau + float(bv) * float(cd) * u_norm
        return bt[:, None] * cv[:, None] * u_tau + bv[:, None] * cd[:, None] * u_norm

    def scaled(self, c: float):
        return ProductTrial(self.bump.scaled(c), self.chi)


def _threshold_alpha(d_minus_dH: float, delta: float, p: float) -> float:
    """Integrability-threshold exponent (d - d_H + delta - p)/p of the local estimates."""
    return (d_minus_dH + delta - p) / p


def power_ramp_trial(spec, n: float, cutoff: Profile1D, alpha: float | None = None):
    """Hardy sweep trial: threshold-power core with a log ramp, per body structure."""
    from .profiles import log_ramp  # local import to keep module init light

    w = spec.weights
    if alpha is None:
        alpha = _threshold_alpha(spec.d - spec.d_H, min(w.delta, w.delta_prime), spec.p)
    profile = power_profile(alpha) * log_ramp(n) * cutoff
    profile.meta.update({"alpha": alpha, "n": n})
    return profile


def power_sigma_trial(spec, n: float, cutoff: Profile1D, alpha: float | None = None):
    """Rellich sweep trial profile: threshold power times the C1-smooth ramp."""
    w = spec.weights
    if alpha is None:
        alpha = (spec.d - spec.d_H + spec.p * min(w.delta, w.delta_prime) - 2.0 * spec.p) / spec.p
    profile = power_profile(alpha) * sigma_profile(n, cutoff)
    profile.meta.update({"alpha": alpha, "n": n})
    return profile
