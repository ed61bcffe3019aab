"""Convex bodies with exact nearest-point projection and distance-field machinery.

Every body K is a closed convex subset of R^d (K != R^d).  The complement
Omega = R^d \\ K carries the distance field d(x) = |x - n(x)| to the unique
nearest point n(x) in K; its gradient is the unit vector (x - n(x))/d(x).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "ConvexBody",
    "SinglePoint",
    "AffineSubspace",
    "Halfspace",
    "HPolytope",
    "VPolytope",
    "Ball",
    "Box",
    "GeometryReport",
    "KInfResult",
    "project",
    "distance",
    "distance_gradient",
    "hessian_distance_sq",
    "boundary_dimension",
    "dimension_at_infinity",
    "segment_convexity_check",
    "geometry_report",
    "body_from_json",
    "sample_outside",
    "sample_inside",
    "unit_ball_volume",
    "sphere_area",
]

MEMBERSHIP_RTOL = 1e-12  # x in K  iff  dist(K, x) <= MEMBERSHIP_RTOL * (1 + |x|)
ORTHONORMAL_TOL = 1e-12
_LP_TOL = 1e-9
_RANK_TOL = 1e-10


def unit_ball_volume(j: int) -> float:
    """Volume of the unit ball in R^j (j = 0 gives 1)."""
    return math.pi ** (j / 2.0) / math.gamma(j / 2.0 + 1.0)


def sphere_area(j: int) -> float:
    """Surface measure of the unit sphere S^(j-1) in R^j; sphere_area(1) = 2."""
    if j < 1:
        raise ValueError("sphere_area needs ambient dimension >= 1")
    return 2.0 * math.pi ** (j / 2.0) / math.gamma(j / 2.0)


def _as_points(x, d):
    """Return (pts, scalar_input) with pts of shape (N, d)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != d:
            raise ValueError(f"point has dimension {arr.shape[0]}, body lives in R^{d}")
        return arr[None, :], True
    if arr.ndim == 2:
        if arr.shape[1] != d:
            raise ValueError(f"points have dimension {arr.shape[1]}, body lives in R^{d}")
        return arr, False
    raise ValueError("expected a point (d,) or batch of points (N, d)")


class ConvexBody:
    """Base class; subclasses provide exact projection and dimension data."""

    kind = "abstract"

    # -- projection / membership -------------------------------------------
    def project(self, x):
        pts, scalar = _as_points(x, self.d)
        out = self._project(pts)
        return out[0] if scalar else out

    def _project(self, pts):
        raise NotImplementedError

    def contains(self, x, rtol=MEMBERSHIP_RTOL):
        pts, scalar = _as_points(x, self.d)
        dist = np.linalg.norm(pts - self._project(pts), axis=1)
        ok = dist <= rtol * (1.0 + np.linalg.norm(pts, axis=1))
        return bool(ok[0]) if scalar else ok

    # -- dimensions ---------------------------------------------------------
    @property
    def d(self) -> int:
        raise NotImplementedError

    @property
    def body_dim(self) -> int:
        """Dimension k of the affine hull of K."""
        raise NotImplementedError

    @property
    def recession_dim(self) -> int:
        """Dimension of the recession cone; equals the dimension at infinity."""
        raise NotImplementedError

    @property
    def is_bounded(self) -> bool:
        return self.recession_dim == 0

    def affine_hull(self):
        """(origin, basis) with origin in K and basis an orthonormal (k, d) array."""
        raise NotImplementedError

    def bounding_box(self):
        """(lo, hi) per-axis bounds of K; entries may be +-inf."""
        raise NotImplementedError

    # -- distance-field analytics --------------------------------------------
    def steiner_area_coeffs(self):
        """Ascending coefficients of A(s), the surface area of the s-offset body.

        Integrals of F(d(x)) over Omega reduce exactly to
        int_0^inf F(s) A(s) ds.  Returns None when K is unbounded or the
        coefficients are not implemented for the variant.
        """
        return None

    def laplacian_dist_sq_profile(self):
        """Laplacian of d^2 as a function of s = d(x) alone, or None."""
        return None

    def laplacian_dist_sq(self, x):
        """Laplacian of d^2 at x (exact a.e. in Omega)."""
        prof = self.laplacian_dist_sq_profile()
        if prof is None:
            raise NotImplementedError(f"no analytic Laplacian for {self.kind}")
        pts, scalar = _as_points(x, self.d)
        s = np.linalg.norm(pts - self._project(pts), axis=1)
        out = prof(s)
        return float(out[0]) if scalar else out

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(eq=False)
class SinglePoint(ConvexBody):
    point: np.ndarray
    kind = "single_point"

    def __post_init__(self):
        self.point = np.atleast_1d(np.asarray(self.point, dtype=float))

    @property
    def d(self):
        return self.point.shape[0]

    @property
    def body_dim(self):
        return 0

    @property
    def recession_dim(self):
        return 0

    def _project(self, pts):
        return np.broadcast_to(self.point, pts.shape).copy()

    def affine_hull(self):
        return self.point.copy(), np.zeros((0, self.d))

    def bounding_box(self):
        return self.point.copy(), self.point.copy()

    def steiner_area_coeffs(self):
        c = np.zeros(self.d)
        c[self.d - 1] = sphere_area(self.d)
        return c

    def laplacian_dist_sq_profile(self):
        d = self.d
        return lambda s: 2.0 * d * np.ones_like(np.asarray(s, dtype=float))

    def to_json(self):
        return {"kind": self.kind, "point": self.point.tolist()}


@dataclass(eq=False)
class AffineSubspace(ConvexBody):
    offset: np.ndarray
    basis: np.ndarray  # (k, d), orthonormal rows

    kind = "affine_subspace"

    def __post_init__(self):
        self.offset = np.atleast_1d(np.asarray(self.offset, dtype=float))
        self.basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if self.basis.shape[1] != self.offset.shape[0]:
            raise ValueError("basis vectors must match the offset dimension")
        k = self.basis.shape[0]
        if k < 1 or k >= self.offset.shape[0]:
            raise ValueError("affine subspace dimension must be in 1..d-1")
        gram = self.basis @ self.basis.T
        if np.max(np.abs(gram - np.eye(k))) > 1e-10:
            raise ValueError("basis must be orthonormal")

    @property
    def d(self):
        return self.offset.shape[0]

    @property
    def body_dim(self):
        return self.basis.shape[0]

    @property
    def recession_dim(self):
        return self.basis.shape[0]

    def _project(self, pts):
        rel = pts - self.offset
        return self.offset + (rel @ self.basis.T) @ self.basis

    def affine_hull(self):
        return self.offset.copy(), self.basis.copy()

    def bounding_box(self):
        lo = np.full(self.d, -np.inf)
        hi = np.full(self.d, np.inf)
        return lo, hi

    def laplacian_dist_sq_profile(self):
        m = self.d - self.body_dim
        return lambda s: 2.0 * m * np.ones_like(np.asarray(s, dtype=float))

    def to_json(self):
        return {
            "kind": self.kind,
            "offset": self.offset.tolist(),
            "basis": self.basis.tolist(),
        }


@dataclass(eq=False)
class Halfspace(ConvexBody):
    normal: np.ndarray
    offset: float  # K = {x : normal . x <= offset}

    kind = "halfspace"

    def __post_init__(self):
        self.normal = np.atleast_1d(np.asarray(self.normal, dtype=float))
        nrm = np.linalg.norm(self.normal)
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError("halfspace normal must be a unit vector")
        self.normal = self.normal / nrm
        self.offset = float(self.offset)

    @property
    def d(self):
        return self.normal.shape[0]

    @property
    def body_dim(self):
        return self.d

    @property
    def recession_dim(self):
        return self.d

    def _project(self, pts):
        slack = pts @ self.normal - self.offset
        return pts - np.outer(np.maximum(slack, 0.0), self.normal)

    def affine_hull(self):
        return self.normal * self.offset, np.eye(self.d)

    def bounding_box(self):
        lo = np.full(self.d, -np.inf)
        hi = np.full(self.d, np.inf)
        return lo, hi

    def laplacian_dist_sq_profile(self):
        return lambda s: 2.0 * np.ones_like(np.asarray(s, dtype=float))

    def to_json(self):
        return {"kind": self.kind, "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float

    kind = "ball"

    def __post_init__(self):
        self.center = np.atleast_1d(np.asarray(self.center, dtype=float))
        self.radius = float(self.radius)
        if self.radius <= 0:
            raise ValueError("ball radius must be strictly positive")

    @property
    def d(self):
        return self.center.shape[0]

    @property
    def body_dim(self):
        return self.d

    @property
    def recession_dim(self):
        return 0

    def _project(self, pts):
        rel = pts - self.center
        nrm = np.linalg.norm(rel, axis=1)
        outside = nrm > self.radius
        out = pts.copy()
        if np.any(outside):
            out[outside] = self.center + rel[outside] * (self.radius / nrm[outside])[:, None]
        return out

    def affine_hull(self):
        return self.center.copy(), np.eye(self.d)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def steiner_area_coeffs(self):
        # A(s) = d kappa_d (R + s)^(d-1), expanded in powers of s
        d, R = self.d, self.radius
        pref = d * unit_ball_volume(d)
        return np.array(
            [pref * math.comb(d - 1, j) * R ** (d - 1 - j) for j in range(d)]
        )

    def laplacian_dist_sq_profile(self):
        d, R = self.d, self.radius
        return lambda s: 2.0 + 2.0 * np.asarray(s, dtype=float) * (d - 1) / (
            R + np.asarray(s, dtype=float)
        )

    def to_json(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


@dataclass(eq=False)
class Box(ConvexBody):
    lower: np.ndarray
    upper: np.ndarray

    kind = "box"

    def __post_init__(self):
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape:
            raise ValueError("box bounds must have equal shapes")
        if np.any(self.lower > self.upper):
            raise ValueError("box needs lower <= upper componentwise")

    @property
    def d(self):
        return self.lower.shape[0]

    @property
    def body_dim(self):
        return int(np.sum(self.upper > self.lower))

    @property
    def recession_dim(self):
        return 0

    def _project(self, pts):
        return np.clip(pts, self.lower, self.upper)

    def affine_hull(self):
        free = self.upper > self.lower
        basis = np.eye(self.d)[free]
        return self.lower.copy(), basis

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def steiner_area_coeffs(self):
        # Vol(K + sB) = sum_j e_{d-j}(L) kappa_j s^j with e_m the elementary
        # symmetric polynomials of the side lengths; A(s) is its derivative.
        lengths = self.upper - self.lower
        elem = np.array([1.0])
        for L in lengths:
            elem = np.convolve(elem, np.array([1.0, L]))  # builds prod (t + L_i)
        e = elem  # elem[i] = e_i(L), elementary symmetric of order i
        d = self.d
        coeffs = np.zeros(d)
        for j in range(1, d + 1):
            coeffs[j - 1] = j * unit_ball_volume(j) * e[d - j]
        return coeffs

    def _feature_codim(self, pts):
        """Number of clamped axes of the nearest feature, per point."""
        proj = self._project(pts)
        at_lo = np.isclose(proj, self.lower, rtol=0.0, atol=1e-13)
        at_hi = np.isclose(proj, self.upper, rtol=0.0, atol=1e-13)
        return np.sum(at_lo | at_hi, axis=1)

    def laplacian_dist_sq(self, x):
        pts, scalar = _as_points(x, self.d)
        out = 2.0 * self._feature_codim(pts).astype(float)
        return float(out[0]) if scalar else out

    def to_json(self):
        return {"kind": self.kind, "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(eq=False)
class VPolytope(ConvexBody):
    vertices: np.ndarray  # (m, d)

    kind = "v_polytope"

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if self.vertices.shape[0] < 1:
            raise ValueError("v-polytope needs at least one vertex")
        self._subset_cache = None

    @property
    def d(self):
        return self.vertices.shape[1]

    @property
    def body_dim(self):
        rel = self.vertices - self.vertices.mean(axis=0)
        if self.vertices.shape[0] == 1:
            return 0
        sv = np.linalg.svd(rel, compute_uv=False)
        scale = max(1.0, sv[0] if sv.size else 1.0)
        return int(np.sum(sv > _RANK_TOL * scale))

    @property
    def recession_dim(self):
        return 0

    def _subsets(self):
        if self._subset_cache is None:
            m = self.vertices.shape[0]
            max_size = min(m, self.d + 1)
            subs = []
            for size in range(1, max_size + 1):
                subs.extend(itertools.combinations(range(m), size))
            self._subset_cache = subs
        return self._subset_cache

    def _project_one(self, x):
        V = self.vertices
        scale = 1.0 + np.linalg.norm(x)
        best = None
        best_dist = np.inf
        for sub in self._subsets():
            Vs = V[list(sub)]
            v0 = Vs[0]
            U = Vs[1:] - v0  # (j-1, d)
            if U.shape[0] == 0:
                y = v0
                lam_ok = True
            else:
                c, *_ = np.linalg.lstsq(U.T, x - v0, rcond=None)
                y = v0 + c @ U
                lam0 = 1.0 - np.sum(c)
                lam_ok = lam0 >= -1e-10 and np.all(c >= -1e-10)
            if not lam_ok:
                continue
            gap = (V - y) @ (x - y)
            if np.max(gap) > 1e-9 * scale * scale:
                continue  # fails the variational optimality certificate
            dist = np.linalg.norm(x - y)
            if dist < best_dist:
                best_dist = dist
                best = y
        if best is None:
            # certificate failed everywhere from conditioning; nearest vertex fallback
            idx = np.argmin(np.linalg.norm(V - x, axis=1))
            best = V[idx]
        return best

    def _project(self, pts):
        if self.vertices.shape[0] == 1:
            return np.broadcast_to(self.vertices[0], pts.shape).copy()
        if self.vertices.shape[0] == 2:
            # segment: exact parameter clamp
            a, b = self.vertices
            ab = b - a
            denom = float(ab @ ab)
            t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
            return a + t[:, None] * ab
        return np.array([self._project_one(x) for x in pts])

    def affine_hull(self):
        v0 = self.vertices.mean(axis=0)
        rel = self.vertices - v0
        if self.vertices.shape[0] == 1:
            return self.vertices[0].copy(), np.zeros((0, self.d))
        u, sv, vt = np.linalg.svd(rel, full_matrices=False)
        scale = max(1.0, sv[0] if sv.size else 1.0)
        keep = sv > _RANK_TOL * scale
        return v0, vt[keep]

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def steiner_area_coeffs(self):
        m, d = self.vertices.shape
        if m == 1:
            c = np.zeros(d)
            c[d - 1] = sphere_area(d)
            return c
        if m == 2:
            L = float(np.linalg.norm(self.vertices[1] - self.vertices[0]))
            c = np.zeros(d)
            c[d - 1] = d * unit_ball_volume(d)
            if d >= 2:
                c[d - 2] = L * (d - 1) * unit_ball_volume(d - 1)
            return c
        return None

    def laplacian_dist_sq(self, x):
        pts, scalar = _as_points(x, self.d)
        proj = self._project(pts)
        out = np.empty(len(pts))
        for i, (xi, ni) in enumerate(zip(pts, proj)):
            active = [
                v
                for v in self.vertices
                if abs((v - ni) @ (xi - ni)) <= 1e-10 * (1.0 + xi @ xi)
            ]
            if len(active) <= 1:
                j = 0
            else:
                rel = np.array(active) - active[0]
                sv = np.linalg.svd(rel, compute_uv=False)
                j = int(np.sum(sv > _RANK_TOL * max(1.0, sv[0])))
            out[i] = 2.0 * (self.d - j)
        return float(out[0]) if scalar else out

    def to_json(self):
        return {"kind": self.kind, "vertices": self.vertices.tolist()}


@dataclass(eq=False)
class HPolytope(ConvexBody):
    normals: np.ndarray  # (m, d)
    offsets: np.ndarray  # (m,),  K = {x : normals @ x <= offsets}

    kind = "h_polytope"

    def __post_init__(self):
        self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        self.offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if self.normals.shape[0] != self.offsets.shape[0]:
            raise ValueError("normals and offsets must pair up")
        if self.normals.shape[0] < 1:
            raise ValueError("h-polytope needs at least one halfspace")
        if np.any(np.linalg.norm(self.normals, axis=1) < 1e-14):
            raise ValueError("h-polytope has a zero normal")
        res = linprog(
            np.zeros(self.d), A_ub=self.normals, b_ub=self.offsets,
            bounds=[(None, None)] * self.d, method="highs",
        )
        if res.status == 2:
            raise ValueError("h-polytope is empty")
        self._cache = {}

    @property
    def d(self):
        return self.normals.shape[1]

    def _interior_point(self):
        """A feasible point, centered as much as possible (Chebyshev-style)."""
        if "center" not in self._cache:
            m, d = self.normals.shape
            norms = np.linalg.norm(self.normals, axis=1)
            # variables (x, r): maximize r subject to a_i.x + r|a_i| <= b_i, r <= 1e6
            c = np.zeros(d + 1)
            c[-1] = -1.0
            A = np.hstack([self.normals, norms[:, None]])
            A = np.vstack([A, np.zeros((1, d + 1))])
            A[-1, -1] = 1.0
            b = np.concatenate([self.offsets, [1e6]])
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * (d + 1), method="highs")
            if not res.success:
                res2 = linprog(
                    np.zeros(d), A_ub=self.normals, b_ub=self.offsets,
                    bounds=[(None, None)] * d, method="highs",
                )
                self._cache["center"] = res2.x
            else:
                self._cache["center"] = res.x[:d]
        return self._cache["center"]

    def _implicit_rows(self):
        """Indices of constraints that hold with equality on all of K."""
        if "implicit" not in self._cache:
            rows = []
            for i in range(self.normals.shape[0]):
                res = linprog(
                    self.normals[i], A_ub=self.normals, b_ub=self.offsets,
                    bounds=[(None, None)] * self.d, method="highs",
                )
                if res.status == 3:
                    continue  # slack unbounded
                if res.success and self.offsets[i] - res.fun <= _LP_TOL:
                    rows.append(i)
            self._cache["implicit"] = rows
        return self._cache["implicit"]

    @property
    def body_dim(self):
        rows = self._implicit_rows()
        if not rows:
            return self.d
        rank = np.linalg.matrix_rank(self.normals[rows], tol=_RANK_TOL)
        return self.d - int(rank)

    @property
    def recession_dim(self):
        if "rec_dim" not in self._cache:
            A = self.normals
            m, d = A.shape
            implicit = []
            for i in range(m):
                # can a_i . v < 0 inside the recession cone {Av <= 0}?
                res = linprog(
                    A[i], A_ub=A, b_ub=np.zeros(m),
                    bounds=[(-1.0, 1.0)] * d, method="highs",
                )
                if res.success and res.fun < -_LP_TOL:
                    continue
                implicit.append(i)
            if not implicit:
                self._cache["rec_dim"] = d
            else:
                rank = np.linalg.matrix_rank(A[implicit], tol=_RANK_TOL)
                self._cache["rec_dim"] = d - int(rank)
        return self._cache["rec_dim"]

    def contains(self, x, rtol=MEMBERSHIP_RTOL):
        pts, scalar = _as_points(x, self.d)
        slack = pts @ self.normals.T - self.offsets
        ok = np.all(slack <= rtol * (1.0 + np.linalg.norm(pts, axis=1))[:, None], axis=1)
        return bool(ok[0]) if scalar else ok

    def _subsets(self):
        if "subsets" not in self._cache:
            m = self.normals.shape[0]
            max_size = min(m, self.d)
            total = sum(math.comb(m, j) for j in range(max_size + 1))
            if total > 200000:
                raise ValueError("too many facet subsets for exact projection")
            subs = [()]
            for size in range(1, max_size + 1):
                subs.extend(itertools.combinations(range(m), size))
            self._cache["subsets"] = subs
        return self._cache["subsets"]

    def _project_one(self, x):
        A, b = self.normals, self.offsets
        scale = 1.0 + float(x @ x)
        best, best_dist = None, np.inf
        for sub in self._subsets():
            if not sub:
                if np.all(A @ x - b <= 1e-12 * scale):
                    return x.copy()
                continue
            As = A[list(sub)]
            bs = b[list(sub)]
            G = As @ As.T
            rhs = As @ x - bs
            lam, *_ = np.linalg.lstsq(G, rhs, rcond=None)
            if np.any(lam < -1e-10):
                continue  # multiplier signs wrong: not the active set
            y = x - As.T @ lam
            if np.max(np.abs(As @ y - bs)) > 1e-8 * scale:
                continue  # rank-deficient subset did not reproduce equality
            if np.any(A @ y - b > 1e-9 * scale):
                continue  # infeasible candidate
            dist = np.linalg.norm(x - y)
            if dist < best_dist:
                best_dist, best = dist, y
        if best is None:
            raise RuntimeError("active-set projection failed; polytope ill-conditioned")
        return best

    def _project(self, pts):
        return np.array([self._project_one(x) for x in pts])

    def affine_hull(self):
        rows = self._implicit_rows()
        origin = self._interior_point()
        if not rows:
            return origin, np.eye(self.d)
        N = self.normals[rows]
        u, sv, vt = np.linalg.svd(N)
        rank = int(np.sum(sv > _RANK_TOL * max(1.0, sv[0])))
        return origin, vt[rank:]

    def bounding_box(self):
        lo = np.empty(self.d)
        hi = np.empty(self.d)
        for j in range(self.d):
            c = np.zeros(self.d)
            c[j] = 1.0
            res = linprog(c, A_ub=self.normals, b_ub=self.offsets,
                          bounds=[(None, None)] * self.d, method="highs")
            lo[j] = -np.inf if res.status == 3 else res.fun
            res = linprog(-c, A_ub=self.normals, b_ub=self.offsets,
                          bounds=[(None, None)] * self.d, method="highs")
            hi[j] = np.inf if res.status == 3 else -res.fun
        return lo, hi

    def laplacian_dist_sq(self, x):
        pts, scalar = _as_points(x, self.d)
        proj = self._project(pts)
        out = np.empty(len(pts))
        for i, ni in enumerate(proj):
            slack = self.normals @ ni - self.offsets
            active = np.abs(slack) <= 1e-9 * (1.0 + np.linalg.norm(ni))
            if not np.any(active):
                out[i] = 0.0  # interior feature: should not occur for x outside K
            else:
                rank = np.linalg.matrix_rank(self.normals[active], tol=_RANK_TOL)
                out[i] = 2.0 * rank
        return float(out[0]) if scalar else out

    def to_json(self):
        return {
            "kind": self.kind,
            "normals": self.normals.tolist(),
            "offsets": self.offsets.tolist(),
        }


_BODY_KINDS = {
    "single_point": lambda o: SinglePoint(np.asarray(o["point"])),
    "affine_subspace": lambda o: AffineSubspace(np.asarray(o["offset"]), np.asarray(o["basis"])),
    "halfspace": lambda o: Halfspace(np.asarray(o["normal"]), o["offset"]),
    "h_polytope": lambda o: HPolytope(np.asarray(o["normals"]), np.asarray(o["offsets"])),
    "v_polytope": lambda o: VPolytope(np.asarray(o["vertices"])),
    "ball": lambda o: Ball(np.asarray(o["center"]), o["radius"]),
    "box": lambda o: Box(np.asarray(o["lower"]), np.asarray(o["upper"])),
}


def body_from_json(obj: dict) -> ConvexBody:
    try:
        maker = _BODY_KINDS[obj["kind"]]
    except KeyError as exc:
        raise ValueError(f"unknown body kind {obj.get('kind')!r}") from exc
    return maker(obj)


# ---------------------------------------------------------------------------
# module-level operations


def project(body: ConvexBody, x):
    """Nearest point of K to x (identity for x already in K)."""
    return body.project(x)


def distance(body: ConvexBody, x):
    """Euclidean distance d(x) from x to K (0 inside K)."""
    pts, scalar = _as_points(x, body.d)
    out = np.linalg.norm(pts - body._project(pts), axis=1)
    return float(out[0]) if scalar else out


def distance_gradient(body: ConvexBody, x):
    """Unit gradient (x - n(x))/|x - n(x)|; requires x outside K."""
    pts, scalar = _as_points(x, body.d)
    rel = pts - body._project(pts)
    nrm = np.linalg.norm(rel, axis=1)
    tol = MEMBERSHIP_RTOL * (1.0 + np.linalg.norm(pts, axis=1))
    if np.any(nrm <= tol):
        raise ValueError("distance gradient requested at a point of K")
    out = rel / nrm[:, None]
    return out[0] if scalar else out


def hessian_distance_sq(body: ConvexBody, x, h: float | None = None):
    """Central-difference Hessian of d(.)^2 at x, a (d, d) symmetric matrix.

    The step defaults to max(1e-4, 1e-3 d(x)) and the stencil must stay in
    Omega: d(x) > 2h is enforced.
    """
    x = np.asarray(x, dtype=float)
    d = body.d
    s0 = distance(body, x)
    if s0 <= MEMBERSHIP_RTOL * (1.0 + np.linalg.norm(x)):
        raise ValueError("Hessian of d^2 requested at a point of K")
    if h is None:
        h = max(1e-4, 1e-3 * s0)
    if s0 <= 2.0 * h:
        raise ValueError("finite-difference step too large: stencil would cross the boundary")

    eye = np.eye(d)
    pts = [x]
    for i in range(d):
        pts.append(x + h * eye[i])
        pts.append(x - h * eye[i])
    for i in range(d):
        for j in range(i + 1, d):
            pts.append(x + h * eye[i] + h * eye[j])
            pts.append(x + h * eye[i] - h * eye[j])
            pts.append(x - h * eye[i] + h * eye[j])
            pts.append(x - h * eye[i] - h * eye[j])
    vals = distance(body, np.array(pts)) ** 2

    H = np.empty((d, d))
    f0 = vals[0]
    for i in range(d):
        fp, fm = vals[1 + 2 * i], vals[2 + 2 * i]
        H[i, i] = (fp - 2.0 * f0 + fm) / h**2
    idx = 1 + 2 * d
    for i in range(d):
        for j in range(i + 1, d):
            fpp, fpm, fmp, fmm = vals[idx : idx + 4]
            idx += 4
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h**2)
    return H


def boundary_dimension(body: ConvexBody) -> int:
    """Hausdorff dimension of the boundary: dim(K) if dim(K) < d, else d-1."""
    k = body.body_dim
    return k if k < body.d else body.d - 1


@dataclass
class KInfResult:
    exact: int | None
    estimate: float | None
    rounded: int | None
    confident: bool

    def to_json(self):
        return {
            "exact": self.exact,
            "estimate": self.estimate,
            "rounded": self.rounded,
            "confident": self.confident,
        }


def dimension_at_infinity(
    body: ConvexBody,
    r_values=None,
    n_samples: int = 20000,
    seed: int = 0,
) -> KInfResult:
    """Dimension at infinity of K: growth exponent of |K cut to B_r| in A_K.

    Every supported variant admits the exact value (the recession-cone
    dimension).  When r_values is given (increasing, spanning at least two
    decades) a Monte Carlo log-log slope estimate is computed as well, with
    per-radius deterministic substreams derived from the seed.
    """
    exact = body.recession_dim
    if r_values is None:
        return KInfResult(exact=exact, estimate=None, rounded=exact, confident=True)

    r_values = np.asarray(r_values, dtype=float)
    if r_values.size < 2 or np.any(np.diff(r_values) <= 0):
        raise ValueError("r_values must be increasing with at least two entries")
    if r_values[-1] / r_values[0] < 99.0:
        raise ValueError("r_values must span at least two decades")

    origin, basis = body.affine_hull()
    k = basis.shape[0]
    if k == 0:
        return KInfResult(exact=exact, estimate=0.0, rounded=0, confident=True)

    u_lo, u_hi = _u_bbox(body, origin, basis)
    measures = np.empty(r_values.size)
    for idx, r in enumerate(r_values):
        lo = np.maximum(u_lo, -r)
        hi = np.minimum(u_hi, r)
        if np.any(hi <= lo):
            raise ValueError("empty sampling box; choose larger radii")
        rng = np.random.default_rng([int(seed), idx])
        u = rng.uniform(lo, hi, size=(n_samples, k))
        inside_ball = np.einsum("ij,ij->i", u, u) <= r * r
        x = origin + u @ basis
        ok = inside_ball & body.contains(x, rtol=1e-9)
        frac = np.mean(ok)
        if frac == 0.0:
            raise ValueError("sample budget too small to estimate the dimension at infinity")
        measures[idx] = np.prod(hi - lo) * frac

    slope = float(np.polyfit(np.log(r_values), np.log(measures), 1)[0])
    rounded = int(round(slope))
    confident = bool(abs(slope - rounded) <= 0.15)
    return KInfResult(
        exact=exact,
        estimate=float(slope),
        rounded=rounded if confident else None,
        confident=confident,
    )


def _u_bbox(body: ConvexBody, origin, basis):
    """Per-axis bounds of K in the affine-hull coordinates u -> origin + u @ basis."""
    k = basis.shape[0]
    if isinstance(body, Ball):
        return -body.radius * np.ones(k), body.radius * np.ones(k)
    if isinstance(body, (Box, VPolytope)):
        if isinstance(body, Box):
            corners = body.bounding_box()
            pts = np.array(np.meshgrid(*zip(*corners))).T.reshape(-1, body.d) if body.d <= 12 else None
            if pts is None:
                lo_x, hi_x = corners
                center = (lo_x + hi_x) / 2
                half = (hi_x - lo_x) / 2
                reach = np.abs(basis) @ half
                mid = basis @ (center - origin)
                return mid - reach, mid + reach
        else:
            pts = body.vertices
        u = (pts - origin) @ basis.T
        return u.min(axis=0), u.max(axis=0)
    if isinstance(body, HPolytope):
        A_u = body.normals @ basis.T
        b_u = body.offsets - body.normals @ origin
        lo = np.empty(k)
        hi = np.empty(k)
        for j in range(k):
            c = np.zeros(k)
            c[j] = 1.0
            res = linprog(c, A_ub=A_u, b_ub=b_u, bounds=[(None, None)] * k, method="highs")
            lo[j] = -np.inf if res.status == 3 else res.fun
            res = linprog(-c, A_ub=A_u, b_ub=b_u, bounds=[(None, None)] * k, method="highs")
            hi[j] = np.inf if res.status == 3 else -res.fun
        return lo, hi
    # halfspace, affine subspace: unbounded in hull coordinates
    return np.full(k, -np.inf), np.full(k, np.inf)


def segment_convexity_check(body: ConvexBody, y, z, grid=None):
    """Max convexity violation of the distance field along the segment [y, z].

    Returns max over the grid of d(lam y + (1-lam) z) - lam d(y) - (1-lam) d(z);
    raises if the sampled segment touches K.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if grid is None:
        grid = np.linspace(0.0, 1.0, 101)
    lam = np.asarray(grid, dtype=float)
    pts = lam[:, None] * y + (1.0 - lam)[:, None] * z
    dists = distance(body, pts)
    scale = 1.0 + max(np.linalg.norm(y), np.linalg.norm(z))
    if np.any(dists <= MEMBERSHIP_RTOL * scale):
        raise ValueError("segment intersects K")
    dy = distance(body, y)
    dz = distance(body, z)
    return float(np.max(dists - lam * dy - (1.0 - lam) * dz))


@dataclass
class GeometryReport:
    d: int
    k: int
    d_H: int
    k_inf: int
    k_inf_estimate: float | None = None
    k_inf_confident: bool = True

    def to_json(self):
        return {
            "d": self.d,
            "k": self.k,
            "d_H": self.d_H,
            "k_inf": self.k_inf,
            "k_inf_estimate": self.k_inf_estimate,
            "k_inf_confident": self.k_inf_confident,
        }


def geometry_report(body: ConvexBody, r_values=None, n_samples: int = 20000, seed: int = 0):
    """Dimension summary (d, k, d_H, k_inf) for a body, optionally with the MC estimate."""
    k = body.body_dim
    kinf = dimension_at_infinity(body, r_values=r_values, n_samples=n_samples, seed=seed)
    return GeometryReport(
        d=body.d,
        k=k,
        d_H=boundary_dimension(body),
        k_inf=kinf.exact,
        k_inf_estimate=kinf.estimate,
        k_inf_confident=kinf.confident,
    )


# ---------------------------------------------------------------------------
# sampling helpers (used by the verification suites and Monte Carlo quadrature)


def sample_outside(body: ConvexBody, n: int, rng, shell=(0.1, 5.0), box_pad: float = 10.0):
    """n points of Omega with distance to K inside the given shell."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    lo, hi = body.bounding_box()
    with np.errstate(invalid="ignore"):
        center = np.where(np.isfinite(lo) & np.isfinite(hi), (lo + hi) / 2.0, 0.0)
    lo = np.where(np.isfinite(lo), lo, center - box_pad)
    hi = np.where(np.isfinite(hi), hi, center + box_pad)
    lo = lo - shell[1] * 1.5
    hi = hi + shell[1] * 1.5
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 2000:
            raise RuntimeError("rejection sampling outside K failed to converge")
        batch = rng.uniform(lo, hi, size=(max(4 * n, 256), body.d))
        dist = distance(body, batch)
        good = batch[(dist > shell[0]) & (dist < shell[1])]
        out.extend(good[: n - len(out)])
    return np.array(out)


def sample_inside(body: ConvexBody, n: int, rng, radius: float = 10.0):
    """n points of K (uniform for full-dimensional solid variants, supported for all)."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    if isinstance(body, SinglePoint):
        return np.tile(body.point, (n, 1))
    if isinstance(body, Ball):
        dirs = rng.normal(size=(n, body.d))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        radii = body.radius * rng.uniform(size=n) ** (1.0 / body.d)
        return body.center + dirs * radii[:, None]
    if isinstance(body, Box):
        return rng.uniform(body.lower, body.upper, size=(n, body.d))
    if isinstance(body, VPolytope):
        w = rng.dirichlet(np.ones(body.vertices.shape[0]), size=n)
        return w @ body.vertices
    if isinstance(body, AffineSubspace):
        u = rng.normal(scale=radius, size=(n, body.body_dim))
        return body.offset + u @ body.basis
    if isinstance(body, Halfspace):
        bpoint = body.normal * body.offset
        depth = rng.exponential(scale=radius / 3.0, size=n)
        tang = rng.normal(scale=radius, size=(n, body.d))
        tang -= np.outer(tang @ body.normal, body.normal)
        return bpoint - np.outer(depth, body.normal) + tang
    if isinstance(body, HPolytope):
        origin, basis = body.affine_hull()
        k = basis.shape[0]
        u_lo, u_hi = _u_bbox(body, origin, basis)
        u_lo = np.maximum(u_lo, -radius)
        u_hi = np.minimum(u_hi, radius)
        out = []
        attempts = 0
        while len(out) < n:
            attempts += 1
            if attempts > 5000:
                raise RuntimeError("rejection sampling inside polytope failed")
            u = rng.uniform(u_lo, u_hi, size=(max(4 * n, 256), k))
            x = origin + u @ basis
            good = x[body.contains(x, rtol=1e-9)]
            out.extend(good[: n - len(out)])
        return np.array(out)
    raise NotImplementedError(f"sampling inside {body.kind} not supported")
