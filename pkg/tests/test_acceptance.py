"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Runtime budgets are asserted against a monotonic clock; every tolerance is
pinned here, not deferred.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np

from hardyrellich.constants import (
    ProblemSpec,
    hardy_constant,
    rellich_constants,
    rellich_l2_constant,
)
from hardyrellich.functionals import (
    QuadratureSpec,
    hardy_quotient,
    lemma31_residual,
    plateau_cutoff_quotient,
    rellich_quotient,
)
from hardyrellich.geometry import (
    AffineSubspace,
    Ball,
    Box,
    Halfspace,
    HPolytope,
    SinglePoint,
    VPolytope,
    dimension_at_infinity,
    distance_gradient,
    hessian_distance_sq,
    project,
    sample_inside,
    sample_outside,
    segment_convexity_check,
)
from hardyrellich.optimizer import bracket_mu, sequence_sweep
from hardyrellich.profiles import (
    log_ramp,
    log_ramp_energy,
    log_ramp_mass,
    log_ramp_squared,
    profile_integral,
    ramp_squared_bend_energy,
)
from hardyrellich.suite import (
    HARDY_BODY_KINDS,
    RELLICH_BODY_KINDS,
    hardy_trials_for,
    random_hardy_spec,
    random_rellich_spec,
    rellich_trials_for,
)
from hardyrellich.weights import WeightParams

QUAD_TOL = 1e-7  # quadrature relative tolerance used by the sweeps


def _report(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance {num:>2}] {status}: {detail}")
    assert ok, detail


def _budget(num, t0, limit):
    elapsed = time.monotonic() - t0
    assert elapsed < limit, f"criterion {num} exceeded its {limit}s budget ({elapsed:.1f}s)"
    return elapsed


def test_criterion_01_constants_identity_suite():
    t0 = time.monotonic()
    grid = []
    for d in range(3, 13):
        for d_H in (0, 1, 2):
            if d_H >= d - 1:
                continue
            for p in (1.5, 2.0, 2.5, 3.0):
                for delta in (0.0, 0.5, 1.0, 1.5):
                    for dp in (0.0, 0.5, 1.0, 1.5):
                        grid.append((d, d_H, p, delta, dp))
    bodies = {}
    checked = 0
    p2_checked = 0
    for d, d_H, p, delta, dp in grid:
        key = (d, d_H)
        if key not in bodies:
            bodies[key] = (
                SinglePoint([0.0] * d) if d_H == 0 else AffineSubspace([0.0] * d, np.eye(d)[:d_H])
            )
        spec = ProblemSpec(d, bodies[key], p, WeightParams(delta, dp))
        rc = rellich_constants(spec)
        if not rc.valid:
            continue
        checked += 1
        assert rc.c_p <= rc.C_p + 1e-12
        assert rc.c_p > 0
        if delta == dp:
            assert abs(rc.c_p - rc.C_p) <= 1e-12
        if p == 2.0:
            v1, v2, _ = rellich_l2_constant(spec)
            assert abs(v1 - v2) <= 1e-12
            p2_checked += 1
    elapsed = _budget(1, t0, 1.0)
    ok = checked >= 500 and p2_checked >= 100
    _report(1, ok, f"{checked} valid tuples ({p2_checked} with p=2), identities at 1e-12, {elapsed:.2f}s")


def test_criterion_02_closed_form_integral_oracles():
    t0 = time.monotonic()
    worst = 0.0
    for n in (10.0, 1e2, 1e4):
        for p in (1.5, 2.0, 3.0):
            xi = log_ramp(n)
            grad = profile_integral(xi, gamma=p - 1.0, j=1, p=p, bounds=(0.0, 1.0))
            rel1 = abs(grad.value - log_ramp_energy(n, p)) / log_ramp_energy(n, p)
            mass = profile_integral(xi, gamma=-1.0, j=0, p=p, bounds=(1.0 / n, 1.0))
            rel2 = abs(mass.value - log_ramp_mass(n, p)) / log_ramp_mass(n, p)
            xi2 = log_ramp_squared(n)
            bend = profile_integral(xi2, gamma=2.0 * p - 1.0, j=2, p=p, bounds=(1.0 / n, 1.0))
            exact = ramp_squared_bend_energy(n, p)
            rel3 = abs(bend.value - exact) / exact
            assert exact <= 2.0 ** (p - 1.0) * math.log(n) ** (-(p - 1.0)) + 1e-15
            worst = max(worst, rel1, rel2, rel3)
    elapsed = _budget(2, t0, 10.0)
    _report(2, worst <= 1e-8, f"worst relative error {worst:.2e} over 27 oracles, {elapsed:.2f}s")


def test_criterion_03_hardy_never_violated():
    t0 = time.monotonic()
    quad = QuadratureSpec(rel_tol=QUAD_TOL)
    min_margin = math.inf
    count = 0
    i = 0
    while count < 200:
        kind = HARDY_BODY_KINDS[i % len(HARDY_BODY_KINDS)]
        rng = np.random.default_rng([2024, i])
        i += 1
        spec = random_hardy_spec(rng, kind)
        bound = hardy_constant(spec).a_p_pow_p
        for trial in hardy_trials_for(spec, rng, 1):
            res = hardy_quotient(spec, trial, quad)
            margin = res.quotient - bound * (1.0 - 10.0 * QUAD_TOL)
            min_margin = min(min_margin, margin)
            count += 1
    elapsed = _budget(3, t0, 300.0)
    _report(3, min_margin >= 0.0, f"200 (spec, trial) pairs, min margin {min_margin:.3e}, {elapsed:.1f}s")


def test_criterion_04_hardy_optimality_squeeze_point():
    t0 = time.monotonic()
    spec = ProblemSpec(3, SinglePoint([0.0, 0.0, 0.0]), 2.0, WeightParams())
    sweep = sequence_sweep(spec, "hardy", n_list=(1e2, 1e3, 1e4, 1e5), quadspec=QuadratureSpec(rel_tol=QUAD_TOL))
    rel = abs(sweep.q_inf - 0.25) / 0.25
    all_above = all(q >= 0.25 for q in sweep.quotients)
    elapsed = _budget(4, t0, 120.0)
    _report(4, rel <= 0.08 and all_above, f"q_inf = {sweep.q_inf:.4f} ({100*rel:.1f}% of 0.25), all quotients >= 0.25, {elapsed:.1f}s")


def test_criterion_05_hardy_optimality_line_r4():
    t0 = time.monotonic()
    line = AffineSubspace([0.0] * 4, [[1.0, 0.0, 0.0, 0.0]])
    spec = ProblemSpec(4, line, 2.0, WeightParams())
    assert spec.k == 1 and spec.k_inf == 1
    br = bracket_mu(spec, QuadratureSpec(rel_tol=QUAD_TOL), n_list=(1e4, 1e8, 1e12, 1e16), cutoff_log_width=8.0)
    target = 0.25
    collapsed = br.lower is not None and br.upper is not None and br.upper - br.lower <= 0.10 * target
    numeric_close = abs(br.extrapolated - target) <= 0.10 * target
    elapsed = _budget(5, t0, 300.0)
    _report(
        5,
        collapsed and numeric_close and br.status.kind == "exact",
        f"bracket [{br.lower:.4f}, {br.upper:.4f}], extrapolated {br.extrapolated:.4f} "
        f"(target 0.25 within 10%), {elapsed:.1f}s",
    )


def test_criterion_06_rellich_never_violated_and_squeeze():
    t0 = time.monotonic()
    quad = QuadratureSpec(rel_tol=QUAD_TOL)
    min_margin = math.inf
    count = 0
    i = 0
    while count < 100:
        kind = RELLICH_BODY_KINDS[i % len(RELLICH_BODY_KINDS)]
        rng = np.random.default_rng([4097, i])
        i += 1
        spec = random_rellich_spec(rng, kind)
        bound = rellich_constants(spec).C_p ** spec.p
        for trial in rellich_trials_for(spec, rng, 1):
            res = rellich_quotient(spec, trial, quad)
            margin = res.quotient - bound * (1.0 - 10.0 * QUAD_TOL)
            min_margin = min(min_margin, margin)
            count += 1
    spec5 = ProblemSpec(5, SinglePoint([0.0] * 5), 2.0, WeightParams())
    sweep = sequence_sweep(spec5, "rellich", n_list=(1e2, 1e3, 1e4, 1e5), quadspec=quad)
    target = 1.5625
    rel = abs(sweep.q_inf - target) / target
    elapsed = _budget(6, t0, 600.0)
    _report(
        6,
        min_margin >= 0.0 and rel <= 0.10,
        f"100 trials min margin {min_margin:.3e}; squeeze q_inf = {sweep.q_inf:.4f} "
        f"({100*rel:.1f}% of C_2^2 = {target}), {elapsed:.1f}s",
    )


def _criterion7_bodies():
    return [
        SinglePoint([0.0, 0.0, 0.0]),
        AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]]),
        Halfspace([1.0, 0.0], 0.0),
        VPolytope([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
        Ball([0.0, 0.0], 1.0),
        Box([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]),
    ]


def test_criterion_07_geometry_suite():
    t0 = time.monotonic()
    bodies = _criterion7_bodies()
    idem_max = 0.0
    obtuse_max = -math.inf
    grad_dev_max = 0.0
    hess_margin_min = math.inf
    seg_viol_max = -math.inf
    per_body = 10_000 // len(bodies) + 1
    for bi, body in enumerate(bodies):
        rng = np.random.default_rng([77, bi])
        xs = sample_outside(body, per_body, rng, shell=(0.05, 6.0))
        proj = project(body, xs)
        scale = 1.0 + np.max(np.linalg.norm(xs, axis=1))
        idem_max = max(idem_max, float(np.max(np.linalg.norm(project(body, proj) - proj, axis=1))) / scale)
        ys = sample_inside(body, per_body, rng)
        obtuse_max = max(obtuse_max, float(np.max(np.einsum("ij,ij->i", xs - proj, ys - proj))))
        grads = distance_gradient(body, xs)
        grad_dev_max = max(grad_dev_max, float(np.max(np.abs(np.linalg.norm(grads, axis=1) - 1.0))))
        d_H = body.body_dim if body.body_dim < body.d else body.d - 1
        hess_pts = sample_outside(body, 1000, rng, shell=(0.2, 4.0))
        for x in hess_pts:
            tr = float(np.trace(hessian_distance_sq(body, x)))
            hess_margin_min = min(hess_margin_min, tr - 2.0 * (body.d - d_H) + 1e-3)
        done = 0
        while done < 1000 // len(bodies) + 1:
            y, z = sample_outside(body, 2, rng, shell=(0.2, 5.0))
            try:
                v = segment_convexity_check(body, y, z)
            except ValueError:
                continue
            seg_viol_max = max(seg_viol_max, v)
            done += 1

    disc = Ball([0.0, 0.0], 1.0)
    strip = HPolytope([[0.0, 1.0], [0.0, -1.0]], [1.0, 1.0])
    quadrant = HPolytope([[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])
    r_values = (1e2, 316.23, 1e3, 3162.3, 1e4)
    kinf_ok = True
    for K, expect in ((disc, 0), (strip, 1), (quadrant, 2)):
        res = dimension_at_infinity(K, r_values=r_values, n_samples=20000, seed=11)
        kinf_ok = kinf_ok and abs(res.estimate - expect) <= 0.15
    ok = (
        idem_max <= 1e-12
        and obtuse_max <= 1e-9
        and grad_dev_max <= 1e-10
        and hess_margin_min >= 0.0
        and seg_viol_max <= 1e-10
        and kinf_ok
    )
    elapsed = _budget(7, t0, 120.0)
    _report(
        7,
        ok,
        f"idem {idem_max:.1e}, obtuse {obtuse_max:.1e}, |grad|-1 {grad_dev_max:.1e}, "
        f"hess margin {hess_margin_min:.1e}, seg viol {seg_viol_max:.1e}, k_inf 0/1/2 ok, {elapsed:.1f}s",
    )


def test_criterion_08_profile_lower_bound_residuals():
    t0 = time.monotonic()
    specs = []
    point4 = SinglePoint([0.0] * 4)
    line4 = AffineSubspace([0.0] * 4, [[1.0, 0.0, 0.0, 0.0]])
    hs3 = Halfspace([0.0, 0.0, 1.0], 0.0)
    ball3 = Ball([0.0, 0.0, 0.0], 1.0)
    box3 = Box([-1.0] * 3, [1.0] * 3)
    seg3 = VPolytope([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    for body, d in ((point4, 4), (line4, 4), (hs3, 3), (ball3, 3), (box3, 3), (seg3, 3)):
        for delta, dp in ((0.0, 0.0), (1.0, 1.0), (0.5, 1.5)):
            specs.append(ProblemSpec(d, body, 2.0, WeightParams(delta, dp)))
    specs.append(ProblemSpec(5, SinglePoint([0.0] * 5), 2.5, WeightParams(0.0, 0.5)))
    specs.append(ProblemSpec(6, AffineSubspace([0.0] * 6, np.eye(6)[:2]), 3.0, WeightParams(1.5, 0.5)))
    assert len(specs) == 20

    worst_norm = math.inf
    for si, spec in enumerate(specs):
        rng = np.random.default_rng([31337, si])
        pts = sample_outside(spec.body, 1000, rng, shell=(0.1, 10.0))
        alpha = float(rng.uniform(0.2, 2.0))
        alpha_prime = float(rng.uniform(0.2, 2.0))
        _, residual, scale = lemma31_residual(spec, alpha, alpha_prime, pts)
        worst_norm = min(worst_norm, float(np.min(residual / (1.0 + scale))))

    eq_spec = ProblemSpec(4, SinglePoint([0.0] * 4), 2.0, WeightParams())
    rng = np.random.default_rng(5150)
    pts = sample_outside(eq_spec.body, 1000, rng, shell=(0.1, 10.0))
    _, residual, _ = lemma31_residual(eq_spec, 1.0, 1.0, pts)
    eq_dev = float(np.max(np.abs(residual)))
    ok = worst_norm >= -1e-10 and eq_dev <= 1e-8
    elapsed = _budget(8, t0, 120.0)
    _report(
        8,
        ok,
        f"20-spec grid, min normalized residual {worst_norm:.2e}; equality-case |residual| {eq_dev:.1e}, {elapsed:.1f}s",
    )


def test_criterion_09_plateau_cutoff_decay():
    t0 = time.monotonic()
    rs = np.array([10.0, 31.6, 100.0, 316.0, 1000.0])
    qs = np.array([plateau_cutoff_quotient(float(r), 2.0) for r in rs])
    slope = float(np.polyfit(np.log(rs), np.log(qs), 1)[0])
    elapsed = _budget(9, t0, 60.0)
    _report(9, abs(slope + 1.0) <= 0.1, f"log-log slope {slope:.3f} (target -1 +- 0.1), {elapsed:.1f}s")


def test_criterion_10_determinism(tmp_path):
    t0 = time.monotonic()
    spec = {
        "d": 3,
        "body": {"kind": "single_point", "point": [0.0, 0.0, 0.0]},
        "p": 2.0,
        "weights": {"delta": 0.0, "delta_prime": 0.0},
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    args = [
        sys.executable, "-m", "hardyrellich.cli", "sweep",
        "--spec", str(spec_path), "--which", "hardy",
        "--n-list", "100,1000,10000", "--seed", "42", "--format", "csv",
    ]
    out1 = subprocess.run(args, capture_output=True, text=True)
    out2 = subprocess.run(args, capture_output=True, text=True)
    ok = out1.returncode == 0 and out1.stdout == out2.stdout and len(out1.stdout) > 0
    elapsed = _budget(10, t0, 60.0)
    _report(10, ok, f"two sweep runs byte-identical ({len(out1.stdout)} bytes), {elapsed:.1f}s")
