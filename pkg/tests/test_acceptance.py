"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the summary
lines; every criterion pins its tolerance explicitly.
"""

import math
import time

import numpy as np
import pytest

from conicvol import (
    CurvatureBand,
    Divisor,
    build_extremal,
    b_prime_check,
    check_c11,
    geometry,
    grid_from_metric,
    key_inequality_check,
    lemma_bound,
    brute_force_max,
    min_vol,
    slope_band_check,
    summarize,
    volume_bounds,
    volume_quadratic_coefficients,
    weighted_euler,
)
from conicvol.extremal import verify_model
from conicvol.levelset import deficit_trend

PI = math.pi

# (kind, orders, a, b): the 20-case model lattice for criteria 4 and 5
MODEL_LATTICE = [
    ("Vab", [-0.5], -1.0, 1.0),
    ("Vab", [-0.1, -0.6], -0.7, 2.0),
    ("Vab", [-0.25, -0.5], -0.5, 1.0),
    ("Vab", [-0.9], -2.0, 0.5),
    ("Vab", [-0.4, -0.8], -1.0, 1.5),
    ("V0b", [-0.5], 0.0, 1.0),
    ("V0b", [-0.2, -0.7], 0.0, 2.0),
    ("V0b", [-0.3], 0.0, 0.5),
    ("V0b", [-0.45, -0.45], 0.0, 1.0),
    ("Vmin", [-0.5], 0.25, 1.0),
    ("Vmin", [-0.5], 0.2, 1.0),
    ("Vmin", [-0.25, -0.5], 0.1, 1.0),
    ("Vmin", [-0.3, -0.3], 0.5, 1.0),
    ("Vmax", [-0.5], 0.2, 1.0),
    ("Vmax", [-0.25, -0.5], 0.1, 1.0),
    ("Vmax", [-0.5], 0.25, 1.0),
    ("MinVol", [-0.5], -1.0, 1.0),
    ("MinVol", [-0.25, -0.5], -1.0, 1.0),
    ("MinVol", [-0.45, -0.45], -1.0, 1.0),
    ("MinVol", [-0.9], -1.0, 1.0),
]


def _report(n, text):
    print(f"ACCEPTANCE {n}: PASS - {text}")


def test_criterion_1_round_sphere_degeneracy():
    t0 = time.perf_counter()
    d = Divisor()
    band = CurvatureBand(1.0, 1.0)
    rep = volume_bounds(d, band)
    assert rep.v_lower == pytest.approx(4 * PI, rel=1e-12)
    assert rep.v_upper == pytest.approx(4 * PI, rel=1e-12)
    model = build_extremal("Vmin", d, band)
    rho = np.logspace(-4, 4, 2001)
    expect = 4.0 / (1 + rho**2) ** 2
    rel = np.abs(model.e2u(rho) - expect) / expect
    assert rel.max() < 1e-10
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _report(1, f"V_min = V_max = 4*pi (rel 1e-12), factor matches "
               f"4/(1+rho^2)^2 to {rel.max():.1e} ({elapsed:.2f}s < 1s)")


def test_criterion_2_teardrop_three_routes(teardrop, minvol_model):
    t0 = time.perf_counter()
    v_closed = min_vol(teardrop)
    c2, c1, c0 = volume_quadratic_coefficients(teardrop, CurvatureBand(-1.0, 1.0))
    roots = np.roots([c2, c1, c0]).real
    v_root = float(roots[roots > 0].min())
    v_quad = geometry.volume(geometry.profile_of(minvol_model)).value
    values = [v_closed, v_root, v_quad]
    for x in values:
        for y in values:
            assert abs(x - y) / y < 1e-7
    assert v_closed == pytest.approx(PI * (1 + math.sqrt(10)), rel=1e-12)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(2, f"teardrop volume pi(1+sqrt(10)) from closed form "
               f"{v_closed:.8f}, quadratic root {v_root:.8f}, quadrature "
               f"{v_quad:.8f}, pairwise < 1e-7 ({elapsed:.2f}s < 5s)")


def test_criterion_3_pinching_equality_model(teardrop):
    t0 = time.perf_counter()
    band = CurvatureBand(0.25, 1.0)
    rep = volume_bounds(teardrop, band)
    assert rep.v_lower == pytest.approx(rep.v_upper, rel=1e-9)
    mins = build_extremal("Vmin", teardrop, band)
    maxs = build_extremal("Vmax", teardrop, band)
    assert abs(mins.glue_radius - 1.0) < 1e-10
    assert abs(maxs.glue_radius - 1.0) < 1e-10
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _report(3, f"a/b = (1+beta)^2/(1+alpha)^2 gives r = 1 (+- 1e-10) in both "
               f"models and V_min = V_max = {rep.v_lower:.6f} "
               f"({elapsed:.2f}s < 1s)")


@pytest.fixture(scope="module")
def built_lattice():
    models = []
    for kind, orders, a, b in MODEL_LATTICE:
        d = Divisor.from_orders(orders)
        models.append(build_extremal(kind, d, CurvatureBand(a, b)))
    return models


def test_criterion_4_gauss_bonnet_and_band(built_lattice):
    t0 = time.perf_counter()
    worst_gb = 0.0
    worst_band = 0.0
    for m in built_lattice:
        rep = verify_model(m)
        assert rep["passed"], (m.kind, m.alpha, m.beta, rep["checks"])
        assert rep["checks"]["gauss_bonnet"], (m.kind, m.alpha, m.beta, rep)
        assert rep["checks"]["curvature_band"], (m.kind, m.alpha, m.beta, rep)
        worst_gb = max(worst_gb, rep["gauss_bonnet_rel_err"])
        worst_band = max(worst_band, rep["band_violation"])
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(4, f"{len(built_lattice)} models: total curvature matches "
               f"2*pi*(2+alpha+beta) to {worst_gb:.1e} (<1e-7), curvature "
               f"stays in band to {worst_band:.1e} (<1e-6) "
               f"({elapsed:.1f}s < 30s)")


def test_criterion_5_c11_gluing(built_lattice):
    worst_jump = 0.0
    worst_curv = 0.0
    for m in built_lattice:
        rep = check_c11(m)
        assert rep.passed
        if not rep.degenerate:
            assert rep.e2u_jump_rel < 1e-8
            assert rep.de2u_jump_rel < 1e-8
            worst_jump = max(worst_jump, rep.e2u_jump_rel, rep.de2u_jump_rel)
        assert abs(rep.curvature_jump - abs(m.b - m.a)) < 1e-6 \
            or rep.degenerate
        worst_curv = max(worst_curv, abs(rep.curvature_jump
                                         - rep.expected_curvature_jump)
                         if not rep.degenerate else 0.0)
    _report(5, f"glued factors are C^1 to {worst_jump:.1e} (<1e-8) and the "
               f"curvature jump equals b-a to {worst_curv:.1e} (<1e-6)")


LEVELSET_MODELS = [
    ("MinVol", [-0.5], -1.0, 1.0),
    ("Vmin", [-0.5], 0.25, 1.0),
    ("V0b", [-0.5], 0.0, 1.0),
    ("Vab", [-0.25, -0.5], -0.5, 1.0),
]


def test_criterion_6_levelset_machinery_2048():
    lines = []
    for kind, orders, a, b in LEVELSET_MODELS:
        t0 = time.perf_counter()
        d = Divisor.from_orders(orders)
        band = CurvatureBand(a, b)
        m = build_extremal(kind, d, band)
        g = grid_from_metric(m, half_width=8.0, n=2048)
        s = summarize(g, n_thresholds=512)
        sb = slope_band_check(s, band)
        bp = b_prime_check(s)
        ki = key_inequality_check(s)
        elapsed = time.perf_counter() - t0
        assert sb.passed, (kind, sb)
        assert bp.median_rel_err < 0.02, (kind, bp)
        assert ki.passed_pointwise, (kind, ki)
        assert abs(ki.defect_corrected) < 1e-3 * m.target_volume, (kind, ki)
        assert elapsed < 120.0
        lines.append(f"{kind}: slopes [{sb.slope_min:.3f},{sb.slope_max:.3f}]"
                     f" in [{a - sb.tol:.3f},{b + sb.tol:.3f}], B' err "
                     f"{bp.median_rel_err:.1e} (<2e-2), margin "
                     f"{ki.min_margin:.1e} > -{ki.tol:.1e}, defect "
                     f"{abs(ki.defect_corrected):.1e} < "
                     f"{1e-3 * m.target_volume:.1e} ({elapsed:.0f}s < 120s)")
    _report(6, "N=2048 level-set machinery on extremal grids; "
               + " | ".join(lines))


def test_criterion_7_deficit_trend(pinch_model):
    out = deficit_trend(pinch_model, [0.2, 0.1, 0.05, 0.02],
                        half_width=8.0, n=512)
    vols, defs = out["volumes"], out["mean_deficits"]
    assert all(x > y for x, y in zip(vols, vols[1:]))
    assert all(v > out["model_volume"] for v in vols)
    assert all(x > y for x, y in zip(defs, defs[1:]))
    _report(7, f"volumes {['%.3f' % v for v in vols]} decrease toward "
               f"V_min = {out['model_volume']:.3f} while mean deficits "
               f"{['%.2e' % x for x in defs]} decrease monotonically")


def test_criterion_8_lemma_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(10_000):
        a = rng.uniform(-2.0, 1.5)
        b = a + rng.uniform(1e-3, 2.0)
        V = rng.uniform(0.1, 5.0)
        chi = a * V + rng.uniform(0.0, 1.0) * (b - a) * V
        n = int(rng.integers(2, 65))
        assert brute_force_max(V, chi, a, b, n) <= \
            lemma_bound(V, chi, a, b) + 1e-12
        checked += 1
    worst_gap = 0.0
    for _ in range(100):
        a = rng.uniform(-2.0, 1.0)
        b = a + rng.uniform(0.1, 2.0)
        V = rng.uniform(0.5, 5.0)
        chi = a * V + rng.uniform(0.05, 0.95) * (b - a) * V
        gap = lemma_bound(V, chi, a, b) - brute_force_max(V, chi, a, b, 1000)
        assert 0.0 <= gap < 1e-2
        worst_gap = max(worst_gap, gap)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(8, f"{checked} random admissible tuples keep brute force <= "
               f"bound + 1e-12; worst n=1000 greedy gap {worst_gap:.2e} "
               f"< 1e-2 ({elapsed:.0f}s < 60s)")


def test_criterion_9_limit_consistency():
    lattice = [
        [-0.5], [-0.9], [-0.3], [-0.1],
        [-0.25, -0.5], [-0.2, -0.7], [-0.45, -0.45], [-0.4, -0.8],
        [-0.1, -0.2, -0.3], [-0.6, -0.2],
    ]
    worst = 0.0
    for orders in lattice:
        d = Divisor.from_orders(orders)
        for b in (0.5, 1.0, 2.0):
            v0 = volume_bounds(d, CurvatureBand(0.0, b)).v_lower
            v_eps = volume_bounds(d, CurvatureBand(-1e-6, b)).v_lower
            rel = abs(v_eps - v0) / v0
            assert rel < 1e-4
            worst = max(worst, rel)
    _report(9, f"|V(-1e-6, b) - V(0, b)| < 1e-4 V(0, b) over a 10-divisor "
               f"lattice (worst {worst:.1e})")
