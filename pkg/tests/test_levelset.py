import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import ellipe

from conicvol import (
    CurvatureBand,
    Divisor,
    build_extremal,
    b_prime_check,
    geometry,
    grid_from_function,
    grid_from_metric,
    iso_deficit,
    key_inequality_check,
    load_grid,
    save_grid,
    slope_band_check,
    summarize,
)
from conicvol.levelset import GriddedMetric, deficit_trend

PI = math.pi


@pytest.fixture(scope="module")
def sphere_grid(round_sphere):
    return grid_from_metric(round_sphere, half_width=20.0, n=512)


@pytest.fixture(scope="module")
def sphere_summary(sphere_grid):
    return summarize(sphere_grid, n_thresholds=192)


@pytest.fixture(scope="module")
def pinch_grid(pinch_model):
    return grid_from_metric(pinch_model, half_width=8.0, n=1024)


@pytest.fixture(scope="module")
def pinch_summary(pinch_grid):
    return summarize(pinch_grid, n_thresholds=256)


class TestGrid:
    def test_axes_and_spacing(self, sphere_grid):
        assert sphere_grid.spacing == pytest.approx(40.0 / 512)
        x = sphere_grid.axes()
        assert len(x) == 512 and x[0] == pytest.approx(-20.0 + x[1] - x[0], abs=1.0)

    def test_masked_tip_bookkeeping(self):
        d = Divisor.from_orders([-0.25, -0.5])
        m = build_extremal("Vab", d, CurvatureBand(-0.5, 1.0))
        g = grid_from_metric(m, half_width=8.0, n=512)
        assert g.alpha_eff == pytest.approx(-0.25)
        # ~30 cells inside the 3-cell mask radius
        assert 0 < g.masked_fraction() < 35.0 / 512**2
        assert g.tip_volume > 0 and g.tip_area > 0
        assert g.tip_curv_mass == pytest.approx(m.b * g.tip_volume)

    def test_degenerate_vmax_tip_completion(self):
        # a single inverted-football piece measures caps from the outside;
        # the tip completion must still be the inside-disk mass
        d = Divisor.from_orders([-0.4, -0.4])
        m = build_extremal("Vmax", d, CurvatureBand(0.3, 1.0))
        g = grid_from_metric(m, 8.0, 512)
        r_eq = math.sqrt(g.tip_area / math.pi)
        truth = m.volume_closed() - m.pieces[0].cap_volume(r_eq)
        assert g.tip_volume == pytest.approx(truth, rel=1e-12)
        assert g.tip_volume < 0.1 * m.volume_closed()
        s = summarize(g, n_thresholds=128)
        assert b_prime_check(s).passed

    def test_tail_fraction(self, sphere_grid):
        # round sphere at L=20 leaves ~ 4 pi / L^2 outside
        assert sphere_grid.tail_fraction() == pytest.approx(
            (4 * PI / (1 + 400)) / (4 * PI), rel=0.3)

    def test_raster_round_trip(self, tmp_path, pinch_grid):
        path = tmp_path / "grid.bin"
        save_grid(path, pinch_grid)
        back = load_grid(path)
        np.testing.assert_array_equal(back.u, pinch_grid.u)
        np.testing.assert_array_equal(back.mask, pinch_grid.mask)
        np.testing.assert_array_equal(back.k, pinch_grid.k)
        assert back.half_width == pinch_grid.half_width
        assert back.total_volume == pinch_grid.total_volume
        assert back.alpha_eff == pinch_grid.alpha_eff

    def test_rejects_odd_n(self, round_sphere):
        with pytest.raises(ValueError):
            grid_from_metric(round_sphere, 10.0, 255)


class TestSummarize:
    def test_round_sphere_identity(self, sphere_summary):
        # K == 1 makes the curvature integral equal the volume: A(s) = s
        np.testing.assert_allclose(sphere_summary.a_of_s,
                                   sphere_summary.s_grid, atol=1e-10)
        assert sphere_summary.k_mode == "analytic"
        assert not sphere_summary.jump_intervals

    def test_flat_cone_zero_curvature(self):
        g = grid_from_function(
            lambda x, y: -0.5 * np.log(np.hypot(x, y)),
            half_width=8.0, n=512,
            k=lambda x, y: np.zeros_like(x),
            singular_points=((0.0, 0.0, -0.5),))
        s = summarize(g, n_thresholds=128)
        assert np.max(np.abs(s.a_of_s)) < 1e-12
        assert s.alpha_eff == pytest.approx(-0.5)

    def test_pinch_model_bang_bang_profile(self, pinch_model, pinch_summary):
        # A(s) is piecewise linear with slopes {b, a} and breakpoint
        # delta = (chi - a V)/(b - a) = 2 pi
        s = pinch_summary
        delta = (pinch_model.chi - 0.25 * pinch_model.target_volume) / 0.75
        assert delta == pytest.approx(2 * PI, rel=1e-12)
        sel_b = (s.s_grid > 0.2 * delta) & (s.s_grid < 0.8 * delta)
        sel_a = (s.s_grid > 1.3 * delta) & (s.s_grid < 2.2 * delta)
        slope_b = np.polyfit(s.s_grid[sel_b], s.a_of_s[sel_b], 1)[0]
        slope_a = np.polyfit(s.s_grid[sel_a], s.a_of_s[sel_a], 1)[0]
        assert slope_b == pytest.approx(1.0, abs=5e-3)
        assert slope_a == pytest.approx(0.25, abs=5e-3)
        # breakpoint from the two fitted lines
        int_b = np.polyfit(s.s_grid[sel_b], s.a_of_s[sel_b], 1)[1]
        int_a = np.polyfit(s.s_grid[sel_a], s.a_of_s[sel_a], 1)[1]
        cross = (int_a - int_b) / (slope_b - slope_a)
        assert cross == pytest.approx(delta, rel=0.02)

    def test_chi_captured_tail_corrected(self, pinch_model, pinch_summary):
        expect = pinch_model.chi - 0.25 * (pinch_model.target_volume
                                           - pinch_summary.v_captured)
        assert pinch_summary.chi_captured == pytest.approx(expect, rel=1e-3)

    def test_t_slope_reported(self, sphere_summary):
        slope = sphere_summary.max_t_slope()
        assert np.isfinite(slope) and slope > 0

    def test_threshold_validation(self, sphere_grid):
        with pytest.raises(ValueError):
            summarize(sphere_grid, n_thresholds=4)


@pytest.fixture(scope="module")
def clipped_summary(round_sphere):
    psi = -1.0

    def clipped(x, y):
        u = round_sphere.u(np.log(np.hypot(x, y)))
        return np.where((u >= psi) & (u <= psi + 0.3), psi, u)

    g = grid_from_function(clipped, 20.0, 512)
    return summarize(g, n_thresholds=128, k_mode="laplacian"), psi


class TestPlateaus:
    def test_jump_detected(self, clipped_summary):
        s, psi = clipped_summary
        assert len(s.jump_intervals) == 1
        j = s.jump_intervals[0]
        assert j.t == pytest.approx(psi)
        assert j.s_hi > j.s_lo

    def test_b_prime_exact_on_jump(self, clipped_summary):
        # on the jump interval B is affine with slope exactly e^{-2 psi}
        s, psi = clipped_summary
        j = s.jump_intervals[0]
        mid = 0.5 * (j.s_lo + j.s_hi)
        k = int(np.searchsorted(s.s_knots, mid))
        slope = (s.b_knots[k] - s.b_knots[k - 1]) / (s.s_knots[k] - s.s_knots[k - 1])
        assert slope == pytest.approx(math.exp(-2 * psi), rel=1e-9)

    def test_t_constant_across_jump(self, clipped_summary):
        s, psi = clipped_summary
        j = s.jump_intervals[0]
        inside = (s.s_grid > j.s_lo) & (s.s_grid < j.s_hi)
        assert np.all(np.abs(s.t_of_s[inside] - psi) < 1e-12)

    def test_overall_checks_still_pass(self, clipped_summary):
        s, _ = clipped_summary
        assert b_prime_check(s).passed


class TestChecks:
    def test_b_prime_round_sphere(self, sphere_summary):
        rep = b_prime_check(sphere_summary)
        assert rep.passed and rep.median_rel_err < 0.02

    def test_b_prime_model_grid(self, pinch_summary):
        assert b_prime_check(pinch_summary).median_rel_err < 0.002

    def test_b_prime_vmax_grid(self, teardrop):
        m = build_extremal("Vmax", teardrop, CurvatureBand(0.2, 1.0))
        g = grid_from_metric(m, 8.0, 512)
        assert b_prime_check(summarize(g, n_thresholds=128)).passed

    def test_slope_band_round_sphere(self, sphere_summary):
        rep = slope_band_check(sphere_summary, (1.0, 1.0))
        assert rep.passed and rep.max_violation == 0.0

    def test_slope_band_model(self, pinch_summary):
        rep = slope_band_check(pinch_summary, CurvatureBand(0.25, 1.0))
        assert rep.passed
        assert rep.slope_min > 0.25 - rep.tol
        assert rep.slope_max < 1.0 + rep.tol

    def test_slope_band_perturbed_measured_range(self, round_sphere):
        # curvature measured through the discrete Laplacian must stay in
        # the measured range of the analytic curvature
        def bumped(x, y):
            u = round_sphere.u(np.log(np.hypot(x, y)))
            return u + 0.05 * np.exp(-((x - 1.0) ** 2 + y**2))
        g = grid_from_function(bumped, 20.0, 512)
        s = summarize(g, n_thresholds=128, k_mode="laplacian")
        lap = s  # slopes measured below
        rep = slope_band_check(s, (0.5, 1.5))
        assert rep.passed

    def test_key_inequality_equality_case(self, pinch_summary):
        rep = key_inequality_check(pinch_summary)
        assert rep.passed_pointwise
        assert rep.passed_integral
        assert abs(rep.defect_corrected) < 1e-3 * pinch_summary.total_volume

    def test_key_inequality_perturbed(self, minvol_model):
        # an off-center bump pushes the metric off extremality: strictly
        # positive margin somewhere, integral defect still <= 0
        base = grid_from_metric(minvol_model, 8.0, 512)
        x = base.axes()
        xx, yy = np.meshgrid(x, x)
        bump = 0.6 * np.exp(-((xx - 1.5) ** 2 + yy**2) / 2.0)
        u = base.u + bump
        vol = float(np.sum(np.exp(2 * u)) * base.spacing**2) \
            + minvol_model.target_volume \
            - float(np.sum(np.exp(2 * base.u)) * base.spacing**2)
        g = GriddedMetric(u, 8.0, total_volume=vol,
                          total_curv_mass=minvol_model.chi,
                          tail_curvature=-1.0)
        s = summarize(g, n_thresholds=256, k_mode="laplacian")
        rep = key_inequality_check(s)
        assert rep.passed_pointwise
        lhs = np.diff(np.exp(2 * s.t_knots) * s.b_knots) / np.diff(s.s_knots)
        rhs_at = 1.0 + s.alpha_eff - s.a_knots / (2 * PI)
        margins = lhs - 0.5 * (rhs_at[1:] + rhs_at[:-1])
        assert margins.max() > 3.0 * rep.tol
        assert rep.defect_corrected < -0.1

    def test_masked_model_pipeline(self):
        d = Divisor.from_orders([-0.25, -0.5])
        m = build_extremal("Vab", d, CurvatureBand(-0.5, 1.0))
        g = grid_from_metric(m, 8.0, 1024)
        s = summarize(g, n_thresholds=256)
        assert b_prime_check(s).passed
        rep = key_inequality_check(s)
        assert rep.passed_integral


class TestIsoDeficit:
    def test_centered_disk_near_zero(self):
        g = grid_from_function(lambda x, y: 1 - (x**2 + y**2), 3.0, 512)
        d = iso_deficit(g, 0.0)
        assert abs(d) < 4 * PI * g.spacing  # O(perimeter * cell)

    def test_ellipse_matches_exact_perimeter(self):
        g = grid_from_function(lambda x, y: 1 - (x**2 / 4 + y**2), 3.0, 1024)
        p_exact = 8 * ellipe(0.75)
        d_expect = p_exact**2 - 4 * PI * 2 * PI
        assert iso_deficit(g, 0.0) == pytest.approx(d_expect, rel=0.01)

    def test_two_disjoint_unit_disks(self):
        def u(x, y):
            return np.maximum(1 - ((x - 2.5) ** 2 + y**2),
                              1 - ((x + 2.5) ** 2 + y**2))
        g = grid_from_function(u, 6.0, 1024)
        assert iso_deficit(g, 0.0) == pytest.approx(8 * PI**2, rel=0.01)

    def test_empty_and_full_raise(self):
        g = grid_from_function(lambda x, y: 1 - (x**2 + y**2), 3.0, 128)
        with pytest.raises(ValueError):
            iso_deficit(g, 5.0)
        with pytest.raises(ValueError):
            iso_deficit(g, -100.0)


class TestRadialAgreement:
    def test_grid_matches_radial_quadrature(self, minvol_model):
        # grid-based s, B, A against the 1-D route at N = 2048
        g = grid_from_metric(minvol_model, 8.0, 2048)
        s = summarize(g, n_thresholds=512)
        prof = geometry.profile_of(minvol_model)
        idx = np.linspace(40, len(s.thresholds) - 40, 9).astype(int)
        for i in idx:
            t = float(s.thresholds[i])
            xi_t = brentq(lambda xi: float(minvol_model.u(xi)) - t, -30, 10)
            s_1d = geometry.volume(prof, -40.0, xi_t, tails=(True, False)).value
            a_1d = geometry.gauss_bonnet(prof, -40.0, xi_t,
                                         tails=(True, False)).value
            b_1d = PI * math.exp(2 * xi_t)
            assert s.s_of_t[i] == pytest.approx(s_1d, rel=5e-3)
            assert s.b_of_t[i] == pytest.approx(b_1d, rel=5e-3)
            assert s.a_of_t[i] == pytest.approx(a_1d, rel=5e-3, abs=5e-3)


class TestRefinement:
    def test_error_ratio_first_order_window(self, teardrop, minvol_model,
                                            pinch_model):
        # aggregate N -> 2N error ratio over the model suite
        ratios = []
        for m in (minvol_model, pinch_model):
            errs = []
            for n in (512, 1024):
                g = grid_from_metric(m, 8.0, n)
                s = summarize(g, n_thresholds=256)
                bp = b_prime_check(s)
                lhs = np.diff(np.exp(2 * s.t_knots) * s.b_knots) / np.diff(s.s_knots)
                rhs_at = 1.0 + s.alpha_eff - s.a_knots / (2 * PI)
                rhs = 0.5 * (rhs_at[1:] + rhs_at[:-1])
                cells = 0.5 * (s.b_knots[1:] + s.b_knots[:-1]) / s.spacing**2
                e10 = float(np.mean(np.abs((lhs - rhs)[cells >= 400])))
                errs.append((bp.median_rel_err, e10))
            ratios.append(errs[1][0] / errs[0][0])
            ratios.append(errs[1][1] / errs[0][1])
        mean_ratio = float(np.exp(np.mean(np.log(ratios))))
        assert 0.3 < mean_ratio < 0.7


class TestDeficitTrend:
    def test_monotone_family(self, pinch_model):
        out = deficit_trend(pinch_model, [0.2, 0.1, 0.05, 0.02],
                            half_width=8.0, n=256)
        vols, defs = out["volumes"], out["mean_deficits"]
        assert all(x > y for x, y in zip(vols, vols[1:]))
        assert all(v > out["model_volume"] for v in vols)
        assert all(x > y for x, y in zip(defs, defs[1:]))

    def test_rejects_masked_models(self):
        d = Divisor.from_orders([-0.25, -0.5])
        m = build_extremal("Vab", d, CurvatureBand(-0.5, 1.0))
        with pytest.raises(ValueError):
            deficit_trend(m, [0.1], n=256)
