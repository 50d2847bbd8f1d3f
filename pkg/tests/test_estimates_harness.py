import json

import numpy as np
import pytest

from services.estimates_harness import (
    CaseReport,
    HypothesisViolation,
    InsufficientSamplesError,
    alpha_limit_experiment,
    bilinear_bound_experiment,
    bilinear_hypotheses,
    conditions_report,
    energy_monotonicity_check,
    h2_bound_check,
    higher_reg_weight_check,
    ladyzhenskaya_check,
    lipschitz_experiment,
    mapping_reports,
    projector_experiment,
    smoothing_rate_experiment,
    worked_example_reports,
)
from services.experiment_runner import ALPHA_SWEEP
from services.initial_data import gen_random_sobolev, gen_single_mode
from services.semigroup_ops import TimeGrid, Trajectory, gamma
from services.spectral_core import Grid


def test_case_report_is_json_ready():
    report = CaseReport("x", "pass", {"value": np.float64(1.5), "flags": np.array([True, False]),
                                      "count": np.int64(3)})
    payload = report.to_dict()
    assert json.loads(json.dumps(payload))["measured"] == {"value": 1.5, "flags": [True, False], "count": 3}
    assert report.passed
    assert not CaseReport("x", "inconclusive").passed


@pytest.mark.parametrize("dim, alpha", [(2, 0.0), (3, 0.3), (3, 2.0)])
def test_projector_identities(dim, alpha):
    report = projector_experiment(Grid(dim, 16), alpha)
    assert report.verdict == "pass", report.measured
    assert report.inputs["ensemble_size"] == 100


class TestSmoothing:
    def test_equal_regularity_is_flat(self):
        tg = TimeGrid.log_graded(3e-3, 24, min_fraction=6e-3)
        report = smoothing_rate_experiment(1.0, 1.0, n=2, points=1024, tg=tg, tolerance=0.02)
        assert report.verdict == "pass", report.measured
        assert abs(report.measured["slope"]) < 0.03

    def test_two_dimensional_gain(self):
        tg = TimeGrid.log_graded(3e-3, 24, min_fraction=6e-3)
        report = smoothing_rate_experiment(0.75, 1.0, n=2, points=1024, tg=tg)
        assert report.verdict == "pass", report.measured
        assert report.measured["expected_slope"] == pytest.approx(-0.12)
        assert report.measured["unresolved_nodes"] == 0
        assert abs(report.measured["increment_slope"] - (-0.12)) <= 0.05

    def test_caller_window_is_used_as_given(self):
        tg = TimeGrid.log_graded(3e-3, 16, min_fraction=8e-3)
        report = smoothing_rate_experiment(0.75, 1.0, n=2, points=1024, tg=tg)
        assert report.inputs["t_min"] == pytest.approx(2.4e-5)
        assert report.inputs["t_max"] == pytest.approx(3e-3)
        assert report.inputs["samples"] == 16

    def test_default_window_spans_three_decades(self):
        report = smoothing_rate_experiment(0.75, 1.0, n=3, points=16)
        assert report.inputs["t_min"] == pytest.approx(1e-4)
        assert report.inputs["t_max"] == pytest.approx(0.1)
        assert report.inputs["samples"] == 24
        # nodes under 4/7^2 stay in the plain-norm fit
        assert report.measured["unresolved_nodes"] > 0
        assert report.measured["slope"] < 0

    @pytest.mark.slow
    def test_three_dimensional_gain(self):
        tg = TimeGrid.log_graded(0.03, 24, min_fraction=0.062)
        report = smoothing_rate_experiment(0.75, 1.0, n=3, points=96, tg=tg, min_decades=1.2)
        assert report.verdict in ("pass", "inconclusive"), report.measured
        assert abs(report.measured["increment_slope"] - report.measured["expected_slope"]) <= 0.05

    @pytest.mark.slow
    def test_lp_gain(self):
        tg = TimeGrid.log_graded(0.05, 24, min_fraction=0.09)
        report = smoothing_rate_experiment(0.375, 1.0, p=4.0, n=3, points=64, tg=tg,
                                           min_decades=1.0, tolerance=0.1)
        assert report.verdict in ("pass", "inconclusive"), report.measured
        assert abs(report.measured["increment_slope"] - report.measured["expected_slope"]) <= 0.1

    def test_narrow_window_is_inconclusive(self):
        tg = TimeGrid.log_graded(0.1, 8, min_fraction=0.5)
        report = smoothing_rate_experiment(0.75, 1.0, n=3, points=16, tg=tg)
        assert report.verdict == "inconclusive"

    def test_loss_of_regularity_rejected(self):
        with pytest.raises(ValueError):
            smoothing_rate_experiment(1.0, 0.5, n=2, points=16)


def test_mapping_experiments():
    reports = mapping_reports(Grid(3, 16), seed=2)
    assert [r.criterion for r in reports] == ["la_mapping", "g_mapping", "g_la_mapping"]
    for report in reports:
        assert report.verdict == "pass", (report.criterion, report.measured)
    assert reports[2].measured["sigma_out"] == pytest.approx(6.0)


class TestBilinear:
    def test_hypotheses_hold_for_default_tuple(self):
        assert bilinear_hypotheses(2.0, 2.0, 4 / 3, 3) == []

    def test_hypothesis_failures_are_named(self):
        assert "r ≥ 1" in bilinear_hypotheses(0.5, 2.0, 4 / 3, 3)
        assert "0 ≤ n(2q−p)/(pq)" in bilinear_hypotheses(2.0, 4.0, 1.5, 3)
        assert "n(2q−p)/(pq) ≤ r−1" in bilinear_hypotheses(2.0, 2.0, 4.0, 3)
        assert "n(2q−p)/(pq) ≤ r" in bilinear_hypotheses(2.0, 2.0, 4.0, 3, lipschitz=True)

    def test_rejected_tuple_raises(self):
        with pytest.raises(HypothesisViolation) as excinfo:
            bilinear_bound_experiment(0.5, 2.0, 4 / 3, grids=[Grid(2, 16), Grid(2, 32)])
        assert excinfo.value.criterion == "bilinear_bound"
        assert "r ≥ 1" in excinfo.value.violated
        report = excinfo.value.to_report()
        assert report.verdict == "rejected" and not report.passed
        assert report.inputs["r"] == 0.5

    def test_lipschitz_rejects_wide_gap(self):
        with pytest.raises(HypothesisViolation) as excinfo:
            lipschitz_experiment(2.0, 2.0, 4.0, grids=[Grid(3, 16), Grid(3, 32)])
        assert excinfo.value.violated == ["n(2q−p)/(pq) ≤ r"]

    def test_bound_is_stable_under_refinement(self):
        report = bilinear_bound_experiment(2.0, 2.0, 4 / 3, ensemble_size=3,
                                           grids=[Grid(2, 32), Grid(2, 64)])
        assert report.verdict == "pass", report.measured
        assert all(np.isfinite(report.measured["max_ratio"]))

    def test_lipschitz_bound_is_stable_under_refinement(self):
        report = lipschitz_experiment(2.0, 2.0, 4 / 3, ensemble_size=3, grids=[Grid(2, 32), Grid(2, 64)])
        assert report.verdict == "pass", report.measured

    @pytest.mark.parametrize("experiment", [bilinear_bound_experiment, lipschitz_experiment])
    def test_ensemble_is_drawn_at_regularity_r(self, experiment, monkeypatch):
        import services.estimates_harness as harness

        drawn = []

        def recording(grid, s, seed):
            drawn.append(s)
            return gen_random_sobolev(grid, s, seed)

        monkeypatch.setattr(harness, "gen_random_sobolev", recording)
        experiment(1.5, 2.0, 4 / 3, ensemble_size=2, grids=[Grid(2, 16), Grid(2, 32)])
        assert drawn and set(drawn) == {1.5}

    @pytest.mark.slow
    def test_three_dimensional_bound(self):
        report = bilinear_bound_experiment(2.0, 2.0, 4 / 3, ensemble_size=2)
        assert report.verdict == "pass", report.measured


class TestAPrioriChecks:
    def test_growing_energy_fails(self, smooth2d, params):
        grid = TimeGrid.uniform(0.1, 2)
        trajectory = Trajectory(grid, (smooth2d, smooth2d * 2.0, smooth2d * 3.0))
        report = energy_monotonicity_check(trajectory, params.alpha, params.nu)
        assert report.verdict == "fail"
        assert report.measured["max_increase"] > 0

    @pytest.mark.parametrize("spacing, verdict", [(1.0, "pass"), (2.5, "fail")])
    def test_rate_uses_difference_quotient(self, taylor_green2d, params, spacing, verdict):
        # E decays like e^{-0.4t}; the quotient over the trapezoid mean is tanh(x)/x, x = 0.2·spacing
        grid = TimeGrid.uniform(2 * spacing, 2)
        decay = 2 * params.nu
        trajectory = Trajectory(grid, tuple(taylor_green2d * np.exp(-decay * t) for t in grid.nodes))
        report = energy_monotonicity_check(trajectory, params.alpha, params.nu)
        x = 0.2 * spacing
        assert report.measured["min_rate_ratio"] == pytest.approx(np.tanh(x) / x, rel=1e-9)
        assert report.verdict == verdict

    def test_constant_energy_misses_dissipation_rate(self, taylor_green2d, params):
        grid = TimeGrid.uniform(0.01, 2)
        trajectory = Trajectory(grid, (taylor_green2d,) * 3)
        report = energy_monotonicity_check(trajectory, params.alpha, params.nu)
        assert report.measured["max_increase"] == 0.0
        assert report.verdict == "fail"
        assert report.measured["min_rate_ratio"] == 0.0

    def test_h2_bound_orders_runs(self, smooth2d):
        grid = TimeGrid.uniform(0.1, 4)
        runs = [gamma(smooth2d * factor, grid, 0.1) for factor in (2.0, 0.5, 1.0)]
        report = h2_bound_check(runs)
        assert report.verdict == "pass"
        assert report.measured["initial_h1"] == sorted(report.measured["initial_h1"])

    def test_h2_bound_detects_disorder(self, grid2d):
        grid = TimeGrid.uniform(0.1, 2)
        rough = Trajectory.constant(gen_single_mode(grid2d, (0, 3), amplitude=1.0), grid)
        smooth = Trajectory.constant(gen_single_mode(grid2d, (0, 1), amplitude=3.0), grid)
        assert h2_bound_check([rough, smooth]).verdict == "fail"

    def test_higher_regularity_weight_of_heat_flow(self, grid3d):
        phi = gen_random_sobolev(grid3d, s=1.0, seed=8)
        trajectory = gamma(phi, TimeGrid.log_graded(0.1, 30, min_fraction=1e-4), 1.0)
        report = higher_reg_weight_check(trajectory, s1=1.0, r=2.0)
        assert report.verdict == "pass", report.measured

    def test_higher_regularity_weight_detects_singular_growth(self, smooth2d):
        grid = TimeGrid.log_graded(0.1, 30, min_fraction=1e-4)
        states = (smooth2d,) + tuple(smooth2d * (1.0 / t) for t in grid.nodes[1:])
        report = higher_reg_weight_check(Trajectory(grid, states), s1=1.0, r=2.0)
        assert report.verdict == "fail"
        assert report.measured["ratio"] > 1.25

    def test_higher_regularity_needs_early_samples(self, smooth2d):
        trajectory = gamma(smooth2d, TimeGrid.uniform(0.1, 4), 1.0)
        with pytest.raises(InsufficientSamplesError):
            higher_reg_weight_check(trajectory, s1=1.0, r=2.0)

    def test_interpolation_inequality(self, smooth2d, smooth3d, taylor_green2d):
        report = ladyzhenskaya_check([smooth2d, smooth3d, taylor_green2d])
        assert report.verdict == "pass"
        assert report.measured["max_ratio"] <= 1.0 + 1e-12

    def test_interpolation_orders(self, smooth2d):
        with pytest.raises(ValueError):
            ladyzhenskaya_check([smooth2d], i=2, m=2)


def test_alpha_limit_is_quadratic(grid2d):
    phi = gen_random_sobolev(grid2d, s=3.0, seed=5, amplitude=1.0)
    report = alpha_limit_experiment(ALPHA_SWEEP, phi, horizon=0.5, nu=0.1, dt=0.005)
    assert report.verdict == "pass", report.measured
    assert report.measured["fitted_alphas"] == [0.025, 0.05, 0.1, 0.2]
    assert abs(report.measured["slope"] - 2.0) <= 0.2
    assert report.measured["zero_alpha_gap"] == 0.0


def test_alpha_limit_needs_two_positive_alphas(smooth2d):
    with pytest.raises(ValueError):
        alpha_limit_experiment((0.0, 0.1), smooth2d, horizon=0.1)


class TestConditionReports:
    @pytest.mark.parametrize("kind", ["ct", "la"])
    def test_scan_report(self, kind):
        report, rows = conditions_report(kind)
        assert report.verdict == "pass", report.measured
        assert len(rows) == report.measured["points"]

    def test_worked_examples(self):
        reports = worked_example_reports()
        assert len(reports) == 4
        assert all(r.verdict == "pass" for r in reports)
