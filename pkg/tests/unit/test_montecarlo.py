"""
蒙特卡洛模块单元测试
"""

import numpy as np
import pytest

from core.error_handler import ConfigurationError, DataIOError, RankDeficiencyError
from modules.design.layout import build_standard_design
from modules.estimation.gls import expected_means
from modules.montecarlo.presets import get_preset, preset_from_json, preset_layout, preset_scenarios, preset_to_json
from modules.montecarlo.simulate import draw_means, draw_replication, replication_rng, simulate_dataset
from modules.montecarlo.study import REPORT_COLUMNS, report_frame, run_study
from schemas.design_models import ModelKind, TrueModelParams

pytestmark = pytest.mark.unit


@pytest.fixture
def layout():
    return build_standard_design(12, 4, 10)


@pytest.fixture
def truth():
    return TrueModelParams(kind="HH-ANT", mu=1.0, effect=0.3, gamma=0.1, tau_sq=0.05, sigma_sq=1.0)


class TestSimulation:
    def test_same_seed_same_dataset(self, small_layout, truth):
        first = simulate_dataset(small_layout, truth, seed=42)
        second = simulate_dataset(small_layout, truth, seed=42)
        assert first.to_csv(index=False) == second.to_csv(index=False)

    def test_noiseless_outcomes(self, small_layout):
        truth = TrueModelParams(kind="HH", mu=2.0, effect=0.5, tau_sq=0.0, sigma_sq=0.0)
        frame = simulate_dataset(small_layout, truth, seed=1)
        cells = frame.groupby(["cluster", "period"])["y"].mean().unstack("period").to_numpy()
        assert np.allclose(cells, expected_means(small_layout, truth))

    def test_indicator_columns(self, small_layout, truth):
        frame = simulate_dataset(small_layout, truth, seed=3)
        assert list(frame.columns) == ["cluster", "period", "individual", "Z", "A", "y"]
        assert not ((frame["Z"] == 1) & (frame["A"] == 1)).any()
        assert frame["individual"].max() == small_layout.K

    def test_replication_streams_differ(self, layout, truth):
        first = draw_replication(layout, truth, seed=5, replication=0)
        second = draw_replication(layout, truth, seed=5, replication=1)
        again = draw_replication(layout, truth, seed=5, replication=1)
        assert not np.allclose(first.means, second.means)
        assert np.array_equal(second.means, again.means)
        assert second.within_ss == again.within_ss

    def test_sufficient_statistics_centre(self, layout, truth):
        draws = np.stack([draw_means(layout, truth, replication_rng(9, r)).means for r in range(400)])
        expected = expected_means(layout, truth)
        # 每格均值方差 (τ² + σ²/K)/400
        band = 4.0 * np.sqrt((truth.tau_sq + truth.sigma_sq / layout.K) / 400)
        assert np.all(np.abs(draws.mean(axis=0) - expected) < band)

    def test_within_sum_of_squares_scale(self, layout, truth):
        draws = [draw_means(layout, truth, replication_rng(2, r)).within_ss for r in range(200)]
        dof = layout.I * layout.J * (layout.K - 1)
        assert np.mean(draws) == pytest.approx(dof * truth.sigma_sq, rel=0.02)

    def test_individual_level_shapes(self, layout, truth):
        means = draw_means(layout, truth, np.random.default_rng(0), individual_level=True)
        assert means.means.shape == (layout.I, layout.J)
        assert means.K == layout.K and means.within_ss > 0.0


class TestStudy:
    def test_report_columns(self, layout, truth):
        report = run_study(layout, truth, ["HH", "HH-ANT"], n_reps=20, seed=3, workers=1)
        frame = report_frame(report)
        assert list(frame.columns[: len(REPORT_COLUMNS)]) == REPORT_COLUMNS
        assert frame["working_model"].tolist() == ["HH", "HH-ANT"]
        assert report.rows[0].mean_gamma is None
        assert report.rows[1].mean_gamma is not None
        assert all(row.n_ok + row.n_failed == 20 for row in report.rows)

    def test_oracle_expectation_reported(self, layout, truth):
        report = run_study(layout, truth, ["HH-ANT"], n_reps=5, seed=1, workers=1)
        row = report.rows[0]
        assert row.expected_est == pytest.approx(0.3, abs=1e-10)
        assert row.expected_gamma == pytest.approx(0.1, abs=1e-10)

    def test_independent_of_worker_count(self, layout, truth):
        serial = run_study(layout, truth, ["HH"], n_reps=12, seed=11, workers=1)
        parallel = run_study(layout, truth, ["HH"], n_reps=12, seed=11, workers=2)
        assert serial.model_dump() == parallel.model_dump()

    def test_same_seed_same_report(self, layout, truth):
        first = report_frame(run_study(layout, truth, ["HH"], n_reps=8, seed=4, workers=1))
        second = report_frame(run_study(layout, truth, ["HH"], n_reps=8, seed=4, workers=1))
        assert first.to_csv(index=False) == second.to_csv(index=False)

    def test_rank_deficient_model_fails_early(self, truth):
        layout = build_standard_design(6, 4, 10, ell=3)
        with pytest.raises(RankDeficiencyError):
            run_study(layout, truth, ["HH-ANT"], n_reps=2, seed=0, workers=1)

    @pytest.mark.parametrize("kwargs", [
        {"n_reps": 0},
        {"alpha": 1.5},
        {"workers": 0},
    ])
    def test_invalid_arguments(self, layout, truth, kwargs):
        options = {"n_reps": 2, "seed": 0, "workers": 1}
        options.update(kwargs)
        with pytest.raises(ConfigurationError):
            run_study(layout, truth, ["HH"], **options)

    def test_needs_working_model(self, layout, truth):
        with pytest.raises(ConfigurationError):
            run_study(layout, truth, [], n_reps=2, workers=1)


class TestPresets:
    def test_names(self):
        assert list(preset_scenarios()) == ["I-null", "I", "II", "III", "IV"]

    def test_null_preset(self):
        preset = get_preset("I-null")
        assert preset.truth.effect == 0.0 and preset.truth.gamma == 0.0
        assert preset.working_models == [ModelKind.HH, ModelKind.HH_ANT]

    def test_exposure_presets_carry_tate(self):
        for name in ("III", "IV"):
            truth = get_preset(name).truth
            assert truth.tate(9) == pytest.approx(0.12)
        assert get_preset("IV").truth.gamma == 0.04

    def test_simulation_design(self):
        preset = get_preset("II")
        layout = preset_layout(preset)
        assert (layout.I, layout.J, layout.K) == (32, 9, 100)
        assert preset.truth.tau_sq == pytest.approx(0.141 ** 2)
        assert preset.truth.period_effects(9)[0] == 0.0

    def test_json_round_trip(self, tmp_path):
        preset = get_preset("IV")
        assert preset_from_json(preset_to_json(preset)) == preset
        path = tmp_path / "iv.json"
        path.write_text(preset_to_json(preset), encoding="utf-8")
        assert preset_from_json(path) == preset

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError):
            get_preset("V")

    def test_malformed_json(self):
        with pytest.raises(DataIOError):
            preset_from_json("{not json")

    def test_invalid_document(self):
        with pytest.raises(ConfigurationError):
            preset_from_json('{"name": "x"}')
