"""
功效模块单元测试
解析方差、功效、最小可检测效应、样本量与比较网格
"""

import numpy as np
import pytest
from structlog.testing import capture_logs

from core.error_handler import ConfigurationError, ConvergenceError
from modules.correlation.exchangeable import params_from_icc
from modules.design.layout import build_standard_design
from modules.power.grids import power_pair, power_ratio_grid, ratio_crossing, variance_inflation
from modules.power.planning import detectable_effect, effect_for_power, power, sample_size_search
from modules.power.variance import variance, variance_standard
from schemas.design_models import ModelKind

pytestmark = pytest.mark.unit


class TestVariance:
    """模拟研究设计上的解析标准误"""

    @pytest.mark.parametrize("model,se", [
        (ModelKind.HH, 0.0203),
        (ModelKind.HH_ANT, 0.0240),
        (ModelKind.ETI, 0.0325),
        (ModelKind.ETI_ANT, 0.0426),
    ])
    def test_simulation_design(self, sim_layout, sim_params, model, se):
        result = variance(model, sim_layout, sim_params)
        assert result.se == pytest.approx(se, abs=1e-4)
        assert result.method == "closed_form"

    @pytest.mark.parametrize("model", [ModelKind.HH, ModelKind.HH_ANT])
    def test_standard_form_matches(self, sim_layout, sim_params, model):
        general = variance(model, sim_layout, sim_params).variance
        standard = variance_standard(model, 32, 8, 100, sim_params).variance
        assert standard == pytest.approx(general, rel=1e-12)

    def test_anticipation_inflates(self, planning_layout, planning_params):
        hh = variance(ModelKind.HH, planning_layout, planning_params).variance
        hhant = variance(ModelKind.HH_ANT, planning_layout, planning_params).variance
        eti = variance(ModelKind.ETI, planning_layout, planning_params).variance
        etiant = variance(ModelKind.ETI_ANT, planning_layout, planning_params).variance
        assert hh < hhant and eti <= etiant

    def test_wider_window_uses_information(self, sim_params):
        layout = build_standard_design(32, 9, 100, ell=2)
        assert variance(ModelKind.HH_ANT, layout, sim_params).method == "information"

    def test_params_must_match_layout(self, planning_layout, sim_params):
        with pytest.raises(ConfigurationError):
            variance(ModelKind.HH, planning_layout, sim_params)

    def test_standard_form_rejects_exposure_models(self, sim_params):
        with pytest.raises(ConfigurationError):
            variance_standard(ModelKind.ETI, 32, 8, 100, sim_params)


class TestPower:
    def test_null_effect(self):
        assert power(0.0, 0.01) == pytest.approx(0.025)

    def test_vanishing_variance(self):
        assert power(0.1, 1e-8) == pytest.approx(1.0)

    def test_symmetric_in_sign(self):
        assert power(-0.05, 0.001) == pytest.approx(power(0.05, 0.001))

    def test_round_trip(self):
        effect = effect_for_power(0.0004, 0.9, alpha=0.01)
        assert power(effect, 0.0004, alpha=0.01) == pytest.approx(0.9)

    def test_simulation_hh_power(self, sim_layout, sim_params):
        var = variance(ModelKind.HH, sim_layout, sim_params).variance
        assert power(0.075, var) == pytest.approx(0.96, abs=0.01)

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_invalid_alpha(self, alpha):
        with pytest.raises(ConfigurationError):
            power(0.1, 0.01, alpha=alpha)


class TestDetectableEffect:
    """ETI-ANT, 18 簇 7 期, 每簇-时期 50 人"""

    @pytest.mark.parametrize("rho,expected", [
        (0.0, 0.124),
        (0.01, 0.212),
        (0.05, 0.281),
        (0.10, 0.299),
        (0.20, 0.310),
    ])
    def test_planning_table(self, planning_layout, rho, expected):
        params = params_from_icc(rho, 1.0, 50, 7)
        assert detectable_effect(ModelKind.ETI_ANT, planning_layout, params) == pytest.approx(expected, abs=1e-3)

    def test_power_at_detectable_effect(self, planning_layout, planning_params):
        var = variance(ModelKind.ETI_ANT, planning_layout, planning_params).variance
        assert power(0.299, var) == pytest.approx(0.80, abs=5e-3)


class TestSampleSize:
    def test_clusters_in_sequence_multiples(self, planning_layout, planning_params):
        result = sample_size_search(ModelKind.HH, planning_layout, planning_params, effect=0.2)
        assert result.I % 6 == 0
        assert result.achieved_power >= 0.8
        assert result.detectable_effect <= 0.2

        smaller = planning_layout.with_counts([result.I // 6 - 1] * 6)
        if smaller.I > 0:
            var = variance(ModelKind.HH, smaller, planning_params).variance
            assert power(0.2, var) < 0.8

    def test_cluster_period_size(self, planning_layout, planning_params):
        result = sample_size_search(ModelKind.HH, planning_layout, planning_params, effect=0.15, vary="K")
        assert result.vary == "K"
        assert result.I == planning_layout.I
        assert result.achieved_power >= 0.8

    def test_unreachable(self, planning_layout, planning_params):
        # 所需 K 超出搜索上限
        with pytest.raises(ConvergenceError):
            sample_size_search(ModelKind.HH, planning_layout, planning_params, effect=0.001, vary="K")

    def test_zero_effect(self, planning_layout, planning_params):
        with pytest.raises(ConfigurationError):
            sample_size_search(ModelKind.HH, planning_layout, planning_params, effect=0.0)

    def test_unknown_search_variable(self, planning_layout, planning_params):
        with pytest.raises(ConfigurationError):
            sample_size_search(ModelKind.HH, planning_layout, planning_params, effect=0.2, vary="J")


class TestComparisons:
    @pytest.fixture
    def five_period_layout(self):
        return build_standard_design(32, 5, 100)

    def test_no_anticipation_favours_reduced_model(self, five_period_layout):
        params = params_from_icc(0.1, 1.0, 100, 5)
        full, reduced, valid = power_pair("hh-vs-hhant", five_period_layout, params, 0.1, 0.0)
        assert reduced > full
        assert valid

    def test_anticipation_marks_invalid(self, five_period_layout):
        params = params_from_icc(0.1, 1.0, 100, 5)
        assert power_pair("hh-vs-hhant", five_period_layout, params, 0.1, 0.05)[2] is False

    @pytest.mark.parametrize("rho", [0.05, 0.10, 0.20])
    def test_ratio_crossing(self, five_period_layout, rho):
        grid = power_ratio_grid(
            "hh-vs-hhant",
            five_period_layout,
            rho_values=[rho],
            axis_values=np.round(np.linspace(0.0, 0.6, 61), 4),
            effect=0.1,
        )
        assert ratio_crossing(grid, rho) == pytest.approx(0.295, abs=0.01)

    def test_grid_is_row_major(self, five_period_layout):
        grid = power_ratio_grid(
            "eti-vs-etiant", five_period_layout, rho_values=[0.05, 0.1], axis_values=[0.1, 0.2, 0.3], ratio=0.5,
            sweep="effect",
        )
        assert grid["param1"].tolist() == [0.05] * 3 + [0.1] * 3
        assert grid["param2"].tolist() == [0.1, 0.2, 0.3] * 2

    def test_invalid_cells_warned_once(self, five_period_layout):
        with capture_logs() as logs:
            grid = power_ratio_grid(
                "hh-vs-hhant", five_period_layout, rho_values=[0.05, 0.1], axis_values=[0.0, 0.2, 0.4], effect=0.1
            )
        warnings = [entry for entry in logs if entry["log_level"] == "warning"]
        assert len(warnings) == 1
        assert warnings[0]["invalid_cells"] == int((~grid["valid"]).sum()) == 4
        assert warnings[0]["cells"] == 6

    def test_valid_grid_not_warned(self, five_period_layout):
        with capture_logs() as logs:
            power_ratio_grid("hh-vs-hhant", five_period_layout, rho_values=[0.1], axis_values=[0.0], effect=0.1)
        assert not [entry for entry in logs if entry["log_level"] == "warning"]

    def test_sweep_requires_fixed_value(self, five_period_layout):
        with pytest.raises(ConfigurationError):
            power_ratio_grid("hh-vs-hhant", five_period_layout, [0.1], [0.1], sweep="ratio")
        with pytest.raises(ConfigurationError):
            power_ratio_grid("hh-vs-hhant", five_period_layout, [0.1], [0.1], sweep="diagonal", effect=0.1)

    def test_unknown_comparison(self, five_period_layout):
        params = params_from_icc(0.1, 1.0, 100, 5)
        with pytest.raises(ConfigurationError):
            power_pair("hh-vs-eti", five_period_layout, params, 0.1, 0.0)


class TestInflation:
    def test_nine_period_range(self):
        frame = variance_inflation(32, 100, [9], np.linspace(0.02, 0.25, 24))
        assert frame["ratio_hh"].between(1.40, 1.50).all()

    def test_ratio_columns(self):
        frame = variance_inflation(12, 20, [4, 5], [0.05])
        assert frame["J"].tolist() == [4, 5]
        assert (frame["ratio_eti"] >= 1.0).all()
        assert np.allclose(frame["ratio_hh"], frame["var_hhant"] / frame["var_hh"])
