"""
偏倚模块单元测试
"""

import numpy as np
import pytest

from core.error_handler import ConfigurationError
from modules.bias.curves import curved_curve, effect_curve, lagged_curve, partially_convex_curve, sinusoidal_curve
from modules.bias.formulas import (
    eti_anticipation_coefficients,
    eti_bias_J3,
    omega_hh_hhant,
    omega_hh_hhant_order,
    scenario_weights,
    weights_hh_under_etiant,
    weights_hhant_under_eti,
)
from modules.bias.grids import GRID_COLUMNS, weight_grid
from modules.bias.predict import predict_expectation
from schemas.design_models import ModelKind, TrueModelParams

pytestmark = pytest.mark.unit

SIM_PHI = 0.019881 / 0.029881
PHI_GRID = np.round(np.linspace(0.0, 0.95, 20), 4)


class TestOmega:
    def test_simulation_design(self):
        omega = omega_hh_hhant(8, SIM_PHI)
        assert omega == pytest.approx(-0.576, abs=1e-3)
        assert 0.075 + omega * 0.04 == pytest.approx(0.0520, abs=2e-4)

    @pytest.mark.parametrize("Q", [2, 5, 11])
    def test_independence_limit(self, Q):  # noqa: N803
        assert omega_hh_hhant(Q, 0.0) == pytest.approx(-3.0 / (Q + 1))

    @pytest.mark.parametrize("phi", [0.0, 0.4, 0.95])
    def test_order_one_reduces(self, phi):
        assert omega_hh_hhant_order(6, phi, 1) == pytest.approx(omega_hh_hhant(6, phi), abs=1e-12)

    @pytest.mark.parametrize("Q,phi", [(2, 0.5), (4, 0.1), (9, 0.8)])
    def test_full_window(self, Q, phi):  # noqa: N803
        assert omega_hh_hhant_order(Q, phi, Q) == pytest.approx(-1.0, abs=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ConfigurationError):
            omega_hh_hhant(1, 0.5)
        with pytest.raises(ConfigurationError):
            omega_hh_hhant(4, 1.0)
        with pytest.raises(ConfigurationError):
            omega_hh_hhant_order(4, 0.5, 5)


class TestWeightIdentities:
    """各权重函数的求和恒等式"""

    @pytest.mark.parametrize("Q", [2, 3, 8, 12])
    @pytest.mark.parametrize("phi", [0.0, 0.3, 0.9])
    def test_hh_under_etiant(self, Q, phi):  # noqa: N803
        pi, omega = weights_hh_under_etiant(Q, phi)
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)
        assert omega.sum() == pytest.approx(omega_hh_hhant(Q, phi), abs=1e-12)

    @pytest.mark.parametrize("Q", [2, 3, 8, 12])
    @pytest.mark.parametrize("phi", [0.0, 0.3, 0.9])
    def test_hhant_under_eti(self, Q, phi):  # noqa: N803
        pi, psi = weights_hhant_under_eti(Q, phi)
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)
        assert psi.sum() == pytest.approx(0.0, abs=1e-12)


class TestSignAndMonotonicity:
    """ω 的符号与单调性在参数网格上成立"""

    @pytest.mark.parametrize("Q", range(2, 13))
    def test_hhant_omega_negative_and_growing_in_phi(self, Q):  # noqa: N803
        omega = np.array([omega_hh_hhant(Q, phi) for phi in PHI_GRID])
        assert np.all(omega < 0.0)
        assert np.all(np.diff(np.abs(omega)) > 0.0)

    @pytest.mark.parametrize("Q", range(3, 13))
    @pytest.mark.parametrize("phi", [0.05, 0.3, SIM_PHI, 0.95])
    def test_etiant_omega_inside_unit_interval(self, Q, phi):  # noqa: N803
        _, omega = weights_hh_under_etiant(Q, phi)
        assert np.all(omega < 0.0)
        assert np.all(omega > -1.0)

    @pytest.mark.parametrize("Q", [2, 5, 9])
    def test_etiant_omega_boundary_values(self, Q):  # noqa: N803
        # φ = 0 时第一暴露期权重为 0; 末期权重恒为 -6/{Q(Q+1)}, Q = 2 时取到 -1
        _, omega = weights_hh_under_etiant(Q, 0.0)
        assert omega[0] == pytest.approx(0.0, abs=1e-12)
        for phi in PHI_GRID:
            _, omega = weights_hh_under_etiant(Q, phi)
            assert omega[-1] == pytest.approx(-6.0 / (Q * (Q + 1)), abs=1e-12)
            assert np.all((omega <= 0.0) & (omega >= -1.0 - 1e-12))

    @pytest.mark.parametrize("Q", range(2, 13))
    @pytest.mark.parametrize("phi", PHI_GRID[::4].tolist())
    def test_window_order_nonincreasing(self, Q, phi):  # noqa: N803
        # 窗口不超过序列数一半时, 加宽窗口不会减小偏倚
        orders = range(1, (Q + 1) // 2 + 1)
        omega = np.array([omega_hh_hhant_order(Q, phi, ell) for ell in orders])
        assert np.all(np.diff(omega) <= 1e-12)

    @pytest.mark.parametrize("Q", range(2, 13))
    def test_window_order_nonincreasing_at_independence(self, Q):  # noqa: N803
        omega = np.array([omega_hh_hhant_order(Q, 0.0, ell) for ell in range(1, Q + 1)])
        assert np.all(np.diff(omega) <= 1e-12)

    def test_wide_windows_can_reverse(self):
        # φ 较大时窗口超过一半后 ω_ℓ 回升, 全窗口取 -1
        assert omega_hh_hhant_order(3, 0.9, 2) == pytest.approx(-145.2 / 112.8, abs=1e-10)
        assert omega_hh_hhant_order(3, 0.9, 3) > omega_hh_hhant_order(3, 0.9, 2)


class TestEtiJ3:
    def test_unbiased_without_anticipation(self):
        assert eti_bias_J3(0.4, (1.0, 2.0), 0.0) == (1.0, 2.0)

    def test_pure_anticipation_at_independence(self):
        assert eti_bias_J3(0.0, 0.0, 1.0) == (-1.0, -1.0)

    def test_second_exposure_more_biased(self):
        first, second = eti_bias_J3(0.3, 0.5, 0.2)
        assert abs(second - 0.5) > abs(first - 0.5)

    def test_coefficients(self):
        assert eti_anticipation_coefficients(0.25) == (-1.25, -1.5)

    def test_curve_length(self):
        with pytest.raises(ConfigurationError):
            eti_bias_J3(0.3, (1.0, 2.0, 3.0), 0.1)


class TestScenarios:
    def test_unknown(self):
        with pytest.raises(ConfigurationError):
            scenario_weights("hh-under-nothing", 4, 0.5)

    def test_eti_only_for_three_periods(self):
        with pytest.raises(ConfigurationError):
            scenario_weights("eti-under-hhant", 3, 0.5)
        assert scenario_weights("eti-under-hhant", None, 0.5).Q == 2

    def test_exposure_weights_are_arrays(self):
        weights = scenario_weights("hhant-under-eti", 5, 0.2)
        assert weights["pi"].shape == (5,)
        assert set(weights.weights) == {"pi", "psi"}

    def test_needs_sequence_count(self):
        with pytest.raises(ConfigurationError):
            scenario_weights("hh-under-hhant", None, 0.5)


class TestWeightGrid:
    def test_columns_and_size(self):
        grid = weight_grid([2, 3], [0.0, 0.5])
        assert list(grid.columns) == GRID_COLUMNS
        # 每个 (Q, φ): 1 个标量 ω, 四组按暴露时间的权重, Q 个 ℓ 阶 ω; Q = 2 另有两个 γ 系数
        assert len(grid) == 2 * (5 * 2 + 1 + 2) + 2 * (5 * 3 + 1)

    def test_scalar_rows_use_zero_exposure(self):
        grid = weight_grid([4], [0.3])
        row = grid[grid["weight_name"] == "omega_hh_hhant"]
        assert row["j"].tolist() == [0]
        assert row["value"].iloc[0] == pytest.approx(omega_hh_hhant(4, 0.3))


class TestCurves:
    def test_sinusoidal_mean(self):
        curve = sinusoidal_curve(9)
        assert curve.shape == (8,)
        assert curve.mean() == pytest.approx(0.12)
        assert curve[0] == pytest.approx(0.12)

    def test_shapes(self):
        assert curved_curve(5).tolist() == [0.5, 1.0, 1.5, 2.0]
        assert lagged_curve(5).tolist() == [0.5, 0.5, 2.0, 2.0]
        assert partially_convex_curve(6).tolist() == [0.5, 0.75, 1.0, 1.5, 2.0]

    def test_by_name(self):
        assert effect_curve("partially-convex", 4) == partially_convex_curve(4).tolist()
        assert effect_curve("constant", 4, level=0.3) == [0.3, 0.3, 0.3]

    def test_unknown_name(self):
        with pytest.raises(ConfigurationError):
            effect_curve("zigzag", 5)


class TestPredict:
    """期望预测的来源分派"""

    def test_correct_model_is_identity(self):
        truth = TrueModelParams(kind="ETI-ANT", effect_curve=[0.1, 0.2, 0.3], gamma=0.05)
        prediction = predict_expectation(ModelKind.ETI_ANT, truth, Q=3, phi=0.4)
        assert prediction.provenance == "identity"
        assert prediction.expectations["tate"] == pytest.approx(0.2)
        assert prediction.expectations["gamma"] == pytest.approx(0.05)

    def test_over_specification_is_identity(self):
        truth = TrueModelParams(kind="HH-ANT", effect=0.075, gamma=0.04)
        prediction = predict_expectation(ModelKind.ETI_ANT, truth, Q=8, phi=SIM_PHI)
        assert prediction.provenance == "identity"
        assert prediction.expectations["delta_8"] == pytest.approx(0.075)

    def test_closed_form_dispatch(self):
        truth = TrueModelParams(kind="HH-ANT", effect=0.075, gamma=0.04)
        prediction = predict_expectation("HH", truth, Q=8, phi=SIM_PHI)
        assert prediction.provenance == "analytic"
        assert prediction.formula == "hh-under-hhant"
        assert prediction.expectations["delta"] == pytest.approx(0.0520, abs=2e-4)

    def test_sinusoidal_truth_at_fitted_correlation(self):
        # HH 在 ETI-ANT 真实模型下拟合时 τ̂ ≈ 0.345, 对应 φ̂ ≈ 0.92 (τ̂ ≈ 0.398 属于 HH-ANT)
        tau_sq = 0.3454 ** 2
        phi = tau_sq / (tau_sq + 0.01)
        truth = TrueModelParams(kind="ETI-ANT", effect_curve=sinusoidal_curve(9).tolist(), gamma=0.04)
        prediction = predict_expectation("HH", truth, Q=8, phi=phi)
        assert prediction.expectations["delta"] == pytest.approx(-0.8721, abs=2e-3)

    def test_oracle_fallback(self):
        truth = TrueModelParams(kind="ETI-ANT", effect_curve=[0.1, 0.2, 0.3, 0.4], gamma=0.05)
        prediction = predict_expectation("ETI", truth, Q=4, phi=0.3)
        assert prediction.provenance == "oracle"
        assert set(prediction.expectations) == {"delta_1", "delta_2", "delta_3", "delta_4", "tate"}

    def test_analytic_only(self):
        truth = TrueModelParams(kind="ETI-ANT", effect_curve=[0.1, 0.2, 0.3, 0.4], gamma=0.05)
        with pytest.raises(ConfigurationError):
            predict_expectation("ETI", truth, Q=4, phi=0.3, analytic_only=True)

    def test_window_order_checked(self):
        truth = TrueModelParams(kind="HH-ANT", effect=0.1, gamma=0.1)
        with pytest.raises(ConfigurationError):
            predict_expectation("HH", truth, Q=3, phi=0.3, ell=4)

    def test_expectations_are_finite(self):
        truth = TrueModelParams(kind="ETI", effect_curve=curved_curve(6).tolist())
        prediction = predict_expectation("HH-ANT", truth, Q=5, phi=0.7)
        assert np.isfinite(list(prediction.expectations.values())).all()
