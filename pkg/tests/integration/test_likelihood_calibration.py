"""
似然估计的重复抽样性质
REML 的 τ² 恢复与异质性检验的名义水平
"""

import numpy as np
import pytest

from modules.design.layout import build_standard_design
from modules.estimation.likelihood import fit_variance_components, lrt_exposure_heterogeneity
from modules.estimation.models import build_working_design
from modules.montecarlo.simulate import draw_replication
from schemas.design_models import ModelKind, TrueModelParams

pytestmark = pytest.mark.integration


class TestRemlRecovery:
    def test_cluster_variance_recovered(self):
        layout = build_standard_design(12, 4, 20)
        truth = TrueModelParams(kind="HH", mu=1.0, effect=0.2, tau_sq=0.1, sigma_sq=1.0)
        design = build_working_design(layout, ModelKind.HH)

        fits = [
            fit_variance_components(design, draw_replication(layout, truth, seed=21, replication=r), "reml")
            for r in range(200)
        ]
        tau_sq = np.array([fit.tau_sq for fit in fits])
        sigma_sq = np.array([fit.sigma_sq for fit in fits])
        effect = np.array([fit.effect() for fit in fits])

        mc_se = tau_sq.std(ddof=1) / np.sqrt(len(tau_sq))
        assert abs(tau_sq.mean() - 0.1) < 3.0 * mc_se + 0.005
        assert sigma_sq.mean() == pytest.approx(1.0, rel=0.02)
        assert abs(effect.mean() - 0.2) < 3.0 * effect.std(ddof=1) / np.sqrt(len(effect))

    def test_exposure_curve_recovered(self):
        layout = build_standard_design(16, 5, 20)
        curve = [0.1, 0.2, 0.3, 0.4]
        truth = TrueModelParams(kind="ETI", effect_curve=curve, tau_sq=0.1, sigma_sq=1.0)
        design = build_working_design(layout, ModelKind.ETI)

        fits = [
            fit_variance_components(design, draw_replication(layout, truth, seed=13, replication=r), "reml")
            for r in range(100)
        ]
        for s, value in enumerate(curve, start=1):
            estimates = np.array([fit.coefficients[f"delta_{s}"] for fit in fits])
            assert abs(estimates.mean() - value) < 4.0 * estimates.std(ddof=1) / np.sqrt(len(estimates))
        tate = np.array([fit.effect() for fit in fits])
        assert abs(tate.mean() - 0.25) < 4.0 * tate.std(ddof=1) / np.sqrt(len(tate))


class TestHeterogeneityTest:
    @pytest.mark.slow
    def test_null_rejection_rate(self):
        layout = build_standard_design(24, 5, 10)
        truth = TrueModelParams(kind="HH", mu=0.0, effect=0.2, tau_sq=0.05, sigma_sq=1.0)
        p_values = np.array([
            lrt_exposure_heterogeneity(layout, draw_replication(layout, truth, seed=77, replication=r)).p_value
            for r in range(500)
        ])
        # 名义 5%, 500 次重复的蒙特卡洛标准误约 1%
        assert 0.02 <= np.mean(p_values < 0.05) <= 0.08

    def test_detects_heterogeneous_curve(self):
        layout = build_standard_design(24, 5, 10)
        truth = TrueModelParams(kind="ETI", effect_curve=[0.0, 0.5, 1.0, 1.5], tau_sq=0.05, sigma_sq=1.0)
        p_values = np.array([
            lrt_exposure_heterogeneity(layout, draw_replication(layout, truth, seed=5, replication=r)).p_value
            for r in range(40)
        ])
        assert np.mean(p_values < 0.05) > 0.8

    def test_anticipation_variant_degrees_of_freedom(self):
        layout = build_standard_design(24, 5, 10)
        truth = TrueModelParams(kind="HH-ANT", effect=0.3, gamma=0.1, tau_sq=0.05, sigma_sq=1.0)
        result = lrt_exposure_heterogeneity(
            layout, draw_replication(layout, truth, seed=3, replication=0), with_anticipation=True
        )
        assert result.df == 3
        assert 0.0 <= result.p_value <= 1.0
        assert result.loglik_alternative >= result.loglik_null - 1e-8
