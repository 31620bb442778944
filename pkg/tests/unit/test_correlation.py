"""
可交换相关结构单元测试
"""

import numpy as np
import pytest

from core.error_handler import ConfigurationError
from modules.correlation.exchangeable import (
    derive_params,
    individual_covariance,
    individual_eigenvalues,
    individual_inverse_coefficients,
    mean_covariance,
    params_from_icc,
    phi_from_rho,
)

pytestmark = pytest.mark.unit


class TestDeriveParams:
    def test_simulation_values(self, sim_params):
        assert sim_params.rho == pytest.approx(0.019881 / 1.019881)
        assert sim_params.phi == pytest.approx(0.019881 / 0.029881)
        assert sim_params.x == pytest.approx(100.0)
        assert sim_params.y == pytest.approx(100.0 * sim_params.phi / (1.0 + 8.0 * sim_params.phi))

    def test_eigenvalues(self, sim_params):
        assert sim_params.lambda1 == pytest.approx(1.0 - sim_params.rho)
        assert sim_params.lambda2 == pytest.approx(1.0 + (9 * 100 - 1) * sim_params.rho)

    def test_zero_cluster_variance(self):
        params = derive_params(0.0, 2.0, 10, 5)
        assert params.phi == 0.0 and params.y == 0.0
        assert params.x == pytest.approx(5.0)

    def test_phi_matches_icc_form(self, sim_params):
        assert phi_from_rho(sim_params.rho, 100) == pytest.approx(sim_params.phi)

    @pytest.mark.parametrize("tau_sq,sigma_sq,K,J", [
        (0.1, 0.0, 10, 5),
        (-0.1, 1.0, 10, 5),
        (0.1, 1.0, 0, 5),
        (0.1, 1.0, 10, 1),
        (5000.0, 1.0, 10, 5),
    ])
    def test_invalid(self, tau_sq, sigma_sq, K, J):  # noqa: N803
        with pytest.raises(ConfigurationError):
            derive_params(tau_sq, sigma_sq, K, J)


class TestPlanningConvention:
    def test_tau_from_icc(self):
        params = params_from_icc(0.10, 1.0, 50, 7)
        assert params.tau_sq == pytest.approx(0.1 / 0.9)
        assert params.rho == pytest.approx(0.10)

    def test_icc_bound(self):
        with pytest.raises(ConfigurationError):
            params_from_icc(0.9995, 1.0, 50, 7)


class TestInverses:
    """闭式逆与稠密求逆一致"""

    def test_mean_covariance_inverse(self, sim_params):
        cov = mean_covariance(sim_params)
        residual = cov.V @ cov.inverse() - np.eye(sim_params.J)
        assert np.abs(residual).max() < 1e-10

    def test_individual_inverse(self):
        params = derive_params(0.3, 1.2, 3, 4)
        a, b = individual_inverse_coefficients(params)
        n = params.J * params.K
        inverse = a * np.eye(n) - b * np.ones((n, n))
        residual = individual_covariance(params) @ inverse - np.eye(n)
        assert np.abs(residual).max() < 1e-10

    def test_individual_eigenvalues(self):
        params = derive_params(0.3, 1.2, 3, 4)
        values = np.linalg.eigvalsh(individual_covariance(params) / params.sigma_t_sq)
        eig = individual_eigenvalues(params)
        assert values[-1] == pytest.approx(eig["lambda2"][0])
        assert np.allclose(values[:-1], eig["lambda1"][0])
        assert eig["lambda1"][1] == len(values) - 1


class TestRandomDraws:
    """随机 (τ², σ², K, J) 上的闭式逆与单调性"""

    @pytest.mark.parametrize("seed", range(20))
    def test_mean_covariance_inverse(self, seed):
        rng = np.random.default_rng(seed)
        params = derive_params(
            tau_sq=float(rng.uniform(0.0, 2.0)),
            sigma_sq=float(rng.uniform(0.05, 5.0)),
            K=int(rng.integers(1, 500)),
            J=int(rng.integers(2, 15)),
        )
        cov = mean_covariance(params)
        J = params.J  # noqa: N806
        assert np.allclose(cov.inverse(), np.linalg.inv(cov.V), rtol=1e-9, atol=1e-9 * params.x)
        assert np.abs(cov.V @ cov.inverse() - np.eye(J)).max() < 1e-9
        assert cov.y == pytest.approx(params.y)

    @pytest.mark.parametrize("seed", range(10))
    def test_phi_strictly_increasing_in_cluster_size(self, seed):
        rng = np.random.default_rng(100 + seed)
        tau_sq = float(rng.uniform(0.001, 1.0))
        sigma_sq = float(rng.uniform(0.1, 5.0))
        J = int(rng.integers(2, 12))  # noqa: N806
        phi = np.array([derive_params(tau_sq, sigma_sq, K, J).phi for K in range(1, 200)])
        assert np.all(np.diff(phi) > 0.0)
        assert np.all((phi > 0.0) & (phi < 1.0))

    def test_phi_flat_without_cluster_variance(self):
        assert {derive_params(0.0, 1.0, K, 5).phi for K in (1, 10, 100)} == {0.0}
