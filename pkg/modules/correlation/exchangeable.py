"""
可交换相关结构
参数换算与簇-时期均值及个体层协方差的闭式逆
"""

from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from config.settings import get_settings
from core.error_handler import ConfigurationError
from schemas.stat_models import CorrelationParams


class MeanCovariance(NamedTuple):
    """簇-时期均值协方差 V 及其逆 xI - y11'"""
    V: np.ndarray
    x: float
    y: float

    def inverse(self) -> np.ndarray:
        J = self.V.shape[0]  # noqa: N806
        return self.x * np.eye(J) - self.y * np.ones((J, J))


def _rho_upper(rho_upper: Optional[float]) -> float:
    return get_settings().numerics.rho_upper if rho_upper is None else rho_upper


def derive_params(
    tau_sq: float,
    sigma_sq: float,
    K: int,  # noqa: N803
    J: int,  # noqa: N803
    rho_upper: Optional[float] = None,
) -> CorrelationParams:
    """由 (τ², σ², K, J) 计算 ρ, φ, σ_t², η², λ1, λ2 与 (x, y)

    η² = τ² + σ²/K, 故 η²(1-φ) = σ²/K, x = K/σ²; τ² = 0 时 φ = y = 0。
    """
    if sigma_sq <= 0.0:
        raise ConfigurationError("sigma_sq", sigma_sq, "残差方差必须为正")
    if tau_sq < 0.0:
        raise ConfigurationError("tau_sq", tau_sq, "簇间方差不能为负")
    if K < 1:
        raise ConfigurationError("K", K, "簇-时期个体数至少为 1")
    if J < 2:
        raise ConfigurationError("J", J, "时期数至少为 2")

    sigma_t_sq = tau_sq + sigma_sq
    rho = tau_sq / sigma_t_sq
    upper = _rho_upper(rho_upper)
    if rho > upper:
        raise ConfigurationError("rho", rho, f"ICC 超过上界 {upper}")

    eta_sq = tau_sq + sigma_sq / K
    phi = tau_sq / eta_sq
    x = K / sigma_sq
    y = x * phi / (1.0 + (J - 1) * phi)

    return CorrelationParams(
        tau_sq=tau_sq,
        sigma_sq=sigma_sq,
        K=K,
        J=J,
        rho=rho,
        phi=phi,
        sigma_t_sq=sigma_t_sq,
        eta_sq=eta_sq,
        lambda1=1.0 - rho,
        lambda2=1.0 + (J * K - 1) * rho,
        x=x,
        y=y,
    )


def params_from_icc(
    rho: float,
    sigma_sq: float,
    K: int,  # noqa: N803
    J: int,  # noqa: N803
    rho_upper: Optional[float] = None,
) -> CorrelationParams:
    """规划约定: σ² 为个体残差方差, τ² = ρσ²/(1-ρ)"""
    upper = _rho_upper(rho_upper)
    if not 0.0 <= rho <= upper:
        raise ConfigurationError("rho", rho, f"ICC 须在 [0, {upper}] 内")
    tau_sq = rho * sigma_sq / (1.0 - rho)
    return derive_params(tau_sq, sigma_sq, K, J, rho_upper=upper)


def phi_from_rho(rho: float, K: int) -> float:  # noqa: N803
    """簇-时期均值相关 φ = Kρ/(1+(K-1)ρ)"""
    return K * rho / (1.0 + (K - 1) * rho)


def mean_covariance(params: CorrelationParams, J: Optional[int] = None) -> MeanCovariance:  # noqa: N803
    """V = η²{(1-φ)I + φ11'}: 对角 τ²+σ²/K, 非对角 τ²"""
    J = params.J if J is None else J  # noqa: N806
    V = params.tau_sq * np.ones((J, J)) + (params.sigma_sq / params.K) * np.eye(J)  # noqa: N806
    y = params.x * params.phi / (1.0 + (J - 1) * params.phi)
    return MeanCovariance(V=V, x=params.x, y=y)


def individual_covariance(params: CorrelationParams) -> np.ndarray:
    """单个簇 JK×JK 个体层协方差 σ_t²{(1-ρ)I + ρ11'} (小规模检查用)"""
    n = params.J * params.K
    return params.sigma_t_sq * ((1.0 - params.rho) * np.eye(n) + params.rho * np.ones((n, n)))


def individual_inverse_coefficients(params: CorrelationParams) -> Tuple[float, float]:
    """个体层逆协方差 aI - b11' 的 (a, b)"""
    a = 1.0 / (params.sigma_t_sq * params.lambda1)
    b = params.rho / (params.sigma_t_sq * params.lambda1 * params.lambda2)
    return a, b


def individual_eigenvalues(params: CorrelationParams) -> Dict[str, Tuple[float, int]]:
    """相关矩阵 D 的特征值及重数: λ1 (JK-1 重), λ2 (1 重)"""
    n = params.J * params.K
    return {
        "lambda1": (params.lambda1, n - 1),
        "lambda2": (params.lambda2, 1),
    }
