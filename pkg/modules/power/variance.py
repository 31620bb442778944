"""
处理效应估计量的解析方差
一般设计的设计常数公式、标准设计简化式与信息矩阵求逆
"""

from typing import Union

import numpy as np
import structlog

from core.error_handler import ConfigurationError, RankDeficiencyError
from modules.design.constants import DesignConstants, design_constants
from modules.design.indicators import indicators
from modules.estimation.gls import cholesky_solve, information_inverse
from modules.estimation.models import build_working_design
from schemas.design_models import DesignLayout, ModelKind
from schemas.stat_models import CorrelationParams, VarianceResult


logger = structlog.get_logger(__name__)


# ============================================================================
# 设计常数公式 (ℓ = 1)
# ============================================================================

def _anticipation_denominator(c: DesignConstants) -> float:
    denom = float(c.I) ** 2 - float(c.W3)
    if denom <= 0.0:
        raise RankDeficiencyError("gamma", "预期效应与时期效应不可区分 (I² = W3)")
    return denom


def _hh_family(c: DesignConstants, params: CorrelationParams, anticipation: bool) -> float:
    I, J = float(c.I), float(c.J)  # noqa: N806
    U, W1, W2 = float(c.U), float(c.W1), float(c.W2)  # noqa: N806
    l1, l2 = params.lambda1, params.lambda2

    bracket = U ** 2 + I * J * U - J * W1 - I * W2
    if anticipation:
        bracket -= J * float(c.W5) ** 2 / _anticipation_denominator(c)
    denom = l2 * bracket + l1 * (I * W2 - U ** 2)
    if denom <= 0.0:
        raise RankDeficiencyError("delta", "处理效应信息为零")
    return (params.sigma_t_sq / params.K) * I * J * l1 * l2 / denom


def _eti_family(c: DesignConstants, params: CorrelationParams, anticipation: bool) -> float:
    I, J = float(c.I), float(c.J)  # noqa: N806
    U1_outer = c.U1_outer.astype(float)  # noqa: N806
    W2_mat = c.W2_mat.astype(float)  # noqa: N806
    l1, l2 = params.lambda1, params.lambda2

    bracket = U1_outer + I * J * c.U2.astype(float) - J * c.W1_mat.astype(float) - I * W2_mat
    if anticipation:
        w5 = c.W5_vec.astype(float)
        bracket = bracket - J * np.outer(w5, w5) / _anticipation_denominator(c)
    matrix = l2 * bracket + l1 * (I * W2_mat - U1_outer)

    ones = np.ones(c.J - 1)
    quad = float(ones @ cholesky_solve(matrix, ones))
    return I * J * l1 * l2 * params.sigma_t_sq / (params.K * (J - 1) ** 2) * quad


# ============================================================================
# 信息矩阵 (任意 ℓ)
# ============================================================================

def information_variance(model: ModelKind, layout: DesignLayout, params: CorrelationParams) -> float:
    """GLS 信息矩阵之逆中 δ 或 Δ 的方差"""
    design = build_working_design(layout, model)
    covariance = information_inverse(design.information(params.x, params.y))
    idx = design.effect_indices()
    return float(covariance[np.ix_(idx, idx)].sum() / len(idx) ** 2)


# ============================================================================
# 公开接口
# ============================================================================

def _check_params(layout: DesignLayout, params: CorrelationParams) -> None:
    if params.K != layout.K or params.J != layout.J:
        raise ConfigurationError(
            "params", {"K": params.K, "J": params.J}, f"相关参数与布局 (K={layout.K}, J={layout.J}) 不一致"
        )


def variance(
    model: Union[str, ModelKind],
    layout: DesignLayout,
    params: CorrelationParams,
) -> VarianceResult:
    """工作模型处理效应估计量 (δ̂ 或 Δ̂) 的模型方差"""
    model = ModelKind.parse(model)
    _check_params(layout, params)
    ind = indicators(layout)
    constants = design_constants(ind)

    if model.has_anticipation and layout.ell > 1:
        value = information_variance(model, layout, params)
        method = "information"
    elif model.exposure_time:
        value = _eti_family(constants, params, model.has_anticipation)
        method = "closed_form"
    else:
        value = _hh_family(constants, params, model.has_anticipation)
        method = "closed_form"

    logger.debug("解析方差", model=model.value, I=layout.I, J=layout.J, K=layout.K, variance=value, method=method)
    return VarianceResult(
        model=model,
        variance=value,
        se=float(np.sqrt(value)),
        method=method,
        I=layout.I,
        J=layout.J,
        K=layout.K,
        ell=layout.ell,
        rho=params.rho,
        sigma_t_sq=params.sigma_t_sq,
        constants={k: float(v) for k, v in constants.scalars().items()},
    )


def variance_standard(
    model: Union[str, ModelKind],
    I: int,  # noqa: N803
    Q: int,  # noqa: N803
    K: int,  # noqa: N803
    params: CorrelationParams,
) -> VarianceResult:
    """标准设计简化式: 12Qσ_t²λ1λ2 / [IK(Q-1){Qλ1 + cλ2}], HH 取 c = Q+2, HH-ANT 取 c = Q-1"""
    model = ModelKind.parse(model)
    if model.exposure_time:
        raise ConfigurationError("model", model.value, "简化式仅适用于 HH 与 HH-ANT")
    if Q < 2:
        raise ConfigurationError("Q", Q, "序列数至少为 2")
    if params.J != Q + 1 or params.K != K:
        raise ConfigurationError("params", {"K": params.K, "J": params.J}, "相关参数与 (Q, K) 不一致")

    l1, l2 = params.lambda1, params.lambda2
    c = Q - 1 if model.has_anticipation else Q + 2
    value = 12.0 * Q * params.sigma_t_sq * l1 * l2 / (I * K * (Q - 1) * (Q * l1 + c * l2))
    return VarianceResult(
        model=model,
        variance=value,
        se=float(np.sqrt(value)),
        method="standard",
        I=I,
        J=Q + 1,
        K=K,
        ell=1,
        rho=params.rho,
        sigma_t_sq=params.sigma_t_sq,
    )
