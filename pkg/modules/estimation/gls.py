"""
广义最小二乘估计
已知方差分量下的拟合、期望预言机与序列均值权重
"""

from typing import Dict, Optional, Union

import numpy as np
import structlog
from scipy import linalg

from core.error_handler import ConfigurationError, RankDeficiencyError
from modules.design.indicators import anticipation_row
from modules.design.layout import build_standard_design
from modules.estimation.data import ClusterPeriodMeans
from modules.estimation.models import WorkingDesign, build_working_design, labelled
from schemas.design_models import DesignLayout, ModelKind, TrueModelParams
from schemas.stat_models import CorrelationParams, FitResult


logger = structlog.get_logger(__name__)


# ============================================================================
# 线性代数
# ============================================================================

def cholesky_solve(information: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """对称正定求解; 分解失败视为信息矩阵奇异"""
    try:
        factor = linalg.cho_factor(information, lower=True, check_finite=True)
        return linalg.cho_solve(factor, rhs)
    except (linalg.LinAlgError, ValueError) as e:
        raise RankDeficiencyError(None, "信息矩阵非正定或奇异", original_exception=e) from e


def information_inverse(information: np.ndarray) -> np.ndarray:
    return cholesky_solve(information, np.eye(information.shape[0]))


def tate_summary(design: WorkingDesign, theta: np.ndarray, covariance: np.ndarray) -> Dict[str, float]:
    """Δ̂ = δ̂(s) 的平均, SE = sqrt(1'V_δ1)/(J-1)"""
    idx = design.effect_indices()
    n_effects = len(idx)
    block = covariance[np.ix_(idx, idx)]
    return {
        "tate": float(theta[idx].mean()),
        "tate_se": float(np.sqrt(block.sum()) / n_effects),
    }


def gls_solve(design: WorkingDesign, means: np.ndarray, x: float, y: float):
    """返回 (θ̂, 信息矩阵)"""
    information = design.information(x, y)
    theta = cholesky_solve(information, design.rhs(means, x, y))
    return theta, information


def build_fit_result(
    design: WorkingDesign,
    theta: np.ndarray,
    covariance: np.ndarray,
    tau_sq: float,
    sigma_sq: float,
    method: str,
    **extra,
) -> FitResult:
    se = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    summary = tate_summary(design, theta, covariance) if design.model.exposure_time else {}
    return FitResult(
        model=design.model,
        labels=list(design.labels),
        coefficients=labelled(design, theta),
        std_errors=labelled(design, se),
        covariance=covariance.tolist(),
        tau_sq=float(tau_sq),
        sigma_sq=float(sigma_sq),
        method=method,
        **summary,
        **extra,
    )


# ============================================================================
# 拟合
# ============================================================================

def _as_design(layout: Union[DesignLayout, WorkingDesign], model: ModelKind) -> WorkingDesign:
    if isinstance(layout, WorkingDesign):
        return layout
    return build_working_design(layout, model)


def gls_fit(
    layout: Union[DesignLayout, WorkingDesign],
    model: Union[str, ModelKind],
    params: CorrelationParams,
    means: ClusterPeriodMeans,
) -> FitResult:
    """θ̂ = (Σ M_i'V⁻¹M_i)⁻¹ Σ M_i'V⁻¹Ȳ_i, 方差为信息矩阵之逆"""
    model = ModelKind.parse(model)
    design = _as_design(layout, model)
    if means.means.shape != (design.layout.I, design.layout.J):
        raise ConfigurationError("means", means.means.shape, "均值矩阵与布局维度不一致")
    if means.K != params.K:
        raise ConfigurationError("K", means.K, f"数据的簇-时期规模与参数 K={params.K} 不一致")

    theta, information = gls_solve(design, means.means, params.x, params.y)
    covariance = information_inverse(information)
    logger.debug("GLS 拟合完成", model=model.value, phi=params.phi)
    return build_fit_result(design, theta, covariance, params.tau_sq, params.sigma_sq, "gls")


# ============================================================================
# 期望预言机
# ============================================================================

def expected_means(layout: DesignLayout, truth: TrueModelParams) -> np.ndarray:
    """真实均值结构 E(Ȳ_ij) = μ + β_j + γA_ij + δ(s_ij)Z_ij, 簇按序列排序"""
    J = layout.J  # noqa: N806
    ell = truth.ell if truth.ell is not None else layout.ell
    if not 1 <= ell <= J - 1:
        raise ConfigurationError("ell", ell, f"真实模型预期阶数须在 1..{J - 1} 之间")

    effects = truth.point_effects(J)
    periods = np.arange(1, J + 1)
    rows = []
    for seq in layout.sequences:
        exposure = periods - seq.adopt + 1
        treated = exposure >= 1
        effect_row = np.where(treated, effects[np.clip(exposure, 1, J - 1) - 1], 0.0)
        row = truth.mu + truth.period_effects(J) + truth.gamma * anticipation_row(seq.adopt, J, ell) + effect_row
        rows.append(row)
    per_sequence = np.vstack(rows)
    return per_sequence[layout.sequence_of_cluster]


def expected_estimate(
    layout: Union[DesignLayout, WorkingDesign],
    working: Union[str, ModelKind],
    truth: TrueModelParams,
    params: CorrelationParams,
) -> Dict[str, float]:
    """工作模型全部固定效应估计量在真实模型下的精确期望 (含 ETI 类的 tate)"""
    working = ModelKind.parse(working)
    design = _as_design(layout, working)
    expected = expected_means(design.layout, truth)
    theta, _ = gls_solve(design, expected, params.x, params.y)
    result = labelled(design, theta)
    if working.exposure_time:
        result["tate"] = float(theta[design.effect_indices()].mean())
    return result


def estimated_effect_curve(
    layout: DesignLayout,
    working: Union[str, ModelKind],
    truth: TrueModelParams,
    params: CorrelationParams,
) -> Dict[str, np.ndarray]:
    """各暴露时间的期望估计效应与真实效应"""
    working = ModelKind.parse(working)
    expectation = expected_estimate(layout, working, truth, params)
    J = layout.J  # noqa: N806
    if working.exposure_time:
        estimated = np.array([expectation[f"delta_{s}"] for s in range(1, J)])
    else:
        estimated = np.full(J - 1, expectation["delta"])
    return {
        "exposure": np.arange(1, J),
        "true": truth.point_effects(J),
        "estimated": estimated,
    }


# ============================================================================
# 序列均值权重
# ============================================================================

def sequence_hat_rows(
    J: int,  # noqa: N803
    model: Union[str, ModelKind],
    phi: float,
    ell: int = 1,
    layout: Optional[DesignLayout] = None,
) -> Dict[str, np.ndarray]:
    """标准设计上各系数对序列均值 Ȳ_j(q) 的 GLS 权重, 每个系数一个 Q×J 网格

    各序列簇数相同时簇数约去, 故取每序列一簇、x = 1、y = φ/(1+(J-1)φ)。
    """
    model = ModelKind.parse(model)
    if not 0.0 <= phi < 1.0:
        raise ConfigurationError("phi", phi, "φ 须在 [0, 1) 内")
    Q = J - 1  # noqa: N806
    if layout is None:
        layout = build_standard_design(Q, J, 1, ell)
    design = build_working_design(layout, model)

    x = 1.0
    y = phi / (1.0 + (J - 1) * phi)
    information = design.information(x, y)
    projector = x * np.eye(J) - y * np.ones((J, J))
    # 每个序列一行 J×p 块: 权重 = info⁻¹ M_q'(xI - y11')
    per_sequence = np.einsum("qjk,jl->qkl", design.blocks, projector)
    weights = np.stack([cholesky_solve(information, block) for block in per_sequence])
    weights *= design.counts[:, None, None]

    grids = {name: weights[:, k, :] for k, name in enumerate(design.labels)}
    if model.exposure_time:
        grids["tate"] = weights[:, design.effect_indices(), :].mean(axis=1)
    return grids
