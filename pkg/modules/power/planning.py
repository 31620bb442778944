"""
功效、最小可检测效应与样本量
双侧 Wald 检验的正态近似
"""

from functools import reduce
from math import gcd
from typing import Callable, Optional, Union

import numpy as np
import structlog
from scipy import stats

from config.settings import get_settings
from core.error_handler import ConfigurationError, ConvergenceError
from modules.correlation.exchangeable import derive_params
from modules.power.variance import variance
from schemas.design_models import DesignLayout, ModelKind
from schemas.stat_models import CorrelationParams, PowerSpec, SampleSizeResult


logger = structlog.get_logger(__name__)


def _alpha(alpha: Optional[float]) -> float:
    alpha = get_settings().power.alpha if alpha is None else alpha
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError("alpha", alpha, "显著性水平须在 (0, 1) 内")
    return alpha


def power(effect: float, var: float, alpha: Optional[float] = None) -> float:
    """Φ(|effect|/SE - z_{1-α/2})"""
    if var <= 0.0:
        raise ConfigurationError("variance", var, "方差必须为正")
    alpha = _alpha(alpha)
    z = stats.norm.ppf(1.0 - alpha / 2.0)
    return float(stats.norm.cdf(abs(effect) / np.sqrt(var) - z))


def effect_for_power(var: float, target_power: float, alpha: Optional[float] = None) -> float:
    """(z_{1-α/2} + z_{power})·SE"""
    if not 0.0 < target_power < 1.0:
        raise ConfigurationError("target_power", target_power, "目标功效须在 (0, 1) 内")
    alpha = _alpha(alpha)
    z = stats.norm.ppf(1.0 - alpha / 2.0) + stats.norm.ppf(target_power)
    return float(z * np.sqrt(var))


def detectable_effect(
    model: Union[str, ModelKind],
    layout: DesignLayout,
    params: CorrelationParams,
    target_power: Optional[float] = None,
    alpha: Optional[float] = None,
) -> float:
    """达到目标功效所需的最小效应"""
    target_power = get_settings().power.target_power if target_power is None else target_power
    result = variance(model, layout, params)
    return effect_for_power(result.variance, target_power, alpha)


# ============================================================================
# 样本量搜索
# ============================================================================

def _smallest(lo: int, hi: int, reaches: Callable[[int], bool]) -> Optional[int]:
    """单调谓词在 [lo, hi] 上的最小真值点: 倍增定界后二分"""
    if not reaches(hi):
        return None
    bound = lo
    while bound < hi and not reaches(bound):
        lo = bound + 1
        bound = min(hi, bound * 2)
    left, right = lo, bound
    while left < right:
        mid = (left + right) // 2
        if reaches(mid):
            right = mid
        else:
            left = mid + 1
    return left


def sample_size_search(
    model: Union[str, ModelKind],
    layout: DesignLayout,
    params: CorrelationParams,
    effect: float,
    target_power: Optional[float] = None,
    vary: str = "I",
    alpha: Optional[float] = None,
) -> SampleSizeResult:
    """保持布局其余部分不变, 搜索达到目标功效的最小簇数或簇-时期个体数

    vary = "I" 时各序列簇数按模板比例同倍放大 (标准设计即 Q 的倍数)。
    """
    model = ModelKind.parse(model)
    cfg = get_settings().power
    spec = PowerSpec(
        effect=effect,
        alpha=_alpha(alpha),
        target_power=cfg.target_power if target_power is None else target_power,
    )
    if effect == 0.0:
        raise ConfigurationError("effect", effect, "零效应无法达到目标功效")

    if vary == "I":
        counts = [s.count for s in layout.sequences]
        step = reduce(gcd, counts)
        base = [c // step for c in counts]

        def candidate(m: int):
            scaled = layout.with_counts([b * m for b in base])
            return scaled, params

        cap = cfg.max_multiplier
    elif vary == "K":
        def candidate(k: int):
            return layout.with_K(k), derive_params(params.tau_sq, params.sigma_sq, k, layout.J)

        cap = cfg.max_cluster_period_size
    else:
        raise ConfigurationError("vary", vary, "搜索变量须为 I 或 K")

    def achieved(value: int) -> float:
        candidate_layout, candidate_params = candidate(value)
        return power(spec.effect, variance(model, candidate_layout, candidate_params).variance, spec.alpha)

    value = _smallest(1, cap, lambda v: achieved(v) >= spec.target_power)
    if value is None:
        logger.info("样本量搜索失败", model=model.value, vary=vary, cap=cap)
        raise ConvergenceError(f"在上限 {cap} 内无法达到目标功效 {spec.target_power}", bracket=[1.0, float(cap)])

    final_layout, final_params = candidate(value)
    result = variance(model, final_layout, final_params)
    logger.info("样本量搜索完成", model=model.value, vary=vary, I=final_layout.I, K=final_layout.K)
    return SampleSizeResult(
        model=model,
        vary=vary,
        value=final_layout.I if vary == "I" else final_layout.K,
        I=final_layout.I,
        K=final_layout.K,
        achieved_power=power(spec.effect, result.variance, spec.alpha),
        detectable_effect=effect_for_power(result.variance, spec.target_power, spec.alpha),
        se=result.se,
    )
