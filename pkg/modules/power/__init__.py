"""
功效模块
解析方差、功效、最小可检测效应、样本量与比较网格
"""

from modules.power.grids import (
    COMPARISONS,
    comparison_truth,
    power_pair,
    power_ratio_grid,
    ratio_crossing,
    variance_inflation,
)
from modules.power.planning import (
    detectable_effect,
    effect_for_power,
    power,
    sample_size_search,
)
from modules.power.variance import information_variance, variance, variance_standard

__all__ = [
    "COMPARISONS",
    "comparison_truth",
    "detectable_effect",
    "effect_for_power",
    "information_variance",
    "power",
    "power_pair",
    "power_ratio_grid",
    "ratio_crossing",
    "sample_size_search",
    "variance",
    "variance_inflation",
    "variance_standard",
]
