"""
偏倚模块
误设工作模型估计量期望的闭式权重、预测与效应曲线
"""

from modules.bias.curves import CURVES, effect_curve, sinusoidal_curve
from modules.bias.formulas import (
    SCENARIOS,
    BiasWeights,
    eti_anticipation_coefficients,
    eti_bias_J3,
    omega_hh_hhant,
    omega_hh_hhant_order,
    scenario_weights,
    weights_hh_under_etiant,
    weights_hhant_under_eti,
)
from modules.bias.grids import GRID_COLUMNS, weight_grid
from modules.bias.predict import oracle_expectation, predict_expectation

__all__ = [
    "CURVES",
    "GRID_COLUMNS",
    "SCENARIOS",
    "BiasWeights",
    "effect_curve",
    "eti_anticipation_coefficients",
    "eti_bias_J3",
    "omega_hh_hhant",
    "omega_hh_hhant_order",
    "oracle_expectation",
    "predict_expectation",
    "scenario_weights",
    "sinusoidal_curve",
    "weight_grid",
    "weights_hh_under_etiant",
    "weights_hhant_under_eti",
]
