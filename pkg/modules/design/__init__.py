"""
设计模块
布局、指示矩阵与设计常数
"""

from modules.design.constants import DesignConstants, design_constants
from modules.design.indicators import IndicatorSet, anticipation_row, indicator_frame, indicators
from modules.design.layout import (
    build_custom_design,
    build_standard_design,
    layout_from_document,
    layout_from_json,
    layout_from_treatment_matrix,
    layout_to_json,
    validate_layout,
)

__all__ = [
    "DesignConstants",
    "IndicatorSet",
    "anticipation_row",
    "build_custom_design",
    "build_standard_design",
    "design_constants",
    "indicator_frame",
    "indicators",
    "layout_from_document",
    "layout_from_json",
    "layout_from_treatment_matrix",
    "layout_to_json",
    "validate_layout",
]
