"""
蒙特卡洛模块
数据生成、预设情景与模拟研究
"""

from modules.montecarlo.presets import (
    get_preset,
    preset_from_json,
    preset_layout,
    preset_scenarios,
    preset_to_json,
)
from modules.montecarlo.simulate import draw_means, draw_replication, replication_rng, simulate_dataset
from modules.montecarlo.study import REPORT_COLUMNS, report_frame, run_study

__all__ = [
    "REPORT_COLUMNS",
    "draw_means",
    "draw_replication",
    "get_preset",
    "preset_from_json",
    "preset_layout",
    "preset_scenarios",
    "preset_to_json",
    "replication_rng",
    "report_frame",
    "run_study",
    "simulate_dataset",
]
