"""
测试公共夹具
常用布局、方差分量与配置重置
"""

import pytest
import structlog

from config.settings import reload_settings
from modules.correlation.exchangeable import derive_params, params_from_icc
from modules.design.layout import build_standard_design


# 模拟研究使用的设计: 32 簇, 9 期, 每簇-时期 100 人, τ = 0.141, σ = 1
SIM_I, SIM_J, SIM_K = 32, 9, 100
SIM_TAU_SQ = 0.141 ** 2


@pytest.fixture(autouse=True)
def fresh_settings():
    """每个测试前后恢复默认配置与日志"""
    reload_settings()
    yield
    reload_settings()
    structlog.reset_defaults()


@pytest.fixture
def sim_layout():
    return build_standard_design(SIM_I, SIM_J, SIM_K)


@pytest.fixture
def sim_params():
    return derive_params(SIM_TAU_SQ, 1.0, SIM_K, SIM_J)


@pytest.fixture
def planning_layout():
    """规划示例: 18 簇, 7 期, 每簇-时期 50 人"""
    return build_standard_design(18, 7, 50)


@pytest.fixture
def planning_params():
    return params_from_icc(0.10, 1.0, 50, 7)


@pytest.fixture
def small_layout():
    return build_standard_design(6, 4, 5)
