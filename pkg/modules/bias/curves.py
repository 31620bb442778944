"""
暴露时间效应曲线库
常数、弯曲、滞后、部分凸与正弦五种点处理效应形态
"""

from typing import Callable, Dict, List, Optional

import numpy as np

from core.error_handler import ConfigurationError


def _exposures(J: int) -> np.ndarray:  # noqa: N803
    if J < 3:
        raise ConfigurationError("J", J, "时期数至少为 3")
    return np.arange(1, J, dtype=float)


def constant_curve(J: int, level: float = 2.0) -> np.ndarray:  # noqa: N803
    return np.full_like(_exposures(J), float(level))


def curved_curve(J: int, level: float = 2.0) -> np.ndarray:  # noqa: N803
    """δ(1) = 0.5, 中间 δ(s) = level - 0.5^(s-2), δ(J-1) = level; J = 3 时为 (1.75, level)"""
    s = _exposures(J)
    if J == 3:
        return np.array([level - 0.25, level])
    curve = level - 0.5 ** (s - 2)
    curve[0] = 0.5
    curve[-1] = level
    return curve


def lagged_curve(J: int, level: float = 2.0, low: float = 0.5, lag: int = 2) -> np.ndarray:  # noqa: N803
    """前 lag 个暴露时间为 low, 之后为 level; J = 3 时滞后一期"""
    s = _exposures(J)
    lag = 1 if J == 3 else lag
    return np.where(s <= lag, low, level)


def partially_convex_curve(J: int, level: float = 2.0) -> np.ndarray:  # noqa: N803
    """δ(s) = 0.25 + 0.25s (s ≤ 3), δ(4) = 1.5, 其后为 level; J = 3 时为 (1, level)"""
    s = _exposures(J)
    if J == 3:
        return np.array([1.0, level])
    curve = np.where(s <= 3, 0.25 + 0.25 * s, level)
    curve[s == 4] = 1.5
    return curve


def sinusoidal_curve(
    J: int,  # noqa: N803
    amplitude: float = 1.41,
    tate: float = 0.12,
    period: Optional[int] = None,
) -> np.ndarray:
    """δ(s) = -amplitude·sin{2π(s-1)/period} 平移至均值为 tate; period 缺省 J-2"""
    s = _exposures(J)
    period = J - 2 if period is None else period
    if period <= 0:
        raise ConfigurationError("period", period, "正弦周期须为正")
    wave = -amplitude * np.sin(2.0 * np.pi * (s - 1) / period)
    return wave - wave.mean() + tate


CURVES: Dict[str, Callable[..., np.ndarray]] = {
    "constant": constant_curve,
    "curved": curved_curve,
    "lagged": lagged_curve,
    "partially_convex": partially_convex_curve,
    "sinusoidal": sinusoidal_curve,
}


def effect_curve(name: str, J: int, **kwargs) -> List[float]:  # noqa: N803
    """按名称生成 δ(1..J-1)"""
    key = name.strip().lower().replace("-", "_")
    if key not in CURVES:
        raise ConfigurationError("curve_name", name, f"未知效应曲线, 可选 {sorted(CURVES)}")
    return CURVES[key](J, **kwargs).tolist()
