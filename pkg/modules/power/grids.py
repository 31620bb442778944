"""
功效比较网格
误设模型在有偏备择下的功效、功效比网格与方差膨胀
"""

from typing import Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
import structlog

from core.error_handler import ConfigurationError
from modules.bias.curves import sinusoidal_curve
from modules.bias.formulas import omega_hh_hhant_order
from modules.correlation.exchangeable import params_from_icc
from modules.design.layout import build_standard_design
from modules.estimation.gls import expected_estimate
from modules.power.planning import power
from modules.power.variance import variance
from schemas.design_models import DesignLayout, ModelKind, TrueModelParams
from schemas.stat_models import CorrelationParams


logger = structlog.get_logger(__name__)

COMPARISONS = {
    "hh-vs-hhant": (ModelKind.HH_ANT, ModelKind.HH),
    "eti-vs-etiant": (ModelKind.ETI_ANT, ModelKind.ETI),
}
GRID_COLUMNS = ["param1", "param2", "power_A", "power_B", "ratio", "valid"]


def comparison_truth(comparison: str, J: int, effect: float, gamma: float) -> TrueModelParams:  # noqa: N803
    """比较所用真实模型: HH-ANT 常数效应, 或均值为 effect 的 ETI-ANT 正弦曲线"""
    if comparison == "hh-vs-hhant":
        return TrueModelParams(kind=ModelKind.HH_ANT, effect=effect, gamma=gamma)
    curve = sinusoidal_curve(J, amplitude=0.5, tate=effect)
    return TrueModelParams(kind=ModelKind.ETI_ANT, effect_curve=curve.tolist(), gamma=gamma)


def _biased_alternative(
    comparison: str,
    layout: DesignLayout,
    params: CorrelationParams,
    truth: TrueModelParams,
) -> float:
    """欠设定模型估计量的期望: 标准设计用闭式 ω, 否则用精确期望"""
    if comparison == "hh-vs-hhant" and layout.is_standard:
        omega = omega_hh_hhant_order(layout.J - 1, params.phi, layout.ell)
        return float(truth.effect + omega * truth.gamma)
    working = COMPARISONS[comparison][1]
    expectation = expected_estimate(layout, working, truth, params)
    return float(expectation["tate"] if working.exposure_time else expectation["delta"])


def power_pair(
    comparison: str,
    layout: DesignLayout,
    params: CorrelationParams,
    effect: float,
    gamma: float,
    alpha: Optional[float] = None,
) -> Tuple[float, float, bool]:
    """(含预期项模型功效, 欠设定模型在有偏备择下的功效, 欠设定检验是否有效)"""
    if comparison not in COMPARISONS:
        raise ConfigurationError("comparison", comparison, f"可选 {sorted(COMPARISONS)}")
    full_model, reduced_model = COMPARISONS[comparison]
    truth = comparison_truth(comparison, layout.J, effect, gamma)

    power_full = power(effect, variance(full_model, layout, params).variance, alpha)
    shifted = _biased_alternative(comparison, layout, params, truth)
    power_reduced = power(shifted, variance(reduced_model, layout, params).variance, alpha)
    # γ ≠ 0 时欠设定检验的零假设不成立
    return power_full, power_reduced, gamma == 0.0


def power_ratio_grid(
    comparison: str,
    layout: DesignLayout,
    rho_values: Iterable[float],
    axis_values: Iterable[float],
    sweep: str = "ratio",
    effect: Optional[float] = None,
    ratio: Optional[float] = None,
    sigma_sq: float = 1.0,
    alpha: Optional[float] = None,
) -> pd.DataFrame:
    """行优先遍历 (ρ, γ/效应) 或 (ρ, 效应), ratio = power_A / power_B

    sweep = "ratio": 第二维为 γ/效应, 效应固定为 effect;
    sweep = "effect": 第二维为效应, γ/效应固定为 ratio。
    """
    if sweep == "ratio":
        if effect is None:
            raise ConfigurationError("effect", None, "sweep=ratio 需要固定效应")
    elif sweep == "effect":
        if ratio is None:
            raise ConfigurationError("ratio", None, "sweep=effect 需要固定 γ/效应")
    else:
        raise ConfigurationError("sweep", sweep, "sweep 须为 ratio 或 effect")

    rho_values = list(rho_values)
    axis_values = list(axis_values)
    rows: List[dict] = []
    for rho in rho_values:
        params = params_from_icc(rho, sigma_sq, layout.K, layout.J)
        for value in axis_values:
            cell_effect = effect if sweep == "ratio" else value
            cell_gamma = value * effect if sweep == "ratio" else ratio * value
            power_a, power_b, valid = power_pair(comparison, layout, params, cell_effect, cell_gamma, alpha)
            rows.append({
                "param1": rho,
                "param2": value,
                "power_A": power_a,
                "power_B": power_b,
                "ratio": power_a / power_b if power_b > 0.0 else np.inf,
                "valid": valid,
            })
    logger.info("功效比网格完成", comparison=comparison, sweep=sweep, cells=len(rows))
    n_invalid = sum(1 for row in rows if not row["valid"])
    if n_invalid:
        logger.warning(
            "网格含无效单元: γ ≠ 0 时欠设定模型的检验不控制第一类错误",
            comparison=comparison,
            invalid_cells=n_invalid,
            cells=len(rows),
        )
    return pd.DataFrame(rows, columns=GRID_COLUMNS)


def ratio_crossing(grid: pd.DataFrame, rho: float) -> Optional[float]:
    """给定 ρ 行上 ratio = 1 的线性插值位置"""
    row = grid[np.isclose(grid["param1"], rho)].sort_values("param2")
    x = row["param2"].to_numpy(dtype=float)
    r = row["ratio"].to_numpy(dtype=float) - 1.0
    for k in range(len(x) - 1):
        if r[k] == 0.0:
            return float(x[k])
        if r[k] * r[k + 1] < 0.0:
            return float(x[k] - r[k] * (x[k + 1] - x[k]) / (r[k + 1] - r[k]))
    return None


def variance_inflation(
    I: int,  # noqa: N803
    K: int,  # noqa: N803
    J_values: Iterable[int],  # noqa: N803
    rho_values: Iterable[float],
    sigma_sq: float = 1.0,
) -> pd.DataFrame:
    """标准设计上 HH-ANT/HH 与 ETI-ANT/ETI 的方差比"""
    rows = []
    for J in J_values:  # noqa: N806
        layout = build_standard_design(I, int(J), K)
        for rho in rho_values:
            params = params_from_icc(rho, sigma_sq, K, int(J))
            var = {
                model: variance(model, layout, params).variance
                for model in (ModelKind.HH, ModelKind.HH_ANT, ModelKind.ETI, ModelKind.ETI_ANT)
            }
            rows.append({
                "J": int(J),
                "rho": rho,
                "var_hh": var[ModelKind.HH],
                "var_hhant": var[ModelKind.HH_ANT],
                "ratio_hh": var[ModelKind.HH_ANT] / var[ModelKind.HH],
                "var_eti": var[ModelKind.ETI],
                "var_etiant": var[ModelKind.ETI_ANT],
                "ratio_eti": var[ModelKind.ETI_ANT] / var[ModelKind.ETI],
            })
    return pd.DataFrame(rows)

