"""
估计量期望预测
按工作模型与真实模型组合分派到闭式结果, 无闭式时回退到精确期望预言机
"""

from typing import Dict, Optional, Tuple, Union

import structlog

from core.error_handler import ConfigurationError
from modules.bias.formulas import (
    eti_bias_J3,
    omega_hh_hhant,
    omega_hh_hhant_order,
    weights_hh_under_etiant,
    weights_hhant_under_eti,
)
from modules.correlation.exchangeable import derive_params
from modules.design.layout import build_standard_design
from modules.estimation.gls import expected_estimate
from schemas.design_models import ModelKind, TrueModelParams
from schemas.stat_models import BiasPrediction


logger = structlog.get_logger(__name__)


def _covers(working: ModelKind, truth: ModelKind) -> bool:
    """工作模型是否包含真实模型的全部效应结构 (正确设定或过度设定)"""
    ant_ok = working.has_anticipation or not truth.has_anticipation
    eti_ok = working.exposure_time or not truth.exposure_time
    return ant_ok and eti_ok


def _identity(working: ModelKind, truth: TrueModelParams, J: int) -> Dict[str, float]:  # noqa: N803
    effects = truth.point_effects(J)
    result: Dict[str, float] = {}
    if working.exposure_time:
        for s, value in enumerate(effects, start=1):
            result[f"delta_{s}"] = float(value)
        result["tate"] = float(effects.mean())
    else:
        result["delta"] = float(effects[0])
    if working.has_anticipation:
        result["gamma"] = float(truth.gamma)
    return result


def _analytic(
    working: ModelKind,
    truth: TrueModelParams,
    Q: int,  # noqa: N803
    phi: float,
    ell: int,
) -> Optional[Tuple[Dict[str, float], str]]:
    """有闭式结果时返回 (期望, 结果简称), 否则 None"""
    J = Q + 1  # noqa: N806
    kind = truth.kind
    gamma = truth.gamma
    effects = truth.point_effects(J)

    if working is ModelKind.HH and kind is ModelKind.HH_ANT:
        if ell == 1:
            return {"delta": float(truth.effect + omega_hh_hhant(Q, phi) * gamma)}, "hh-under-hhant"
        return {"delta": float(truth.effect + omega_hh_hhant_order(Q, phi, ell) * gamma)}, "hh-under-hhant-order"

    if working is ModelKind.HH and kind.exposure_time and (ell == 1 or gamma == 0.0):
        pi, omega = weights_hh_under_etiant(Q, phi)
        value = float(pi @ effects + omega.sum() * gamma)
        return {"delta": value}, "hh-under-etiant" if kind.has_anticipation else "hh-under-eti"

    if working is ModelKind.HH_ANT and kind.exposure_time and ell == 1:
        pi, psi = weights_hhant_under_eti(Q, phi)
        expectations = {
            "delta": float(pi @ effects),
            "gamma": float(gamma + psi @ effects),
        }
        return expectations, "hhant-under-etiant" if kind.has_anticipation else "hhant-under-eti"

    if working is ModelKind.ETI and kind.has_anticipation and Q == 2 and ell == 1:
        delta = effects if kind.exposure_time else float(truth.effect)
        d1, d2 = eti_bias_J3(phi, delta, gamma)
        expectations = {"delta_1": d1, "delta_2": d2, "tate": (d1 + d2) / 2.0}
        return expectations, "eti-under-etiant" if kind.exposure_time else "eti-under-hhant"

    return None


def oracle_expectation(
    working: ModelKind,
    truth: TrueModelParams,
    Q: int,  # noqa: N803
    phi: float,
    ell: int,
) -> Dict[str, float]:
    """标准设计 (I = Q, K = 1, σ² = 1, τ² = φ/(1-φ)) 上的精确期望, 去掉 μ 与 β"""
    J = Q + 1  # noqa: N806
    layout = build_standard_design(Q, J, 1, ell)
    params = derive_params(phi / (1.0 - phi), 1.0, 1, J)
    truth = truth.model_copy(update={"ell": ell})
    full = expected_estimate(layout, working, truth, params)
    return {
        name: value for name, value in full.items()
        if name == "tate" or name == "gamma" or name.startswith("delta")
    }


def predict_expectation(
    working: Union[str, ModelKind],
    truth: TrueModelParams,
    Q: int,  # noqa: N803
    phi: float,
    ell: int = 1,
    analytic_only: bool = False,
) -> BiasPrediction:
    """预测工作模型处理效应 (及预期效应) 估计量的期望"""
    working = ModelKind.parse(working)
    if Q < 2:
        raise ConfigurationError("Q", Q, "序列数至少为 2")
    if not 0.0 <= phi < 1.0:
        raise ConfigurationError("phi", phi, "φ 须在 [0, 1) 内")
    if not 1 <= ell <= Q:
        raise ConfigurationError("ell", ell, f"预期效应阶数须在 1..{Q} 之间")
    J = Q + 1  # noqa: N806

    formula = None
    if _covers(working, truth.kind):
        expectations = _identity(working, truth, J)
        provenance = "identity"
    else:
        analytic = _analytic(working, truth, Q, phi, ell)
        if analytic is not None:
            expectations, formula = analytic
            provenance = "analytic"
        elif analytic_only:
            raise ConfigurationError(
                "analytic_only",
                True,
                f"{working.value} 在 {truth.kind.value} 下 (Q={Q}, ℓ={ell}) 无闭式结果",
            )
        else:
            expectations = oracle_expectation(working, truth, Q, phi, ell)
            provenance = "oracle"

    logger.debug(
        "期望预测",
        working=working.value,
        truth=truth.kind.value,
        Q=Q,
        phi=phi,
        provenance=provenance,
    )
    return BiasPrediction(
        working=working,
        truth=truth.kind,
        Q=Q,
        phi=phi,
        ell=ell,
        expectations={k: float(v) for k, v in expectations.items()},
        provenance=provenance,
        formula=formula,
    )
