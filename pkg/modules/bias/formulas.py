"""
偏倚闭式公式
标准设计上误设工作模型估计量期望中的权重函数
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from core.error_handler import ConfigurationError
from schemas.design_models import ModelKind


# ============================================================================
# 权重容器
# ============================================================================

@dataclass(frozen=True, eq=False)
class BiasWeights:
    """某一误设情景下的权重集合 (按暴露时间 j = 1..Q 的数组或标量)"""
    scenario: str
    Q: int
    phi: float
    weights: Dict[str, Union[float, np.ndarray]] = field(default_factory=dict)
    ell: int = 1

    def __getitem__(self, name: str) -> Union[float, np.ndarray]:
        return self.weights[name]


def _check(Q: int, phi: float) -> None:  # noqa: N803
    if Q < 2:
        raise ConfigurationError("Q", Q, "序列数至少为 2")
    if not 0.0 <= phi < 1.0:
        raise ConfigurationError("phi", phi, "φ 须在 [0, 1) 内")


def _exposure(Q: int) -> np.ndarray:  # noqa: N803
    return np.arange(1, Q + 1, dtype=float)


# ============================================================================
# HH 工作模型
# ============================================================================

def omega_hh_hhant(Q: int, phi: float) -> float:  # noqa: N803
    """真实模型为 HH-ANT 时 E(δ̂^HH) = δ + ωγ 中的 ω"""
    _check(Q, phi)
    return -6.0 * (1.0 + phi * Q) / ((Q + 1) * (2.0 + phi * Q))


def weights_hh_under_etiant(Q: int, phi: float) -> Tuple[np.ndarray, np.ndarray]:  # noqa: N803
    """E(δ̂^HH) = Σ_j {π(j)δ(j) + ω(j)γ}; 真实模型为 ETI 时取 γ = 0"""
    _check(Q, phi)
    j = _exposure(Q)
    # (Q-1)(φQ+2) 与 (Q-1)(Q+1)(φQ+2) 为分母的因式形式
    pi = (
        6.0 * (j - Q - 1) * ((1 + 2 * phi * Q) * j - (1 + phi + phi * Q) * Q)
        / (Q * (Q + 1) * (Q - 1) * (phi * Q + 2))
    )
    omega = (
        -6.0 * (phi * Q ** 2 - phi * Q + 2 * j - 2)
        / (Q * (Q - 1) * (Q + 1) * (phi * Q + 2))
    )
    return pi, omega


def omega_hh_hhant_order(Q: int, phi: float, ell: int) -> float:  # noqa: N803
    """ℓ 阶预期效应下 E(δ̂^HH) = δ + ω_ℓ γ 中的 ω_ℓ; ℓ = 1 时即 omega_hh_hhant"""
    _check(Q, phi)
    if not 1 <= ell <= Q:
        raise ConfigurationError("ell", ell, f"预期效应阶数须在 1..{Q} 之间")
    numerator = (
        6 * phi * Q ** 3 - 9 * phi * ell * Q ** 2 + 3 * phi * Q ** 2 + 6 * Q ** 2
        + 4 * phi * ell ** 2 * Q - 3 * phi * ell * Q - 6 * ell * Q - phi * Q
        + 2 * ell ** 2 - 2
    )
    return float(-ell * numerator / (Q * (Q + 1) * (Q - 1) * (phi * Q + 2)))


# ============================================================================
# ETI 工作模型 (J = 3)
# ============================================================================

def eti_bias_J3(  # noqa: N802
    phi: float,
    delta: Union[float, Tuple[float, float]],
    gamma: float,
) -> Tuple[float, float]:
    """J = 3 标准设计上 (E δ̂^ETI(1), E δ̂^ETI(2)) = (δ(1) - (1+φ)γ, δ(2) - (1+2φ)γ)

    delta 为常数 (真实模型 HH-ANT) 或 (δ(1), δ(2)) (真实模型 ETI-ANT)。
    """
    _check(2, phi)
    if np.ndim(delta) == 0:
        d1 = d2 = float(delta)
    else:
        values = np.asarray(delta, dtype=float)
        if values.shape != (2,):
            raise ConfigurationError("delta", list(values), "J = 3 时需要 δ(1), δ(2) 两个点效应")
        d1, d2 = float(values[0]), float(values[1])
    return d1 - (1.0 + phi) * gamma, d2 - (1.0 + 2.0 * phi) * gamma


def eti_anticipation_coefficients(phi: float) -> Tuple[float, float]:
    """γ 在 J = 3 ETI 估计量期望中的系数 -(1+φ), -(1+2φ)"""
    _check(2, phi)
    return -(1.0 + phi), -(1.0 + 2.0 * phi)


# ============================================================================
# HH-ANT 工作模型
# ============================================================================

def weights_hhant_under_eti(Q: int, phi: float) -> Tuple[np.ndarray, np.ndarray]:  # noqa: N803
    """E(δ̂^HH-ANT) = Σ π(j)δ(j), E(γ̂^HH-ANT) = [γ +] Σ ψ(j)δ(j)

    真实模型为 ETI 或 ETI-ANT 时权重相同, 后者 γ̂ 的期望另加真实 γ。
    """
    _check(Q, phi)
    j = _exposure(Q)
    base = phi * Q ** 2 - 2 * phi * Q + 2 * Q - 1
    pi = (
        6.0 * (
            phi * Q ** 3 - 3 * phi * Q ** 2 * j + phi * Q ** 2 + Q ** 2
            + 2 * phi * Q * j ** 2 - 2 * phi * Q * j + phi * Q - 2 * Q * j + j ** 2
        )
        / (Q * (Q - 1) * base)
    )
    psi = (
        2 * phi * Q ** 3 - 8 * phi * Q ** 2 * j + 5 * phi * Q ** 2 + Q ** 2
        + 6 * phi * Q * j ** 2 - 8 * phi * Q * j + 3 * phi * Q - 4 * Q * j + Q
        + 3 * j ** 2 - j
    ) / (Q * (Q - 1) * base)
    return pi, psi


# ============================================================================
# 情景表
# ============================================================================

SCENARIOS: Dict[str, Tuple[ModelKind, ModelKind]] = {
    "hh-under-hhant": (ModelKind.HH, ModelKind.HH_ANT),
    "hh-under-hhant-order": (ModelKind.HH, ModelKind.HH_ANT),
    "hh-under-eti": (ModelKind.HH, ModelKind.ETI),
    "hh-under-etiant": (ModelKind.HH, ModelKind.ETI_ANT),
    "eti-under-hhant": (ModelKind.ETI, ModelKind.HH_ANT),
    "eti-under-etiant": (ModelKind.ETI, ModelKind.ETI_ANT),
    "hhant-under-eti": (ModelKind.HH_ANT, ModelKind.ETI),
    "hhant-under-etiant": (ModelKind.HH_ANT, ModelKind.ETI_ANT),
}


def scenario_weights(scenario: str, Q: Optional[int], phi: float, ell: int = 1) -> BiasWeights:  # noqa: N803
    """按情景名计算权重集合"""
    if scenario not in SCENARIOS:
        raise ConfigurationError("scenario", scenario, f"未知情景, 可选 {sorted(SCENARIOS)}")

    if scenario.startswith("eti-under"):
        if Q not in (None, 2):
            raise ConfigurationError("Q", Q, "ETI 闭式结果仅适用于 J = 3 (Q = 2)")
        first, second = eti_anticipation_coefficients(phi)
        weights = {"gamma_coef_1": first, "gamma_coef_2": second}
        return BiasWeights(scenario=scenario, Q=2, phi=phi, weights=weights)

    if Q is None:
        raise ConfigurationError("Q", None, "该情景需要序列数 Q")

    if scenario == "hh-under-hhant":
        weights = {"omega": omega_hh_hhant(Q, phi)}
    elif scenario == "hh-under-hhant-order":
        weights = {"omega": omega_hh_hhant_order(Q, phi, ell)}
    elif scenario in ("hh-under-eti", "hh-under-etiant"):
        pi, omega = weights_hh_under_etiant(Q, phi)
        weights = {"pi": pi, "omega": omega} if scenario == "hh-under-etiant" else {"pi": pi}
    else:
        pi, psi = weights_hhant_under_eti(Q, phi)
        weights = {"pi": pi, "psi": psi}
    return BiasWeights(scenario=scenario, Q=Q, phi=phi, weights=weights, ell=ell)
