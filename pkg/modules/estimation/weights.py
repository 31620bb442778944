"""
闭式估计量权重
标准设计上 HH、HH-ANT 与 J=3 时 ETI 估计量对序列均值 Ȳ_j(q) 的权重
"""

from typing import Tuple

import numpy as np

from core.error_handler import ConfigurationError


def _grid(Q: int):  # noqa: N803
    """返回 q (Q×1) 与 j (1×J) 网格, 均从 1 起"""
    J = Q + 1  # noqa: N806
    q = np.arange(1, Q + 1)[:, None].astype(float)
    j = np.arange(1, J + 1)[None, :].astype(float)
    return q, j, J


def _check(Q: int, phi: float) -> None:  # noqa: N803
    if Q < 2:
        raise ConfigurationError("Q", Q, "序列数至少为 2")
    if not 0.0 <= phi < 1.0:
        raise ConfigurationError("phi", phi, "φ 须在 [0, 1) 内")


def hh_weights(Q: int, phi: float) -> np.ndarray:  # noqa: N803
    """δ̂^HH = Σ w(q,j) Ȳ_j(q)"""
    _check(Q, phi)
    q, j, _ = _grid(Q)
    t1 = 12.0 * (1.0 + phi * Q) / (Q * (Q + 1) * (phi * Q ** 2 + 2 * Q - phi * Q - 2))
    centre = phi * Q * (2 * q - Q - 1) / (2.0 * (1.0 + phi * Q))
    return t1 * (Q * (j > q) - j + 1.0 + centre)


def hhant_weights(Q: int, phi: float) -> Tuple[np.ndarray, np.ndarray]:  # noqa: N803
    """(δ̂^HH-ANT 权重, γ̂^HH-ANT 权重)"""
    _check(Q, phi)
    q, j, J = _grid(Q)  # noqa: N806
    base = (Q - 1) * (phi * Q ** 2 - 2 * phi * Q + 2 * Q - 1)
    t2 = 6.0 / base
    t3 = 1.0 / base
    at_q = (j == q).astype(float)
    after_q = (j > q).astype(float)
    last = (j == J).astype(float)

    delta = t2 * (
        -phi * (Q - 2 * q + 1)
        + (phi * Q + 1) / Q * (Q * at_q + 2 * Q * after_q + last - 2 * j + 1)
    )
    gamma = t3 * (
        (Q + 1) * (phi * Q + 2) * at_q
        + 6 * (phi * Q + 1) * after_q
        + (Q + 1) * (phi * Q + 2) / Q * last
        - 4 * phi * Q - 6 * phi * j + 6 * phi * q + 2 * phi - 2
        - 6 * j / Q + 4.0 / Q
    )
    return delta, gamma


def eti_weights_J3(phi: float, J: int = 3) -> Tuple[np.ndarray, np.ndarray]:  # noqa: N802,N803
    """J = 3 标准设计上 (δ̂^ETI(1), δ̂^ETI(2)) 的权重, 各为 2×3 网格"""
    if J != 3:
        raise ConfigurationError("J", J, "ETI 闭式权重仅适用于 J = 3")
    _check(2, phi)
    q, j, J = _grid(2)  # noqa: N806
    first_exposure = (j == q + 1).astype(float)
    second_exposure = (j == q + 2).astype(float)
    after_start = (j > 1).astype(float)
    last = (j == J).astype(float)
    c = 1.0 + 2.0 * phi

    delta_1 = (
        -(j - 1) * c + phi * after_start
        + 2 * (1 + phi) * first_exposure + 2 * c * second_exposure
        + phi * (2 * q - 3)
    )
    delta_2 = (
        -(j - 1) * c - c * last
        + 2 * c * first_exposure + 4 * c * second_exposure
        + 2 * phi * (2 * q - 3)
    )
    return delta_1, delta_2


def apply_weights(weights: np.ndarray, sequence_means: np.ndarray) -> float:
    """Σ_{q,j} w(q,j) Ȳ_j(q)"""
    return float(np.sum(weights * sequence_means))
