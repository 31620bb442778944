"""
权重网格导出
在 (Q, φ) 网格上汇总全部权重函数, 供外部绘图
"""

from typing import Iterable, List

import pandas as pd
import structlog

from modules.bias.formulas import (
    eti_anticipation_coefficients,
    omega_hh_hhant,
    omega_hh_hhant_order,
    weights_hh_under_etiant,
    weights_hhant_under_eti,
)


logger = structlog.get_logger(__name__)

GRID_COLUMNS = ["Q", "phi", "j", "weight_name", "value"]


def _rows_for(Q: int, phi: float) -> List[dict]:  # noqa: N803
    rows = []

    def add(name: str, j: int, value: float) -> None:
        rows.append({"Q": Q, "phi": phi, "j": j, "weight_name": name, "value": float(value)})

    # 标量权重记 j = 0
    add("omega_hh_hhant", 0, omega_hh_hhant(Q, phi))

    pi, omega = weights_hh_under_etiant(Q, phi)
    for j, value in enumerate(pi, start=1):
        add("pi_hh_etiant", j, value)
    for j, value in enumerate(omega, start=1):
        add("omega_hh_etiant", j, value)

    pi, psi = weights_hhant_under_eti(Q, phi)
    for j, value in enumerate(pi, start=1):
        add("pi_hhant_eti", j, value)
    for j, value in enumerate(psi, start=1):
        add("psi_hhant_eti", j, value)

    # ℓ 阶结果中 j 表示 ℓ
    for ell in range(1, Q + 1):
        add("omega_hh_hhant_order", ell, omega_hh_hhant_order(Q, phi, ell))

    if Q == 2:
        for j, value in enumerate(eti_anticipation_coefficients(phi), start=1):
            add("gamma_coef_eti", j, value)
    return rows


def weight_grid(q_values: Iterable[int], phi_values: Iterable[float]) -> pd.DataFrame:
    """长格式权重表, 列为 Q, phi, j, weight_name, value"""
    q_values = list(q_values)
    phi_values = list(phi_values)
    rows: List[dict] = []
    for Q in q_values:  # noqa: N806
        for phi in phi_values:
            rows.extend(_rows_for(int(Q), float(phi)))
    logger.debug("权重网格生成", n_q=len(q_values), n_phi=len(phi_values), rows=len(rows))
    return pd.DataFrame(rows, columns=GRID_COLUMNS)
