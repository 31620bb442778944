"""
工作模型设计矩阵
四种处理效应结构的固定效应列与秩检验
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import structlog
from scipy import linalg

from config.settings import get_settings
from core.error_handler import RankDeficiencyError
from modules.design.indicators import IndicatorSet, indicators
from schemas.design_models import DesignLayout, ModelKind


logger = structlog.get_logger(__name__)


def fixed_effect_labels(J: int, model: ModelKind) -> List[str]:  # noqa: N803
    """列名: mu, beta_2..beta_J, [gamma], delta 或 delta_1..delta_{J-1}"""
    labels = ["mu"] + [f"beta_{j}" for j in range(2, J + 1)]
    if model.has_anticipation:
        labels.append("gamma")
    if model.exposure_time:
        labels.extend(f"delta_{s}" for s in range(1, J))
    else:
        labels.append("delta")
    return labels


def sequence_blocks(ind: IndicatorSet, model: ModelKind) -> np.ndarray:
    """每个序列一块 J×p 固定效应矩阵 [1, 时期哑变量, (A), Z 或 X]"""
    rows = ind.sequence_rows()
    n_seq, J = rows.Z.shape  # noqa: N806

    periods = np.zeros((n_seq, J, J))
    periods[:, :, 0] = 1.0
    periods[:, np.arange(1, J), np.arange(1, J)] = 1.0

    parts = [periods]
    if model.has_anticipation:
        parts.append(rows.A[:, :, None].astype(float))
    if model.exposure_time:
        parts.append(rows.X.astype(float))
    else:
        parts.append(rows.Z[:, :, None].astype(float))
    return np.concatenate(parts, axis=2)


@dataclass(frozen=True, eq=False)
class WorkingDesign:
    """工作模型在某布局上的固定效应结构 (按序列存储, 簇数作权重)"""
    layout: DesignLayout
    model: ModelKind
    labels: List[str]
    blocks: np.ndarray
    counts: np.ndarray

    @property
    def n_params(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def effect_indices(self) -> np.ndarray:
        return np.array([i for i, name in enumerate(self.labels) if name.startswith("delta")])

    def information(self, x: float, y: float) -> np.ndarray:
        """Σ_i M_i'(xI - y11')M_i"""
        gram = np.einsum("q,qjk,qjl->kl", self.counts, self.blocks, self.blocks)
        col = self.blocks.sum(axis=1)
        outer = np.einsum("q,qk,ql->kl", self.counts, col, col)
        return x * gram - y * outer

    def rhs(self, means: np.ndarray, x: float, y: float) -> np.ndarray:
        """Σ_i M_i'(xI - y11')Ȳ_i; means 为 I×J, 簇按序列排序"""
        g = x * means - y * means.sum(axis=1, keepdims=True)
        totals = np.zeros((len(self.counts), means.shape[1]))
        np.add.at(totals, self.layout.sequence_of_cluster, g)
        return np.einsum("qjk,qj->k", self.blocks, totals)

    def fitted(self, theta: np.ndarray) -> np.ndarray:
        """各簇拟合均值 (I×J)"""
        per_sequence = self.blocks @ theta
        return per_sequence[self.layout.sequence_of_cluster]


def check_rank(design: WorkingDesign, tolerance: Optional[float] = None) -> None:
    """列主元 QR 检查列满秩; 秩亏时报告第一个被判为相关的列"""
    tol = get_settings().numerics.rank_tolerance if tolerance is None else tolerance
    weights = np.sqrt(design.counts)[:, None, None]
    stacked = (design.blocks * weights).reshape(-1, design.n_params)
    r_factor, pivots = linalg.qr(stacked, mode="r", pivoting=True)
    diag = np.abs(np.diag(r_factor))
    rank = int(np.sum(diag > tol * diag[0])) if diag.size else 0
    if rank < design.n_params:
        column = design.labels[pivots[rank]]
        logger.info("设计矩阵秩亏", model=design.model.value, column=column, rank=rank)
        raise RankDeficiencyError(
            column,
            f"{design.model.value} 模型在该布局下不可估计: 列 '{column}' 与其它列线性相关",
        )


def build_working_design(
    layout: DesignLayout,
    model: ModelKind,
    tolerance: Optional[float] = None,
) -> WorkingDesign:
    """构建并做秩检验"""
    model = ModelKind.parse(model)
    ind = indicators(layout)
    design = WorkingDesign(
        layout=layout,
        model=model,
        labels=fixed_effect_labels(layout.J, model),
        blocks=sequence_blocks(ind, model),
        counts=np.array([s.count for s in layout.sequences], dtype=float),
    )
    check_rank(design, tolerance)
    return design


def labelled(design: WorkingDesign, values: np.ndarray) -> Dict[str, float]:
    return {name: float(v) for name, v in zip(design.labels, values)}
