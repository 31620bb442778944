"""
簇-时期均值数据
长格式数据集到充分统计量 (均值与合并组内平方和) 的归约
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
import structlog

from core.error_handler import ConfigurationError, DataIOError
from modules.design.layout import layout_from_treatment_matrix
from schemas.design_models import DesignLayout


logger = structlog.get_logger(__name__)

DATASET_COLUMNS = ["cluster", "period", "individual", "Z", "A", "y"]


@dataclass(frozen=True, eq=False)
class ClusterPeriodMeans:
    """簇-时期均值 Ȳ_ij (I×J, 簇按序列排序) 与合并组内平方和

    within_ss = Σ_ijk (Y_ijk - Ȳ_ij)², 个体层似然需要它; 仅有均值时为 None。
    """
    means: np.ndarray
    K: int
    within_ss: Optional[float] = None
    cluster_ids: Optional[np.ndarray] = None

    @property
    def I(self) -> int:  # noqa: E743
        return self.means.shape[0]

    @property
    def J(self) -> int:  # noqa: N802
        return self.means.shape[1]

    @property
    def n_obs(self) -> int:
        return self.I * self.J * self.K

    def sequence_means(self, layout: DesignLayout) -> np.ndarray:
        """各序列的时期均值 Ȳ_j(q), 形状 (序列数, J)"""
        seq = layout.sequence_of_cluster
        totals = np.zeros((layout.n_sequences, self.J))
        np.add.at(totals, seq, self.means)
        counts = np.bincount(seq, minlength=layout.n_sequences)
        return totals / counts[:, None]

    @classmethod
    def from_frame(
        cls,
        frame: pd.DataFrame,
        layout: Optional[DesignLayout] = None,
    ) -> "ClusterPeriodMeans":
        """由长格式数据归约; 簇按 (采纳时期, 簇编号) 排序以对齐布局"""
        missing = [c for c in ("cluster", "period", "Z", "y") if c not in frame.columns]
        if missing:
            raise DataIOError("dataset", f"缺少列 {missing}")

        grouped = frame.groupby(["cluster", "period"], sort=True)["y"]
        cells = grouped.agg(["mean", "count"])
        sizes = cells["count"].unique()
        if len(sizes) != 1:
            raise ConfigurationError("K", sorted(sizes.tolist()), "簇-时期规模不相等")
        K = int(sizes[0])  # noqa: N806

        means = cells["mean"].unstack("period")
        if means.isna().any().any():
            raise ConfigurationError("dataset", "missing cells", "存在缺失的簇-时期格")

        z = frame.groupby(["cluster", "period"], sort=True)["Z"].agg(["min", "max"])
        if (z["min"] != z["max"]).any():
            raise ConfigurationError("Z", "mixed", "同一簇-时期格内处理指示不一致")
        z_matrix = z["max"].unstack("period").to_numpy()

        adoption = np.argmax(z_matrix > 0, axis=1)
        order = np.lexsort((means.index.to_numpy(), adoption))
        z_matrix = z_matrix[order]
        mean_matrix = means.to_numpy(dtype=float)[order]

        centered = frame["y"].to_numpy(dtype=float) - grouped.transform("mean").to_numpy(dtype=float)
        within_ss = float(centered @ centered)

        inferred = layout_from_treatment_matrix(z_matrix, K=K, ell=layout.ell if layout else 1)
        if layout is not None:
            if [s.model_dump() for s in inferred.sequences] != [s.model_dump() for s in layout.sequences] \
                    or inferred.K != layout.K:
                raise ConfigurationError("layout", layout.to_document(), "数据集与给定布局不一致")

        logger.debug("数据集归约完成", I=mean_matrix.shape[0], J=mean_matrix.shape[1], K=K)
        return cls(
            means=mean_matrix,
            K=K,
            within_ss=within_ss,
            cluster_ids=means.index.to_numpy()[order],
        )


def layout_from_frame(frame: pd.DataFrame, ell: int = 1) -> DesignLayout:
    """由数据集的 Z 列反推布局"""
    if not {"cluster", "period", "Z", "y"}.issubset(frame.columns):
        raise DataIOError("dataset", "数据集缺少 cluster/period/Z/y 列")
    z_matrix = frame.groupby(["cluster", "period"], sort=True)["Z"].max().unstack("period").to_numpy()
    sizes = frame.groupby(["cluster", "period"]).size().unique()
    if len(sizes) != 1:
        raise ConfigurationError("K", sorted(sizes.tolist()), "簇-时期规模不相等")
    return layout_from_treatment_matrix(z_matrix, K=int(sizes[0]), ell=ell)


def read_dataset(path: Union[str, Path]) -> pd.DataFrame:
    """读取长格式数据集 CSV (允许 '#' 注释行)"""
    try:
        frame = pd.read_csv(path, comment="#")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataIOError(str(path), "无法读取数据集", original_exception=e) from e
    missing = [c for c in DATASET_COLUMNS if c not in frame.columns]
    if missing:
        raise DataIOError(str(path), f"数据集缺少列 {missing}")
    return frame
