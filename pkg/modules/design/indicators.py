"""
指示矩阵
处理、预期与暴露时间指示的构造与导出
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from schemas.design_models import DesignLayout


@dataclass(frozen=True, eq=False)
class IndicatorSet:
    """布局的全部指示结构 (簇按序列排序)

    Z, A, S 为 I×J 整数矩阵; S 在未处理格为 0。X 为 I×J×(J-1) 暴露时间设计块。
    """
    layout: DesignLayout
    Z: np.ndarray
    A: np.ndarray
    S: np.ndarray
    X: np.ndarray

    @property
    def I(self) -> int:  # noqa: E743
        return self.Z.shape[0]

    @property
    def J(self) -> int:  # noqa: N802
        return self.Z.shape[1]

    def sequence_rows(self) -> "IndicatorSet":
        """每个序列取一行的指示结构"""
        first = np.searchsorted(self.layout.sequence_of_cluster, np.arange(self.layout.n_sequences))
        return IndicatorSet(
            layout=self.layout,
            Z=self.Z[first],
            A=self.A[first],
            S=self.S[first],
            X=self.X[first],
        )


def anticipation_row(adopt: int, J: int, ell: int) -> np.ndarray:  # noqa: N803
    """A_j = 1 当且仅当 max(1, j*-ℓ) <= j < j*"""
    periods = np.arange(1, J + 1)
    start = max(1, adopt - ell)
    return ((periods >= start) & (periods < adopt)).astype(int)


def indicators(layout: DesignLayout) -> IndicatorSet:
    """由布局生成 Z, A, s 与 X_i"""
    J = layout.J  # noqa: N806
    adoption = layout.adoption_times
    periods = np.arange(1, J + 1)

    Z = (periods[None, :] >= adoption[:, None]).astype(int)  # noqa: N806
    A = np.vstack([anticipation_row(int(a), J, layout.ell) for a in adoption])  # noqa: N806
    S = np.where(Z == 1, periods[None, :] - adoption[:, None] + 1, 0)  # noqa: N806

    X = np.zeros((len(adoption), J, J - 1), dtype=int)  # noqa: N806
    rows, cols = np.nonzero(Z)
    X[rows, cols, S[rows, cols] - 1] = 1

    return IndicatorSet(layout=layout, Z=Z, A=A, S=S, X=X)


def indicator_frame(ind: IndicatorSet) -> pd.DataFrame:
    """长格式表: cluster,period,Z,A,s (簇与时期均从 1 起)"""
    n_clusters, n_periods = ind.Z.shape
    cluster = np.repeat(np.arange(1, n_clusters + 1), n_periods)
    period = np.tile(np.arange(1, n_periods + 1), n_clusters)
    return pd.DataFrame({
        "cluster": cluster,
        "period": period,
        "Z": ind.Z.ravel(),
        "A": ind.A.ravel(),
        "s": ind.S.ravel(),
    })
