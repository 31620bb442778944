"""
设计常数
方差公式所需的标量、向量与矩阵常数
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from modules.design.indicators import IndicatorSet


@dataclass(frozen=True, eq=False)
class DesignConstants:
    """只依赖处理与预期指示的设计常数

    标量: U, W1, W2 (来自 Z); W3, W4, W5 (来自 A 与 Z); U3, U4, U5 (预期窗口的类比量)。
    向量/矩阵: U1, U1_outer, U2, W1_mat, W2_mat, W5_vec, W6 (来自 X_i 与 A_i)。
    κ1 为各期处理簇数, κ2 为处理格总数, κ3 为各簇处理期数。
    """
    I: int
    J: int
    U: int
    W1: int
    W2: int
    W3: int
    W4: int
    W5: int
    U3: int
    U4: int
    U5: int
    U1: np.ndarray
    U1_outer: np.ndarray
    U2: np.ndarray
    W1_mat: np.ndarray
    W2_mat: np.ndarray
    W5_vec: np.ndarray
    W6: np.ndarray
    kappa1: np.ndarray
    kappa2: int
    kappa3: np.ndarray

    def scalars(self) -> Dict[str, int]:
        return {
            "I": self.I, "J": self.J,
            "U": self.U, "W1": self.W1, "W2": self.W2,
            "W3": self.W3, "W4": self.W4, "W5": self.W5,
            "U3": self.U3, "U4": self.U4, "U5": self.U5,
            "kappa2": self.kappa2,
        }


def design_constants(ind: IndicatorSet) -> DesignConstants:
    """按定义的闭式求和计算全部设计常数 (整数运算)"""
    Z = ind.Z.astype(np.int64)  # noqa: N806
    A = ind.A.astype(np.int64)  # noqa: N806
    X = ind.X.astype(np.int64)  # noqa: N806
    n_clusters, n_periods = Z.shape

    z_col = Z.sum(axis=0)
    z_row = Z.sum(axis=1)
    a_col = A.sum(axis=0)
    a_row = A.sum(axis=1)

    x_sum = X.sum(axis=0)                      # Σ X_i, J×(J-1)
    x_ones = X.sum(axis=1)                     # X_i'1, I×(J-1)
    U1 = x_ones.sum(axis=0)  # noqa: N806

    return DesignConstants(
        I=n_clusters,
        J=n_periods,
        U=int(Z.sum()),
        W1=int((z_col ** 2).sum()),
        W2=int((z_row ** 2).sum()),
        W3=int(a_col @ a_col),
        W4=int((a_row ** 2).sum()),
        W5=int(z_col @ a_col),
        U3=int(A.sum()),
        U4=int(np.einsum("ij,ij->", A, A)),
        U5=int(a_row @ z_row),
        U1=U1,
        U1_outer=np.outer(U1, U1),
        U2=np.einsum("ijs,ijt->st", X, X),
        W1_mat=x_sum.T @ x_sum,
        W2_mat=x_ones.T @ x_ones,
        W5_vec=x_sum.T @ a_col,
        W6=x_ones.T @ a_row,
        kappa1=z_col,
        kappa2=int(Z.sum()),
        kappa3=z_row,
    )
