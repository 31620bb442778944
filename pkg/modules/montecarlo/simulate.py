"""
数据生成
真实模型下的个体层数据集与簇-时期充分统计量抽样
"""

from typing import Optional

import numpy as np
import pandas as pd
import structlog

from modules.design.indicators import indicators
from modules.estimation.data import DATASET_COLUMNS, ClusterPeriodMeans
from modules.estimation.gls import expected_means
from schemas.design_models import DesignLayout, TrueModelParams


logger = structlog.get_logger(__name__)


def _individual_outcomes(
    layout: DesignLayout,
    truth: TrueModelParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Y_ijk = 均值结构 + α_i + ε_ijk, 形状 (I, J, K)"""
    mean = expected_means(layout, truth)
    I, J, K = layout.I, layout.J, layout.K  # noqa: N806
    alpha = rng.normal(0.0, np.sqrt(truth.tau_sq), size=I)
    eps = rng.normal(0.0, np.sqrt(truth.sigma_sq), size=(I, J, K))
    return mean[:, :, None] + alpha[:, None, None] + eps


def simulate_dataset(
    layout: DesignLayout,
    truth: TrueModelParams,
    seed: int,
) -> pd.DataFrame:
    """长格式数据集 cluster, period, individual, Z, A, y (编号从 1 起); 同一种子结果逐位相同"""
    rng = np.random.default_rng(seed)
    outcomes = _individual_outcomes(layout, truth, rng)
    ell = truth.ell if truth.ell is not None else layout.ell
    ind = indicators(layout.with_ell(ell))
    I, J, K = outcomes.shape  # noqa: N806

    cluster, period, individual = np.meshgrid(
        np.arange(1, I + 1), np.arange(1, J + 1), np.arange(1, K + 1), indexing="ij"
    )
    frame = pd.DataFrame({
        "cluster": cluster.ravel(),
        "period": period.ravel(),
        "individual": individual.ravel(),
        "Z": np.repeat(ind.Z.ravel(), K).astype(int),
        "A": np.repeat(ind.A.ravel(), K).astype(int),
        "y": outcomes.ravel(),
    })
    logger.debug("数据集生成完成", I=I, J=J, K=K, seed=seed)
    return frame[DATASET_COLUMNS]


def draw_means(
    layout: DesignLayout,
    truth: TrueModelParams,
    rng: np.random.Generator,
    individual_level: bool = False,
) -> ClusterPeriodMeans:
    """一次重复的簇-时期均值与组内平方和

    默认直接抽充分统计量: Ȳ_ij 噪声 ~ N(0, σ²/K), 组内平方和 ~ σ²χ²_{IJ(K-1)}。
    """
    I, J, K = layout.I, layout.J, layout.K  # noqa: N806
    if individual_level:
        outcomes = _individual_outcomes(layout, truth, rng)
        means = outcomes.mean(axis=2)
        within_ss = float(((outcomes - means[:, :, None]) ** 2).sum())
        return ClusterPeriodMeans(means=means, K=K, within_ss=within_ss)

    mean = expected_means(layout, truth)
    alpha = rng.normal(0.0, np.sqrt(truth.tau_sq), size=I)
    noise = rng.normal(0.0, np.sqrt(truth.sigma_sq / K), size=(I, J))
    dof = I * J * (K - 1)
    within_ss = float(truth.sigma_sq * rng.chisquare(dof)) if dof > 0 else 0.0
    return ClusterPeriodMeans(means=mean + alpha[:, None] + noise, K=K, within_ss=within_ss)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """第 r 次重复的独立随机流, 由 (seed, r) 派生"""
    return np.random.default_rng([seed, replication])


def draw_replication(
    layout: DesignLayout,
    truth: TrueModelParams,
    seed: int,
    replication: int,
    individual_level: Optional[bool] = None,
) -> ClusterPeriodMeans:
    return draw_means(layout, truth, replication_rng(seed, replication), bool(individual_level))
