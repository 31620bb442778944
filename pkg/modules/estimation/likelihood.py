"""
方差分量估计
在 ρ 上剖面化的精确 REML/ML 似然与暴露时间异质性似然比检验
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
import pandas as pd
import structlog
from scipy import optimize, stats

from config.settings import NumericsSettings, get_settings
from core.error_handler import ConfigurationError, ConvergenceError
from modules.estimation.data import ClusterPeriodMeans
from modules.estimation.gls import build_fit_result, cholesky_solve, information_inverse
from modules.estimation.models import WorkingDesign, build_working_design
from schemas.design_models import DesignLayout, ModelKind
from schemas.stat_models import FitResult


logger = structlog.get_logger(__name__)

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class ProfilePoint:
    """某一 ρ 处的剖面似然"""
    rho: float
    loglik: float
    sigma_t_sq: float
    qform: float


class LrtResult(NamedTuple):
    statistic: float
    df: int
    p_value: float
    loglik_null: float
    loglik_alternative: float


# ============================================================================
# 剖面似然
# ============================================================================

def _standardized_inverse(rho: float, K: int, J: int):  # noqa: N803
    """均值协方差 σ_t²{(1-ρ)/K·I + ρ11'} 除以 σ_t² 后之逆的 (x, y)"""
    x = K / (1.0 - rho)
    y = x * rho / ((1.0 - rho) / K + J * rho)
    return x, y


def _profile(
    design: WorkingDesign,
    means: ClusterPeriodMeans,
    rho: float,
    reml: bool,
):
    """返回 (剖面点, θ̂, 标准化信息矩阵)"""
    K, J, I = means.K, means.J, means.I  # noqa: N806
    n_obs = means.n_obs
    p = design.n_params
    x, y = _standardized_inverse(rho, K, J)

    information = design.information(x, y)
    theta = cholesky_solve(information, design.rhs(means.means, x, y))
    resid = means.means - design.fitted(theta)
    qform = x * float(np.sum(resid ** 2)) - y * float(np.sum(resid.sum(axis=1) ** 2))
    qform += float(means.within_ss) / (1.0 - rho)
    qform = max(qform, np.finfo(float).tiny)

    logdet_r = I * ((J * K - 1) * np.log1p(-rho) + np.log1p((J * K - 1) * rho))
    if reml:
        dof = n_obs - p
        sigma_t_sq = qform / dof
        _, logdet_info = np.linalg.slogdet(information)
        loglik = -0.5 * (dof * _LOG_2PI + dof * np.log(sigma_t_sq) + logdet_r + logdet_info + dof)
    else:
        sigma_t_sq = qform / n_obs
        loglik = -0.5 * (n_obs * _LOG_2PI + n_obs * np.log(sigma_t_sq) + logdet_r + n_obs)

    return ProfilePoint(rho=rho, loglik=float(loglik), sigma_t_sq=sigma_t_sq, qform=qform), theta, information


def profile_loglik(
    design: WorkingDesign,
    means: ClusterPeriodMeans,
    rho: float,
    method: str = "reml",
) -> ProfilePoint:
    """给定 ρ 的剖面对数似然 (σ_t² 取闭式极大值)"""
    point, _, _ = _profile(design, means, rho, method == "reml")
    return point


# ============================================================================
# 拟合
# ============================================================================

def fit_variance_components(
    design: WorkingDesign,
    means: ClusterPeriodMeans,
    method: str = "reml",
    numerics: Optional[NumericsSettings] = None,
) -> FitResult:
    """在 ρ ∈ [0, ρ_max] 上做有界一维搜索, 并与两端点比较取最优"""
    if method not in ("reml", "ml"):
        raise ConfigurationError("method", method, "方法须为 reml 或 ml")
    if means.within_ss is None:
        raise ConfigurationError("within_ss", None, "精确似然需要组内平方和")
    if means.n_obs - design.n_params <= 0:
        raise ConfigurationError("n_obs", means.n_obs, "观测数不足以估计方差分量")

    numerics = numerics or get_settings().numerics
    upper = numerics.rho_upper
    reml = method == "reml"

    def objective(rho: float) -> float:
        return -_profile(design, means, float(rho), reml)[0].loglik

    result = optimize.minimize_scalar(
        objective,
        bounds=(0.0, upper),
        method="bounded",
        options={"xatol": numerics.reml_tolerance, "maxiter": numerics.reml_max_iter},
    )
    if not result.success or not np.isfinite(result.fun):
        logger.info("方差分量优化未收敛", model=design.model.value, message=str(result.message))
        raise ConvergenceError(
            f"方差分量优化未收敛: {result.message}",
            bracket=[0.0, upper],
        )

    candidates = [(float(result.fun), float(result.x), None)]
    candidates.append((objective(0.0), 0.0, "tau_sq_zero"))
    candidates.append((objective(upper), upper, "sigma_sq_zero"))
    _, rho_hat, boundary = min(candidates, key=lambda c: c[0])
    # 内点解落在端点 xatol 之内时同样视为边界解, 并取端点值
    if boundary is None and rho_hat <= numerics.reml_tolerance:
        rho_hat, boundary = 0.0, "tau_sq_zero"
    elif boundary is None and rho_hat >= upper - numerics.reml_tolerance:
        rho_hat, boundary = upper, "sigma_sq_zero"

    point, theta, information = _profile(design, means, rho_hat, reml)
    sigma_t_sq = point.sigma_t_sq
    covariance = sigma_t_sq * information_inverse(information)

    loglik_ml = point.loglik if not reml else _ml_at(design, means, rho_hat, sigma_t_sq)
    extra = {
        "loglik_ml": loglik_ml,
        "loglik_reml": point.loglik if reml else None,
        "boundary": boundary,
        "iterations": int(getattr(result, "nfev", 0)) + 2,
    }
    if boundary:
        logger.info("方差分量位于边界", model=design.model.value, boundary=boundary)

    return build_fit_result(
        design,
        theta,
        covariance,
        tau_sq=rho_hat * sigma_t_sq,
        sigma_sq=(1.0 - rho_hat) * sigma_t_sq,
        method=method,
        **extra,
    )


def _ml_at(design: WorkingDesign, means: ClusterPeriodMeans, rho: float, sigma_t_sq: float) -> float:
    """给定 (ρ, σ_t²) 的 ML 对数似然 (不剖面化)"""
    point, _, _ = _profile(design, means, rho, reml=False)
    n_obs = means.n_obs
    K, J, I = means.K, means.J, means.I  # noqa: N806
    logdet_r = I * ((J * K - 1) * np.log1p(-rho) + np.log1p((J * K - 1) * rho))
    return float(-0.5 * (n_obs * _LOG_2PI + n_obs * np.log(sigma_t_sq) + logdet_r + point.qform / sigma_t_sq))


def _prepare(
    layout: Union[DesignLayout, WorkingDesign],
    model: Union[str, ModelKind],
    dataset: Union[ClusterPeriodMeans, pd.DataFrame],
):
    model = ModelKind.parse(model)
    if isinstance(layout, WorkingDesign):
        design = layout
    else:
        design = build_working_design(layout, model)
    if isinstance(dataset, pd.DataFrame):
        dataset = ClusterPeriodMeans.from_frame(dataset, design.layout)
    if dataset.means.shape != (design.layout.I, design.layout.J):
        raise ConfigurationError("dataset", dataset.means.shape, "数据维度与布局不一致")
    return design, dataset


def reml_fit(
    layout: Union[DesignLayout, WorkingDesign],
    model: Union[str, ModelKind],
    dataset: Union[ClusterPeriodMeans, pd.DataFrame],
) -> FitResult:
    """REML 估计 τ², σ², 固定效应取最优处的 GLS"""
    design, means = _prepare(layout, model, dataset)
    fit = fit_variance_components(design, means, "reml")
    logger.debug("REML 拟合完成", model=design.model.value, tau_sq=fit.tau_sq, sigma_sq=fit.sigma_sq)
    return fit


def ml_fit(
    layout: Union[DesignLayout, WorkingDesign],
    model: Union[str, ModelKind],
    dataset: Union[ClusterPeriodMeans, pd.DataFrame],
) -> FitResult:
    design, means = _prepare(layout, model, dataset)
    return fit_variance_components(design, means, "ml")


# ============================================================================
# 似然比检验
# ============================================================================

def lrt_exposure_heterogeneity(
    layout: DesignLayout,
    dataset: Union[ClusterPeriodMeans, pd.DataFrame],
    with_anticipation: bool = False,
) -> LrtResult:
    """H0: δ(1) = ... = δ(J-1); 2(ℓ_ETI - ℓ_HH) ~ χ²_{J-2}"""
    df = layout.J - 2
    if df <= 0:
        raise ConfigurationError("J", layout.J, "异质性检验自由度为 0")

    null_model = ModelKind.HH_ANT if with_anticipation else ModelKind.HH
    alt_model = ModelKind.ETI_ANT if with_anticipation else ModelKind.ETI

    if isinstance(dataset, pd.DataFrame):
        dataset = ClusterPeriodMeans.from_frame(dataset, layout)

    null_fit = ml_fit(layout, null_model, dataset)
    alt_fit = ml_fit(layout, alt_model, dataset)
    statistic = max(0.0, 2.0 * (alt_fit.loglik_ml - null_fit.loglik_ml))
    p_value = float(stats.chi2.sf(statistic, df))

    logger.info(
        "异质性似然比检验",
        null=null_model.value,
        alternative=alt_model.value,
        statistic=statistic,
        df=df,
        p_value=p_value,
    )
    return LrtResult(
        statistic=statistic,
        df=df,
        p_value=p_value,
        loglik_null=float(null_fit.loglik_ml),
        loglik_alternative=float(alt_fit.loglik_ml),
    )
