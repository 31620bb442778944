"""
蒙特卡洛研究
在真实模型下重复生成数据, 用各工作模型做 REML 拟合并汇总偏倚、覆盖率与功效
"""

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import structlog
from scipy import stats

from config.settings import NumericsSettings, get_settings
from core.error_handler import ConfigurationError, ConvergenceError, SwcrtBaseException
from modules.correlation.exchangeable import derive_params
from modules.estimation.gls import expected_estimate
from modules.estimation.likelihood import fit_variance_components
from modules.estimation.models import WorkingDesign, build_working_design
from modules.montecarlo.simulate import draw_replication
from schemas.design_models import DesignLayout, ModelKind, TrueModelParams
from schemas.stat_models import MonteCarloReport, MonteCarloRow


logger = structlog.get_logger(__name__)

# 每次拟合记录: 效应估计, 标准误, γ̂, γ̂ 标准误, τ̂
_FIELDS = 5

REPORT_COLUMNS = [
    "true_model", "working_model", "effect_true", "mean_est", "mean_gamma", "mean_tau",
    "sd_est", "mean_se", "coverage_pct", "power_pct", "sd_gamma", "se_gamma",
    "coverage_gamma_pct", "power_gamma_pct",
]


# ============================================================================
# 工作进程 (模块级以便序列化)
# ============================================================================

def _init_worker(level: str) -> None:
    """子进程日志只写标准错误"""
    structlog.configure(
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, level.upper(), logging.WARNING)),
        logger_factory=structlog.WriteLoggerFactory(file=sys.stderr),
    )


def _run_chunk(args) -> np.ndarray:
    """处理一批重复, 返回形状 (批大小, 工作模型数, 5) 的数组; 失败拟合为 NaN"""
    layout, truth, models, replications, seed, individual_level, numerics = args
    designs = [build_working_design(layout, model) for model in models]

    out = np.full((len(replications), len(designs), _FIELDS), np.nan)
    for row, r in enumerate(replications):
        means = draw_replication(layout, truth, seed, int(r), individual_level)
        for col, design in enumerate(designs):
            out[row, col] = _fit_once(design, means, numerics)
    return out


def _fit_once(design: WorkingDesign, means, numerics: NumericsSettings) -> np.ndarray:
    try:
        fit = fit_variance_components(design, means, "reml", numerics)
    except SwcrtBaseException as e:
        logger.debug("单次拟合失败", model=design.model.value, error=e.message)
        return np.full(_FIELDS, np.nan)
    gamma = fit.gamma()
    gamma_se = fit.gamma_se()
    return np.array([
        fit.effect(),
        fit.effect_se(),
        np.nan if gamma is None else gamma,
        np.nan if gamma_se is None else gamma_se,
        fit.tau,
    ])


# ============================================================================
# 汇总
# ============================================================================

def _summarize(
    results: np.ndarray,
    truth: TrueModelParams,
    truth_value: float,
    model: ModelKind,
    z: float,
    expected: Dict[str, float],
) -> MonteCarloRow:
    ok = ~np.isnan(results[:, 0])
    fits = results[ok]
    est, se, gamma, gamma_se, tau = (fits[:, k] for k in range(_FIELDS))

    row = {
        "true_model": truth.kind,
        "working_model": model,
        "effect_true": truth_value,
        "mean_est": float(est.mean()),
        "mean_tau": float(tau.mean()),
        "sd_est": float(est.std(ddof=1)) if len(est) > 1 else 0.0,
        "mean_se": float(se.mean()),
        "coverage_pct": float(100.0 * np.mean(np.abs(est - truth_value) <= z * se)),
        "power_pct": float(100.0 * np.mean(np.abs(est / se) > z)),
        "expected_est": expected.get("tate" if model.exposure_time else "delta"),
        "expected_gamma": expected.get("gamma"),
        "n_ok": int(ok.sum()),
        "n_failed": int((~ok).sum()),
    }
    if model.has_anticipation:
        row.update({
            "mean_gamma": float(gamma.mean()),
            "sd_gamma": float(gamma.std(ddof=1)) if len(gamma) > 1 else 0.0,
            "se_gamma": float(gamma_se.mean()),
            "coverage_gamma_pct": float(100.0 * np.mean(np.abs(gamma - truth.gamma) <= z * gamma_se)),
            "power_gamma_pct": float(100.0 * np.mean(np.abs(gamma / gamma_se) > z)),
        })
    return MonteCarloRow(**row)


def _chunks(n_reps: int, workers: int) -> List[np.ndarray]:
    n_chunks = min(max(workers * 4, 1), n_reps)
    return [c for c in np.array_split(np.arange(n_reps), n_chunks) if len(c)]


# ============================================================================
# 公开接口
# ============================================================================

def run_study(
    layout: DesignLayout,
    truth: TrueModelParams,
    working_models: Sequence,
    n_reps: Optional[int] = None,
    seed: int = 0,
    alpha: Optional[float] = None,
    workers: Optional[int] = None,
    individual_level: Optional[bool] = None,
) -> MonteCarloReport:
    """第 r 次重复使用随机流 (seed, r); 结果与并行进程数无关"""
    settings = get_settings()
    cfg = settings.montecarlo
    n_reps = cfg.default_reps if n_reps is None else n_reps
    alpha = settings.power.alpha if alpha is None else alpha
    workers = cfg.max_workers if workers is None else workers
    individual_level = cfg.individual_level if individual_level is None else individual_level

    if n_reps < 1:
        raise ConfigurationError("n_reps", n_reps, "重复次数至少为 1")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError("alpha", alpha, "显著性水平须在 (0, 1) 内")
    if workers < 1:
        raise ConfigurationError("workers", workers, "进程数至少为 1")
    models = [ModelKind.parse(m) for m in working_models]
    if not models:
        raise ConfigurationError("working_models", working_models, "至少需要一个工作模型")
    for model in models:
        build_working_design(layout, model)

    logger.info(
        "蒙特卡洛研究开始",
        truth=truth.kind.value,
        models=[m.value for m in models],
        n_reps=n_reps,
        seed=seed,
        workers=workers,
    )

    batch_args = [
        (layout, truth, models, chunk, seed, individual_level, settings.numerics)
        for chunk in _chunks(n_reps, workers)
    ]
    if workers == 1:
        parts = [_run_chunk(args) for args in batch_args]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(settings.logging.level,)
        ) as executor:
            parts = list(executor.map(_run_chunk, batch_args))
    results = np.concatenate(parts, axis=0)

    failed = np.isnan(results[:, :, 0]).sum(axis=0)
    worst = float(failed.max()) / n_reps
    if worst > cfg.failure_threshold:
        logger.info("拟合失败比例超限", failed=failed.tolist(), threshold=cfg.failure_threshold)
        raise ConvergenceError(
            f"拟合失败比例 {worst:.2%} 超过阈值 {cfg.failure_threshold:.2%}",
        )

    z = float(stats.norm.ppf(1.0 - alpha / 2.0))
    truth_value = truth.tate(layout.J)
    params = derive_params(truth.tau_sq, truth.sigma_sq, layout.K, layout.J)

    rows = []
    for col, model in enumerate(models):
        expected = expected_estimate(layout, model, truth, params)
        rows.append(_summarize(results[:, col], truth, truth_value, model, z, expected))

    logger.info("蒙特卡洛研究完成", n_reps=n_reps, failed=int(failed.sum()))
    return MonteCarloReport(rows=rows, n_reps=n_reps, seed=seed, alpha=alpha)


def report_frame(report: MonteCarloReport) -> pd.DataFrame:
    """报告转为表格, 每个工作模型一行; 附加列排在标准列之后"""
    frame = pd.DataFrame([row.model_dump(mode="json") for row in report.rows])
    extra = [c for c in frame.columns if c not in REPORT_COLUMNS]
    return frame[REPORT_COLUMNS + extra]

