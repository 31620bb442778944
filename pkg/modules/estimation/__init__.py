"""
估计模块
工作模型的 GLS/REML 拟合、闭式权重与期望预言机
"""

from modules.estimation.data import DATASET_COLUMNS, ClusterPeriodMeans, layout_from_frame, read_dataset
from modules.estimation.gls import (
    estimated_effect_curve,
    expected_estimate,
    expected_means,
    gls_fit,
    sequence_hat_rows,
)
from modules.estimation.likelihood import (
    LrtResult,
    fit_variance_components,
    lrt_exposure_heterogeneity,
    ml_fit,
    profile_loglik,
    reml_fit,
)
from modules.estimation.models import WorkingDesign, build_working_design, fixed_effect_labels
from modules.estimation.weights import apply_weights, eti_weights_J3, hh_weights, hhant_weights

__all__ = [
    "DATASET_COLUMNS",
    "ClusterPeriodMeans",
    "LrtResult",
    "WorkingDesign",
    "apply_weights",
    "build_working_design",
    "estimated_effect_curve",
    "eti_weights_J3",
    "expected_estimate",
    "expected_means",
    "fit_variance_components",
    "fixed_effect_labels",
    "gls_fit",
    "hh_weights",
    "hhant_weights",
    "layout_from_frame",
    "lrt_exposure_heterogeneity",
    "ml_fit",
    "profile_loglik",
    "read_dataset",
    "reml_fit",
]
