"""
相关结构模块
可交换随机截距模型的参数与协方差代数
"""

from modules.correlation.exchangeable import (
    MeanCovariance,
    derive_params,
    individual_covariance,
    individual_eigenvalues,
    individual_inverse_coefficients,
    mean_covariance,
    params_from_icc,
    phi_from_rho,
)

__all__ = [
    "MeanCovariance",
    "derive_params",
    "individual_covariance",
    "individual_eigenvalues",
    "individual_inverse_coefficients",
    "mean_covariance",
    "params_from_icc",
    "phi_from_rho",
]
