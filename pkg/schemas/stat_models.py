"""
统计结果数据模型
相关参数、拟合结果、方差、功效与模拟报告
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from schemas.design_models import ModelKind, TrueModelParams


# ============================================================================
# 相关结构参数
# ============================================================================

class CorrelationParams(BaseModel):
    """可交换随机截距结构的参数及派生量"""
    model_config = ConfigDict(frozen=True)

    tau_sq: float = Field(description="簇间方差 τ²")
    sigma_sq: float = Field(description="个体残差方差 σ²")
    K: int = Field(description="簇-时期个体数")
    J: int = Field(description="时期数")
    rho: float = Field(description="组内相关系数 ρ = τ²/(τ²+σ²)")
    phi: float = Field(description="簇-时期均值相关 φ = τ²/(τ²+σ²/K)")
    sigma_t_sq: float = Field(description="总方差 σ_t² = τ²+σ²")
    eta_sq: float = Field(description="η² = τ²/φ = τ²+σ²/K")
    lambda1: float = Field(description="特征值 λ1 = 1-ρ")
    lambda2: float = Field(description="特征值 λ2 = 1+(JK-1)ρ")
    x: float = Field(description="V⁻¹ = xI - y11' 中的 x")
    y: float = Field(description="V⁻¹ = xI - y11' 中的 y")


# ============================================================================
# 拟合与方差
# ============================================================================

class FitResult(BaseModel):
    """工作模型拟合结果"""

    model: ModelKind = Field(description="工作模型")
    labels: List[str] = Field(description="固定效应名称 (按设计矩阵列序)")
    coefficients: Dict[str, float] = Field(description="固定效应估计")
    std_errors: Dict[str, float] = Field(description="模型标准误")
    covariance: List[List[float]] = Field(description="固定效应方差-协方差矩阵")
    tau_sq: float = Field(description="τ² 估计或给定值")
    sigma_sq: float = Field(description="σ² 估计或给定值")
    loglik_ml: Optional[float] = Field(default=None, description="ML 对数似然")
    loglik_reml: Optional[float] = Field(default=None, description="REML 对数似然")
    tate: Optional[float] = Field(default=None, description="ETI 类模型的 TATE 估计 Δ̂")
    tate_se: Optional[float] = Field(default=None, description="Δ̂ 的标准误")
    method: str = Field(default="gls", description="gls / reml / ml")
    boundary: Optional[str] = Field(default=None, description="边界解标记")
    iterations: Optional[int] = Field(default=None, description="优化器函数求值次数")

    @property
    def tau(self) -> float:
        return self.tau_sq ** 0.5

    def effect(self) -> float:
        """主要处理效应: δ̂ 或 Δ̂"""
        if self.model.exposure_time:
            return float(self.tate)
        return self.coefficients["delta"]

    def effect_se(self) -> float:
        if self.model.exposure_time:
            return float(self.tate_se)
        return self.std_errors["delta"]

    def gamma(self) -> Optional[float]:
        return self.coefficients.get("gamma")

    def gamma_se(self) -> Optional[float]:
        return self.std_errors.get("gamma")


class VarianceResult(BaseModel):
    """处理效应估计量的解析方差"""

    model: ModelKind = Field(description="工作模型")
    variance: float = Field(description="方差")
    se: float = Field(description="标准误")
    method: str = Field(description="closed_form / information / standard")
    I: int = Field(description="簇数")
    J: int = Field(description="时期数")
    K: int = Field(description="簇-时期个体数")
    ell: int = Field(description="预期效应阶数")
    rho: float = Field(description="ICC")
    sigma_t_sq: float = Field(description="总方差")
    constants: Dict[str, float] = Field(default_factory=dict, description="标量设计常数")


# ============================================================================
# 功效与样本量
# ============================================================================

class PowerSpec(BaseModel):
    """备择假设下的检验设定"""

    effect: float = Field(description="备择效应 δ* 或 Δ*")
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0, description="显著性水平")
    target_power: float = Field(default=0.8, gt=0.0, lt=1.0, description="目标功效")


class SampleSizeResult(BaseModel):
    """样本量搜索结果"""

    model: ModelKind = Field(description="工作模型")
    vary: str = Field(description="搜索变量 I 或 K")
    value: int = Field(description="达到目标功效的最小取值")
    I: int = Field(description="对应簇数")
    K: int = Field(description="对应簇-时期个体数")
    achieved_power: float = Field(description="达到的功效")
    detectable_effect: float = Field(description="该规模下的最小可检测效应")
    se: float = Field(description="该规模下的标准误")


# ============================================================================
# 偏倚预测
# ============================================================================

class BiasPrediction(BaseModel):
    """工作模型估计量期望的预测"""

    working: ModelKind = Field(description="工作模型")
    truth: ModelKind = Field(description="真实模型")
    Q: int = Field(description="序列数")
    phi: float = Field(description="簇-时期均值相关")
    ell: int = Field(description="预期效应阶数")
    expectations: Dict[str, float] = Field(description="系数期望 (delta/tate/gamma/delta_s)")
    provenance: str = Field(description="identity / analytic / oracle")
    formula: Optional[str] = Field(default=None, description="所用闭式结果的简称")


# ============================================================================
# 蒙特卡洛
# ============================================================================

class MonteCarloRow(BaseModel):
    """单个工作模型的重复模拟汇总"""

    true_model: ModelKind
    working_model: ModelKind
    effect_true: float = Field(description="真实 δ 或 Δ")
    mean_est: float
    mean_gamma: Optional[float] = None
    mean_tau: float
    sd_est: float
    mean_se: float
    coverage_pct: float
    power_pct: float
    sd_gamma: Optional[float] = None
    se_gamma: Optional[float] = None
    coverage_gamma_pct: Optional[float] = None
    power_gamma_pct: Optional[float] = None
    expected_est: Optional[float] = Field(default=None, description="精确期望 (oracle)")
    expected_gamma: Optional[float] = None
    n_ok: int = Field(description="成功拟合次数")
    n_failed: int = Field(default=0, description="失败拟合次数")


class MonteCarloReport(BaseModel):
    """模拟研究报告"""

    rows: List[MonteCarloRow]
    n_reps: int
    seed: int
    alpha: float


class ScenarioPreset(BaseModel):
    """预设模拟情景"""
    model_config = ConfigDict(frozen=True)

    name: str = Field(description="情景名")
    description: str = Field(description="说明")
    I: int
    J: int
    K: int
    ell: int = 1
    truth: TrueModelParams
    working_models: List[ModelKind]
    n_reps: int = 2000
