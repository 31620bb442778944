"""
命令行数据模型
错误码、错误报告与各子命令参数定义
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator


# ============================================================================
# 错误码
# ============================================================================

class ErrorCodes:
    """机器可解析的错误码及对应退出码"""
    CONFIG = "E_CONFIG"
    RANK = "E_RANK"
    CONVERGENCE = "E_CONVERGENCE"
    IO = "E_IO"
    INTERNAL = "E_INTERNAL"

    EXIT_STATUS = {
        CONFIG: 2,
        RANK: 3,
        CONVERGENCE: 4,
        IO: 5,
        INTERNAL: 1,
    }

    @classmethod
    def exit_status(cls, code: str) -> int:
        return cls.EXIT_STATUS.get(code, 1)


class ErrorReport(BaseModel):
    """错误报告 (单行 JSON 输出)"""
    error: str = Field(description="错误码")
    message: str = Field(description="错误消息")
    details: Dict[str, Any] = Field(default_factory=dict, description="附加信息")


# ============================================================================
# 参数公共部分
# ============================================================================

def _split_floats(value: Any) -> Any:
    if isinstance(value, str):
        return [float(v) for v in value.split(",") if v.strip()]
    return value


def _split_ints(value: Any) -> Any:
    if isinstance(value, str):
        return [int(v) for v in value.split(",") if v.strip()]
    return value


class LayoutArgs(BaseModel):
    """布局来源: --standard, --layout 或 --design"""
    standard: Optional[str] = Field(default=None, description="标准设计 I,J,K,ell")
    layout: Optional[str] = Field(default=None, description="布局 JSON 文件 (优先)")
    design: Optional[str] = Field(
        default=None, description="堆叠的处理指示向量 Z (I*J 个 0/1, 逗号分隔)"
    )
    clusters: Optional[int] = Field(default=None, description="簇数", json_schema_extra={"aliases": ["I"]})
    periods: Optional[int] = Field(default=None, description="时期数", json_schema_extra={"aliases": ["J"]})
    cluster_size: Optional[int] = Field(
        default=None, description="簇-时期个体数", json_schema_extra={"aliases": ["K"]}
    )
    ell: Optional[int] = Field(default=None, description="预期效应阶数 ℓ")


class CorrelationArgs(BaseModel):
    """方差分量: (rho, sigma_sq) 或 (tau_sq, sigma_sq)"""
    rho: Optional[float] = Field(default=None, description="结局 ICC ρ")
    tau_sq: Optional[float] = Field(default=None, description="簇间方差 τ²")
    sigma_sq: float = Field(default=1.0, description="个体残差方差 σ²")


# ============================================================================
# 子命令参数
# ============================================================================

class DesignArgs(LayoutArgs):
    """design / constants 参数"""
    export: str = Field(default="layout", description="layout 或 indicators")


class BiasArgs(BaseModel):
    """bias 参数"""
    scenario: str = Field(
        description=(
            "hh-under-hhant / hh-under-eti / hh-under-etiant / eti-under-hhant / eti-under-etiant / "
            "hhant-under-eti / hhant-under-etiant / hh-under-hhant-order / grid"
        )
    )
    Q: Optional[int] = Field(default=None, description="序列数")
    phi: Optional[float] = Field(default=None, description="簇-时期均值相关 φ")
    ell: int = Field(default=1, description="预期效应阶数")
    q_values: Optional[List[int]] = Field(default=None, description="grid: Q 取值")
    phi_values: Optional[List[float]] = Field(default=None, description="grid: φ 取值")

    @field_validator("q_values", mode="before")
    @classmethod
    def split_q_values(cls, v):
        return _split_ints(v)

    @field_validator("phi_values", mode="before")
    @classmethod
    def split_phi_values(cls, v):
        return _split_floats(v)


class TruthArgs(BaseModel):
    """真实模型参数"""
    truth: str = Field(description="真实模型 HH / HH-ANT / ETI / ETI-ANT")
    effect: Optional[float] = Field(default=None, description="常数效应 δ", json_schema_extra={"aliases": ["trt"]})
    curve: Optional[List[float]] = Field(default=None, description="δ(1..J-1)")
    curve_name: Optional[str] = Field(default=None, description="命名效应曲线")
    gamma: float = Field(default=0.0, description="预期效应 γ")

    @field_validator("curve", mode="before")
    @classmethod
    def split_curve(cls, v):
        return _split_floats(v)


class ExpectArgs(LayoutArgs, CorrelationArgs, TruthArgs):
    """expect 参数"""
    model: str = Field(description="工作模型")
    analytic_only: bool = Field(default=False, description="仅接受闭式结果")


class VarianceArgs(LayoutArgs, CorrelationArgs):
    """variance 参数"""
    model: str = Field(description="工作模型 HH / HH-ANT / ETI / ETI-ANT")


class PowerArgs(VarianceArgs):
    """power 参数"""
    effect: float = Field(description="备择效应 δ* 或 Δ*", json_schema_extra={"aliases": ["trt"]})
    alpha: Optional[float] = Field(default=None, description="显著性水平")


class MdeArgs(VarianceArgs):
    """mde 参数"""
    target_power: Optional[float] = Field(default=None, description="目标功效")
    alpha: Optional[float] = Field(default=None, description="显著性水平")
    rho_values: Optional[List[float]] = Field(default=None, description="ICC 取值列表")

    @field_validator("rho_values", mode="before")
    @classmethod
    def split_rho_values(cls, v):
        return _split_floats(v)


class SampleSizeArgs(PowerArgs):
    """samplesize 参数"""
    vary: str = Field(default="I", description="搜索变量 I 或 K")
    target_power: Optional[float] = Field(default=None, description="目标功效")


class GridArgs(LayoutArgs):
    """grid 参数"""
    comparison: str = Field(default="hh-vs-hhant", description="hh-vs-hhant 或 eti-vs-etiant")
    sweep: str = Field(default="ratio", description="ratio: (ρ, γ/效应); effect: (ρ, 效应)")
    effect: Optional[float] = Field(default=None, description="sweep=ratio 时固定效应", json_schema_extra={"aliases": ["trt"]})
    ratio: Optional[float] = Field(default=None, description="sweep=effect 时固定 γ/效应")
    rho_values: List[float] = Field(description="ρ 网格")
    axis_values: List[float] = Field(description="第二维网格 (γ/效应 或 效应)")
    sigma_sq: float = Field(default=1.0, description="个体残差方差 σ²")
    alpha: Optional[float] = Field(default=None, description="显著性水平")

    @field_validator("rho_values", mode="before")
    @classmethod
    def split_rho_values(cls, v):
        return _split_floats(v)

    @field_validator("axis_values", mode="before")
    @classmethod
    def split_axis_values(cls, v):
        return _split_floats(v)


class InflationArgs(BaseModel):
    """inflation 参数"""
    clusters: int = Field(default=32, description="簇数", json_schema_extra={"aliases": ["I"]})
    cluster_size: int = Field(default=100, description="簇-时期个体数", json_schema_extra={"aliases": ["K"]})
    j_values: List[int] = Field(description="时期数取值")
    rho_values: List[float] = Field(description="ρ 取值")
    sigma_sq: float = Field(default=1.0, description="个体残差方差 σ²")

    @field_validator("j_values", mode="before")
    @classmethod
    def split_j_values(cls, v):
        return _split_ints(v)

    @field_validator("rho_values", mode="before")
    @classmethod
    def split_rho_values(cls, v):
        return _split_floats(v)


class DatasetArgs(LayoutArgs, TruthArgs):
    """dataset 参数"""
    tau_sq: float = Field(default=0.0, description="簇间方差 τ²")
    sigma_sq: float = Field(default=1.0, description="个体残差方差 σ²")
    mu: float = Field(default=0.0, description="总截距 μ")
    beta: Optional[List[float]] = Field(default=None, description="时期效应 β_1..β_J")
    seed: int = Field(description="随机种子 (必需)")

    @field_validator("beta", mode="before")
    @classmethod
    def split_beta(cls, v):
        return _split_floats(v)


class SimulateArgs(BaseModel):
    """simulate 参数"""
    preset: str = Field(description="预设情景 I-null / I / II / III / IV")
    reps: Optional[int] = Field(default=None, description="重复次数")
    seed: int = Field(description="随机种子 (必需)")
    alpha: Optional[float] = Field(default=None, description="显著性水平")
    workers: Optional[int] = Field(default=None, description="并行进程数")


class FitArgs(LayoutArgs):
    """fit / lrt 参数"""
    data: str = Field(description="长格式数据集 CSV")
    model: Optional[str] = Field(default=None, description="工作模型")
    method: str = Field(default="reml", description="reml / ml / gls")
    tau_sq: Optional[float] = Field(default=None, description="method=gls 时的 τ²")
    sigma_sq: Optional[float] = Field(default=None, description="method=gls 时的 σ²")
    with_anticipation: bool = Field(default=False, description="lrt: 比较 HH-ANT 与 ETI-ANT")


class PresetsArgs(BaseModel):
    """presets 参数"""
    name: Optional[str] = Field(default=None, description="仅输出指定情景")
