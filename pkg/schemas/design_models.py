"""
阶梯楔形试验设计数据模型
布局、序列与真实模型参数定义
"""

from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ============================================================================
# 模型类型
# ============================================================================

class ModelKind(str, Enum):
    """处理效应结构 (工作模型或真实模型)"""
    HH = "HH"
    HH_ANT = "HH-ANT"
    ETI = "ETI"
    ETI_ANT = "ETI-ANT"

    @property
    def has_anticipation(self) -> bool:
        return self in (ModelKind.HH_ANT, ModelKind.ETI_ANT)

    @property
    def exposure_time(self) -> bool:
        return self in (ModelKind.ETI, ModelKind.ETI_ANT)

    @classmethod
    def parse(cls, value: "str | ModelKind") -> "ModelKind":
        """宽松解析: 'eti-ant', 'ETI_ANT', 'hhant' 均可"""
        if isinstance(value, ModelKind):
            return value
        key = str(value).strip().upper().replace("_", "-")
        aliases = {"HHANT": "HH-ANT", "ETIANT": "ETI-ANT"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"未知模型类型: {value}")


# 工作模型与真实模型共用同一枚举
WorkingModel = ModelKind


# ============================================================================
# 设计布局
# ============================================================================

class SequenceSpec(BaseModel):
    """处理序列: 采纳时期与簇数"""
    model_config = ConfigDict(frozen=True)

    adopt: int = Field(description="处理采纳时期 j* (1起始)")
    count: int = Field(description="该序列簇数 I_q")


class DesignLayout(BaseModel):
    """阶梯楔形试验布局 (随机化之后的设计)"""
    model_config = ConfigDict(frozen=True)

    J: int = Field(description="时期数")
    K: int = Field(description="每个簇-时期的个体数")
    ell: int = Field(default=1, description="预期效应阶数 ℓ")
    sequences: List[SequenceSpec] = Field(description="按采纳时期排序的序列")

    @property
    def I(self) -> int:  # noqa: E743
        return sum(seq.count for seq in self.sequences)

    @property
    def n_sequences(self) -> int:
        return len(self.sequences)

    @property
    def is_standard(self) -> bool:
        """完整标准设计: Q = J-1 个等规模序列, 第q序列在 q+1 期采纳"""
        if self.n_sequences != self.J - 1:
            return False
        counts = {seq.count for seq in self.sequences}
        adopts = [seq.adopt for seq in self.sequences]
        return len(counts) == 1 and adopts == list(range(2, self.J + 1))

    @property
    def adoption_times(self) -> np.ndarray:
        """每个簇的采纳时期 (簇按序列排序)"""
        return np.repeat(
            [seq.adopt for seq in self.sequences],
            [seq.count for seq in self.sequences],
        )

    @property
    def sequence_of_cluster(self) -> np.ndarray:
        return np.repeat(
            np.arange(self.n_sequences),
            [seq.count for seq in self.sequences],
        )

    def with_ell(self, ell: int) -> "DesignLayout":
        return self.model_copy(update={"ell": ell})

    def with_counts(self, counts: List[int]) -> "DesignLayout":
        sequences = [
            SequenceSpec(adopt=seq.adopt, count=count)
            for seq, count in zip(self.sequences, counts)
        ]
        return DesignLayout(J=self.J, K=self.K, ell=self.ell, sequences=sequences)

    def with_K(self, K: int) -> "DesignLayout":  # noqa: N802
        return self.model_copy(update={"K": K})

    def to_document(self) -> Dict[str, object]:
        """序列化为 {I, J, K, ell, sequences: [{adopt, count}]}"""
        return {
            "I": self.I,
            "J": self.J,
            "K": self.K,
            "ell": self.ell,
            "sequences": [{"adopt": s.adopt, "count": s.count} for s in self.sequences],
        }


# ============================================================================
# 真实数据生成模型
# ============================================================================

class TrueModelParams(BaseModel):
    """真实模型参数: 均值结构与方差分量"""
    model_config = ConfigDict(frozen=True)

    kind: ModelKind = Field(description="真实处理效应结构")
    mu: float = Field(default=0.0, description="总截距 μ")
    beta: Optional[List[float]] = Field(
        default=None, description="时期效应 β_1..β_J (β_1 = 0); 缺省为全零"
    )
    effect: Optional[float] = Field(default=None, description="常数处理效应 δ (HH/HH-ANT)")
    effect_curve: Optional[List[float]] = Field(
        default=None, description="暴露时间效应 δ(1..J-1) (ETI/ETI-ANT)"
    )
    gamma: float = Field(default=0.0, description="预期效应 γ")
    tau_sq: float = Field(default=0.0, description="簇间方差 τ²")
    sigma_sq: float = Field(default=1.0, description="个体残差方差 σ²")
    ell: Optional[int] = Field(default=None, description="预期窗口阶数; 缺省沿用布局")

    @field_validator("kind", mode="before")
    @classmethod
    def _parse_kind(cls, v):
        return ModelKind.parse(v)

    @field_validator("beta")
    @classmethod
    def _beta_anchor(cls, v):
        if v is not None and v and abs(v[0]) > 0.0:
            raise ValueError("β_1 必须为 0 (基准时期)")
        return v

    @model_validator(mode="after")
    def _check_structure(self) -> "TrueModelParams":
        if self.kind.exposure_time:
            if self.effect_curve is None:
                raise ValueError("ETI 类真实模型需要 effect_curve")
        elif self.effect is None:
            raise ValueError("HH 类真实模型需要 effect")
        if not self.kind.has_anticipation and self.gamma != 0.0:
            raise ValueError("无预期效应的真实模型要求 gamma = 0")
        if self.tau_sq < 0.0 or self.sigma_sq < 0.0:
            raise ValueError("方差分量不能为负")
        return self

    def point_effects(self, J: int) -> np.ndarray:  # noqa: N803
        """δ(s), s = 1..J-1"""
        if self.kind.exposure_time:
            curve = np.asarray(self.effect_curve, dtype=float)
            if curve.shape != (J - 1,):
                raise ValueError(f"effect_curve 长度应为 {J - 1}, 实际 {curve.size}")
            return curve
        return np.full(J - 1, float(self.effect))

    def tate(self, J: int) -> float:  # noqa: N803
        """时间平均处理效应 Δ"""
        return float(self.point_effects(J).mean())

    def period_effects(self, J: int) -> np.ndarray:  # noqa: N803
        if self.beta is None:
            return np.zeros(J)
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (J,):
            raise ValueError(f"beta 长度应为 {J}, 实际 {beta.size}")
        return beta
