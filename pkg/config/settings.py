"""
阶梯楔形试验分析引擎配置管理
支持环境变量、.env 文件和 YAML/JSON 配置文件
"""

import json
from pathlib import Path
from typing import Optional, Union

import yaml
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class NumericsSettings(BaseSettings):
    """数值计算配置"""

    model_config = SettingsConfigDict(
        env_prefix="SWCRT_NUMERICS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    rank_tolerance: float = Field(
        default=1e-10,
        description="秩检验的相对主元阈值"
    )
    reml_tolerance: float = Field(
        default=1e-9,
        description="方差分量优化在 ρ 上的收敛容差"
    )
    rho_upper: float = Field(
        default=0.999,
        description="ICC 上界"
    )
    reml_max_iter: int = Field(
        default=500,
        description="方差分量优化最大函数求值次数"
    )

    @field_validator("rho_upper")
    @classmethod
    def validate_rho_upper(cls, v):
        """ICC 上界须在 (0, 0.999] 内"""
        if not 0.0 < v <= 0.999:
            raise ValueError("rho_upper 必须在 (0, 0.999] 内")
        return v


class MonteCarloSettings(BaseSettings):
    """蒙特卡洛模拟配置"""

    model_config = SettingsConfigDict(env_prefix="SWCRT_MC_", extra="ignore")

    max_workers: int = Field(
        default=1,
        description="并行进程数 (1 为串行)"
    )
    failure_threshold: float = Field(
        default=0.01,
        description="允许的拟合失败比例, 超出则中止研究"
    )
    default_reps: int = Field(
        default=2000,
        description="默认重复次数"
    )
    individual_level: bool = Field(
        default=False,
        description="逐个体生成数据 (否则生成充分统计量)"
    )


class PowerSettings(BaseSettings):
    """功效与样本量配置"""

    model_config = SettingsConfigDict(env_prefix="SWCRT_POWER_", extra="ignore")

    alpha: float = Field(
        default=0.05,
        description="默认显著性水平"
    )
    target_power: float = Field(
        default=0.8,
        description="默认目标功效"
    )
    max_multiplier: int = Field(
        default=2000,
        description="簇数搜索上限 (序列数的倍数)"
    )
    max_cluster_period_size: int = Field(
        default=100000,
        description="簇-时期个体数搜索上限"
    )


class OutputSettings(BaseSettings):
    """输出配置"""

    model_config = SettingsConfigDict(env_prefix="SWCRT_OUTPUT_", extra="ignore")

    precision: str = Field(
        default="6",
        description="有效数字位数, 或 full"
    )
    format: str = Field(
        default="csv",
        description="输出格式 (csv, json)"
    )

    @field_validator("precision")
    @classmethod
    def validate_precision(cls, v):
        if v != "full" and not str(v).isdigit():
            raise ValueError("precision 必须为正整数或 full")
        return str(v)

    @field_validator("format")
    @classmethod
    def validate_format(cls, v):
        if v not in ("csv", "json"):
            raise ValueError("format 必须为 csv 或 json")
        return v


class LoggingSettings(BaseSettings):
    """structlog 输出配置"""

    model_config = SettingsConfigDict(env_prefix="SWCRT_LOG_", extra="ignore")

    level: str = Field(
        default="WARNING",
        description="日志级别"
    )
    format: str = Field(
        default="structured",
        description="日志格式 (structured, json, simple)"
    )
    file_path: Optional[Path] = Field(
        default=None,
        description="日志文件路径"
    )


class Settings(BaseSettings):
    """分组配置的聚合根"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_nested_delimiter="__",
        extra="ignore"
    )

    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    montecarlo: MonteCarloSettings = Field(default_factory=MonteCarloSettings)
    power: PowerSettings = Field(default_factory=PowerSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)

    @classmethod
    def load_from_file(cls, config_file: Union[str, Path]) -> "Settings":
        """从 YAML/JSON 文件加载, 文件中未给出的字段仍取环境变量与默认值"""
        path = Path(config_file)
        if not path.is_file():
            raise FileNotFoundError(f"配置文件不存在: {path}")
        text = path.read_text(encoding="utf-8")
        kind = _file_kind(path)
        data = (yaml.safe_load(text) if kind == "yaml" else json.loads(text)) or {}
        return cls(**data)

    def save_to_file(self, config_file: Union[str, Path]) -> None:
        path = Path(config_file)
        data = self.model_dump(mode="json")
        if _file_kind(path) == "yaml":
            text = yaml.safe_dump(data, default_flow_style=False, allow_unicode=True)
        else:
            text = json.dumps(data, indent=2, ensure_ascii=False)
        path.write_text(text, encoding="utf-8")


def _file_kind(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix in (".yaml", ".yml"):
        return "yaml"
    if suffix == ".json":
        return "json"
    raise ValueError(f"不支持的配置文件格式: {suffix or '(无后缀)'}")


_current = Settings()


def get_settings() -> Settings:
    return _current


def reload_settings(config_file: Optional[Union[str, Path]] = None) -> Settings:
    """重建全局配置; 给出文件时从文件加载"""
    global _current
    _current = Settings.load_from_file(config_file) if config_file else Settings()
    return _current
