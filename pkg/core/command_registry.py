"""
命令注册表
子命令的元数据、参数校验、执行统计与 argparse 生成
"""

import argparse
import time
import typing
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Type

import pandas as pd
import pydantic
import structlog
from pydantic import BaseModel

from config.settings import get_settings
from core.error_handler import ConfigurationError, handle_errors


logger = structlog.get_logger(__name__)


class CommandCategory(str, Enum):
    """命令分类枚举"""
    DESIGN = "design"          # 设计与指示矩阵
    BIAS = "bias"              # 偏倚与期望
    POWER = "power"            # 方差、功效与样本量
    ANALYSIS = "analysis"      # 数据拟合与检验
    SIMULATION = "simulation"  # 数据生成与模拟研究


@dataclass
class CommandMetadata:
    """命令元数据"""
    name: str
    category: CommandCategory
    description: str
    version: str = "1.0.0"
    enabled: bool = True


@dataclass
class CommandOutput:
    """命令输出: 回显配置、结果摘要与结果表"""
    command: str
    config: Dict[str, Any]
    result: Dict[str, Any] = field(default_factory=dict)
    table: Optional[pd.DataFrame] = None
    warnings: List[str] = field(default_factory=list)


class BaseCommand(ABC):
    """命令基类"""

    args_model: Type[BaseModel] = BaseModel

    def __init__(self, metadata: CommandMetadata):
        self.metadata = metadata
        self._execution_stats = {
            "total_calls": 0,
            "successful_calls": 0,
            "failed_calls": 0,
            "total_execution_time": 0.0,
            "average_execution_time": 0.0
        }

    def get_input_schema(self) -> Dict[str, Any]:
        """获取命令输入模式"""
        return self.args_model.model_json_schema()

    @abstractmethod
    def execute(self, args: BaseModel) -> CommandOutput:
        """执行命令"""

    def validate_arguments(self, arguments: Dict[str, Any]) -> BaseModel:
        """验证输入参数"""
        try:
            return self.args_model.model_validate(arguments)
        except pydantic.ValidationError as e:
            first = e.errors()[0]
            field_name = ".".join(str(p) for p in first.get("loc", ())) or "arguments"
            raise ConfigurationError(
                field_name,
                first.get("input"),
                first.get("msg", "参数验证失败"),
                original_exception=e,
            ) from e

    def update_stats(self, execution_time: float, success: bool) -> None:
        """更新执行统计"""
        self._execution_stats["total_calls"] += 1
        self._execution_stats["total_execution_time"] += execution_time

        if success:
            self._execution_stats["successful_calls"] += 1
        else:
            self._execution_stats["failed_calls"] += 1

        self._execution_stats["average_execution_time"] = (
            self._execution_stats["total_execution_time"] /
            self._execution_stats["total_calls"]
        )

    def get_stats(self) -> Dict[str, Any]:
        """获取命令统计信息"""
        return {
            "metadata": self.metadata.__dict__,
            "stats": self._execution_stats.copy()
        }

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """按参数模型生成 argparse 选项"""
        add_model_arguments(parser, self.args_model)


class CommandRegistry:
    """命令注册表"""

    def __init__(self, settings: Optional[Any] = None):
        self.settings = settings or get_settings()
        self._commands: Dict[str, BaseCommand] = {}
        self._categories: Dict[CommandCategory, List[str]] = {
            category: [] for category in CommandCategory
        }

        logger.debug("命令注册表初始化")

    def register_command(self, command: BaseCommand) -> None:
        """注册命令"""
        name = command.metadata.name

        if name in self._commands:
            logger.warning("命令名称冲突，覆盖现有命令", command=name)

        self._commands[name] = command

        category = command.metadata.category
        if name not in self._categories[category]:
            self._categories[category].append(name)

        logger.debug("命令注册成功", command=name, category=category.value)

    def get_command(self, name: str) -> Optional[BaseCommand]:
        """获取命令"""
        return self._commands.get(name)

    def list_commands(self, category: Optional[CommandCategory] = None) -> List[str]:
        """列出命令名称"""
        if category:
            return self._categories[category].copy()
        return list(self._commands.keys())

    @handle_errors(reraise=True)
    def call_command(self, name: str, arguments: Dict[str, Any]) -> CommandOutput:
        """校验参数并调用命令"""
        command = self.get_command(name)
        if command is None or not command.metadata.enabled:
            raise ConfigurationError("command", name, "未知或已禁用的命令")

        args = command.validate_arguments(arguments)

        start_time = time.perf_counter()
        success = False
        try:
            output = command.execute(args)
            success = True
            return output
        finally:
            execution_time = time.perf_counter() - start_time
            command.update_stats(execution_time, success)
            logger.info(
                "命令执行结束",
                command=name,
                success=success,
                execution_time=round(execution_time, 6),
            )

    def get_registry_info(self) -> Dict[str, Any]:
        """获取注册表信息"""
        return {
            "total_commands": len(self._commands),
            "categories": {
                cat.value: len(names) for cat, names in self._categories.items()
            },
            "enabled_commands": len([c for c in self._commands.values() if c.metadata.enabled]),
        }


# ============================================================================
# argparse 生成
# ============================================================================

def _unwrap_optional(annotation: Any) -> Any:
    if typing.get_origin(annotation) is typing.Union:
        members = [a for a in typing.get_args(annotation) if a is not type(None)]
        if len(members) == 1:
            return members[0]
    return annotation


def add_model_arguments(parser: argparse.ArgumentParser, model: Type[BaseModel]) -> None:
    """把 pydantic 字段映射为 --field-name 选项 (含别名)

    未给出的选项不进入参数字典, 由模型默认值补齐; 必需字段的缺失也交给模型校验。
    列表字段接受逗号分隔的字符串。
    """
    for name, info in model.model_fields.items():
        annotation = _unwrap_optional(info.annotation)
        flags = [f"--{name.replace('_', '-')}"]
        if "_" in name:
            flags.append(f"--{name}")
        extra = info.json_schema_extra if isinstance(info.json_schema_extra, dict) else {}
        for alias in extra.get("aliases", []):
            flags.append(f"--{alias}")

        help_text = info.description or ""
        if info.is_required():
            help_text = f"{help_text} (必需)"

        kwargs: Dict[str, Any] = {"dest": name, "default": argparse.SUPPRESS, "help": help_text}
        if annotation is bool:
            kwargs["action"] = "store_true"
        elif annotation is int:
            kwargs["type"] = int
        elif annotation is float:
            kwargs["type"] = float
        else:
            kwargs["type"] = str
        parser.add_argument(*flags, **kwargs)


# ============================================================================
# 全局命令注册表
# ============================================================================

_global_registry: Optional[CommandRegistry] = None


def get_command_registry() -> CommandRegistry:
    """获取全局命令注册表"""
    global _global_registry
    if _global_registry is None:
        _global_registry = CommandRegistry()
    return _global_registry


def register_command_class(command_class: Type[BaseCommand]) -> Type[BaseCommand]:
    """注册命令类"""
    registry = get_command_registry()
    registry.register_command(command_class())
    return command_class
