"""
设计命令
布局导出、指示矩阵与设计常数
"""

import pandas as pd
import structlog

from core.command_registry import (
    BaseCommand,
    CommandCategory,
    CommandMetadata,
    CommandOutput,
    register_command_class,
)
from core.error_handler import ConfigurationError
from modules.design.constants import design_constants
from modules.design.indicators import indicator_frame, indicators
from schemas.cli_models import DesignArgs, LayoutArgs
from tools.common import echo_config, resolve_layout

logger = structlog.get_logger(__name__)


class DesignCommand(BaseCommand):
    """布局或指示矩阵导出"""

    args_model = DesignArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="design",
            category=CommandCategory.DESIGN,
            description="解析布局并导出序列表或 cluster,period,Z,A,s 指示表",
        )
        super().__init__(metadata)

    def execute(self, args: DesignArgs) -> CommandOutput:
        layout = resolve_layout(args)
        config = {**echo_config(args), "resolved_layout": layout.to_document()}

        if args.export == "indicators":
            table = indicator_frame(indicators(layout))
        elif args.export == "layout":
            table = pd.DataFrame([s.model_dump() for s in layout.sequences])
        else:
            raise ConfigurationError("export", args.export, "须为 layout 或 indicators")

        logger.info("设计导出", export=args.export, I=layout.I, J=layout.J)
        return CommandOutput(
            command=self.metadata.name,
            config=config,
            result={"I": layout.I, "J": layout.J, "K": layout.K, "ell": layout.ell, "standard": layout.is_standard},
            table=table,
        )


class ConstantsCommand(BaseCommand):
    """设计常数"""

    args_model = LayoutArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="constants",
            category=CommandCategory.DESIGN,
            description="计算 U, W1..W5, U3..U5 等设计常数",
        )
        super().__init__(metadata)

    def execute(self, args: LayoutArgs) -> CommandOutput:
        layout = resolve_layout(args)
        constants = design_constants(indicators(layout))
        scalars = constants.scalars()
        return CommandOutput(
            command=self.metadata.name,
            config={**echo_config(args), "resolved_layout": layout.to_document()},
            result={k: int(v) for k, v in scalars.items()},
        )


def register_design_commands():
    """注册设计类命令"""
    for command_class in (DesignCommand, ConstantsCommand):
        register_command_class(command_class)


register_design_commands()
