"""
功效命令
解析方差、功效、最小可检测效应、样本量、功效比网格与方差膨胀
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
from modules.correlation.exchangeable import params_from_icc
from modules.power.grids import power_ratio_grid, ratio_crossing, variance_inflation
from modules.power.planning import detectable_effect, power, sample_size_search
from modules.power.variance import variance
from schemas.cli_models import GridArgs, InflationArgs, MdeArgs, PowerArgs, SampleSizeArgs, VarianceArgs
from tools.common import echo_config, resolve_layout, resolve_params

logger = structlog.get_logger(__name__)


def _layout_config(args, layout, params=None) -> dict:
    config = {**echo_config(args), "resolved_layout": layout.to_document()}
    if params is not None:
        config["tau_sq"] = params.tau_sq
        config["rho"] = params.rho
    return config


class VarianceCommand(BaseCommand):
    """处理效应估计量的解析方差"""

    args_model = VarianceArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="variance",
            category=CommandCategory.POWER,
            description="HH / HH-ANT / ETI / ETI-ANT 处理效应估计量的模型方差与标准误",
        )
        super().__init__(metadata)

    def execute(self, args: VarianceArgs) -> CommandOutput:
        layout = resolve_layout(args)
        params = resolve_params(args, layout)
        result = variance(args.model, layout, params)
        return CommandOutput(
            command=self.metadata.name,
            config=_layout_config(args, layout, params),
            result=result.model_dump(mode="json"),
        )


class PowerCommand(BaseCommand):
    """给定备择效应的功效"""

    args_model = PowerArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="power",
            category=CommandCategory.POWER,
            description="双侧 Wald 检验在备择效应下的功效 (参数名 model, trt, I, J, K, design, rho, sigma_sq, alpha)",
        )
        super().__init__(metadata)

    def execute(self, args: PowerArgs) -> CommandOutput:
        layout = resolve_layout(args)
        params = resolve_params(args, layout)
        var = variance(args.model, layout, params)
        achieved = power(args.effect, var.variance, args.alpha)
        logger.info("功效计算", model=var.model.value, effect=args.effect, power=achieved)
        return CommandOutput(
            command=self.metadata.name,
            config=_layout_config(args, layout, params),
            result={
                "model": var.model.value,
                "effect": args.effect,
                "power": achieved,
                "variance": var.variance,
                "se": var.se,
                "method": var.method,
            },
        )


class MdeCommand(BaseCommand):
    """最小可检测效应"""

    args_model = MdeArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="mde",
            category=CommandCategory.POWER,
            description="达到目标功效的最小效应; --rho-values 给出时逐个 ICC 列表",
        )
        super().__init__(metadata)

    def execute(self, args: MdeArgs) -> CommandOutput:
        layout = resolve_layout(args)
        if args.rho_values:
            rows = []
            for rho in args.rho_values:
                params = params_from_icc(rho, args.sigma_sq, layout.K, layout.J)
                var = variance(args.model, layout, params)
                rows.append({
                    "rho": rho,
                    "mde": detectable_effect(args.model, layout, params, args.target_power, args.alpha),
                    "se": var.se,
                })
            return CommandOutput(
                command=self.metadata.name,
                config=_layout_config(args, layout),
                result={"rows": len(rows)},
                table=pd.DataFrame(rows),
            )

        params = resolve_params(args, layout)
        var = variance(args.model, layout, params)
        return CommandOutput(
            command=self.metadata.name,
            config=_layout_config(args, layout, params),
            result={
                "model": var.model.value,
                "mde": detectable_effect(args.model, layout, params, args.target_power, args.alpha),
                "se": var.se,
            },
        )


class SampleSizeCommand(BaseCommand):
    """样本量搜索"""

    args_model = SampleSizeArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="samplesize",
            category=CommandCategory.POWER,
            description="按模板比例放大簇数 (vary=I) 或增大簇-时期规模 (vary=K) 直到达到目标功效",
        )
        super().__init__(metadata)

    def execute(self, args: SampleSizeArgs) -> CommandOutput:
        layout = resolve_layout(args)
        params = resolve_params(args, layout)
        result = sample_size_search(
            args.model, layout, params, args.effect, args.target_power, args.vary, args.alpha
        )
        return CommandOutput(
            command=self.metadata.name,
            config=_layout_config(args, layout, params),
            result=result.model_dump(mode="json"),
        )


class GridCommand(BaseCommand):
    """功效比网格"""

    args_model = GridArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="grid",
            category=CommandCategory.POWER,
            description="含预期项模型与欠设定模型的功效比网格, 列为 param1,param2,power_A,power_B,ratio,valid",
        )
        super().__init__(metadata)

    def execute(self, args: GridArgs) -> CommandOutput:
        layout = resolve_layout(args)
        table = power_ratio_grid(
            args.comparison,
            layout,
            args.rho_values,
            args.axis_values,
            sweep=args.sweep,
            effect=args.effect,
            ratio=args.ratio,
            sigma_sq=args.sigma_sq,
            alpha=args.alpha,
        )
        result = {"cells": len(table)}
        if args.sweep == "ratio":
            result["crossings"] = {str(rho): ratio_crossing(table, rho) for rho in args.rho_values}
        return CommandOutput(
            command=self.metadata.name,
            config=_layout_config(args, layout),
            result=result,
            table=table,
        )


class InflationCommand(BaseCommand):
    """方差膨胀表"""

    args_model = InflationArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="inflation",
            category=CommandCategory.POWER,
            description="标准设计上 HH-ANT/HH 与 ETI-ANT/ETI 的方差比",
        )
        super().__init__(metadata)

    def execute(self, args: InflationArgs) -> CommandOutput:
        table = variance_inflation(args.clusters, args.cluster_size, args.j_values, args.rho_values, args.sigma_sq)
        return CommandOutput(
            command=self.metadata.name,
            config=echo_config(args),
            result={"rows": len(table)},
            table=table,
        )


def register_power_commands():
    """注册功效类命令"""
    commands = [
        VarianceCommand,
        PowerCommand,
        MdeCommand,
        SampleSizeCommand,
        GridCommand,
        InflationCommand,
    ]
    for command_class in commands:
        register_command_class(command_class)


register_power_commands()
