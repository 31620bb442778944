"""
分析命令
长格式数据集的工作模型拟合与暴露时间异质性检验
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
from modules.correlation.exchangeable import derive_params
from modules.estimation.data import ClusterPeriodMeans, layout_from_frame, read_dataset
from modules.estimation.gls import gls_fit
from modules.estimation.likelihood import lrt_exposure_heterogeneity, ml_fit, reml_fit
from schemas.cli_models import FitArgs
from schemas.design_models import DesignLayout
from tools.common import echo_config, resolve_layout

logger = structlog.get_logger(__name__)


def _dataset_layout(args: FitArgs, frame: pd.DataFrame) -> DesignLayout:
    """显式给出的布局优先, 否则由数据的 Z 列推断"""
    given = (args.standard, args.layout, args.design, args.clusters, args.periods, args.cluster_size)
    if any(v is not None for v in given):
        return resolve_layout(args)
    return layout_from_frame(frame, ell=args.ell or 1)


class FitCommand(BaseCommand):
    """工作模型拟合"""

    args_model = FitArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="fit",
            category=CommandCategory.ANALYSIS,
            description="用 REML、ML 或已知方差分量的 GLS 拟合工作模型",
        )
        super().__init__(metadata)

    def execute(self, args: FitArgs) -> CommandOutput:
        if args.model is None:
            raise ConfigurationError("model", None, "fit 需要 --model")
        frame = read_dataset(args.data)
        layout = _dataset_layout(args, frame)
        means = ClusterPeriodMeans.from_frame(frame, layout)

        if args.method == "reml":
            fit = reml_fit(layout, args.model, means)
        elif args.method == "ml":
            fit = ml_fit(layout, args.model, means)
        elif args.method == "gls":
            if args.tau_sq is None or args.sigma_sq is None:
                raise ConfigurationError("tau_sq", args.tau_sq, "method=gls 需要 --tau-sq 与 --sigma-sq")
            params = derive_params(args.tau_sq, args.sigma_sq, layout.K, layout.J)
            fit = gls_fit(layout, args.model, params, means)
        else:
            raise ConfigurationError("method", args.method, "方法须为 reml, ml 或 gls")

        table = pd.DataFrame({
            "term": fit.labels,
            "estimate": [fit.coefficients[k] for k in fit.labels],
            "se": [fit.std_errors[k] for k in fit.labels],
        })
        logger.info("模型拟合", model=fit.model.value, method=fit.method, tau_sq=fit.tau_sq)
        return CommandOutput(
            command=self.metadata.name,
            config={**echo_config(args), "resolved_layout": layout.to_document()},
            result={
                "model": fit.model.value,
                "method": fit.method,
                "effect": fit.effect(),
                "effect_se": fit.effect_se(),
                "tau_sq": fit.tau_sq,
                "sigma_sq": fit.sigma_sq,
                "loglik_ml": fit.loglik_ml,
                "loglik_reml": fit.loglik_reml,
                "boundary": fit.boundary,
            },
            table=table,
        )


class LrtCommand(BaseCommand):
    """暴露时间异质性似然比检验"""

    args_model = FitArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="lrt",
            category=CommandCategory.ANALYSIS,
            description="HH 对 ETI (或 HH-ANT 对 ETI-ANT) 的 ML 似然比检验, 自由度 J-2",
        )
        super().__init__(metadata)

    def execute(self, args: FitArgs) -> CommandOutput:
        frame = read_dataset(args.data)
        layout = _dataset_layout(args, frame)
        result = lrt_exposure_heterogeneity(layout, frame, with_anticipation=args.with_anticipation)
        return CommandOutput(
            command=self.metadata.name,
            config={**echo_config(args), "resolved_layout": layout.to_document()},
            result=result._asdict(),
        )


def register_analysis_commands():
    """注册分析类命令"""
    for command_class in (FitCommand, LrtCommand):
        register_command_class(command_class)


register_analysis_commands()
