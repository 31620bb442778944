"""
偏倚命令
闭式权重、权重网格与误设模型估计量的期望
"""

import numpy as np
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
from modules.bias.formulas import scenario_weights
from modules.bias.grids import weight_grid
from modules.bias.predict import predict_expectation
from modules.estimation.gls import estimated_effect_curve, expected_estimate
from schemas.cli_models import BiasArgs, ExpectArgs
from schemas.design_models import ModelKind
from tools.common import echo_config, resolve_layout, resolve_params, resolve_truth

logger = structlog.get_logger(__name__)


class BiasCommand(BaseCommand):
    """误设情景的闭式权重"""

    args_model = BiasArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="bias",
            category=CommandCategory.BIAS,
            description="按情景计算偏倚权重 ω, π, ψ, 或在 (Q, φ) 网格上导出全部权重",
        )
        super().__init__(metadata)

    def execute(self, args: BiasArgs) -> CommandOutput:
        if args.scenario == "grid":
            if not args.q_values or not args.phi_values:
                raise ConfigurationError("q_values", args.q_values, "grid 需要 --q-values 与 --phi-values")
            table = weight_grid(args.q_values, args.phi_values)
            return CommandOutput(
                command=self.metadata.name,
                config=echo_config(args),
                result={"rows": len(table)},
                table=table,
            )

        if args.phi is None:
            raise ConfigurationError("phi", None, "需要 --phi")
        weights = scenario_weights(args.scenario, args.Q, args.phi, args.ell)

        rows = []
        scalars = {}
        for name, value in weights.weights.items():
            if np.ndim(value) == 0:
                scalars[name] = float(value)
                rows.append({"weight_name": name, "j": 0, "value": float(value)})
            else:
                rows.extend(
                    {"weight_name": name, "j": j, "value": float(v)}
                    for j, v in enumerate(value, start=1)
                )

        logger.info("偏倚权重", scenario=args.scenario, Q=weights.Q, phi=args.phi)
        return CommandOutput(
            command=self.metadata.name,
            config={**echo_config(args), "Q": weights.Q},
            result={"scenario": weights.scenario, "Q": weights.Q, "phi": weights.phi, "ell": weights.ell, **scalars},
            table=pd.DataFrame(rows, columns=["weight_name", "j", "value"]),
        )


class ExpectCommand(BaseCommand):
    """工作模型估计量在真实模型下的期望"""

    args_model = ExpectArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="expect",
            category=CommandCategory.BIAS,
            description="工作模型在给定真实模型下的期望估计 (标准设计优先用闭式结果) 与估计效应曲线",
        )
        super().__init__(metadata)

    def execute(self, args: ExpectArgs) -> CommandOutput:
        layout = resolve_layout(args)
        params = resolve_params(args, layout)
        truth = resolve_truth(args, layout.J)
        model = ModelKind.parse(args.model)

        if layout.is_standard:
            prediction = predict_expectation(
                model, truth, layout.J - 1, params.phi, layout.ell, analytic_only=args.analytic_only
            )
            expectations = prediction.expectations
            provenance, formula = prediction.provenance, prediction.formula
        else:
            if args.analytic_only:
                raise ConfigurationError("analytic_only", True, "闭式结果仅适用于标准设计")
            full = expected_estimate(layout, model, truth, params)
            expectations = {
                k: v for k, v in full.items() if k in ("tate", "gamma") or k.startswith("delta")
            }
            provenance, formula = "oracle", None

        curve = estimated_effect_curve(layout, model, truth, params)
        return CommandOutput(
            command=self.metadata.name,
            config={**echo_config(args), "resolved_layout": layout.to_document(), "phi": params.phi},
            result={
                "working": model.value,
                "truth": truth.kind.value,
                "provenance": provenance,
                "formula": formula,
                "effect_true": truth.tate(layout.J),
                **expectations,
            },
            table=pd.DataFrame(curve),
        )


def register_bias_commands():
    """注册偏倚类命令"""
    for command_class in (BiasCommand, ExpectCommand):
        register_command_class(command_class)


register_bias_commands()
