"""
模拟命令
数据集生成、预设情景的蒙特卡洛研究与情景列表
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
from modules.montecarlo.presets import get_preset, preset_layout, preset_scenarios
from modules.montecarlo.simulate import simulate_dataset
from modules.montecarlo.study import report_frame, run_study
from schemas.cli_models import DatasetArgs, PresetsArgs, SimulateArgs
from tools.common import echo_config, resolve_layout, resolve_truth

logger = structlog.get_logger(__name__)


class DatasetCommand(BaseCommand):
    """个体层数据集生成"""

    args_model = DatasetArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="dataset",
            category=CommandCategory.SIMULATION,
            description="在真实模型下生成长格式数据集 cluster,period,individual,Z,A,y",
        )
        super().__init__(metadata)

    def execute(self, args: DatasetArgs) -> CommandOutput:
        layout = resolve_layout(args)
        truth = resolve_truth(
            args, layout.J, mu=args.mu, beta=args.beta, tau_sq=args.tau_sq, sigma_sq=args.sigma_sq
        )
        table = simulate_dataset(layout, truth, args.seed)
        return CommandOutput(
            command=self.metadata.name,
            config={**echo_config(args), "resolved_layout": layout.to_document()},
            result={"rows": len(table)},
            table=table,
        )


class SimulateCommand(BaseCommand):
    """预设情景的蒙特卡洛研究"""

    args_model = SimulateArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="simulate",
            category=CommandCategory.SIMULATION,
            description="按预设情景重复生成数据并以 REML 拟合各工作模型, 汇总偏倚、覆盖率与功效",
        )
        super().__init__(metadata)

    def execute(self, args: SimulateArgs) -> CommandOutput:
        preset = get_preset(args.preset)
        n_reps = args.reps if args.reps is not None else preset.n_reps
        report = run_study(
            preset_layout(preset),
            preset.truth,
            preset.working_models,
            n_reps=n_reps,
            seed=args.seed,
            alpha=args.alpha,
            workers=args.workers,
        )
        # 进程数不影响结果, 不进入回显配置
        config = {k: v for k, v in echo_config(args).items() if k != "workers"}
        return CommandOutput(
            command=self.metadata.name,
            config={**config, "reps": n_reps, "alpha": report.alpha},
            result={"n_reps": report.n_reps, "seed": report.seed, "alpha": report.alpha},
            table=report_frame(report),
        )


class PresetsCommand(BaseCommand):
    """预设情景列表"""

    args_model = PresetsArgs

    def __init__(self):
        metadata = CommandMetadata(
            name="presets",
            category=CommandCategory.SIMULATION,
            description="列出预设模拟情景及其真实模型与工作模型",
        )
        super().__init__(metadata)

    def execute(self, args: PresetsArgs) -> CommandOutput:
        presets = [get_preset(args.name)] if args.name else list(preset_scenarios().values())
        table = pd.DataFrame([
            {
                "name": p.name,
                "description": p.description,
                "I": p.I,
                "J": p.J,
                "K": p.K,
                "truth": p.truth.kind.value,
                "tate": p.truth.tate(p.J),
                "gamma": p.truth.gamma,
                "tau_sq": p.truth.tau_sq,
                "working_models": ";".join(m.value for m in p.working_models),
                "n_reps": p.n_reps,
            }
            for p in presets
        ])
        result = {"count": len(presets)}
        if args.name:
            result["preset"] = presets[0].model_dump(mode="json")
        return CommandOutput(command=self.metadata.name, config=echo_config(args), result=result, table=table)


def register_simulation_commands():
    """注册模拟类命令"""
    for command_class in (DatasetCommand, SimulateCommand, PresetsCommand):
        register_command_class(command_class)


register_simulation_commands()
