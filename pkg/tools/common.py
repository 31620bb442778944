"""
命令参数解析
布局、方差分量与真实模型参数的统一解析
"""

from typing import Any, Dict, Optional

from pydantic import BaseModel

from core.error_handler import ConfigurationError
from modules.bias.curves import effect_curve
from modules.correlation.exchangeable import derive_params, params_from_icc
from modules.design.layout import build_standard_design, layout_from_json, layout_from_treatment_matrix
from schemas.cli_models import CorrelationArgs, LayoutArgs, TruthArgs
from schemas.design_models import DesignLayout, ModelKind, TrueModelParams
from schemas.stat_models import CorrelationParams


def echo_config(args: BaseModel) -> Dict[str, Any]:
    """回显的完整配置 (省略未设置的可选项)"""
    return args.model_dump(mode="json", exclude_none=True)


def _parse_ints(text: str, field: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigurationError(field, text, "须为逗号分隔的整数") from e


# ============================================================================
# 布局
# ============================================================================

def _inline_values(args: LayoutArgs) -> Dict[str, int]:
    values = {"I": args.clusters, "J": args.periods, "K": args.cluster_size, "ell": args.ell}
    if args.standard:
        parts = _parse_ints(args.standard, "standard")
        if len(parts) not in (3, 4):
            raise ConfigurationError("standard", args.standard, "格式为 I,J,K 或 I,J,K,ell")
        for key, value in zip(("I", "J", "K", "ell"), parts):
            if values[key] is not None and values[key] != value:
                raise ConfigurationError(key, values[key], f"与 --standard 中的 {value} 冲突")
            values[key] = value
    return {k: v for k, v in values.items() if v is not None}


def resolve_layout(args: LayoutArgs) -> DesignLayout:
    """布局文件优先; 其余来源给出的取值必须与之一致"""
    inline = _inline_values(args)

    if args.layout:
        layout = layout_from_json(args.layout)
        actual = {"I": layout.I, "J": layout.J, "K": layout.K, "ell": layout.ell}
        for key, value in inline.items():
            if actual[key] != value:
                raise ConfigurationError(key, value, f"与布局文件中的 {actual[key]} 冲突")
        return layout

    if args.design:
        if "J" not in inline or "K" not in inline:
            raise ConfigurationError("design", args.design[:40], "--design 需要同时给出 --J 与 --K")
        layout = layout_from_treatment_matrix(
            _parse_ints(args.design, "design"), K=inline["K"], ell=inline.get("ell", 1), J=inline["J"]
        )
        if "I" in inline and inline["I"] != layout.I:
            raise ConfigurationError("I", inline["I"], f"与处理矩阵的簇数 {layout.I} 冲突")
        return layout

    if {"I", "J", "K"}.issubset(inline):
        return build_standard_design(inline["I"], inline["J"], inline["K"], inline.get("ell", 1))

    raise ConfigurationError("layout", None, "需要 --standard, --layout, --design 或 --I/--J/--K")


# ============================================================================
# 方差分量
# ============================================================================

def resolve_params(args: CorrelationArgs, layout: DesignLayout) -> CorrelationParams:
    """(ρ, σ²) 按规划约定换算; (τ², σ²) 直接使用; 二者只能给其一"""
    if args.rho is not None and args.tau_sq is not None:
        raise ConfigurationError("rho", args.rho, "--rho 与 --tau-sq 不能同时给出")
    if args.rho is not None:
        return params_from_icc(args.rho, args.sigma_sq, layout.K, layout.J)
    if args.tau_sq is not None:
        return derive_params(args.tau_sq, args.sigma_sq, layout.K, layout.J)
    raise ConfigurationError("rho", None, "需要 --rho 或 --tau-sq")


# ============================================================================
# 真实模型
# ============================================================================

def _named_curve(name: str, J: int, effect: Optional[float]) -> list:  # noqa: N803
    if effect is None:
        return effect_curve(name, J)
    key = name.strip().lower().replace("-", "_")
    return effect_curve(name, J, **({"tate": effect} if key == "sinusoidal" else {"level": effect}))


def resolve_truth(args: TruthArgs, J: int, **variance_components) -> TrueModelParams:  # noqa: N803
    """HH 类用常数效应; ETI 类依次取显式曲线、命名曲线、常数曲线"""
    kind = ModelKind.parse(args.truth)
    fields: Dict[str, Any] = {"kind": kind, "gamma": args.gamma, **variance_components}
    if kind.exposure_time:
        if args.curve is not None:
            fields["effect_curve"] = args.curve
        elif args.curve_name:
            fields["effect_curve"] = _named_curve(args.curve_name, J, args.effect)
        elif args.effect is not None:
            fields["effect_curve"] = [args.effect] * (J - 1)
        else:
            raise ConfigurationError("curve", None, "ETI 类真实模型需要 --curve, --curve-name 或 --effect")
    else:
        if args.effect is None:
            raise ConfigurationError("effect", None, "HH 类真实模型需要 --effect")
        fields["effect"] = args.effect
    try:
        truth = TrueModelParams(**fields)
        truth.point_effects(J)
        truth.period_effects(J)
    except ValueError as e:
        raise ConfigurationError("truth", args.truth, str(e)) from e
    return truth
