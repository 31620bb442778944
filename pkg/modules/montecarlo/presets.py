"""
预设模拟情景
32 簇 9 期标准设计下的五个真实模型情景
"""

from pathlib import Path
from typing import Dict, List, Union

import orjson

from core.error_handler import ConfigurationError, DataIOError
from modules.bias.curves import sinusoidal_curve
from modules.design.layout import build_standard_design
from schemas.design_models import DesignLayout, ModelKind, TrueModelParams
from schemas.stat_models import ScenarioPreset


I_CLUSTERS = 32
J_PERIODS = 9
K_SIZE = 100
TAU = 0.141

_HH_PAIR = [ModelKind.HH, ModelKind.HH_ANT]
_ALL_MODELS = [ModelKind.HH, ModelKind.HH_ANT, ModelKind.ETI, ModelKind.ETI_ANT]


def _truth(kind: ModelKind, **kwargs) -> TrueModelParams:
    return TrueModelParams(
        kind=kind,
        mu=1.0,
        beta=[float(j) for j in range(J_PERIODS)],
        tau_sq=TAU ** 2,
        sigma_sq=1.0,
        **kwargs,
    )


def _preset(name: str, description: str, truth: TrueModelParams, models: List[ModelKind]) -> ScenarioPreset:
    return ScenarioPreset(
        name=name,
        description=description,
        I=I_CLUSTERS,
        J=J_PERIODS,
        K=K_SIZE,
        truth=truth,
        working_models=models,
    )


def preset_scenarios() -> Dict[str, ScenarioPreset]:
    curve = sinusoidal_curve(J_PERIODS).tolist()
    presets = [
        _preset("I-null", "HH 真实模型, 零效应 (第一类错误)", _truth(ModelKind.HH, effect=0.0), _HH_PAIR),
        _preset("I", "HH 真实模型, δ = 0.075", _truth(ModelKind.HH, effect=0.075), _HH_PAIR),
        _preset(
            "II",
            "HH-ANT 真实模型, δ = 0.075, γ = 0.04",
            _truth(ModelKind.HH_ANT, effect=0.075, gamma=0.04),
            _ALL_MODELS,
        ),
        _preset("III", "ETI 真实模型, 正弦效应曲线, Δ = 0.12", _truth(ModelKind.ETI, effect_curve=curve), _ALL_MODELS),
        _preset(
            "IV",
            "ETI-ANT 真实模型, 正弦效应曲线, Δ = 0.12, γ = 0.04",
            _truth(ModelKind.ETI_ANT, effect_curve=curve, gamma=0.04),
            _ALL_MODELS,
        ),
    ]
    return {p.name: p for p in presets}


def get_preset(name: str) -> ScenarioPreset:
    presets = preset_scenarios()
    if name not in presets:
        raise ConfigurationError("preset", name, f"可选 {sorted(presets)}")
    return presets[name]


def preset_layout(preset: ScenarioPreset) -> DesignLayout:
    return build_standard_design(preset.I, preset.J, preset.K, preset.ell)


def preset_to_json(preset: ScenarioPreset) -> str:
    return orjson.dumps(preset.model_dump(mode="json"), option=orjson.OPT_INDENT_2).decode("utf-8")


def preset_from_json(source: Union[str, Path]) -> ScenarioPreset:
    """从 JSON 文本或文件读取情景"""
    text = str(source)
    if not text.lstrip().startswith("{"):
        path = Path(text)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise DataIOError(str(path), "无法读取情景文件", original_exception=e) from e
    try:
        return ScenarioPreset.model_validate(orjson.loads(text))
    except orjson.JSONDecodeError as e:
        raise DataIOError(str(source)[:80], "情景 JSON 格式错误", original_exception=e) from e
    except ValueError as e:
        raise ConfigurationError("preset", str(source)[:80], str(e)) from e
