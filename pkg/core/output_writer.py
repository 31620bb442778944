"""
结果输出
CSV/JSON 渲染、有效数字控制与原子写入
"""

import math
import os
import sys
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import orjson
import pandas as pd
import structlog
from pydantic import BaseModel

from core.command_registry import CommandOutput
from core.error_handler import DataIOError


logger = structlog.get_logger(__name__)


def _default(obj: Any) -> Any:
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"无法序列化类型: {type(obj).__name__}")


def dumps_json(data: Any, indent: bool = True) -> bytes:
    """确定性 JSON 序列化 (键排序)"""
    option = orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
    if indent:
        option |= orjson.OPT_INDENT_2
    return orjson.dumps(data, default=_default, option=option)


def round_significant(value: Any, precision: str) -> Any:
    """按有效数字递归舍入; precision='full' 时原样返回"""
    if precision == "full":
        return value
    digits = int(precision)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return value
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: round_significant(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v, precision) for v in value]
    return value


def _result_table(output: CommandOutput) -> pd.DataFrame:
    if output.table is not None:
        return output.table
    scalars = {
        k: v for k, v in output.result.items()
        if not isinstance(v, (dict, list, tuple))
    }
    return pd.DataFrame([scalars])


def render_csv(output: CommandOutput, precision: str = "6") -> str:
    """首行 '# <command> config=<json>' 回显配置; 有结果表时第二行 '# result=<json>', 其后为表"""
    config = dumps_json(output.config, indent=False).decode("utf-8")
    header = f"# {output.command} config={config}\n"
    if output.table is not None and output.result:
        result = dumps_json(round_significant(output.result, precision), indent=False).decode("utf-8")
        header += f"# result={result}\n"
    float_format = None if precision == "full" else f"%.{int(precision)}g"
    body = _result_table(output).to_csv(index=False, float_format=float_format, lineterminator="\n")
    return header + body


def render_json(output: CommandOutput, precision: str = "6") -> str:
    table = None
    if output.table is not None:
        table = output.table.astype(object).where(pd.notna(output.table), None).to_dict(orient="records")
    document = {
        "command": output.command,
        "config": output.config,
        "result": round_significant(output.result, precision),
        "table": round_significant(table, precision) if table is not None else None,
    }
    if output.warnings:
        document["warnings"] = output.warnings
    return dumps_json(document).decode("utf-8") + "\n"


def render(output: CommandOutput, fmt: str = "csv", precision: str = "6") -> str:
    if fmt == "json":
        return render_json(output, precision)
    return render_csv(output, precision)


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """写入同目录临时文件后 os.replace 到目标路径"""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    tmp_name = None
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", dir=directory, prefix=f".{target.name}.", suffix=".tmp",
            delete=False, newline=""
        ) as handle:
            tmp_name = handle.name
            handle.write(text)
        os.replace(tmp_name, target)
    except OSError as e:
        if tmp_name and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise DataIOError(str(target), "写入失败", original_exception=e) from e

    logger.info("结果已写入", path=str(target), size=len(text))
    return target


def write_output(
    output: CommandOutput,
    fmt: str = "csv",
    precision: str = "6",
    path: Optional[Union[str, Path]] = None,
) -> str:
    """渲染并写出结果; 未指定路径时写到标准输出"""
    text = render(output, fmt, precision)
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return text
