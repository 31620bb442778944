"""
试验布局构建
标准设计、自定义序列、处理矩阵反推与 JSON 读写
"""

from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import orjson
import structlog

from core.error_handler import ConfigurationError, DataIOError
from schemas.design_models import DesignLayout, SequenceSpec


logger = structlog.get_logger(__name__)


# ============================================================================
# 校验
# ============================================================================

def validate_layout(layout: DesignLayout) -> DesignLayout:
    """检查布局不变量, 违反时抛出 ConfigurationError"""
    J, K = layout.J, layout.K  # noqa: N806
    if J < 3:
        raise ConfigurationError("J", J, "时期数至少为 3")
    if K < 1:
        raise ConfigurationError("K", K, "簇-时期个体数至少为 1")
    if not layout.sequences:
        raise ConfigurationError("sequences", [], "至少需要一个处理序列")

    adopts = [seq.adopt for seq in layout.sequences]
    if len(set(adopts)) != len(adopts):
        raise ConfigurationError("sequences", adopts, "采纳时期重复")
    if adopts != sorted(adopts):
        raise ConfigurationError("sequences", adopts, "序列须按采纳时期升序排列")
    for seq in layout.sequences:
        if not 2 <= seq.adopt <= J:
            raise ConfigurationError(
                "adopt", seq.adopt, f"采纳时期须在 2..{J} 之间 (第 1 期全部未处理)"
            )
        if seq.count < 0:
            raise ConfigurationError("count", seq.count, "序列簇数不能为负")
    if layout.I == 0:
        raise ConfigurationError("I", 0, "总簇数为 0")

    Q = J - 1  # noqa: N806
    if not 1 <= layout.ell <= Q:
        raise ConfigurationError("ell", layout.ell, f"预期效应阶数须在 1..{Q} 之间")
    return layout


# ============================================================================
# 构建
# ============================================================================

def build_standard_design(I: int, J: int, K: int, ell: int = 1) -> DesignLayout:  # noqa: N803
    """完整标准设计: Q = J-1 个序列, 每序列 I/Q 个簇, 第 q 序列在 q+1 期采纳"""
    if J < 3:
        raise ConfigurationError("J", J, "时期数至少为 3")
    Q = J - 1  # noqa: N806
    if I <= 0 or I % Q != 0:
        raise ConfigurationError("I", I, f"簇数须为序列数 {Q} 的正整数倍")
    if not 1 <= ell <= Q:
        raise ConfigurationError("ell", ell, f"预期效应阶数须在 1..{Q} 之间")

    sequences = [SequenceSpec(adopt=q + 1, count=I // Q) for q in range(1, Q + 1)]
    layout = validate_layout(DesignLayout(J=J, K=K, ell=ell, sequences=sequences))
    logger.debug("构建标准设计", I=I, J=J, K=K, ell=ell)
    return layout


def build_custom_design(
    sequences: Iterable[Union[Tuple[int, int], SequenceSpec]],
    J: int,  # noqa: N803
    K: int,  # noqa: N803
    ell: int = 1,
) -> DesignLayout:
    """由 (采纳时期, 簇数) 列表构建一般布局; 空序列被丢弃"""
    specs = []
    for item in sequences:
        spec = item if isinstance(item, SequenceSpec) else SequenceSpec(adopt=item[0], count=item[1])
        specs.append(spec)

    adopts = [s.adopt for s in specs]
    if len(set(adopts)) != len(adopts):
        raise ConfigurationError("sequences", adopts, "采纳时期重复")

    if specs and sum(s.count for s in specs) == 0:
        raise ConfigurationError("I", 0, "总簇数为 0")
    specs = sorted((s for s in specs if s.count != 0), key=lambda s: s.adopt)
    layout = validate_layout(DesignLayout(J=J, K=K, ell=ell, sequences=specs))
    logger.debug("构建自定义设计", I=layout.I, J=J, n_sequences=layout.n_sequences)
    return layout


def layout_from_treatment_matrix(
    Z: Union[Sequence[Sequence[int]], np.ndarray],  # noqa: N803
    K: int,  # noqa: N803
    ell: int = 1,
    J: Optional[int] = None,  # noqa: N803
) -> DesignLayout:
    """由 I×J 处理指示矩阵 (或堆叠向量加 J) 反推序列布局"""
    matrix = np.asarray(Z, dtype=float)
    if matrix.ndim == 1:
        if J is None or J <= 0 or matrix.size % J != 0:
            raise ConfigurationError("design", matrix.size, "堆叠处理向量长度须为 J 的整数倍")
        matrix = matrix.reshape(-1, J)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ConfigurationError("design", matrix.shape, "处理矩阵须为非空 I×J 矩阵")
    if not np.isin(matrix, (0.0, 1.0)).all():
        raise ConfigurationError("design", "non-binary", "处理矩阵只能包含 0 和 1")

    n_periods = matrix.shape[1]
    counts: Dict[int, int] = {}
    for i, row in enumerate(matrix.astype(int)):
        if np.any(np.diff(row) < 0):
            raise ConfigurationError("design", i + 1, "处理指示必须随时期单调不减")
        if row.sum() == 0:
            raise ConfigurationError("design", i + 1, "簇在研究期内从未接受处理")
        adopt = int(np.argmax(row)) + 1
        if adopt == 1:
            raise ConfigurationError("design", i + 1, "第 1 期不能处于处理状态")
        counts[adopt] = counts.get(adopt, 0) + 1

    return build_custom_design(sorted(counts.items()), J=n_periods, K=K, ell=ell)


# ============================================================================
# 序列化
# ============================================================================

def layout_to_json(layout: DesignLayout) -> str:
    return orjson.dumps(layout.to_document(), option=orjson.OPT_INDENT_2).decode("utf-8")


def layout_from_document(document: Dict[str, Any]) -> DesignLayout:
    """从 {I, J, K, ell, sequences} 文档构建布局并核对 I"""
    try:
        sequences = [(int(s["adopt"]), int(s["count"])) for s in document["sequences"]]
        layout = build_custom_design(
            sequences,
            J=int(document["J"]),
            K=int(document["K"]),
            ell=int(document.get("ell", 1)),
        )
    except (KeyError, TypeError) as e:
        raise ConfigurationError("layout", str(e), "布局文档缺少字段或类型错误") from e

    if "I" in document and int(document["I"]) != layout.I:
        raise ConfigurationError("I", document["I"], f"与序列簇数之和 {layout.I} 不一致")
    return layout


def layout_from_json(source: Union[str, Path]) -> DesignLayout:
    """从 JSON 字符串或文件路径读取布局"""
    text = str(source)
    if not text.lstrip().startswith("{"):
        path = Path(text)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise DataIOError(str(path), "无法读取布局文件", original_exception=e) from e
    try:
        document = orjson.loads(text)
    except orjson.JSONDecodeError as e:
        raise DataIOError(str(source)[:80], "布局 JSON 格式错误", original_exception=e) from e
    return layout_from_document(document)
