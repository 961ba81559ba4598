"""Deterministic JSON output with 17 significant digits."""

from __future__ import annotations

import enum
import json
import math

import numpy as np


def to_jsonable(obj):
    """Recursively convert numpy data, enums and dataclass-like objects to JSON types."""
    if hasattr(obj, "to_dict") and not isinstance(obj, type):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj, out: list, indent: int, level: int):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            out.append((sep if i else "") + pad + json.dumps(k) + ": ")
            _emit(v, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        # numeric rows stay on one line
        flat = all(not isinstance(v, (dict, list)) for v in obj)
        out.append("[")
        for i, v in enumerate(obj):
            out.append((", " if flat else sep) if i else "")
            if not flat:
                out.append(pad)
            _emit(v, out, indent, level + 1)
        out.append("]" if flat else end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            out.append("null")
        else:
            out.append(format_float(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    else:
        out.append(json.dumps(obj))


def format_float(x: float) -> str:
    s = "%.17g" % x
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 2) -> str:
    """Serialize ``obj`` to JSON; floats are written with 17 significant digits."""
    out: list[str] = []
    _emit(to_jsonable(obj), out, indent, 0)
    return "".join(out)
