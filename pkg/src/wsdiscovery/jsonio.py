"""Byte-stable JSON output: sorted keys, floats rounded to 9 significant digits."""

import enum
import json
import math


def _round(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite float {obj!r} cannot be serialized")
        r = float(f"{obj:.9g}")
        return 0.0 if r == 0 else r
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj, indent=2) -> str:
    return json.dumps(_round(obj), sort_keys=True, indent=indent, ensure_ascii=False) + "\n"
