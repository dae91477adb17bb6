"""JSON conversion shared by every report type."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import mpmath
import numpy as np


def jsonable(v: Any) -> Any:
    if hasattr(v, "to_json"):
        return jsonable(v.to_json())
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, mpmath.mpf):
        return float(v) if abs(v) < mpmath.mpf(10) ** 300 else mpmath.nstr(v, 17)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False)
