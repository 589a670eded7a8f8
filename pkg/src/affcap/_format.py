"""Deterministic text serialization of report values."""

import json
import math

import numpy as np

DIGITS = 12


def fmt(x):
    """Float with 12 significant digits; ``inf``/``nan`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{DIGITS}g}"
    return "0" if s == "-0" else s


def plain(obj):
    """Recursively convert to JSON-ready values with rounded floats.

    Floats are rounded through :func:`fmt` so that equal reports print
    identically regardless of the last few bits.
    """
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return fmt(x)
        return float(fmt(x))
    return obj


def dumps(obj):
    return json.dumps(plain(obj), indent=2, sort_keys=False) + "\n"
