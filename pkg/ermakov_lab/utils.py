import csv
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np

from .constants import FLOAT_FORMAT


def sec(theta: float) -> float:
    return 1.0 / math.cos(theta)


def cosec(theta: float) -> float:
    return 1.0 / math.sin(theta)


def cot(theta: float) -> float:
    return math.cos(theta) / math.sin(theta)


def quadrant_center(theta: float) -> float:
    """
    Returns the odd multiple of pi/4 lying in the same open quadrant as
    ``theta``; pi/4 for the first quadrant.
    """
    quarter = math.pi / 2
    return (math.floor(theta / quarter) + 0.5) * quarter


def format_float(value: float) -> str:
    return format(float(value), FLOAT_FORMAT)


def normalize_value(value: Any) -> Any:
    """
    Converts ``value`` into something ``json`` serializes deterministically:
    numpy scalars and arrays become Python floats and lists, non-finite
    floats become ``None``, exact rationals become strings.
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.ndarray):
        return [normalize_value(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): normalize_value(v) for k, v in value.items()}
    if hasattr(value, "__iter__"):
        return [normalize_value(v) for v in value]
    return str(value)


def dumps(data: Any) -> str:
    return json.dumps(normalize_value(data), sort_keys=True, indent=2) + "\n"


def write_json(path: Union[str, Path], data: Any) -> Path:
    path = Path(path)
    path.write_text(dumps(data), encoding="utf-8", newline="\n")
    return path


def write_csv(
    path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    format_float(v) if isinstance(v, (float, np.floating)) else v
                    for v in row
                ]
            )
    return path


def max_abs(values: Iterable[float]) -> float:
    array = np.abs(np.asarray(list(values), dtype=float))
    return float(array.max()) if array.size else 0.0


def rms(values: Iterable[float]) -> float:
    array = np.asarray(list(values), dtype=float)
    return float(np.sqrt(np.mean(array ** 2))) if array.size else 0.0
