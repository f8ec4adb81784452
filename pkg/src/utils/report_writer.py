"""
Report Writers

CSV and JSON output with fixed float formatting. Files are written to a
temporary sibling and renamed into place.
"""

import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from loguru import logger

from .exceptions import OutputError

FLOAT_DIGITS = 12


def format_float(value: float, digits: int = FLOAT_DIGITS) -> str:
    """Format with a fixed number of significant digits; NaN becomes an empty field."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}g}"


def to_jsonable(value: Any, digits: Optional[int]) -> Any:
    """Convert numpy and complex values to JSON types, rounding floats to digits."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v, digits) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist(), digits)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(value.real), digits), "im": to_jsonable(float(value.imag), digits)}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "infinity" if value > 0 else "-infinity"
        return float(f"{value:.{digits}g}") if digits else value
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def atomic_write_text(path, text: str) -> Path:
    """
    Write text to path through a temporary file and rename.

    Raises:
        OutputError: the directory or file cannot be written
    """
    path = Path(path)
    tmp_name = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile('w', encoding='utf-8', dir=path.parent,
                                         prefix=f".{path.name}.", suffix='.tmp',
                                         delete=False, newline='') as handle:
            tmp_name = handle.name
            handle.write(text)
        os.replace(tmp_name, path)
    except OSError as e:
        if tmp_name and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OutputError(f"Cannot write {path}: {e}", path=str(path)) from e
    logger.debug(f"Wrote {path}")
    return path


def frame_to_csv(frame: pd.DataFrame, digits: int = FLOAT_DIGITS) -> str:
    """Render a DataFrame as CSV with fixed float formatting."""
    return frame.to_csv(index=False, float_format=f"%.{digits}g", na_rep="", lineterminator="\n")


def to_json_text(data: Any, digits: Optional[int] = FLOAT_DIGITS) -> str:
    """Render data as JSON; digits=None keeps full float precision."""
    return json.dumps(to_jsonable(data, digits), indent=2) + "\n"


def emit(text: str, path=None) -> Optional[Path]:
    """Write text to path, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
        return None
    return atomic_write_text(path, text)


def write_frame(frame: pd.DataFrame, path=None, fmt: str = "csv",
                digits: int = FLOAT_DIGITS) -> Optional[Path]:
    """Write a table as CSV or as a JSON list of records."""
    if fmt == "json":
        records = frame.to_dict(orient="records")
        return emit(to_json_text(records, digits), path)
    return emit(frame_to_csv(frame, digits), path)


def write_json(data: Any, path=None, digits: Optional[int] = FLOAT_DIGITS) -> Optional[Path]:
    return emit(to_json_text(data, digits), path)
