"""Various utilities for nuclear_levy output"""

from __future__ import annotations

import csv
import json
import os
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from .const import CSV_FLOAT_FORMAT, DEFAULT_OUTPUT_DIR, ENV_OUTPUT_DIR


def get_output_dir(flag: str | None = None, config_dir: str | None = None) -> Path:
    """Resolve the output dir: CLI flag, then config, then env var, then ./output."""
    if flag:
        return Path(flag)
    if config_dir:
        return Path(config_dir)
    if env := os.environ.get(ENV_OUTPUT_DIR):
        return Path(env)
    return Path(DEFAULT_OUTPUT_DIR)


def format_number(value: Any) -> str:
    """Format numbers with 17 significant digits; everything else with str."""
    if isinstance(value, bool | np.bool_):
        return str(int(value))
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return format(float(value), CSV_FLOAT_FORMAT)
    return str(value)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f'Object of type {type(value).__name__} is not JSON serializable')


def dumps_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_to_builtin) + '\n'


def write_json(path: Path, data: Any) -> None:
    path.write_text(dumps_json(data), encoding='utf-8')


def csv_writer(handle: TextIO, header: Sequence[str]) -> Any:
    """Return a csv writer on handle that has already written the header."""
    writer = csv.writer(handle, lineterminator='\n')
    writer.writerow(header)
    return writer


def write_rows(writer: Any, rows: Iterable[Sequence[Any]]) -> int:
    """Write rows with formatted numbers and return the row count."""
    count = 0
    for row in rows:
        writer.writerow([format_number(value) for value in row])
        count += 1
    return count
