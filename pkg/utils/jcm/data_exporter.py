"""
Data export - CSV / JSON emission of figure data
Output is deterministic: fixed float formatting, sorted metadata, no timestamps.
"""
import io
import json
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from utils.jcm.errors import BoundsViolation
from utils.jcm.helpers import debug_print


@dataclass
class DataTable:
    """Named columns of floats plus the metadata describing how they were made"""
    columns: List[str]
    rows: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def _format_meta_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_format_meta_value(item) for item in value)
    return str(value)


def check_bounds(table: DataTable, slack: float = 1e-9) -> None:
    """
    Inversion columns must stay in [-1, 1] and lineshape columns in [0, 1)

    Raises:
        BoundsViolation: a value is out of range
    """
    for index, name in enumerate(table.columns):
        values = table.rows[:, index] if table.rows.size else np.empty(0)
        if values.size == 0:
            continue
        if name.startswith("sigma_z"):
            low, high = -1.0 - slack, 1.0 + slack
        elif name.startswith("W"):
            low, high = -slack, 1.0 + slack
        else:
            continue
        if not np.all(np.isfinite(values)) or values.min() < low or values.max() > high:
            raise BoundsViolation(
                f"Column {name} out of bounds: [{np.nanmin(values)}, {np.nanmax(values)}]",
                value=name, limit=(low, high),
            )


class DataExporter:
    """
    Writes DataTables as CSV or JSON files
    """

    def __init__(self, fmt: str = "csv", float_format: str = "%.12e", bounds_slack: float = 1e-9):
        if fmt not in ("csv", "json"):
            raise ValueError(f"Unsupported output format: {fmt}")
        self.fmt = fmt
        self.float_format = float_format
        self.bounds_slack = bounds_slack

    def _format_float(self, value: float) -> str:
        return self.float_format % value

    def format_csv(self, table: DataTable) -> str:
        buffer = io.StringIO()
        for key in sorted(table.meta):
            buffer.write(f"# {key}: {_format_meta_value(table.meta[key])}\n")
        np.savetxt(buffer, np.asarray(table.rows, dtype=float).reshape(-1, len(table.columns)),
                   fmt=self.float_format, delimiter=",", header=",".join(table.columns), comments="")
        return buffer.getvalue()

    def format_json(self, table: DataTable) -> str:
        payload = {
            "meta": {key: table.meta[key] for key in sorted(table.meta)},
            "columns": list(table.columns),
            "rows": [[float(self._format_float(value)) for value in row] for row in table.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, default=str) + "\n"

    def render(self, table: DataTable) -> str:
        check_bounds(table, self.bounds_slack)
        return self.format_csv(table) if self.fmt == "csv" else self.format_json(table)

    def write(self, table: DataTable, path: str) -> str:
        """Write one table; path '-' streams to stdout"""
        text = self.render(table)
        if path == "-":
            sys.stdout.write(text)
            return path
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        debug_print(f"  ✅ Saved {len(table.rows)} rows: {path}")
        return path

    def suffixed_path(self, path: str, suffix: Optional[str]) -> str:
        """outputs/lineshape.csv + 'nbar-4' -> outputs/lineshape_nbar-4.csv"""
        target = Path(path)
        if target.suffix.lower() not in (".csv", ".json"):
            target = target.with_name(target.name + f".{self.fmt}")
        if suffix:
            target = target.with_name(f"{target.stem}_{suffix}{target.suffix}")
        return str(target)

    def write_many(self, tables: Dict[str, DataTable], path: str) -> List[str]:
        """One file per table; a single table keeps the plain path"""
        if path == "-" and len(tables) == 1:
            return [self.write(next(iter(tables.values())), "-")]
        if path == "-":
            raise ValueError("Streaming to stdout supports a single table only")
        # validate everything before touching the filesystem
        for table in tables.values():
            check_bounds(table, self.bounds_slack)
        if len(tables) == 1:
            return [self.write(next(iter(tables.values())), self.suffixed_path(path, None))]
        return [self.write(table, self.suffixed_path(path, suffix)) for suffix, table in tables.items()]


def read_csv(path: str) -> DataTable:
    """Parse a file written by DataExporter.format_csv; metadata values stay strings"""
    meta: Dict[str, Any] = {}
    columns: List[str] = []
    header_line = 0
    with open(path, "r", encoding="utf-8") as f:
        for header_line, line in enumerate(f):
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                meta[key] = value
            elif line:
                columns = line.split(",")
                break
    with warnings.catch_warnings():
        # a header-only file is a valid empty table
        warnings.simplefilter("ignore", UserWarning)
        rows = np.loadtxt(path, delimiter=",", comments="#", skiprows=header_line + 1, ndmin=2,
                          encoding="utf-8")
    return DataTable(columns=columns, rows=rows.reshape(-1, len(columns)), meta=meta)
