"""Read simulation curve CSVs into plain arrays.

The expected layout is the harness output format: optional ``# key = value``
metadata comments, a fixed header, then one row per (method, block) pair.
This module is the only place the schema is spelled out; everything
downstream works from the parsed table and never touches the file again.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

REQUIRED_COLUMNS = (
    "method",
    "block",
    "nmse_mean",
    "snr_mean_linear",
    "snr_mean_db",
    "n_trials",
)
OPTIONAL_COLUMNS = ("genie_snr_mean_db",)

_INT_COLUMNS = ("block", "n_trials")


class SchemaError(ValueError):
    """The CSV does not match the harness schema.

    ``column`` names the offending column when the problem is attributable
    to one, and is None for structural problems (missing header, short row).
    """

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


@dataclass(frozen=True)
class MethodCurve:
    """One method's per-block curve values, in file order."""

    method: str
    blocks: np.ndarray
    nmse: np.ndarray
    snr_db: np.ndarray


@dataclass(frozen=True)
class CurveTable:
    """Parsed CSV: metadata comments plus one curve per method."""

    metadata: dict[str, str]
    curves: tuple[MethodCurve, ...]

    @property
    def methods(self) -> tuple[str, ...]:
        return tuple(c.method for c in self.curves)

    def curve(self, method: str) -> MethodCurve:
        for c in self.curves:
            if c.method == method:
                return c
        raise KeyError(method)


def _check_header(header: tuple[str, ...]) -> None:
    for name in REQUIRED_COLUMNS:
        if name not in header:
            raise SchemaError(f"missing column: {name}", column=name)
    allowed = REQUIRED_COLUMNS + OPTIONAL_COLUMNS
    for name in header:
        if name not in allowed:
            raise SchemaError(f"unexpected column: {name}", column=name)
    if len(set(header)) != len(header):
        dup = next(n for n in header if header.count(n) > 1)
        raise SchemaError(f"duplicate column: {dup}", column=dup)


def _parse_cell(name: str, raw: str, lineno: int):
    if name == "method":
        if not raw:
            raise SchemaError(f"column method: empty value on line {lineno}", column="method")
        return raw
    if name in _INT_COLUMNS:
        try:
            return int(raw)
        except ValueError:
            raise SchemaError(
                f"column {name}: invalid integer {raw!r} on line {lineno}",
                column=name,
            ) from None
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(
            f"column {name}: invalid number {raw!r} on line {lineno}",
            column=name,
        ) from None


def read_curves(path: str | Path) -> CurveTable:
    """Parse a harness CSV, validating it against the schema.

    Values are kept exactly as parsed (no aggregation, no reordering beyond
    grouping rows by method). Raises SchemaError when the header or a value
    does not match the schema, FileNotFoundError when the file is missing.
    """
    metadata: dict[str, str] = {}
    body: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh.read().splitlines(), start=1):
            if line.startswith("#"):
                stripped = line.lstrip("#").strip()
                if "=" in stripped:
                    key, value = (part.strip() for part in stripped.split("=", 1))
                    metadata[key] = value
                continue
            if line.strip():
                body.append((lineno, line))
    if not body:
        raise SchemaError("no header line found")

    header = tuple(body[0][1].split(","))
    _check_header(header)

    order: list[str] = []
    grouped: dict[str, list[dict]] = {}
    for lineno, line in body[1:]:
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaError(
                f"line {lineno}: expected {len(header)} cells, got {len(cells)}"
            )
        row = {name: _parse_cell(name, raw, lineno) for name, raw in zip(header, cells)}
        method = row["method"]
        if method not in grouped:
            grouped[method] = []
            order.append(method)
        grouped[method].append(row)

    curves = tuple(
        MethodCurve(
            method=m,
            blocks=np.array([r["block"] for r in grouped[m]], dtype=int),
            nmse=np.array([r["nmse_mean"] for r in grouped[m]], dtype=float),
            snr_db=np.array([r["snr_mean_db"] for r in grouped[m]], dtype=float),
        )
        for m in order
    )
    return CurveTable(metadata=metadata, curves=curves)
