"""Table, matrix and manifest writers.

Data files never contain timestamps, so re-running a command with the same
config reproduces them byte for byte. CSV files start with a ``#`` comment
block holding the fully resolved config in TOML form.
"""

from __future__ import annotations

import json
import math
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .model import SystemConfig, config_to_mapping, dumps_config


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if not math.isfinite(v) else v
    return v


def write_table(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    cfg: SystemConfig | None = None,
    fmt: str = "csv",
) -> Path:
    """Write rows as CSV (with a config header) or JSON records; returns the path written."""
    path = Path(path)
    if fmt == "json":
        path = path.with_suffix(".json")
        doc = {
            "config": config_to_mapping(cfg) if cfg is not None else None,
            "columns": list(columns),
            "records": [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows],
        }
        path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n", encoding="utf-8")
        return path
    if fmt != "csv":
        raise ValueError(f"unknown output format {fmt!r}")
    path = path.with_suffix(".csv")
    lines = []
    if cfg is not None:
        lines += ["# " + ln if ln else "#" for ln in dumps_config(cfg).splitlines()]
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_table(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Columns and raw string rows of a CSV written by ``write_table``."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln and not ln.startswith("#")]
    cols = lines[0].split(",")
    return cols, [ln.split(",") for ln in lines[1:]]


def config_header(path: str | Path) -> str:
    """TOML text stored in a CSV's comment block."""
    out = []
    for ln in Path(path).read_text(encoding="utf-8").splitlines():
        if not ln.startswith("#"):
            break
        out.append(ln[2:] if ln.startswith("# ") else "")
    return "\n".join(out) + "\n"


def write_matrix(path: str | Path, m: np.ndarray, cfg: SystemConfig | None = None, fmt: str = "csv") -> Path:
    """Complex matrix as one row per matrix row, with (re, im) column pairs."""
    n = m.shape[1]
    cols = [f"{part}_{k}" for k in range(n) for part in ("re", "im")]
    rows = [[x for z in m[i] for x in (z.real, z.imag)] for i in range(m.shape[0])]
    return write_table(path, cols, rows, cfg, fmt)


def read_matrix(path: str | Path) -> np.ndarray:
    _, rows = read_table(path)
    vals = np.array([[float(x) for x in r] for r in rows])
    return vals[:, 0::2] + 1j * vals[:, 1::2]


def write_manifest(
    out_dir: str | Path,
    cfg: SystemConfig,
    subcommand: str,
    argv: Sequence[str],
    outputs: Sequence[Path],
    warnings: int = 0,
    extra: dict | None = None,
) -> Path:
    out_dir = Path(out_dir)
    stamp = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(stamp), timezone.utc) if stamp else datetime.now(timezone.utc)
    doc = {
        "tool": "ringsqueeze",
        "version": __version__,
        "subcommand": subcommand,
        "argv": list(argv),
        "timestamp": when.isoformat(timespec="seconds"),
        "config": config_to_mapping(cfg),
        "outputs": [p.name for p in outputs],
        "warnings": warnings,
    }
    if extra:
        doc.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
