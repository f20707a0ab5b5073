"""CSV/JSON artifact helpers shared by the command-line tools.

CSV: comma separated, '.' decimal, mandatory header row, UTF-8.
JSON and CSV numbers carry 12 significant digits.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import InvalidInput

SIG_DIGITS = 12
FLOAT_FMT = f"%.{SIG_DIGITS}g"
MANIFEST_NAME = "manifest.json"


def round_sig(x: float) -> float | None:
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj))
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=False) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc})") from None


def write_matrix_csv(path: Path, values: np.ndarray, header: Sequence[str]) -> Path:
    path = Path(path)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    np.savetxt(path, values, delimiter=",", fmt=FLOAT_FMT, header=",".join(header),
               comments="", encoding="utf-8")
    return path


def read_matrix_csv(path: Path) -> tuple[np.ndarray, list[str]]:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
    if not header:
        raise InvalidInput(f"{path}: empty file or missing header")
    try:
        values = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, encoding="utf-8")
    except ValueError as exc:
        raise InvalidInput(f"{path}: could not parse CSV ({exc})") from None
    names = header.split(",")
    if values.size and values.shape[1] != len(names):
        raise InvalidInput(f"{path}: header has {len(names)} columns, data has {values.shape[1]}")
    return values, names


def write_rows_csv(path: Path, rows: Sequence[dict], columns: Sequence[str]) -> Path:
    path = Path(path)
    lines = [",".join(columns)]
    for r in rows:
        cells = []
        for c in columns:
            v = r[c]
            if isinstance(v, (float, np.floating)):
                cells.append(FLOAT_FMT % v)
            elif v is None:
                cells.append("")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    version: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def write(self, out_dir: Path) -> Path:
        payload = {
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "version": self.version,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_time_seconds": time.perf_counter() - self.started,
        }
        return write_json(Path(out_dir) / MANIFEST_NAME, payload)
