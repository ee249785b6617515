"""Verdict-carrying reports with stable JSON serialization."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from ._rational import frac_str

PASS = "PASS"
VIOLATION = "VIOLATION"
INCONCLUSIVE = "INCONCLUSIVE"

EXIT_CODES = {PASS: 0, VIOLATION: 1, INCONCLUSIVE: 2}


@dataclass
class Report:
    command: str
    verdict: str = INCONCLUSIVE
    inputs: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    seed: int | None = None
    settings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    wall_time: float = 0.0

    def __post_init__(self):
        if self.verdict not in EXIT_CODES:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "verdict": self.verdict,
            "inputs": to_jsonable(self.inputs),
            "witnesses": to_jsonable(self.witnesses),
            "metrics": to_jsonable(self.metrics),
            "seed": self.seed,
            "settings": to_jsonable(self.settings),
            "notes": list(self.notes),
            "wall_time": round(self.wall_time, 6),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    def write(self, path) -> None:
        path = Path(path)
        try:
            path.write_text(self.to_json() + "\n")
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc


def to_jsonable(obj: Any) -> Any:
    """Convert rationals to ``"num/den"``, numpy scalars to Python, tuples to lists."""
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return repr(x)
        return x  # json uses the shortest round-trip repr
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if hasattr(obj, "_asdict"):
        return to_jsonable(obj._asdict())
    if hasattr(obj, "__dataclass_fields__"):
        return {k: to_jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__ if not k.startswith("_")}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_csv(path, header, rows) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([to_jsonable(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
