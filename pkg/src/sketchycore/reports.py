"""Machine-readable run reports and their JSON schemas."""

from __future__ import annotations

import dataclasses
import json
import math
import statistics
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

SCHEMA_VERSION = "1.0"


def _trial_stats(values) -> dict:
    values = [float(v) for v in values]
    return {
        "mean": statistics.fmean(values),
        "std": statistics.stdev(values) if len(values) > 1 else 0.0,
        "values": values,
    }


@dataclass
class RunReport:
    """One method run ``trials`` times on one matrix."""

    method: str
    config: dict
    trials: int
    errors: list[float]
    times: list[dict]
    shape: tuple[int, int]
    optimal_err: float | None = None
    incoherence: dict | None = None
    theory: dict | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        # baselines only report a total
        phases = [ph for ph in ("sketch", "qr", "core", "truncate", "total") if self.times and ph in self.times[0]]
        mean_times = {ph: statistics.fmean(t[ph] for t in self.times) for ph in phases}
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "run",
            "method": self.method,
            "shape": list(self.shape),
            "config": self.config,
            "trials": self.trials,
            "err": _trial_stats(self.errors),
            "optimal_err": self.optimal_err,
            "times": mean_times,
            "incoherence": self.incoherence,
            "theory": self.theory,
            "warnings": sorted(set(self.warnings)),
        }


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    return obj


def dumps(payload) -> str:
    """JSON text with infinities written as the strings ``"inf"``/``"-inf"``."""
    return json.dumps(_jsonable(payload), indent=2, allow_nan=False)


def load_schema(name: str) -> dict:
    """One of ``run``, ``compare``, ``verify``."""
    text = resources.files("sketchycore.schemas").joinpath(f"{name}_report.schema.json").read_text()
    return json.loads(text)
