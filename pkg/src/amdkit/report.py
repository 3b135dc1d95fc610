"""Structured pass/fail records shared by every check."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


def _clean(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    try:
        return _clean(x.item())
    except AttributeError:
        return str(x)


@dataclass
class Report:
    check: str
    scene: str = ""
    status: str = "pass"  # pass | fail | warn
    metrics: dict = field(default_factory=dict)
    seed: int | None = None
    samples: int | None = None
    duration_ms: float | None = None
    notes: list = field(default_factory=list)

    def metric(self, name, value, tolerance=None):
        self.metrics[name] = {"value": _clean(value), "tolerance": _clean(tolerance)}

    def info(self, name, value):
        self.metric(name, value, None)

    def note(self, text):
        self.notes.append(str(text))

    def value(self, name):
        return self.metrics[name]["value"]

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def fail_unless(self, cond: bool):
        if not cond:
            self.status = "fail"
        return cond

    def merge(self, other: "Report", prefix: str):
        for k, v in other.metrics.items():
            self.metrics[f"{prefix}.{k}"] = v
        self.notes.extend(f"{prefix}: {n}" for n in other.notes)
        if other.status == "fail":
            self.status = "fail"
        elif other.status == "warn" and self.status == "pass":
            self.status = "warn"

    def to_dict(self):
        return {
            "scene": self.scene,
            "check": self.check,
            "status": self.status,
            "metrics": _clean(self.metrics),
            "seed": self.seed,
            "samples": self.samples,
            "duration_ms": self.duration_ms,
            "notes": list(self.notes),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self):
        lines = [f"[{self.status.upper()}] {self.scene} :: {self.check}"]
        for name, m in self.metrics.items():
            tol = "" if m["tolerance"] is None else f"  (tol {m['tolerance']})"
            lines.append(f"  {name} = {m['value']}{tol}")
        if self.seed is not None:
            lines.append(f"  seed = {self.seed}, samples = {self.samples}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)
