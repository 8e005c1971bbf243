"""Report assembly: deterministic JSON records plus CSV traces.

A report echoes its scenario, carries predictions/fits/verdicts, and is
byte-identical across runs for the same config and build once the timing
block is stripped (timing is the one legitimately nondeterministic field;
`canonical_bytes` excludes it and is what golden tests compare).
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any, Optional

from . import __version__

SCHEMA_VERSION = "blowuplab.report.v1"


def _plain(obj):
    """Recursively coerce numpy scalars/arrays and tuples into JSON types."""
    import numpy as np
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and obj != obj:  # NaN -> null for valid JSON
        return None
    return obj


@dataclass
class Verdict:
    name: str
    passed: Any          # True | False | "warn"
    value: float = None
    target: float = None
    tol: float = None
    note: str = ""

    def __post_init__(self):
        if not isinstance(self.passed, str):
            self.passed = bool(self.passed)  # numpy bools break identity checks

    def row(self):
        return _plain({"name": self.name, "passed": self.passed,
                       "value": self.value, "target": self.target,
                       "tol": self.tol, "note": self.note})


@dataclass
class Report:
    command: str
    scenario: dict
    input_sha256: str = ""
    predictions: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def add_verdict(self, *args, **kw):
        self.verdicts.append(Verdict(*args, **kw))

    @property
    def all_passed(self) -> bool:
        return all(v.passed is True or v.passed == "warn" for v in self.verdicts)

    def as_dict(self) -> dict:
        return _plain({
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "artifact_version": __version__,
            "input_sha256": self.input_sha256,
            "scenario": self.scenario,
            "predictions": self.predictions,
            "fits": self.fits,
            "verdicts": [v.row() for v in self.verdicts],
            "notes": self.notes,
            "timing": self.timing,
        })

    def canonical_bytes(self) -> bytes:
        doc = self.as_dict()
        doc.pop("timing", None)
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()

    def write(self, out_dir: str, stem: str = "report") -> str:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"{stem}.json")
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        return path

    def print_verdicts(self):
        for v in self.verdicts:
            tag = {True: "PASS", False: "FAIL", "warn": "WARN"}.get(v.passed, "????")
            extra = ""
            if v.value is not None and v.target is not None:
                extra = f"  value={v.value:.8g} target={v.target:.8g} tol={v.tol:.3g}"
            print(f"[{tag}] {v.name}{extra}")


def input_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_trace(out_dir: str, name: str, columns: dict) -> str:
    """CSV trace with the given named columns (equal lengths)."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    keys = list(columns)
    rows = zip(*(columns[k] for k in keys))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
    return path
