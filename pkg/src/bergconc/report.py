"""Machine-readable verification reports.

Reports are deterministic: identical configuration and tool version
produce byte-identical JSON bodies (the run id is a configuration hash;
wall-clock timings live in a separate section excluded from the body).
Exact rationals serialize as "num/den" strings, never as floats, and
every float quantity travels next to its error estimate.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .exact import exact_str
from .quadrature import Estimate

PASS = "PASS"
VIOLATION = "VIOLATION"
FINDING = "FINDING"
NON_CONVERGENT = "NON_CONVERGENT"

_VERDICTS = (PASS, VIOLATION, FINDING, NON_CONVERGENT)


def jsonable(x):
    """Recursively convert report values to JSON-safe structures."""
    if isinstance(x, Fraction):
        return exact_str(x)
    if isinstance(x, Estimate):
        return {"value": x.value, "error": x.error}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "_asdict"):  # NamedTuple
        return jsonable(x._asdict())
    return x


@dataclass
class CheckRecord:
    """One verdict-carrying check result."""

    name: str
    params: dict
    verdict: str
    values: dict = field(default_factory=dict)
    detail: str = ""

    def __post_init__(self):
        if self.verdict not in _VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def sort_key(self):
        return (self.name, json.dumps(jsonable(self.params), sort_keys=True))


@dataclass
class VerificationReport:
    command: str
    config: dict
    records: list
    timings: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def run_id(self) -> str:
        payload = json.dumps(
            {"version": self.version, "command": self.command,
             "config": jsonable(self.config)},
            sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @property
    def summary(self) -> dict:
        counts = {v: 0 for v in _VERDICTS}
        for rec in self.records:
            counts[rec.verdict] += 1
        counts["total"] = len(self.records)
        return counts

    def body(self) -> dict:
        """The deterministic part of the report (no timings)."""
        return {
            "run_id": self.run_id,
            "version": self.version,
            "command": self.command,
            "config": jsonable(self.config),
            "checks": [
                {"name": r.name, "params": jsonable(r.params),
                 "verdict": r.verdict, "values": jsonable(r.values),
                 "detail": r.detail}
                for r in sorted(self.records, key=CheckRecord.sort_key)
            ],
            "summary": self.summary,
        }

    def to_json(self, include_timings: bool = True) -> str:
        doc = self.body()
        if include_timings:
            doc["timings"] = jsonable(self.timings)
        return json.dumps(doc, indent=2, sort_keys=True)

    def exit_code(self) -> int:
        s = self.summary
        if s[VIOLATION]:
            return 1
        if s[NON_CONVERGENT]:
            return 2
        return 0


PROFILE_CSV_COLUMNS = ("function", "n", "alpha", "variant",
                       "s", "I_raw", "I_hat", "theta", "margin", "err")


def profile_csv(profile_rows) -> str:
    """CSV with one row per profile sample.

    Each input row is (function_label, n, alpha, variant, sample).
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PROFILE_CSV_COLUMNS)
    for label, n, alpha, variant, smp in profile_rows:
        writer.writerow([
            label, n, alpha, variant,
            repr(float(smp.s)), repr(float(smp.i_raw)), repr(float(smp.i_hat)),
            repr(float(smp.theta)), repr(float(smp.margin)), repr(float(smp.error)),
        ])
    return buf.getvalue()


def records_csv(records) -> str:
    """Flat CSV view of check records (one row per check)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("name", "params", "verdict", "detail"))
    for rec in sorted(records, key=CheckRecord.sort_key):
        writer.writerow((rec.name, json.dumps(jsonable(rec.params), sort_keys=True),
                         rec.verdict, rec.detail))
    return buf.getvalue()
