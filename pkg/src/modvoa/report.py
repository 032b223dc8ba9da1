"""Structured, deterministic verification reports.

A report is rendered as JSON with sorted keys, two-space indentation and
no floating point values, so that identical campaigns produce identical
bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction


def plain(obj):
    """Convert nested data into JSON-safe values (Fractions become strings)."""
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        raise TypeError("reports must not contain floating point values")
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if hasattr(obj, "to_document"):
        return plain(obj.to_document())
    return str(obj)


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    witness: object = None

    def to_document(self):
        doc = {"name": self.name, "passed": self.passed}
        if self.detail:
            doc["detail"] = self.detail
        if self.witness is not None:
            doc["witness"] = self.witness
        return doc


@dataclass
class Report:
    command: str
    params: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    timings: dict | None = None

    def check(self, name, passed, witness=None, **detail) -> Check:
        c = Check(name, bool(passed), detail, witness)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_document(self):
        doc = {
            "command": self.command,
            "params": self.params,
            "checks": sorted((c.to_document() for c in self.checks),
                             key=lambda d: d["name"]),
            "tables": self.tables,
            "passed": self.passed,
        }
        if self.timings is not None:
            doc["timings_ms"] = self.timings
        return doc

    def render(self) -> str:
        return dumps(self.to_document())

    def digest(self) -> str:
        return hashlib.sha256(self.render().encode()).hexdigest()


def dumps(doc) -> str:
    return json.dumps(plain(doc), sort_keys=True, indent=2) + "\n"
