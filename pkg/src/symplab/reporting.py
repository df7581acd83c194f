"""Deterministic report and artifact writers.

All delimited artifacts use LF line endings, '.' decimal separators and 12
significant digits; report.json is byte-identical for identical config,
seed and version (wall-clock timing goes to a run_meta.json sidecar, which
is excluded from the determinism contract).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from . import __version__


def fmt(value) -> str:
    """12-significant-digit, locale-independent number formatting."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return f"{value:.12g}"


def write_text(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v for v in row))
    write_text(path, "\n".join(lines) + "\n")


def write_json(path: str, payload: dict) -> None:
    write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


@dataclass
class Check:
    """One acceptance check with its tolerance, auditable from the artifact."""

    name: str
    passed: bool
    detail: str
    tolerance: str = ""

    def to_jsonable(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "detail": self.detail, "tolerance": self.tolerance}


@dataclass
class ExperimentReport:
    """Assembled results of one experiment run."""

    experiment: str
    config: dict
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_check(self, name: str, passed: bool, detail: str, tolerance: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail, tolerance))

    def to_jsonable(self) -> dict:
        return {
            "experiment": self.experiment,
            "tool_version": __version__,
            "config": {k: self.config[k] for k in sorted(self.config)},
            "results": self.results,
            "checks": [c.to_jsonable() for c in self.checks],
            "all_passed": self.all_passed,
            "artifacts": sorted(self.artifacts),
        }

    def write(self, out_dir: str) -> str:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "report.json")
        write_json(path, self.to_jsonable())
        write_json(os.path.join(out_dir, "run_meta.json"),
                   {"wall_clock_seconds": round(self.wall_clock, 3)})
        return path

    def print_summary(self) -> None:
        print(f"experiment: {self.experiment}")
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            tol = f" [{c.tolerance}]" if c.tolerance else ""
            print(f"  {mark}  {c.name}: {c.detail}{tol}")
        print(f"  => {'all checks passed' if self.all_passed else 'CHECK FAILURES PRESENT'} "
              f"({self.wall_clock:.1f}s)")
