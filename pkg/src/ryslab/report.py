"""Machine-readable check reports.

A report is a JSON document with the tool version, an echo of the run
configuration, one record per check (worst sampled point attached), and
summary counts.  Serialization is canonical: sorted keys, round-trip
float formatting, a trailing newline, and no volatile fields (wall time
is reported on the console, never in the file), so identical
(config, seed, version) runs produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional

VERSION = "0.1.0"


@dataclass(frozen=True)
class RunConfig:
    """Echo of one run's inputs; serialized verbatim into the report."""

    command: str
    cases: tuple[str, ...] = ()
    alpha: Optional[float] = None
    beta: Optional[float] = None
    lam: Optional[float] = None
    mu: Optional[float] = None
    points: int = 0
    seed: int = 0
    tolerances: Optional[dict] = None
    resolution: Optional[int] = None
    divergence_checks: Optional[int] = None
    out: str = ""

    def to_echo(self) -> dict:
        echo = {
            "cases": list(self.cases),
            "alpha": self.alpha,
            "beta": self.beta,
            "lambda": self.lam,
            "mu": self.mu,
            "points": self.points,
            "seed": self.seed,
            "out": self.out,
        }
        if self.tolerances is not None:
            echo["tolerances"] = {k: self.tolerances[k] for k in sorted(self.tolerances)}
        if self.resolution is not None:
            echo["resolution"] = self.resolution
        if self.divergence_checks is not None:
            echo["divergence_checks"] = self.divergence_checks
        return echo


@dataclass
class CheckRecord:
    name: str
    anchor: str
    point: Optional[list]
    lhs: float
    rhs: float
    gap: float
    tol: float
    verdict: str  # "pass" | "fail"

    @classmethod
    def build(cls, name, anchor, point, lhs, rhs, gap, tol) -> "CheckRecord":
        return cls(
            name=name,
            anchor=anchor,
            point=None if point is None else [float(c) for c in point],
            lhs=float(lhs),
            rhs=float(rhs),
            gap=float(gap),
            tol=float(tol),
            verdict="pass" if float(gap) <= float(tol) else "fail",
        )

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


@dataclass
class CheckReport:
    command: str
    config: dict
    records: list[CheckRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    version: str = VERSION
    wall_time_s: float = 0.0   # console-only; excluded from the file

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    def warn(self, message: str) -> None:
        if message not in self.warnings:
            self.warnings.append(message)

    @property
    def summary(self) -> dict:
        passed = sum(1 for r in self.records if r.passed)
        return {
            "pass": passed,
            "fail": len(self.records) - passed,
            "total": len(self.records),
        }

    @property
    def all_passed(self) -> bool:
        return self.summary["fail"] == 0

    def to_payload(self) -> dict:
        return {
            "version": self.version,
            "command": self.command,
            "config": self.config,
            "records": [
                {
                    "name": r.name,
                    "anchor": r.anchor,
                    "point": r.point,
                    "lhs": r.lhs,
                    "rhs": r.rhs,
                    "gap": r.gap,
                    "tol": r.tol,
                    "verdict": r.verdict,
                }
                for r in self.records
            ],
            "warnings": list(self.warnings),
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2) + "\n"


def write_report(report: CheckReport, path: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(report.to_json())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
