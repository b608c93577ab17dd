"""
Report containers and their JSON / CSV serialization.

JSON layout (``schema_version`` 1)::

    {
      "schema_version": 1,
      "tool_version": "0.1.0",
      "config": {"tracker": {...} | null, "metrics": {...}, "frontend": {...},
                 "segment_seconds": 10.24 | null, "beats_from": "tracker" | "files"},
      "tracks": ["bass", "drums", ...],
      "irs": {"<track>": {"value": float | null, "n_used": int, "n_skipped": int}},
      "cbs": {"value": float | null, "n_used": int, "n_skipped": int},
      "cbd": {"mean": float, "std": float, "median": float, "n": int} | null,
      "histogram": {"edges": [0.0, 0.05, ..., 1.0], "counts": [int] * 20},
      "samples": [{"sample_id": str, "status": "ok" | "failed", "error": str | null,
                   "beat_counts": {track: int}, "ibi_std": {track: float | null},
                   "cbs": float | null, "cbd_errors": [float]}],
      "n_failed": int
    }

Floats are written with ``repr`` precision, so parsing a report back gives an
equal object.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import __version__

__all__ = [
    "SCHEMA_VERSION",
    "HISTOGRAM_EDGES",
    "SampleRow",
    "MetricsReport",
    "SweepReport",
    "error_histogram",
    "emit",
    "load_report",
    "load_sweep",
    "recompute_aggregates",
]

SCHEMA_VERSION = 1
HISTOGRAM_EDGES = [round(0.05 * i, 2) for i in range(21)]


def error_histogram(errors) -> Dict[str, list]:
    counts, _ = np.histogram(np.asarray(errors, dtype=float), bins=HISTOGRAM_EDGES)
    return {"edges": list(HISTOGRAM_EDGES), "counts": [int(c) for c in counts]}


@dataclass
class SampleRow:
    sample_id: str
    status: str = "ok"
    error: Optional[str] = None
    beat_counts: Dict[str, int] = field(default_factory=dict)
    ibi_std: Dict[str, Optional[float]] = field(default_factory=dict)
    cbs: Optional[float] = None
    cbd_errors: List[float] = field(default_factory=list)


@dataclass
class MetricsReport:
    config: dict
    tracks: List[str]
    irs: Dict[str, dict]
    cbs: dict
    cbd: Optional[dict]
    histogram: dict
    samples: List[SampleRow]
    n_failed: int = 0
    schema_version: int = SCHEMA_VERSION
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "config": self.config,
            "tracks": list(self.tracks),
            "irs": self.irs,
            "cbs": self.cbs,
            "cbd": self.cbd,
            "histogram": self.histogram,
            "samples": [asdict(r) for r in self.samples],
            "n_failed": self.n_failed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')}")
        return cls(
            config=d["config"],
            tracks=list(d["tracks"]),
            irs=d["irs"],
            cbs=d["cbs"],
            cbd=d["cbd"],
            histogram=d["histogram"],
            samples=[SampleRow(**r) for r in d["samples"]],
            n_failed=d["n_failed"],
            schema_version=d["schema_version"],
            tool_version=d["tool_version"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary(self) -> Dict[str, Optional[float]]:
        """Flat metric name -> value map (``irs``, ``irs:<track>``, ``cbs``, ``cbd_*``)."""
        out = {}
        irs_vals = [self.irs[t]["value"] for t in self.tracks if self.irs[t]["value"] is not None]
        out["irs"] = float(np.mean(irs_vals)) if irs_vals else None
        for t in self.tracks:
            out[f"irs:{t}"] = self.irs[t]["value"]
        out["cbs"] = self.cbs["value"]
        for stat in ("mean", "std", "median"):
            out[f"cbd_{stat}"] = self.cbd[stat] if self.cbd else None
        return out

    def csv_rows(self) -> List[list]:
        header = ["sample_id", "status", "error"]
        header += [f"beats_{t}" for t in self.tracks]
        header += [f"ibi_std_{t}" for t in self.tracks]
        header += ["cbs", "cbd_n", "cbd_mean"]
        rows = [header]
        for r in self.samples:
            row = [r.sample_id, r.status, r.error or ""]
            row += [r.beat_counts.get(t, "") for t in self.tracks]
            row += [_cell(r.ibi_std.get(t)) for t in self.tracks]
            row += [_cell(r.cbs), len(r.cbd_errors), _cell(float(np.mean(r.cbd_errors)) if r.cbd_errors else None)]
            rows.append(row)
        return rows


def _cell(v):
    return "" if v is None else repr(float(v))


@dataclass
class SweepReport:
    grid: List[List[float]]
    methods: List[str]
    cells: Dict[str, Dict[str, Optional[MetricsReport]]]
    failures: Dict[str, Dict[str, str]]
    rankings: Dict[str, Dict[str, List[str]]]
    schema_version: int = SCHEMA_VERSION
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "grid": [list(g) for g in self.grid],
            "methods": list(self.methods),
            "cells": {
                key: {m: (rep.to_dict() if rep is not None else None) for m, rep in cell.items()}
                for key, cell in self.cells.items()
            },
            "failures": self.failures,
            "rankings": self.rankings,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepReport":
        return cls(
            grid=[list(g) for g in d["grid"]],
            methods=list(d["methods"]),
            cells={
                key: {m: (MetricsReport.from_dict(rep) if rep is not None else None) for m, rep in cell.items()}
                for key, cell in d["cells"].items()
            },
            failures=d["failures"],
            rankings=d["rankings"],
            schema_version=d["schema_version"],
            tool_version=d["tool_version"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def emit(report, fmt: str, path) -> None:
    """Write a report as ``json`` or ``csv`` (CSV: one row per sample, MetricsReport only)."""
    path = os.fspath(path)
    if fmt == "json":
        with open(path, "w") as fh:
            fh.write(report.to_json())
            fh.write("\n")
    elif fmt == "csv":
        if not isinstance(report, MetricsReport):
            raise ValueError("CSV output is only defined for MetricsReport")
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(report.csv_rows())
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_report(path) -> MetricsReport:
    with open(os.fspath(path)) as fh:
        return MetricsReport.from_dict(json.load(fh))


def load_sweep(path) -> SweepReport:
    with open(os.fspath(path)) as fh:
        return SweepReport.from_dict(json.load(fh))


def recompute_aggregates(report: MetricsReport) -> dict:
    """Rebuild IRS / CBS / CBD from the per-sample rows alone."""
    ok = [r for r in report.samples if r.status == "ok"]
    out = {"irs": {}}
    for t in report.tracks:
        vals = [r.ibi_std[t] for r in ok if r.ibi_std.get(t) is not None]
        out["irs"][t] = float(np.mean(np.sort(vals))) if vals else None
    cbs_vals = [r.cbs for r in ok if r.cbs is not None]
    out["cbs"] = float(np.mean(np.sort(cbs_vals))) if cbs_vals else None
    pool = np.sort(np.concatenate([np.asarray(r.cbd_errors, dtype=float) for r in ok] or [np.zeros(0)]))
    if pool.size:
        out["cbd"] = {"mean": float(np.mean(pool)), "std": float(np.std(pool)),
                      "median": float(np.median(pool)), "n": int(pool.size)}
    else:
        out["cbd"] = None
    out["histogram"] = error_histogram(pool)
    return out
