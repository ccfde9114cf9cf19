"""JSON report layout shared by every CLI command."""
from __future__ import annotations

import json
from datetime import datetime, timezone

from . import __version__

VOLATILE_KEYS = ("timestamp", "timing_ms")

_run_properties = {
    "seed": {"type": ["integer", "null"]},
    "verdict": {"type": "string"},
    "dimensions": {"type": "object", "additionalProperties": {"type": "integer"}},
    "bases": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
    "certificates": {"type": "array", "items": {"type": "object"}},
    "result": {"type": "object"},
    "timing_ms": {"type": ["number", "object"]},
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "pullback-poisson report",
    "type": "object",
    "required": ["command", "config", "verdict", "dimensions", "bases", "certificates",
                 "timing_ms", "version", "seed", "timestamp", "result", "error"],
    "properties": {
        "command": {"type": "string"},
        "config": {"type": "object"},
        "verdict": {"type": "string"},
        "dimensions": _run_properties["dimensions"],
        "bases": _run_properties["bases"],
        "certificates": _run_properties["certificates"],
        "result": _run_properties["result"],
        "timing_ms": _run_properties["timing_ms"],
        "version": {"type": "string"},
        "seed": {"type": ["integer", "array", "null"], "items": {"type": "integer"}},
        "timestamp": {"type": "string"},
        "error": {"type": ["string", "null"]},
        "runs": {
            "type": "array",
            "items": {"type": "object", "required": list(_run_properties), "properties": _run_properties},
        },
    },
    "additionalProperties": False,
}


def make_report(command: str, config: dict, verdict: str, *, dimensions=None, bases=None,
                certificates=None, result=None, timing_ms=0.0, seed=None, error=None, runs=None) -> dict:
    rep = {
        "command": command,
        "config": config,
        "verdict": verdict,
        "dimensions": dimensions or {},
        "bases": bases or {},
        "certificates": certificates or [],
        "result": result or {},
        "timing_ms": timing_ms,
        "version": __version__,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "error": error,
    }
    if runs is not None:
        rep["runs"] = runs
    return rep


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def strip_volatile(report: dict) -> dict:
    """Copy of the report without timestamp and timings, for reproducibility checks."""
    out = {k: v for k, v in report.items() if k not in VOLATILE_KEYS}
    if "runs" in out:
        out["runs"] = [{k: v for k, v in r.items() if k not in VOLATILE_KEYS} for r in out["runs"]]
    return out


def validate_report(report: dict) -> None:
    import jsonschema

    jsonschema.validate(report, REPORT_SCHEMA)
