"""JSON-schema validation of emitted reports."""
from __future__ import annotations

import json
from pathlib import Path

from jsonschema import Draft202012Validator

from .errors import ReportParseError

CHECK = {
    "type": "object",
    "required": ["name", "value", "relation", "threshold", "passed"],
    "properties": {
        "name": {"type": "string"},
        "value": {"type": ["number", "boolean", "null"]},
        "relation": {"enum": ["<=", ">=", "in", "true"]},
        "threshold": {},
        "passed": {"type": "boolean"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["meta", "params", "thresholds", "checks", "results", "passed"],
    "properties": {
        "meta": {
            "type": "object",
            "required": ["name", "hash", "seed", "threads", "version"],
            "properties": {
                "name": {"type": "string", "minLength": 1},
                "hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                "seed": {"type": "integer", "minimum": 0},
                "threads": {"type": "integer", "minimum": 1},
                "preset_version": {"type": "integer", "minimum": 1},
                "version": {"type": "string"},
            },
        },
        "params": {"type": "object"},
        "thresholds": {"type": "object"},
        "checks": {"type": "array", "items": CHECK},
        "results": {"type": "object"},
        "artifacts": {"type": "array", "items": {"type": "string"}},
        "passed": {"type": "boolean"},
    },
}

_VALIDATOR = Draft202012Validator(REPORT_SCHEMA)


def _pointer(parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def report_violations(report) -> list[tuple[str, str]]:
    """(JSON pointer, message) for every schema violation, sorted by pointer."""
    out = []
    for err in _VALIDATOR.iter_errors(report):
        path = list(err.absolute_path)
        if err.validator == "required" and isinstance(err.instance, dict):
            for name in err.validator_value:
                if name not in err.instance:
                    out.append((_pointer(path + [name]), f"missing required property {name!r}"))
            continue
        out.append((_pointer(path), err.message))
    return sorted(out)


def report_schema_validate(path) -> list[tuple[str, str]]:
    """Validate a report file; an empty list means the report is ok.

    Unreadable or truncated JSON raises ReportParseError.
    """
    text = Path(path).read_text()
    try:
        report = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportParseError(f"{path}: cannot parse report ({exc})") from exc
    return report_violations(report)
