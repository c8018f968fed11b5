"""Run manifests, JSON emission and schema checks for CLI output documents."""

from __future__ import annotations

import json

import jsonschema

from .errors import MalformedDocumentError

_NUMBER = {"type": "number"}
_INT = {"type": "integer"}
_COMPLEX = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _COMPLEX}}
_STATE = {
    "type": "object",
    "required": ["num_spins", "amplitudes"],
    "properties": {"num_spins": _INT, "amplitudes": {"type": "array", "items": _COMPLEX}},
}
_FAMILY = {
    "type": "object",
    "required": ["mode", "k", "overlap_allowed", "cap"],
    "properties": {
        "mode": {"enum": ["single", "subsets", "tuples", "explicit"]},
        "k": _INT,
        "overlap_allowed": {"type": "boolean"},
        "cap": _INT,
    },
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["subcommand", "parameters", "seed", "version", "duration_s"],
    "properties": {
        "subcommand": {"type": "string"},
        "parameters": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "version": {"type": "string"},
        "duration_s": {"type": ["number", "null"]},
    },
}


def _doc(kind, required, properties):
    return {
        "type": "object",
        "required": ["kind", "manifest", *required],
        "properties": {"kind": {"const": kind}, "manifest": MANIFEST_SCHEMA, **properties},
    }


SCHEMAS = {
    "signature": _doc("signature", ["num_spins", "convention", "family", "entries"], {
        "num_spins": _INT,
        "convention": {"enum": ["sqrt", "squared"]},
        "family": _FAMILY,
        "entries": {"type": "array", "items": {
            "type": "object",
            "required": ["a", "b", "value"],
            "properties": {"a": {"type": "array", "items": _INT},
                           "b": {"type": "array", "items": _INT}, "value": _NUMBER},
        }},
    }),
    "theorem1": _doc("theorem1", ["num_spins", "trials", "seed", "records", "summary"], {
        "records": {"type": "array", "items": {
            "type": "object", "required": ["trial", "haar_deviation", "control_deviation"]}},
        "summary": {"type": "object", "required": ["fraction_above_threshold", "max_control_deviation", "passed"]},
    }),
    "micromacro": _doc("micromacro", ["config", "rows", "summary"], {
        "rows": {"type": "array", "items": {
            "type": "object",
            "required": ["pair", "row", "convention", "value_phi", "value_phi_prime", "expected", "match"],
        }},
    }),
    "search": _doc("search", ["target", "residual", "state", "restarts"], {
        "state": _STATE,
        "residual": _NUMBER,
        "restarts": {"type": "array", "items": {"type": "object", "required": ["restart", "residual", "trace"]}},
    }),
    "game": _doc("game", ["config", "labs", "postulate1"], {
        "labs": {"type": "array", "items": {
            "type": "object", "required": ["lab", "analytic_p_err", "mc_p_err", "mc_std_err"]}},
        "postulate1": {"type": "object", "required": ["max_spread", "pass"]},
    }),
    "bloch": _doc("bloch", ["state", "spins", "angles"], {"state": _STATE, "spins": {"type": "array"}}),
}


def manifest(subcommand: str, parameters: dict, seed, version: str, duration_s=None) -> dict:
    return {
        "subcommand": subcommand,
        "parameters": parameters,
        "seed": seed,
        "version": version,
        "duration_s": duration_s,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def validate(doc: dict) -> dict:
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind not in SCHEMAS:
        raise MalformedDocumentError(f"unknown report kind {kind!r}")
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise MalformedDocumentError(f"{kind} report does not match its schema: {exc.message}") from None
    return doc


def parse_report(data: bytes | str) -> dict:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocumentError(f"report is not valid JSON: {exc}") from None
    return validate(doc)
