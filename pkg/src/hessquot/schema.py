"""JSON schema for every report printed by the command-line tool."""

_number_or_null = {"type": ["number", "null"]}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hessquot report",
    "type": "object",
    "required": ["tool_version", "command", "params", "summary"],
    "additionalProperties": False,
    "properties": {
        "tool_version": {"type": "string"},
        "command": {
            "enum": ["verify", "estimate-eps", "counterexample", "identities", "oc-check", "glz-check", "jacobi"]
        },
        "timestamp": {"type": "string"},
        "params": {"type": "object"},
        "summary": {
            "type": "object",
            "required": ["passed"],
            "properties": {"passed": {"type": "boolean"}},
        },
        "witness": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "properties": {
                        "lam": {"type": "array", "items": {"type": "number"}},
                        "w": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                        "xi": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                        "index": {"type": "array", "items": {"type": "integer"}},
                        "coords": {"type": "array", "items": {"type": "number"}},
                    },
                },
            ]
        },
    },
    "$defs": {"number_or_null": _number_or_null},
}
