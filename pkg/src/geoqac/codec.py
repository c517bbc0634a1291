"""JSON interchange format for circuits."""

from __future__ import annotations

import json
from typing import Any

import jsonschema

from .circuit import Circuit, CircuitError, Layer, Layout, MultiCZGate, SingleQubitGate

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["layout", "inputs", "ancilla", "layers"],
    "properties": {
        "layout": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "n"],
            "properties": {
                "kind": {"enum": ["all_to_all", "line", "lattice"]},
                "n": {"type": "integer", "minimum": 1},
                "rows": {"type": "integer", "minimum": 1},
            },
        },
        "inputs": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "ancilla": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["q", "init"],
                "properties": {
                    "q": {"type": "integer", "minimum": 0},
                    "init": {"enum": ["zero", "one"]},
                },
            },
        },
        "layers": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["singles", "czs"],
                "properties": {
                    "singles": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["q", "u"],
                            "properties": {
                                "q": {"type": "integer", "minimum": 0},
                                "u": {"type": "array", "items": _COMPLEX, "minItems": 4, "maxItems": 4},
                            },
                        },
                    },
                    "czs": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                    },
                },
            },
        },
        "restriction_report": {"type": "object"},
        "reports": {"type": "array", "items": {"type": "object"}},
    },
}


class SchemaError(CircuitError):
    """Interchange document does not match the schema."""

    def __init__(self, path: str, message: str):
        super().__init__(f"schema error at {path}: {message}")
        self.path = path


def circuit_to_dict(c: Circuit) -> dict[str, Any]:
    layout: dict[str, Any] = {"kind": c.layout.kind, "n": c.layout.n}
    if c.layout.kind == "lattice":
        layout["rows"] = c.layout.rows
    return {
        "layout": layout,
        "inputs": list(c.inputs),
        "ancilla": [{"q": q, "init": init} for q, init in c.ancilla],
        "layers": [
            {
                "singles": [{"q": g.target, "u": [[z.real, z.imag] for z in g.u]} for g in layer.singles],
                "czs": [list(g.support) for g in layer.czs],
            }
            for layer in c.layers
        ],
    }


def _path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        missing = err.message.split("'")[1] if "'" in err.message else "?"
        parts.append(missing)
    elif err.validator == "additionalProperties":
        extra = err.message.split("'")[1] if "'" in err.message else "?"
        parts.append(extra)
    return "/".join(parts) or "<root>"


def circuit_from_dict(doc: dict[str, Any]) -> Circuit:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise SchemaError(_path(e), e.message)
    lay = doc["layout"]
    if lay["kind"] == "lattice":
        if "rows" not in lay:
            raise SchemaError("layout/rows", "lattice layout requires rows")
        layout = Layout.lattice(lay["rows"], lay["n"])
    else:
        if lay.get("rows", 1) != 1:
            raise SchemaError("layout/rows", f"{lay['kind']} layout has one row")
        layout = Layout(lay["kind"], lay["n"])
    layers = tuple(
        Layer(
            tuple(SingleQubitGate.of(s["q"], [[complex(*s["u"][0]), complex(*s["u"][1])],
                                              [complex(*s["u"][2]), complex(*s["u"][3])]])
                  for s in L["singles"]),
            tuple(MultiCZGate.of(sup) for sup in L["czs"]),
        )
        for L in doc["layers"]
    )
    return Circuit(
        layout,
        tuple(doc["inputs"]),
        tuple((a["q"], a["init"]) for a in doc["ancilla"]),
        layers,
    )


def dumps(c: Circuit, **extra: Any) -> str:
    doc = circuit_to_dict(c)
    doc.update(extra)
    return json.dumps(doc, indent=1)


def loads(data: str | bytes) -> Circuit:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "top level must be an object")
    return circuit_from_dict(doc)


def codec_roundtrip(obj: Circuit | str | bytes) -> bytes | Circuit:
    """Serialize a circuit to UTF-8 bytes, or parse bytes back to a circuit."""
    if isinstance(obj, Circuit):
        return dumps(obj).encode("utf-8")
    return loads(obj)


def save(c: Circuit, path, **extra: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(c, **extra))


def load(path) -> Circuit:
    with open(path, "rb") as fh:
        return loads(fh.read())
