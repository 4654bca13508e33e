"""JSON wire format for symbolic trees.

Primitives map to JSON scalars, sequences to arrays and mappings to objects.
An object node becomes a JSON object with the reserved key ``_type`` holding
its type name plus one key per bound field.  Hyper values use the reserved
key ``_hyper``::

    {"_hyper": "oneof", "candidates": [...], "hints": null}
    {"_hyper": "manyof", "k": 2, "distinct": true, "sorted": true,
     "candidates": [...], "hints": null}
    {"_hyper": "permutate", "candidates": [...], "hints": null}
    {"_hyper": "intv", "min": 1, "max": 8, "hints": null}
    {"_hyper": "floatv", "min": 1e-05, "max": 0.0001, "hints": null}

Serialization is deterministic: equal values produce identical text.
"""

from __future__ import annotations

import json

from .errors import MalformedDocument, ReservedKey, UnknownType
from .hyper import Categorical, FloatRange, IntRange
from .schema import TypeRegistry, new_object
from .values import Mapping, ObjectNode, Primitive, Sequence, SymbolicValue, to_symbolic


def serialize(x) -> str:
    """Render a symbolic value as compact JSON text."""
    return json.dumps(to_json_obj(to_symbolic(x)), separators=(",", ":"))


def to_json_obj(node: SymbolicValue):
    if isinstance(node, Primitive):
        return node.value
    if isinstance(node, Sequence):
        return [to_json_obj(c) for c in node]
    if isinstance(node, Mapping):
        return {k: to_json_obj(v) for k, v in node.items()}
    if isinstance(node, ObjectNode):
        doc = {"_type": node.type_name}
        for segment, child in node.child_items():
            doc[segment.key] = to_json_obj(child)
        return doc
    if isinstance(node, Categorical):
        doc = {"_hyper": _categorical_form(node)}
        if doc["_hyper"] == "manyof":
            doc.update(k=node.k, distinct=node.distinct, sorted=node.sorted)
        doc["candidates"] = [to_json_obj(c) for c in node.candidates]
        doc["hints"] = node.hints
        return doc
    if isinstance(node, IntRange):
        return {"_hyper": "intv", "min": node.min, "max": node.max, "hints": node.hints}
    if isinstance(node, FloatRange):
        return {"_hyper": "floatv", "min": node.min, "max": node.max, "hints": node.hints}
    raise TypeError(f"cannot serialize {type(node).__name__}")


def _categorical_form(node: Categorical) -> str:
    if node.k == 1:
        return "oneof"
    if node.k == node.num_candidates and node.distinct and not node.sorted:
        return "permutate"
    return "manyof"


def deserialize(text: str, registry: TypeRegistry | None = None) -> SymbolicValue:
    """Parse JSON text back into a symbolic value.

    Object documents require their types registered; a missing registry only
    supports plain trees and hyper values.
    """
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None
    return from_json_obj(doc, registry)


def _reject_constant(name):
    raise MalformedDocument(f"non-finite number {name!r} not allowed")


def from_json_obj(doc, registry: TypeRegistry | None = None) -> SymbolicValue:
    if isinstance(doc, (bool, int, float, str)) or doc is None:
        return Primitive(doc)
    if isinstance(doc, list):
        return Sequence([from_json_obj(item, registry) for item in doc])
    if not isinstance(doc, dict):
        raise MalformedDocument(f"unsupported JSON value {doc!r}")
    if "_hyper" in doc:
        return _hyper_from_json(doc, registry)
    if "_type" in doc:
        return _object_from_json(doc, registry)
    try:
        return Mapping({k: from_json_obj(v, registry) for k, v in doc.items()})
    except ReservedKey:
        raise
    except ValueError as exc:
        raise MalformedDocument(str(exc)) from None


def _object_from_json(doc, registry):
    type_name = doc["_type"]
    if not isinstance(type_name, str):
        raise MalformedDocument(f"_type must be text, got {type_name!r}")
    if registry is None:
        raise UnknownType(f"type {type_name!r} is not registered")
    type_def = registry.resolve(type_name)
    fields = {}
    for key, value in doc.items():
        if key == "_type":
            continue
        if type_def.param(key) is None:
            raise MalformedDocument(f"{type_name} has no field {key!r}")
        fields[key] = from_json_obj(value, registry)
    return new_object(type_def, **fields)


def _hyper_from_json(doc, registry):
    kind = doc.get("_hyper")
    hints = doc.get("hints")
    if hints is not None and not isinstance(hints, str):
        raise MalformedDocument(f"hints must be text or null, got {hints!r}")
    try:
        if kind in ("oneof", "manyof", "permutate"):
            candidates = [from_json_obj(c, registry) for c in doc["candidates"]]
            if kind == "oneof":
                return Categorical(1, candidates, hints=hints)
            if kind == "permutate":
                return Categorical(len(candidates), candidates, distinct=True,
                                   sorted=False, hints=hints)
            return Categorical(int(doc["k"]), candidates,
                               distinct=bool(doc.get("distinct", True)),
                               sorted=bool(doc.get("sorted", False)), hints=hints)
        if kind == "intv":
            return IntRange(int(doc["min"]), int(doc["max"]), hints=hints)
        if kind == "floatv":
            return FloatRange(float(doc["min"]), float(doc["max"]), hints=hints)
    except KeyError as exc:
        raise MalformedDocument(f"hyper document missing key {exc}") from None
    raise MalformedDocument(f"unknown hyper kind {kind!r}")
