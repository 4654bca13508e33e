"""Wire format: documented forms, roundtrips and reserved keys."""

from __future__ import annotations

import json

import pytest

import symsearch as ss
from symsearch.errors import MalformedDocument, ReservedKey, UnknownType
from symsearch.hyper import floatv, intv, manyof, oneof, permutate


def test_dense_wire_form(types):
    assert ss.serialize(types.Dense(10)) == '{"_type":"Dense","units":10}'


def test_scalar_and_container_forms():
    assert ss.serialize(ss.to_symbolic(7)) == "7"
    assert ss.serialize(ss.to_symbolic([1, "a", None, True])) == '[1,"a",null,true]'
    assert ss.serialize(ss.to_symbolic({"b": 2, "a": 1})) == '{"a":1,"b":2}'


def test_hyper_wire_forms():
    assert json.loads(ss.serialize(oneof([1, 2]))) == {
        "_hyper": "oneof", "candidates": [1, 2], "hints": None}
    assert json.loads(ss.serialize(manyof(2, [1, 2, 3], distinct=True, sorted=True))) == {
        "_hyper": "manyof", "k": 2, "distinct": True, "sorted": True,
        "candidates": [1, 2, 3], "hints": None}
    assert json.loads(ss.serialize(permutate([1, 2, 3]))) == {
        "_hyper": "permutate", "candidates": [1, 2, 3], "hints": None}
    assert json.loads(ss.serialize(intv(1, 8))) == {
        "_hyper": "intv", "min": 1, "max": 8, "hints": None}
    assert json.loads(ss.serialize(floatv(1e-5, 1e-4))) == {
        "_hyper": "floatv", "min": 1e-5, "max": 1e-4, "hints": None}


def test_roundtrip_trainer(trainer, types):
    text = ss.serialize(trainer)
    back = ss.deserialize(text, types.registry)
    assert ss.equal(back, trainer)
    # unbound functor fields stay unbound
    assert not back.is_bound("learning_schedule")


def test_roundtrip_space(types):
    space = ss.Mapping({
        "optimizer": oneof([types.Adam(), types.RMSProp(learning_rate=floatv(1e-5, 1e-4))]),
        "model": types.Sequential(children=[
            permutate([types.Conv(oneof([4, 8]), 3), types.BatchNorm(), types.ReLU()]),
        ]),
        "blocks": intv(1, 3),
    })
    assert ss.equal(ss.deserialize(ss.serialize(space), types.registry), space)


def test_equal_implies_same_serialization(types):
    a = types.Dense(units=10)
    b = types.Dense(10)
    assert ss.equal(a, b)
    assert ss.serialize(a) == ss.serialize(b)


def test_roundtrip_random_trees(make_generator):
    gen = make_generator(11)
    for _ in range(40):
        tree = gen.space()
        assert ss.equal(ss.deserialize(ss.serialize(tree)), tree)


def test_unknown_type_rejected(types):
    with pytest.raises(UnknownType):
        ss.deserialize('{"_type":"Mystery","x":1}', types.registry)
    with pytest.raises(UnknownType):
        ss.deserialize('{"_type":"Dense","units":1}')  # no registry at all


def test_malformed_documents(types):
    with pytest.raises(MalformedDocument):
        ss.deserialize("{not json", types.registry)
    with pytest.raises(MalformedDocument):
        ss.deserialize("NaN", types.registry)
    with pytest.raises(MalformedDocument):
        ss.deserialize('{"_type":"Dense","bogus":1}', types.registry)
    with pytest.raises(MalformedDocument):
        ss.deserialize('{"_hyper":"sevenof","candidates":[1]}', types.registry)
    with pytest.raises(MalformedDocument):
        ss.deserialize('{"key with space":1}', types.registry)


def test_reserved_keys_rejected_in_construction():
    with pytest.raises(ReservedKey):
        ss.Mapping({"_type": 1})


def test_serialization_is_canonical(make_generator):
    gen = make_generator(53)
    for _ in range(25):
        tree = gen.space()
        text = ss.serialize(tree)
        assert ss.serialize(ss.clone(tree)) == text
        assert ss.serialize(ss.deserialize(text)) == text
