"""Shared fixtures: a model/trainer type family and random space generators."""

from __future__ import annotations

import itertools
import random
from types import SimpleNamespace

import pytest

import symsearch as ss
from symsearch import schema
from symsearch.hyper import floatv, intv, manyof, oneof
from symsearch.values import Mapping, Primitive, Sequence


@pytest.fixture()
def types():
    """A small layer/trainer vocabulary used across the suite."""
    reg = ss.TypeRegistry()
    ns = SimpleNamespace(registry=reg)
    ns.Identity = reg.register(ss.TypeDef("Identity", []))
    ns.MaxPool = reg.register(ss.TypeDef("MaxPool", [ss.Param("size", schema.Int(min=1))]))
    ns.Conv = reg.register(ss.TypeDef("Conv", [
        ss.Param("filters", schema.Int(min=1)),
        ss.Param("kernel_size", schema.Any()),
    ]))
    ns.Dense = reg.register(ss.TypeDef("Dense", [ss.Param("units", schema.Int(min=1))]))
    ns.BatchNorm = reg.register(ss.TypeDef("BatchNorm", []))
    ns.ReLU = reg.register(ss.TypeDef("ReLU", []))
    ns.Sequential = reg.register(ss.TypeDef("Sequential", [
        ss.Param("children", schema.ListOf(schema.Any())),
    ]))
    ns.Adam = reg.register(ss.TypeDef("Adam", [
        ss.Param("learning_rate", schema.Float(min=0), 1e-3),
    ]))
    ns.RMSProp = reg.register(ss.TypeDef("RMSProp", [
        ss.Param("learning_rate", schema.Float(min=0)),
    ]))
    ns.CosineDecay = reg.register(ss.TypeDef("CosineDecay", [
        ss.Param("learning_rate", schema.Float(min=0)),
        ss.Param("steps", schema.Int(min=1)),
    ]))
    ns.random_augment = reg.register(ss.TypeDef(
        "random_augment",
        [ss.Param("magnitude", schema.Int(min=0))],
        impl=lambda magnitude: ("augmented", magnitude),
    ))
    ns.train_model = reg.register(ss.TypeDef(
        "train_model",
        [
            ss.Param("model", schema.ObjectOf("Sequential")),
            ss.Param("augment_policy", schema.ObjectOf("random_augment")),
            ss.Param("learning_schedule", schema.ObjectOf("CosineDecay")),
        ],
        impl=lambda model, augment_policy, learning_schedule: 0.9,
    ))
    return ns


@pytest.fixture()
def trainer(types):
    """The operation-transcript object: a trainer over a two-layer model."""
    model = types.Sequential(children=[
        types.Conv(filters=8, kernel_size=(3, 3)),
        types.Dense(units=10),
    ])
    return types.train_model(augment_policy=types.random_augment(magnitude=8)).bind(model=model)


class SpaceGenerator:
    """Random conditional spaces whose DNAs materialize to pairwise-distinct
    programs (every categorical candidate carries a unique tag)."""

    def __init__(self, rng: random.Random, with_hints: bool = False, max_depth: int = 3):
        self.rng = rng
        self.with_hints = with_hints
        self.max_depth = max_depth
        self._tags = itertools.count()

    def tag(self) -> int:
        return next(self._tags)

    def hint(self):
        if not self.with_hints:
            return None
        return self.rng.choice(["a", "b", None])

    def space(self, depth: int = 0):
        roll = self.rng.random()
        if depth >= self.max_depth or roll < 0.2:
            return Primitive(self.tag())
        if roll < 0.4:
            return Sequence([self.space(depth + 1) for _ in range(self.rng.randint(1, 3))])
        if roll < 0.5:
            return Mapping({f"k{i}": self.space(depth + 1)
                            for i in range(self.rng.randint(1, 2))})
        if roll < 0.6:
            lo = self.tag() * 10
            return intv(lo, lo + self.rng.randint(0, 3), hints=self.hint())
        if roll < 0.75:
            return oneof([self.candidate(depth) for _ in range(self.rng.randint(2, 3))],
                         hints=self.hint())
        n = self.rng.randint(2, 3)
        distinct = self.rng.random() < 0.5
        k = self.rng.randint(1, n if distinct else 3)
        return manyof(k, [self.candidate(depth) for _ in range(n)],
                      distinct=distinct, sorted=self.rng.random() < 0.5,
                      hints=self.hint())

    def candidate(self, depth: int):
        return Sequence([Primitive(self.tag()), self.space(depth + 1)])

    def finite_space(self, max_size: int = 10_000, min_size: int = 2):
        while True:
            root = self.space()
            size = ss.space_size(root)
            if size != ss.INFINITE and min_size <= size <= max_size:
                return root

    def continuous_candidate(self, depth: int = 0):
        return floatv(0.0, float(self.rng.randint(1, 5)), hints=self.hint())


@pytest.fixture()
def make_generator():
    def factory(seed: int, **kwargs) -> SpaceGenerator:
        return SpaceGenerator(random.Random(seed), **kwargs)
    return factory
