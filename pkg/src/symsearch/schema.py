"""Field constraints and the type registry.

A ValueSpec constrains one field of a registered type: its kind plus an
optional range.  Specs are checked when an object is constructed and again on
every rebind that touches the field.  A spec accepts a hyper value only when
every possible materialization of that node would be accepted, so search
spaces can never materialize into an invalid program.
"""

from __future__ import annotations

import re
from typing import Callable

from .errors import (
    ConstraintViolation,
    DuplicateTypeName,
    InvalidSpec,
    MissingRequiredField,
    UnknownType,
)
from .paths import is_identifier
from .values import (
    HyperValue,
    Mapping as MappingNode,
    ObjectNode,
    Primitive,
    Sequence as SequenceNode,
    SymbolicValue,
    to_symbolic,
)


class ValueSpec:
    """Base constraint.  ``nullable=True`` additionally admits null."""

    def __init__(self, nullable: bool = False):
        self.nullable = nullable

    def check(self, node: SymbolicValue, path: str = "") -> None:
        if isinstance(node, Primitive) and node.value is None:
            if self.nullable:
                return
            raise ConstraintViolation(path, self, None, "null not allowed")
        if isinstance(node, HyperValue):
            node.check_against(self, path)
            return
        self._check(node, path)

    def _check(self, node: SymbolicValue, path: str) -> None:
        raise NotImplementedError

    def _fail(self, path, node, reason):
        raise ConstraintViolation(path, self, node, reason)

    def __repr__(self):
        return type(self).__name__


class Any(ValueSpec):
    def __init__(self):
        super().__init__(nullable=True)

    def _check(self, node, path):
        return


class Bool(ValueSpec):
    def _check(self, node, path):
        if not (isinstance(node, Primitive) and isinstance(node.value, bool)):
            self._fail(path, node, "expected bool")


class _Ranged(ValueSpec):
    def __init__(self, min=None, max=None, nullable: bool = False):
        super().__init__(nullable)
        if min is not None and max is not None and min > max:
            raise InvalidSpec(f"{type(self).__name__}: min {min!r} > max {max!r}")
        self.min = min
        self.max = max

    def _in_range(self, value) -> bool:
        if self.min is not None and value < self.min:
            return False
        if self.max is not None and value > self.max:
            return False
        return True

    def accepts_range(self, lo, hi) -> bool:
        """Whether the whole closed interval [lo, hi] satisfies the bounds."""
        return self._in_range(lo) and self._in_range(hi)

    def __repr__(self):
        return f"{type(self).__name__}(min={self.min!r}, max={self.max!r})"


class Int(_Ranged):
    def _check(self, node, path):
        if not (isinstance(node, Primitive) and isinstance(node.value, int)
                and not isinstance(node.value, bool)):
            self._fail(path, node, "expected int")
        if not self._in_range(node.value):
            self._fail(path, node, f"out of range [{self.min}, {self.max}]")


class Float(_Ranged):
    """Accepts floats and ints within the bounds."""

    def _check(self, node, path):
        if not (isinstance(node, Primitive) and isinstance(node.value, (int, float))
                and not isinstance(node.value, bool)):
            self._fail(path, node, "expected float")
        if not self._in_range(node.value):
            self._fail(path, node, f"out of range [{self.min}, {self.max}]")


class Text(ValueSpec):
    def __init__(self, pattern: str | None = None, nullable: bool = False):
        super().__init__(nullable)
        try:
            self.pattern = re.compile(pattern) if pattern is not None else None
        except re.error as exc:
            raise InvalidSpec(f"bad text pattern {pattern!r}: {exc}") from None

    def _check(self, node, path):
        if not (isinstance(node, Primitive) and isinstance(node.value, str)):
            self._fail(path, node, "expected text")
        if self.pattern is not None and self.pattern.fullmatch(node.value) is None:
            self._fail(path, node, f"does not match {self.pattern.pattern!r}")

    def __repr__(self):
        return f"Text(pattern={self.pattern.pattern!r})" if self.pattern else "Text"


class Enum(ValueSpec):
    def __init__(self, values, nullable: bool = False):
        super().__init__(nullable)
        self.values = list(values)
        if not self.values:
            raise InvalidSpec("Enum requires at least one value")

    def allows(self, value) -> bool:
        return any(type(value) is type(v) and value == v for v in self.values)

    def _check(self, node, path):
        if not isinstance(node, Primitive) or not self.allows(node.value):
            self._fail(path, node, f"not one of {self.values!r}")

    def __repr__(self):
        return f"Enum({self.values!r})"


ANY_OBJECT = "any-object"


class ObjectOf(ValueSpec):
    def __init__(self, type_name: str = ANY_OBJECT, nullable: bool = False):
        super().__init__(nullable)
        self.type_name = type_name

    def _check(self, node, path):
        if not isinstance(node, ObjectNode):
            self._fail(path, node, "expected an object")
        if self.type_name != ANY_OBJECT and node.type_name != self.type_name:
            self._fail(path, node, f"expected an object of type {self.type_name!r}")

    def __repr__(self):
        return f"ObjectOf({self.type_name!r})"


class ListOf(ValueSpec):
    def __init__(self, element: ValueSpec, min_len: int | None = None,
                 max_len: int | None = None, nullable: bool = False):
        super().__init__(nullable)
        if min_len is not None and max_len is not None and min_len > max_len:
            raise InvalidSpec(f"ListOf: min_len {min_len} > max_len {max_len}")
        self.element = element
        self.min_len = min_len
        self.max_len = max_len

    def length_ok(self, n: int) -> bool:
        if self.min_len is not None and n < self.min_len:
            return False
        if self.max_len is not None and n > self.max_len:
            return False
        return True

    def _check(self, node, path):
        if not isinstance(node, SequenceNode):
            self._fail(path, node, "expected a sequence")
        if not self.length_ok(len(node)):
            self._fail(path, node, f"length outside [{self.min_len}, {self.max_len}]")
        for i, child in enumerate(node):
            self.element.check(child, f"{path}[{i}]")

    def __repr__(self):
        return f"ListOf({self.element!r})"


class MapOf(ValueSpec):
    def __init__(self, value: ValueSpec, nullable: bool = False):
        super().__init__(nullable)
        self.value = value

    def _check(self, node, path):
        if not isinstance(node, MappingNode):
            self._fail(path, node, "expected a mapping")
        for key, child in node.items():
            self.value.check(child, f"{path}.{key}" if path else key)

    def __repr__(self):
        return f"MapOf({self.value!r})"


# ---------------------------------------------------------------------------
# Type definitions
# ---------------------------------------------------------------------------

_NO_DEFAULT = object()


class Param:
    """One declared field: name, spec and an optional default value."""

    def __init__(self, name: str, spec: ValueSpec, default=_NO_DEFAULT):
        if not is_identifier(name):
            raise InvalidSpec(f"parameter name must be identifier text, got {name!r}")
        if not isinstance(spec, ValueSpec):
            raise InvalidSpec(f"parameter {name!r} needs a ValueSpec, got {spec!r}")
        self.name = name
        self.spec = spec
        if default is _NO_DEFAULT:
            self.default = None
            self.has_default = False
        else:
            node = to_symbolic(default)
            spec.check(node, name)
            self.default = node
            self.has_default = True


class TypeDef:
    """A registered symbolic type: ordered params plus optional behaviors.

    ``impl`` makes the type a functor: instances are callable and invoke
    ``impl`` with the bound fields as plain-Python views.  ``recompute_hook``
    is called with the post-edit node whenever a rebind changes anything at
    or below an instance.
    """

    def __init__(self, type_name: str, params: list[Param],
                 impl: Callable | None = None,
                 recompute_hook: Callable | None = None):
        if not is_identifier(type_name):
            raise InvalidSpec(f"type name must be identifier text, got {type_name!r}")
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise InvalidSpec(f"duplicate parameter names in {type_name!r}")
        self.type_name = type_name
        self.params = list(params)
        self._by_name = {p.name: p for p in params}
        self.impl = impl
        self.recompute_hook = recompute_hook

    @property
    def callable(self) -> bool:
        return self.impl is not None

    def param(self, name: str) -> Param | None:
        return self._by_name.get(name)

    def __repr__(self):
        return f"TypeDef({self.type_name!r})"


class TypeHandle:
    """Constructor handle returned by registration; call it to build objects."""

    def __init__(self, type_def: TypeDef, registry: "TypeRegistry"):
        self.type_def = type_def
        self.registry = registry

    def __call__(self, *args, **kwargs) -> ObjectNode:
        return new_object(self.type_def, *args, **kwargs)

    def is_instance(self, node) -> bool:
        return isinstance(node, ObjectNode) and node.type_name == self.type_def.type_name

    def __repr__(self):
        return f"<type {self.type_def.type_name}>"


class TypeRegistry:
    """Name -> TypeDef registry.  Registrations complete before any concurrent
    use; the registry is read-only afterwards."""

    def __init__(self):
        self._types: dict[str, TypeDef] = {}

    def register(self, type_def: TypeDef) -> TypeHandle:
        if type_def.type_name in self._types:
            raise DuplicateTypeName(f"type {type_def.type_name!r} is already registered")
        self._types[type_def.type_name] = type_def
        return TypeHandle(type_def, self)

    def resolve(self, type_name: str) -> TypeDef:
        try:
            return self._types[type_name]
        except KeyError:
            raise UnknownType(f"type {type_name!r} is not registered") from None

    def __contains__(self, type_name: str) -> bool:
        return type_name in self._types


def register_type(type_def: TypeDef, registry: TypeRegistry) -> TypeHandle:
    return registry.register(type_def)


def new_object(type_def: TypeDef | TypeHandle, *args, **kwargs) -> ObjectNode:
    """Construct a validated object node.

    Positional arguments map to params in declaration order.  Defaults fill
    unbound params; functor types may leave non-defaulted params unbound,
    every other type requires them.
    """
    if isinstance(type_def, TypeHandle):
        type_def = type_def.type_def
    if len(args) > len(type_def.params):
        raise TypeError(
            f"{type_def.type_name} takes at most {len(type_def.params)} positional arguments"
        )
    fields: dict[str, SymbolicValue] = {}
    for param, value in zip(type_def.params, args):
        fields[param.name] = to_symbolic(value)
    for name, value in kwargs.items():
        param = type_def.param(name)
        if param is None:
            raise TypeError(f"{type_def.type_name} has no field {name!r}")
        if name in fields:
            raise TypeError(f"{type_def.type_name} got duplicate value for {name!r}")
        fields[name] = to_symbolic(value)
    for param in type_def.params:
        if param.name not in fields and param.has_default:
            fields[param.name] = param.default.clone()
    for param in type_def.params:
        if param.name in fields:
            param.spec.check(fields[param.name], param.name)
        elif not type_def.callable:
            raise MissingRequiredField(f"{type_def.type_name} requires field {param.name!r}")
    return ObjectNode(type_def, fields)
