"""Hyper values: to-be-determined nodes that turn a program into a search space.

Three kinds exist: a categorical choice of K out of N candidates (with
optional uniqueness/order constraints), an inclusive integer range and a
closed float interval.  Candidates may themselves contain hyper values,
which produces a conditional search space.  A tree with no hyper values is a
deterministic child program.
"""

from __future__ import annotations

import math

from .errors import BadRange, ConstraintViolation, EmptyCandidates, KTooLarge
from .paths import MapKey
from .values import HyperValue, Primitive, Sequence, SymbolicValue, equal, to_symbolic, walk

INFINITE = math.inf


class Categorical(HyperValue):
    """Choose ``k`` of the candidates as a position-ordered tuple.

    ``distinct`` forbids repeated indices; ``sorted`` constrains chosen
    indices to be increasing (strictly so when distinct).  ``k == 1`` is a
    plain one-of; ``k == n`` with distinct and unsorted searches permutations.
    """

    __slots__ = ("k", "distinct", "sorted", "hints", "_candidates")

    def __init__(self, k: int, candidates, distinct: bool = True,
                 sorted: bool = False, hints: str | None = None):
        super().__init__()
        candidates = list(candidates)
        if not candidates:
            raise EmptyCandidates("categorical needs at least one candidate")
        if k < 1:
            raise BadRange(f"k must be >= 1, got {k}")
        if distinct and k > len(candidates):
            raise KTooLarge(f"cannot choose {k} distinct of {len(candidates)} candidates")
        if k == 1:
            # Uniqueness and order constraints are vacuous for a single
            # choice; normalizing keeps equality and serialization canonical.
            distinct, sorted = True, False
        self.k = k
        self.distinct = distinct
        self.sorted = sorted
        self.hints = hints
        self._candidates = self._adopt(MapKey("candidates"), Sequence(candidates))

    @property
    def candidates(self) -> Sequence:
        return self._candidates

    @property
    def num_candidates(self) -> int:
        return len(self._candidates)

    def child_items(self):
        return [(MapKey("candidates"), self._candidates)]

    def get_child(self, segment):
        if isinstance(segment, MapKey) and segment.key == "candidates":
            return self._candidates
        return super().get_child(segment)

    def _replace_child(self, old, new):
        if old is not self._candidates:
            return super()._replace_child(old, new)
        node = self._adopt(MapKey("candidates"), new)
        old._parent = None
        self._candidates = node
        return node

    def clone(self):
        fresh = Categorical.__new__(Categorical)
        SymbolicValue.__init__(fresh)
        fresh.k = self.k
        fresh.distinct = self.distinct
        fresh.sorted = self.sorted
        fresh.hints = self.hints
        fresh._candidates = fresh._adopt(MapKey("candidates"), self._candidates.clone())
        return fresh

    def _equals_same_kind(self, other):
        return (self.k == other.k and self.distinct == other.distinct
                and self.sorted == other.sorted and self.hints == other.hints
                and equal(self._candidates, other._candidates))

    def check_against(self, spec, path):
        candidates = list(self._candidates)
        if self.k == 1:
            for i, cand in enumerate(candidates):
                spec.check(cand, f"{path}.candidates[{i}]")
            return
        # k > 1 materializes to a sequence of the chosen candidates.
        from .schema import Any, ListOf  # local import avoids a cycle at load time

        if isinstance(spec, Any):
            return
        if isinstance(spec, ListOf):
            if not spec.length_ok(self.k):
                raise ConstraintViolation(path, spec, self, f"materializes to a sequence of {self.k}")
            for i, cand in enumerate(candidates):
                spec.element.check(cand, f"{path}.candidates[{i}]")
            return
        raise ConstraintViolation(path, spec, self, "cannot hold a multi-choice splice")

    def __repr__(self):
        flags = f", k={self.k}, distinct={self.distinct}, sorted={self.sorted}"
        return f"Categorical({list(self._candidates)!r}{flags})"


class IntRange(HyperValue):
    """An integer drawn from the inclusive range [min, max]."""

    __slots__ = ("min", "max", "hints")

    def __init__(self, min: int, max: int, hints: str | None = None):
        super().__init__()
        if min > max:
            raise BadRange(f"intv: min {min} > max {max}")
        self.min = min
        self.max = max
        self.hints = hints

    def clone(self):
        return IntRange(self.min, self.max, self.hints)

    def _equals_same_kind(self, other):
        return (self.min, self.max, self.hints) == (other.min, other.max, other.hints)

    def check_against(self, spec, path):
        from .schema import Any, Float, Int

        if isinstance(spec, Any):
            return
        if isinstance(spec, (Int, Float)) and spec.accepts_range(self.min, self.max):
            return
        raise ConstraintViolation(path, spec, self, f"range [{self.min}, {self.max}] not accepted")

    def __repr__(self):
        return f"intv({self.min}, {self.max})"


class FloatRange(HyperValue):
    """A float drawn from the closed interval [min, max]."""

    __slots__ = ("min", "max", "hints")

    def __init__(self, min: float, max: float, hints: str | None = None):
        super().__init__()
        if min > max:
            raise BadRange(f"floatv: min {min} > max {max}")
        self.min = float(min)
        self.max = float(max)
        self.hints = hints

    def clone(self):
        return FloatRange(self.min, self.max, self.hints)

    def _equals_same_kind(self, other):
        return (self.min, self.max, self.hints) == (other.min, other.max, other.hints)

    def check_against(self, spec, path):
        from .schema import Any, Float

        if isinstance(spec, Any):
            return
        if isinstance(spec, Float) and spec.accepts_range(self.min, self.max):
            return
        raise ConstraintViolation(path, spec, self, f"range [{self.min}, {self.max}] not accepted")

    def __repr__(self):
        return f"floatv({self.min}, {self.max})"


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def oneof(candidates, hints: str | None = None) -> Categorical:
    """Choose one of the candidates."""
    return Categorical(1, candidates, distinct=True, sorted=False, hints=hints)


def manyof(k: int, candidates, distinct: bool = True, sorted: bool = False,
           hints: str | None = None) -> Categorical:
    """Choose k of the candidates as a position-ordered tuple."""
    return Categorical(k, candidates, distinct=distinct, sorted=sorted, hints=hints)


def permutate(candidates, hints: str | None = None) -> Categorical:
    """Search for a permutation of all candidates."""
    return Categorical(len(list(candidates)), candidates, distinct=True, sorted=False, hints=hints)


def intv(min: int, max: int, hints: str | None = None) -> IntRange:
    return IntRange(min, max, hints)


def floatv(min: float, max: float, hints: str | None = None) -> FloatRange:
    return FloatRange(min, max, hints)


# ---------------------------------------------------------------------------
# Space inspection
# ---------------------------------------------------------------------------

def is_deterministic(space) -> bool:
    """True iff the tree contains no hyper value (i.e. it is a child program)."""
    space = to_symbolic(space)
    return not any(isinstance(node, HyperValue) for _, node in walk(space))


def space_size(space) -> int | float:
    """Number of distinct concrete child programs, or INFINITE when a float
    range is reachable."""
    return _size(to_symbolic(space))


def _size(node: SymbolicValue) -> int | float:
    if isinstance(node, FloatRange):
        return INFINITE
    if isinstance(node, IntRange):
        return node.max - node.min + 1
    if isinstance(node, Categorical):
        sizes = [_size(c) for c in node.candidates]
        if any(s == INFINITE for s in sizes):
            return INFINITE
        return _tuple_weight(sizes, node.k, node.distinct, node.sorted)
    if isinstance(node, Primitive):
        return 1
    total = 1
    for _, child in node.child_items():
        s = _size(child)
        if s == INFINITE:
            return INFINITE
        total *= s
    return total


def _tuple_weight(sizes: list[int], k: int, distinct: bool, sorted_: bool) -> int:
    """Sum over feasible index tuples of the product of candidate sub-space
    sizes, computed with symmetric-polynomial style DP."""
    if not distinct and not sorted_:
        return sum(sizes) ** k
    dp = [0] * (k + 1)
    dp[0] = 1
    if distinct:
        # Elementary symmetric polynomial e_k; ordering multiplies by k!
        for s in sizes:
            for j in range(k, 0, -1):
                dp[j] += dp[j - 1] * s
        return dp[k] if sorted_ else dp[k] * math.factorial(k)
    # Non-distinct but sorted: complete homogeneous symmetric polynomial h_k.
    for s in sizes:
        for j in range(1, k + 1):
            dp[j] += dp[j - 1] * s
    return dp[k]
