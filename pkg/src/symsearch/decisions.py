"""Abstract search spaces and abstract child programs.

A DecisionSpec is the search algorithm's entire view of a search space: one
decision point per hyper value, in depth-first pre-order, holding only kinds
and ranges.  Decisions for hyper values nested inside a candidate exist only
under that candidate, so conditional structure is preserved without leaking
any program content.

A DNA is a tree of numeric decisions conforming to a DecisionSpec: a
categorical point gets an ordered list of chosen indices, each paired with
the child decisions for that candidate; int and float points get plain
values.  The canonical text form flattens decisions in pre-order joined by
``|``, e.g. ``2|1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from random import Random
from typing import Callable, Iterator

from .errors import ContinuousSpace, NonconformingDNA, ParseError
from .hyper import Categorical, FloatRange, IntRange
from .values import HyperValue, SymbolicValue, path_of, to_symbolic


@dataclass
class IntPoint:
    id: str
    min: int
    max: int
    hints: str | None = None

    kind = "int"


@dataclass
class FloatPoint:
    id: str
    min: float
    max: float
    hints: str | None = None

    kind = "float"


@dataclass
class CategoricalPoint:
    id: str
    k: int
    n: int
    distinct: bool
    sorted: bool
    subspaces: list[list] = field(default_factory=list)  # one point list per candidate
    hints: str | None = None

    kind = "categorical"


DecisionPoint = "CategoricalPoint | IntPoint | FloatPoint"
Selector = Callable[["DecisionPoint"], bool]


@dataclass
class DecisionSpec:
    points: list = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not self.points

    @property
    def is_continuous(self) -> bool:
        return any(isinstance(p, FloatPoint) for p in iter_all_points(self.points))


@dataclass
class Choice:
    index: int
    children: list = field(default_factory=list)


@dataclass
class DNA:
    """Decisions aligned with a DecisionSpec's points: list[Choice] for a
    categorical point, int or float otherwise."""

    decisions: list = field(default_factory=list)


def iter_all_points(points) -> Iterator:
    for p in points:
        yield p
        if isinstance(p, CategoricalPoint):
            for sub in p.subspaces:
                yield from iter_all_points(sub)


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

def abstract_search_space(space) -> DecisionSpec:
    """Extract the decision points of a search space, pre-order, with
    conditional nesting; a deterministic tree yields an empty spec."""
    return DecisionSpec(_extract(to_symbolic(space)))


def _extract(node: SymbolicValue) -> list:
    if isinstance(node, Categorical):
        return [CategoricalPoint(
            id=path_of(node).render(),
            k=node.k,
            n=node.num_candidates,
            distinct=node.distinct,
            sorted=node.sorted,
            subspaces=[_extract(c) for c in node.candidates],
            hints=node.hints,
        )]
    if isinstance(node, IntRange):
        return [IntPoint(path_of(node).render(), node.min, node.max, node.hints)]
    if isinstance(node, FloatRange):
        return [FloatPoint(path_of(node).render(), node.min, node.max, node.hints)]
    points = []
    for _, child in node.child_items():
        points.extend(_extract(child))
    return points


def local_hyper_nodes(node: SymbolicValue) -> list[HyperValue]:
    """Top-level hyper nodes of a tree in pre-order, aligned with _extract."""
    if isinstance(node, HyperValue):
        return [node]
    out = []
    for _, child in node.child_items():
        out.extend(local_hyper_nodes(child))
    return out


def filter_spec(spec: DecisionSpec, selector: Selector) -> DecisionSpec:
    """Restrict a spec to selected points.  A point nested under an
    unselected categorical is unreachable and drops out with its parent."""
    return DecisionSpec(_filter_points(spec.points, selector))


def _filter_points(points, selector):
    out = []
    for p in points:
        if not selector(p):
            continue
        if isinstance(p, CategoricalPoint):
            out.append(replace(p, subspaces=[_filter_points(s, selector) for s in p.subspaces]))
        else:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# Conformance
# ---------------------------------------------------------------------------

def validate_dna(dna: DNA, spec: DecisionSpec) -> None:
    """Raise NonconformingDNA unless `dna` conforms to `spec`."""
    _validate_points(spec.points, dna.decisions, "")


def _validate_points(points, decisions, context):
    if not isinstance(decisions, list) or len(decisions) != len(points):
        raise NonconformingDNA(context or "<root>",
                               f"expected {len(points)} decisions, got {decisions!r}")
    for point, decision in zip(points, decisions):
        _validate_decision(point, decision)


def _validate_decision(point, decision):
    if isinstance(point, IntPoint):
        if not isinstance(decision, int) or isinstance(decision, bool):
            raise NonconformingDNA(point.id, f"expected an int, got {decision!r}")
        if not point.min <= decision <= point.max:
            raise NonconformingDNA(point.id, f"{decision} outside [{point.min}, {point.max}]")
        return
    if isinstance(point, FloatPoint):
        if not isinstance(decision, (int, float)) or isinstance(decision, bool):
            raise NonconformingDNA(point.id, f"expected a float, got {decision!r}")
        if not point.min <= decision <= point.max:
            raise NonconformingDNA(point.id, f"{decision} outside [{point.min}, {point.max}]")
        return
    if not isinstance(decision, list) or not all(isinstance(c, Choice) for c in decision):
        raise NonconformingDNA(point.id, f"expected a list of choices, got {decision!r}")
    if len(decision) != point.k:
        raise NonconformingDNA(point.id, f"expected {point.k} choices, got {len(decision)}")
    indices = [c.index for c in decision]
    for i in indices:
        if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < point.n:
            raise NonconformingDNA(point.id, f"index {i!r} outside [0, {point.n})")
    if point.distinct and len(set(indices)) != len(indices):
        raise NonconformingDNA(point.id, f"indices {indices} not distinct")
    if point.sorted:
        ordered = all(a < b for a, b in zip(indices, indices[1:])) if point.distinct \
            else all(a <= b for a, b in zip(indices, indices[1:]))
        if not ordered:
            raise NonconformingDNA(point.id, f"indices {indices} not sorted")
    for choice in decision:
        _validate_points(point.subspaces[choice.index], choice.children, point.id)


# ---------------------------------------------------------------------------
# Canonical text
# ---------------------------------------------------------------------------

def encode_dna(dna: DNA, spec: DecisionSpec, validate: bool = True) -> str:
    """Flatten decisions pre-order into the canonical ``|``-joined text."""
    if validate:
        validate_dna(dna, spec)
    tokens: list[str] = []
    _encode_points(spec.points, dna.decisions, tokens)
    return "|".join(tokens)


def _encode_points(points, decisions, tokens):
    for point, decision in zip(points, decisions):
        if isinstance(point, IntPoint):
            tokens.append(str(decision))
        elif isinstance(point, FloatPoint):
            tokens.append(repr(float(decision)))
        else:
            for choice in decision:
                tokens.append(str(choice.index))
                _encode_points(point.subspaces[choice.index], choice.children, tokens)


def decode_dna(text: str, spec: DecisionSpec) -> DNA:
    """Parse canonical text against a spec; validates conformance."""
    tokens = text.split("|") if text else []
    cursor = [0]

    def take(point) -> str:
        if cursor[0] >= len(tokens):
            raise ParseError(f"too few decisions for {point.id!r}")
        token = tokens[cursor[0]]
        cursor[0] += 1
        return token

    def read_points(points):
        out = []
        for point in points:
            if isinstance(point, IntPoint):
                out.append(_parse_int(take(point), point))
            elif isinstance(point, FloatPoint):
                token = take(point)
                try:
                    out.append(float(token))
                except ValueError:
                    raise ParseError(f"bad float {token!r} for {point.id!r}") from None
            else:
                choices = []
                for _ in range(point.k):
                    index = _parse_int(take(point), point)
                    if not 0 <= index < point.n:
                        raise NonconformingDNA(point.id, f"index {index} outside [0, {point.n})")
                    choices.append(Choice(index, read_points(point.subspaces[index])))
                out.append(choices)
        return out

    decisions = read_points(spec.points)
    if cursor[0] != len(tokens):
        raise ParseError(f"{len(tokens) - cursor[0]} unconsumed decisions")
    dna = DNA(decisions)
    validate_dna(dna, spec)
    return dna


def _parse_int(token: str, point) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"bad int {token!r} for {point.id!r}") from None


# ---------------------------------------------------------------------------
# Enumeration and sampling
# ---------------------------------------------------------------------------

def enumerate_dnas(spec: DecisionSpec) -> Iterator[DNA]:
    """Yield every conforming DNA exactly once, in canonical-encoding order."""
    if spec.is_continuous:
        raise ContinuousSpace("cannot enumerate a space with float decisions")
    for decisions in _enum_points(spec.points):
        yield DNA(decisions)


def _enum_points(points) -> Iterator[list]:
    if not points:
        yield []
        return
    head, tail = points[0], points[1:]
    for decision in _enum_decision(head):
        for rest in _enum_points(tail):
            yield [decision] + rest


def _enum_decision(point) -> Iterator:
    if isinstance(point, IntPoint):
        yield from range(point.min, point.max + 1)
        return
    yield from _enum_choices(point, [])


def _enum_choices(point, prefix) -> Iterator[list]:
    if len(prefix) == point.k:
        yield []
        return
    for index in _feasible_indices(point, prefix):
        for children in _enum_points(point.subspaces[index]):
            for rest in _enum_choices(point, prefix + [index]):
                yield [Choice(index, children)] + rest


def _feasible_indices(point, prefix):
    for index in range(point.n):
        if point.distinct and index in prefix:
            continue
        if point.sorted and prefix:
            if point.distinct and index <= prefix[-1]:
                continue
            if not point.distinct and index < prefix[-1]:
                continue
        yield index


def count_tuples(point: CategoricalPoint) -> int:
    """Number of feasible index tuples of a categorical point."""
    n, k = point.n, point.k
    if point.distinct:
        return math.comb(n, k) if point.sorted else math.perm(n, k)
    return math.comb(n + k - 1, k) if point.sorted else n ** k


def random_dna(spec: DecisionSpec, rng: Random) -> DNA:
    """Sample a conforming DNA: categorical tuples uniform over feasible
    tuples, ints uniform inclusive, floats uniform over [min, max]."""
    return DNA(random_decisions(spec.points, rng))


def random_decisions(points, rng: Random) -> list:
    out = []
    for point in points:
        if isinstance(point, IntPoint):
            out.append(rng.randint(point.min, point.max))
        elif isinstance(point, FloatPoint):
            out.append(rng.uniform(point.min, point.max))
        else:
            indices = random_tuple(point, rng)
            out.append([Choice(i, random_decisions(point.subspaces[i], rng)) for i in indices])
    return out


def random_tuple(point: CategoricalPoint, rng: Random) -> list[int]:
    n, k = point.n, point.k
    if point.distinct:
        indices = rng.sample(range(n), k)
        return sorted(indices) if point.sorted else indices
    if point.sorted:
        # Stars and bars: uniform over non-decreasing tuples.
        marks = sorted(rng.sample(range(n + k - 1), k))
        return [m - j for j, m in enumerate(marks)]
    return [rng.randrange(n) for _ in range(k)]


def minimal_dna(spec: DecisionSpec) -> DNA:
    """The least DNA: first feasible tuple / min value at every point."""
    return DNA([_minimal_decision(p) for p in spec.points])


def _minimal_decision(point):
    if isinstance(point, (IntPoint, FloatPoint)):
        return point.min
    prefix: list[int] = []
    choices = []
    for _ in range(point.k):
        index = next(_feasible_indices(point, prefix))
        prefix.append(index)
        choices.append(Choice(index, [_minimal_decision(p) for p in point.subspaces[index]]))
    return choices


# ---------------------------------------------------------------------------
# Splitting and merging across a partition
# ---------------------------------------------------------------------------

def split_dna(spec: DecisionSpec, dna: DNA, selector: Selector) -> tuple[DNA, DNA]:
    """Split a full DNA into (selected, complement) parts.

    The selected part conforms to ``filter_spec(spec, selector)``.  The
    complement lists the decisions of surviving hyper values in the pre-order
    they occupy after partial materialization.
    """
    selected, complement = _split_points(spec.points, dna.decisions, selector)
    return DNA(selected), DNA(complement)


def _split_points(points, decisions, selector):
    selected, complement = [], []
    for point, decision in zip(points, decisions):
        if not selector(point):
            complement.append(decision)
            continue
        if isinstance(point, CategoricalPoint):
            rebuilt = []
            for choice in decision:
                sel, comp = _split_points(point.subspaces[choice.index], choice.children, selector)
                rebuilt.append(Choice(choice.index, sel))
                complement.extend(comp)
            selected.append(rebuilt)
        else:
            selected.append(decision)
    return selected, complement


def merge_dna(spec: DecisionSpec, selector: Selector, selected: DNA, complement: DNA) -> DNA:
    """Inverse of :func:`split_dna`."""
    sel_iter = iter(selected.decisions)
    comp_iter = iter(complement.decisions)
    try:
        decisions = _merge_points(spec.points, selector, sel_iter, comp_iter)
        _expect_exhausted(sel_iter, "selected")
        _expect_exhausted(comp_iter, "complement")
    except StopIteration:
        raise NonconformingDNA("<merge>", "decision lists do not match the partition") from None
    return DNA(decisions)


def _merge_points(points, selector, sel_iter, comp_iter):
    out = []
    for point in points:
        if not selector(point):
            out.append(next(comp_iter))
            continue
        decision = next(sel_iter)
        if isinstance(point, CategoricalPoint):
            rebuilt = []
            for choice in decision:
                child_sel = iter(choice.children)
                children = _merge_points(point.subspaces[choice.index], selector, child_sel, comp_iter)
                _expect_exhausted(child_sel, "selected")
                rebuilt.append(Choice(choice.index, children))
            out.append(rebuilt)
        else:
            out.append(decision)
    return out


def _expect_exhausted(iterator, label):
    for _ in iterator:
        raise NonconformingDNA("<merge>", f"extra {label} decisions beyond the partition")


# ---------------------------------------------------------------------------
# Structural comparison and JSON rendering
# ---------------------------------------------------------------------------

def isomorphic(a: DecisionSpec, b: DecisionSpec) -> bool:
    """Same kinds, ranges, constraints, nesting and order; ids are ignored."""
    return _iso_points(a.points, b.points)


def _iso_points(pa, pb) -> bool:
    if len(pa) != len(pb):
        return False
    for x, y in zip(pa, pb):
        if type(x) is not type(y) or x.hints != y.hints:
            return False
        if isinstance(x, CategoricalPoint):
            if (x.k, x.n, x.distinct, x.sorted) != (y.k, y.n, y.distinct, y.sorted):
                return False
            if not all(_iso_points(sx, sy) for sx, sy in zip(x.subspaces, y.subspaces)):
                return False
        elif (x.min, x.max) != (y.min, y.max):
            return False
    return True


def spec_to_json_obj(spec: DecisionSpec) -> dict:
    """JSON rendering of a spec: kinds, ranges and nesting only.  Candidate
    program content never appears here."""
    return {"points": [_point_to_json(p) for p in spec.points]}


def _point_to_json(point) -> dict:
    if isinstance(point, CategoricalPoint):
        return {
            "id": point.id,
            "kind": "categorical",
            "k": point.k,
            "n": point.n,
            "distinct": point.distinct,
            "sorted": point.sorted,
            "hints": point.hints,
            "subspaces": [[_point_to_json(p) for p in sub] for sub in point.subspaces],
        }
    return {
        "id": point.id,
        "kind": point.kind,
        "min": point.min,
        "max": point.max,
        "hints": point.hints,
    }
