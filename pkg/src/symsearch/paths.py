"""Path addressing for symbolic trees.

A path is a sequence of segments leading from the tree root to a node.  Two
segment kinds exist: a map key (mapping keys, object field names, the
``candidates`` edge of a categorical hyper value) and a list index.  The text
form is fixed: the root renders as the empty string, a map key renders bare
for the first segment and ``.key`` afterwards, and a list index renders as
``[i]``; e.g. ``model.children[0].filters``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import PathSyntaxError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_TOKEN_RE = re.compile(r"\.?([A-Za-z_][A-Za-z0-9_]*)|\[(\d+)\]")


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.fullmatch(text))


@dataclass(frozen=True)
class MapKey:
    key: str


@dataclass(frozen=True)
class ListIndex:
    index: int


Segment = "MapKey | ListIndex"


@dataclass(frozen=True)
class KeyPath:
    """Immutable root-relative path; renders to/parses from the fixed grammar."""

    segments: tuple = ()

    def render(self) -> str:
        parts = []
        for i, seg in enumerate(self.segments):
            if isinstance(seg, MapKey):
                parts.append(seg.key if i == 0 else f".{seg.key}")
            else:
                parts.append(f"[{seg.index}]")
        return "".join(parts)

    @classmethod
    def parse(cls, text: str) -> "KeyPath":
        if text == "":
            return cls()
        segments = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise PathSyntaxError(f"bad path syntax at offset {pos} in {text!r}")
            if m.group(1) is not None:
                # A dotted key is only legal after a preceding segment.
                if text[pos] == "." and not segments:
                    raise PathSyntaxError(f"path cannot start with '.': {text!r}")
                if text[pos] != "." and segments:
                    raise PathSyntaxError(f"missing '.' before key at offset {pos} in {text!r}")
                segments.append(MapKey(m.group(1)))
            else:
                segments.append(ListIndex(int(m.group(2))))
            pos = m.end()
        return cls(tuple(segments))

    def child(self, segment) -> "KeyPath":
        return KeyPath(self.segments + (segment,))

    @property
    def is_root(self) -> bool:
        return not self.segments

    @property
    def parent(self) -> "KeyPath":
        return KeyPath(self.segments[:-1])

    @property
    def last(self):
        return self.segments[-1]

    def __str__(self) -> str:
        return self.render()


def as_path(path: "KeyPath | str") -> KeyPath:
    if isinstance(path, KeyPath):
        return path
    return KeyPath.parse(path)
