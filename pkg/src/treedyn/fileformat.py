"""Line-based text format for a tree together with a PL self-map.

::

    treedyn 1
    vertex <id>
    edge <id> <from> <to> <length>
    map
    piece <edge> <t0> <t1> -> <point> [via <vertex>...] <point>

Points are ``v:<vertex>`` or ``<edge>@<offset>``.  ``#`` starts a comment.
``serialize`` writes the canonical form: rationals reduced, pieces merged,
and ``via`` listing exactly the interior vertices of each image geodesic.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError, TreeDynError, ValidationError
from .plmap import PLMap
from .tree import FiniteTree, TreePoint, format_rational, parse_rational

HEADER = "treedyn 1"
_TOKEN = re.compile(r"\S+")


def _tokens(line: str) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with their 1-based columns."""
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]


def via_vertices(tree: FiniteTree, start: TreePoint, end: TreePoint) -> list[str]:
    """Vertices strictly inside the geodesic from start to end, in order."""
    out = []
    segs = tree.segments(start, end)
    for eid, _, b in segs[:-1]:
        e = tree.edges[eid]
        out.append(e.head if b == e.length else e.tail)
    return out


def _rational(tok: str, line: int, col: int) -> Fraction:
    try:
        return parse_rational(tok)
    except ParseError as exc:
        raise ParseError(str(exc), line, col) from None


def parse(text: str) -> tuple[FiniteTree, PLMap]:
    """Parse a document into a validated tree and map.

    Syntax problems raise ParseError with line and column; structural
    problems (cycles, disconnection, discontinuity) raise ValidationError.
    """
    vertices: list[str] = []
    edges: list[tuple[str, str, str, Fraction]] = []
    raw_pieces: list[tuple[int, list[tuple[str, int]]]] = []
    seen_header = False
    in_map = False
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        word, col = toks[0]
        if not seen_header:
            if [t for t, _ in toks] != ["treedyn", "1"]:
                raise ParseError(f"expected header {HEADER!r}", lineno, col)
            seen_header = True
            continue
        if word == "vertex":
            if in_map:
                raise ParseError("vertex after 'map'", lineno, col)
            if len(toks) != 2:
                raise ParseError("expected 'vertex <id>'", lineno, col)
            vertices.append(toks[1][0])
        elif word == "edge":
            if in_map:
                raise ParseError("edge after 'map'", lineno, col)
            if len(toks) != 5:
                raise ParseError("expected 'edge <id> <from> <to> <length>'", lineno, col)
            (eid, _), (a, _), (b, _), (ln, lcol) = toks[1:]
            edges.append((eid, a, b, _rational(ln, lineno, lcol)))
        elif word == "map":
            if in_map or len(toks) != 1:
                raise ParseError("unexpected 'map'", lineno, col)
            in_map = True
        elif word == "piece":
            if not in_map:
                raise ParseError("piece before 'map'", lineno, col)
            raw_pieces.append((lineno, toks))
        else:
            raise ParseError(f"unknown directive {word!r}", lineno, col)
    if not seen_header:
        raise ParseError(f"missing header {HEADER!r}", max(last_line, 1), 1)
    if not in_map:
        raise ParseError("missing 'map' section", max(last_line, 1), 1)

    tree = FiniteTree(vertices, edges)
    items = []
    for lineno, toks in raw_pieces:
        items.append(_parse_piece(tree, lineno, toks))
    return tree, PLMap.from_items(tree, items)


def _parse_piece(tree: FiniteTree, lineno: int, toks: list[tuple[str, int]]):
    words = [t for t, _ in toks]
    if len(words) < 7 or words[4] != "->":
        col = toks[4][1] if len(toks) > 4 else toks[-1][1]
        raise ParseError("expected 'piece <edge> <t0> <t1> -> <point> [via ...] <point>'", lineno, col)
    eid, ecol = toks[1]
    if eid not in tree.edges:
        raise ParseError(f"unknown edge {eid!r}", lineno, ecol)
    t0 = _rational(toks[2][0], lineno, toks[2][1])
    t1 = _rational(toks[3][0], lineno, toks[3][1])

    def point(i: int) -> TreePoint:
        tok, col = toks[i]
        try:
            return tree.parse_point(tok)
        except TreeDynError as exc:
            raise ParseError(str(exc), lineno, col) from None

    start = point(5)
    rest = toks[6:]
    via: list[str] | None = None
    if rest[0][0] == "via":
        if len(rest) < 2:
            raise ParseError("missing end point after 'via'", lineno, rest[0][1])
        via = [t for t, _ in rest[1:-1]]
        for t, col in rest[1:-1]:
            if t not in tree.incident:
                raise ParseError(f"unknown vertex {t!r}", lineno, col)
    elif len(rest) != 1:
        raise ParseError("unexpected tokens after end point", lineno, rest[1][1])
    end = point(len(toks) - 1)
    if via is not None and via != via_vertices(tree, start, end):
        raise ValidationError(f"line {lineno}: 'via' does not match the geodesic from {start} to {end}")
    return eid, t0, t1, start, end


def serialize(tree: FiniteTree, f: PLMap) -> str:
    lines = [HEADER]
    lines += [f"vertex {v}" for v in tree.vertices]
    lines += [f"edge {e.id} {e.tail} {e.head} {format_rational(e.length)}" for e in tree.edges.values()]
    lines.append("map")
    for ps in f.pieces.values():
        for p in ps:
            via = via_vertices(tree, p.start, p.end)
            mid = f" via {' '.join(via)}" if via else ""
            lines.append(f"piece {p.edge} {format_rational(p.t0)} {format_rational(p.t1)} -> {p.start}{mid} {p.end}")
    return "\n".join(lines) + "\n"


def load(path: str) -> tuple[FiniteTree, PLMap]:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def dump(path: str, tree: FiniteTree, f: PLMap) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(tree, f))
