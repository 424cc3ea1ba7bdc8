"""Exact finite metric trees: points, geodesics, closed region sets.

All coordinates are :class:`fractions.Fraction`.  A point on an edge is
stored as ``(edge, offset)`` where the offset is measured from the edge's
tail vertex; offsets ``0`` and ``length`` are always normalized to the
vertex itself, so two points are equal iff their dataclasses are equal.
"""
from __future__ import annotations

import re
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import DegeneratePoint, EmptySubtree, ParseError, ValidationError

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")
IDENT_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


def parse_rational(text: str) -> Fraction:
    if not _RATIONAL_RE.match(text):
        raise ParseError(f"malformed rational {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ParseError(f"zero denominator in {text!r}") from None


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    length: Fraction

    def other(self, vertex: str) -> str:
        return self.head if vertex == self.tail else self.tail


@dataclass(frozen=True)
class TreePoint:
    """A point of a tree, canonical: vertex points never carry an edge."""

    vertex: str | None = None
    edge: str | None = None
    offset: Fraction = ZERO

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def __str__(self) -> str:
        if self.vertex is not None:
            return f"v:{self.vertex}"
        return f"{self.edge}@{format_rational(self.offset)}"

    def __repr__(self) -> str:
        return f"TreePoint({self})"


@dataclass(frozen=True)
class Connectivity:
    connected: bool
    vacuous: bool = False

    def __bool__(self) -> bool:
        return self.connected


class FiniteTree:
    """A connected acyclic metric graph with positive rational edge lengths."""

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple[str, str, str, Fraction | int | str]]):
        self.vertices: tuple[str, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError("duplicate vertex id")
        for v in self.vertices:
            if not IDENT_RE.match(v):
                raise ValidationError(f"bad vertex id {v!r}")
        self.edges: dict[str, Edge] = {}
        vset = set(self.vertices)
        parent = {v: v for v in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for eid, tail, head, length in edges:
            if not IDENT_RE.match(eid):
                raise ValidationError(f"bad edge id {eid!r}")
            if eid in self.edges or eid in vset:
                raise ValidationError(f"duplicate id {eid!r}")
            if tail not in vset or head not in vset:
                raise ValidationError(f"edge {eid} references an unknown vertex")
            length = Fraction(length)
            if length <= 0:
                raise ValidationError(f"edge {eid} has non-positive length")
            rt, rh = find(tail), find(head)
            if rt == rh:
                raise ValidationError(f"cycle: edge {eid} closes a cycle")
            parent[rt] = rh
            self.edges[eid] = Edge(eid, tail, head, length)
        if not self.edges:
            raise ValidationError("tree must have at least one edge")
        if len({find(v) for v in self.vertices}) != 1:
            raise ValidationError("disconnected: tree is not connected")

        incident: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            incident[e.tail].append(e.id)
            incident[e.head].append(e.id)
        self.incident = {v: tuple(es) for v, es in incident.items()}
        self._vpoints = {v: TreePoint(vertex=v) for v in self.vertices}
        # all-pairs vertex distances and next-step tables (trees here are small)
        self._dist: dict[str, dict[str, Fraction]] = {}
        self._step: dict[str, dict[str, str]] = {}  # _step[target][v] = edge leaving v toward target
        for root in self.vertices:
            dist = {root: ZERO}
            step: dict[str, str] = {}
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for eid in self.incident[u]:
                    w = self.edges[eid].other(u)
                    if w not in dist:
                        dist[w] = dist[u] + self.edges[eid].length
                        step[w] = eid
                        queue.append(w)
            self._dist[root] = dist
            self._step[root] = step

    # -- points ---------------------------------------------------------

    def point(self, edge: str, offset: Fraction | int | str) -> TreePoint:
        e = self.edges[edge]
        offset = Fraction(offset)
        if offset < 0 or offset > e.length:
            raise ValidationError(f"offset {offset} outside edge {edge}")
        if offset == 0:
            return self._vpoints[e.tail]
        if offset == e.length:
            return self._vpoints[e.head]
        return TreePoint(edge=edge, offset=offset)

    def vertex_point(self, vertex: str) -> TreePoint:
        return self._vpoints[vertex]

    def offset_on(self, p: TreePoint, edge: str) -> Fraction | None:
        """Offset of ``p`` on the closed edge, or None if it lies elsewhere."""
        if p.vertex is None:
            return p.offset if p.edge == edge else None
        e = self.edges[edge]
        if p.vertex == e.tail:
            return ZERO
        if p.vertex == e.head:
            return e.length
        return None

    def parse_point(self, text: str) -> TreePoint:
        if text.startswith("v:"):
            v = text[2:]
            if v not in self._vpoints:
                raise ParseError(f"unknown vertex {v!r}")
            return self._vpoints[v]
        if "@" not in text:
            raise ParseError(f"malformed point {text!r}")
        eid, off = text.split("@", 1)
        if eid not in self.edges:
            raise ParseError(f"unknown edge {eid!r}")
        offset = parse_rational(off)
        if offset < 0 or offset > self.edges[eid].length:
            raise ParseError(f"offset out of range in {text!r}")
        return self.point(eid, offset)

    def _anchors(self, p: TreePoint) -> tuple[tuple[str, Fraction], ...]:
        if p.vertex is not None:
            return ((p.vertex, ZERO),)
        e = self.edges[p.edge]
        return ((e.tail, p.offset), (e.head, e.length - p.offset))

    def order(self, p: TreePoint) -> int:
        if p.vertex is not None:
            return len(self.incident[p.vertex])
        return 2

    def branching_vertices(self) -> list[str]:
        return [v for v in self.vertices if len(self.incident[v]) >= 3]

    def total_length(self) -> Fraction:
        return sum((e.length for e in self.edges.values()), ZERO)

    # -- metric -----------------------------------------------------------

    def vertex_distance(self, u: str, v: str) -> Fraction:
        return self._dist[u][v]

    def distance(self, p: TreePoint, q: TreePoint) -> Fraction:
        if p == q:
            return ZERO
        if p.vertex is None and q.vertex is None and p.edge == q.edge:
            return abs(p.offset - q.offset)
        best = None
        for a, da in self._anchors(p):
            row = self._dist[a]
            for b, db in self._anchors(q):
                d = da + row[b] + db
                if best is None or d < best:
                    best = d
        return best

    def _vertex_path(self, u: str, v: str) -> list[tuple[str, Fraction, Fraction]]:
        """Segments of the geodesic between two vertices."""
        segs = []
        step = self._step[v]
        while u != v:
            eid = step[u]
            e = self.edges[eid]
            if e.tail == u:
                segs.append((eid, ZERO, e.length))
                u = e.head
            else:
                segs.append((eid, e.length, ZERO))
                u = e.tail
        return segs

    def segments(self, p: TreePoint, q: TreePoint) -> list[tuple[str, Fraction, Fraction]]:
        """Oriented edge segments ``(edge, from_offset, to_offset)`` from p to q."""
        if p == q:
            return []
        if p.vertex is None and q.vertex is None and p.edge == q.edge:
            return [(p.edge, p.offset, q.offset)]
        best = None
        for a, da in self._anchors(p):
            row = self._dist[a]
            for b, db in self._anchors(q):
                d = da + row[b] + db
                if best is None or d < best[0]:
                    best = (d, a, b)
        _, a, b = best
        segs = []
        if p.vertex is None:
            e = self.edges[p.edge]
            segs.append((p.edge, p.offset, ZERO if a == e.tail else e.length))
        segs.extend(self._vertex_path(a, b))
        if q.vertex is None:
            e = self.edges[q.edge]
            segs.append((q.edge, ZERO if b == e.tail else e.length, q.offset))
        return segs

    def geodesic(self, p: TreePoint, q: TreePoint) -> Arc:
        if p == q:
            raise DegeneratePoint(f"no arc from {p} to itself")
        return Arc(self, p, q, self.segments(p, q))

    def between(self, p: TreePoint, x: TreePoint, q: TreePoint) -> bool:
        """True iff x lies on the geodesic from p to q (endpoints included)."""
        return self.distance(p, x) + self.distance(x, q) == self.distance(p, q)

    def along(self, p: TreePoint, q: TreePoint, s: Fraction) -> TreePoint:
        """The point at distance ``s`` from p on the geodesic toward q."""
        if s == 0:
            return p
        return Arc(self, p, q, self.segments(p, q)).point_at(s)

    # -- regions ------------------------------------------------------------

    def whole(self) -> Subtree:
        return Subtree.build(self, [(e.id, ZERO, e.length) for e in self.edges.values()])

    def first_point_retraction(self, Y: RegionSet, x: TreePoint) -> TreePoint:
        """The first point of Y met by any geodesic from x into Y."""
        if Y.is_empty():
            raise EmptySubtree("retraction onto an empty set")
        if Y.contains(x):
            return x
        arc = self.geodesic(x, Y.anchor_point())
        return arc.point_at(arc.first_hit(Y))

    def distance_to(self, Y: RegionSet, x: TreePoint) -> Fraction:
        return self.distance(x, self.first_point_retraction(Y, x))

    def components_minus_point(self, x: TreePoint) -> list[ComponentHandle]:
        if x.vertex is not None:
            return [ComponentHandle(self, x, eid, self.edges[eid].other(x.vertex)) for eid in self.incident[x.vertex]]
        e = self.edges[x.edge]
        return [ComponentHandle(self, x, e.id, e.tail), ComponentHandle(self, x, e.id, e.head)]

    def is_connected(self, S: RegionSet) -> Connectivity:
        if S.is_empty():
            return Connectivity(True, vacuous=True)
        return Connectivity(len(S.components()) == 1)

    def ball(self, x: TreePoint, radius: Fraction) -> Subtree:
        """Closed metric ball, as a subtree."""
        pieces = []
        for e in self.edges.values():
            du = self.distance(x, self._vpoints[e.tail])
            dv = self.distance(x, self._vpoints[e.head])
            if x.edge == e.id:
                lo, hi = max(ZERO, x.offset - radius), min(e.length, x.offset + radius)
                pieces.append((e.id, lo, hi))
                continue
            # distance along the edge is du + t on the tail side or dv + (L - t)
            if du <= dv:
                if du <= radius:
                    pieces.append((e.id, ZERO, min(e.length, radius - du)))
            elif dv <= radius:
                pieces.append((e.id, max(ZERO, e.length - (radius - dv)), e.length))
        return Subtree.build(self, pieces)


class Arc:
    """A geodesic p -> q stored as consecutive oriented edge segments."""

    __slots__ = ("tree", "start", "end", "segments", "starts", "length")

    def __init__(self, tree: FiniteTree, start: TreePoint, end: TreePoint, segments):
        self.tree = tree
        self.start = start
        self.end = end
        self.segments = tuple(segments)
        starts = []
        s = ZERO
        for _, a, b in self.segments:
            starts.append(s)
            s += abs(b - a)
        self.starts = tuple(starts)
        self.length = s

    def __repr__(self) -> str:
        return f"Arc({self.start} -> {self.end})"

    def point_at(self, s: Fraction) -> TreePoint:
        if s <= 0:
            return self.start
        if s >= self.length:
            return self.end
        i = bisect_right(self.starts, s) - 1
        eid, a, b = self.segments[i]
        d = s - self.starts[i]
        return self.tree.point(eid, a + d if b > a else a - d)

    def locate(self, x: TreePoint) -> Fraction | None:
        """Arc-length position of x on the arc, or None."""
        if x == self.start:
            return ZERO
        if x == self.end:
            return self.length
        tree = self.tree
        for (eid, a, b), s0 in zip(self.segments, self.starts):
            t = tree.offset_on(x, eid)
            if t is None:
                continue
            if (a <= t <= b) or (b <= t <= a):
                return s0 + abs(t - a)
        return None

    def edge_portion(self, edge: str):
        """``(s_lo, s_hi, o_lo, o_hi)`` for the part of the arc inside the closed edge."""
        for (eid, a, b), s0 in zip(self.segments, self.starts):
            if eid == edge:
                return (s0, s0 + abs(b - a), a, b)
        e = self.tree.edges[edge]
        for v, o in ((e.tail, ZERO), (e.head, e.length)):
            s = self.locate(self.tree.vertex_point(v))
            if s is not None:
                return (s, s, o, o)
        return None

    def hits(self, region: RegionSet) -> list[tuple[Fraction, Fraction]]:
        """Closed parameter intervals where the arc lies in the region (merged)."""
        out = []
        tree = self.tree
        if region.contains(self.start):
            out.append((ZERO, ZERO))
        for (eid, a, b), s0 in zip(self.segments, self.starts):
            lo, hi = (a, b) if a <= b else (b, a)
            for c, d in region.intervals.get(eid, ()):
                c2, d2 = max(c, lo), min(d, hi)
                if c2 > d2:
                    continue
                if b > a:
                    out.append((s0 + c2 - a, s0 + d2 - a))
                else:
                    out.append((s0 + a - d2, s0 + a - c2))
            e = tree.edges[eid]
            endv = e.head if b == e.length else (e.tail if b == 0 else None)
            if endv is not None and endv in region.vertices:
                s1 = s0 + abs(b - a)
                out.append((s1, s1))
        out.sort()
        merged: list[list[Fraction]] = []
        for c, d in out:
            if merged and c <= merged[-1][1]:
                if d > merged[-1][1]:
                    merged[-1][1] = d
            else:
                merged.append([c, d])
        return [(c, d) for c, d in merged]

    def first_hit(self, region: RegionSet) -> Fraction | None:
        hits = self.hits(region)
        return hits[0][0] if hits else None

    def contains(self, x: TreePoint) -> bool:
        return self.locate(x) is not None

    def sub(self, s0: Fraction, s1: Fraction) -> Arc:
        return self.tree.geodesic(self.point_at(s0), self.point_at(s1))

    def to_region(self) -> Subtree:
        return Subtree.build(self.tree, [(eid, min(a, b), max(a, b)) for eid, a, b in self.segments])


def _merge(intervals: list[tuple[Fraction, Fraction]]) -> tuple[tuple[Fraction, Fraction], ...]:
    intervals.sort()
    merged: list[list[Fraction]] = []
    for a, b in intervals:
        if merged and a <= merged[-1][1]:
            if b > merged[-1][1]:
                merged[-1][1] = b
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


class RegionSet:
    """A closed subset of a tree made of finitely many points and segments.

    Canonical form: ``vertices`` holds every vertex in the set; ``intervals``
    maps an edge id to sorted, disjoint closed offset intervals.  Degenerate
    intervals only occur strictly inside an edge.
    """

    __slots__ = ("tree", "vertices", "intervals", "_key")

    def __init__(self, tree: FiniteTree, vertices: frozenset, intervals: dict):
        self.tree = tree
        self.vertices = vertices
        self.intervals = intervals
        self._key = None

    @classmethod
    def build(cls, tree: FiniteTree, pieces: Iterable[tuple[str, Fraction, Fraction]] = (), vertices: Iterable[str] = ()):
        verts = set(vertices)
        per_edge: dict[str, list] = {}
        for eid, a, b in pieces:
            e = tree.edges[eid]
            if a > b:
                a, b = b, a
            if a < 0 or b > e.length:
                raise ValidationError(f"interval [{a},{b}] outside edge {eid}")
            if a == 0:
                verts.add(e.tail)
            if b == e.length:
                verts.add(e.head)
            if a == b and (a == 0 or a == e.length):
                continue
            per_edge.setdefault(eid, []).append((a, b))
        intervals = {eid: _merge(per_edge[eid]) for eid in tree.edges if eid in per_edge}
        return cls(tree, frozenset(verts), intervals)

    @classmethod
    def empty(cls, tree: FiniteTree):
        return cls(tree, frozenset(), {})

    @classmethod
    def of_points(cls, tree: FiniteTree, points: Iterable[TreePoint]):
        pieces, verts = [], []
        for p in points:
            if p.vertex is not None:
                verts.append(p.vertex)
            else:
                pieces.append((p.edge, p.offset, p.offset))
        return cls.build(tree, pieces, verts)

    def as_pieces(self) -> list[tuple[str, Fraction, Fraction]]:
        return [(eid, a, b) for eid, ivs in self.intervals.items() for a, b in ivs]

    # -- predicates -------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.vertices and not self.intervals

    def contains(self, p: TreePoint) -> bool:
        if p.vertex is not None:
            return p.vertex in self.vertices
        ivs = self.intervals.get(p.edge)
        if not ivs:
            return False
        t = p.offset
        lo, hi = 0, len(ivs)
        while lo < hi:
            mid = (lo + hi) // 2
            if ivs[mid][1] < t:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(ivs) and ivs[lo][0] <= t

    def key(self):
        if self._key is None:
            self._key = (tuple(sorted(self.vertices)), tuple(sorted(self.intervals.items())))
        return self._key

    def __eq__(self, other) -> bool:
        if not isinstance(other, RegionSet):
            return NotImplemented
        return self.tree is other.tree and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def union(self, other: RegionSet) -> RegionSet:
        return RegionSet.build(self.tree, self.as_pieces() + other.as_pieces(), self.vertices | other.vertices)

    def intersection(self, other: RegionSet) -> RegionSet:
        pieces = []
        for eid, ivs in self.intervals.items():
            jvs = other.intervals.get(eid)
            if not jvs:
                continue
            i = j = 0
            while i < len(ivs) and j < len(jvs):
                a = max(ivs[i][0], jvs[j][0])
                b = min(ivs[i][1], jvs[j][1])
                if a <= b:
                    pieces.append((eid, a, b))
                if ivs[i][1] < jvs[j][1]:
                    i += 1
                else:
                    j += 1
        return RegionSet.build(self.tree, pieces, self.vertices & other.vertices)

    def issubset(self, other: RegionSet) -> bool:
        return self.intersection(other) == self

    # -- structure --------------------------------------------------------

    def components(self) -> list[RegionSet]:
        tree = self.tree
        parent: dict = {}

        def find(k):
            while parent[k] != k:
                parent[k] = parent[parent[k]]
                k = parent[k]
            return k

        for v in self.vertices:
            parent[("v", v)] = ("v", v)
        for eid, ivs in self.intervals.items():
            e = tree.edges[eid]
            for idx, (a, b) in enumerate(ivs):
                node = ("i", eid, idx)
                parent[node] = node
                if a == 0:
                    parent[find(node)] = find(("v", e.tail))
                if b == e.length:
                    parent[find(node)] = find(("v", e.head))
        groups: dict = {}
        for k in parent:
            groups.setdefault(find(k), []).append(k)
        comps = []
        for members in groups.values():
            verts = [k[1] for k in members if k[0] == "v"]
            pieces = [(k[1],) + self.intervals[k[1]][k[2]] for k in members if k[0] == "i"]
            comps.append(RegionSet.build(tree, pieces, verts))
        comps.sort(key=lambda c: str(c.anchor_point()))
        return comps

    def anchor_point(self) -> TreePoint:
        """A deterministic representative point of the set."""
        if self.is_empty():
            raise EmptySubtree("empty region has no points")
        cands = [self.tree.vertex_point(v) for v in self.vertices]
        for eid, ivs in self.intervals.items():
            cands.append(self.tree.point(eid, ivs[0][0]))
        return min(cands, key=str)

    def extreme_points(self) -> list[TreePoint]:
        """All vertices in the set and all interval endpoints."""
        pts = {self.tree.vertex_point(v) for v in self.vertices}
        for eid, ivs in self.intervals.items():
            for a, b in ivs:
                pts.add(self.tree.point(eid, a))
                pts.add(self.tree.point(eid, b))
        return sorted(pts, key=str)

    def is_single_point(self) -> bool:
        if len(self.vertices) == 1 and not self.intervals:
            return True
        if not self.vertices and len(self.intervals) == 1:
            ivs = next(iter(self.intervals.values()))
            return len(ivs) == 1 and ivs[0][0] == ivs[0][1]
        return False

    def measure(self) -> Fraction:
        return sum((b - a for ivs in self.intervals.values() for a, b in ivs), ZERO)

    def points_in_order(self) -> Iterator[TreePoint]:
        for p in self.extreme_points():
            yield p

    # -- text form ----------------------------------------------------------

    def __str__(self) -> str:
        return format_region(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({format_region(self)})"

    def to_json(self) -> dict:
        return {
            "vertices": sorted(self.vertices),
            "intervals": {eid: [[format_rational(a), format_rational(b)] for a, b in ivs] for eid, ivs in sorted(self.intervals.items())},
        }

    @classmethod
    def from_json(cls, tree: FiniteTree, data: dict):
        pieces = [(eid, parse_rational(a), parse_rational(b)) for eid, ivs in data["intervals"].items() for a, b in ivs]
        return cls.build(tree, pieces, data["vertices"])


class Subtree(RegionSet):
    """A nonempty connected RegionSet."""

    __slots__ = ()

    @classmethod
    def build(cls, tree, pieces=(), vertices=()):
        region = RegionSet.build(tree, pieces, vertices)
        return cls.of(region)

    @classmethod
    def of(cls, region: RegionSet) -> Subtree:
        if isinstance(region, Subtree):
            return region
        if region.is_empty():
            raise EmptySubtree("a subtree must be nonempty")
        if len(region.components()) != 1:
            raise ValidationError(f"region {region} is not connected")
        return cls(region.tree, region.vertices, region.intervals)

    @classmethod
    def point(cls, tree: FiniteTree, p: TreePoint) -> Subtree:
        return cls.of(RegionSet.of_points(tree, [p]))

    def branching_points(self) -> list[tuple[TreePoint, int]]:
        """Points of order >= 3 inside the subtree, with their order in it."""
        out = []
        for v in sorted(self.vertices):
            deg = 0
            for eid in self.tree.incident[v]:
                e = self.tree.edges[eid]
                ivs = self.intervals.get(eid, ())
                if e.tail == v and ivs and ivs[0][0] == 0 and ivs[0][1] > 0:
                    deg += 1
                elif e.head == v and ivs and ivs[-1][1] == e.length and ivs[-1][0] < e.length:
                    deg += 1
            if deg >= 3:
                out.append((self.tree.vertex_point(v), deg))
        return out

    def order_of(self, p: TreePoint) -> int:
        """Number of directions at p that enter the subtree."""
        tree = self.tree
        if p.vertex is None:
            ivs = self.intervals.get(p.edge, ())
            deg = 0
            for a, b in ivs:
                if a < p.offset <= b:
                    deg += 1
                if a <= p.offset < b:
                    deg += 1
            return deg
        deg = 0
        for eid in tree.incident[p.vertex]:
            e = tree.edges[eid]
            ivs = self.intervals.get(eid, ())
            if e.tail == p.vertex and ivs and ivs[0][0] == 0 and ivs[0][1] > 0:
                deg += 1
            elif e.head == p.vertex and ivs and ivs[-1][1] == e.length and ivs[-1][0] < e.length:
                deg += 1
        return deg


@dataclass(frozen=True, eq=False)
class ComponentHandle:
    """One connected component of ``X minus {base}``.

    The component is the one entered from ``base`` along ``edge`` heading
    to the vertex ``toward``.
    """

    tree: FiniteTree
    base: TreePoint
    edge: str
    toward: str

    def __eq__(self, other):
        return isinstance(other, ComponentHandle) and (self.tree, self.base, self.edge, self.toward) == (other.tree, other.base, other.edge, other.toward)

    def __hash__(self):
        return hash((self.base, self.edge, self.toward))

    def __str__(self) -> str:
        return f"component of X-{{{self.base}}} via {self.edge} toward v:{self.toward}"

    def contains(self, z: TreePoint) -> bool:
        if z == self.base:
            return False
        eid, a, b = self.tree.segments(self.base, z)[0]
        if eid != self.edge:
            return False
        e = self.tree.edges[eid]
        return (b > a) == (self.toward == e.head)

    def closure(self) -> Subtree:
        tree = self.tree
        e = tree.edges[self.edge]
        base_off = tree.offset_on(self.base, self.edge)
        if self.toward == e.head:
            pieces = [(e.id, base_off, e.length)]
        else:
            pieces = [(e.id, ZERO, base_off)]
        seen = {self.toward}
        queue = deque([self.toward])
        while queue:
            u = queue.popleft()
            for eid in tree.incident[u]:
                if eid == self.edge:
                    continue
                f = tree.edges[eid]
                pieces.append((eid, ZERO, f.length))
                w = f.other(u)
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return Subtree.build(tree, pieces)


_REGION_ITEM = re.compile(r"^(?P<edge>[A-Za-z0-9_.\-]+)@\[(?P<a>[^,\]]+),(?P<b>[^\]]+)\]$")


def format_region(region: RegionSet) -> str:
    items = []
    covered = set()
    for eid, ivs in region.intervals.items():
        e = region.tree.edges[eid]
        for a, b in ivs:
            if a == 0:
                covered.add(e.tail)
            if b == e.length:
                covered.add(e.head)
    for v in sorted(region.vertices - covered):
        items.append(f"v:{v}")
    for eid in sorted(region.intervals):
        for a, b in region.intervals[eid]:
            if a == b:
                items.append(f"{eid}@{format_rational(a)}")
            else:
                items.append(f"{eid}@[{format_rational(a)},{format_rational(b)}]")
    return "{" + ", ".join(items) + "}"


def parse_region(tree: FiniteTree, text: str) -> RegionSet:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ParseError(f"malformed region {text!r}")
    body = text[1:-1].strip()
    pieces, verts = [], []
    if body:
        for item in (s.strip() for s in body.split(", ")):
            m = _REGION_ITEM.match(item)
            if m:
                eid = m.group("edge")
                if eid not in tree.edges:
                    raise ParseError(f"unknown edge {eid!r}")
                pieces.append((eid, parse_rational(m.group("a")), parse_rational(m.group("b"))))
                continue
            p = tree.parse_point(item)
            if p.vertex is not None:
                verts.append(p.vertex)
            else:
                pieces.append((p.edge, p.offset, p.offset))
    return RegionSet.build(tree, pieces, verts)
