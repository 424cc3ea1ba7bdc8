"""Piecewise-linear self-maps of a finite tree.

Each edge is cut at breakpoints ``0 = t0 < t1 < ... < tk = length``.  On a
piece ``[ti, ti+1]`` the map runs along the geodesic from ``start`` to
``end`` at constant speed (a constant piece has ``start == end``).
"""
from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterable

from .errors import BudgetExceeded, InternalError, ValidationError
from .tree import ZERO, Arc, FiniteTree, RegionSet, Subtree, TreePoint

DEFAULT_BUDGET = 100_000


class Piece:
    __slots__ = ("edge", "t0", "t1", "start", "end", "length", "_arc")

    def __init__(self, edge: str, t0: Fraction, t1: Fraction, start: TreePoint, end: TreePoint, length: Fraction):
        self.edge = edge
        self.t0 = t0
        self.t1 = t1
        self.start = start
        self.end = end
        self.length = length
        self._arc = None

    @property
    def constant(self) -> bool:
        return self.length == 0

    @property
    def speed(self) -> Fraction:
        return self.length / (self.t1 - self.t0)

    def arc(self, tree: FiniteTree) -> Arc:
        if self._arc is None:
            self._arc = tree.geodesic(self.start, self.end)
        return self._arc

    def key(self):
        return (self.edge, self.t0, self.t1, self.start, self.end)

    def __repr__(self) -> str:
        return f"Piece({self.edge} [{self.t0},{self.t1}] -> {self.start}..{self.end})"


def _mergeable(tree: FiniteTree, a: Piece, b: Piece) -> bool:
    if a.end != b.start:
        return False
    if a.length * (b.t1 - b.t0) != b.length * (a.t1 - a.t0):
        return False
    if a.length == 0:
        return True
    return a.length + b.length == tree.distance(a.start, b.end)


def _append(tree: FiniteTree, out: list[Piece], piece: Piece) -> None:
    if out and _mergeable(tree, out[-1], piece):
        prev = out[-1]
        out[-1] = Piece(prev.edge, prev.t0, piece.t1, prev.start, piece.end, prev.length + piece.length)
    else:
        out.append(piece)


class PLMap:
    """A continuous piecewise-linear map of a finite tree into itself."""

    def __init__(self, tree: FiniteTree, pieces: dict[str, list[Piece]], validate: bool = True):
        self.tree = tree
        canon: dict[str, tuple[Piece, ...]] = {}
        for eid in tree.edges:
            out: list[Piece] = []
            for p in pieces.get(eid, ()):
                _append(tree, out, p)
            canon[eid] = tuple(out)
        self.pieces = canon
        if validate:
            self._validate()
        self._t0s = {eid: [p.t0 for p in ps] for eid, ps in canon.items()}
        self.vertex_image: dict[str, TreePoint] = {}
        for eid, ps in canon.items():
            e = tree.edges[eid]
            self.vertex_image.setdefault(e.tail, ps[0].start)
            self.vertex_image.setdefault(e.head, ps[-1].end)

    @classmethod
    def from_items(cls, tree: FiniteTree, items: Iterable[tuple]) -> PLMap:
        """Build from ``(edge, t0, t1, start, end)`` tuples."""
        by_edge: dict[str, list[Piece]] = {}
        for eid, t0, t1, start, end in items:
            if eid not in tree.edges:
                raise ValidationError(f"piece on unknown edge {eid!r}")
            t0, t1 = Fraction(t0), Fraction(t1)
            if not t0 < t1:
                raise ValidationError(f"empty piece [{t0},{t1}] on edge {eid}")
            by_edge.setdefault(eid, []).append(Piece(eid, t0, t1, start, end, tree.distance(start, end)))
        for ps in by_edge.values():
            ps.sort(key=lambda p: p.t0)
        return cls(tree, by_edge)

    @classmethod
    def identity(cls, tree: FiniteTree) -> PLMap:
        items = []
        for e in tree.edges.values():
            items.append((e.id, ZERO, e.length, tree.vertex_point(e.tail), tree.vertex_point(e.head)))
        return cls.from_items(tree, items)

    @classmethod
    def constant(cls, tree: FiniteTree, c: TreePoint) -> PLMap:
        return cls.from_items(tree, [(e.id, ZERO, e.length, c, c) for e in tree.edges.values()])

    def _validate(self) -> None:
        tree = self.tree
        images: dict[str, TreePoint] = {}
        for eid, ps in self.pieces.items():
            e = tree.edges[eid]
            if not ps:
                raise ValidationError(f"edge {eid} has no pieces")
            if ps[0].t0 != 0 or ps[-1].t1 != e.length:
                raise ValidationError(f"pieces on edge {eid} do not cover [0, {e.length}]")
            for a, b in zip(ps, ps[1:]):
                if a.t1 != b.t0:
                    raise ValidationError(f"pieces on edge {eid} leave a gap or overlap at {a.t1}")
                if a.end != b.start:
                    raise ValidationError(f"continuity at breakpoint {b.t0} on edge {eid}")
            for v, val in ((e.tail, ps[0].start), (e.head, ps[-1].end)):
                if v in images and images[v] != val:
                    raise ValidationError(f"continuity at vertex {v}")
                images[v] = val

    # -- basic queries ------------------------------------------------------

    def piece_count(self) -> int:
        return sum(len(ps) for ps in self.pieces.values())

    def items(self) -> list[tuple]:
        return [p.key() for ps in self.pieces.values() for p in ps]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PLMap):
            return NotImplemented
        return self.tree is other.tree and self.items() == other.items()

    def __hash__(self) -> int:
        return hash(tuple(self.items()))

    def piece_at(self, edge: str, t: Fraction) -> Piece:
        ps = self.pieces[edge]
        i = bisect_right(self._t0s[edge], t) - 1
        if i >= len(ps):
            i = len(ps) - 1
        return ps[i]

    def _eval_on(self, piece: Piece, t: Fraction) -> TreePoint:
        if piece.length == 0 or t == piece.t0:
            return piece.start
        if t == piece.t1:
            return piece.end
        return piece.arc(self.tree).point_at((t - piece.t0) * piece.speed)

    def __call__(self, p: TreePoint) -> TreePoint:
        if p.vertex is not None:
            return self.vertex_image[p.vertex]
        return self._eval_on(self.piece_at(p.edge, p.offset), p.offset)

    eval = __call__

    def breakpoints(self, edge: str) -> list[Fraction]:
        return self._t0s[edge] + [self.tree.edges[edge].length]

    # -- composition ----------------------------------------------------------

    def compose(self, inner: PLMap, budget: int = DEFAULT_BUDGET) -> PLMap:
        """The map ``self o inner``."""
        tree = self.tree
        if inner.tree is not tree:
            raise ValidationError("maps live on different trees")
        total = 0
        out: dict[str, list[Piece]] = {}
        for eid, ps in inner.pieces.items():
            acc: list[Piece] = []
            for gp in ps:
                if gp.length == 0:
                    c = self(gp.start)
                    _append(tree, acc, Piece(eid, gp.t0, gp.t1, c, c, ZERO))
                    continue
                arc = gp.arc(tree)
                cuts = {ZERO, arc.length}
                for (seg_e, a, b), s0 in zip(arc.segments, arc.starts):
                    lo, hi = (a, b) if a < b else (b, a)
                    for bp in self._t0s[seg_e]:
                        if lo < bp < hi:
                            cuts.add(s0 + abs(bp - a))
                    cuts.add(s0 + abs(b - a))
                svals = sorted(cuts)
                scale = (gp.t1 - gp.t0) / arc.length
                prev_tau = gp.t0
                prev_val = self(gp.start)
                for s in svals[1:]:
                    tau = gp.t0 + s * scale
                    val = self(arc.point_at(s))
                    _append(tree, acc, Piece(eid, prev_tau, tau, prev_val, val, tree.distance(prev_val, val)))
                    prev_tau, prev_val = tau, val
                if total + len(acc) > budget:
                    raise BudgetExceeded(total + len(acc), budget)
            total += len(acc)
            out[eid] = acc
        return PLMap(tree, out, validate=False)

    def power(self, n: int, budget: int = DEFAULT_BUDGET) -> PLMap:
        if n < 0:
            raise ValueError("negative exponent")
        result = PLMap.identity(self.tree)
        for _ in range(n):
            result = self.compose(result, budget)
        return result

    # -- fixed points, preimages, images ----------------------------------------

    def fixed_set(self) -> RegionSet:
        tree = self.tree
        pieces: list[tuple[str, Fraction, Fraction]] = []
        verts = [v for v in tree.vertices if self.vertex_image[v] == tree.vertex_point(v)]
        for eid, ps in self.pieces.items():
            for p in ps:
                if p.length == 0:
                    o = tree.offset_on(p.start, eid)
                    if o is not None and p.t0 <= o <= p.t1:
                        pieces.append((eid, o, o))
                    continue
                portion = p.arc(tree).edge_portion(eid)
                if portion is None:
                    continue
                s_lo, s_hi, o_lo, o_hi = portion
                v = p.speed
                if s_lo == s_hi:
                    tau = p.t0 + s_lo / v
                    if tau == o_lo and p.t0 <= tau <= p.t1:
                        pieces.append((eid, tau, tau))
                    continue
                sigma = 1 if o_hi > o_lo else -1
                sv = sigma * v
                rhs = sv * p.t0 + sigma * s_lo - o_lo
                lo = max(p.t0, p.t0 + s_lo / v)
                hi = min(p.t1, p.t0 + s_hi / v)
                if lo > hi:
                    continue
                if sv != 1:
                    tau = rhs / (sv - 1)
                    if lo <= tau <= hi:
                        pieces.append((eid, tau, tau))
                elif rhs == 0:
                    pieces.append((eid, lo, hi))
        result = RegionSet.build(tree, pieces, verts)
        if result.is_empty():
            raise InternalError("empty fixed set: a tree map always has a fixed point")
        return result

    def preimages_point(self, y: TreePoint) -> RegionSet:
        tree = self.tree
        pieces = []
        for eid, ps in self.pieces.items():
            for p in ps:
                if p.length == 0:
                    if p.start == y:
                        pieces.append((eid, p.t0, p.t1))
                    continue
                s = p.arc(tree).locate(y)
                if s is not None:
                    tau = p.t0 + s / p.speed
                    pieces.append((eid, tau, tau))
        return RegionSet.build(tree, pieces)

    def _image_pieces(self, region: RegionSet):
        tree = self.tree
        pieces: list[tuple[str, Fraction, Fraction]] = []
        verts: list[str] = []

        def add_point(q: TreePoint):
            if q.vertex is not None:
                verts.append(q.vertex)
            else:
                pieces.append((q.edge, q.offset, q.offset))

        for v in region.vertices:
            add_point(self.vertex_image[v])
        for eid, ivs in region.intervals.items():
            ps = self.pieces[eid]
            t0s = self._t0s[eid]
            for a, b in ivs:
                i = max(bisect_right(t0s, a) - 1, 0)
                while i < len(ps) and ps[i].t0 <= b:
                    p = ps[i]
                    c, d = max(a, p.t0), min(b, p.t1)
                    i += 1
                    if c > d:
                        continue
                    fc = self._eval_on(p, c)
                    fd = fc if c == d or p.length == 0 else self._eval_on(p, d)
                    if fc == fd:
                        add_point(fc)
                    else:
                        pieces.extend((e2, min(x, y), max(x, y)) for e2, x, y in tree.segments(fc, fd))
        return pieces, verts

    def image_region(self, region: RegionSet) -> RegionSet:
        pieces, verts = self._image_pieces(region)
        return RegionSet.build(self.tree, pieces, verts)

    def image_subtree(self, Y: RegionSet) -> Subtree:
        pieces, verts = self._image_pieces(Y)
        region = RegionSet.build(self.tree, pieces, verts)
        return Subtree(region.tree, region.vertices, region.intervals)

    def image_arc(self, A: Arc) -> Subtree:
        return self.image_subtree(A.to_region())

    def image(self) -> Subtree:
        return self.image_subtree(self.tree.whole())

    def is_identity_on(self, Y: RegionSet) -> bool:
        tree = self.tree
        for v in Y.vertices:
            if self.vertex_image[v] != tree.vertex_point(v):
                return False
        for eid, ivs in Y.intervals.items():
            ps = self.pieces[eid]
            for a, b in ivs:
                for p in ps:
                    c, d = max(a, p.t0), min(b, p.t1)
                    if c > d:
                        continue
                    if self._eval_on(p, c) != tree.point(eid, c) or self._eval_on(p, d) != tree.point(eid, d):
                        return False
        return True

    def is_identity(self) -> bool:
        return self.is_identity_on(self.tree.whole())

    def is_constant(self) -> bool:
        return all(p.length == 0 for ps in self.pieces.values() for p in ps)

    def max_speed(self) -> Fraction:
        return max(p.speed for ps in self.pieces.values() for p in ps)


class Iterates:
    """Lazily computed powers of a map and their fixed sets."""

    def __init__(self, f: PLMap, budget: int = DEFAULT_BUDGET):
        self.f = f
        self.budget = budget
        self._powers: list[PLMap] = [PLMap.identity(f.tree), f]
        self._fixed: dict[int, RegionSet] = {}

    def power(self, n: int) -> PLMap:
        while len(self._powers) <= n:
            self._powers.append(self.f.compose(self._powers[-1], self.budget))
        return self._powers[n]

    def computed(self) -> int:
        return len(self._powers) - 1

    def fixed(self, n: int) -> RegionSet:
        if n not in self._fixed:
            self._fixed[n] = self.power(n).fixed_set()
        return self._fixed[n]


def retraction_map(Y: RegionSet) -> PLMap:
    """The first-point retraction onto a subtree, as a PL map.

    It is the identity on Y and constant on each stretch of an edge
    outside Y, since such a stretch is connected and misses Y.
    """
    tree = Y.tree
    items = []
    for e in tree.edges.values():
        pos = ZERO
        cuts = []
        for a, b in Y.intervals.get(e.id, ()):
            if a > pos:
                cuts.append((pos, a, False))
            if a < b:
                cuts.append((a, b, True))
            pos = b
        if pos < e.length:
            cuts.append((pos, e.length, False))
        for a, b, inside in cuts:
            if inside:
                items.append((e.id, a, b, tree.point(e.id, a), tree.point(e.id, b)))
            else:
                c = tree.first_point_retraction(Y, tree.point(e.id, (a + b) / 2))
                items.append((e.id, a, b, c, c))
    return PLMap.from_items(tree, items)
