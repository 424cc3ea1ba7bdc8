"""Deterministic SVG drawings of a tree with optional dynamical overlays.

Layout is radial around a centroid vertex: each vertex sits at its path
distance from the centroid, and every subtree gets an angular wedge
proportional to its number of leaves.  Edges are straight segments, so a
point at offset t on an edge is drawn at fraction t / length along it.
All coordinates are printed with fixed precision, which makes the output
byte-identical for identical input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from xml.sax.saxutils import escape

from .errors import TreeDynError
from .plmap import PLMap
from .tree import FiniteTree, RegionSet, TreePoint

COLORS = {
    "tree": "#555555",
    "core": "#9ecae1",
    "fixed": "#31a354",
    "arc": "#de2d26",
    "sequence": "#756bb1",
    "limit": "#000000",
}


@dataclass
class Overlays:
    fixed: RegionSet | None = None
    core: RegionSet | None = None
    arc: tuple[TreePoint, TreePoint] | None = None
    sequence: list[TreePoint] = field(default_factory=list)
    limit: TreePoint | None = None
    title: str = ""


def centroid(tree: FiniteTree) -> str:
    """Vertex minimizing the largest remaining component; ties go to the smallest id."""
    n = len(tree.vertices)
    best = None
    for v in sorted(tree.vertices):
        worst = 0
        for eid in tree.incident[v]:
            size = len(_side(tree, v, eid))
            worst = max(worst, size)
        if best is None or worst < best[0]:
            best = (worst, v)
    assert best is not None and best[0] < n
    return best[1]


def _side(tree: FiniteTree, v: str, eid: str) -> set[str]:
    """Vertices reached from v by leaving through edge eid."""
    start = tree.edges[eid].other(v)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for e in tree.incident[u]:
            w = tree.edges[e].other(u)
            if w != v and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def layout(tree: FiniteTree) -> dict[str, tuple[float, float]]:
    """Radial positions in tree length units, centroid at the origin."""
    root = centroid(tree)
    children: dict[str, list[tuple[str, Fraction]]] = {v: [] for v in tree.vertices}
    order = [root]
    parent = {root: None}
    for u in order:
        for eid in sorted(tree.incident[u]):
            w = tree.edges[eid].other(u)
            if w not in parent:
                parent[w] = u
                children[u].append((w, tree.edges[eid].length))
                order.append(w)
    leaves: dict[str, int] = {}
    for u in reversed(order):
        leaves[u] = sum(leaves[w] for w, _ in children[u]) or 1
    pos = {root: (0.0, 0.0)}
    radius = {root: 0.0}

    def place(u: str, lo: float, hi: float) -> None:
        total = leaves[u]
        a = lo
        for w, length in children[u]:
            share = (hi - lo) * leaves[w] / total
            mid = a + share / 2
            radius[w] = radius[u] + float(length)
            pos[w] = (radius[w] * math.cos(mid), radius[w] * math.sin(mid))
            place(w, a, a + share)
            a += share

    place(root, math.pi, 3 * math.pi)
    return pos


class _Canvas:
    def __init__(self, tree: FiniteTree, size: int, margin: int):
        self.tree = tree
        self.pos = layout(tree)
        xs = [p[0] for p in self.pos.values()]
        ys = [p[1] for p in self.pos.values()]
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-9)
        self.scale = (size - 2 * margin) / span
        self.x0 = margin - min(xs) * self.scale + ((size - 2 * margin) - (max(xs) - min(xs)) * self.scale) / 2
        self.y0 = margin - min(ys) * self.scale + ((size - 2 * margin) - (max(ys) - min(ys)) * self.scale) / 2

    def xy(self, vertex: str) -> tuple[float, float]:
        x, y = self.pos[vertex]
        return self.x0 + x * self.scale, self.y0 + y * self.scale

    def at(self, edge: str, offset: Fraction) -> tuple[float, float]:
        e = self.tree.edges[edge]
        (ax, ay), (bx, by) = self.xy(e.tail), self.xy(e.head)
        s = float(offset / e.length)
        return ax + (bx - ax) * s, ay + (by - ay) * s

    def point(self, p: TreePoint) -> tuple[float, float]:
        if p.vertex is not None:
            return self.xy(p.vertex)
        return self.at(p.edge, p.offset)


def _num(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _line(c: _Canvas, edge: str, a: Fraction, b: Fraction, color: str, width: float, extra: str = "") -> str:
    (x1, y1), (x2, y2) = c.at(edge, a), c.at(edge, b)
    return (f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
            f'stroke="{color}" stroke-width="{_num(width)}" stroke-linecap="round"{extra}/>')


def _dot(c: _Canvas, p: TreePoint, color: str, r: float, extra: str = "") -> str:
    x, y = c.point(p)
    return f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(r)}" fill="{color}"{extra}/>'


def _region(c: _Canvas, region: RegionSet, color: str, width: float, dot: float, cls: str) -> list[str]:
    out = []
    covered = set()
    for eid in sorted(region.intervals):
        e = c.tree.edges[eid]
        for a, b in region.intervals[eid]:
            if a == b:
                out.append(_dot(c, c.tree.point(eid, a), color, dot, f' class="{cls}"'))
            else:
                out.append(_line(c, eid, a, b, color, width, f' class="{cls}"'))
                covered.update(v for v, t in ((e.tail, 0), (e.head, e.length)) if t in (a, b))
    for v in sorted(region.vertices - covered):
        out.append(_dot(c, c.tree.vertex_point(v), color, dot, f' class="{cls}"'))
    return out


def render_svg(tree: FiniteTree, overlays: Overlays | None = None, size: int = 480, margin: int = 40,
               labels: bool = True) -> str:
    ov = overlays or Overlays()
    c = _Canvas(tree, size, margin)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    if ov.title:
        parts.append(f'<text x="10" y="20" font-family="monospace" font-size="12">{escape(ov.title)}</text>')
    if ov.core is not None:
        parts += _region(c, ov.core, COLORS["core"], 12, 7, "core")
    for e in tree.edges.values():
        parts.append(_line(c, e.id, Fraction(0), e.length, COLORS["tree"], 2, ' class="edge"'))
    if ov.arc is not None:
        for eid, a, b in tree.segments(*ov.arc):
            parts.append(_line(c, eid, a, b, COLORS["arc"], 5, ' class="expanding-arc"'))
    if ov.fixed is not None:
        parts += _region(c, ov.fixed, COLORS["fixed"], 4, 4.5, "fixed")
    for p in ov.sequence:
        parts.append(_dot(c, p, COLORS["sequence"], 3.5, ' class="sequence"'))
    if ov.limit is not None:
        parts.append(_dot(c, ov.limit, COLORS["limit"], 2.5, ' class="limit"'))
    for v in tree.vertices:
        x, y = c.xy(v)
        parts.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="3" fill="{COLORS["tree"]}" class="vertex"/>')
        if labels:
            parts.append(f'<text x="{_num(x + 6)}" y="{_num(y - 6)}" font-family="monospace" '
                         f'font-size="11">{escape(v)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def overlays_for_map(f: PLMap, title: str = "") -> Overlays:
    """Fixed set of f only; used when no report is supplied."""
    return Overlays(fixed=f.fixed_set(), title=title)


def overlays_from_report(f: PLMap, report, title: str = "") -> Overlays:
    """Fixed set of f plus the certificates of an in-memory AnalysisReport."""
    certs = report.certificates
    ov = overlays_for_map(f, title)
    if report.core is not None and report.core.certified:
        ov.core = report.core.candidate
    arc = certs.get("expanding_arc")
    if arc is not None:
        ov.arc = (arc.start, arc.end)
    div = certs.get("divergent")
    if div is not None:
        ov.sequence = list(div.points)
        ov.limit = div.limit
    return ov


def overlays_from_json(f: PLMap, data: dict, title: str = "") -> Overlays:
    """Fixed set of f plus the certificates of a serialized report."""
    tree = f.tree
    certs = data.get("certificates", {})
    ov = overlays_for_map(f, title)
    try:
        core = data.get("core")
        if core and core.get("status") in ("Exact", "CertifiedLimit"):
            ov.core = RegionSet.from_json(tree, core["candidate"])
        if "expanding_arc" in certs:
            a, b = certs["expanding_arc"]["arc"]
            ov.arc = (tree.parse_point(a), tree.parse_point(b))
        if "divergent" in certs:
            ov.sequence = [tree.parse_point(p) for p in certs["divergent"]["points"]]
            ov.limit = tree.parse_point(certs["divergent"]["limit"])
    except (KeyError, TypeError, ValueError) as exc:
        raise TreeDynError(f"malformed report: {exc}") from None
    return ov
