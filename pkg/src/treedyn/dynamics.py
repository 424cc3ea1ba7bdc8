"""Orbits, the eventual image, periodic sets and a numeric sensitivity probe."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded
from .fastmap import FloatMap
from .plmap import DEFAULT_BUDGET, Iterates, PLMap
from .tree import ZERO, RegionSet, Subtree, TreePoint, format_rational

EXACT = "Exact"
CERTIFIED_LIMIT = "CertifiedLimit"
ENCLOSURE = "Enclosure"


@dataclass(frozen=True)
class OrbitRecord:
    base: TreePoint
    points: tuple[TreePoint, ...]
    preperiod: int | None = None
    period: int | None = None

    @property
    def eventually_periodic(self) -> bool:
        return self.period is not None

    def at(self, k: int) -> TreePoint:
        """The k-th iterate, using the detected cycle past the stored prefix."""
        if k < len(self.points):
            return self.points[k]
        if self.period is None:
            raise IndexError(k)
        return self.points[self.preperiod + (k - self.preperiod) % self.period]

    def cycle(self) -> tuple[TreePoint, ...]:
        if self.period is None:
            return ()
        return self.points[self.preperiod:self.preperiod + self.period]


def orbit(f: PLMap, x: TreePoint, N: int) -> OrbitRecord:
    """Iterate up to N times, stopping early at the first exact repetition."""
    seen = {x: 0}
    points = [x]
    p = x
    for k in range(1, N + 1):
        p = f(p)
        if p in seen:
            j = seen[p]
            return OrbitRecord(x, tuple(points), j, k - j)
        seen[p] = k
        points.append(p)
    return OrbitRecord(x, tuple(points))


@dataclass(frozen=True)
class EventualImageResult:
    candidate: Subtree
    status: str
    depth: int
    power: int | None = None
    radius: Fraction | None = None
    contraction: Fraction | None = None

    @property
    def certified(self) -> bool:
        return self.status in (EXACT, CERTIFIED_LIMIT)

    def to_json(self) -> dict:
        out = {"status": self.status, "depth": self.depth, "candidate": self.candidate.to_json()}
        if self.status == CERTIFIED_LIMIT:
            out["power"] = self.power
            out["radius"] = format_rational(self.radius)
            out["contraction"] = format_rational(self.contraction)
        return out


def _positive_difference(Z: RegionSet, P: RegionSet) -> list[tuple[str, Fraction, Fraction]]:
    """Intervals of positive length making up the closure of Z minus P."""
    out = []
    for eid, ivs in Z.intervals.items():
        holes = P.intervals.get(eid, ())
        for a, b in ivs:
            cur = a
            for c, d in holes:
                if d <= cur or c >= b:
                    continue
                if c > cur:
                    out.append((eid, cur, c))
                cur = max(cur, d)
            if cur < b:
                out.append((eid, cur, b))
    return out


def _contraction_bound(g: PLMap, gaps) -> Fraction | None:
    """Largest speed of g over the given intervals, or None if some speed is >= 1."""
    worst = ZERO
    for eid, a, b in gaps:
        for p in g.pieces[eid]:
            if p.t1 <= a or p.t0 >= b:
                continue
            if p.speed >= 1:
                return None
            worst = max(worst, p.speed)
    return worst


def eventual_image(f: PLMap, max_depth: int, iterates: Iterates | None = None, max_power: int = 4) -> EventualImageResult:
    """Intersection of the forward images of the whole tree.

    Exact when the image sequence stabilizes.  Otherwise a candidate P drawn
    from the fixed sets of small powers g = f^k is certified when f[P] = P
    and g has speed below 1 on the part of some image f^m[X] outside P:
    a point of the eventual image farthest from P would then have to be
    the image of a point strictly closer to P.
    """
    it = iterates or Iterates(f, DEFAULT_BUDGET)
    tree = f.tree
    images = [tree.whole()]
    for m in range(max_depth):
        nxt = f.image_subtree(images[-1])
        if nxt == images[-1]:
            return EventualImageResult(images[-1], EXACT, m)
        images.append(nxt)
    for k in range(1, max_power + 1):
        P = it.fixed(k)
        if not tree.is_connected(P):
            continue
        P = Subtree.of(P)
        if f.image_subtree(P) != P:
            continue
        g = it.power(k)
        for m, Z in enumerate(images):
            if not P.issubset(Z):
                continue
            c = _contraction_bound(g, _positive_difference(Z, P))
            if c is None:
                continue
            radius = max((tree.distance_to(P, z) for z in Z.extreme_points()), default=ZERO)
            return EventualImageResult(P, CERTIFIED_LIMIT, m, power=k, radius=radius, contraction=c)
    return EventualImageResult(images[-1], ENCLOSURE, max_depth)


def periodic_set(f: PLMap, N: int, iterates: Iterates | None = None) -> RegionSet:
    it = iterates or Iterates(f, DEFAULT_BUDGET)
    result = RegionSet.empty(f.tree)
    for n in range(1, N + 1):
        result = result.union(it.fixed(n))
    return result


@dataclass(frozen=True)
class OmegaEstimate:
    points: tuple[TreePoint, ...]
    exact: bool


def omega_limit_estimate(f: PLMap, x: TreePoint, N: int, tail: int, tol: Fraction = Fraction(1, 64)) -> OmegaEstimate:
    """Cluster representatives of the orbit tail.

    Exact when the orbit is eventually periodic within N steps.  Otherwise
    the tail is grouped into clusters of diameter-ish ``tol`` and each
    cluster's last point is snapped to a nearby fixed point of f^p (p <= 4)
    when one lies within ``tol``.
    """
    if not 0 < tail < N:
        raise ValueError("need 0 < tail < N")
    rec = orbit(f, x, N)
    if rec.eventually_periodic:
        return OmegaEstimate(tuple(sorted(set(rec.cycle()), key=str)), True)
    tree = f.tree
    pts = list(rec.points[-tail:])
    clusters: list[list[TreePoint]] = []
    for p in pts:
        for c in clusters:
            if any(tree.distance(p, q) <= tol for q in c):
                c.append(p)
                break
        else:
            clusters.append([p])
    it = Iterates(f, DEFAULT_BUDGET)
    snaps = []
    for p in range(1, 5):
        try:
            snaps.extend(it.fixed(p).components())
        except BudgetExceeded:
            break
    reps = set()
    for c in clusters:
        rep = c[-1]
        best = None
        for comp in snaps:
            r = tree.first_point_retraction(comp, rep)
            d = tree.distance(r, rep)
            if d <= tol and (best is None or d < best[0]):
                best = (d, r)
        reps.add(best[1] if best else rep)
    return OmegaEstimate(tuple(sorted(reps, key=str)), False)


@dataclass(frozen=True)
class ProbeWitness:
    x: TreePoint
    y: TreePoint
    n: int
    separation: Fraction
    heuristic: bool = field(default=True)

    def to_json(self) -> dict:
        return {"x": str(self.x), "y": str(self.y), "n": self.n,
                "separation": format_rational(self.separation), "heuristic": True}


def _probe_pairs(f: PLMap, mesh: Fraction) -> list[tuple[TreePoint, TreePoint]]:
    """Seed pairs at vertices and fixed points first, then all mesh-adjacent pairs."""
    tree = f.tree
    pairs: list[tuple[TreePoint, TreePoint]] = []
    seeds = [tree.vertex_point(v) for v in tree.vertices]
    seeds += f.fixed_set().extreme_points()
    seen = set()
    for p in sorted(set(seeds), key=str):
        for h in tree.components_minus_point(p):
            e = tree.edges[h.edge]
            o = tree.offset_on(p, h.edge)
            if h.toward == e.head:
                q = tree.point(h.edge, min(e.length, o + mesh))
            else:
                q = tree.point(h.edge, max(ZERO, o - mesh))
            key = frozenset((p, q))
            if key not in seen:
                seen.add(key)
                pairs.append((p, q))
    for e in tree.edges.values():
        k = 0
        while k * mesh < e.length:
            a = tree.point(e.id, k * mesh)
            b = tree.point(e.id, min(e.length, (k + 1) * mesh))
            key = frozenset((a, b))
            if key not in seen:
                seen.add(key)
                pairs.append((a, b))
            k += 1
    return pairs


def _confirm(f: PLMap, x: TreePoint, y: TreePoint, n: int, eps: Fraction) -> Fraction | None:
    for _ in range(n):
        x, y = f(x), f(y)
    d = f.tree.distance(x, y)
    return d if d > eps else None


def modulus_probe(f: PLMap, eps: Fraction, mesh: Fraction, max_iter: int) -> ProbeWitness | None:
    """Search mesh-adjacent pairs whose iterates separate by more than eps.

    The search runs in floating point; a candidate is only returned after
    exact re-evaluation confirms the separation.  The result is heuristic
    evidence of sensitivity, never a certificate.
    """
    eps, mesh = Fraction(eps), Fraction(mesh)
    if eps <= 0 or mesh <= 0:
        raise ValueError("eps and mesh must be positive")
    pairs = _probe_pairs(f, mesh)
    fm = FloatMap(f)
    enc = [fm.encode(p) for p, _ in pairs]
    enc2 = [fm.encode(q) for _, q in pairs]
    e1 = np.array([e for e, _ in enc], dtype=np.int64)
    o1 = np.array([o for _, o in enc])
    e2 = np.array([e for e, _ in enc2], dtype=np.int64)
    o2 = np.array([o for _, o in enc2])
    feps = float(eps)
    # first n at which each pair separates in floats; candidates are then
    # confirmed exactly in (n, pair order)
    first = np.full(len(pairs), -1, dtype=np.int64)
    for n in range(1, max_iter + 1):
        e1, o1 = fm.apply(e1, o1)
        e2, o2 = fm.apply(e2, o2)
        d = fm.distance(e1, o1, e2, o2)
        hit = (d > feps * (1 + 1e-9)) & (first < 0)
        first[hit] = n
    order = sorted((int(n), i) for i, n in enumerate(first) if n > 0)
    for n, i in order:
        x, y = pairs[i]
        sep = _confirm(f, x, y, n, eps)
        if sep is not None:
            return ProbeWitness(x, y, n, sep)
    return None
