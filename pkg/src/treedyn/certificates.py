"""From an expanding arc to a discontinuity certificate for the remainder.

An expanding-arc witness (x, y, n) gives backward chains y_0, y_1, ...
with f^n(y_{k+1}) = y_k marching monotonically to a fixed point of f^n.
A chain whose base point has a forward orbit staying away from the limit
(a *divergent* sequence) shows that no remainder function f^u is
continuous.  Every certificate here is finite and re-checked from
scratch by :func:`verify_divergent`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from .dynamics import orbit
from .errors import BudgetExceeded, InternalError, SolverFailure
from .plmap import DEFAULT_BUDGET, Iterates, PLMap
from .tree import RegionSet, Subtree, TreePoint, format_rational

if TYPE_CHECKING:
    from .criteria import ExpandingArcCert

EVENTUALLY_PERIODIC = "EventuallyPeriodic"
FINITE_PREFIX = "FinitePrefix"
MAX_CHAIN = 40
MAX_CASE2_POWER = 6


@dataclass(frozen=True)
class BackwardSequenceCert:
    n: int
    limit: TreePoint
    points: tuple[TreePoint, ...]
    shifted: bool = False

    def to_json(self) -> dict:
        return {"n": self.n, "limit": str(self.limit), "points": [str(p) for p in self.points],
                "shifted": self.shifted}


@dataclass(frozen=True)
class Avoidance:
    kind: str
    steps: int
    preperiod: int | None = None
    period: int | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "steps": self.steps}
        if self.kind == EVENTUALLY_PERIODIC:
            out["preperiod"] = self.preperiod
            out["period"] = self.period
        return out


@dataclass(frozen=True)
class DivergentSequenceCert:
    m: int
    points: tuple[TreePoint, ...]
    limit: TreePoint
    radius: Fraction
    avoidance: Avoidance
    case: int
    shifted: bool = False

    @property
    def fully_certified(self) -> bool:
        return self.avoidance.kind == EVENTUALLY_PERIODIC

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "points": [str(p) for p in self.points],
            "limit": str(self.limit),
            "radius": format_rational(self.radius),
            "avoidance": self.avoidance.to_json(),
            "case": self.case,
            "shifted": self.shifted,
            "fully_certified": self.fully_certified,
        }


def _nearest_preimage(g: PLMap, target: TreePoint, toward: TreePoint) -> TreePoint | None:
    """The preimage of ``target`` on the arc target..toward closest to target, target excluded."""
    arc = g.tree.geodesic(target, toward)
    for c, d in arc.hits(g.preimages_point(target)):
        if d == 0:
            continue
        return arc.point_at(c if c > 0 else d)
    return None


def _first_fixed_after(tree, fixed: RegionSet, start: TreePoint, toward: TreePoint) -> TreePoint | None:
    """First fixed point strictly after ``start`` on the arc toward ``toward``."""
    arc = tree.geodesic(start, toward)
    hits = arc.hits(fixed)
    if hits and hits[0][0] == 0:
        if hits[0][1] > 0:
            return None  # start sits in a fixed segment
        hits = hits[1:]
    return arc.point_at(hits[0][0]) if hits else None


def shifted_start(g: PLMap, fixed: RegionSet, y: TreePoint) -> TreePoint | None:
    """Nearest fixed point of g beyond y on the arc from y to g(y), if any."""
    gy = g(y)
    if gy == y:
        return None
    return _first_fixed_after(g.tree, fixed, y, gy)


def backward_sequence(
    f: PLMap,
    cert: ExpandingArcCert,
    K: int,
    start: TreePoint | None = None,
    iterates: Iterates | None = None,
) -> BackwardSequenceCert:
    """Solve f^n(y_{k+1}) = y_k toward the fixed end of the witness arc.

    The limit is the first fixed point of f^n met walking from y_0 to x;
    each new term is the preimage closest to the previous one on the arc
    toward that limit.  ``start`` replaces y_0 (the shifted variant).
    """
    if cert.witness is None:
        raise SolverFailure("certificate has no witness")
    it = iterates or Iterates(f)
    x, y = cert.witness
    g = it.power(cert.n)
    y0 = start if start is not None else y
    if y0 == x:
        raise SolverFailure("start point equals the fixed end")
    limit = _first_fixed_after(f.tree, it.fixed(cert.n), y0, x)
    if limit is None:
        raise SolverFailure("no fixed point between the start and x")
    points = [y0]
    for _ in range(K):
        p = _nearest_preimage(g, points[-1], limit)
        if p is None:
            raise SolverFailure(f"no preimage of {points[-1]} toward {limit}")
        points.append(p)
    return BackwardSequenceCert(cert.n, limit, tuple(points), start is not None)


def _fix_free(tree, fixed: RegionSet, limit: TreePoint, p: TreePoint) -> bool:
    return tree.geodesic(limit, p).hits(fixed) == [(0, 0)]


def _interior_branching(tree, p: TreePoint, q: TreePoint) -> bool:
    segs = tree.segments(p, q)
    for eid, a, b in segs[:-1]:
        e = tree.edges[eid]
        v = e.head if b == e.length else e.tail
        if tree.order(tree.vertex_point(v)) >= 3:
            return True
    return False


def divergent_sequence(
    f: PLMap,
    bseq: BackwardSequenceCert,
    T: int,
    K: int | None = None,
    iterates: Iterates | None = None,
) -> DivergentSequenceCert:
    """Turn a backward chain into a divergent one.

    The chain is trimmed so that it sits in a free arc I = x_0..limit.  If
    every orbit point of x_0 retracts onto x_0 (its end of I) the chain is
    itself divergent; otherwise the first m with r_I(g^m(x_0)) past x_0
    brackets a fixed point z_0 of g^m between x_0 and x_m, and a fresh
    g^m-backward chain from z_0 is divergent since z_0's orbit is {z_0}.
    """
    it = iterates or Iterates(f)
    tree = f.tree
    n = bseq.n
    g = it.power(n)
    limit = bseq.limit
    K = K if K is not None else len(bseq.points) - 1
    pts = list(bseq.points)

    def extend(chain: list[TreePoint], h: PLMap) -> None:
        p = _nearest_preimage(h, chain[-1], limit)
        if p is None:
            raise SolverFailure(f"chain cannot be extended past {chain[-1]}")
        chain.append(p)

    while _interior_branching(tree, pts[0], limit):
        pts.pop(0)
        if len(pts) < 2:
            extend(pts, g)
    if len(pts) > MAX_CHAIN:
        raise SolverFailure("chain too long")
    x0 = pts[0]
    I = Subtree.of(tree.geodesic(x0, limit).to_region())
    rec = orbit(g, x0, T)
    total = rec.preperiod + rec.period if rec.eventually_periodic else len(rec.points) - 1
    m = None
    for j in range(1, total + 1):
        if tree.first_point_retraction(I, rec.at(j)) != x0:
            m = j
            break
    fixed_g = it.fixed(n)
    radius = tree.distance(x0, limit) / 2

    if m is None:
        while len(pts) < K + 1 or not _fix_free(tree, fixed_g, limit, pts[-1]):
            extend(pts, g)
            if len(pts) > MAX_CHAIN:
                raise SolverFailure("chain does not clear the fixed points near the limit")
        if rec.eventually_periodic:
            avoid = Avoidance(EVENTUALLY_PERIODIC, total, rec.preperiod, rec.period)
        else:
            avoid = Avoidance(FINITE_PREFIX, T)
        return DivergentSequenceCert(n, tuple(pts), limit, radius, avoid, 1, bseq.shifted)

    if n * m > MAX_CASE2_POWER:
        raise SolverFailure(f"second-case exponent {n * m} exceeds {MAX_CASE2_POWER}")
    while len(pts) <= m:
        extend(pts, g)
    G = it.power(n * m)
    fixed_G = it.fixed(n * m)
    bracket = tree.geodesic(x0, pts[m])
    z0 = None
    for c, d in bracket.hits(fixed_G):
        if 0 < c < bracket.length:
            z0 = bracket.point_at(c)
            break
    if z0 is None:
        raise InternalError("no fixed point bracketed between x_0 and x_m")
    # the fresh chain can only accumulate at the first fixed point of g^m
    # past z_0, which may sit before the original limit
    limit = _first_fixed_after(tree, fixed_G, z0, limit)
    if limit is None:
        raise SolverFailure("z_0 sits in a fixed segment of g^m")
    chain = [z0]
    while len(chain) < K + 1 or not _fix_free(tree, fixed_G, limit, chain[-1]):
        extend(chain, G)
        if len(chain) > MAX_CHAIN:
            raise SolverFailure("chain does not clear the fixed points near the limit")
    radius = tree.distance(z0, limit) / 2
    avoid = Avoidance(EVENTUALLY_PERIODIC, 1, 0, 1)
    return DivergentSequenceCert(n * m, tuple(chain), limit, radius, avoid, 2, bseq.shifted)


def best_divergent_sequence(
    f: PLMap,
    cert: ExpandingArcCert,
    K: int = 3,
    T: int = 64,
    budget: int = DEFAULT_BUDGET,
    iterates: Iterates | None = None,
) -> DivergentSequenceCert | None:
    """Try the plain chain from y and the one shifted to the next fixed point.

    Preference: fully certified first, then the smaller exponent, then plain.
    """
    it = iterates or Iterates(f, budget)
    x, y = cert.witness
    starts: list[TreePoint | None] = [None]
    w = shifted_start(it.power(cert.n), it.fixed(cert.n), y)
    if w is not None:
        starts.append(w)
    found = []
    err: Exception | None = None
    for idx, start in enumerate(starts):
        try:
            b = backward_sequence(f, cert, K, start=start, iterates=it)
            d = divergent_sequence(f, b, T, K=K, iterates=it)
        except SolverFailure as exc:
            err = exc
            continue
        check = verify_divergent(f, d, budget)
        if check is False or (d.fully_certified and check is not True):
            raise InternalError("constructed divergent sequence failed its own check")
        found.append(((not d.fully_certified, d.m, idx), d))
    if not found:
        if err is not None:
            raise err
        return None
    return min(found, key=lambda t: t[0])[1]


# -- independent checkers --------------------------------------------------------


def _power_eval(f: PLMap, p: TreePoint, m: int) -> TreePoint:
    for _ in range(m):
        p = f(p)
    return p


def verify_backward(f: PLMap, cert: BackwardSequenceCert) -> bool:
    tree = f.tree
    if _power_eval(f, cert.limit, cert.n) != cert.limit:
        return False
    pts = cert.points
    for a, b in zip(pts, pts[1:]):
        if _power_eval(f, b, cert.n) != a:
            return False
        if b == a or b == cert.limit or not tree.between(a, b, cert.limit):
            return False
    return True


def verify_divergent(f: PLMap, cert: DivergentSequenceCert, budget: int = DEFAULT_BUDGET) -> bool | str:
    """Walk the three defining conditions with exact arithmetic.

    Returns True for a complete proof, ``"partial"`` when only a finite
    orbit prefix was checked, and False on any failure.
    """
    tree = f.tree
    m, limit, pts = cert.m, cert.limit, cert.points
    if m < 1 or len(pts) < 2 or cert.radius <= 0:
        return False
    # (2) backward relations, and the limit is fixed
    if _power_eval(f, limit, m) != limit:
        return False
    for a, b in zip(pts, pts[1:]):
        if _power_eval(f, b, m) != a:
            return False
    # (1) strictly monotone toward the limit and no fixed point of f^m in
    # (limit, x_K]; further preimages then exist and can only converge to it
    for a, b in zip(pts, pts[1:]):
        if b == a or b == limit or not tree.between(a, b, limit):
            return False
    fixed = f.power(m, budget).fixed_set()
    if not _fix_free(tree, fixed, limit, pts[-1]):
        return False
    # (3) the forward orbit of x_0 stays out of the open radius-ball
    av = cert.avoidance
    if av.kind == EVENTUALLY_PERIODIC:
        steps = av.preperiod + av.period
        orbit_pts = [pts[0]]
        for _ in range(steps):
            orbit_pts.append(_power_eval(f, orbit_pts[-1], m))
        if orbit_pts[steps] != orbit_pts[av.preperiod]:
            return False
        return all(tree.distance(p, limit) >= cert.radius for p in orbit_pts[1:])
    p = pts[0]
    for _ in range(av.steps):
        p = _power_eval(f, p, m)
        if tree.distance(p, limit) < cert.radius:
            return False
    return "partial"


# -- pointwise limits --------------------------------------------------------------


@dataclass(frozen=True)
class PointwiseLimit:
    """Sampled limit of f^n(p); heuristic unless every sample was exact."""

    table: tuple[tuple[TreePoint, TreePoint, bool], ...]  # (sample, limit, exact)

    def to_json(self) -> dict:
        return {"kind": "PointwiseLimit", "heuristic": True,
                "table": [[str(p), str(q), ex] for p, q, ex in self.table]}


@dataclass(frozen=True)
class NoPointwiseLimit:
    point: TreePoint
    reason: str
    cycle: tuple[TreePoint, ...] = ()

    def to_json(self) -> dict:
        return {"kind": "NoPointwiseLimit", "heuristic": True, "point": str(self.point),
                "reason": self.reason, "cycle": [str(p) for p in self.cycle]}


def pointwise_limit_map(f: PLMap, mesh: Fraction, N: int = 64, tol: Fraction = Fraction(1, 1024)):
    """Test whether f^n(p) settles for sample points p.

    Samples are the mesh points of every edge plus the fixed points of f
    and f^2, so period-2 behaviour is seen even when mesh orbits collapse.
    An exact cycle of period > 1 refutes a pointwise limit outright.
    """
    tree = f.tree
    samples = set()
    for e in tree.edges.values():
        k = 0
        while k * mesh <= e.length:
            samples.add(tree.point(e.id, k * mesh))
            k += 1
        samples.add(tree.vertex_point(e.head))
    it = Iterates(f)
    for n in (1, 2):
        try:
            samples.update(it.fixed(n).extreme_points())
        except BudgetExceeded:
            break
    fixed_parts = it.fixed(1).components()
    table = []
    for p in sorted(samples, key=str):
        rec = orbit(f, p, N)
        if rec.eventually_periodic:
            if rec.period > 1:
                return NoPointwiseLimit(p, "exact cycle", rec.cycle())
            table.append((p, rec.cycle()[0], True))
            continue
        last = rec.points[-1]
        tail = rec.points[-max(2, N // 4):]
        if max(tree.distance(q, last) for q in tail) > tol:
            return NoPointwiseLimit(p, "orbit tail not Cauchy at tolerance")
        # a converging tail ends near a fixed point; report that point
        for comp in fixed_parts:
            r = tree.first_point_retraction(comp, last)
            if tree.distance(r, last) <= tol:
                last = r
                break
        table.append((p, last, False))
    return PointwiseLimit(tuple(table))
