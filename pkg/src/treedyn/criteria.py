"""Checkers for the nine equivalent equicontinuity criteria and the analyzer.

Item letters follow the usual statement of the characterization for maps
of finite trees:

    a  f is equicontinuous
    b  some iterate f^n is the identity on the eventual image
    c  fix(f^n) equals the eventual image for some n
    d  per(f) equals the eventual image
    e  there is no expanding arc
    f  fix(f^n) is connected for every n
    g  per(f) is connected
    h  every remainder function f^u is continuous
    i  some remainder function f^u is continuous

All nine are equivalent, so a certified answer for one item decides the
rest.  Direct certificates are recorded with provenance ``Direct``; the
remaining items are filled in by inference and name their source item.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .dynamics import EventualImageResult, eventual_image, modulus_probe
from .errors import (
    BudgetExceeded,
    CoreUncertified,
    InconsistencyError,
    InternalError,
    PreconditionViolated,
    SolverFailure,
)
from .plmap import DEFAULT_BUDGET, Iterates, PLMap, retraction_map
from .tree import ComponentHandle, RegionSet, Subtree, TreePoint

ITEMS = "abcdefghi"

YES = "CertifiedYes"
NO = "CertifiedNo"
UNDECIDED = "Undecided"
DIRECT = "Direct"

# preferred source when filling an item by inference
_YES_SOURCES = "bcd"
_NO_SOURCES = "efghd"


def inferred(item: str) -> str:
    return f"InferredByEquivalence({item})"


@dataclass(frozen=True)
class Verdict:
    status: str
    provenance: str = DIRECT
    certificate: str | None = None
    depth: int | None = None

    @property
    def decided(self) -> bool:
        return self.status != UNDECIDED

    def negated(self) -> Verdict:
        flip = {YES: NO, NO: YES, UNDECIDED: UNDECIDED}[self.status]
        return Verdict(flip, self.provenance, self.certificate, self.depth)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"status": self.status, "provenance": self.provenance}
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.depth is not None:
            out["depth"] = self.depth
        return out

    def __str__(self) -> str:
        s = self.status if self.status != UNDECIDED else f"Undecided({self.depth})"
        if self.provenance != DIRECT:
            s += f" [{self.provenance}]"
        return s


def _undecided(depth: int) -> Verdict:
    return Verdict(UNDECIDED, DIRECT, None, depth)


@dataclass(frozen=True)
class ExpandingArcCert:
    """An arc A = start..end with A strictly inside f^n[A]."""

    start: TreePoint
    end: TreePoint
    n: int
    image: Subtree
    witness: tuple[TreePoint, TreePoint] | None = None  # (x, y): f^n(x)=x, y on x..f^n(y)

    def to_json(self) -> dict:
        out = {"arc": [str(self.start), str(self.end)], "n": self.n, "image": self.image.to_json()}
        if self.witness is not None:
            out["witness"] = {"x": str(self.witness[0]), "y": str(self.witness[1]), "n": self.n}
        return out


@dataclass(frozen=True)
class IdentityCert:
    n: int
    core: EventualImageResult

    def to_json(self) -> dict:
        return {"n": self.n, "core": self.core.to_json()}


@dataclass(frozen=True)
class SetCert:
    """A fixed or periodic set at a given exponent (disconnection or equality witness)."""

    n: int
    region: RegionSet

    def to_json(self) -> dict:
        return {"n": self.n, "set": self.region.to_json()}


@dataclass
class AnalysisReport:
    items: dict[str, Verdict]
    expanding_arc: Verdict
    certificates: dict[str, Any]
    core: EventualImageResult | None
    depth: int
    depth_reached: int
    budget: int
    budget_exceeded: bool = False
    core_error: str | None = None
    evidence: dict[str, Any] = field(default_factory=dict)

    @property
    def decided(self) -> bool:
        return all(v.decided for v in self.items.values())

    @property
    def equicontinuous(self) -> bool | None:
        v = self.items["a"]
        return None if not v.decided else v.status == YES


# -- expanding-arc construction ------------------------------------------------


def expanding_arc_from_disconnection(g: PLMap, fixed: RegionSet, n: int) -> ExpandingArcCert:
    """Build a witness (x, y) and the arc xy from a disconnected fix(g).

    Two components are bridged by their shortest arc; inside the first
    fixed-point-free gap along it, y is the candidate moved farthest by g.
    x is whichever gap end has y on the arc to g(y).  Then xy sits strictly
    inside g[xy] because g[xy] contains x..g(y).
    """
    tree = g.tree
    comps = fixed.components()
    if len(comps) < 2:
        raise PreconditionViolated("fixed set is connected")
    c1, c2 = comps[0], comps[1]
    a = tree.first_point_retraction(c1, c2.anchor_point())
    b = tree.first_point_retraction(c2, a)
    bridge = tree.geodesic(a, b)
    hits = bridge.hits(fixed)
    if len(hits) < 2:
        raise InternalError("bridge between fixed components has no gap")
    lo, hi = hits[0][1], hits[1][0]
    ga, gb = bridge.point_at(lo), bridge.point_at(hi)
    gap = tree.geodesic(ga, gb)
    cands = {gap.length / 2}
    for (eid, p, q), s0 in zip(gap.segments, gap.starts):
        for t in g.breakpoints(eid):
            if min(p, q) <= t <= max(p, q):
                cands.add(s0 + abs(t - p))
    cands = sorted(s for s in cands if 0 < s < gap.length)
    best = None
    for s in cands:
        pt = gap.point_at(s)
        d = tree.distance(pt, g(pt))
        if best is None or d > best[0]:
            best = (d, pt)
    y = best[1]
    gy = g(y)
    z = tree.first_point_retraction(gap.to_region(), gy)
    options = []
    if tree.between(ga, y, z):
        options.append(ga)
    if tree.between(z, y, gb):
        options.append(gb)
    x = min(options, key=str)
    image = g.image_arc(tree.geodesic(x, y))
    cert = ExpandingArcCert(x, y, n, image, (x, y))
    if not verify_expanding_arc_with(g, cert):
        raise InternalError("constructed expanding arc failed its own check")
    return cert


def verify_expanding_arc_with(g: PLMap, cert: ExpandingArcCert) -> bool:
    A = g.tree.geodesic(cert.start, cert.end).to_region()
    image = g.image_subtree(A)
    return image == cert.image and A.issubset(image) and image != A


def verify_expanding_arc(f: PLMap, cert: ExpandingArcCert) -> bool:
    """Check A strictly inside f^n[A] by applying f to A n times (no composition)."""
    tree = f.tree
    A = tree.geodesic(cert.start, cert.end).to_region()
    image: RegionSet = A
    for _ in range(cert.n):
        image = f.image_subtree(image)
    if not (A.issubset(image) and image != A):
        return False
    if cert.witness is not None:
        x, y = cert.witness
        gx, gy = x, y
        for _ in range(cert.n):
            gx, gy = f(gx), f(gy)
        if gx != x or gy == y or not tree.between(x, y, gy):
            return False
    return True


def verify_core(f: PLMap, core: EventualImageResult, budget: int = DEFAULT_BUDGET) -> bool:
    """Re-check an Exact or CertifiedLimit eventual-image claim from scratch."""
    tree = f.tree
    Y = core.candidate
    if f.image_subtree(Y) != Y:
        return False
    image: RegionSet = tree.whole()
    for _ in range(core.depth):
        image = f.image_subtree(image)
    if core.status == "Exact":
        return image == Y
    if core.status == "CertifiedLimit":
        from .dynamics import _contraction_bound, _positive_difference

        g = f.power(core.power, budget)
        if not g.is_identity_on(Y) or not Y.issubset(image):
            return False
        c = _contraction_bound(g, _positive_difference(image, Y))
        return c is not None and c <= core.contraction
    return False


def verify_identity_cert(f: PLMap, cert: IdentityCert, budget: int = DEFAULT_BUDGET) -> bool:
    """Re-check an identity-on-core certificate from scratch."""
    if not verify_core(f, cert.core, budget):
        return False
    return f.power(cert.n, budget).is_identity_on(cert.core.candidate)


# -- individual checkers -----------------------------------------------------------


def check_expanding_arc(f: PLMap, N: int, iterates: Iterates | None = None) -> tuple[Verdict, ExpandingArcCert | None]:
    """Verdict on "an expanding arc exists" (the negation of item e)."""
    it = iterates or Iterates(f)
    for n in range(1, N + 1):
        F = it.fixed(n)
        if not f.tree.is_connected(F):
            cert = expanding_arc_from_disconnection(it.power(n), F, n)
            return Verdict(YES, DIRECT, "expanding_arc"), cert
    ident = check_identity_on_core(f, N, it)[1]
    if ident is not None:
        return Verdict(NO, inferred("b"), "identity"), None
    return _undecided(N), None


def check_fix_connected(f: PLMap, N: int, iterates: Iterates | None = None) -> Verdict:
    it = iterates or Iterates(f)
    for n in range(1, N + 1):
        if not f.tree.is_connected(it.fixed(n)):
            return Verdict(NO, DIRECT, "fix_disconnected")
    if check_identity_on_core(f, N, it)[1] is not None:
        return Verdict(YES, inferred("b"), "identity")
    return _undecided(N)


def check_per_connected(f: PLMap, N: int, iterates: Iterates | None = None) -> Verdict:
    it = iterates or Iterates(f)
    per = RegionSet.empty(f.tree)
    for n in range(1, N + 1):
        per = per.union(it.fixed(n))
        if not f.tree.is_connected(per):
            return Verdict(NO, DIRECT, "per_disconnected")
    if check_identity_on_core(f, N, it)[1] is not None:
        return Verdict(YES, inferred("b"), "identity")
    return _undecided(N)


def check_identity_on_core(f: PLMap, N: int, iterates: Iterates | None = None) -> tuple[Verdict, IdentityCert | None]:
    it = iterates or Iterates(f)
    core = eventual_image(f, N, it)
    if not core.certified:
        raise CoreUncertified("eventual image is only an enclosure")
    for n in range(1, N + 1):
        if it.power(n).is_identity_on(core.candidate):
            return Verdict(YES, DIRECT, "identity"), IdentityCert(n, core)
    return _undecided(N), None


def check_per_equals_core(f: PLMap, N: int, iterates: Iterates | None = None) -> Verdict:
    it = iterates or Iterates(f)
    core = eventual_image(f, N, it)
    if not core.certified:
        raise CoreUncertified("eventual image is only an enclosure")
    per = RegionSet.empty(f.tree)
    for n in range(1, N + 1):
        per = per.union(it.fixed(n))
        if not per.issubset(core.candidate):
            return Verdict(NO, DIRECT, "per_outside_core")
        if per == core.candidate:
            return Verdict(YES, DIRECT, "per_equals_core")
    return _undecided(N)


def check_equicontinuity(f: PLMap, N: int) -> Verdict:
    return analyze(f, N).items["a"]


def check_ellis(f: PLMap, N: int, K: int = 3) -> Verdict:
    return analyze(f, N, K=K).items["h"]


# -- analyzer ------------------------------------------------------------------------


def analyze(
    f: PLMap,
    N: int = 12,
    budget: int = DEFAULT_BUDGET,
    K: int = 3,
    T: int = 64,
    probe: bool = False,
    eps: Fraction = Fraction(1, 8),
    mesh: Fraction = Fraction(1, 64),
    max_iter: int = 200,
) -> AnalysisReport:
    """Run every checker, fill undecided items by inference, enforce consistency."""
    from .certificates import best_divergent_sequence

    tree = f.tree
    it = Iterates(f, budget)
    direct: dict[str, Verdict] = {}
    certs: dict[str, Any] = {}
    reached = 0
    budget_hit = False
    expanding: ExpandingArcCert | None = None

    # refutation search: disconnected fix(f^n) or truncated per(f)
    per = RegionSet.empty(tree)
    try:
        for n in range(1, N + 1):
            F = it.fixed(n)
            reached = n
            per = per.union(F)
            if "g" not in direct and not tree.is_connected(per):
                direct["g"] = Verdict(NO, DIRECT, "per_disconnected")
                certs["per_disconnected"] = SetCert(n, per)
            if not tree.is_connected(F):
                direct["f"] = Verdict(NO, DIRECT, "fix_disconnected")
                certs["fix_disconnected"] = SetCert(n, F)
                expanding = expanding_arc_from_disconnection(it.power(n), F, n)
                certs["expanding_arc"] = expanding
                direct["e"] = Verdict(NO, DIRECT, "expanding_arc")
                break
    except BudgetExceeded:
        budget_hit = True

    # confirmation search on the eventual image; after a refutation only the
    # powers already built are tried, which still exercises the oracle
    core = None
    core_error = None
    try:
        core = eventual_image(f, N, it)
    except BudgetExceeded:
        budget_hit = True
        core_error = "budget exceeded while computing the eventual image"
    if core is not None and not core.certified:
        core_error = "eventual image only enclosed"
    if core is not None and core.certified:
        limit = it.computed() if expanding is not None else N
        Y = core.candidate
        per = RegionSet.empty(tree)
        try:
            for n in range(1, limit + 1):
                g = it.power(n)
                reached = max(reached, n)
                F = it.fixed(n)
                per = per.union(F)
                if "b" not in direct and g.is_identity_on(Y):
                    direct["b"] = Verdict(YES, DIRECT, "identity")
                    certs["identity"] = IdentityCert(n, core)
                if "c" not in direct and F == Y:
                    direct["c"] = Verdict(YES, DIRECT, "fix_equals_core")
                    certs["fix_equals_core"] = SetCert(n, F)
                if "d" not in direct:
                    if not per.issubset(Y):
                        direct["d"] = Verdict(NO, DIRECT, "per_outside_core")
                        certs["per_outside_core"] = SetCert(n, per)
                    elif per == Y:
                        direct["d"] = Verdict(YES, DIRECT, "per_equals_core")
                        certs["per_equals_core"] = SetCert(n, per)
                if all(k in direct for k in "bcd"):
                    break
        except BudgetExceeded:
            budget_hit = True

    # remainder functions: a fully certified divergent sequence refutes h and i
    evidence: dict[str, Any] = {}
    if expanding is not None:
        try:
            div = best_divergent_sequence(f, expanding, K=K, T=T, budget=budget)
        except (BudgetExceeded, SolverFailure) as exc:
            div = None
            evidence["divergent_error"] = str(exc)
        if div is not None:
            certs["divergent"] = div
            if div.fully_certified:
                direct["h"] = Verdict(NO, DIRECT, "divergent")
                direct["i"] = Verdict(NO, DIRECT, "divergent")

    items = _combine(direct, reached)
    e = items["e"]
    report = AnalysisReport(
        items=items,
        expanding_arc=e.negated(),
        certificates=certs,
        core=core,
        depth=N,
        depth_reached=reached,
        budget=budget,
        budget_exceeded=budget_hit,
        core_error=core_error,
        evidence=evidence,
    )
    if probe:
        w = modulus_probe(f, eps, mesh, max_iter)
        report.evidence["probe"] = w
    return report


def _combine(direct: dict[str, Verdict], depth: int) -> dict[str, Verdict]:
    yes = [k for k in ITEMS if k in direct and direct[k].status == YES]
    no = [k for k in ITEMS if k in direct and direct[k].status == NO]
    if yes and no:
        raise InconsistencyError(
            f"items {','.join(yes)} certified positive but {','.join(no)} certified negative"
        )
    items: dict[str, Verdict] = {}
    for k in ITEMS:
        if k in direct:
            items[k] = direct[k]
        elif yes:
            src = next(s for s in _YES_SOURCES if s in yes)
            items[k] = Verdict(YES, inferred(src), direct[src].certificate)
        elif no:
            src = next(s for s in _NO_SOURCES if s in no)
            items[k] = Verdict(NO, inferred(src), direct[src].certificate)
        else:
            items[k] = _undecided(depth)
    return items


# -- auxiliary constructions ------------------------------------------------------


def fixed_point_in_component(f: PLMap, x: TreePoint, component: ComponentHandle) -> TreePoint:
    """A fixed point of f inside the component of X minus x that contains f(x).

    Fixed points of r o f on the closure, where r retracts onto the closure,
    other than x itself are fixed points of f.
    """
    fx = f(x)
    if not component.contains(fx):
        raise PreconditionViolated(f"f({x}) = {fx} is not in {component}")
    tree = f.tree
    closure = component.closure()
    h = retraction_map(closure).compose(f)
    cands = [p for c in h.fixed_set().intersection(closure).components() for p in c.extreme_points() if p != x]
    if not cands:
        raise InternalError("no fixed point in the component")
    y = min(cands, key=lambda p: (tree.distance(x, p), str(p)))
    if f(y) != y:
        raise InternalError(f"{y} is not fixed by f")
    return y


def invariant_kod(f: PLMap, x: TreePoint, resolution: Fraction) -> Subtree | None:
    """Search a small invariant k-od around a fixed point (None when not found).

    For delta = eps, eps/2, ... down to ``resolution`` the set
    Y = Z u f[Z] u ... u f^k[Z], with Z the closed delta-ball and k the
    order of x, is accepted when it stays inside the eps-ball, has x as
    its only possible branching point and interior point of full order,
    and satisfies f[Y] inside Y.
    """
    if f(x) != x:
        raise PreconditionViolated(f"{x} is not a fixed point")
    tree = f.tree
    k = tree.order(x)
    if x.vertex is not None:
        others = [tree.vertex_distance(x.vertex, v) for v in tree.vertices if v != x.vertex]
        eps = min(others) / 2
    else:
        e = tree.edges[x.edge]
        eps = min(x.offset, e.length - x.offset) / 2
    outer = tree.ball(x, eps)
    delta = eps
    while delta >= resolution:
        Z = tree.ball(x, delta)
        Y: RegionSet = Z
        cur: RegionSet = Z
        for _ in range(k):
            cur = f.image_subtree(cur)
            Y = Y.union(cur)
        if Y.issubset(outer):
            Y = Subtree.of(Y)
            if (
                Y.order_of(x) == k
                and all(p == x for p, _ in Y.branching_points())
                and f.image_subtree(Y).issubset(Y)
            ):
                return Y
        delta /= 2
    return None
