"""Random instances, the brute-force expanding-arc oracle, and corpus cross-checks."""
from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import BudgetExceeded, InconsistencyError, TreeDynError
from .fastmap import FloatMap
from .plmap import DEFAULT_BUDGET, PLMap
from .tree import FiniteTree, TreePoint

CONSTANT_PIECE_PROB = 0.3


def _prufer_edges(n: int, rng: random.Random) -> list[tuple[int, int]]:
    """Decode a uniformly random Pruefer sequence into a labeled tree on n nodes."""
    if n == 2:
        return [(0, 1)]
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u, w = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, w))
    return edges


def _random_length(rng: random.Random) -> Fraction:
    q = rng.randint(1, 16)
    k = rng.randint(-(-q // 4), q)
    return Fraction(k, q)


def _random_point(tree: FiniteTree, rng: random.Random) -> TreePoint:
    e = tree.edges[rng.choice(list(tree.edges))]
    d = rng.randint(1, 16)
    return tree.point(e.id, e.length * Fraction(rng.randint(0, d), d))


def random_instance(seed: int, max_vertices: int = 8, max_pieces: int = 6) -> tuple[FiniteTree, PLMap]:
    """A reproducible random tree and PL self-map.

    The tree is a uniform labeled tree on 2..max_vertices vertices with
    lengths k/q in [1/4, 1], q <= 16.  Each edge gets up to ``max_pieces``
    pieces with breakpoints and target points on the 1/16-scaled grids;
    some pieces are constant.  Vertex values are then reconciled: every
    vertex takes the value proposed by its lowest-numbered incident edge.
    """
    if max_vertices < 1 or max_pieces < 1:
        raise ValueError("bounds must be >= 1")
    rng = random.Random(seed)
    n = rng.randint(2, max(2, max_vertices))
    names = [f"v{i}" for i in range(n)]
    edges = []
    for i, (a, b) in enumerate(_prufer_edges(n, rng)):
        a, b = min(a, b), max(a, b)
        edges.append((f"e{i}", names[a], names[b], _random_length(rng)))
    tree = FiniteTree(names, edges)

    values: dict[str, list[TreePoint]] = {}
    cuts: dict[str, list[Fraction]] = {}
    for e in tree.edges.values():
        k = rng.randint(1, max_pieces)
        inner = set()
        for _ in range(k - 1):
            d = rng.randint(2, 16)
            inner.add(e.length * Fraction(rng.randint(1, d - 1), d))
        ts = [Fraction(0)] + sorted(inner) + [e.length]
        vals = [_random_point(tree, rng)]
        for _ in ts[1:]:
            if rng.random() < CONSTANT_PIECE_PROB:
                vals.append(vals[-1])
            else:
                vals.append(_random_point(tree, rng))
        cuts[e.id] = ts
        values[e.id] = vals

    image: dict[str, TreePoint] = {}
    for e in tree.edges.values():  # edges are in id order
        image.setdefault(e.tail, values[e.id][0])
        image.setdefault(e.head, values[e.id][-1])
    items = []
    for e in tree.edges.values():
        vals = values[e.id]
        vals[0], vals[-1] = image[e.tail], image[e.head]
        ts = cuts[e.id]
        for i in range(len(ts) - 1):
            items.append((e.id, ts[i], ts[i + 1], vals[i], vals[i + 1]))
    return tree, PLMap.from_items(tree, items)


# -- brute force ----------------------------------------------------------------


@dataclass(frozen=True)
class BruteForceResult:
    found: bool
    start: TreePoint | None = None
    end: TreePoint | None = None
    n: int | None = None
    pairs_checked: int = 0


def grid_points(tree: FiniteTree, mesh: Fraction, f: PLMap | None = None) -> list[TreePoint]:
    """Vertices and mesh multiples on every edge, plus the breakpoints of f if given."""
    pts = {tree.vertex_point(v) for v in tree.vertices}
    for e in tree.edges.values():
        k = 1
        while k * mesh < e.length:
            pts.add(tree.point(e.id, k * mesh))
            k += 1
        if f is not None:
            pts.update(tree.point(e.id, t) for t in f.breakpoints(e.id))
    return sorted(pts, key=str)


def brute_force_expanding(f: PLMap, mesh: Fraction, n_max: int, budget: int = DEFAULT_BUDGET) -> BruteForceResult:
    """Enumerate arcs pq with grid endpoints and test pq strictly inside f^n[pq].

    The grid is the mesh grid refined by the breakpoints of f, so arcs
    ending at a kink of f are not lost to an incommensurable mesh.
    p lies in g[pq] (g = f^n) iff pq meets a component C of g^-1(p), and
    since C is a subtree that happens iff the retraction of p onto C lies
    on pq.  This containment is screened in floating point with a loose
    tolerance (so no exact hit is lost) and every surviving pair is then
    settled by an exact image computation.
    """
    tree = f.tree
    pts = grid_points(tree, Fraction(mesh), f)
    checked = 0
    g = f
    for n in range(1, n_max + 1):
        if n > 1:
            g = f.compose(g, budget)
        fm = FloatMap(g)
        enc = np.array([fm.encode(p) for p in pts], dtype=float)
        pe, po = enc[:, 0].astype(np.int64), enc[:, 1]
        m = len(pts)
        # reach[i, j]: pts[i] lies in g[pts[i] pts[j]] (float screen)
        reach = np.zeros((m, m), dtype=bool)
        for i, p in enumerate(pts):
            for comp in g.preimages_point(p).components():
                r = tree.first_point_retraction(comp, p)
                re, ro = fm.encode(r)
                d_pr = float(tree.distance(p, r))
                d_rq = fm.distance(np.full(m, re), np.full(m, ro), pe, po)
                d_pq = fm.distance(np.full(m, pe[i]), np.full(m, po[i]), pe, po)
                reach[i] |= np.abs(d_pr + d_rq - d_pq) < 1e-9
        both = reach & reach.T
        np.fill_diagonal(both, False)
        for i, j in zip(*np.nonzero(np.triu(both))):
            checked += 1
            A = tree.geodesic(pts[i], pts[j]).to_region()
            img = g.image_subtree(A)
            if A.issubset(img) and img != A:
                return BruteForceResult(True, pts[i], pts[j], n, checked)
    return BruteForceResult(False, pairs_checked=checked)


# -- corpus cross-check ----------------------------------------------------------


@dataclass
class CrossCheckSummary:
    instances: int = 0
    decided: int = 0
    undecided: int = 0
    equicontinuous: int = 0
    not_equicontinuous: int = 0
    inconsistencies: int = 0
    errors: int = 0
    budget_exceeded: int = 0
    arc_certs: int = 0
    arc_roundtrip_failures: int = 0
    arc_disconnection_unchecked: int = 0
    divergent_certs: int = 0
    divergent_full: int = 0
    divergent_verify_failures: int = 0
    identity_certs: int = 0
    identity_verify_failures: int = 0
    brute_compared: int = 0
    brute_disagreements: int = 0
    brute_arc_failures: int = 0
    probe_identity_instances: int = 0
    probe_identity_witnesses: int = 0
    probe_expanding_instances: int = 0
    probe_expanding_witnesses: int = 0
    surjective_identity: int = 0
    periodicity_failures: int = 0
    expected_checked: int = 0
    expected_mismatches: int = 0
    seconds: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def breaches(self) -> int:
        return (self.inconsistencies + self.arc_roundtrip_failures + self.divergent_verify_failures
                + self.identity_verify_failures + self.brute_disagreements + self.brute_arc_failures
                + self.probe_identity_witnesses + self.periodicity_failures + self.expected_mismatches)

    def merge(self, other: CrossCheckSummary) -> None:
        for k, v in other.__dict__.items():
            if isinstance(v, int):
                setattr(self, k, getattr(self, k) + v)
        self.failures.extend(other.failures)

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k not in ("failures", "seconds")}
        out["breaches"] = self.breaches
        out["failures"] = list(self.failures)
        return out


def arc_roundtrip(f: PLMap, cert, budget: int = DEFAULT_BUDGET) -> bool:
    """A strictly inside f^n[A], and fix(f^n) or fix(f^2n) disconnected."""
    from .criteria import verify_expanding_arc

    if not verify_expanding_arc(f, cert):
        return False
    tree = f.tree
    g = f.power(cert.n, budget)
    if not tree.is_connected(g.fixed_set()):
        return True
    return not tree.is_connected(g.compose(g, budget).fixed_set())


def check_instance(
    name: str,
    f: PLMap,
    summary: CrossCheckSummary,
    depth: int = 12,
    budget: int = DEFAULT_BUDGET,
    brute: bool = True,
    probe: bool = True,
    expected: bool | None = None,
    mesh: Fraction = Fraction(1, 64),
    brute_mesh: Fraction = Fraction(1, 32),
    brute_n: int = 4,
):
    """Analyze one instance and fold every cross-criterion check into ``summary``."""
    from .certificates import verify_divergent
    from .criteria import ExpandingArcCert, analyze, verify_expanding_arc, verify_identity_cert
    from .dynamics import modulus_probe

    summary.instances += 1
    try:
        report = analyze(f, depth, budget)
    except InconsistencyError as exc:
        summary.inconsistencies += 1
        summary.failures.append(f"{name}: inconsistency: {exc}")
        return None
    except TreeDynError as exc:
        summary.errors += 1
        summary.failures.append(f"{name}: error: {type(exc).__name__}: {exc}")
        return None
    if report.budget_exceeded:
        summary.budget_exceeded += 1
    if report.decided:
        summary.decided += 1
        if report.equicontinuous:
            summary.equicontinuous += 1
        else:
            summary.not_equicontinuous += 1
    else:
        summary.undecided += 1
    if expected is not None:
        summary.expected_checked += 1
        if report.equicontinuous is not expected:
            summary.expected_mismatches += 1
            summary.failures.append(f"{name}: expected equicontinuous={expected}, got {report.items['a']}")

    certs = report.certificates
    arc = certs.get("expanding_arc")
    if arc is not None:
        summary.arc_certs += 1
        try:
            ok = arc_roundtrip(f, arc, budget)
        except BudgetExceeded:
            # the doubled power overflowed; the containment is still checkable
            summary.arc_disconnection_unchecked += 1
            ok = verify_expanding_arc(f, arc)
        if not ok:
            summary.arc_roundtrip_failures += 1
            summary.failures.append(f"{name}: expanding arc round trip failed")
    div = certs.get("divergent")
    if div is not None:
        summary.divergent_certs += 1
        res = verify_divergent(f, div, budget)
        if div.fully_certified:
            summary.divergent_full += 1
            if res is not True:
                summary.divergent_verify_failures += 1
                summary.failures.append(f"{name}: divergent certificate failed re-check")
        elif res is False:
            summary.divergent_verify_failures += 1
            summary.failures.append(f"{name}: partial divergent certificate failed re-check")
    ident = certs.get("identity")
    if ident is not None:
        summary.identity_certs += 1
        if not verify_identity_cert(f, ident, budget):
            summary.identity_verify_failures += 1
            summary.failures.append(f"{name}: identity certificate failed re-check")
        tree = f.tree
        if ident.core.candidate == tree.whole() and f.image() == tree.whole():
            summary.surjective_identity += 1
            if not f.power(ident.n, budget).is_identity():
                summary.periodicity_failures += 1
                summary.failures.append(f"{name}: surjective with identity core but f^{ident.n} != id")

    if brute:
        exact_n = arc.n if arc is not None else None
        decided_small = (arc is not None and arc.n <= brute_n) or (ident is not None)
        if decided_small:
            try:
                bf = brute_force_expanding(f, brute_mesh, brute_n, budget)
            except BudgetExceeded:
                bf = None
            if bf is not None:
                summary.brute_compared += 1
                if bf.found != (exact_n is not None):
                    summary.brute_disagreements += 1
                    summary.failures.append(f"{name}: brute force found={bf.found}, exact checker disagrees")
                if bf.found:
                    cert = ExpandingArcCert(bf.start, bf.end, bf.n, f.power(bf.n, budget).image_arc(
                        f.tree.geodesic(bf.start, bf.end)))
                    try:
                        ok = arc_roundtrip(f, cert, budget)
                    except BudgetExceeded:
                        ok = verify_expanding_arc(f, cert)
                    if not ok:
                        summary.brute_arc_failures += 1
                        summary.failures.append(f"{name}: brute-force arc failed the round trip")

    if probe:
        if ident is not None:
            summary.probe_identity_instances += 1
            w = modulus_probe(f, Fraction(1, 8), mesh, 200)
            if w is not None:
                summary.probe_identity_witnesses += 1
                summary.failures.append(f"{name}: probe witness {w.x},{w.y} n={w.n} despite identity certificate")
        elif arc is not None:
            summary.probe_expanding_instances += 1
            if modulus_probe(f, Fraction(1, 8), mesh, 200) is not None:
                summary.probe_expanding_witnesses += 1
    return report


def _seed_chunk(args) -> CrossCheckSummary:
    seeds, kwargs = args
    return cross_check(seeds, **kwargs)


def cross_check(
    seeds: Iterable[int],
    max_vertices: int = 8,
    max_pieces: int = 6,
    depth: int = 12,
    budget: int = DEFAULT_BUDGET,
    brute: bool = True,
    probe: bool = True,
    catalog: bool = False,
    jobs: int = 1,
) -> CrossCheckSummary:
    """Analyze a corpus of random (and optionally catalog) instances.

    With ``jobs > 1`` the seeds are split into contiguous chunks handled by
    worker processes; chunk summaries are merged in seed order, so the
    result does not depend on scheduling.
    """
    from .catalog import CATALOG, build_catalog, expected_equicontinuity

    summary = CrossCheckSummary()
    t0 = time.perf_counter()
    if catalog:
        for name, entry in CATALOG.items():
            for params in entry.examples:
                _, f = build_catalog(name, params)
                label = name + "(" + ",".join(f"{k}={v}" for k, v in params.items()) + ")"
                check_instance(label, f, summary, depth, budget, brute, probe,
                               expected=expected_equicontinuity(name, params))
    seeds = list(seeds)
    if jobs > 1 and len(seeds) > 1:
        from concurrent.futures import ProcessPoolExecutor

        kwargs = dict(max_vertices=max_vertices, max_pieces=max_pieces, depth=depth, budget=budget,
                      brute=brute, probe=probe)
        size = -(-len(seeds) // jobs)
        chunks = [(seeds[i:i + size], kwargs) for i in range(0, len(seeds), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_seed_chunk, chunks):
                summary.merge(part)
    else:
        for seed in seeds:
            _, f = random_instance(seed, max_vertices, max_pieces)
            check_instance(f"seed {seed}", f, summary, depth, budget, brute, probe)
    summary.seconds = time.perf_counter() - t0
    return summary


def summary_text(s: CrossCheckSummary) -> str:
    lines = [
        f"instances           {s.instances}",
        f"fully decided       {s.decided} ({_pct(s.decided, s.instances)})",
        f"  equicontinuous    {s.equicontinuous}",
        f"  not equicontinuous {s.not_equicontinuous}",
        f"undecided           {s.undecided}",
        f"budget exceeded     {s.budget_exceeded}",
        f"inconsistencies     {s.inconsistencies}",
        f"other errors        {s.errors}",
        f"arc round trips     {s.arc_certs - s.arc_roundtrip_failures}/{s.arc_certs}"
        f" ({s.arc_disconnection_unchecked} without the disconnection check)",
        f"divergent certs     {s.divergent_full} full of {s.divergent_certs}, {s.divergent_verify_failures} failed",
        f"identity certs      {s.identity_certs}, {s.identity_verify_failures} failed re-check",
        f"brute force         {s.brute_compared} compared, {s.brute_disagreements} disagreements",
        f"probe on identity   {s.probe_identity_witnesses} witnesses / {s.probe_identity_instances}",
        f"probe on expanding  {s.probe_expanding_witnesses}/{s.probe_expanding_instances} "
        f"({_pct(s.probe_expanding_witnesses, s.probe_expanding_instances)})",
        f"surjective periodic {s.surjective_identity - s.periodicity_failures}/{s.surjective_identity}",
        f"catalog annotations {s.expected_checked - s.expected_mismatches}/{s.expected_checked}",
        f"breaches            {s.breaches}",
    ]
    lines += [f"  {msg}" for msg in s.failures]
    return "\n".join(lines)


def _pct(a: int, b: int) -> str:
    return f"{100 * a / b:.1f}%" if b else "n/a"
