"""Acceptance criteria 1-8, each reported as one pass/fail line.

The corpus checks share two command-line runs: the 500-seed random corpus
and the catalog of closed-form instances (which is where the surjective
periodic maps live).  Run with ``pytest tests/test_acceptance.py -v``; the
summary lines are printed at the end of the session.
"""
import json
import subprocess
import sys
import time
from fractions import Fraction as F

import pytest

from conftest import ACCEPTANCE
from treedyn.catalog import build_catalog
from treedyn.certificates import EVENTUALLY_PERIODIC, verify_divergent
from treedyn.criteria import NO, YES, analyze, verify_expanding_arc, verify_identity_cert
from treedyn.fileformat import serialize
from treedyn.harness import random_instance
from treedyn.report import dumps, loads, report_to_json, verify_report
from treedyn.tree import RegionSet, parse_region

CORPUS_SEEDS = 500
RUNTIME_LIMIT = 300.0


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)


def treedyn(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "treedyn.cli", *argv], capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="module")
def corpus():
    t0 = time.perf_counter()
    proc = treedyn("verify", "--count", str(CORPUS_SEEDS), "--seed", "0", "--json")
    elapsed = time.perf_counter() - t0
    assert proc.returncode in (0, 4), proc.stderr
    return json.loads(proc.stdout), elapsed


@pytest.fixture(scope="module")
def catalog_corpus():
    proc = treedyn("verify", "--count", "0", "--catalog", "--json")
    assert proc.returncode in (0, 4), proc.stderr
    return json.loads(proc.stdout)


def combined(corpus, catalog_corpus, key):
    return corpus[0][key] + catalog_corpus[key]


# -- 1 ----------------------------------------------------------------------------------


def test_criterion_1_consistency(corpus):
    data, elapsed = corpus
    rate = data["decided"] / data["instances"]
    ok = data["instances"] == CORPUS_SEEDS and data["inconsistencies"] == 0 and rate >= 0.6 \
        and elapsed < RUNTIME_LIMIT
    record(1, ok, f"{data['inconsistencies']} inconsistencies, {data['decided']}/{data['instances']} decided "
                  f"({100 * rate:.1f}%), {data['errors']} other errors, {elapsed:.0f}s")
    assert ok


# -- 2 ----------------------------------------------------------------------------------


def test_criterion_2_scaling_family():
    details = []
    ok = True
    for alpha in (F(1, 3), F(1, 2), F(1)):
        _, f = build_catalog("interval_scaling", {"alpha": alpha})
        r = analyze(f)
        ident = r.certificates.get("identity")
        good = r.items["a"].status == YES and ident is not None and verify_identity_cert(f, ident)
        ok &= good
        details.append(f"alpha={alpha}: {r.items['a'].status}")
    tree, f = build_catalog("interval_clamped_scaling", {"alpha": F(2)})
    r = analyze(f)
    arc = r.certificates.get("expanding_arc")
    fixed = f.fixed_set()
    # min(2x, 1) = x only at x = 0 and x = 1
    good = (r.items["a"].status == NO and arc is not None and arc.n == 1 and verify_expanding_arc(f, arc)
            and fixed == parse_region(tree, "{v:v0, v:v1}") and not tree.is_connected(fixed))
    ok &= good
    details.append(f"clamped(2): {r.items['a'].status}, arc n={arc.n if arc else None}, fix={fixed}")
    record(2, ok, "; ".join(details))
    assert ok


# -- 3 ----------------------------------------------------------------------------------


def tent_power_fixed_points(n):
    """Per-branch linear solves: on [k/2^n, (k+1)/2^n] T^n has slope +-2^n onto [0, 1]."""
    N = 2 ** n
    out = set()
    for k in range(N):
        lo, hi = F(k, N), F(k + 1, N)
        x = F(k, N - 1) if k % 2 == 0 else F(k + 1, N + 1)
        if lo <= x <= hi:
            out.add(x)
    return out


def test_criterion_3_tent():
    t0 = time.perf_counter()
    tree, f = build_catalog("tent")
    r = analyze(f)

    def as_points(xs):
        return RegionSet.of_points(tree, [tree.point("e0", x) for x in xs])

    fix1 = f.fixed_set() == as_points(tent_power_fixed_points(1)) == as_points({0, F(2, 3)})
    fix2 = f.power(2).fixed_set() == as_points(tent_power_fixed_points(2)) \
        == as_points({0, F(2, 5), F(2, 3), F(4, 5)})
    arc = r.certificates["expanding_arc"]
    half = tree.geodesic(tree.vertex_point("v0"), tree.point("e0", F(1, 2)))
    arc_ok = (arc.n == 1 and {arc.start, arc.end} == {half.start, half.end}
              and f.image_subtree(half.to_region()) == tree.whole() and verify_expanding_arc(f, arc))
    d = r.certificates["divergent"]
    expected = tuple(tree.point("e0", x) for x in (F(2, 3), F(1, 3), F(1, 6), F(1, 12)))
    div_ok = (d.points == expected and d.limit == tree.vertex_point("v0") and d.radius == F(1, 3)
              and d.avoidance.kind == EVENTUALLY_PERIODIC and verify_divergent(f, d) is True)
    checks = dict(verify_report(loads(dumps(report_to_json(tree, f, r)))))
    reread = checks.get("divergent") is True and checks.get("expanding_arc") is True
    elapsed = time.perf_counter() - t0
    ok = fix1 and fix2 and arc_ok and div_ok and reread and elapsed < 1.0
    record(3, ok, f"fix(T) {fix1}, fix(T^2) {fix2}, arc {arc_ok}, divergent {div_ok}, "
                  f"report re-check {reread}, {elapsed:.2f}s")
    assert ok


# -- 4 ----------------------------------------------------------------------------------


def test_criterion_4_arc_round_trip(corpus, catalog_corpus):
    certs = combined(corpus, catalog_corpus, "arc_certs")
    failed = combined(corpus, catalog_corpus, "arc_roundtrip_failures")
    unchecked = combined(corpus, catalog_corpus, "arc_disconnection_unchecked")
    ok = certs > 0 and failed == 0 and unchecked == 0
    record(4, ok, f"{certs - failed}/{certs} arcs pass containment and disconnection "
                  f"({unchecked} disconnection checks over budget)")
    assert ok


# -- 5 ----------------------------------------------------------------------------------


def test_criterion_5_brute_force(corpus, catalog_corpus):
    compared = combined(corpus, catalog_corpus, "brute_compared")
    dis = combined(corpus, catalog_corpus, "brute_disagreements")
    bad = combined(corpus, catalog_corpus, "brute_arc_failures")
    ok = compared > 0 and dis == 0 and bad == 0
    record(5, ok, f"{compared} compared, {dis} disagreements, {bad} brute-force arcs failing re-check")
    assert ok


# -- 6 ----------------------------------------------------------------------------------


def test_criterion_6_probe(corpus, catalog_corpus):
    id_inst = combined(corpus, catalog_corpus, "probe_identity_instances")
    id_wit = combined(corpus, catalog_corpus, "probe_identity_witnesses")
    ex_inst = combined(corpus, catalog_corpus, "probe_expanding_instances")
    ex_wit = combined(corpus, catalog_corpus, "probe_expanding_witnesses")
    rate = ex_wit / ex_inst if ex_inst else 0.0
    ok = id_inst > 0 and id_wit == 0 and rate >= 0.95
    record(6, ok, f"witnesses on {id_wit}/{id_inst} identity instances (need 0), "
                  f"on {ex_wit}/{ex_inst} expanding instances ({100 * rate:.1f}%, need 95%)")
    assert ok


# -- 7 ----------------------------------------------------------------------------------


def test_criterion_7_periodicity(corpus, catalog_corpus):
    n = combined(corpus, catalog_corpus, "surjective_identity")
    bad = combined(corpus, catalog_corpus, "periodicity_failures")
    ok = n > 0 and bad == 0
    record(7, ok, f"{n - bad}/{n} surjective instances with an identity core have f^n = id")
    assert ok


# -- 8 ----------------------------------------------------------------------------------


def test_criterion_8_determinism(tmp_path):
    instances = {"tent": build_catalog("tent"), "rotation": build_catalog("star_rotation", {"k": 4}),
                 "seed7": random_instance(7), "seed24": random_instance(24)}
    outputs = {}
    for run in ("a", "b"):
        for name, (tree, f) in instances.items():
            src = tmp_path / f"{name}.tdm"
            src.write_text(serialize(tree, f))
            rep = tmp_path / f"{name}.{run}.json"
            svg = tmp_path / f"{name}.{run}.svg"
            treedyn("analyze", str(src), "--json", "--out", str(rep))
            treedyn("render", str(src), "--report", str(rep), "--out", str(svg), "--title", name)
            outputs[(name, run, "json")] = rep.read_bytes()
            outputs[(name, run, "svg")] = svg.read_bytes()
        summary = treedyn("verify", "--count", "15", "--seed", "100", "--json", "--catalog")
        outputs[("verify", run, "json")] = summary.stdout.encode()
    names = list(instances) + ["verify"]
    same = [outputs[(n, "a", k)] == outputs[(n, "b", k)] and len(outputs[(n, "a", k)]) > 0
            for n in names for k in ("json", "svg") if (n, "a", k) in outputs]
    ok = all(same)
    record(8, ok, f"{sum(same)}/{len(same)} report/SVG/summary pairs byte-identical across two runs")
    assert ok
