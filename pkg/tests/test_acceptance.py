"""End-to-end checks that pin the package's headline numbers.

Each test covers one numbered criterion and prints a single PASS or FAIL
line (bypassing capture) so a plain pytest run shows every verdict.  The
expensive exhaustive survey runs once per session and is shared by the
criteria that read from it.
"""

import math
import time
from collections import Counter
from itertools import permutations

import numpy as np
import pytest

from stickysym.builders import (
    canonical_chain,
    canonical_loop,
    octahedron,
    polytetrahedron,
    toy_region,
    toy_region_endpoints,
)
from stickysym.enumeration import survey
from stickysym.geometry import (
    Cluster,
    Partition,
    apply_pi,
    build_constraint_system,
    detect_contacts,
    squared_distances,
)
from stickysym.groups import PIOperation, point_group
from stickysym.manifold import PathConfig, find_path, sample_configuration
from stickysym.symmetry import colored_symmetry, sticky_symmetry_group

SURVEY_CONFIG = PathConfig(n_max=6000, retries=1, mode="gaussian", seed=0)
LOOP_CONFIG = PathConfig(n_max=20000, retries=2, seed=0)
RIGID_CONFIG = PathConfig(n_max=2000, retries=1, seed=0)


def _verdict(capsys, num: int, ok: bool, desc: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {desc}"
    with capsys.disabled():
        print(f"\n{line}", flush=True)
    assert ok, line


def _sampled(cluster: Cluster, steps: int, seed: int) -> Cluster:
    """Generic embedding drawn from the cluster's manifold component."""
    adjacency = detect_contacts(cluster)
    cs = build_constraint_system(adjacency, cluster.radii)
    x = sample_configuration(cs, cluster.flat(), steps, 0.1, seed=seed)
    return Cluster(x.reshape(-1, 3), cluster.radii)


@pytest.fixture(scope="module")
def full_survey():
    t0 = time.perf_counter()
    result = survey(SURVEY_CONFIG, max_d=7, seed=0, jobs=1, mark_implied=True)
    return result, time.perf_counter() - t0


@pytest.fixture(scope="module")
def octa_report():
    return sticky_symmetry_group(octahedron(), RIGID_CONFIG)


@pytest.fixture(scope="module")
def poly_report():
    return sticky_symmetry_group(polytetrahedron(), RIGID_CONFIG)


def test_criterion_1_loops(capsys):
    failures = []
    worst = 10
    for n in range(4, 11):
        hits = 0
        for k in range(10):
            sampled = _sampled(canonical_loop(n), 200, seed=1000 * n + k)
            rep = sticky_symmetry_group(
                sampled, PathConfig(n_max=20000, retries=2, seed=37 * n + k)
            )
            if rep.symmetry_number == 4 * n and rep.closure_inferred_count == 0:
                hits += 1
        worst = min(worst, hits)
        if hits < 9:
            failures.append(f"N={n}: {hits}/10")
    ok = not failures
    detail = f"worst N scored {worst}/10" if ok else "; ".join(failures)
    _verdict(capsys, 1, ok,
             f"loops N=4..10 give sigma=4N with zero closure inferences "
             f"in >=9/10 seeded runs ({detail})")


def test_criterion_2_chains(capsys):
    bad = []
    for n in range(4, 11):
        sampled = _sampled(canonical_chain(n), 200, seed=2000 + n)
        rep = sticky_symmetry_group(sampled, LOOP_CONFIG)
        if rep.symmetry_number != 4:
            bad.append(f"N={n}: sigma={rep.symmetry_number}")
    _verdict(capsys, 2, not bad,
             "chains N=4..10 give sigma=4"
             + ("" if not bad else f" ({'; '.join(bad)})"))


def test_criterion_3_rigid(capsys, octa_report, poly_report):
    checks = {
        "octahedron sigma": octa_report.symmetry_number == 48,
        "octahedron n": octa_report.counting_number == 30,
        "octahedron T=P": set(octa_report.sticky_group)
        == set(octa_report.point_group),
        "polytetrahedron sigma": poly_report.symmetry_number == 4,
        "polytetrahedron n": poly_report.counting_number == 360,
        "polytetrahedron T=P": set(poly_report.sticky_group)
        == set(poly_report.point_group),
    }
    bad = [k for k, v in checks.items() if not v]
    _verdict(capsys, 3, not bad,
             "octahedron sigma=48 n=30, polytetrahedron sigma=4 n=360, "
             "sticky group equals point group for both"
             + ("" if not bad else f" (failed: {', '.join(bad)})"))


def test_criterion_4_mode_table(capsys, full_survey):
    result, _ = full_survey
    sig = Counter(result.sigma_values(2))
    cnt = Counter(result.counting_values(2))
    want_sig = Counter({2: 6, 4: 3, 6: 1, 8: 2, 10: 1})
    want_cnt = Counter({720: 6, 360: 3, 240: 1, 180: 2, 144: 1})
    ok = sig == want_sig and cnt == want_cnt
    _verdict(capsys, 4, ok,
             "13 d=2 graphs give sigma multiset {2x6,4x3,6,8x2,10} and "
             "n multiset {720x6,360x3,240,180x2,144}"
             + ("" if ok else f" (got sigma={dict(sig)}, n={dict(cnt)})"))


def test_criterion_5_eight_element_group(capsys, full_survey):
    result, _ = full_survey
    entries = result.entry_with(d=2, aut_order=16)
    assert len(entries) == 1, "expected a unique d=2 graph with |G|=16"
    rep = entries[0].report

    sampled = _sampled(rep.cluster, 300, seed=0)
    p_order = point_group(sampled, rep.automorphisms).order

    degrees = rep.adjacency.sum(axis=1).astype(int)
    order = np.argsort(degrees, kind="stable")
    labels = [0] * rep.n_spheres
    for k in range(3):
        labels[order[2 * k]] = labels[order[2 * k + 1]] = k
    colored = colored_symmetry(rep, Partition.from_labels(labels))

    checks = {
        "sampled |P|=4": p_order == 4,
        "|T|=8": rep.symmetry_number == 8,
        "three-pair coloring |T^C|=4": colored.symmetry_number == 4,
    }
    bad = [k for k, v in checks.items() if not v]
    _verdict(capsys, 5, not bad,
             "the |G|=16 two-bond graph gives sampled |P|=4, |T|=8, and "
             "three-pair coloring |T^C|=4"
             + ("" if not bad else f" (failed: {', '.join(bad)})"))


def test_criterion_6_radii_loop(capsys):
    cluster = canonical_loop(6, radii=[0.6, 0.4, 0.6, 0.4, 0.6, 0.4])
    rep = sticky_symmetry_group(cluster, LOOP_CONFIG)
    ok = len(rep.automorphisms) == 6 and rep.symmetry_number == 12
    _verdict(capsys, 6, ok,
             "6-loop with alternating radii 0.6/0.4 gives |G^R|=6 and sigma=12"
             + ("" if ok else f" (got |G^R|={len(rep.automorphisms)}, "
                f"sigma={rep.symmetry_number})"))


def test_criterion_7_survey(capsys, full_survey):
    result, wall = full_survey
    counts = result.counts_per_d()
    want = {0: 2, 1: 5, 2: 13, 3: 19, 4: 22, 5: 19, 6: 13, 7: 6}
    max_sigma_d7 = max(result.sigma_values(7))
    counts_ok = counts == want and len(result.entries) == 99
    sigma_ok = max_sigma_d7 == 120
    ok = counts_ok and sigma_ok
    detail = f"counts {tuple(counts.values())}, {wall:.0f}s single-core"
    if not sigma_ok:
        detail += (f"; max d=7 sigma is {max_sigma_d7}, not 120: the "
                   f"five-fold star admits a coplanar excursion, so the "
                   f"inversion partners are reachable and verified paths "
                   f"double the group")
    _verdict(capsys, 7, ok,
             "survey finds (2,5,13,19,22,19,13,6) clusters for d=0..7, "
             "total 99, with max d=7 sigma 120 (" + detail + ")")


def test_criterion_8_toy_paths(capsys):
    cs = toy_region()
    x0, x1 = toy_region_endpoints()
    means = {}
    found_counts = {}
    for mode in ("gaussian", "sample"):
        totals = []
        found = 0
        for seed in range(20):
            cfg = PathConfig(tol=0.2, sigma=0.2, beta=-0.1, n_random=50,
                             n_max=100_000, retries=1, mode=mode, seed=seed)
            res = find_path(cs, x0, x1, cfg)
            totals.append(res.n_generated)
            found += res.found
        means[mode] = float(np.mean(totals))
        found_counts[mode] = found
    ok = (found_counts["gaussian"] >= 19 and found_counts["sample"] >= 19
          and means["sample"] < means["gaussian"])
    _verdict(capsys, 8, ok,
             f"toy 2D: both modes reach the target for >=19/20 seeds within "
             f"1e5 points and sampling needs fewer points on average "
             f"(gaussian {found_counts['gaussian']}/20 mean "
             f"{means['gaussian']:.0f}, sample {found_counts['sample']}/20 "
             f"mean {means['sample']:.0f})")


def _brute_point_group(cluster: Cluster):
    """All PI operations preserving distances and handedness, by brute force."""
    D = squared_distances(cluster.positions)
    Y = cluster.positions - cluster.positions.mean(axis=0)
    rank = np.linalg.matrix_rank(Y, tol=1e-9)
    ref = None
    if rank == 3:
        for idx in permutations(range(cluster.n_spheres), 3):
            vol = np.linalg.det(Y[list(idx)])
            if abs(vol) > 1e-9:
                ref = (list(idx), vol)
                break
    ops = []
    for perm in permutations(range(cluster.n_spheres)):
        P = np.eye(cluster.n_spheres)[list(perm)]
        if not np.allclose(P @ D @ P.T, D, atol=1e-9):
            continue
        for sign in (1, -1):
            if ref is not None:
                idx, vol = ref
                mapped = sign * Y[[perm[i] for i in idx]]
                if np.linalg.det(mapped) * vol < 0:
                    continue
            ops.append(PIOperation(tuple(perm), sign))
    return set(ops)


def test_criterion_9_property_suites(capsys, octa_report, poly_report):
    rng = np.random.default_rng(9)
    checks: dict[str, bool] = {}

    loop4 = _sampled(canonical_loop(4), 200, seed=9)
    loop4_rep = sticky_symmetry_group(loop4, LOOP_CONFIG)
    reports = [octa_report, poly_report, loop4_rep]

    ok = True
    for rep in reports:
        try:
            rep.point_group.validate()
            rep.sticky_group.validate()
        except Exception:
            ok = False
    checks["group axioms"] = ok

    ok = True
    for rep in reports:
        auts = {tuple(p) for p in rep.automorphisms}
        ok &= set(rep.point_group) <= set(rep.sticky_group)
        ok &= all(tuple(op.perm) in auts and op.sign in (1, -1)
                  for op in rep.sticky_group)
    checks["P within T within GxC2"] = ok

    ok = True
    for rep in reports:
        prod = 2 * math.prod(
            math.factorial(len(c)) for c in rep.partition.classes()
        )
        ok &= prod % rep.symmetry_number == 0
    checks["sigma divides 2*prod(|C_i|!)"] = ok

    ok = True
    for _ in range(20):
        n = int(rng.integers(2, 7))
        pos = rng.normal(size=(n, 3))
        cluster = Cluster(pos, np.full(n, 0.5))
        perm = tuple(rng.permutation(n))
        sign = int(rng.choice([1, -1]))
        op = PIOperation(perm, sign)
        moved = apply_pi(cluster, op)
        P = np.eye(n)[list(perm)]
        D = squared_distances(cluster.positions)
        ok &= np.allclose(squared_distances(moved.positions), P @ D @ P.T,
                          atol=1e-10)
    checks["isometry identity"] = ok

    ok = True
    for _ in range(20):
        n = int(rng.integers(2, 8))
        Y = rng.normal(size=(n, 3))
        Y -= Y.mean(axis=0)
        G = Y @ Y.T
        D = squared_distances(Y)
        g = np.diag(G)
        ok &= np.allclose(D, g[:, None] + g[None, :] - 2 * G, atol=1e-10)
    checks["Gram identity"] = ok

    ok = True
    small = [
        Cluster(np.array([[0.5, 0, 0], [-0.5, 0, 0]]), np.full(2, 0.5)),
        canonical_loop(3),
        canonical_loop(4),
        canonical_loop(5),
        Cluster(rng.normal(size=(4, 3)), np.full(4, 0.5)),
        Cluster(rng.normal(size=(5, 3)), np.full(5, 0.5)),
    ]
    for cluster in small:
        all_perms = list(permutations(range(cluster.n_spheres)))
        got = set(point_group(cluster, all_perms))
        ok &= got == _brute_point_group(cluster)
    checks["point group matches brute force N<=5"] = ok

    hexagon = canonical_loop(6)
    cs = build_constraint_system(detect_contacts(hexagon), hexagon.radii)
    x = hexagon.flat()
    J = cs.eq_jac(x)
    h = 1e-6
    fd = np.empty_like(J)
    for j in range(cs.dim):
        e = np.zeros(cs.dim)
        e[j] = h
        fd[:, j] = (cs.eq(x + e) - cs.eq(x - e)) / (2 * h)
    scale = max(1.0, float(np.abs(J).max()))
    checks["analytic vs finite-difference gradients"] = bool(
        np.abs(J - fd).max() / scale <= 1e-6
    )

    target = apply_pi(loop4, PIOperation((1, 2, 3, 0), 1))
    cs4 = build_constraint_system(detect_contacts(loop4), loop4.radii)
    res = find_path(cs4, loop4.flat(), target.flat(), LOOP_CONFIG)
    ok = res.found
    if res.found:
        for pt in res.points:
            ok &= float(np.abs(cs4.eq(pt)).max()) <= 1e-10
            ok &= bool(np.all(cs4.ineq(pt) > 0))
    checks["path points feasible at 1e-10"] = ok

    bad = [k for k, v in checks.items() if not v]
    _verdict(capsys, 9, not bad,
             "property suites hold (group axioms, subgroup chain, "
             "divisibility, isometry and Gram identities, brute-force point "
             "groups, gradients, path feasibility)"
             + ("" if not bad else f" (failed: {', '.join(bad)})"))


def test_criterion_10_out_of_scope(capsys):
    import pathlib

    text = pathlib.Path(__file__).resolve().parents[1].joinpath(
        "README.md").read_text().lower()
    needed = ["partition function", "not computed", "11-sphere",
              "not included"]
    missing = [s for s in needed if s not in text]
    _verdict(capsys, 10, not missing,
             "README states the out-of-scope results (partition-function "
             "values and ratios, derived probability curves, the 11-sphere "
             "disconnection example)"
             + ("" if not missing else f" (missing: {', '.join(missing)})"))
