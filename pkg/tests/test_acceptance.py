"""Acceptance criteria 1-11, each with its time limit.

Every criterion records one PASS/FAIL line; they are printed together in the
pytest terminal summary (and directly when this file is run as a script).
"""

import random
import time
from fractions import Fraction as F

import pytest

from nilrec import cli, coloring, dynamics as dy, nilgroup as ng, polymap as pm, semigroup as sg, weight as wt
from nilrec.dynamics import AffineMap, RecurrenceQuery, UnipotentAffineAction
from nilrec.semigroup import FiniteSet, fset

from conftest import ACCEPTANCE
from oracles import eval_poly, mat, matinv, naive_matmul, subsets


def record(num, ok, elapsed, limit, detail=""):
    verdict = "PASS" if ok and elapsed < limit else "FAIL"
    line = f"criterion {num:2d}: {verdict}  {elapsed:7.2f}s (limit {limit}s)  {detail}"
    ACCEPTANCE[num] = line
    print(line)
    assert ok, line
    assert elapsed < limit, line


CORPUS: list = []


def rule(d=1, hi=20, scale=1):
    return {"kind": "monomial", "degree": d, "rule": {"range": [1, hi], "scale": scale, "generator": [1, 2]}}


def test_c01_group_axioms():
    rng = random.Random(1)
    t = time.perf_counter()
    ok = True
    for i in range(10_000):
        n = 3 + i % 3
        a, b, c = (ng.random_element(rng, n, 10) for _ in range(3))
        e = ng.identity(n)
        ok &= (a * b) * c == a * (b * c)
        ok &= a * e == a == e * a
        ok &= a * a.inverse() == e == a.inverse() * a
    record(1, ok, time.perf_counter() - t, 5, "10^4 triples in UT(3..5)")


def test_c02_commutator_levels():
    rng = random.Random(2)
    t = time.perf_counter()
    ok = True
    for i in range(1000):
        n = 3 + i % 3
        a = ng.random_element(rng, n, 10, min_level=rng.randint(1, n - 1))
        b = ng.random_element(rng, n, 10, min_level=rng.randint(1, n - 1))
        ok &= ng.lcs_level(ng.commutator(a, b)) >= min(a.level() + b.level(), n)
    record(2, ok, time.perf_counter() - t, 2, "10^3 pairs")


def _as_el(m):
    return ng.GroupElement(tuple(tuple(r) for r in m))


def test_c03_extensional_rewrites():
    rng = random.Random(3)
    ground = tuple(range(1, 6))
    t = time.perf_counter()
    bad = 0
    for _ in range(100):
        P = pm.random_polynomial(rng, 3, 7)
        Q = pm.random_polynomial(rng, 3, 5)
        g = ng.random_element(rng, 3, 5)
        U = pm.shift(P, fset(6, 7))
        C = pm.conjugate(P, g)
        PQ = pm.product(P, Q)
        QP = pm.quotient_left(Q, P)
        K = wt.canonicalize(P)
        # U(empty) = P({6,7}) by definition, so shifts are not part of the corpus
        CORPUS.extend([P, Q, C, PQ, QP, K])
        for a in subsets(ground):
            alpha = FiniteSet(a)
            p, q = eval_poly(P, a), eval_poly(Q, a)
            checks = [
                (U, eval_poly(P, a + (6, 7))),
                (C, naive_matmul(naive_matmul(matinv(g), p), mat(g))),
                (PQ, naive_matmul(p, q)),
                (QP, naive_matmul(matinv(_as_el(q)), p)),
                (K, p),
            ]
            bad += sum(mat(pm.evaluate(R, alpha)) != want for R, want in checks)
    record(3, bad == 0, time.perf_counter() - t, 30, f"100 mappings x 5 rewrites x 32 sets, {bad} mismatches")


def test_c04_empty_set_identity():
    rng = random.Random(4)
    t = time.perf_counter()
    corpus = list(CORPUS)
    for n in (2, 3, 4, 5):
        corpus += [pm.random_polynomial(rng, n, 5) for _ in range(100)]
    for _ in range(50):
        A, gamma, g = wt.random_reduction_case(rng, 3 + rng.randint(0, 1))
        for P in A:
            corpus += [P, wt.canonicalize(P), pm.commutator_map(P, g)]
    corpus += list(pm.system_from_json([rule(2), rule(1)], 2))
    bad = sum(not pm.evaluate(P, sg.EMPTY).is_identity() for P in corpus)
    record(4, bad == 0, time.perf_counter() - t, 60, f"{len(corpus)} mappings, {bad} violations")


def test_c05_weight_reduction():
    t = time.perf_counter()
    records = wt.reduction_trials([3, 4], 100, seed=5)
    ok = all(r["trials"] == 200 and r["passes"] == 200 for r in records)
    detail = ", ".join(f"item {r['item']} {r['passes']}/{r['trials']}" for r in records)
    record(5, ok, time.perf_counter() - t, 120, detail)


def test_c06_conjugation_bound():
    rng = random.Random(6)
    t = time.perf_counter()
    ok = True
    for i in range(500):
        n = 3 + i % 2
        P = pm.random_polynomial(rng, n, 4)
        g = ng.random_element(rng, n, 5)
        C = pm.conjugate(P, g)
        wP, ppP = wt.signature(P)
        wC, ppC = wt.signature(C)
        ok &= wC <= wP and ppC == ppP
    record(6, ok, time.perf_counter() - t, 30, "500 (P, g)")


def test_c07_recurrence_witnesses():
    t = time.perf_counter()
    rot = UnipotentAffineAction(2, [AffineMap.rotation([F(1, 10)])])
    q = RecurrenceQuery(pm.system_from_json([rule()], 2), [0], F(1, 100), 5, 5)
    alpha, ds = dy.recurrence_search(q, rot)
    ok_rot = alpha == fset(1, 2, 3, 4) and ds == [0]
    t_rot = time.perf_counter() - t

    t = time.perf_counter()
    skew = UnipotentAffineAction(2, [AffineMap.of([[1, 0], [1, 1]], [F(1, 7), 0])])
    A = pm.system_from_json([rule(2), rule(1)], 2)
    q = RecurrenceQuery(A, [0, 0], F(1, 100), 20, 20)
    hit = dy.recurrence_search(q, skew)
    ok_skew = hit is not None
    if hit:
        x = dy.point([0, 0])
        ok_skew = all(dy.rho(skew.act(pm.evaluate(P, hit[0]), x), x) < F(1, 100) for P in A)
    t_skew = time.perf_counter() - t
    record(7, ok_rot and ok_skew and t_rot < 10, t_skew, 10,
           f"rotation {alpha} in {t_rot:.2f}s; skew witness {hit[0] if hit else None}")


def test_c08_commuting_recurrence():
    t = time.perf_counter()
    maps = [AffineMap.rotation([F(1, 4)]), AffineMap.rotation([F(1, 6)])]
    x = dy.point([0])
    n1 = dy.commuting_recurrence(maps, x, F(1, 100), 1000)
    n2 = dy.commuting_recurrence(maps, x, F(1, 2), 1000)
    n3 = dy.commuting_recurrence(maps, x, F(3, 4), 1000)
    record(8, (n1, n2, n3) == (12, 1, 1), time.perf_counter() - t, 1, f"n={n1}; eps>=1/2 gives {n2}, {n3}")


def test_c09_ipstar_fragment():
    rng = random.Random(9)
    t = time.perf_counter()
    fams = [sg.random_family(rng, 8) for _ in range(20)]
    top = max(max(f.generators[-1].elements) for f in fams)
    rot = UnipotentAffineAction(2, [AffineMap.rotation([F(1, 10)])])
    q = RecurrenceQuery(pm.system_from_json([rule(hi=top)], 2), [0], F(1, 5), top, top)
    rep = dy.ipstar_fragment_check(q, rot, fams, 8)
    ok = rep["found"]
    if ok:
        y = rep["base_point"]
        P = q.system.polys[0]
        ok = all(w is not None and w in sg.fu_enumerate(f, 8)
                 and dy.rho(rot.act(pm.evaluate(P, w), y), y) < F(1, 5)
                 for f, w in zip(fams, rep["witnesses"]))
    detail = "20 families, depth 8" if ok else f"families without witness: {rep.get('missing_families')}"
    record(9, ok, time.perf_counter() - t, 60, detail)


def test_c10_van_der_waerden():
    t = time.perf_counter()
    r9 = coloring.vdw_exhaustive(9, 3, jobs=1)
    r8 = coloring.vdw_exhaustive(8, 3, jobs=1)
    ok = r9["all_contain_ap"] and r9["colorings"] == 512 and r8["ap_free"] > 0
    record(10, ok, time.perf_counter() - t, 1, f"[1..9]: 512/512 contain 3-AP; [1..8]: {r8['ap_free']} AP-free")


def _ipstar_config():
    return {
        "n": 2, "seed": 7, "system": [rule(hi=60)],
        "action": {"generators": [{"vector": ["1/10"]}]}, "x": ["0"], "epsilon": "1/5",
        "random_families": {"count": 20, "length": 8}, "limits": {"depth": 8},
    }


DETERMINISM_CASES = [
    ("vdw", {"k": 3, "N": 9}),
    ("vdw", {"k": 3, "N": 8}),
    ("recurrence", {"n": 2, "system": [rule()], "action": {"generators": [{"vector": ["1/10"]}]},
                    "x": ["0"], "epsilon": "1/100", "limits": {"N": 5}}),
    ("recurrence", {"n": 2, "system": [rule(2), rule(1)],
                    "action": {"generators": [{"matrix": [[1, 0], [1, 1]], "vector": ["1/7", "0"]}]},
                    "x": ["0", "0"], "epsilon": "1/100", "limits": {"N": 20}}),
    ("ipstar", _ipstar_config()),
    ("group-color", {"coloring": {"start": -50, "stop": 50, "mod": 2},
                     "ip_systems": [rule(hi=10), rule(hi=10, scale=2)], "family": [[1], [3]]}),
    ("corollary", {"A": {"mod": 3}, "system": [rule(hi=10, scale=3)], "family": [[1], [2], [3]],
                   "radius": 20, "s": 2}),
    ("reduce-check", {"seed": 11, "dims": [3], "limits": {"trials": 10}}),
]


def test_c11_determinism():
    t = time.perf_counter()
    diffs = []
    for kind, config in DETERMINISM_CASES:
        a, ca, _ = cli.run(kind, config, jobs=1)
        b, cb, _ = cli.run(kind, config, jobs=8)
        a.pop("wall_time")
        b.pop("wall_time")
        if ca != 0 or a != b:
            diffs.append(kind)
    fam = sg.random_family(random.Random(0), 12)
    pred = _Pred()
    if sg.meets_fu(pred, fam, 12, jobs=1) != sg.meets_fu(pred, fam, 12, jobs=8):
        diffs.append("meets_fu")
    record(11, not diffs, time.perf_counter() - t, 120,
           f"{len(DETERMINISM_CASES) + 1} searches, jobs 1 vs 8" + (f"; differ: {diffs}" if diffs else ""))


class _Pred:
    def __call__(self, a):
        return len(a) > 6 and sum(a) % 5 == 2


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
