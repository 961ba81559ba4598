"""Acceptance criteria, one test each.

Every test appends a ``PASS``/``FAIL`` line to ``ACCEPTANCE_LINES``; the
lines are printed in the terminal summary.  Run directly with
``python tests/test_acceptance.py`` to print them without pytest.
"""

import hashlib
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from sqc.analysis import AnalysisOptions, Status, Verdict, analyze, compute_alpha_eta
from sqc.cli import generate_example, problem_from_dict, run
from sqc.cones import ConeSpec, contains, moreau_decompose, project_lorentz
from sqc.copositivity import lorentz_copositive, s_lemma_floor, sampled_copositive
from sqc.linalg import quad, spectral_decompose
from sqc.oracle import (
    CounterexampleKind,
    geodesic_quasiconvexity_test,
    geodesic_to_pairwise,
    geodesic_to_sublevel,
    pairwise_test,
    pairwise_to_geodesic,
    sublevel_convexity_test,
    sublevel_to_geodesic,
)
from sqc.serialize import dumps

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES  # noqa: E402


def record(number, title, ok, elapsed, limit, detail):
    ok = ok and (limit is None or elapsed < limit)
    budget = f"{elapsed:.1f}s" + (f" < {limit:.0f}s" if limit else "")
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail} ({budget})")
    return ok


# ---------------------------------------------------------------------------
# 1. Moreau suite


def test_moreau_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    count = 0
    for n in (2, 3, 5, 8):
        X = rng.standard_normal((10_000, n)) * rng.uniform(0.01, 100, size=(10_000, 1))
        scale = 1.0 + np.abs(X).max(axis=1)
        for K in (ConeSpec.orthant(n), ConeSpec.lorentz(n)):
            parts = [moreau_decompose(K, x) for x in X]
            plus = np.array([p.plus for p in parts])
            minus = np.array([p.minus for p in parts])
            # residuals relative to the size of x
            resid = np.column_stack([
                np.abs(plus - minus - X).max(axis=1) / scale,
                np.abs(np.sum(plus * minus, axis=1)) / scale**2,
                np.maximum(-K.margin(plus), 0.0) / scale,
                np.maximum(-K.margin(minus), 0.0) / scale,
            ])
            worst = max(worst, float(resid.max()))
            count += len(parts)
    elapsed = time.perf_counter() - t0
    ok = record(1, "Moreau suite", worst <= 1e-9, elapsed, 5.0,
                f"{count} decompositions, worst relative residual {worst:.1e} <= 1e-9")
    assert ok, ACCEPTANCE_LINES[-1]


# ---------------------------------------------------------------------------
# 2. projection oracle


def descent_projection(X, iters=200):
    """Nearest point of the Lorentz cone by projected gradient, without the closed form.

    For fixed ``z`` the best first coordinate is ``t = max(x1, |z|)``, and by
    rotational symmetry the best ``z`` is ``rho x2 / |x2|`` with ``rho >= 0``.
    That leaves ``min_{rho >= 0} max(rho - x1, 0)^2 + (rho - |x2|)^2``, a
    strongly convex problem with a 4-Lipschitz gradient, solved by projected
    gradient steps onto ``rho >= 0``.
    """
    x1 = X[:, 0]
    s = np.linalg.norm(X[:, 1:], axis=1)
    rho = np.zeros_like(s)
    for _ in range(iters):
        grad = 2.0 * np.maximum(rho - x1, 0.0) + 2.0 * (rho - s)
        rho = np.maximum(rho - 0.25 * grad, 0.0)
    direction = X[:, 1:] / np.where(s > 0, s, 1.0)[:, None]
    t = np.maximum(x1, rho)
    return np.column_stack([t, rho[:, None] * direction])


def test_projection_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for n in (3, 5):
        X = rng.standard_normal((500, n)) * 3.0
        Y = descent_projection(X)
        P = np.array([project_lorentz(x).plus for x in X])
        worst = max(worst, float(np.abs(P - Y).max()))
    elapsed = time.perf_counter() - t0
    ok = record(2, "Projection oracle", worst <= 1e-6, elapsed, 30.0,
                f"1000 vectors, max |P_L(x) - descent| = {worst:.1e} <= 1e-6")
    assert ok, ACCEPTANCE_LINES[-1]


# ---------------------------------------------------------------------------
# 3. Lorentz copositivity


def test_lorentz_copositivity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    counts = {"COPOSITIVE": 0, "NOT_COPOSITIVE": 0, "INCONCLUSIVE": 0}
    problems = []
    for n in (3, 5):
        K = ConeSpec.lorentz(n)
        for i in range(200):
            S = rng.standard_normal((n, n))
            A = 0.5 * (S + S.T) + rng.uniform(-1.0, 2.5) * np.eye(n)
            cert = lorentz_copositive(A)
            counts[cert.status.value] += 1
            refuter = sampled_copositive(A, K, samples=500, seed=i)
            if cert.copositive and refuter.refuted:
                problems.append(f"n={n} #{i}: COPOSITIVE but sampled witness {refuter.witness_value:.2e}")
            if cert.refuted:
                w = cert.witness
                val = float(quad(A, w))
                if not (contains(K, w, 0.0) and abs(np.linalg.norm(w) - 1) < 1e-12 and val < -1e-8):
                    problems.append(f"n={n} #{i}: witness fails re-verification")
    concave_bad = 0
    for _ in range(100):
        n = int(rng.choice([3, 5]))
        S = rng.standard_normal((n, n))
        A = 0.5 * (S + S.T)
        r1, r2 = rng.uniform(0, 10, size=2)
        w = rng.uniform()
        lhs = s_lemma_floor(A, w * r1 + (1 - w) * r2)
        if lhs < w * s_lemma_floor(A, r1) + (1 - w) * s_lemma_floor(A, r2) - 1e-12:
            concave_bad += 1
    elapsed = time.perf_counter() - t0
    ok = not problems and concave_bad == 0
    detail = (f"{counts['COPOSITIVE']} copositive, {counts['NOT_COPOSITIVE']} refuted with verified witness, "
              f"{counts['INCONCLUSIVE']} inconclusive, {len(problems)} disagreements, "
              f"concavity violations {concave_bad}/100")
    ok = record(3, "Lorentz copositivity", ok, elapsed, 60.0, detail)
    assert ok, (ACCEPTANCE_LINES[-1], problems[:5])


# ---------------------------------------------------------------------------
# 4. alpha on the Lorentz cone


def test_alpha_reproduction():
    t0 = time.perf_counter()
    vals = {}
    for n in (3, 5, 8):
        dec = spectral_decompose(np.diag(np.arange(n, dtype=float)))
        vals[n] = compute_alpha_eta(dec, ConeSpec.lorentz(n)).alpha
    elapsed = time.perf_counter() - t0
    err = max(abs(a - 0.5) for a in vals.values())
    ok = record(4, "alpha reproduction", err <= 1e-6, elapsed, 10.0,
                ", ".join(f"n={n}: {a:.9f}" for n, a in vals.items()) + f" (max error {err:.1e})")
    assert ok, ACCEPTANCE_LINES[-1]


# ---------------------------------------------------------------------------
# 5. two-eigenvalue Lorentz characterization


def test_two_eigenvalue_characterization():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    opts = AnalysisOptions(use_oracle=False)
    wrong, missed, false_alarm = [], [], []
    n_qc = n_not = 0
    for i in range(200):
        n = 3 + i % 3
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        lam = rng.uniform(-2.0, 1.0)
        mu = lam + rng.uniform(0.2, 3.0)
        A = mu * np.eye(n) - (mu - lam) * np.outer(v, v)
        K = ConeSpec.lorentz(n)
        truth = abs(v[0]) >= np.linalg.norm(v[1:])
        verdict = analyze(A, K, opts).verdict
        expected = Verdict.CERTIFIED_QUASICONVEX if truth else Verdict.CERTIFIED_NOT
        if verdict is not expected:
            wrong.append(i)
            continue
        g = geodesic_quasiconvexity_test(A, K, 100_000, seed=i, tol=1e-8)
        if truth:
            n_qc += 1
            if g.violated:
                false_alarm.append(i)
        else:
            n_not += 1
            if not (g.violated and g.counterexample.verify(A, K)):
                missed.append(i)
    elapsed = time.perf_counter() - t0
    ok = not (wrong or missed or false_alarm)
    detail = (f"{n_qc} QC / {n_not} NOT matched membership truth; {len(wrong)} verdict mismatches, "
              f"{len(missed)} NOT without oracle counterexample, {len(false_alarm)} QC with a violation")
    ok = record(5, "Two-eigenvalue characterization", ok, elapsed, 300.0, detail)
    assert ok, (ACCEPTANCE_LINES[-1], wrong, missed, false_alarm)


# ---------------------------------------------------------------------------
# 6. generator soundness


def test_generator_soundness():
    t0 = time.perf_counter()
    bad = []
    total = 0
    for name in ("countergg-orthant", "countergg-lorentz", "alpha-eta-lorentz", "householder"):
        for n, seed in ((3, None), (4, 1), (6, 2)):
            p = generate_example(name, n, seed)
            rep = analyze(p.matrix, p.cone, AnalysisOptions(use_oracle=False))
            g = geodesic_quasiconvexity_test(p.matrix, p.cone, 100_000, seed=total, tol=1e-8)
            total += 1
            if rep.verdict is not Verdict.CERTIFIED_QUASICONVEX or g.violated:
                bad.append(f"{name} n={n}: {rep.verdict.value}, oracle {g.status.value}")
    elapsed = time.perf_counter() - t0
    ok = record(6, "Generator soundness", not bad, elapsed, 300.0,
                f"{total - len(bad)}/{total} instances certified and clean under 1e5 geodesic samples")
    assert ok, (ACCEPTANCE_LINES[-1], bad)


# ---------------------------------------------------------------------------
# 7. necessary-condition refutation


def test_necessary_refutation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    K = ConeSpec.lorentz(3)
    opts = AnalysisOptions(exhaustive=True, use_oracle=False)
    unrefuted, inconsistent = [], []
    split_fails = found = 0
    for i in range(100):
        t = rng.uniform(0.05, 0.45)
        S = rng.standard_normal((3, 3))
        A = np.diag([0.0, t, 1.0]) + 0.02 * 0.5 * (S + S.T)
        rep = analyze(A, K, opts)
        split_fails += rep.outcome("NEC_LAMBDA2_SPLIT").status is Status.FAILS
        g = geodesic_quasiconvexity_test(A, K, 20_000, seed=i)
        s = sublevel_convexity_test(A, K, 16, 2000, seed=i)
        if rep.verdict is not Verdict.CERTIFIED_NOT and not (g.violated or s.violated):
            unrefuted.append(i)
        if g.violated:
            found += 1
            if not geodesic_to_sublevel(A, g.counterexample).verify(A, K):
                inconsistent.append(f"#{i} geodesic->sublevel")
        if s.violated:
            found += 1
            if not sublevel_to_geodesic(A, s.counterexample).verify(A, K):
                inconsistent.append(f"#{i} sublevel->geodesic")
    elapsed = time.perf_counter() - t0
    ok = not unrefuted and not inconsistent
    detail = (f"{100 - len(unrefuted)}/100 refuted (lambda_2 split FAILS on {split_fails}), "
              f"{found} oracle violations, {len(inconsistent)} failed transfers")
    ok = record(7, "Necessary-condition refutation", ok, elapsed, 300.0, detail)
    assert ok, (ACCEPTANCE_LINES[-1], unrefuted, inconsistent)


# ---------------------------------------------------------------------------
# 8. equivalence battery


def battery_instances(rng):
    """Random forms plus spectra near the quasi-convex boundary, on Lorentz and orthant cones."""
    out = []
    for i in range(100):
        kind, n = i % 4, 3 + (i // 4) % 3
        K = ConeSpec.orthant(n) if i % 5 == 0 else ConeSpec.lorentz(n)
        if kind == 0:
            S = rng.standard_normal((n, n))
            A = 0.5 * (S + S.T)
        else:
            spread = (0.3, 0.6, 1.5)[kind - 1]
            lam = np.concatenate([[0.0], 1.0 + np.sort(rng.uniform(0.0, spread, n - 1))])
            if K.kind == "lorentz":
                Q = np.eye(n)
                Q[1:, 1:] = np.linalg.qr(rng.standard_normal((n - 1, n - 1)))[0]
            else:
                Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
            A = (Q * lam) @ Q.T
            if kind == 3:
                A = A + 0.05 * np.diag(rng.standard_normal(n))
        out.append((A, K))
    return out


def test_equivalence_battery():
    t0 = time.perf_counter()
    budget = 4000
    unmatched, bad_transfer = [], []
    tally = {"geodesic": 0, "pairwise": 0, "sublevel": 0}
    agree_all = any_hit = 0
    for i, (A, K) in enumerate(battery_instances(np.random.default_rng(8))):
        res = {
            "geodesic": geodesic_quasiconvexity_test(A, K, budget, seed=i),
            "pairwise": pairwise_test(A, K, budget, seed=i, forms="b"),
            "sublevel": sublevel_convexity_test(A, K, 8, budget // 8, seed=i),
        }
        hits = [k for k, r in res.items() if r.violated]
        for k in hits:
            tally[k] += 1
        if hits:
            any_hit += 1
            agree_all += len(hits) == 3
            if len(hits) == 1:
                unmatched.append(f"#{i} only {hits[0]}")
        # every witness must carry over to the other two characterizations
        for k in hits:
            cex = res[k].counterexample
            if cex.kind is CounterexampleKind.PAIRWISE:
                geo = pairwise_to_geodesic(A, cex, K)
            elif cex.kind is CounterexampleKind.SUBLEVEL:
                geo = sublevel_to_geodesic(A, cex)
            else:
                geo = cex
            ok = geo is not None and geo.verify(A, K)
            ok = ok and geodesic_to_sublevel(A, geo).verify(A, K) and geodesic_to_pairwise(A, geo).verify(A, K)
            if not ok:
                bad_transfer.append(f"#{i} {k}")
    elapsed = time.perf_counter() - t0
    ok = not unmatched and not bad_transfer
    detail = (f"{any_hit} instances with violations ({agree_all} found by all three; hits "
              + ", ".join(f"{k} {v}" for k, v in tally.items())
              + f"), {len(unmatched)} unmatched, {len(bad_transfer)} failed transfers")
    ok = record(8, "Equivalence battery", ok, elapsed, 600.0, detail)
    assert ok, (ACCEPTANCE_LINES[-1], unmatched, bad_transfer)


# ---------------------------------------------------------------------------
# 9. determinism


def determinism_corpus():
    docs = []
    for name in ("countergg-orthant", "countergg-lorentz", "alpha-eta-lorentz", "householder",
                 "two-eig-lorentz-pos", "two-eig-lorentz-neg"):
        p = generate_example(name, 4, seed=11)
        docs.append({"n": 4, "matrix": p.matrix.tolist(), "cone": p.cone.to_dict(),
                     "options": {"seed": 42, "oracle_samples": 5000}})
    rng = np.random.default_rng(9)
    for n, cone in ((3, {"type": "lorentz"}), (4, {"type": "orthant"}), (5, {"type": "lorentz"})):
        S = rng.standard_normal((n, n))
        docs.append({"n": n, "matrix": (0.5 * (S + S.T)).tolist(), "cone": cone,
                     "options": {"seed": 42, "oracle_samples": 5000, "exhaustive": True}})
    return docs


def suite_digest(docs) -> str:
    h = hashlib.sha256()
    for d in docs:
        _, report = run(problem_from_dict(d), "both")
        h.update(dumps(report).encode())
    return h.hexdigest()


_CHILD = """
import json, sys
sys.path.insert(0, sys.argv[1])
from test_acceptance import suite_digest
print(suite_digest(json.loads(sys.stdin.read())))
"""


def test_determinism():
    t0 = time.perf_counter()
    docs = determinism_corpus()
    first, second = suite_digest(docs), suite_digest(docs)
    # a fresh interpreter rules out state carried between runs in one process
    child = subprocess.run([sys.executable, "-c", _CHILD, str(Path(__file__).parent)],
                           input=json.dumps(docs), capture_output=True, text=True, check=True,
                           env={"PYTHONHASHSEED": "123", **_env()})
    third = child.stdout.strip()
    elapsed = time.perf_counter() - t0
    ok = first == second == third
    ok = record(9, "Determinism", ok, elapsed, None,
                f"{len(docs)} reports, digests {'identical' if ok else 'differ'} across 2 runs + fresh process "
                f"({first[:12]})")
    assert ok, ACCEPTANCE_LINES[-1]


def _env():
    import os
    return {k: v for k, v in os.environ.items() if k != "PYTHONHASHSEED"}


if __name__ == "__main__":
    failed = 0
    for fn in (test_moreau_suite, test_projection_oracle, test_lorentz_copositivity, test_alpha_reproduction,
               test_two_eigenvalue_characterization, test_generator_soundness, test_necessary_refutation,
               test_equivalence_battery, test_determinism):
        try:
            fn()
        except AssertionError:
            failed += 1
        print(ACCEPTANCE_LINES[-1], flush=True)
    sys.exit(1 if failed else 0)
