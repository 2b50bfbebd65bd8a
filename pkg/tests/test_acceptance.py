"""Acceptance suite: one test per criterion, each with its own time limit.

Run with ``pytest tests/test_acceptance.py`` (verdict lines appear in the
summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import itertools
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from _acceptance_log import record  # noqa: E402

from hpx.bounds import cp_objective, solve_cp  # noqa: E402
from hpx.cli import main  # noqa: E402
from hpx.counting import hp_density_subset, s3_fourier, s3_fourier_exact, s_k_bruteforce  # noqa: E402
from hpx.extremal import R_exact, r_k_exact  # noqa: E402
from hpx.groups import DenseFunction, GroupSpec, SubsetMask, product_mask  # noqa: E402
from hpx.hp import HPSpec  # noqa: E402
from hpx.ip import (CharacterId, IPWindow, TranslationSystem, average_by_distribution,  # noqa: E402
                    double_limit_average, ip_char_average, junta_projection,
                    matrix_correlation, product_formula, repeated_basis, shift_distribution,
                    total_variation_from_uniform, weyl_limit_experiment)
from hpx.montecarlo import delta_k_experiment  # noqa: E402
from hpx.report import body_of, dumps  # noqa: E402

SEED = 31337


def verdict(n, title, ok, detail, t0, limit):
    elapsed = time.perf_counter() - t0
    ok = bool(ok) and elapsed < limit
    line = record(n, ok, title, detail + ("" if elapsed < limit else f" | over {limit} s"), elapsed)
    print(line)
    assert ok, line


def test_criterion_01_fourier_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    spec = GroupSpec(3, (2,))
    hp = HPSpec.default(spec, 3)
    for mask in range(512):
        A = SubsetMask(spec, np.array([(mask >> i) & 1 for i in range(9)], bool))
        worst = max(worst, abs(s3_fourier(A) - s_k_bruteforce(A, hp)))
    rng = np.random.default_rng(SEED)
    for p, n in ((3, 4), (5, 3)):
        spec = GroupSpec(p, (n,))
        hp = HPSpec.default(spec, 3)
        for _ in range(200):
            f, g, h = (DenseFunction(spec, rng.random(spec.size)) for _ in range(3))
            worst = max(worst, abs(s3_fourier(f, g, h) - s_k_bruteforce([f, g, h], hp)))
    verdict(1, "Fourier vs brute force", worst <= 1e-10, f"max |diff| = {worst:.2e}", t0, 60)


def test_criterion_02_apfree_identity():
    t0 = time.perf_counter()
    checked, bad = [], []
    for p, n in ((3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1)):
        hp = HPSpec.default(GroupSpec(p, (n,)), 3)
        _, A = r_k_exact(hp)
        target = Fraction(A.cardinality, p ** (2 * n))
        ok = s3_fourier_exact(A) == target == hp_density_subset(A, hp)
        checked.append(f"F_{p}^{n}:{A.cardinality}")
        if not ok:
            bad.append(f"F_{p}^{n}")
    verdict(2, "AP-free identity |A|/p^2n", not bad,
            f"witnesses {', '.join(checked)}; mismatches {bad or 'none'}", t0, 5)


def test_criterion_03_exact_extremal():
    t0 = time.perf_counter()
    vals = {}
    for n in (1, 2):
        hp = HPSpec.default(GroupSpec(3, (n,)), 3)
        (a, Wa), (b, Wb) = r_k_exact(hp, "branch"), r_k_exact(hp, "exhaustive")
        vals[n] = (a, b, Wa == Wb)
    ok = vals[1][:2] == (Fraction(2, 3),) * 2 and vals[2][:2] == (Fraction(4, 9),) * 2
    ok = ok and vals[1][2] and vals[2][2]
    detail = "; ".join(f"r_3(F_3^{n}) = {a} / {b}, witnesses agree: {w}" for n, (a, b, w) in vals.items())
    verdict(3, "exact r_3 values, two search orders", ok, detail, t0, 30)


def test_criterion_04_bound_sandwich(tmp_path):
    t0 = time.perf_counter()
    deltas = [Fraction(i, 9) for i in range(1, 9)]
    C3 = solve_cp(3).C_p
    minima = {}
    for dims in ((1,), (2,)):
        hp = HPSpec.default(GroupSpec(3, dims), 3)
        for d in deltas:
            val, _ = R_exact(hp, d)
            minima[d] = min(minima.get(d, val), val)
    outside = []
    for d, v in minima.items():
        lo, hi = (float(d) / 3) ** C3, d ** 3
        if v > hi:
            outside.append(f"delta={d}: {v} > {hi}")
        elif v < lo:
            outside.append(f"delta={d}: {v} < {lo:.3g}")
    code = main(["pipeline", "--p", "3", "--ladder", "1;2", "--deltas",
                 ",".join(str(d) for d in deltas), "--out", str(tmp_path / "pipe.json")])
    report = json.loads((tmp_path / "pipe.json").read_text())
    flagged = report["bounds"]["rows"]
    exit_ok = code == (4 if any(r["status"] == "VIOLATION" for r in flagged) else 0)
    detail = (f"exit code {code} (consistent: {exit_ok}); outside sandwich: "
              f"{'; '.join(outside) or 'none'}")
    verdict(4, "sandwich (delta/3)^C3 <= min <= delta^3", not outside and exit_ok, detail, t0, 300)


def test_criterion_05_cp_solver():
    t0 = time.perf_counter()
    sols = [solve_cp(p) for p in (3, 5, 7, 11, 13)]
    solve_time = time.perf_counter() - t0
    s3 = sols[0]
    local = all(cp_objective(s.x_star + h, s.p) >= s.inf_value for s in sols[:1] for h in (-1e-6, 1e-6))
    ok = 2.7550 <= s3.inf_value <= 2.7552 and local and solve_time < 1.0
    verdict(5, "C_p solver", ok,
            f"inf_3 = {s3.inf_value:.7f}, x* = {s3.x_star:.8f}, C_3 = {s3.C_p:.4f}, "
            f"five primes in {solve_time * 1000:.1f} ms", t0, 1)


def test_criterion_06_product_formula():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(500):
        p = int(rng.choice([2, 3, 5, 7, 11]))
        d = int(rng.integers(1, 6))
        L = int(rng.integers(1, 18))
        D = int(rng.integers(0, L))
        N = int(rng.integers(D + 1, min(L, D + 14) + 1))
        w = IPWindow(p, rng.integers(0, p, size=(L, d)), D, N)
        xi = CharacterId(p, tuple(rng.integers(0, p, size=d)))
        worst = max(worst, abs(ip_char_average(xi, w) - product_formula(xi, w)))
    verdict(6, "IP average equals product formula", worst <= 1e-10,
            f"500 instances, max |diff| = {worst:.2e}", t0, 30)


def test_criterion_07_double_limit():
    t0 = time.perf_counter()
    p, n = 3, 2
    sysm = TranslationSystem.identity(p, n)
    rng = np.random.default_rng(SEED)
    worst, bound_ok = 0.0, True
    for D in (0, 2, 5):
        gens = repeated_basis(n, D + 40)
        f = rng.random(p ** n)
        f = f - junta_projection(f, sysm, gens, D)  # zero mean, no junta part
        assert np.allclose(junta_projection(f, sysm, gens, D), 0)
        w = IPWindow(p, gens, D, D + 40)
        exact = average_by_distribution(f, sysm, w)
        char = double_limit_average(f, sysm, gens, [(D, D + 40)])[(D, D + 40)]
        dev = float(np.linalg.norm(exact))  # projection is zero
        tv = total_variation_from_uniform(shift_distribution(w))
        bound = 2 * tv * float(np.abs(f).max()) * math.sqrt(f.size)
        bound_ok &= dev <= bound + 1e-15 and np.allclose(exact, char, atol=1e-12)
        worst = max(worst, dev)
    verdict(7, "double limit approaches junta projection", worst <= 0.02 and bound_ok,
            f"max l2 deviation at N-D=40: {worst:.2e} (within TV bound: {bound_ok})", t0, 30)


def test_criterion_08_weyl_limit():
    t0 = time.perf_counter()
    spec = GroupSpec(3, (2,))
    A = SubsetMask.from_ranks(spec, [0, 1, 3, 4])
    rows = weyl_limit_experiment([A.bits.astype(float)] * 3, 3, 2, [(0, 40)])
    r = rows[0]
    exact = s_k_bruteforce(A, HPSpec.default(spec, 3))
    ok = abs(r["value"] - exact) <= 0.01 and r["target"] == exact
    verdict(8, "Weyl limit at count 20", ok,
            f"cell {r['value']:.6f} vs S^3 {exact:.6f}, deviation {r['deviation']:.2e}", t0, 60)


def test_criterion_09_matrix_skew():
    t0 = time.perf_counter()
    spec = GroupSpec(3, (2,))
    rng = np.random.default_rng(SEED)
    sets = [SubsetMask.from_ranks(spec, [0, 1, 3, 4])]
    sets += [SubsetMask(spec, rng.random(9) < 0.5) for _ in range(3)]
    gammas = [g for g in itertools.product(range(3), repeat=2) if any(g)]
    mism = [(A.ranks().tolist(), g) for A in sets for g in gammas
            if matrix_correlation(A, g, 2) != s3_fourier_exact(A)]
    verdict(9, "matrix skew identity", len(gammas) == 8 and not mism,
            f"{len(sets)} sets x {len(gammas)} gammas, mismatches {mism or 'none'}", t0, 60)


def test_criterion_10_random_sets():
    t0 = time.perf_counter()
    passed = sum(delta_k_experiment(3, 3, 0.3, 9, seed=s).passed for s in range(20))
    verdict(10, "random-set delta^k experiments", passed >= 19,
            f"{passed}/20 seeds within the 4-sigma gate", t0, 120)


def test_criterion_11_product_equality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    shapes = [(1,), (2,), (1, 1), (0, 1)]
    bad = 0
    for _ in range(50):
        sa = GroupSpec(3, shapes[rng.integers(len(shapes))])
        sb = GroupSpec(3, shapes[rng.integers(len(shapes))])
        A = SubsetMask(sa, rng.random(sa.size) < rng.random())
        B = SubsetMask(sb, rng.random(sb.size) < rng.random())
        P = product_mask(A, B)
        lhs = hp_density_subset(P, HPSpec.default(P.spec, 3))
        rhs = hp_density_subset(A, HPSpec.default(sa, 3)) * hp_density_subset(B, HPSpec.default(sb, 3))
        bad += lhs != rhs
    verdict(11, "S^3 of product sets multiplies", bad == 0, f"50 pairs, {bad} mismatches", t0, 10)


SEEDED_COMMANDS = [
    ["extremal", "search", "--p", "3", "--dims", "2", "--delta", "4/9", "--seed", "3"],
    ["random", "verify", "--p", "3", "--factors", "0.2,0.5,0.9", "--windows", "4,6", "--seed", "8"],
    ["random", "delta-k", "--p", "3", "--delta", "0.3", "--window", "7", "--seed", "5"],
    ["pipeline", "--p", "3", "--ladder", "1;2", "--deltas", "1/9,4/9,2/3", "--seed", "2"],
]


def test_criterion_12_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    same = []
    for i, argv in enumerate(SEEDED_COMMANDS):
        out = tmp_path / f"r{i}.json"
        main(argv + ["--out", str(out)])
        again = tmp_path / f"r{i}.replay.json"
        rc = main(["replay", str(out) + ".manifest.json", "--out", str(again)])
        a = dumps(body_of(json.loads(out.read_text())))
        b = dumps(body_of(json.loads(again.read_text())))
        same.append(rc == 0 and a == b)
    capsys.readouterr()
    names = [" ".join(x for x in a[:2] if not x.startswith("-")) for a in SEEDED_COMMANDS]
    verdict(12, "replay reproduces report bodies", all(same),
            ", ".join(f"{n}: {'identical' if s else 'DIFFERENT'}" for n, s in zip(names, same)),
            t0, 600)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-rN"]))
