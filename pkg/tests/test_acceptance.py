"""Acceptance criteria, one test and one PASS/FAIL line each.

Tolerances are pinned here rather than taken from the catalog defaults so a
change to a record's default cannot silently relax a criterion.
"""

from __future__ import annotations

import math
import random
import subprocess
import sys
import time
from fractions import Fraction as F

import mpmath
from mpmath import mpf, workdps

from harmsums import catalog, closedform as cf, exactcore as ec, numerics as nm, reductions as rd
from harmsums.numerics import PrecisionConfig

from conftest import ACCEPTANCE_LINES

CFG30 = PrecisionConfig(target_digits=30)


def report(num: int, title: str, ok: bool, detail: str):
    line = f"[{num:02d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def worst(results, digits):
    """Largest |lhs - rhs| and error estimate, and whether all are below 10^-digits."""
    bound = mpf(10) ** -digits
    bad = [r for r in results if r.abs_diff is None or not (r.abs_diff < bound and r.lhs_error_estimate < bound)]
    max_diff = max((r.abs_diff for r in results if r.abs_diff is not None), default=mpf(0))
    return not bad and bool(results), max_diff, bad


def run_ids(pattern, cfg=CFG30):
    return catalog.verify_all(pattern, cfg, workers=1)


def test_01_shifted_sums_k1_to_6():
    assert CFG30.working_digits == 45
    t0 = time.perf_counter()
    res = run_ids("thm1.1-*")
    elapsed = time.perf_counter() - t0
    ok, md, bad = worst(res, 30)
    ks = sorted({(r.identity, r.params["k"]) for r in res})
    ok = ok and len(ks) == 12 and elapsed <= 60
    report(1, "shifted quadratic/cubic sums, k=1..6", ok,
           f"{len(res)} instances, max|diff|={mpmath.nstr(md, 3)} < 1e-30, sweep {elapsed:.2f}s <= 60s")


def test_02_binomial_reductions():
    cfg = CFG30
    diffs = []
    for family in ("quadratic", "cubic"):
        for p in (0, 1):
            for k in range(1, 7):
                d = rd.wbar_direct(rd.FAMILY_ORDERS[family], p, k, cfg)
                r = rd.wbar_reduced(family, p, k, cfg)
                with workdps(cfg.working_digits):
                    diffs.append(abs(d.value - r))
    ok = len(diffs) == 24 and max(diffs) < mpf(10) ** -25
    report(2, "direct vs reduced binomial-weighted sums", ok,
           f"{len(diffs)} instances, max|diff|={mpmath.nstr(max(diffs), 3)} < 1e-25")


def test_03_over_n_values():
    ids = ["eq3.20", "eq3.21", "eq3.24", "eq3.25", "alt-h-n3"]
    res = [r for i in ids for r in run_ids(i)]
    ok, md, bad = worst(res, 30)
    report(3, "alternating H^3/n, HH2/n, nested eta, H^(3)/n, H/n^3 values", ok and len(res) == 5,
           f"{len(res)} identities, max|diff|={mpmath.nstr(md, 3)} < 1e-30")


def test_04_combination_sums_and_k2_literals():
    res = run_ids("eq3.2[67]")
    ok, md, _ = worst(res, 30)
    ks = sorted({r.params["k"] for r in res})
    lit = []
    for name, family in (("k2_cubic", "cubic"), ("k2_quadratic", "quadratic")):
        a = cf.eval_expr(cf.rhs_known(name), CFG30)
        b = cf.eval_expr(cf.rhs_thm11(family, 2), CFG30)
        with workdps(45):
            lit.append(abs(a - b))
    ok = ok and ks == list(range(1, 7)) and len(res) == 12 and max(lit) < mpf(10) ** -30
    report(4, "combination/H^(3) shifted sums k=1..6 and the k=2 literal displays", ok,
           f"max|diff|={mpmath.nstr(md, 3)}, literal max|diff|={mpmath.nstr(max(lit), 3)} < 1e-30")


def test_05_bell_over_n_and_quadrature():
    res = run_ids("eq3.17")
    ok1, md, _ = worst(res, 30)
    ms = [r.params["m"] for r in res]
    cfg = PrecisionConfig(target_digits=20)
    qd = []
    for m in range(1, 5):
        v = rd.eval_series(rd.IntLn1mxOver1px(m), cfg).value
        e = cf.eval_expr(cf.rhs_known("int_ln1mx_over_1px", m=m), cfg)
        with workdps(40):
            qd.append(abs(v - e))
    ok = ok1 and ms == [1, 2, 3, 4, 5] and max(qd) < mpf(10) ** -10
    report(5, "Bell-weighted alternating sums m=1..5 and the log integral cross-check m<=4", ok,
           f"series max|diff|={mpmath.nstr(md, 3)} < 1e-30, quadrature max|diff|={mpmath.nstr(max(qd), 3)} < 1e-10")


def test_06_log_integrals():
    res = run_ids("eq3.13") + run_ids("thm2.6-m*")
    ok, md, _ = worst(res, 20)
    grid = sorted((r.params["m"], str(r.params["z"])) for r in res if r.identity == "eq3.13")
    expect = sorted((m, z) for m in range(1, 5) for z in ("1/2", "1"))
    ok = ok and [(m, str(z)) for m, z in grid] == expect and len(res) == 10
    report(6, "int_0^z ln^m(1+x)/x dx, z in {1/2,1}, m=1..4 plus the m=3,4 displays", ok,
           f"{len(res)} instances, max|diff|={mpmath.nstr(md, 3)} < 1e-20")


def test_07_power_series_identities():
    samples = {F(-1, 3), F(1, 3), F(-1, 2), F(1, 2), F(-9, 10), F(9, 10)}
    res = run_ids("eq3.1") + run_ids("eq3.3") + run_ids("eq3.7") + run_ids("eq3.8")
    ok, md, _ = worst(res, 25)
    by_id: dict[str, set] = {}
    for r in res:
        by_id.setdefault(r.identity, set()).add(r.params["x"])
        assert r.params.get("m", 1) <= 4 and r.params.get("k", 1) <= 4
    covered = all(samples <= xs for xs in by_id.values())
    minus_one = all(F(-1) in by_id[i] for i in ("eq3.1", "eq3.3"))
    ok = ok and covered and minus_one and len(by_id) == 4
    report(7, "Stirling/harmonic power-series identities at the x sample set (and x=-1)", ok,
           f"{len(res)} instances, max|diff|={mpmath.nstr(md, 3)} < 1e-25")


def test_08_exact_suites():
    ok = True
    for n in range(1, 31):
        for k in range(1, 6):
            ok &= ec.stirling1_closed(n, k) == ec.stirling1(n, k)
    for n in range(0, 31):
        for k in range(1, 5):
            ok &= ec.bell_Y_closed(k, n) == ec.bell_Y(k, n)
    for k in range(1, 5):
        c = ec.log1m_power_series(k, 20)
        ok &= all(c[n] == F((-1) ** k * math.factorial(k) * ec.stirling1(n, k), math.factorial(n)) for n in range(21))
    rng = random.Random(1013)
    pairs = [(rng.randint(1, 10**4), rng.randint(1, 12)) for _ in range(500)]
    for n, k in pairs:
        ok &= sum(a / (n + r) for r, a in ec.binom_recip_coeffs(k)) == F(1, math.comb(n + k, k))
    res = run_ids("class=exact")
    ok &= all(r.passed and r.abs_diff == 0 for r in res)
    report(8, "exact Stirling, Bell, log-series and partial-fraction suites", bool(ok),
           f"150 + 124 + 84 + {len(pairs)} exact checks, {len(res)} catalog instances, zero tolerance")


def test_09_log_moment_quadrature():
    res = run_ids("eq3.5")
    ok, md, _ = worst(res, 10)
    grid = {(r.params["n"], r.params["k"]) for r in res}
    ok = ok and {(n, k) for n in range(1, 7) for k in range(1, 5)} <= grid
    report(9, "quadrature of t^(n-1) ln^k(1-t) vs (-1)^k Y_k(n)/n, n<=6, k<=4", ok,
           f"{len(res)} instances, max|diff|={mpmath.nstr(md, 3)} < 1e-10")


def test_10_non_alternating_sums():
    res = run_ids("intro-*")
    ok, md, _ = worst(res, 10)
    ks = sorted(r.params["k"] for r in res if r.identity == "intro-binom")
    ok = ok and ks == [1, 2, 3, 4] and {r.method for r in res} == {"tail-fit"}
    report(10, "non-alternating weight-7/9 sums and the binomial sum k=1..4", ok,
           f"{len(res)} instances, max|diff|={mpmath.nstr(md, 3)} < 1e-10 (tail-corrected)")


def test_11_acceleration_self_test():
    cfg = PrecisionConfig(target_digits=50)
    with workdps(90):
        refs = {"ln 2": mpmath.log(2), "eta(2)": mpmath.pi**2 / 12}
    errs = {
        "ln 2": abs(nm.ln2(cfg) - refs["ln 2"]),
        "eta(2)": abs(nm.eta_int(2, cfg) - refs["eta(2)"]),
    }
    with workdps(90):
        errs = {k: abs(v) for k, v in errs.items()}
    ok = all(e < mpf(10) ** -50 for e in errs.values())
    # digits per term at a fixed order, measured at precision well above the truncation error
    rates = []
    for d in (30, 60):
        fixed = PrecisionConfig(target_digits=120, acceleration_order=d)
        for s, ref in ((1, refs["ln 2"]), (2, refs["eta(2)"])):
            v = nm.accelerate_alternating(lambda n, s=s: mpf(1) / mpf(n) ** s, fixed).value
            with workdps(140):
                err = abs(v - ref)
            rates.append(float(-mpmath.log10(err)) / d)
    ok = ok and min(rates) >= 0.5
    report(11, "CRVZ self-test on ln 2 and eta(2) at 50 digits", ok,
           f"errors {', '.join(f'{k}={mpmath.nstr(v, 2)}' for k, v in errs.items())}; "
           f"digits/term min {min(rates):.3f} (documented {nm.CRVZ_DIGITS_PER_TERM:.3f}) >= 0.5")


def test_12_full_verify_cli():
    t0 = time.perf_counter()
    p = subprocess.run(
        [sys.executable, "-m", "harmsums", "verify", "--digits", "30", "--tolerance", "25"],
        capture_output=True, text=True, timeout=600,
    )
    elapsed = time.perf_counter() - t0
    tail = p.stdout.strip().splitlines()[-1] if p.stdout.strip() else p.stderr.strip()
    ok = p.returncode == 0 and elapsed <= 300
    report(12, "full verify suite at default settings", ok, f"exit {p.returncode}, {tail}, {elapsed:.1f}s <= 300s")
