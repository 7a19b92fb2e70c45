from __future__ import annotations

import json
import math
from fractions import Fraction as F
from importlib import resources

import jsonschema
import mpmath
import pytest
from mpmath import mpf, workdps

from harmsums import closedform as cf
from harmsums import exactcore
from harmsums import numerics as nm
from harmsums import reductions as rd
from harmsums.numerics import PrecisionConfig

T = rd.NAMED_TERMS


def close(a, b, digits):
    with workdps(digits + 20):
        return abs(mpf(a) - mpf(b)) < mpf(10) ** -digits


def ev(spec, cfg):
    return rd.eval_series(spec, cfg)


def rhs(e, cfg):
    return cf.eval_expr(e, cfg)


def brute_power_series(coeff, x, N, dps=40):
    """sum_{n=1}^N coeff(n) x^n with coeff exact, summed at dps digits."""
    with workdps(dps):
        xv = nm.to_mpf(F(x))
        return mpmath.fsum(nm.to_mpf(coeff(n)) * xv**n for n in range(1, N + 1))


# -- term kinds -----------------------------------------------------------------


def test_termkind_encodings():
    assert T["H3"].to_json() == [[1, 3]]
    assert rd.TermKind.from_json([[1, 1], [2, 1]]) == T["HH2"]
    assert rd.TermKind.from_json({"bell": 3}) == T["Y3"]
    assert rd.TermKind.from_json("Y3combo") == T["Y3combo"]
    combo = T["Y3combo"]
    assert rd.TermKind.from_json(json.loads(json.dumps(combo.to_json()))) == combo
    with pytest.raises(ValueError):
        rd.TermKind.from_json("nosuch")
    with pytest.raises(ValueError):
        rd.TermKind.product((0, 1))


def test_termkind_exact_and_log_power():
    assert T["HH2"].exact(2) == F(3, 2) * F(5, 4)
    assert T["Y3"].exact(2) == F(45, 4)
    assert T["Y3combo"].exact(5) == 6 * exactcore.stirling1(6, 4) / math.factorial(5)
    assert T["H3"].log_power() == 3 and T["H^(3)"].log_power() == 0 and T["Y3"].log_power() == 3


def test_term_oracle_incremental():
    f = rd.term_oracle(T["HH2"])
    with workdps(40):
        vals = [f(n) for n in range(1, 30)]
        assert all(close(v, nm.to_mpf(T["HH2"].exact(n)), 35) for n, v in zip(range(1, 30), vals))


# -- spec JSON --------------------------------------------------------------------


def _schema():
    return json.loads(resources.files("harmsums").joinpath("schemas/series_spec.schema.json").read_text())


def test_spec_json_round_trip_and_schema():
    from harmsums import catalog

    validator = jsonschema.Draft202012Validator(_schema())
    seen = set()
    specs = {rec.lhs(**params) for rec in catalog.registry() for params in rec.param_domain}
    for spec in specs:
        if isinstance(spec, rd.SeriesSpec):
            data = spec.to_json()
            validator.validate(data)
            assert rd.SeriesSpec.from_json(json.loads(json.dumps(data))) == spec
            seen.add(spec.kind)
    assert len(seen) >= 15


def test_schema_covers_every_kind():
    kinds = {v["properties"]["kind"]["const"] for v in _schema()["oneOf"]}
    assert kinds == set(rd.SPEC_KINDS)


@pytest.mark.parametrize(
    "data",
    [
        {},
        {"kind": "Nope"},
        {"kind": "AltOverN"},
        {"kind": "AltOverN", "term": [[1, 3]], "p": 1, "extra": 2},
        {"kind": "AltShifted", "term": [[1, 3]], "k": "2"},
        {"kind": "PowerSeriesAt", "term": "H", "x": 0.5},
        {"kind": "WbarAlt", "orders": [1, 2], "p": 2, "k": 1},
        {"kind": "AltShifted", "term": [[1, 3]], "k": -1},
        {"kind": "SpecSum", "parts": []},
    ],
)
def test_spec_json_rejects(data):
    with pytest.raises(ValueError):
        rd.SeriesSpec.from_json(data)


# -- documented examples ----------------------------------------------------------


def test_alt_over_n_cubic(cfg30):
    r = ev(rd.AltOverN(T["H3"], 1), cfg30)
    assert mpmath.nstr(r.value, 15) == "0.274125746549253"
    assert close(r.value, rhs(cf.rhs_known("cor28_h3"), cfg30), 30)
    assert r.error_bound < mpf(10) ** -30


def test_int_beta_example(cfg30):
    r = ev(rd.IntBeta(3, 2), cfg30)
    with workdps(50):
        assert close(r.value, nm.to_mpf(F(170, 108)), 30)


def test_harmonic_product_thirds(cfg30):
    r = ev(rd.HarmonicProductSeries(2, F(1, 3)), cfg30)
    assert close(r.value, rhs(cf.rhs_hh2_series(F(1, 3)), cfg30), 30)
    assert close(r.value, brute_power_series(lambda n: T["HH2"].exact(n), F(1, 3), 200), 35)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_alt_shifted_against_mpmath(k):
    cfg = PrecisionConfig(target_digits=20)
    with workdps(40):
        ref = mpmath.nsum(lambda n: (-1) ** (n + k) * mpmath.harmonic(n) ** 3 / (n + k), [1, mpmath.inf])
    assert close(ev(rd.AltShifted(T["H3"], k), cfg).value, ref, 18)


@pytest.mark.parametrize("k", range(1, 7))
@pytest.mark.parametrize("name", ["H3", "HH2", "H^(3)", "Y3combo"])
def test_shift_reindexing(name, k, cfg30):
    # split off n=1 exactly and sum the reindexed tail with the accelerator directly
    term = T[name]
    direct = ev(rd.AltShifted(term, k), cfg30).value
    first = F((-1) ** (1 + k)) * term.exact(1) / (1 + k)
    f = rd.term_oracle(term)
    f(1)

    def shifted(n):
        return f(n + 1) / (n + 1 + k)

    tail = nm.accelerate_alternating(shifted, cfg30).value
    with workdps(45):
        sign = (-1) ** (2 + k)
        assert close(direct, nm.to_mpf(first) + sign * tail, 30)


# -- binomial-weighted pipeline-----------------------------------------------------------


def test_wbar_k1_cubic_matches_shifted_form(cfg30):
    r = rd.wbar_direct((1, 1, 1), 0, 1, cfg30)
    assert close(r.value, rhs(cf.rhs_thm11("cubic", 1), cfg30), 30)
    assert close(rd.wbar_reduced("cubic", 0, 1, cfg30), rhs(cf.rhs_thm11("cubic", 1), cfg30), 30)


def test_wbar_reduced_quadratic_p1_k1(cfg30):
    expected = rhs(cf.rhs_known("cor28_hh2") - cf.rhs_thm11("quadratic", 1), cfg30)
    assert close(rd.wbar_reduced("quadratic", 1, 1, cfg30), expected, 30)


@pytest.mark.parametrize("family", ["quadratic", "cubic"])
@pytest.mark.parametrize("p", [0, 1])
@pytest.mark.parametrize("k", range(1, 7))
def test_wbar_direct_vs_reduced(family, p, k, cfg30):
    d = rd.wbar_direct(rd.FAMILY_ORDERS[family], p, k, cfg30)
    assert close(d.value, rd.wbar_reduced(family, p, k, cfg30), 28)


def test_wbar_three_methods_agree():
    # sum (-1)^(n+1) H_n / (n (n+1)): accelerated, Euler-transformed, and a 10^6-term float sum
    cfg = PrecisionConfig(target_digits=20)
    crvz = rd.wbar_direct((1,), 1, 1, cfg).value
    euler = rd.wbar_direct((1,), 1, 1, cfg, method="euler").value
    assert close(crvz, euler, 15)
    h, s, prev = 0.0, [], 0.0
    for n in range(1, 1_000_001):
        h += 1.0 / n
        s.append((-1) ** (n + 1) * h / (n * (n + 1)))
    total = math.fsum(s)
    assert abs(float(crvz) - total) < 1e-11


def test_wbar_rejects():
    cfg = PrecisionConfig(target_digits=10)
    with pytest.raises(ValueError):
        rd.wbar_direct((1,), 2, 1, cfg)
    with pytest.raises(ValueError):
        rd.wbar_reduced("cubic", 0, 0, cfg)
    with pytest.raises(ValueError):
        rd.wbar_direct((), 0, 1, cfg)


def test_nonalt_binomial_check():
    cfg = PrecisionConfig(target_digits=30)
    lhs1, rhs1 = rd.nonalt_binomial_check(1, cfg)
    with workdps(45):
        assert close(rhs1, 2 * nm.zeta_int(4, cfg), 30)
    assert close(lhs1, rhs1, 10)
    assert mpmath.nstr(lhs1, 5) == "2.1646"
    lhs2, rhs2 = rd.nonalt_binomial_check(2, cfg)
    assert close(lhs2, rhs2, 10)


# -- power series against brute force --------------------------------------------


@pytest.mark.parametrize("m,k,x", [(1, 1, F(1, 2)), (2, 3, F(-1, 3)), (3, 2, F(1, 3)), (4, 4, F(-1, 2))])
def test_stirling_series_brute(m, k, x):
    cfg = PrecisionConfig(target_digits=25)

    def coeff(n):
        # x^(n+k) weight folded in by shifting: returns coefficient of x^n in the shifted series
        j = n - k
        if j < 1:
            return F(0)
        return F(exactcore.stirling1(j + 1, m + 1), (j + k) * math.factorial(j))

    # the spec kind carries the (-1)^m m! scale and the ln^(m+1)(1-x)/(m+1) term
    with workdps(40):
        ref = (-1) ** m * math.factorial(m) * brute_power_series(coeff, x, 220) + mpmath.log(
            1 - nm.to_mpf(x)
        ) ** (m + 1) / (m + 1)
    assert close(ev(rd.StirlingSeries(m, k, x), cfg).value, ref, 25)


@pytest.mark.parametrize("m,k,x", [(1, 2, F(1, 2)), (2, 1, F(-9, 10)), (3, 3, F(1, 3))])
def test_shifted_harmonic_series_brute(m, k, x):
    cfg = PrecisionConfig(target_digits=20)

    def coeff(n):
        j = n - k
        return F(0) if j < 1 else exactcore.harmonic(j, m) / n

    ref = brute_power_series(coeff, x, 900)
    assert close(ev(rd.ShiftedHarmonicSeries(m, k, x), cfg).value, ref, 20)


def test_shifted_harmonic_series_at_minus_one(cfg30):
    r = ev(rd.ShiftedHarmonicSeries(2, 3, F(-1)), cfg30)
    with workdps(50):
        ref = mpmath.nsum(lambda n: (-1) ** (n + 3) * _h(n, 2) / (n + 3), [1, mpmath.inf])
    assert close(r.value, ref, 25)


def _h(n, m):
    return mpmath.fsum(mpf(1) / mpf(j) ** m for j in range(1, int(n) + 1))


@pytest.mark.parametrize("p,m", [(1, 2), (2, 2), (1, 3)])
@pytest.mark.parametrize("x,y", [(F(1, 2), F(1, 2)), (F(-1, 2), F(1, 2)), (F(1, 3), F(-1, 2))])
def test_reflection_formula(p, m, x, y, cfg30):
    r = ev(rd.ReflectionPair(p, m, x, y), cfg30)
    assert close(r.value, rhs(cf.rhs_reflection(p, m, x, y), cfg30), 30)


@pytest.mark.parametrize("m", range(1, 6))
def test_bell_over_n_series(m, cfg30):
    r = ev(rd.AltOverN(rd.TermKind.bell(m), 1), cfg30)
    with workdps(60):
        ref = math.factorial(m) * mpmath.polylog(m + 1, mpf(1) / 2)
    assert close(r.value, ref, 30)


@pytest.mark.parametrize("m", range(1, 5))
def test_log_integral_quadrature(m):
    cfg = PrecisionConfig(target_digits=20)
    r = ev(rd.IntLn1mxOver1px(m), cfg)
    with workdps(40):
        ref = (-1) ** m * math.factorial(m) * mpmath.polylog(m + 1, mpf(1) / 2)
    assert close(r.value, ref, 10)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("z", [F(1, 2), F(1)])
def test_int_ln_1px_against_mpmath_quad(m, z):
    cfg = PrecisionConfig(target_digits=20)
    with workdps(40):
        zv = nm.to_mpf(z)
        ref = mpmath.quad(lambda x: mpmath.log(1 + x) ** m / x, [0, zv])
    assert close(ev(rd.IntLn1px(m, z), cfg).value, ref, 20)


def test_nested_eta(cfg30):
    r = ev(rd.NestedEta(3), cfg30)
    assert close(r.value, rhs(cf.rhs_known("nested_eta3"), cfg30), 30)


# -- exact kinds and the x^n ln(1-x) moment ---------------------------------------------


@pytest.mark.parametrize("n", [1, 4, 10])
@pytest.mark.parametrize("x", [F(-1), F(-1, 2), F(1, 2)])
def test_pow_ln1m_exact_truncation(n, x, cfg30):
    r = ev(rd.PowLn1mSeries(n, x, terms=2000), cfg30)
    closed = rhs(cf.rhs_partial_log_moment(n, x), cfg30)
    with workdps(60):
        # rigorous truncation bound plus rounding at working precision
        assert abs(r.value - closed) <= r.error_bound + mpf(10) ** -40
    quad = ev(rd.IntPowLn1m(n, x), cfg30).value
    assert close(quad, closed, 25)


def test_exact_kinds():
    cfg = PrecisionConfig(target_digits=10)
    assert ev(rd.StirlingFromHarmonic(6, 5), cfg).meta["exact"] == 15
    assert ev(rd.BellFromHarmonic(3, 2), cfg).meta["exact"] == F(45, 4)
    assert ev(rd.PartialFractionAt(1, 3), cfg).meta["exact"] == F(1, 4)
    assert ev(rd.Log1mCoefficient(2, 3), cfg).meta["exact"] == F(2 * 3, 6)


def test_spec_sum_adds_errors(cfg30):
    a = rd.AltOverN(T["H3"], 1)
    b = rd.AltOverN(T["H^(3)"], 1)
    s = ev(rd.SpecSum(((F(1), a), (F(-2), b))), cfg30)
    ra, rb = ev(a, cfg30), ev(b, cfg30)
    with workdps(45):
        assert close(s.value, ra.value - 2 * rb.value, 30)
        assert s.error_bound >= ra.error_bound
