"""Identity registry and verification engine.

Every record pairs a left-hand side (a :class:`~harmsums.reductions.SeriesSpec`
built from parameters) with a right-hand side (a
:class:`~harmsums.closedform.ConstExpr` built from the same parameters), plus
the parameter instances to check. :func:`verify` evaluates one instance and
:func:`verify_all` fans a selection out over worker processes.
"""

from __future__ import annotations

import fnmatch
import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Any, Callable

import mpmath
from mpmath import mpf, workdps

from . import closedform as cf
from . import exactcore, reductions as rd
from .numerics import ConvergenceFailure, PrecisionConfig

F = Fraction

CLASSES = ("fast", "alternating_slow", "algebraic_slow", "exact")
X_SAMPLES = (F(-9, 10), F(-1, 2), F(-1, 3), F(1, 3), F(1, 2), F(9, 10))


class UnknownIdentity(KeyError):
    pass


class ParamOutOfDomain(ValueError):
    pass


def grid(**axes) -> tuple[dict, ...]:
    """Cartesian product of named axes, in the order given."""
    names = list(axes)
    return tuple(dict(zip(names, combo)) for combo in itertools.product(*axes.values()))


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    description: str
    anchor: str
    lhs: Callable[..., rd.SeriesSpec]
    rhs: Callable[..., cf.ConstExpr]
    param_domain: tuple[dict, ...] = ({},)
    convergence_class: str = "alternating_slow"
    default_tolerance_digits: int = 30
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.param_domain:
            raise ValueError(f"{self.id}: empty parameter domain")
        if self.convergence_class not in CLASSES:
            raise ValueError(f"{self.id}: unknown class {self.convergence_class}")

    def domain_summary(self) -> dict[str, list]:
        out: dict[str, list] = {}
        for params in self.param_domain:
            for key, value in params.items():
                vals = out.setdefault(key, [])
                if value not in vals:
                    vals.append(value)
        return out

    def check_params(self, params: dict):
        summary = self.domain_summary()
        if set(params) != set(summary):
            raise ParamOutOfDomain(
                f"{self.id} takes parameters {sorted(summary)}, got {sorted(params)}"
            )
        for key, value in params.items():
            if value not in summary[key]:
                raise ParamOutOfDomain(f"{self.id}: {key}={value} outside {summary[key]}")


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

T = rd.NAMED_TERMS
K6 = tuple(range(1, 7))


def _thm12_record(family: str, p: int) -> IdentityRecord:
    orders = rd.FAMILY_ORDERS[family]
    head = "1,2" if family == "quadratic" else "{1}_3"
    return IdentityRecord(
        id=f"thm1.2-{family}-p{p}",
        description=f"Binomial-weighted alternating {family} sum with n^{p}, reduced by partial fractions",
        anchor=f"W_k({head};{p}) = sum (-1)^(r+1) {'r ' if p == 0 else ''}C(k,r) ...",
        lhs=lambda k: rd.WbarAlt(orders, p, k),
        rhs=lambda k: cf.rhs_thm12(family, p, k),
        param_domain=grid(k=K6),
    )


def _build_registry() -> list[IdentityRecord]:
    recs = [
        IdentityRecord(
            "thm1.1-quadratic",
            "Shifted alternating sum of H_n H_n^(2)/(n+k)",
            "-5/16 zeta(4) - 1/4 zeta(2) ln^2 2 + 7/8 zeta(3) ln 2 + ...",
            lambda k: rd.AltShifted(T["HH2"], k),
            lambda k: cf.rhs_thm11("quadratic", k),
            grid(k=K6),
        ),
        IdentityRecord(
            "thm1.1-cubic",
            "Shifted alternating sum of H_n^3/(n+k)",
            "-5/16 zeta(4) + 9/8 zeta(3) ln 2 - 3/4 zeta(2) ln^2 2 + 1/4 ln^4 2 + ...",
            lambda k: rd.AltShifted(T["H3"], k),
            lambda k: cf.rhs_thm11("cubic", k),
            grid(k=K6),
        ),
        _thm12_record("quadratic", 0),
        _thm12_record("quadratic", 1),
        _thm12_record("cubic", 0),
        _thm12_record("cubic", 1),
        IdentityRecord(
            "eq1.13",
            "Partial fractions of the reciprocal binomial coefficient",
            "1/C(n+k,k) = sum (-1)^(r+1) r C(k,r)/(n+r)",
            lambda n, k: rd.PartialFractionAt(n, k),
            lambda n, k: cf.ConstExpr.const(F(1, comb(n + k, k))),
            grid(n=(0, 1, 2, 7, 50, 1000), k=tuple(range(1, 13))),
            "exact",
        ),
        IdentityRecord(
            "eq3.1",
            "Stirling-number power series against finite polylog-star sums",
            "(-1)^m m! sum s(n+1,m+1)/((n+k) n!) x^(n+k) + 1/(m+1) ln^(m+1)(1-x)",
            lambda m, k, x: rd.StirlingSeries(m, k, x),
            cf.rhs_stirling_series,
            grid(m=(1, 2, 3, 4), k=(1, 2, 3, 4), x=(F(-1),) + X_SAMPLES),
            "fast",
        ),
        IdentityRecord(
            "eq3.2",
            "Power-series coefficients of ln^k(1-x) against Stirling numbers",
            "ln^k(1-x) = (-1)^k k! sum s(n,k)/n! x^n",
            lambda k, n: rd.Log1mCoefficient(k, n),
            lambda k, n: cf.ConstExpr.const(
                F((-1) ** k * factorial(k) * exactcore.stirling1(n, k), factorial(n))
            ),
            grid(k=(0, 1, 2, 3, 4), n=tuple(range(0, 21))),
            "exact",
        ),
        IdentityRecord(
            "stirling-closed",
            "Harmonic-number expressions for s(n,1..5) against the recurrence",
            "s(n,1) = (n-1)!, s(n,2) = (n-1)! H_(n-1), ...",
            lambda n, k: rd.StirlingFromHarmonic(n, k),
            lambda n, k: cf.ConstExpr.const(exactcore.stirling1(n, k)),
            grid(n=tuple(range(1, 31)), k=(1, 2, 3, 4, 5)),
            "exact",
        ),
        IdentityRecord(
            "eq3.3",
            "Shifted power series of H_n^(m) against polylogs and finite sums",
            "sum H_n^(m)/(n+k) x^(n+k) = sum H_n^(m)/n x^n - Li_(m+1)(x) - ...",
            lambda m, k, x: rd.ShiftedHarmonicSeries(m, k, x),
            cf.rhs_shifted_harmonic_series,
            grid(m=(1, 2, 3, 4), k=(1, 2, 3, 4), x=(F(-1),) + X_SAMPLES),
            "fast",
        ),
        IdentityRecord(
            "eq3.5",
            "Log-moment integrals against complete Bell polynomials",
            "int_0^1 t^(n-1) ln^k(1-t) dt = (-1)^k Y_k(n)/n",
            lambda n, k: rd.IntBeta(n, k),
            cf.rhs_log_moment,
            grid(n=(1, 2, 3, 4, 5, 6), k=(0, 1, 2, 3, 4)),
            "fast",
        ),
        IdentityRecord(
            "bell-closed",
            "Explicit expansions of Y_1..Y_4 against the Bell recurrence",
            "Y_1(n) = H_n, Y_2(n) = H_n^2 + H_n^(2), ...",
            lambda k, n: rd.BellFromHarmonic(k, n),
            lambda k, n: cf.ConstExpr.const(exactcore.bell_Y(k, n)),
            grid(k=(1, 2, 3, 4), n=tuple(range(0, 31))),
            "exact",
        ),
        IdentityRecord(
            "eq3.7",
            "Power series of H_n H_n^(m)",
            "1/(1-x) { sum H_n/n^m x^n - sum 1/n^m (sum x^k/k) - zeta(m) ln(1-x) }",
            lambda m, x: rd.HarmonicProductSeries(m, x),
            cf.rhs_harmonic_product_series,
            grid(m=(2, 3, 4), x=X_SAMPLES),
            "fast",
        ),
        IdentityRecord(
            "eq3.8",
            "Power series of H_n H_n^(2) through Li_2, Li_3",
            "1/(1-x) { 2Li_3(x) - ln(1-x)Li_2(x) - sum H_n/n^2 x^n }",
            lambda x: rd.HarmonicProductSeries(2, x),
            cf.rhs_hh2_series,
            grid(x=X_SAMPLES),
            "fast",
        ),
        IdentityRecord(
            "eq3.9",
            "Reflection formula for depth-two nested sums",
            "sum y^n/n^m sum x^k/k^p + mirror = Li_p(x)Li_m(y) + Li_(p+m)(xy)",
            lambda p, m, x, y: rd.ReflectionPair(p, m, x, y),
            cf.rhs_reflection,
            tuple(
                dict(p=p, m=m, x=x, y=y)
                for p, m in ((1, 2), (2, 2), (1, 3))
                for x, y in ((F(1, 2), F(1, 2)), (F(-1, 2), F(1, 2)), (F(1, 3), F(-1, 2)))
            ),
            "fast",
        ),
        IdentityRecord(
            "eq3.10",
            "Reflection at p=1, m=2, y=1",
            "= -ln(1-x) zeta(2) + Li_3(x)",
            lambda x: rd.SpecSum(
                ((1, rd.NestedLogSeries(2, x)), (1, rd.PowerSeriesAt(T["H^(2)"], x, p=1)))
            ),
            cf.rhs_reflection_y1,
            grid(x=(F(-1),) + X_SAMPLES),
            "fast",
        ),
        IdentityRecord(
            "eq3.11",
            "Power series of H_n^(2)/n",
            "= 3Li_3(x) - ln(1-x)Li_2(x) - 2 sum H_n/n^2 x^n",
            lambda x: rd.PowerSeriesAt(rd.TermKind.product((2, 1)), x, p=1),
            cf.rhs_h2_over_n_series,
            grid(x=(F(-1),) + X_SAMPLES),
            "fast",
        ),
        IdentityRecord(
            "eq3.12",
            "Nested sum of x^k/k under 1/n^2",
            "= 2 sum H_n/n^2 x^n + ln(1-x)Li_2(x) - 2Li_3(x) - ln(1-x) zeta(2)",
            lambda x: rd.NestedLogSeries(2, x),
            cf.rhs_nested_log_series,
            grid(x=(F(-1),) + X_SAMPLES),
            "fast",
        ),
        IdentityRecord(
            "eq3.13",
            "Integral of ln^m(1+x)/x over [0,z]",
            "1/(m+1) ln^(m+1)(1+z) + m!(zeta(m+1) - Li_(m+1)(1/(1+z))) - ...",
            lambda m, z: rd.IntLn1px(m, z),
            cf.rhs_int_ln_1px,
            grid(m=(1, 2, 3, 4), z=(F(1, 2), F(1))),
            "fast",
        ),
        IdentityRecord(
            "thm2.6-m3",
            "Integral of ln^3(1+x)/x over [0,1]",
            "6 zeta(4) + 3/2 zeta(2) ln^2 2 - 1/4 ln^4 2 - 21/4 zeta(3) ln 2 - 6 Li_4(1/2)",
            lambda: rd.IntLn1px(3, F(1)),
            lambda: cf.rhs_known("int_ln3_1px"),
            ({},),
            "fast",
        ),
        IdentityRecord(
            "thm2.6-m4",
            "Integral of ln^4(1+x)/x over [0,1]",
            "-24 Li_5(1/2) - 24 ln 2 Li_4(1/2) - 4/5 ln^5 2 - 21/2 zeta(3) ln^2 2 + 24 zeta(5) + 4 zeta(2) ln^3 2",
            lambda: rd.IntLn1px(4, F(1)),
            lambda: cf.rhs_known("int_ln4_1px"),
            ({},),
            "fast",
        ),
        IdentityRecord(
            "eq3.17",
            "Alternating sum of Y_m(n)/n",
            "sum Y_m(n)/n (-1)^(n-1) = m! Li_(m+1)(1/2)",
            lambda m: rd.AltOverN(rd.TermKind.bell(m), 1),
            lambda m: cf.rhs_known("thm27", m=m),
            grid(m=(1, 2, 3, 4, 5)),
        ),
        IdentityRecord(
            "eq3.18",
            "Integral of ln^m(1-x)/(1+x) over [0,1]",
            "= (-1)^m m! Li_(m+1)(1/2)",
            lambda m: rd.IntLn1mxOver1px(m),
            lambda m: cf.rhs_known("int_ln1mx_over_1px", m=m),
            grid(m=(1, 2, 3, 4)),
            "fast",
        ),
        IdentityRecord(
            "eq3.20",
            "Alternating sum of H_n^3/n",
            "5/8 zeta(4) + 3/4 zeta(2) ln^2 2 - 1/4 ln^4 2 - 9/8 zeta(3) ln 2",
            lambda: rd.AltOverN(T["H3"], 1),
            lambda: cf.rhs_known("cor28_h3"),
        ),
        IdentityRecord(
            "eq3.21",
            "Alternating sum of H_n H_n^(2)/n",
            "2 Li_4(1/2) + 1/12 ln^4 2 + 7/8 zeta(3) ln 2 - 1/4 zeta(2) ln^2 2 - zeta(4)",
            lambda: rd.AltOverN(T["HH2"], 1),
            lambda: cf.rhs_known("cor28_hh2"),
        ),
        IdentityRecord(
            "eq3.22",
            "Alternating sum of (H^3 - 3HH^(2) + 2H^(3))/n",
            "= int_0^1 ln^3(1+x)/x dx - 1/4 ln^4 2",
            lambda: rd.AltOverN(T["Y3combo"], 1),
            lambda: cf.rhs_known("y3combo_over_n"),
        ),
        IdentityRecord(
            "eq3.23",
            "Alternating sum of (H^3 + 3HH^(2) + 2H^(3))/n",
            "= 6 Li_4(1/2)",
            lambda: rd.AltOverN(T["Y3"], 1),
            lambda: cf.rhs_known("y3_over_n"),
        ),
        IdentityRecord(
            "eq3.24",
            "Nested alternating harmonic sum under 1/n^3",
            "7/4 zeta(3) ln 2 - 5/16 zeta(4)",
            lambda: rd.NestedEta(3),
            lambda: cf.rhs_known("nested_eta3"),
        ),
        IdentityRecord(
            "eq3.25",
            "Alternating sum of H_n^(3)/n",
            "19/16 zeta(4) - 3/4 zeta(3) ln 2",
            lambda: rd.AltOverN(T["H^(3)"], 1),
            lambda: cf.rhs_known("h3order_over_n"),
        ),
        IdentityRecord(
            "eq3.26",
            "Shifted alternating sum of (H^3 - 3HH^(2) + 2H^(3))/(n+k)",
            "1/4 ln^4 2 - 6 zeta*_(k-1)({1}_3, -1) + ...",
            lambda k: rd.AltShifted(T["Y3combo"], k),
            lambda k: cf.rhs_cor29("y3combo", k),
            grid(k=K6),
        ),
        IdentityRecord(
            "eq3.27",
            "Shifted alternating sum of H_n^(3)/(n+k)",
            "-5/16 zeta(4) + 3/4 zeta(3) ln 2 + ...",
            lambda k: rd.AltShifted(T["H^(3)"], k),
            lambda k: cf.rhs_cor29("h3order", k),
            grid(k=K6),
        ),
        IdentityRecord(
            "eq4.2",
            "Truncated log moment over [0,x]",
            "1/n { x^n ln(1-x) - sum x^j/j - ln(1-x) }",
            lambda n, x: rd.IntPowLn1m(n, x),
            cf.rhs_partial_log_moment,
            grid(n=tuple(range(1, 11)), x=(F(-1), F(-1, 2), F(1, 2))),
            "fast",
        ),
        IdentityRecord(
            "eq4.4",
            "Double sum of shifted alternating H_n/(n^2 (n+i))",
            "-5/8 zeta(3) zeta*_(k-1)(-1) + ... (last ln^2 2 term taken with zeta*_(k-1)(2))",
            lambda k: rd.ShiftedHOverSquares(k),
            lambda k: cf.rhs_known("shifted_h_n2", k=k),
            grid(k=K6),
            meta={"corrected": "the ln^2 2 term carries zeta*_(k-1)(2), not zeta*_(k-1)(-2)"},
        ),
        IdentityRecord(
            "alt-h-n3",
            "Alternating sum of H_n/n^3",
            "-2 Li_4(1/2) + 11/4 zeta(4) + 1/2 zeta(2) ln^2 2 - 1/12 ln^4 2 - 7/4 zeta(3) ln 2",
            lambda: rd.AltOverN(T["H"], 3),
            lambda: cf.rhs_known("alt_h_n3"),
        ),
        IdentityRecord(
            "cor3.1-cubic",
            "Shifted cubic sum at k=2, literal closed form",
            "... - 15/8 zeta(3) - zeta(2) + 1",
            lambda: rd.AltShifted(T["H3"], 2),
            lambda: cf.rhs_known("k2_cubic"),
        ),
        IdentityRecord(
            "cor3.1-quadratic",
            "Shifted quadratic sum at k=2, literal closed form",
            "... - 9/8 zeta(3) + zeta(2) ln 2 + 2 ln 2 - ln^2 2 - 1",
            lambda: rd.AltShifted(T["HH2"], 2),
            lambda: cf.rhs_known("k2_quadratic"),
        ),
        IdentityRecord(
            "intro-w7",
            "Non-alternating sum of H_n^3/n^4",
            "231/16 zeta(7) - 51/4 zeta(3)zeta(4) + 2 zeta(2)zeta(5)",
            lambda: rd.NonAlt(T["H3"], 4),
            lambda: cf.rhs_known("intro_w7"),
            ({},),
            "algebraic_slow",
            10,
            {"external-source": True},
        ),
        IdentityRecord(
            "intro-w9a",
            "Non-alternating sum of (H_n^(2))^2/n^5",
            "-1069/36 zeta(9) + 4/3 zeta^3(3) + 7 zeta(2)zeta(7) - 4/3 zeta(3)zeta(6) + 33/2 zeta(4)zeta(5)",
            lambda: rd.NonAlt(rd.TermKind.product((2, 2)), 5),
            lambda: cf.rhs_known("intro_w9a"),
            ({},),
            "algebraic_slow",
            10,
            {"external-source": True},
        ),
        IdentityRecord(
            "intro-w9b",
            "Non-alternating sum of (H_n^(2))^2 H_n^(3)/n^2",
            "-617/72 zeta(9) + zeta^3(3) + 91/8 zeta(2)zeta(7) - 17/4 zeta(4)zeta(5) - 329/84 zeta(3)zeta(6)",
            lambda: rd.NonAlt(rd.TermKind.product((2, 2), (3, 1)), 2),
            lambda: cf.rhs_known("intro_w9b"),
            ({},),
            "algebraic_slow",
            10,
            {"external-source": True},
        ),
        IdentityRecord(
            "intro-binom",
            "Non-alternating sum of H_n H_n^(2)/(n C(n+k,k))",
            "2 zeta(4) + 2 zeta(3) H_(r-1) + 1/2 zeta(2) H_(r-1)^2 + ...",
            lambda k: rd.NonAlt(T["HH2"], 1, k),
            cf.rhs_binomial_nonalt,
            grid(k=(1, 2, 3, 4)),
            "algebraic_slow",
            10,
            {"external-source": True},
        ),
    ]
    return recs


_REGISTRY: list[IdentityRecord] = _build_registry()
_BY_ID = {r.id: r for r in _REGISTRY}
if len(_BY_ID) != len(_REGISTRY):
    raise RuntimeError("duplicate identity ids")


def registry() -> list[IdentityRecord]:
    return list(_REGISTRY)


def get(identity: str) -> IdentityRecord:
    try:
        return _BY_ID[identity]
    except KeyError:
        raise UnknownIdentity(identity) from None


def select(filter: str | None = None) -> list[IdentityRecord]:
    """Records matching an id glob, ``class=<name>``, or all for an empty filter."""
    if not filter:
        return registry()
    if filter.startswith("class="):
        cls = filter.split("=", 1)[1]
        return [r for r in _REGISTRY if r.convergence_class == cls]
    return [r for r in _REGISTRY if fnmatch.fnmatchcase(r.id, filter)]


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _param_text(v) -> Any:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return v


@dataclass
class VerificationResult:
    identity: str
    params: dict
    lhs_value: mpf | None
    rhs_value: mpf | None
    abs_diff: mpf | None
    lhs_error_estimate: mpf | None
    tolerance_digits: int
    passed: bool
    method: str
    wall_time: float = 0.0
    reason: str = ""

    def params_json(self) -> dict:
        return {k: _param_text(v) for k, v in self.params.items()}

    def to_json(self, digits: int) -> dict:
        def num(v, d):
            return None if v is None else mpmath.nstr(v, d, min_fixed=-4, max_fixed=4)

        return {
            "id": self.identity,
            "params": self.params_json(),
            "lhs": num(self.lhs_value, digits),
            "rhs": num(self.rhs_value, digits),
            "abs_diff": num(self.abs_diff, 3),
            "error_estimate": num(self.lhs_error_estimate, 3),
            "tolerance_digits": self.tolerance_digits,
            "pass": self.passed,
            "method": self.method,
            "reason": self.reason,
            "timing": {"millis": round(self.wall_time * 1000, 3)},
        }


def effective_tolerance(record: IdentityRecord, cfg: PrecisionConfig, requested: int | None) -> int:
    tol = min(record.default_tolerance_digits, cfg.target_digits)
    if requested is not None:
        tol = min(tol, requested)
    return tol


def verify(
    identity: str,
    params: dict | None = None,
    cfg: PrecisionConfig | None = None,
    tolerance: int | None = None,
) -> VerificationResult:
    """Evaluate one instance of a record; convergence problems become failed results."""
    record = get(identity)
    params = dict(params or {})
    record.check_params(params)
    cfg = cfg or PrecisionConfig()
    tol = effective_tolerance(record, cfg, tolerance)
    started = time.perf_counter()
    with workdps(cfg.working_digits):
        try:
            spec = record.lhs(**params)
            expr = record.rhs(**params)
            lhs = rd.eval_series(spec, cfg)
            if record.convergence_class == "exact":
                exact_l = lhs.meta["exact"]
                exact_r = expr.rational_value()
                diff_q = abs(exact_l - exact_r)
                rhs_v = cf.eval_expr(expr, cfg)
                passed = diff_q == 0
                abs_diff = mpf(diff_q.numerator) / diff_q.denominator
            else:
                rhs_v = cf.eval_expr(expr, cfg)
                abs_diff = abs(lhs.value - rhs_v)
                bound = mpf(10) ** -tol
                passed = abs_diff < bound and lhs.error_bound < bound
            reason = "" if passed else "difference or error estimate above tolerance"
            return VerificationResult(
                identity, params, lhs.value, rhs_v, abs_diff, lhs.error_bound, tol,
                passed, lhs.method, time.perf_counter() - started, reason,
            )
        except (ConvergenceFailure, ValueError, ZeroDivisionError) as exc:
            return VerificationResult(
                identity, params, None, None, None, None, tol, False,
                "", time.perf_counter() - started, f"{type(exc).__name__}: {exc}",
            )


def _sort_key(record: IdentityRecord):
    return record.id


def instances(filter: str | None = None) -> list[tuple[str, dict]]:
    """``(id, params)`` pairs for a selection, ordered by id then domain order."""
    out = []
    for record in sorted(select(filter), key=_sort_key):
        for params in record.param_domain:
            out.append((record.id, params))
    return out


def _verify_job(job):
    identity, params, cfg, tolerance = job
    return verify(identity, params, cfg, tolerance)


def verify_all(
    filter: str | None = None,
    cfg: PrecisionConfig | None = None,
    workers: int | None = None,
    tolerance: int | None = None,
) -> list[VerificationResult]:
    """Verify every matching instance; output order does not depend on ``workers``."""
    cfg = cfg or PrecisionConfig()
    jobs = [(i, p, cfg, tolerance) for i, p in instances(filter)]
    workers = workers or os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        return [_verify_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_verify_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
