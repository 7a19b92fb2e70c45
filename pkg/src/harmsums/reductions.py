"""Numeric evaluation of the left-hand sides.

Each left-hand side is described by a :class:`SeriesSpec` subclass that
carries its own sign convention, e.g. :class:`AltShifted` is
``sum_{n>=1} f(n)/(n+k) (-1)^(n+k)`` and :class:`AltOverN` is
``sum_{n>=1} f(n)/n^p (-1)^(n-1)``. Specs round-trip through JSON with a
``kind`` tag; :func:`eval_series` dispatches on the class.

Term oracles advance harmonic numbers incrementally along ``n``; the
accelerator and the direct summers call them once per index in order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Any, Callable, ClassVar

import mpmath
from mpmath import mpf, workdps

from . import closedform, exactcore, numerics
from .numerics import ConvergenceFailure, PrecisionConfig, ValueWithError

F = Fraction


# ---------------------------------------------------------------------------
# Harmonic-number numerators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TermKind:
    """A polynomial in harmonic numbers, optionally times a Bell value ``Y_k(n)``.

    ``monomials`` is a tuple of ``(coeff, ((m, e), ...))`` pairs standing for
    ``coeff * prod (H_n^(m))^e``. The common single-product case is built with
    :meth:`product`.
    """

    monomials: tuple = ((F(1), ()),)
    bell_k: int | None = None

    def __post_init__(self):
        norm = []
        for coeff, factors in self.monomials:
            factors = tuple((int(m), int(e)) for m, e in factors)
            if any(m < 1 or e < 1 for m, e in factors):
                raise ValueError(f"orders and exponents must be positive: {factors}")
            norm.append((F(coeff), factors))
        object.__setattr__(self, "monomials", tuple(norm))
        if self.bell_k is not None and self.bell_k < 0:
            raise ValueError("bell_k must be nonnegative")

    @classmethod
    def product(cls, *factors: tuple[int, int], bell_k: int | None = None) -> "TermKind":
        return cls(((F(1), tuple(factors)),), bell_k)

    @classmethod
    def bell(cls, k: int) -> "TermKind":
        return cls(((F(1), ()),), k)

    def orders(self) -> set[int]:
        out = {m for _, fs in self.monomials for m, _ in fs}
        if self.bell_k:
            out.update(range(1, self.bell_k + 1))
        return out

    def log_power(self) -> int:
        """Largest total power of ``H_n`` (order 1) in any monomial; drives tail models."""
        best = 0
        for _, fs in self.monomials:
            best = max(best, sum(e for m, e in fs if m == 1))
        return best + (self.bell_k or 0)

    def exact(self, n: int) -> Fraction:
        total = F(0)
        for coeff, fs in self.monomials:
            v = coeff
            for m, e in fs:
                v *= exactcore.harmonic(n, m) ** e
            total += v
        if self.bell_k is not None:
            total *= exactcore.bell_Y(self.bell_k, n)
        return total

    def to_json(self) -> Any:
        if self.bell_k is not None and self.monomials == ((F(1), ()),):
            return {"bell": self.bell_k}
        if len(self.monomials) == 1 and self.monomials[0][0] == 1 and self.bell_k is None:
            return [list(p) for p in self.monomials[0][1]]
        out: dict[str, Any] = {
            "poly": [[str(c), [list(p) for p in fs]] for c, fs in self.monomials]
        }
        if self.bell_k is not None:
            out["bell"] = self.bell_k
        return out

    @classmethod
    def from_json(cls, data: Any) -> "TermKind":
        if isinstance(data, str):
            try:
                return NAMED_TERMS[data]
            except KeyError:
                raise ValueError(f"unknown term name {data!r}") from None
        if isinstance(data, list):
            return cls.product(*(tuple(p) for p in data))
        if isinstance(data, dict):
            bell = data.get("bell")
            if "poly" in data:
                monos = tuple((F(c), tuple(tuple(p) for p in fs)) for c, fs in data["poly"])
                return cls(monos, bell)
            if "factors" in data:
                return cls.product(*(tuple(p) for p in data["factors"]), bell_k=bell)
            if bell is not None:
                return cls.bell(int(bell))
        raise ValueError(f"cannot read term {data!r}")


NAMED_TERMS = {
    "1": TermKind(),
    "H": TermKind.product((1, 1)),
    "H3": TermKind.product((1, 3)),
    "HH2": TermKind.product((1, 1), (2, 1)),
    "H^(2)": TermKind.product((2, 1)),
    "H^(3)": TermKind.product((3, 1)),
    "Y3combo": TermKind(
        ((F(1), ((1, 3),)), (F(-3), ((1, 1), (2, 1))), (F(2), ((3, 1),)))
    ),
    "Y3": TermKind.bell(3),
}


class _HarmonicStream:
    """Advances ``H_n^(m)`` for a fixed set of orders, one ``n`` at a time."""

    def __init__(self, orders):
        self.orders = sorted(set(orders))
        self.values = {m: mpf(0) for m in self.orders}
        self.n = 0

    def advance(self, n: int):
        if n != self.n + 1:
            raise RuntimeError("harmonic stream must advance by one")
        self.n = n
        nn = mpf(n)
        for m in self.orders:
            self.values[m] += 1 / nn**m


def term_oracle(term: TermKind) -> Callable[[int], mpf]:
    """Stateful ``n -> f(n)`` that must be called for ``n = 1, 2, ...`` in order."""
    stream = _HarmonicStream(term.orders())

    def f(n: int) -> mpf:
        stream.advance(n)
        H = stream.values
        total = mpf(0)
        for coeff, fs in term.monomials:
            v = numerics.to_mpf(coeff)
            for m, e in fs:
                v *= H[m] ** e
            total += v
        if term.bell_k is not None:
            xs = [factorial(m - 1) * H[m] for m in range(1, term.bell_k + 1)]
            ys = [mpf(1)]
            for j in range(term.bell_k):
                ys.append(sum(comb(j, i) * ys[j - i] * xs[i] for i in range(j + 1)))
            total *= ys[term.bell_k]
        return total

    return f


# ---------------------------------------------------------------------------
# Series specs
# ---------------------------------------------------------------------------

SPEC_KINDS: dict[str, type] = {}


def _register(cls):
    SPEC_KINDS[cls.kind] = cls
    return cls


def _q(v) -> Fraction:
    if isinstance(v, float):
        raise ValueError("rational parameters must be given as integers or 'p/q' strings")
    return F(v)


def _q_text(v: Fraction) -> str | int:
    return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class SeriesSpec:
    kind: ClassVar[str] = ""

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, TermKind):
                v = v.to_json()
            elif isinstance(v, Fraction):
                v = _q_text(v)
            elif isinstance(v, tuple):
                v = [_q_text(x) if isinstance(x, Fraction) else x for x in v]
            out[f.name] = v
        return out

    @staticmethod
    def from_json(data: dict) -> "SeriesSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise ValueError("series spec needs a 'kind' field")
        try:
            cls = SPEC_KINDS[data["kind"]]
        except KeyError:
            raise ValueError(f"unknown series kind {data['kind']!r}") from None
        if cls is SpecSum:
            extra = set(data) - {"kind", "parts"}
            if extra:
                raise ValueError(f"unexpected fields for SpecSum: {sorted(extra)}")
            return SpecSum(SpecSum.parse_parts(data.get("parts", [])))
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name not in data:
                if f.default is dataclasses.MISSING:
                    raise ValueError(f"{cls.kind} needs field {f.name!r}")
                continue
            v = data[f.name]
            if f.type in ("TermKind",):
                v = TermKind.from_json(v)
            elif f.type in ("Fraction",):
                v = _q(v)
            elif f.type.startswith("tuple"):
                v = tuple(_q(x) if "Fraction" in f.type else int(x) for x in v)
            elif f.type == "int":
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ValueError(f"{f.name} must be an integer")
            kwargs[f.name] = v
        extra = set(data) - {"kind"} - {f.name for f in dataclasses.fields(cls)}
        if extra:
            raise ValueError(f"unexpected fields for {cls.kind}: {sorted(extra)}")
        return cls(**kwargs)


def _need(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


@_register
@dataclass(frozen=True)
class AltShifted(SeriesSpec):
    """``sum_{n>=1} f(n)/(n+k) (-1)^(n+k)``."""

    kind: ClassVar[str] = "AltShifted"
    term: TermKind
    k: int

    def __post_init__(self):
        _need(self.k >= 0, "k must be nonnegative")


@_register
@dataclass(frozen=True)
class AltOverN(SeriesSpec):
    """``sum_{n>=1} f(n)/n^p (-1)^(n-1)``."""

    kind: ClassVar[str] = "AltOverN"
    term: TermKind
    p: int = 1

    def __post_init__(self):
        _need(self.p >= 0, "p must be nonnegative")


@_register
@dataclass(frozen=True)
class WbarAlt(SeriesSpec):
    """``sum_{n>=1} prod H_n^(m_i) / (n^p C(n+k,k)) (-1)^(n+1)``."""

    kind: ClassVar[str] = "WbarAlt"
    orders: tuple[int, ...]
    p: int
    k: int

    def __post_init__(self):
        _need(len(self.orders) > 0, "orders must be nonempty")
        _need(self.p in (0, 1), "p must be 0 or 1")
        _need(self.k >= 1, "k must be positive")


@_register
@dataclass(frozen=True)
class PowerSeriesAt(SeriesSpec):
    """``sum_{n>=1} f(n) x^(n+shift) / (n+shift)^p`` for rational ``-1 <= x < 1``."""

    kind: ClassVar[str] = "PowerSeriesAt"
    term: TermKind
    x: Fraction
    p: int = 0
    shift: int = 0

    def __post_init__(self):
        _need(-1 <= self.x < 1, "x must lie in [-1, 1)")
        _need(self.p >= 0 and self.shift >= 0, "p and shift must be nonnegative")
        _need(self.x != -1 or self.p + self.shift > 0 or self.term == TermKind(),
              "series at x = -1 needs a decaying denominator")


@_register
@dataclass(frozen=True)
class StirlingSeries(SeriesSpec):
    """``(-1)^m m! sum_{n>=m} s(n+1,m+1)/((n+k) n!) x^(n+k) + ln^(m+1)(1-x)/(m+1)``."""

    kind: ClassVar[str] = "StirlingSeries"
    m: int
    k: int
    x: Fraction

    def __post_init__(self):
        _need(self.m >= 1 and self.k >= 1, "m and k must be positive")
        _need(-1 <= self.x < 1 and self.x != 0, "x must lie in [-1, 1) and be nonzero")


@_register
@dataclass(frozen=True)
class ShiftedHarmonicSeries(SeriesSpec):
    """``sum_{n>=1} H_n^(m)/(n+k) x^(n+k)``."""

    kind: ClassVar[str] = "ShiftedHarmonicSeries"
    m: int
    k: int
    x: Fraction

    def __post_init__(self):
        _need(self.m >= 1 and self.k >= 1, "m and k must be positive")
        _need(-1 <= self.x < 1 and self.x != 0, "x must lie in [-1, 1) and be nonzero")


@_register
@dataclass(frozen=True)
class HarmonicProductSeries(SeriesSpec):
    """``sum_{n>=1} H_n H_n^(m) x^n`` for ``-1 < x < 1``."""

    kind: ClassVar[str] = "HarmonicProductSeries"
    m: int
    x: Fraction

    def __post_init__(self):
        _need(self.m >= 1, "m must be positive")
        _need(-1 < self.x < 1, "x must lie in (-1, 1)")


@_register
@dataclass(frozen=True)
class ReflectionPair(SeriesSpec):
    """Sum of the two nested series ``sum y^n/n^m sum_{k<=n} x^k/k^p`` and its mirror."""

    kind: ClassVar[str] = "ReflectionPair"
    p: int
    m: int
    x: Fraction
    y: Fraction

    def __post_init__(self):
        _need(self.p >= 1 and self.m >= 1, "p and m must be positive")
        _need(-1 <= self.x <= 1 and -1 <= self.y <= 1, "weights must lie in [-1, 1]")


@_register
@dataclass(frozen=True)
class NestedLogSeries(SeriesSpec):
    """``sum_{n>=1} 1/n^m sum_{k<=n} x^k/k``; with ``x = -1`` this is an alternating tail sum."""

    kind: ClassVar[str] = "NestedLogSeries"
    m: int
    x: Fraction

    def __post_init__(self):
        _need(self.m >= 2, "m must be at least 2")
        _need(-1 <= self.x < 1, "x must lie in [-1, 1)")


@_register
@dataclass(frozen=True)
class IntLn1px(SeriesSpec):
    """``int_0^z ln^m(1+x)/x dx``."""

    kind: ClassVar[str] = "IntLn1px"
    m: int
    z: Fraction

    def __post_init__(self):
        _need(self.m >= 1, "m must be positive")
        _need(0 <= self.z <= 1, "z must lie in [0, 1]")


@_register
@dataclass(frozen=True)
class IntBeta(SeriesSpec):
    """``int_0^1 t^(n-1) ln^k(1-t) dt``."""

    kind: ClassVar[str] = "IntBeta"
    n: int
    kpow: int

    def __post_init__(self):
        _need(self.n >= 1 and self.kpow >= 0, "need n >= 1 and kpow >= 0")


@_register
@dataclass(frozen=True)
class IntLn1mxOver1px(SeriesSpec):
    """``int_0^1 ln^m(1-x)/(1+x) dx``."""

    kind: ClassVar[str] = "IntLn1mxOver1px"
    m: int

    def __post_init__(self):
        _need(self.m >= 1, "m must be positive")


@_register
@dataclass(frozen=True)
class IntPowLn1m(SeriesSpec):
    """``int_0^x t^(n-1) ln(1-t) dt`` for ``-1 <= x < 1``."""

    kind: ClassVar[str] = "IntPowLn1m"
    n: int
    x: Fraction

    def __post_init__(self):
        _need(self.n >= 1, "n must be positive")
        _need(-1 <= self.x < 1, "x must lie in [-1, 1)")


@_register
@dataclass(frozen=True)
class PowLn1mSeries(SeriesSpec):
    """Series form of ``int_0^x t^(n-1) ln(1-t) dt``: ``-sum_{j>=1} x^(n+j)/(j (n+j))``.

    Evaluated with exact rational partial sums; the error bound is a rigorous
    tail bound. ``x = -1`` is handled by pairing terms (alternating, monotone).
    """

    kind: ClassVar[str] = "PowLn1mSeries"
    n: int
    x: Fraction
    terms: int = 10_000

    def __post_init__(self):
        _need(self.n >= 1 and self.terms >= 1, "need n >= 1 and terms >= 1")
        _need(-1 <= self.x < 1, "x must lie in [-1, 1)")


@_register
@dataclass(frozen=True)
class NestedEta(SeriesSpec):
    """``sum_{n>=1} 1/n^p sum_{k<=n} (-1)^(k-1)/k``."""

    kind: ClassVar[str] = "NestedEta"
    p: int

    def __post_init__(self):
        _need(self.p >= 2, "p must be at least 2")


@_register
@dataclass(frozen=True)
class ShiftedHOverSquares(SeriesSpec):
    """``sum_{i=1}^{k-1} sum_{n>=1} H_n/(n^2 (n+i)) (-1)^(n+i)``."""

    kind: ClassVar[str] = "ShiftedHOverSquares"
    k: int

    def __post_init__(self):
        _need(self.k >= 1, "k must be positive")


@_register
@dataclass(frozen=True)
class NonAlt(SeriesSpec):
    """``sum_{n>=1} f(n) / (n^p C(n+k,k))``, positive terms, tail-extrapolated."""

    kind: ClassVar[str] = "NonAlt"
    term: TermKind
    p: int
    k: int = 0

    def __post_init__(self):
        _need(self.p >= 0 and self.k >= 0, "p and k must be nonnegative")
        _need(self.p + self.k >= 2, "terms must decay at least like 1/n^2")


# exact kinds: values are rationals with zero error


@_register
@dataclass(frozen=True)
class PartialFractionAt(SeriesSpec):
    """``sum_r A_r/(n+r)`` from the partial-fraction coefficients of ``1/C(n+k,k)``."""

    kind: ClassVar[str] = "PartialFractionAt"
    n: int
    k: int

    def __post_init__(self):
        _need(self.n >= 0 and self.k >= 1, "need n >= 0 and k >= 1")


@_register
@dataclass(frozen=True)
class Log1mCoefficient(SeriesSpec):
    """Coefficient of ``x^n`` in ``ln^k(1-x)``, by exact Cauchy products."""

    kind: ClassVar[str] = "Log1mCoefficient"
    k: int
    n: int

    def __post_init__(self):
        _need(self.k >= 0 and self.n >= 0, "need k, n >= 0")


@_register
@dataclass(frozen=True)
class StirlingFromHarmonic(SeriesSpec):
    """``s(n, k)`` from its harmonic-number expression (``k <= 5``)."""

    kind: ClassVar[str] = "StirlingFromHarmonic"
    n: int
    k: int

    def __post_init__(self):
        _need(self.n >= 1 and 1 <= self.k <= 5, "need n >= 1 and 1 <= k <= 5")


@_register
@dataclass(frozen=True)
class BellFromHarmonic(SeriesSpec):
    """``Y_k(n)`` from its explicit harmonic-number expansion (``k <= 4``)."""

    kind: ClassVar[str] = "BellFromHarmonic"
    k: int
    n: int

    def __post_init__(self):
        _need(1 <= self.k <= 4 and self.n >= 0, "need 1 <= k <= 4 and n >= 0")


@_register
@dataclass(frozen=True)
class SpecSum(SeriesSpec):
    """Rational linear combination of other specs; error bounds add up."""

    kind: ClassVar[str] = "SpecSum"
    parts: tuple  # of (Fraction, SeriesSpec)

    def __post_init__(self):
        _need(len(self.parts) > 0, "parts must be nonempty")
        object.__setattr__(self, "parts", tuple((F(c), s) for c, s in self.parts))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "parts": [{"coeff": _q_text(c), "spec": s.to_json()} for c, s in self.parts],
        }

    @staticmethod
    def parse_parts(data) -> tuple:
        return tuple((_q(p["coeff"]), SeriesSpec.from_json(p["spec"])) for p in data)


EXACT_KINDS = (PartialFractionAt, Log1mCoefficient, StirlingFromHarmonic, BellFromHarmonic)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _exact(value: Fraction) -> ValueWithError:
    return ValueWithError(numerics.to_mpf(value), mpf(0), "exact", {"exact": value})


def _alt(a: Callable[[int], mpf], cfg: PrecisionConfig, sign: int = 1) -> ValueWithError:
    # sign * sum_{n>=1} (-1)^(n-1) a_n
    r = numerics.accelerate_alternating(a, cfg)
    if sign < 0:
        r.value = -r.value
    return r


def _power_series(
    coeff: Callable[[int], mpf], x: Fraction, cfg: PrecisionConfig, start: int = 1
) -> ValueWithError:
    """``sum_{n>=start} c_n x^n`` with ``c_n`` slowly varying.

    For ``|x| < 1`` this is a direct sum with a geometric tail bound; at
    ``x = -1`` the alternating series goes to the accelerator.
    """
    if x == -1:
        # sum_{n>=start} c_n (-1)^n = (-1)^start * sum (-1)^(n-start) c_n
        r = numerics.accelerate_alternating(coeff, cfg, start=start)
        if start % 2:
            r.value = -r.value
        return r
    xv = numerics.to_mpf(x)
    return numerics._geometric_sum(lambda n: coeff(n) * xv**n, float(abs(x)), cfg, start=start)


def _eval_alt_shifted(spec: AltShifted, cfg):
    f = term_oracle(spec.term)
    k = spec.k
    # (-1)^(n+k) = (-1)^(k+1) (-1)^(n-1)
    return _alt(lambda n: f(n) / (n + k), cfg, sign=(-1) ** (k + 1))


def _eval_alt_over_n(spec: AltOverN, cfg):
    f = term_oracle(spec.term)
    p = spec.p
    return _alt(lambda n: f(n) / mpf(n) ** p, cfg)


def _eval_power_series(spec: PowerSeriesAt, cfg):
    f = term_oracle(spec.term)
    sh, p, x = spec.shift, spec.p, spec.x
    xs = numerics.to_mpf(x) ** sh
    r = _power_series(lambda n: f(n) / mpf(n + sh) ** p, x, cfg)
    r.value *= xs
    return r


def _eval_stirling(spec: StirlingSeries, cfg):
    m, k, x = spec.m, spec.k, spec.x
    state = {"fact": 1}

    def coeff(n):
        # s(n+1, m+1) / ((n+k) n!) as an exactly rounded ratio, zero below n = m
        if n > 1:
            state["fact"] *= n
        else:
            state["fact"] = 1
        if n < m:
            return mpf(0)
        return _ratio(exactcore.stirling1(n + 1, m + 1), state["fact"] * (n + k))

    r = _power_series(coeff, x, cfg)
    xv = numerics.to_mpf(x)
    L = numerics.log_rational(1 - x, cfg)
    r.value = (-1) ** m * factorial(m) * r.value * xv**k + L ** (m + 1) / (m + 1)
    r.error_bound *= factorial(m) * abs(xv) ** k
    return r


def _ratio(num: int, den: int) -> mpf:
    # correctly truncated num/den at the current precision, without rounding either side
    prec = mpmath.mp.prec + 10
    shift = prec + den.bit_length() - num.bit_length()
    if shift >= 0:
        q = (num << shift) // den
    else:
        q = num // (den << -shift)
    return mpmath.ldexp(mpf(q), -shift)


def _eval_shifted_harmonic(spec: ShiftedHarmonicSeries, cfg):
    return _eval_power_series(
        PowerSeriesAt(TermKind.product((spec.m, 1)), spec.x, p=1, shift=spec.k), cfg
    )


def _eval_harmonic_product(spec: HarmonicProductSeries, cfg):
    term = TermKind.product((1, 2)) if spec.m == 1 else TermKind.product((1, 1), (spec.m, 1))
    return _eval_power_series(PowerSeriesAt(term, spec.x), cfg)


def _nested(a: int, b: int, y: Fraction, z: Fraction, cfg) -> ValueWithError:
    """``sum_{n>=1} y^n/n^a sum_{k<=n} z^k/k^b`` by direct summation.

    Independent of :func:`numerics.polylog_star`: the running inner sum is
    carried along ``n``. For ``|y| = 1`` the summation order is swapped and
    the inner tails are taken from one long direct partial sum.
    """
    with workdps(cfg.working_digits + 10):
        yv, zv = numerics.to_mpf(y), numerics.to_mpf(z)
        if abs(y) < 1:
            inner = [mpf(0)]

            def t(n):
                inner[0] += zv**n / mpf(n) ** b
                return inner[0] / mpf(n) ** a

            return _power_series(t, y, cfg)
        if abs(z) < 1:
            # sum_k z^k/k^b * T_k, T_k = sum_{n>=k} y^n/n^a
            total = numerics.polylog(a, y, cfg)
            head = [mpf(0)]

            def t2(k):
                tail = total - head[0]
                head[0] += yv**k / mpf(k) ** a
                return tail / mpf(k) ** b

            return _power_series(t2, z, cfg)
        raise ValueError("both weights on the unit circle are not supported here")


def _eval_reflection(spec: ReflectionPair, cfg):
    p, m, x, y = spec.p, spec.m, spec.x, spec.y
    first = _nested(m, p, y, x, cfg)
    second = _nested(p, m, x, y, cfg)
    with workdps(cfg.working_digits):
        return ValueWithError(
            first.value + second.value,
            first.error_bound + second.error_bound,
            "direct",
            {"parts": [first.meta, second.meta]},
        )


def _eval_nested_log(spec: NestedLogSeries, cfg):
    m, x = spec.m, spec.x
    if x == -1:
        # sum_k (-1)^k/k * T_k with T_k = zeta(m) - H_{k-1}^(m): alternating
        z = numerics.zeta_int(m, cfg)
        head = [mpf(0)]

        def a(k):
            tail = z - head[0]
            head[0] += 1 / mpf(k) ** m
            return tail / k

        return _alt(a, cfg, sign=-1)
    return _nested(m, 1, F(1), x, cfg)


def _nested_eta(p: int, cfg):
    # sum_n 1/n^p sum_{k<=n} (-1)^(k-1)/k = sum_k (-1)^(k-1)/k * (zeta(p) - H_{k-1}^(p))
    z = numerics.zeta_int(p, cfg)
    head = [mpf(0)]

    def a(k):
        tail = z - head[0]
        head[0] += 1 / mpf(k) ** p
        return tail / k

    return _alt(a, cfg)


def _eval_int_ln1px(spec: IntLn1px, cfg):
    m = spec.m
    return numerics.quad_de(lambda x: mpmath.log1p(x) ** m / x, 0, spec.z, cfg)


def _eval_int_beta(spec: IntBeta, cfg):
    n, k = spec.n, spec.kpow
    return numerics.quad_de(lambda t: t ** (n - 1) * mpmath.log1p(-t) ** k, 0, 1, cfg)


def _eval_int_ln1mx(spec: IntLn1mxOver1px, cfg):
    m = spec.m
    return numerics.quad_de(lambda x: mpmath.log1p(-x) ** m / (1 + x), 0, 1, cfg)


def _eval_int_pow_ln1m(spec: IntPowLn1m, cfg):
    n = spec.n
    return numerics.quad_de(lambda t: t ** (n - 1) * mpmath.log1p(-t), 0, spec.x, cfg)


def _eval_pow_ln1m_series(spec: PowLn1mSeries, cfg):
    # int_0^x t^(n-1) ln(1-t) dt = -sum_{j>=1} x^(n+j) / (j (n+j))
    n, x, N = spec.n, spec.x, spec.terms
    total = F(0)
    xp = x**n
    for j in range(1, N + 1):
        xp *= x
        total -= xp / (j * (n + j))
    if x == -1:
        # alternating with decreasing magnitudes: the first omitted term bounds the tail
        bound = F(1, (N + 1) * (n + N + 1))
    else:
        ax = abs(x)
        bound = ax ** (n + N + 1) / ((N + 1) * (n + N + 1) * (1 - ax))
    return ValueWithError(
        numerics.to_mpf(total), numerics.to_mpf(bound), "exact-truncation", {"terms": N, "exact": total}
    )


def _eval_shifted_h_over_squares(spec: ShiftedHOverSquares, cfg):
    with workdps(cfg.working_digits):
        value, err = mpf(0), mpf(0)
        for i in range(1, spec.k):
            f = term_oracle(TermKind.product((1, 1)))
            # (-1)^(n+i) = (-1)^(i+1) (-1)^(n-1)
            r = _alt(lambda n, i=i: f(n) / (mpf(n) ** 2 * (n + i)), cfg, sign=(-1) ** (i + 1))
            value += r.value
            err += r.error_bound
        return ValueWithError(value, err, "crvz", {"order": cfg.order, "sums": spec.k - 1})


def _eval_nonalt(spec: NonAlt, cfg, n_terms: int | None = None, n_powers: int | None = None):
    f = term_oracle(spec.term)
    p, k = spec.p, spec.k
    model = numerics.TailModel(q=p + k, log_power=spec.term.log_power(), n_powers=n_powers or 6)
    binom = [1]

    def t(n):
        # C(n+k, k) updated incrementally
        binom[0] = binom[0] * (n + k) // n
        return f(n) / (mpf(n) ** p * binom[0])

    return numerics.sum_with_tail(t, model, cfg, n_terms=n_terms or min(cfg.max_terms, 4000))


def _eval_wbar(spec: WbarAlt, cfg, method: str = "crvz"):
    term = TermKind.product(*((m, 1) for m in spec.orders))
    f = term_oracle(term)
    p, k = spec.p, spec.k
    binom = [1]

    def a(n):
        binom[0] = binom[0] * (n + k) // n
        return f(n) / (mpf(n) ** p * binom[0])

    if method == "crvz":
        r = _alt(a, cfg)
    elif method == "euler":
        r = numerics.euler_alternating(a, cfg)
    elif method == "direct":
        r = _direct_alternating(a, cfg)
    else:
        raise ValueError(f"unknown method {method!r}")
    r.meta = dict(r.meta, method=method)
    return r


def _direct_alternating(a: Callable[[int], mpf], cfg: PrecisionConfig) -> ValueWithError:
    """Plain partial sum; the tail of a monotone alternating series is below the next term."""
    with workdps(cfg.working_digits):
        s = mpf(0)
        sign = 1
        for n in range(1, cfg.max_terms + 1):
            s += sign * a(n)
            sign = -sign
        nxt = abs(a(cfg.max_terms + 1))
        return ValueWithError(s, nxt, "direct", {"terms": cfg.max_terms})


def _eval_spec_sum(spec: SpecSum, cfg):
    with workdps(cfg.working_digits):
        value, err, methods = mpf(0), mpf(0), []
        for c, part in spec.parts:
            r = eval_series(part, cfg)
            cv = numerics.to_mpf(c)
            value += cv * r.value
            err += abs(cv) * r.error_bound
            methods.append(r.method)
        return ValueWithError(value, err, "+".join(sorted(set(methods))), {"parts": len(spec.parts)})


_DISPATCH = {
    SpecSum: _eval_spec_sum,
    AltShifted: _eval_alt_shifted,
    AltOverN: _eval_alt_over_n,
    WbarAlt: _eval_wbar,
    PowerSeriesAt: _eval_power_series,
    StirlingSeries: _eval_stirling,
    ShiftedHarmonicSeries: _eval_shifted_harmonic,
    HarmonicProductSeries: _eval_harmonic_product,
    ReflectionPair: _eval_reflection,
    NestedLogSeries: _eval_nested_log,
    NestedEta: lambda s, cfg: _nested_eta(s.p, cfg),
    IntLn1px: _eval_int_ln1px,
    IntBeta: _eval_int_beta,
    IntLn1mxOver1px: _eval_int_ln1mx,
    IntPowLn1m: _eval_int_pow_ln1m,
    PowLn1mSeries: _eval_pow_ln1m_series,
    ShiftedHOverSquares: _eval_shifted_h_over_squares,
    NonAlt: _eval_nonalt,
    PartialFractionAt: lambda s, cfg: _exact(
        sum((A / (s.n + r) for r, A in exactcore.binom_recip_coeffs(s.k)), F(0))
    ),
    Log1mCoefficient: lambda s, cfg: _exact(exactcore.log1m_power_series(s.k, s.n)[s.n]),
    StirlingFromHarmonic: lambda s, cfg: _exact(exactcore.stirling1_closed(s.n, s.k)),
    BellFromHarmonic: lambda s, cfg: _exact(exactcore.bell_Y_closed(s.k, s.n)),
}


def eval_series(spec: SeriesSpec, cfg: PrecisionConfig) -> ValueWithError:
    """Evaluate a left-hand side; raises :class:`ConvergenceFailure` if the
    error estimate stays above ``10^-target_digits``."""
    try:
        fn = _DISPATCH[type(spec)]
    except KeyError:
        raise TypeError(f"no evaluator for {type(spec).__name__}") from None
    with workdps(cfg.working_digits):
        r = fn(spec, cfg)
        r.value = +r.value
        r.error_bound = +r.error_bound
    return r


# ---------------------------------------------------------------------------
# The binomial-weighted sums
# ---------------------------------------------------------------------------

FAMILY_ORDERS = {"quadratic": (1, 2), "cubic": (1, 1, 1)}


def wbar_direct(orders, p: int, k: int, cfg: PrecisionConfig, method: str = "crvz") -> ValueWithError:
    """Evaluate ``W_k(m_1..m_r; p)`` straight from its series."""
    spec = WbarAlt(tuple(orders), p, k)
    with workdps(cfg.working_digits):
        return _eval_wbar(spec, cfg, method)


def wbar_reduced(family: str, p: int, k: int, cfg: PrecisionConfig) -> mpf:
    """Evaluate ``W_k`` through the partial-fraction reduction and the shifted closed forms."""
    if family not in FAMILY_ORDERS:
        raise ValueError(f"unknown family {family!r}")
    return closedform.eval_expr(closedform.rhs_thm12(family, p, k), cfg)


def nonalt_binomial_check(k: int, cfg: PrecisionConfig) -> tuple[mpf, mpf]:
    """``(lhs, rhs)`` for ``sum H_n H_n^(2)/(n C(n+k,k))`` and its finite double-sum form."""
    if k < 1:
        raise ValueError("k must be positive")
    lhs = eval_series(NonAlt(NAMED_TERMS["HH2"], 1, k), cfg)
    rhs = closedform.eval_expr(closedform.rhs_binomial_nonalt(k), cfg)
    return lhs.value, rhs
