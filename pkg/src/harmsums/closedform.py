"""Constant expressions and the closed-form right-hand sides.

A :class:`ConstExpr` is a rational linear combination of products of
constant atoms. Atoms are small frozen dataclasses that know how to print
and evaluate themselves; a product of atoms is a sorted tuple, so powers are
repeated entries (``ln^4 2`` is four ``LnTwo`` atoms).

The text form is the one the CLI reads and writes, e.g.::

    -5/16*zeta(4) + 7/8*zeta(3)*ln2 + zsk(2;3,-1)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Sequence

import mpmath
from mpmath import mpf, workdps

from . import exactcore, numerics
from .exactcore import Composition
from .numerics import PrecisionConfig

F = Fraction

__all__ = [
    "Atom",
    "Zeta",
    "LnTwo",
    "LiHalf",
    "MhsStar",
    "Log",
    "Polylog",
    "PolylogStar",
    "MhsStarX",
    "ConstExpr",
    "ExprParseError",
    "expr_combine",
    "eval_expr",
    "parse_expr",
    "zsk",
    "rhs_thm11",
    "rhs_cor29",
    "rhs_known",
    "KNOWN",
]


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------


class Atom:
    """Base class; subclasses are frozen dataclasses."""

    def text(self) -> str:
        raise NotImplementedError

    def evaluate(self, cfg: PrecisionConfig) -> mpf:
        raise NotImplementedError

    def sort_key(self):
        return (self._rank, self.text())

    def __str__(self):
        return self.text()


@dataclass(frozen=True)
class Zeta(Atom):
    s: int
    _rank = 0

    def __post_init__(self):
        if self.s < 2:
            raise ValueError("zeta atom needs s >= 2")

    def text(self):
        return f"zeta({self.s})"

    def evaluate(self, cfg):
        return numerics.zeta_int(self.s, cfg)


@dataclass(frozen=True)
class LnTwo(Atom):
    _rank = 1

    def text(self):
        return "ln2"

    def evaluate(self, cfg):
        return numerics.ln2(cfg)


@dataclass(frozen=True)
class LiHalf(Atom):
    p: int
    _rank = 2

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("Li(p;1/2) atom needs p >= 2")

    def text(self):
        return f"Li({self.p};1/2)"

    def evaluate(self, cfg):
        return numerics.polylog(self.p, F(1, 2), cfg)


@dataclass(frozen=True)
class Log(Atom):
    """``ln q`` for a positive rational other than 1 and 2."""

    q: Fraction
    _rank = 3

    def text(self):
        return f"log({_fmt_q(self.q)})"

    def evaluate(self, cfg):
        return numerics.log_rational(self.q, cfg)


@dataclass(frozen=True)
class Polylog(Atom):
    p: int
    x: Fraction
    _rank = 4

    def __post_init__(self):
        if self.p < 1 or abs(self.x) > 1 or (self.p == 1 and self.x == 1):
            raise ValueError(f"Li_{self.p}({self.x}) is outside the supported domain")

    def text(self):
        return f"Li({self.p};{_fmt_q(self.x)})"

    def evaluate(self, cfg):
        return numerics.polylog(self.p, self.x, cfg)


@dataclass(frozen=True)
class PolylogStar(Atom):
    """Depth-2 polylog-star ``sum_{n>=k>=1} y^n z^k / (n^a k^b)``."""

    s: tuple[int, int]
    x: tuple[Fraction, Fraction]
    _rank = 5

    def __post_init__(self):
        if len(self.s) != 2 or len(self.x) != 2 or min(self.s) < 1:
            raise ValueError("polylog-star atom needs two positive exponents and two weights")
        if any(abs(v) > 1 for v in self.x) or (self.x[0] == 1 and self.s[0] < 2):
            raise ValueError(f"polylog-star weights {self.x} are outside the supported domain")

    def text(self):
        return f"Lis({self.s[0]},{self.s[1]};{_fmt_q(self.x[0])},{_fmt_q(self.x[1])})"

    def evaluate(self, cfg):
        return numerics.polylog_star(self.s, self.x, cfg)


@dataclass(frozen=True)
class MhsStar(Atom):
    """Finite multiple harmonic star sum, an exact rational."""

    n: int
    s: Composition
    _rank = 6

    def text(self):
        return f"zsk({self.n};{self.s})"

    def exact(self) -> Fraction:
        return exactcore.mhs_star(self.n, self.s)

    def evaluate(self, cfg):
        with workdps(cfg.working_digits):
            return numerics.to_mpf(self.exact())


@dataclass(frozen=True)
class MhsStarX(Atom):
    """Finite polylog-star sum with rational weights, also an exact rational."""

    n: int
    s: tuple[int, ...]
    x: tuple[Fraction, ...]
    _rank = 7

    def text(self):
        s = ",".join(str(v) for v in self.s)
        x = ",".join(_fmt_q(v) for v in self.x)
        return f"zskx({self.n};{s};{x})"

    def exact(self) -> Fraction:
        return exactcore.mhs_star_weighted_exact(self.n, self.s, self.x)

    def evaluate(self, cfg):
        with workdps(cfg.working_digits):
            return numerics.to_mpf(self.exact())


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

Monomial = tuple  # sorted tuple of atoms


def _sort_atoms(atoms: Iterable[Atom]) -> Monomial:
    return tuple(sorted(atoms, key=lambda a: a.sort_key()))


class ConstExpr:
    """Immutable rational linear combination of atom products."""

    __slots__ = ("_terms",)

    def __init__(self, terms: dict | Iterable = ()):
        acc: dict[Monomial, Fraction] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for mono, coeff in items:
            mono = _sort_atoms(mono)
            acc[mono] = acc.get(mono, F(0)) + F(coeff)
        self._terms = tuple(
            sorted(
                ((m, c) for m, c in acc.items() if c != 0),
                key=lambda mc: (len(mc[0]), [a.sort_key() for a in mc[0]]),
            )
        )

    @classmethod
    def const(cls, q) -> "ConstExpr":
        return cls({(): F(q)})

    @classmethod
    def atom(cls, a: Atom, power: int = 1) -> "ConstExpr":
        return cls({(a,) * power: F(1)})

    @property
    def terms(self) -> tuple:
        return self._terms

    def atoms(self) -> set[Atom]:
        return {a for m, _ in self._terms for a in m}

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(not m for m, _ in self._terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("expression is not a pure rational")
        return sum((c for _, c in self._terms), F(0))

    # algebra

    @staticmethod
    def _lift(other) -> "ConstExpr":
        if isinstance(other, ConstExpr):
            return other
        if isinstance(other, (int, Fraction)):
            return ConstExpr.const(other)
        if isinstance(other, Atom):
            return ConstExpr.atom(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return ConstExpr(list(self._terms) + list(other._terms))

    __radd__ = __add__

    def __neg__(self):
        return ConstExpr((m, -c) for m, c in self._terms)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return ConstExpr(
            (m1 + m2, c1 * c2) for m1, c1 in self._terms for m2, c2 in other._terms
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ConstExpr):
            other = other.rational_value()
        return self * (F(1) / F(other))

    def __pow__(self, k: int):
        out = ConstExpr.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __repr__(self):
        return f"ConstExpr({self.render()!r})"

    # output

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (mono, c) in enumerate(self._terms):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            factors = _render_monomial(mono)
            if not factors:
                body = _fmt_q(mag)
            elif mag == 1:
                body = factors
            else:
                body = f"{_fmt_q(mag)}*{factors}"
            if i == 0:
                parts.append(("-" if sign == "-" else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    __str__ = render

    def to_json(self) -> list[dict]:
        return [
            {"coeff": _fmt_q(c), "atoms": [a.text() for a in m]} for m, c in self._terms
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> "ConstExpr":
        out = ConstExpr()
        for item in data:
            term = ConstExpr.const(F(item["coeff"]))
            for text in item["atoms"]:
                term = term * parse_expr(text)
            out = out + term
        return out


def _render_monomial(mono: Monomial) -> str:
    out = []
    i = 0
    while i < len(mono):
        j = i
        while j < len(mono) and mono[j] == mono[i]:
            j += 1
        power = j - i
        out.append(mono[i].text() + (f"^{power}" if power > 1 else ""))
        i = j
    return "*".join(out)


def expr_combine(a: ConstExpr, b: ConstExpr, op: str, scalar=None) -> ConstExpr:
    """``a op (scalar * b)`` for ``op`` in add, sub, mul."""
    if scalar is not None:
        b = b * F(scalar)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def eval_expr(e: ConstExpr, cfg: PrecisionConfig) -> mpf:
    values: dict[Atom, mpf] = {}
    with workdps(cfg.working_digits):
        total = mpf(0)
        for mono, c in e.terms:
            v = numerics.to_mpf(c)
            for a in mono:
                if a not in values:
                    values[a] = a.evaluate(cfg)
                v *= values[a]
            total += v
        return +total


# ---------------------------------------------------------------------------
# Atom factories (canonical forms)
# ---------------------------------------------------------------------------

LN2 = ConstExpr.atom(LnTwo())


def zeta(s: int) -> ConstExpr:
    return ConstExpr.atom(Zeta(s))


def li_half(p: int) -> ConstExpr:
    return ConstExpr.atom(LiHalf(p))


def log_q(q) -> ConstExpr:
    """``ln q`` with ``ln 2`` and ``ln(1/2)`` folded onto the ``ln2`` atom."""
    q = F(q)
    if q <= 0:
        raise ValueError("log of a nonpositive rational")
    if q == 1:
        return ConstExpr()
    if q == 2:
        return LN2
    if q < 1:
        return -log_q(1 / q)
    return ConstExpr.atom(Log(q))


def li(p: int, x) -> ConstExpr:
    """``Li_p(x)`` in canonical atoms; ``p = 1`` becomes ``-ln(1-x)``."""
    x = F(x)
    if x == 0:
        return ConstExpr()
    if p == 1:
        return -log_q(1 - x)
    if x == 1:
        return zeta(p)
    if x == F(1, 2):
        return li_half(p)
    return ConstExpr.atom(Polylog(p, x))


def li_star(s: Sequence[int], x: Sequence) -> ConstExpr:
    if len(s) == 1:
        return li(s[0], x[0])
    return ConstExpr.atom(PolylogStar(tuple(s), tuple(F(v) for v in x)))


def zsk(n: int, *s: int) -> ConstExpr:
    """``zeta*_n(s)`` as an atom; identically 1 for empty ``s`` and 0 for ``n = 0``."""
    if not s:
        return ConstExpr.const(1)
    if n <= 0:
        return ConstExpr()
    return ConstExpr.atom(MhsStar(n, Composition(tuple(s))))


def zskx(n: int, s: Sequence[int], x: Sequence) -> ConstExpr:
    if not s:
        return ConstExpr.const(1)
    if n <= 0:
        return ConstExpr()
    x = tuple(F(v) for v in x)
    if all(v == 1 for v in x):
        return zsk(n, *s)
    return ConstExpr.atom(MhsStarX(n, tuple(s), x))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class ExprParseError(ValueError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<args>\([^()]*\))|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def _rat(tok: str) -> Fraction:
    try:
        return F(tok.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ExprParseError(f"bad rational {tok!r}") from exc


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise ExprParseError(f"bad integer list {text!r}") from exc


def _atom_from(name: str, args: str | None) -> ConstExpr:
    inner = args[1:-1] if args is not None else None
    try:
        if name == "ln2" and inner is None:
            return LN2
        if inner is None:
            raise ExprParseError(f"unknown constant {name!r}")
        if name == "zeta":
            return zeta(int(inner))
        if name == "log":
            return log_q(_rat(inner))
        if name == "Li":
            p, x = inner.split(";")
            return li(int(p), _rat(x))
        if name == "Lis":
            s, x = inner.split(";")
            return li_star(_int_list(s), [_rat(v) for v in x.split(",")])
        if name == "zsk":
            n, s = inner.split(";")
            return zsk(int(n), *exactcore.parse_composition(s).entries)
        if name == "zskx":
            n, s, x = inner.split(";")
            return zskx(int(n), _int_list(s), [_rat(v) for v in x.split(",")])
    except ExprParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise ExprParseError(f"bad arguments for {name}{args}: {exc}") from exc
    raise ExprParseError(f"unknown function {name!r}")


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ExprParseError(f"expected {op!r}, got {val!r}")

    def expr(self) -> ConstExpr:
        out = ConstExpr()
        sign = 1
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        out = out + sign * self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                out = out + t if val == "+" else out - t
            else:
                return out

    def term(self) -> ConstExpr:
        out = self.power()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                out = out * self.power()
            elif kind == "op" and val == "/":
                self.take()
                d = self.power()
                if not d.is_rational() or d.rational_value() == 0:
                    raise ExprParseError("division only by nonzero rationals")
                out = out / d.rational_value()
            else:
                return out

    def power(self) -> ConstExpr:
        base = self.factor()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ExprParseError("exponent must be a nonnegative integer")
            base = base ** int(val)
        return base

    def factor(self) -> ConstExpr:
        kind, val = self.take()
        if kind == "num":
            return ConstExpr.const(int(val))
        if kind == "name":
            nk, nv = self.peek()
            args = None
            if nk == "args":
                self.take()
                args = nv
            return _atom_from(val, args)
        if kind == "args":
            # parenthesised subexpression
            return parse_expr(val[1:-1])
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprParseError(f"unexpected token {val!r}")


def parse_expr(text: str) -> ConstExpr:
    """Parse the canonical text form (and a little more: parentheses, ``/q``, ``^k``)."""
    if not text or not text.strip():
        raise ExprParseError("empty expression")
    p = _Parser(text)
    e = p.expr()
    if p.i != len(p.toks):
        raise ExprParseError(f"trailing input at token {p.i}: {p.toks[p.i][1]!r}")
    return e


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------


def _check_k(k: int):
    if k < 1:
        raise ValueError("k must be a positive integer")


def rhs_thm11(family: str, k: int) -> ConstExpr:
    """Closed form of ``sum_{n>=1} f(n)/(n+k) (-1)^(n+k)``.

    ``family`` is ``"quadratic"`` for ``f = H_n H_n^(2)`` or ``"cubic"`` for
    ``f = H_n^3``. The sign ``(-1)^(n+k)`` belongs to the series side.
    """
    _check_k(k)
    n = k - 1

    def Z(*s):
        return zsk(n, *s)

    z2, z3, z4 = zeta(2), zeta(3), zeta(4)
    L = LN2
    if family == "quadratic":
        return (
            -F(5, 16) * z4
            - F(1, 4) * z2 * L**2
            + F(7, 8) * z3 * L
            + F(7, 8) * z3 * Z(-1)
            - F(1, 4) * z3 * Z(1)
            - F(1, 2) * z2 * Z(-2)
            - Z(3, -1)
            + Z(1, 2, -1)
            + F(1, 2) * z2 * Z(1, -1)
            + Z(2, 1, -1)
            + L * (Z(-3) - Z(3))
            - F(1, 2) * L * z2 * (Z(-1) - Z(1))
            + F(1, 2) * L**2 * (Z(-2) - Z(2))
            - L * (Z(2, -1) - Z(2, 1))
            - L * (Z(1, -2) - Z(1, 2))
        )
    if family == "cubic":
        return (
            -F(5, 16) * z4
            + F(9, 8) * z3 * L
            - F(3, 4) * z2 * L**2
            + F(1, 4) * L**4
            + F(9, 8) * z3 * Z(-1)
            - F(1, 2) * z2 * Z(-2)
            - Z(3, -1)
            + F(3, 2) * z2 * Z(1, -1)
            - F(3, 4) * z3 * Z(1)
            + 3 * Z(1, 2, -1)
            + 3 * Z(2, 1, -1)
            - 6 * Z(1, 1, 1, -1)
            + L * (Z(-3) - Z(3))
            - 3 * L * (Z(2, -1) - Z(2, 1))
            - 3 * L * (Z(1, -2) - Z(1, 2))
            + 6 * L * (Z(1, 1, -1) - Z(1, 1, 1))
            - 3 * L**2 * (Z(1, -1) - Z(1, 1))
            + F(3, 2) * L**2 * (Z(-2) - Z(2))
            + (L**3 - F(3, 2) * L * z2) * (Z(-1) - Z(1))
        )
    raise ValueError(f"unknown family {family!r}")


def rhs_cor29(which: str, k: int) -> ConstExpr:
    """Shifted alternating sums of ``H^3 - 3 H H^(2) + 2 H^(3)`` (``y3combo``) and ``H^(3)`` (``h3order``)."""
    _check_k(k)
    n = k - 1

    def Z(*s):
        return zsk(n, *s)

    L = LN2
    if which == "y3combo":
        return (
            F(1, 4) * L**4
            - 6 * Z(1, 1, 1, -1)
            + L**3 * (Z(-1) - Z(1))
            - 3 * L**2 * (Z(1, -1) - Z(1, 1))
            + 6 * L * (Z(1, 1, -1) - Z(1, 1, 1))
        )
    if which == "h3order":
        return (
            -F(5, 16) * zeta(4)
            + F(3, 4) * zeta(3) * L
            + L * (Z(-3) - Z(3))
            + F(3, 4) * zeta(3) * Z(-1)
            - F(1, 2) * zeta(2) * Z(-2)
            - Z(3, -1)
        )
    raise ValueError(f"unknown family {which!r}")


def rhs_thm12(family: str, p: int, k: int) -> ConstExpr:
    """Reduction of the binomial-weighted alternating sum to shifted sums.

    With ``R_r`` the closed form of ``sum f(n)/(n+r) (-1)^(n+r)``, the sum with
    sign ``(-1)^(n+1)`` is ``(-1)^(r+1) R_r``. Hence for ``p = 0`` the
    partial-fraction weights ``(-1)^(r+1) r C(k,r)`` collapse to ``r C(k,r) R_r``;
    for ``p = 1`` the weights are ``(-1)^(r+1) C(k,r)`` against
    ``K - (-1)^(r+1) R_r`` where ``K`` is the unshifted sum over ``n``.
    """
    _check_k(k)
    if p not in (0, 1):
        raise ValueError("p must be 0 or 1")
    out = ConstExpr()
    if p == 0:
        for r in range(1, k + 1):
            out = out + r * comb(k, r) * rhs_thm11(family, r)
        return out
    over_n = rhs_known("cor28_hh2" if family == "quadratic" else "cor28_h3")
    for r in range(1, k + 1):
        sign = (-1) ** (r + 1)
        out = out + sign * comb(k, r) * (over_n - sign * rhs_thm11(family, r))
    return out


# fixed closed forms, keyed by name; parameterised entries take keyword args


def _cor28_h3():
    return F(5, 8) * zeta(4) + F(3, 4) * zeta(2) * LN2**2 - F(1, 4) * LN2**4 - F(9, 8) * zeta(3) * LN2


def _cor28_hh2():
    return (
        2 * li_half(4)
        + F(1, 12) * LN2**4
        + F(7, 8) * zeta(3) * LN2
        - F(1, 4) * zeta(2) * LN2**2
        - zeta(4)
    )


def _int_ln3_1px():
    return (
        6 * zeta(4)
        + F(3, 2) * zeta(2) * LN2**2
        - F(1, 4) * LN2**4
        - F(21, 4) * zeta(3) * LN2
        - 6 * li_half(4)
    )


def _int_ln4_1px():
    return (
        -24 * li_half(5)
        - 24 * LN2 * li_half(4)
        - F(4, 5) * LN2**5
        - F(21, 2) * zeta(3) * LN2**2
        + 24 * zeta(5)
        + 4 * zeta(2) * LN2**3
    )


def _alt_h_n3():
    return (
        -2 * li_half(4)
        + F(11, 4) * zeta(4)
        + F(1, 2) * zeta(2) * LN2**2
        - F(1, 12) * LN2**4
        - F(7, 4) * zeta(3) * LN2
    )


def _shifted_h_n2(k: int, printed: bool = False):
    # sum_{i<k} sum_n H_n/(n^2 (n+i)) (-1)^(n+i)
    _check_k(k)
    n = k - 1

    def Z(*s):
        return zsk(n, *s)

    L = LN2
    # the printed variant has zsk(-2) in the last ln^2 2 term; only zsk(2) is numerically right
    last = Z(-2) if printed else Z(2)
    return (
        -F(5, 8) * zeta(3) * Z(-1)
        + F(1, 2) * (zeta(2) - L**2) * Z(-2)
        + L * (Z(2, -1) - Z(2, 1))
        - L * (Z(-3) - Z(3))
        + F(1, 2) * L**2 * last
        - Z(2, 1, -1)
        + Z(3, -1)
    )


KNOWN = {
    "cor28_h3": _cor28_h3,
    "cor28_hh2": _cor28_hh2,
    "y3combo_over_n": lambda: _int_ln3_1px() - F(1, 4) * LN2**4,
    "y3_over_n": lambda: 6 * li_half(4),
    "nested_eta3": lambda: F(7, 4) * zeta(3) * LN2 - F(5, 16) * zeta(4),
    "h3order_over_n": lambda: F(19, 16) * zeta(4) - F(3, 4) * zeta(3) * LN2,
    "alt_h_n3": _alt_h_n3,
    "thm27": lambda m: factorial(m) * li(m + 1, F(1, 2)),
    "int_ln1mx_over_1px": lambda m: (-1) ** m * factorial(m) * li(m + 1, F(1, 2)),
    "int_ln3_1px": _int_ln3_1px,
    "int_ln4_1px": _int_ln4_1px,
    "shifted_h_n2": _shifted_h_n2,
    "shifted_h_n2_printed": lambda k: _shifted_h_n2(k, printed=True),
    "k2_cubic": lambda: (
        -F(5, 16) * zeta(4) + F(9, 8) * zeta(3) * LN2 - F(3, 4) * zeta(2) * LN2**2
        + F(1, 4) * LN2**4 - 2 * LN2 + 3 * LN2**2 - 2 * LN2**3 + 3 * zeta(2) * LN2
        - F(15, 8) * zeta(3) - zeta(2) + 1
    ),
    "k2_quadratic": lambda: (
        -F(5, 16) * zeta(4) - F(1, 4) * zeta(2) * LN2**2 + F(7, 8) * zeta(3) * LN2
        - F(9, 8) * zeta(3) + zeta(2) * LN2 + 2 * LN2 - LN2**2 - 1
    ),
    "intro_w7": lambda: F(231, 16) * zeta(7) - F(51, 4) * zeta(3) * zeta(4) + 2 * zeta(2) * zeta(5),
    "intro_w9a": lambda: (
        -F(1069, 36) * zeta(9) + F(4, 3) * zeta(3) ** 3 + 7 * zeta(2) * zeta(7)
        - F(4, 3) * zeta(3) * zeta(6) + F(33, 2) * zeta(4) * zeta(5)
    ),
    "intro_w9b": lambda: (
        -F(617, 72) * zeta(9) + zeta(3) ** 3 + F(91, 8) * zeta(2) * zeta(7)
        - F(17, 4) * zeta(4) * zeta(5) - F(329, 84) * zeta(3) * zeta(6)
    ),
}


def rhs_known(name: str, **params) -> ConstExpr:
    try:
        builder = KNOWN[name]
    except KeyError:
        raise KeyError(f"unknown closed form {name!r}") from None
    return builder(**params)


# parameterised identities at rational sample points


def rhs_stirling_series(m: int, k: int, x) -> ConstExpr:
    """Finite right side for the Stirling-number power series at ``x``."""
    x = F(x)
    L = log_q(1 - x)
    n = k - 1
    out = ConstExpr()
    for j in range(1, m):
        ones = [1] * (j + 1)
        out = out + (-1) ** (j - 1) * factorial(j) * comb(m, j) * L ** (m - j) * (
            zskx(n, ones, [1] * j + [x]) - zsk(n, *ones)
        )
    out = out - L**m * (zskx(n, [1], [x]) - zsk(n, 1))
    out = out - (-1) ** m * factorial(m) * zskx(n, [1] * (m + 1), [1] * m + [x])
    return out


def rhs_shifted_harmonic_series(m: int, k: int, x) -> ConstExpr:
    """Right side for ``sum H_n^(m)/(n+k) x^(n+k)``."""
    x = F(x)
    n = k - 1
    out = li_star([1, m], [x, 1]) - li(m + 1, x)
    for j in range(1, m):
        out = out - (-1) ** (j - 1) * li(m + 1 - j, x) * zskx(n, [j], [x])
    out = out - (-1) ** m * log_q(1 - x) * (zskx(n, [m], [x]) - zsk(n, m))
    out = out + (-1) ** m * zskx(n, [m, 1], [1, x])
    return out


def rhs_harmonic_product_series(m: int, x) -> ConstExpr:
    """Right side for ``sum H_n H_n^(m) x^n`` (``m >= 2``, ``|x| < 1``)."""
    x = F(x)
    if m < 2:
        raise ValueError("m must be at least 2")
    inner = li_star([m, 1], [x, 1]) - li_star([m, 1], [1, x]) - zeta(m) * log_q(1 - x)
    return inner / (1 - x)


def rhs_hh2_series(x) -> ConstExpr:
    """Right side for ``sum H_n H_n^(2) x^n`` through polylogarithms."""
    x = F(x)
    inner = 2 * li(3, x) - log_q(1 - x) * li(2, x) - li_star([2, 1], [x, 1])
    return inner / (1 - x)


def rhs_reflection(p: int, m: int, x, y) -> ConstExpr:
    x, y = F(x), F(y)
    return li(p, x) * li(m, y) + li(p + m, x * y)


def rhs_reflection_y1(x) -> ConstExpr:
    """Reflection with ``p = 1, m = 2, y = 1``."""
    x = F(x)
    return -log_q(1 - x) * zeta(2) + li(3, x)


def rhs_h2_over_n_series(x) -> ConstExpr:
    """Right side for ``sum H_n^(2)/n x^n``."""
    x = F(x)
    return 3 * li(3, x) - log_q(1 - x) * li(2, x) - 2 * li_star([2, 1], [x, 1])


def rhs_nested_log_series(x) -> ConstExpr:
    """Right side for ``sum 1/n^2 sum_{k<=n} x^k/k``."""
    x = F(x)
    L = log_q(1 - x)
    return 2 * li_star([2, 1], [x, 1]) + L * li(2, x) - 2 * li(3, x) - L * zeta(2)


def rhs_int_ln_1px(m: int, z) -> ConstExpr:
    """Closed form of ``int_0^z ln^m(1+x)/x dx``."""
    z = F(z)
    Lz = log_q(1 + z)
    y = 1 / (1 + z)
    out = F(1, m + 1) * Lz ** (m + 1) + factorial(m) * (zeta(m + 1) - li(m + 1, y))
    for j in range(1, m + 1):
        out = out - F(factorial(m), factorial(m - j + 1)) * Lz ** (m - j + 1) * li(j, y)
    return out


def rhs_log_moment(n: int, k: int) -> ConstExpr:
    """``int_0^1 t^(n-1) ln^k(1-t) dt = (-1)^k Y_k(n)/n`` as a rational."""
    return ConstExpr.const((-1) ** k * exactcore.bell_Y(k, n) / n)


def rhs_partial_log_moment(n: int, x) -> ConstExpr:
    """``int_0^x t^(n-1) ln(1-t) dt`` in closed form."""
    x = F(x)
    L = log_q(1 - x)
    partial = sum((x**j / j for j in range(1, n + 1)), F(0))
    return F(1, n) * ((x**n - 1) * L - partial)


def rhs_binomial_nonalt(k: int) -> ConstExpr:
    """Closed form of ``sum H_n H_n^(2) / (n C(n+k,k))`` as a double finite sum."""
    _check_k(k)
    H = exactcore.harmonic
    out = ConstExpr()
    for r in range(1, k + 1):
        h1, h2 = H(r - 1, 1), H(r - 1, 2)
        s1 = sum((H(i, 1) / F(i**3) for i in range(1, r)), F(0))
        s2 = sum(((H(i, 1) ** 2 + H(i, 2)) / F(i**2) for i in range(1, r)), F(0))
        s3 = sum(
            (F(1, i) * sum((H(j, 1) / F(j**2) for j in range(1, i + 1)), F(0)) for i in range(1, r)),
            F(0),
        )
        brace = (
            2 * zeta(4)
            + 2 * h1 * zeta(3)
            + F(1, 2) * h1**2 * zeta(2)
            + s1
            - F(1, 2) * h2 * zeta(2)
            - F(1, 2) * s2
            - s3
        )
        out = out + (-1) ** (r + 1) * comb(k, r) * brace
    return out
