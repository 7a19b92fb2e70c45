"""Exact rational combinatorics.

Harmonic numbers, multiple harmonic star sums, unsigned Stirling numbers of
the first kind, complete Bell polynomials evaluated at harmonic arguments and
the partial-fraction coefficients of a reciprocal binomial coefficient.

Everything here is exact: values are :class:`fractions.Fraction` or ``int``.
Caches are append-only and guarded by locks, so concurrent callers always
observe fully built prefixes.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "Composition",
    "CompositionParseError",
    "HarmonicVector",
    "harmonic",
    "harmonic_vector",
    "mhs_star",
    "mhs_star_weighted_exact",
    "stirling1",
    "stirling1_closed",
    "bell_Y",
    "bell_Y_closed",
    "binom_recip_coeffs",
    "parse_composition",
    "log1m_power_series",
]


# ---------------------------------------------------------------------------
# Compositions
# ---------------------------------------------------------------------------


class CompositionParseError(ValueError):
    """Raised for malformed composition text; ``position`` is the token index."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (token {position})")
        self.position = position


@dataclass(frozen=True)
class Composition:
    """Signed multi-index ``(s_1, ..., s_k)``; a negative entry is a barred one."""

    entries: tuple[int, ...] = ()

    def __post_init__(self):
        entries = tuple(int(s) for s in self.entries)
        if any(s == 0 for s in entries):
            raise ValueError(f"composition entries must be nonzero: {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries: int) -> "Composition":
        return cls(tuple(entries))

    def weight(self) -> int:
        return sum(abs(s) for s in self.entries)

    def depth(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __str__(self) -> str:
        return ",".join(str(s) for s in self.entries)


_TOKEN_RE = re.compile(r"^([+-]?)(b?)(\d+)$")


def parse_composition(text: str) -> Composition:
    """Parse ``"3,-1"`` or ``"b2,2,b1"`` (``bN`` is an alias for ``-N``).

    Whitespace is ignored and the empty string gives the empty composition.
    """
    compact = "".join(text.split())
    if not compact:
        return Composition()
    entries = []
    for pos, tok in enumerate(compact.split(",")):
        m = _TOKEN_RE.match(tok)
        if m is None:
            raise CompositionParseError(f"malformed token {tok!r}", pos)
        sign, bar, digits = m.groups()
        if sign and bar:
            raise CompositionParseError(f"cannot combine sign and bar in {tok!r}", pos)
        value = int(digits)
        if value == 0:
            raise CompositionParseError("zero entry is not allowed", pos)
        entries.append(-value if (sign == "-" or bar) else value)
    return Composition(tuple(entries))


def _as_entries(s: Composition | Sequence[int]) -> tuple[int, ...]:
    if isinstance(s, Composition):
        return s.entries
    return Composition(tuple(s)).entries


# ---------------------------------------------------------------------------
# Harmonic numbers
# ---------------------------------------------------------------------------

_harmonic_lock = threading.Lock()
_harmonic_tables: dict[int, list[Fraction]] = {}


def _harmonic_table(m: int, n: int) -> list[Fraction]:
    table = _harmonic_tables.get(m)
    if table is not None and len(table) > n:
        return table
    with _harmonic_lock:
        table = _harmonic_tables.get(m)
        if table is None:
            table = [Fraction(0)]
        if len(table) <= n:
            # build a private extension, then publish it in one assignment
            ext = list(table)
            acc = ext[-1]
            for j in range(len(ext), n + 1):
                acc += Fraction(1, j**m)
                ext.append(acc)
            table = ext
            _harmonic_tables[m] = table
        return table


def harmonic(n: int, m: int = 1) -> Fraction:
    """Generalised harmonic number ``H_n^(m)``; zero for ``n = 0``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if m < 1:
        raise ValueError("order m must be positive")
    return _harmonic_table(m, n)[n]


@dataclass(frozen=True)
class HarmonicVector:
    """Harmonic numbers ``H_n^(m)`` of several orders at one index ``n``."""

    n: int
    values: dict[int, Fraction] = field(default_factory=dict)

    def __getitem__(self, m: int) -> Fraction:
        return self.values[m]


def harmonic_vector(n: int, orders: Iterable[int]) -> HarmonicVector:
    return HarmonicVector(n, {m: harmonic(n, m) for m in orders})


# ---------------------------------------------------------------------------
# Multiple harmonic star sums
# ---------------------------------------------------------------------------


def mhs_star(n: int, s: Composition | Sequence[int]) -> Fraction:
    """Exact multiple harmonic star sum.

    Sums ``prod_j sgn(s_j)^{n_j} / n_j^{|s_j|}`` over ``n >= n_1 >= ... >= n_k >= 1``.
    Evaluated by a prefix recursion from the innermost index outwards, so the
    cost is ``O(n * depth)`` rational operations.
    """
    entries = _as_entries(s)
    if not entries:
        return Fraction(1)
    if n <= 0:
        return Fraction(0)
    inner = [Fraction(1)] * (n + 1)
    for sj in reversed(entries):
        p = abs(sj)
        neg = sj < 0
        acc = Fraction(0)
        outer = [Fraction(0)] * (n + 1)
        for i in range(1, n + 1):
            term = Fraction(-1 if (neg and i % 2) else 1, i**p)
            acc += term * inner[i]
            outer[i] = acc
        inner = outer
    return inner[n]


def mhs_star_weighted_exact(
    n: int, s: Sequence[int], x: Sequence[Fraction | int]
) -> Fraction:
    """Partial multiple polylogarithm-star sum at rational weights.

    ``sum over 1 <= k_m <= ... <= k_1 <= n of prod_j x_j^{k_j} / k_j^{s_j}``.
    """
    if len(s) != len(x):
        raise ValueError("exponent and weight lists differ in length")
    if not s:
        return Fraction(1)
    if n <= 0:
        return Fraction(0)
    inner = [Fraction(1)] * (n + 1)
    for sj, xj in zip(reversed(s), reversed(x)):
        xj = Fraction(xj)
        acc = Fraction(0)
        power = Fraction(1)
        outer = [Fraction(0)] * (n + 1)
        for i in range(1, n + 1):
            power *= xj
            acc += power / i**sj * inner[i]
            outer[i] = acc
        inner = outer
    return inner[n]


# ---------------------------------------------------------------------------
# Stirling numbers of the first kind (unsigned)
# ---------------------------------------------------------------------------

_stirling_lock = threading.Lock()
# _stirling_rows[n][k] for k <= _stirling_kmax; rows are immutable tuples
_stirling_rows: list[tuple[int, ...]] = [(1,)]
_stirling_kmax = 0


def _stirling_table(n: int, k: int) -> list[tuple[int, ...]]:
    global _stirling_rows, _stirling_kmax
    rows, kmax = _stirling_rows, _stirling_kmax
    if len(rows) > n and kmax >= k:
        return rows
    with _stirling_lock:
        rows, kmax = _stirling_rows, _stirling_kmax
        if kmax < k:
            # widen every existing row
            kmax = max(k, 2 * kmax, 5)
            new_rows = [(1,) + (0,) * kmax]
            for i in range(1, len(rows)):
                prev = new_rows[-1]
                new_rows.append(
                    (0,) + tuple(prev[j - 1] + (i - 1) * prev[j] for j in range(1, kmax + 1))
                )
            rows = new_rows
        else:
            rows = list(rows)
        for i in range(len(rows), n + 1):
            prev = rows[-1]
            rows.append((0,) + tuple(prev[j - 1] + (i - 1) * prev[j] for j in range(1, kmax + 1)))
        _stirling_rows, _stirling_kmax = rows, kmax
        return rows


def stirling1(n: int, k: int) -> int:
    """Unsigned Stirling number of the first kind ``s(n, k)``.

    Uses ``s(n,k) = s(n-1,k-1) + (n-1) s(n-1,k)`` with ``s(0,0) = 1``.
    """
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    if k > n:
        return 0
    return _stirling_table(n, k)[n][k]


def stirling1_closed(n: int, k: int) -> Fraction:
    """``s(n, k)`` for ``k <= 5`` from its harmonic-number expression."""
    if not 1 <= k <= 5:
        raise ValueError("closed form only available for 1 <= k <= 5")
    if n < 1:
        raise ValueError("n must be positive")
    f = factorial(n - 1)
    h1, h2, h3, h4 = (harmonic(n - 1, m) for m in (1, 2, 3, 4))
    if k == 1:
        return Fraction(f)
    if k == 2:
        return f * h1
    if k == 3:
        return Fraction(f, 2) * (h1**2 - h2)
    if k == 4:
        return Fraction(f, 6) * (h1**3 - 3 * h1 * h2 + 2 * h3)
    return Fraction(f, 24) * (h1**4 - 6 * h4 - 6 * h1**2 * h2 + 3 * h2**2 + 8 * h1 * h3)


# ---------------------------------------------------------------------------
# Complete Bell polynomials at x_m = (m-1)! H_n^(m)
# ---------------------------------------------------------------------------


def _bell_complete(k: int, xs: Sequence[Fraction]) -> Fraction:
    # Y_{j+1} = sum_{i=0}^{j} C(j, i) Y_{j-i} x_{i+1}; xs[i] holds x_{i+1}
    ys = [Fraction(1)]
    for j in range(k):
        ys.append(sum((comb(j, i) * ys[j - i] * xs[i] for i in range(j + 1)), Fraction(0)))
    return ys[k]


def bell_Y(k: int, n: int) -> Fraction:
    """``Y_k(n)``: complete Bell polynomial at ``x_m = (m-1)! H_n^(m)``."""
    if k < 0 or n < 0:
        raise ValueError("k and n must be nonnegative")
    xs = [factorial(m - 1) * harmonic(n, m) for m in range(1, k + 1)]
    return _bell_complete(k, xs)


def bell_Y_closed(k: int, n: int) -> Fraction:
    """Explicit expansions of ``Y_1(n) .. Y_4(n)`` in harmonic numbers."""
    if not 1 <= k <= 4:
        raise ValueError("closed form only available for 1 <= k <= 4")
    h1, h2, h3, h4 = (harmonic(n, m) for m in (1, 2, 3, 4))
    if k == 1:
        return h1
    if k == 2:
        return h1**2 + h2
    if k == 3:
        return h1**3 + 3 * h1 * h2 + 2 * h3
    return h1**4 + 8 * h1 * h3 + 6 * h1**2 * h2 + 3 * h2**2 + 6 * h4


# ---------------------------------------------------------------------------
# Partial fractions and power series
# ---------------------------------------------------------------------------


def binom_recip_coeffs(k: int) -> list[tuple[int, Fraction]]:
    """Pairs ``(r, A_r)`` with ``1/C(n+k, k) = sum_r A_r / (n + r)``."""
    if k < 1:
        raise ValueError("k must be positive")
    return [(r, Fraction((-1) ** (r + 1) * r * comb(k, r))) for r in range(1, k + 1)]


def log1m_power_series(k: int, order: int) -> list[Fraction]:
    """Coefficients ``c_0..c_order`` of ``ln^k(1 - x)`` by repeated Cauchy products."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    base = [Fraction(0)] + [Fraction(-1, j) for j in range(1, order + 1)]
    result = [Fraction(1)] + [Fraction(0)] * order
    for _ in range(k):
        prod = [Fraction(0)] * (order + 1)
        for i, a in enumerate(result):
            if a:
                for j in range(1, order + 1 - i):
                    prod[i + j] += a * base[j]
        result = prod
    return result
