"""Arbitrary-precision numerics on top of mpmath.

Values are ``mpmath.mpf`` evaluated inside ``mpmath.workdps``. The module
keeps its own routes to the constants it needs: zeta values come from the
alternating eta series under Cohen-Rodriguez Villegas-Zagier acceleration,
polylogarithms from direct summation, integrals from tanh-sinh quadrature.
mpmath's own special functions are only used by tests as oracles.

mpmath keeps its working precision in a process-global context. Everything
here runs inside ``workdps`` blocks, so callers that want parallelism should
use processes rather than threads.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
from mpmath import mpf, workdps

__all__ = [
    "ConvergenceFailure",
    "PrecisionConfig",
    "TailModel",
    "ValueWithError",
    "to_mpf",
    "accelerate_alternating",
    "euler_alternating",
    "zeta_int",
    "eta_int",
    "ln2",
    "log_rational",
    "polylog",
    "polylog_star",
    "sum_with_tail",
    "quad_de",
    "mhs_star_weighted",
]

# digits gained per term by the Chebyshev scheme: log10(3 + sqrt 8)
CRVZ_DIGITS_PER_TERM = math.log10(3 + math.sqrt(8))


class ConvergenceFailure(ArithmeticError):
    """A series or quadrature did not reach the requested accuracy."""


@dataclass(frozen=True)
class PrecisionConfig:
    target_digits: int = 30
    guard_digits: int = 15
    max_terms: int = 5000
    acceleration_order: int | None = None

    def __post_init__(self):
        if self.target_digits < 1 or self.guard_digits < 1:
            raise ValueError("target and guard digits must be positive")
        if self.acceleration_order is not None and self.acceleration_order < 2:
            raise ValueError("acceleration order must be at least 2")
        if self.max_terms < 2 * self.order:
            raise ValueError("max_terms must be at least twice the acceleration order")

    @property
    def working_digits(self) -> int:
        return self.target_digits + self.guard_digits

    @property
    def order(self) -> int:
        """Number of terms fed to the alternating-series accelerator."""
        if self.acceleration_order is not None:
            return self.acceleration_order
        return math.ceil(self.working_digits / CRVZ_DIGITS_PER_TERM) + 4

    @property
    def eps(self) -> mpf:
        return mpf(10) ** (-self.working_digits)

    def with_digits(self, target: int) -> "PrecisionConfig":
        return replace(self, target_digits=target, acceleration_order=None)


@dataclass
class ValueWithError:
    value: mpf
    error_bound: mpf
    method: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.error_bound < 0:
            raise ValueError("error bound must be nonnegative")


def to_mpf(x) -> mpf:
    """Lift an int, Fraction or mpf to the current working precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


# ---------------------------------------------------------------------------
# Alternating series
# ---------------------------------------------------------------------------


def _crvz(terms: Sequence[mpf], n: int) -> mpf:
    # Algorithm 1 of Cohen, Rodriguez Villegas and Zagier on a_0..a_{n-1}
    d = (3 + mpmath.sqrt(8)) ** n
    d = (d + 1 / d) / 2
    b = mpf(-1)
    c = -d
    s = mpf(0)
    for k in range(n):
        c = b - c
        s += c * terms[k]
        b = (k + n) * (k - n) * b / ((k + mpf(0.5)) * (k + 1))
    return s / d


def accelerate_alternating(
    term: Callable[[int], mpf],
    cfg: PrecisionConfig,
    start: int = 1,
) -> ValueWithError:
    """Sum ``sum_{n>=start} (-1)^(n-start) a_n`` by the CRVZ Chebyshev scheme.

    ``term`` is called exactly once for each of ``n = start, start+1, ...`` in
    increasing order, so it may carry incremental state. The error bound is
    the difference between the order ``d`` and order ``d-1`` results.
    """
    d = cfg.order
    with workdps(cfg.working_digits):
        terms = []
        for n in range(start, start + d):
            a = mpf(term(n))
            if not mpmath.isfinite(a):
                raise ConvergenceFailure(f"non-finite term at n={n}")
            terms.append(a)
        value = _crvz(terms, d)
        lower = _crvz(terms, d - 1)
        err = abs(value - lower)
        return ValueWithError(+value, err, "crvz", {"order": d})


def euler_alternating(
    term: Callable[[int], mpf],
    cfg: PrecisionConfig,
    head: int = 40,
    differences: int | None = None,
) -> ValueWithError:
    """Cross-check route: direct head sum then Euler-van Wijngaarden differences.

    Much slower than :func:`accelerate_alternating` (roughly 0.3 digits per
    difference) and loses digits to cancellation, so it is only meant for
    moderate-precision cross-checks.
    """
    m = differences or math.ceil(cfg.working_digits / math.log10(2)) + 10
    with workdps(cfg.working_digits + m // 3 + 10):
        s = mpf(0)
        sign = 1
        for n in range(1, head + 1):
            s += sign * mpf(term(n))
            sign = -sign
        row = [mpf(term(n)) for n in range(head + 1, head + 1 + m)]
        tail = mpf(0)
        last = mpf(0)
        for k in range(m):
            last = row[0] / mpf(2) ** (k + 1)
            tail += (-1) ** k * last
            row = [row[i + 1] - row[i] for i in range(len(row) - 1)]
        value = s + sign * tail
    with workdps(cfg.working_digits):
        return ValueWithError(+value, +abs(last), "euler", {"head": head, "differences": m})


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

_const_lock = threading.Lock()
_const_cache: dict[tuple, mpf] = {}


def _cached(key: tuple, compute: Callable[[], mpf]) -> mpf:
    hit = _const_cache.get(key)
    if hit is not None:
        return hit
    value = compute()
    with _const_lock:
        _const_cache.setdefault(key, value)
        return _const_cache[key]


def eta_int(s: int, cfg: PrecisionConfig) -> mpf:
    """Dirichlet eta ``sum (-1)^(n-1) / n^s`` for integer ``s >= 1``."""
    if s < 1:
        raise ValueError("eta_int needs s >= 1")

    def compute():
        with workdps(cfg.working_digits):
            return accelerate_alternating(lambda n: mpf(n) ** (-s), cfg).value

    return _cached(("eta", s, cfg.working_digits, cfg.order), compute)


def zeta_int(s: int, cfg: PrecisionConfig) -> mpf:
    """``zeta(s)`` for integer ``s >= 2`` as ``eta(s) / (1 - 2^(1-s))``."""
    if s < 2:
        raise ValueError("zeta_int needs s >= 2")

    def compute():
        eta = eta_int(s, cfg)
        with workdps(cfg.working_digits):
            return eta / (1 - mpf(2) ** (1 - s))

    return _cached(("zeta", s, cfg.working_digits, cfg.order), compute)


def ln2(cfg: PrecisionConfig) -> mpf:
    """``ln 2`` from the accelerated alternating harmonic series."""
    return eta_int(1, cfg)


def log_rational(q: Fraction | int, cfg: PrecisionConfig) -> mpf:
    """Natural log of a positive rational; ``ln 2`` goes through :func:`ln2`."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log of a nonpositive number")
    if q == 2:
        return ln2(cfg)
    if q == Fraction(1, 2):
        return -ln2(cfg)
    with workdps(cfg.working_digits):
        return mpmath.log(to_mpf(q))


def _geometric_sum(
    term_at: Callable[[int], mpf], ratio: float, cfg: PrecisionConfig, start: int = 1
) -> ValueWithError:
    # direct summation of a series whose terms shrink at least like ratio^n
    # (times slowly varying factors); tail bound is |t_N| r/(1-r) with a x10 margin
    eps = cfg.eps * mpf(10) ** -3
    s = mpf(0)
    t = mpf(0)
    for n in range(start, start + cfg.max_terms):
        t = term_at(n)
        s += t
        if n > start + 4 and abs(t) * 10 * ratio / (1 - ratio) < eps * max(1, abs(s)):
            return ValueWithError(s, abs(t) * 10 * ratio / (1 - ratio), "direct", {"terms": n - start + 1})
    raise ConvergenceFailure(f"series not converged after {cfg.max_terms} terms (last term {mpmath.nstr(t, 5)})")


def polylog(p: int, x, cfg: PrecisionConfig) -> mpf:
    """``Li_p(x) = sum x^n / n^p`` for real ``|x| <= 1``."""
    xq = x if isinstance(x, Fraction) else None
    with workdps(cfg.working_digits):
        xv = to_mpf(x)
        if abs(xv) > 1:
            raise ValueError("polylog only implemented for |x| <= 1")
        if p < 1:
            raise ValueError("polylog needs p >= 1")
        if xv == 0:
            return mpf(0)
        if p == 1:
            if xv == 1:
                raise ValueError("Li_1 diverges at x = 1")
            if xq is not None:
                return -log_rational(1 - xq, cfg)
            return -mpmath.log(1 - xv)
        if xv == 1:
            return zeta_int(p, cfg)
        if xv == -1:
            return -eta_int(p, cfg)

    def compute():
        with workdps(cfg.working_digits):
            ratio = float(abs(xv))
            return _geometric_sum(lambda n: xv**n / mpf(n) ** p, ratio, cfg).value

    key = ("Li", p, xq if xq is not None else xv, cfg.working_digits)
    return _cached(key, compute)


def _alt_sign(z) -> int:
    return -1 if z < 0 else 1


def polylog_star(s: Sequence[int], x: Sequence, cfg: PrecisionConfig) -> mpf:
    """Infinite depth-1 or depth-2 multiple polylogarithm-star value.

    ``s = (a, b)``, ``x = (y, z)`` gives ``sum_{n >= k >= 1} y^n z^k / (n^a k^b)``;
    the outer index carries ``y``. Depth 1 is :func:`polylog`.

    Routes: for ``|y| < 1`` sum over ``n`` with a running inner sum; for
    ``|y| = 1`` and ``|z| < 1`` swap the order and use
    ``sum_{n >= k} y^n/n^a = Li_a(y) - partial``; the two cases with a unit
    weight of opposite signs become alternating and are accelerated.
    """
    if len(s) != len(x):
        raise ValueError("exponent and weight lists differ in length")
    if len(s) == 1:
        return polylog(s[0], x[0], cfg)
    if len(s) != 2:
        raise ValueError("only depth 1 and 2 are supported")
    a, b = s
    xq = tuple(Fraction(v) if not isinstance(v, mpf) else v for v in x)

    def compute():
        with workdps(cfg.working_digits + 10):
            y, z = (to_mpf(v) for v in x)
            if abs(y) > 1 or abs(z) > 1:
                raise ValueError("weights must satisfy |x| <= 1")
            if abs(y) < 1:
                inner = [mpf(0)]

                def t_outer(n):
                    inner[0] += z**n / mpf(n) ** b
                    return y**n / mpf(n) ** a * inner[0]

                return _geometric_sum(t_outer, float(abs(y)), cfg).value
            if y == 1 and a < 2:
                raise ValueError("outer sum diverges for y = 1, a < 2")
            if abs(z) < 1:
                total = polylog(a, y, cfg)
                head = [mpf(0)]  # sum_{n < k} y^n / n^a

                def t_swapped(k):
                    tail = total - head[0]
                    head[0] += y**k / mpf(k) ** a
                    return z**k / mpf(k) ** b * tail

                return _geometric_sum(t_swapped, float(abs(z)), cfg).value
            if y == -1 and z == 1:
                h = [mpf(0)]

                def t_alt(n):
                    h[0] += 1 / mpf(n) ** b
                    return h[0] / mpf(n) ** a

                return -accelerate_alternating(t_alt, cfg).value
            if y == 1 and z == -1:
                total = zeta_int(a, cfg)
                head = [mpf(0)]

                def t_alt_swapped(k):
                    tail = total - head[0]
                    head[0] += 1 / mpf(k) ** a
                    return tail / mpf(k) ** b

                return -accelerate_alternating(t_alt_swapped, cfg).value
            raise ValueError(f"unit weights {x} are not supported")

    with workdps(cfg.working_digits):
        return +_cached(("Lis", tuple(s), xq, cfg.working_digits), compute)


def mhs_star_weighted(n: int, s: Sequence[int], x: Sequence, cfg: PrecisionConfig) -> mpf:
    """Partial multiple polylog-star sum ``sum_{1<=k_m<=..<=k_1<=n} prod x_j^k_j / k_j^s_j``."""
    if len(s) != len(x):
        raise ValueError("exponent and weight lists differ in length")
    with workdps(cfg.working_digits):
        if not s:
            return mpf(1)
        if n <= 0:
            return mpf(0)
        inner = [mpf(1)] * (n + 1)
        for sj, xj in zip(reversed(s), reversed(x)):
            xv = to_mpf(xj)
            acc = mpf(0)
            power = mpf(1)
            outer = [mpf(0)] * (n + 1)
            for i in range(1, n + 1):
                power *= xv
                acc += power / mpf(i) ** sj * inner[i]
                outer[i] = acc
            inner = outer
        return inner[n]


# ---------------------------------------------------------------------------
# Slowly convergent positive series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailModel:
    """Asymptotic family ``sum_{i<=log_power, j<n_powers} c_ij ln^i N / N^(q-1+j)`` for the tail.

    ``q`` is the decay exponent of the terms and ``log_power`` the largest
    power of ``ln n`` they carry.
    """

    q: int
    log_power: int = 0
    n_powers: int = 6

    def unknowns(self, n_powers: int | None = None) -> int:
        return 1 + (self.log_power + 1) * (n_powers or self.n_powers)


def _tail_fit(partials: dict[int, mpf], model: TailModel, n_powers: int, points: list[int]) -> mpf:
    u = model.unknowns(n_powers)
    pts = points[-u:]
    A = mpmath.matrix(u, u)
    rhs = mpmath.matrix(u, 1)
    for r, N in enumerate(pts):
        A[r, 0] = 1
        lN = mpmath.log(N)
        c = 1
        for j in range(n_powers):
            base = mpf(N) ** -(model.q - 1 + j)
            for i in range(model.log_power + 1):
                A[r, c] = lN**i * base
                c += 1
        rhs[r] = partials[N]
    return mpmath.lu_solve(A, rhs)[0]


def sum_with_tail(
    term: Callable[[int], mpf],
    model: TailModel,
    cfg: PrecisionConfig,
    n_terms: int | None = None,
) -> ValueWithError:
    """Sum a slowly convergent positive series with an extrapolated tail.

    Partial sums are recorded at equally spaced checkpoints up to ``N``
    and fitted against ``S - tail(N)`` for the declared model, with ``u`` and
    ``u'`` unknowns (``J`` and ``J - 1`` powers of ``1/N``). The reported error
    is the difference between the two fits. ``term`` is called once for each
    ``n = 1..N`` in order.
    """
    if model.q < 2:
        raise ValueError("tail extrapolation needs terms decaying at least like 1/n^2")
    N = n_terms or cfg.max_terms
    J = model.n_powers
    u = model.unknowns(J)
    if N < 4 * u:
        raise ValueError("too few terms for the tail model")
    points = [N * (i + 1) // u for i in range(u)]
    wanted = set(points)
    with workdps(cfg.working_digits + 20):
        s = mpf(0)
        partials: dict[int, mpf] = {}
        any_nonzero = False
        for n in range(1, N + 1):
            t = term(n)
            if t:
                any_nonzero = True
            s += t
            if n in wanted:
                partials[n] = s
        if not any_nonzero:
            return ValueWithError(mpf(0), mpf(0), "tail-fit", {"terms": N})
        best = _tail_fit(partials, model, J, points)
        coarse = _tail_fit(partials, model, J - 1, points)
        err = abs(best - coarse)
    with workdps(cfg.working_digits):
        return ValueWithError(+best, +err, "tail-fit", {"terms": N, "n_powers": J})


# ---------------------------------------------------------------------------
# Double-exponential quadrature
# ---------------------------------------------------------------------------


def quad_de(
    integrand: Callable[[mpf], mpf],
    a,
    b,
    cfg: PrecisionConfig,
    max_level: int = 11,
) -> ValueWithError:
    """Tanh-sinh quadrature of ``integrand`` over ``[a, b]``.

    The step is halved until two successive levels agree to
    ``10^-(target_digits + 3)``; the error bound is the last difference.
    Abscissae are generated as distances from the nearer endpoint so that
    integrands with logarithmic endpoint singularities are sampled
    accurately. Nodes that round onto an endpoint are skipped.
    """
    wp = cfg.working_digits
    with workdps(wp + 10):
        a = to_mpf(a)
        b = to_mpf(b)
        if a == b:
            return ValueWithError(mpf(0), mpf(0), "tanh-sinh", {"level": 0})
        half = (b - a) / 2
        pi2 = mpmath.pi / 2
        # beyond t_max the weights fall below 10^-(wp+20)
        t_max = float(mpmath.asinh((wp + 20) * math.log(10) / math.pi + 1))
        stop = mpf(10) ** -(cfg.target_digits + 3)

        def f_checked(x):
            if x == a or x == b:
                return None
            v = integrand(x)
            if not mpmath.isfinite(v):
                raise ConvergenceFailure(f"non-finite integrand at interior node {mpmath.nstr(x, 10)}")
            return v

        def contribution(t):
            # node pair at +-t; returns weight * (f(left) + f(right))
            st = mpmath.sinh(t)
            u = pi2 * st
            e = mpmath.exp(2 * u)
            comp = 2 / (e + 1)  # 1 - tanh(u)
            w = pi2 * mpmath.cosh(t) / mpmath.cosh(u) ** 2
            d = abs(half) * comp
            total = mpf(0)
            for x in (a + (d if half > 0 else -d), b - (d if half > 0 else -d)):
                v = f_checked(x)
                if v is not None:
                    total += v
            return w * total

        centre = f_checked(a + half)
        h = mpf(1)
        acc = pi2 * (centre if centre is not None else 0)
        k = 1
        while k * h <= t_max:
            acc += contribution(k * h)
            k += 1
        prev = acc * h * half
        diff = None
        for level in range(1, max_level + 1):
            h /= 2
            k = 1
            while k * h <= t_max:
                acc += contribution(k * h)
                k += 2
            cur = acc * h * half
            diff = abs(cur - prev)
            prev = cur
            if level >= 3 and diff < stop:
                break
        result = ValueWithError(prev, diff, "tanh-sinh", {"level": level})
    with workdps(wp):
        result.value = +result.value
    return result

