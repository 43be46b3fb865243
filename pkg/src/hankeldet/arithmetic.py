"""Exact integer arithmetic behind the Dirichlet-series form of Hankel determinants.

Everything here works on Python integers: divisor functions, the Moebius
function, ordered factorizations and the coefficient function

    h_n(m) = (1/n!) * sum over ordered (m_1, ..., m_n) with m_1*...*m_n = m
             of prod_{i<j} (m_i - m_j)^2.

Only tuples with pairwise distinct entries contribute, and each such multiset
appears n! times in the ordered sum, so :func:`h` sums the squared Vandermonde
product over strictly increasing divisor tuples.  :func:`h_bruteforce` keeps the
literal ordered sum as an oracle.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import mpmath

from .precision import BigReal, PrecisionContext, zeta_values

__all__ = [
    "DirichletSeries",
    "HFunctionEntry",
    "MOEBIUS",
    "ZETA",
    "big_omega",
    "dirichlet_tail_bound",
    "divisor_count_table",
    "divisors",
    "factorize",
    "get_series",
    "h",
    "h_bruteforce",
    "h_table",
    "moebius",
    "num_divisors",
    "ordered_factorizations",
    "sigma2",
    "superfactorial_square",
    "vandermonde_square",
]

_SIEVE_LIMIT = 10**7
_spf_lock = threading.Lock()
_spf: list[int] = [0, 1]


def _smallest_prime_factors(limit: int) -> list[int]:
    global _spf
    with _spf_lock:
        if len(_spf) > limit:
            return _spf
        size = max(limit + 1, 2 * len(_spf), 1024)
        spf = list(range(size))
        for p in range(2, math.isqrt(size - 1) + 1):
            if spf[p] == p:
                for q in range(p * p, size, p):
                    if spf[q] == q:
                        spf[q] = p
        _spf = spf
        return spf


def factorize(m: int) -> dict[int, int]:
    """Prime factorization of ``m >= 1`` as ``{prime: exponent}``."""
    if m < 1:
        raise ValueError(f"factorize needs m >= 1, got {m}")
    out: dict[int, int] = {}
    if m <= _SIEVE_LIMIT:
        spf = _smallest_prime_factors(m)
        while m > 1:
            p = spf[m]
            m //= p
            out[p] = out.get(p, 0) + 1
        return out
    p = 2
    while p * p <= m:
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def divisors(m: int) -> list[int]:
    divs = [1]
    for p, e in factorize(m).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def sigma2(m: int) -> int:
    """Sum of the squares of the divisors of m."""
    return sum(d * d for d in divisors(m))


def num_divisors(m: int) -> int:
    return math.prod(e + 1 for e in factorize(m).values())


def moebius(m: int) -> int:
    f = factorize(m)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def big_omega(m: int) -> int:
    """Number of prime factors of m counted with multiplicity."""
    return sum(factorize(m).values())


def ordered_factorizations(m: int, n: int) -> Iterator[tuple[int, ...]]:
    """Yield every ordered n-tuple of positive integers with product m, lexicographically."""
    if m < 1 or n < 1:
        raise ValueError("ordered_factorizations needs m >= 1 and n >= 1")
    divs = divisors(m)

    def rec(rem: int, k: int) -> Iterator[tuple[int, ...]]:
        if k == 1:
            yield (rem,)
            return
        for d in divs:
            if d > rem:
                break
            if rem % d == 0:
                for rest in rec(rem // d, k - 1):
                    yield (d,) + rest

    yield from rec(m, n)


def vandermonde_square(ms: Sequence[int]) -> int:
    out = 1
    for i in range(len(ms)):
        for j in range(i + 1, len(ms)):
            out *= (ms[i] - ms[j]) ** 2
    return out


def superfactorial_square(n: int) -> int:
    """(prod_{i=1}^n (i-1)!)^2, the guaranteed divisor of every h_n(m)."""
    return math.prod(math.factorial(i - 1) for i in range(1, n + 1)) ** 2


def _increasing_tuples(m: int, n: int, divs: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Strictly increasing n-tuples of divisors of m with product m."""

    def rec(rem: int, k: int, lo: int) -> Iterator[tuple[int, ...]]:
        if k == 1:
            if rem > lo:
                yield (rem,)
            return
        for d in divs:
            if d <= lo:
                continue
            # remaining k entries are all >= d and distinct, so their product is >= d^k
            if d**k > rem:
                break
            if rem % d == 0:
                for rest in rec(rem // d, k - 1, d):
                    yield (d,) + rest

    yield from rec(m, n, 0)


def _h_from_divisors(n: int, m: int, divs: Sequence[int]) -> int:
    if n == 1:
        return 1
    if m < math.factorial(n):
        return 0
    return sum(vandermonde_square(t) for t in _increasing_tuples(m, n, divs))


def h(n: int, m: int) -> int:
    """Exact h_n(m); nonnegative, zero for m < n!."""
    if n < 1 or m < 1:
        raise ValueError("h needs n >= 1 and m >= 1")
    return _h_from_divisors(n, m, divisors(m))


def h_bruteforce(n: int, m: int) -> int:
    """h_n(m) from the literal ordered sum and an exact division by n!."""
    raw = sum(vandermonde_square(t) for t in ordered_factorizations(m, n))
    q, rem = divmod(raw, math.factorial(n))
    assert rem == 0, f"n! does not divide the ordered sum for n={n}, m={m}"
    return q


@dataclass(frozen=True)
class HFunctionEntry:
    n: int
    m: int
    value: int


def _divisor_lists(m_max: int) -> list[list[int]]:
    divs: list[list[int]] = [[] for _ in range(m_max + 1)]
    for d in range(1, m_max + 1):
        for q in range(d, m_max + 1, d):
            divs[q].append(d)
    return divs


def h_table(n: int, m_max: int) -> list[HFunctionEntry]:
    """h_n(m) for m = 1..m_max in ascending order."""
    if n < 1 or m_max < 1:
        raise ValueError("h_table needs n >= 1 and m_max >= 1")
    divs = _divisor_lists(m_max)
    return [HFunctionEntry(n, m, _h_from_divisors(n, m, divs[m])) for m in range(1, m_max + 1)]


def divisor_count_table(n: int, m_max: int) -> list[int]:
    """d_n(m) for m = 0..m_max (index 0 unused): ordered n-factorization counts."""
    cur = [0] + [1] * m_max
    for _ in range(n - 1):
        nxt = [0] * (m_max + 1)
        for d in range(1, m_max + 1):
            c = cur[d]
            for q in range(d, m_max + 1, d):
                nxt[q] += c
        cur = nxt
    return cur


# ---------------------------------------------------------------------------
# Dirichlet series
# ---------------------------------------------------------------------------

Evaluator = Callable[[Iterable[int], PrecisionContext], dict]


@dataclass(frozen=True)
class DirichletSeries:
    """A Dirichlet series F(s) = sum f(m) m^-s given by its coefficient oracle.

    ``evaluator`` returns F at a batch of integer arguments (as mpmath values at
    the context's working precision); series without one can still be used by
    the coefficient-level routines.  Complete multiplicativity (f(ab) = f(a)f(b)
    for all a, b) is what lets the h_n(m) f(m) regrouping hold exactly; plain
    multiplicativity does not.  ``coeff_bound`` bounds |f(m)| and scales
    the truncation bounds.
    """

    name: str
    coeff: Callable[[int], int | Fraction]
    is_multiplicative: bool = False
    is_nonnegative: bool = False
    is_completely_multiplicative: bool = False
    evaluator: Evaluator | None = field(default=None, compare=False)
    coeff_bound: int = 1

    def __post_init__(self) -> None:
        if self.is_multiplicative and self.coeff(1) != 1:
            raise ValueError(f"multiplicative series {self.name!r} must have f(1) = 1")

    def values(self, s_values: Iterable[int], ctx: PrecisionContext) -> dict:
        if self.evaluator is None:
            raise ValueError(f"series {self.name!r} has no evaluator for F(s)")
        return self.evaluator(s_values, ctx)


def _inverse_zeta_values(s_values: Iterable[int], ctx: PrecisionContext) -> dict:
    z = zeta_values(s_values, ctx)
    with ctx.workprec():
        return {s: 1 / v for s, v in z.items()}


ZETA = DirichletSeries(
    "zeta",
    lambda m: 1,
    is_multiplicative=True,
    is_nonnegative=True,
    is_completely_multiplicative=True,
    evaluator=zeta_values,
)
MOEBIUS = DirichletSeries(
    "moebius", moebius, is_multiplicative=True, is_nonnegative=False, evaluator=_inverse_zeta_values
)

_BUILTIN = {"zeta": ZETA, "moebius": MOEBIUS}


def get_series(name: str) -> DirichletSeries:
    try:
        return _BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown series {name!r}; expected one of {sorted(_BUILTIN)}") from None


def dirichlet_tail_bound(n: int, r: int, M: int, ctx: PrecisionContext) -> BigReal:
    """Upper bound for sum_{m > M} h_n(m) / m^(2n+r).

    Uses (m_i - m_j)^2 <= m_i^2 m_j^2, hence h_n(m) <= d_n(m) m^(2n-2) / n!, and
    the identity sum_m d_n(m) m^-(2+r) = zeta(2+r)^n.
    """
    if n < 1 or r < 0:
        raise ValueError("dirichlet_tail_bound needs n >= 1 and r >= 0")
    if M < math.factorial(n):
        raise ValueError(f"M = {M} is below n! = {math.factorial(n)}; the partial sum would be empty")
    counts = divisor_count_table(n, M)
    z = zeta_values([2 + r], ctx)[2 + r]
    with ctx.workprec():
        partial = mpmath.fsum(mpmath.mpf(counts[m]) / mpmath.mpf(m) ** (2 + r) for m in range(1, M + 1))
        bound = (z**n - partial) / math.factorial(n)
        # absorb the rounding of the subtraction
        bound += mpmath.mpf(10) ** (-ctx.working_digits + 2)
    return BigReal(bound, ctx.digits)
