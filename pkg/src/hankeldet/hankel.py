"""Hankel determinants det(F(i+j+r))_{1<=i,j<=n} of Dirichlet series.

The determinants of the zeta Hankel matrices shrink like exp(-n^2 log 2n), so
they are computed at a working precision predicted from that law and certified
by repeating the factorization at a higher precision and counting agreeing
digits.  Two independent representations are provided as oracles: the
Dirichlet series with coefficients h_n(m) f(m), and the truncated multiple sum
over lattice points weighted by the squared Vandermonde product.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .arithmetic import (
    ZETA,
    DirichletSeries,
    dirichlet_tail_bound,
    h_table,
    ordered_factorizations,
    vandermonde_square,
)
from .precision import BigReal, PrecisionContext, make_context

logger = logging.getLogger(__name__)

__all__ = [
    "DefinitenessError",
    "HankelConvergenceError",
    "HankelResult",
    "HankelSpec",
    "MZVComposition",
    "RatioRow",
    "build_matrix",
    "determinant",
    "hankel",
    "hankel_bruteforce",
    "hankel_sequence",
    "hankel_via_dirichlet",
    "mzv_display",
    "mzv_eval",
    "mzv_expansion",
    "printed_ratio",
    "ratio_sequences",
    "required_digits",
]

MAX_ESCALATIONS = 3
SAFETY_DIGITS = 2


class DefinitenessError(ArithmeticError):
    """Cholesky met a non-positive pivot: the input is indefinite or precision ran out."""


class HankelConvergenceError(RuntimeError):
    def __init__(self, message: str, trials: list[tuple[int, BigReal]]):
        super().__init__(message)
        self.trials = trials


@dataclass(frozen=True)
class HankelSpec:
    series: DirichletSeries
    n: int
    r: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"matrix dimension must be >= 1, got {self.n}")
        if self.r < 0:
            raise ValueError(f"shift r must be >= 0, got {self.r}")

    def arguments(self) -> range:
        """The 2n-1 distinct arguments F is evaluated at."""
        return range(2 + self.r, 2 * self.n + self.r + 1)


@dataclass(frozen=True)
class HankelResult:
    spec: HankelSpec
    value: BigReal
    log10_value: float
    digits_certified: int
    method: str
    working_digits: int

    def record(self) -> dict:
        sign, sig, exp = self.value.to_record()
        return {
            "series": self.spec.series.name,
            "n": self.spec.n,
            "r": self.spec.r,
            "log10_value": self.log10_value,
            "digits_certified": self.digits_certified,
            "working_digits": self.working_digits,
            "method": self.method,
            "sign": sign,
            "significand": sig,
            "exponent": exp,
        }


def build_matrix(spec: HankelSpec, ctx: PrecisionContext) -> list[list[mpmath.mpf]]:
    """The n x n Hankel matrix; only the 2n-1 distinct entries are evaluated."""
    vals = spec.series.values(spec.arguments(), ctx)
    n, r = spec.n, spec.r
    return [[vals[i + j + r] for j in range(1, n + 1)] for i in range(1, n + 1)]


def _cholesky_pivots(a: Sequence[Sequence[mpmath.mpf]]) -> list[mpmath.mpf]:
    """Squared diagonal of the Cholesky factor; their prefix products are the leading minors."""
    n = len(a)
    low = [[mpmath.mpf(0)] * n for _ in range(n)]
    pivots = []
    for j in range(n):
        row_j = low[j]
        d = a[j][j] - mpmath.fsum(x * x for x in row_j[:j])
        if d <= 0:
            raise DefinitenessError(f"non-positive pivot at column {j + 1}")
        pivots.append(d)
        root = mpmath.sqrt(d)
        row_j[j] = root
        for i in range(j + 1, n):
            row_i = low[i]
            row_i[j] = (a[i][j] - mpmath.fsum(row_i[k] * row_j[k] for k in range(j))) / root
    return pivots


def _lu_det(a: Sequence[Sequence[mpmath.mpf]]) -> mpmath.mpf:
    m = [list(row) for row in a]
    n = len(m)
    det = mpmath.mpf(1)
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(m[i][k]))
        if m[p][k] == 0:
            return mpmath.mpf(0)
        if p != k:
            m[k], m[p] = m[p], m[k]
            det = -det
        piv = m[k][k]
        det *= piv
        row_k = m[k]
        for i in range(k + 1, n):
            f = m[i][k] / piv
            if f:
                row_i = m[i]
                for j in range(k + 1, n):
                    row_i[j] -= f * row_k[j]
    return det


def _hadamard_loss(a: Sequence[Sequence[mpmath.mpf]], det: mpmath.mpf) -> int:
    # digits lost to cancellation are at most log10(prod ||row|| / |det|)
    log_rows = sum(float(mpmath.log10(mpmath.norm(row))) for row in a)
    return max(0, int(math.ceil(log_rows - float(mpmath.log10(abs(det))))))


def determinant(matrix, ctx: PrecisionContext, method: str = "lu") -> BigReal:
    """Determinant by Cholesky (symmetric positive definite input) or pivoted LU.

    The certified digit count is the working precision less the cancellation
    bound from Hadamard's inequality.
    """
    if method not in ("cholesky", "lu"):
        raise ValueError(f"unknown method {method!r}")
    with ctx.workprec():
        a = [[mpmath.mpf(x) for x in row] for row in matrix]
        if any(len(row) != len(a) for row in a):
            raise ValueError("determinant needs a square matrix")
        if not a:
            return BigReal(mpmath.mpf(1), ctx.digits)
        if method == "cholesky":
            det = mpmath.fprod(_cholesky_pivots(a))
        else:
            det = _lu_det(a)
        if det == 0:
            return BigReal(mpmath.mpf(0), 0)
        certified = max(0, ctx.digits - _hadamard_loss(a, det))
    return BigReal(det, certified)


def required_digits(spec: HankelSpec, target_digits: int) -> int:
    """Working digits predicted to survive the cancellation in det(F(i+j+r))."""
    n = spec.n
    if spec.series.name == "zeta":
        depth = (n + 0.5) ** 2 * (math.log(2 * n + 1) - 1.5) / math.log(10)
        return max(60, math.ceil(depth) + 10 * n + 60) + target_digits
    return 200 + target_digits


def _agreeing_digits(a: mpmath.mpf, b: mpmath.mpf, cap: int) -> int:
    if a == b:
        return cap
    if a == 0 or b == 0 or (a > 0) != (b > 0):
        return 0
    with mpmath.workprec(64):
        rel = abs(a - b) / abs(b)
        return max(0, min(cap, int(mpmath.floor(-mpmath.log10(rel)))))


def _method_for(series: DirichletSeries) -> str:
    # nonnegative coefficients make F(i+j+r) a moment sequence of a positive measure
    return "cholesky" if series.is_nonnegative else "lu"


def _minors(spec: HankelSpec, ctx: PrecisionContext, method: str, all_orders: bool) -> list[mpmath.mpf]:
    a = build_matrix(spec, ctx)
    with ctx.workprec():
        if method == "cholesky":
            pivots = _cholesky_pivots(a)
            out, acc = [], mpmath.mpf(1)
            for p in pivots:
                acc *= p
                out.append(acc)
            return out if all_orders else out[-1:]
        if all_orders:
            return [_lu_det([row[:k] for row in a[:k]]) for k in range(1, spec.n + 1)]
        return [_lu_det(a)]


def _certified_run(spec: HankelSpec, target_digits: int, all_orders: bool) -> list[HankelResult]:
    if target_digits < 10:
        raise ValueError("target_digits must be >= 10")
    method = _method_for(spec.series)
    digits = required_digits(spec, target_digits)
    trials: list[tuple[int, BigReal]] = []
    for attempt in range(MAX_ESCALATIONS + 1):
        hi_digits = math.ceil(1.2 * digits) + 30
        lo = _minors(spec, make_context(digits), method, all_orders)
        hi = _minors(spec, make_context(hi_digits), method, all_orders)
        cert = [_agreeing_digits(x, y, digits) - SAFETY_DIGITS for x, y in zip(lo, hi)]
        trials.append((digits, BigReal(lo[-1], max(0, cert[-1]))))
        if min(cert) >= target_digits:
            results = []
            for k, (value, c) in enumerate(zip(hi, cert), start=1 if all_orders else spec.n):
                big = BigReal(value, c)
                results.append(
                    HankelResult(
                        spec=HankelSpec(spec.series, k, spec.r),
                        value=big,
                        log10_value=big.log10(),
                        digits_certified=c,
                        method=method,
                        working_digits=hi_digits,
                    )
                )
            return results
        logger.info(
            "H_%d^(%d)[%s]: %d digits agree at %d working digits; escalating",
            spec.n, spec.r, spec.series.name, min(cert), digits,
        )
        digits *= 2
    raise HankelConvergenceError(
        f"H_{spec.n}^({spec.r})[{spec.series.name}] not certified to {target_digits} digits "
        f"after {MAX_ESCALATIONS} escalations",
        trials,
    )


def hankel(spec: HankelSpec, target_digits: int = 30) -> HankelResult:
    """H_n^(r)[F] with at least ``target_digits`` certified significant digits."""
    return _certified_run(spec, target_digits, all_orders=False)[0]


def hankel_sequence(
    series: DirichletSeries, r: int, n_max: int, target_digits: int = 30
) -> list[HankelResult]:
    """H_1^(r), ..., H_{n_max}^(r) from one factorization of the largest matrix."""
    return _certified_run(HankelSpec(series, n_max, r), target_digits, all_orders=True)


def _weighted_coefficient(series: DirichletSeries, n: int, m: int) -> int:
    # (1/n!) * sum over ordered factorizations of prod f(m_i) * Vandermonde^2
    raw = 0
    for t in ordered_factorizations(m, n):
        w = math.prod(series.coeff(x) for x in t)
        if w:
            raw += w * vandermonde_square(t)
    q, rem = divmod(raw, math.factorial(n))
    assert rem == 0
    return q


def hankel_via_dirichlet(
    spec: HankelSpec, M: int, ctx: PrecisionContext, weighted: bool = False
) -> tuple[BigReal, BigReal]:
    """Partial sum of sum_m h_n(m) f(m) / m^(2n+r) up to M, and a rigorous tail bound.

    With ``weighted=True`` the coefficient of m^-(2n+r) is instead the exact
    regrouping (1/n!) sum_{m_1...m_n = m} f(m_1)...f(m_n) prod (m_i - m_j)^2,
    which agrees with h_n(m) f(m) only for completely multiplicative f.
    """
    series, n, r = spec.series, spec.n, spec.r
    if not series.is_multiplicative:
        raise ValueError(f"series {series.name!r} is not multiplicative")
    if M < math.factorial(n):
        raise ValueError(f"M must be at least n! = {math.factorial(n)}")
    if weighted and not series.is_completely_multiplicative:
        coeffs = [(m, _weighted_coefficient(series, n, m)) for m in range(1, M + 1)]
    else:
        coeffs = [(e.m, e.value * series.coeff(e.m)) for e in h_table(n, M)]
    with ctx.workprec():
        partial = mpmath.fsum(
            mpmath.mpf(c) / mpmath.mpf(m) ** (2 * n + r) for m, c in coeffs if c
        )
    tail = dirichlet_tail_bound(n, r, M, ctx)
    with ctx.workprec():
        tail_value = tail.value * series.coeff_bound**n
    return BigReal(partial, ctx.digits), BigReal(tail_value, ctx.digits)


def hankel_bruteforce(spec: HankelSpec, M: int, ctx: PrecisionContext) -> BigReal:
    """Truncated multiple sum (1/n!) sum_{1<=m_i<=M} prod f(m_i)/m_i^(2n+r) prod (m_i-m_j)^2.

    Ties contribute nothing, so the sum runs over increasing tuples once each.
    """
    n, r, series = spec.n, spec.r, spec.series
    if n > 4:
        raise ValueError("brute-force oracle is limited to n <= 4")
    if M < n:
        raise ValueError("M must be at least n")
    power = 2 * n + r
    f = [0] + [series.coeff(m) for m in range(1, M + 1)]
    with ctx.workprec():
        inv = [mpmath.mpf(0)] + [mpmath.mpf(f[m]) / mpmath.mpf(m) ** power for m in range(1, M + 1)]
        total = mpmath.mpf(0)
        for t in itertools.combinations(range(1, M + 1), n):
            w = mpmath.fprod(inv[m] for m in t)
            if w:
                total += w * vandermonde_square(t)
    return BigReal(total, ctx.digits)


# ---------------------------------------------------------------------------
# ratio sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatioRow:
    n: int
    R0: BigReal
    R1: BigReal


def _ratio(num: Sequence[BigReal], den: Sequence[BigReal], ctx: PrecisionContext) -> BigReal:
    with ctx.workprec():
        v = mpmath.fprod(x.value for x in num) / mpmath.fprod(x.value for x in den)
    cert = min(x.certified_digits for x in (*num, *den)) - 1
    return BigReal(v, max(0, min(cert, ctx.digits)))


def _zeta_tables(n_max: int, target_digits: int) -> tuple[dict[int, BigReal], dict[int, BigReal]]:
    one = BigReal(mpmath.mpf(1), 10**6)
    h0 = {0: one}
    h1 = {0: one}
    h0.update((res.spec.n, res.value) for res in hankel_sequence(ZETA, 0, n_max + 1, target_digits))
    h1.update((res.spec.n, res.value) for res in hankel_sequence(ZETA, 1, n_max + 1, target_digits))
    return h0, h1


def ratio_sequences(n_max: int, target_digits: int = 30) -> list[RatioRow]:
    """The two positive ratio sequences of the zeta Hankel determinants, n = 1..n_max.

    R0(n) = H_{n+1}^(0) H_{n-1}^(1) / (H_n^(0) H_n^(1))  ~ 1/(2n+1) - 2/(2n+1)^2 + ...
    R1(n) = H_{n-1}^(0) H_n^(1) / (H_n^(0) H_{n-1}^(1))  ~ 1/(2n) + 1/(2n)^2 - ...
    These are the coefficients of the Stieltjes continued fraction of
    sum_k zeta(k+2) x^k.
    """
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    h0, h1 = _zeta_tables(n_max, target_digits)
    ctx = make_context(max(target_digits + 10, 40))
    rows = []
    for n in range(1, n_max + 1):
        r0 = _ratio([h0[n + 1], h1[n - 1]], [h0[n], h1[n]], ctx)
        r1 = _ratio([h0[n - 1], h1[n]], [h0[n], h1[n - 1]], ctx)
        rows.append(RatioRow(n, r0, r1))
    return rows


def printed_ratio(n: int, target_digits: int = 30) -> BigReal:
    """H_{n-1}^(0) H_n^(1) / (H_n^(0) H_{n+1}^(1)), the index pattern as typeset.

    It grows without bound (about (2n)^(4n)); kept to document that it cannot be
    the quantity with the O(1/n) expansion.
    """
    h0, h1 = _zeta_tables(n, target_digits)
    return _ratio([h0[n - 1], h1[n]], [h0[n], h1[n + 1]], make_context(max(target_digits + 10, 40)))


# ---------------------------------------------------------------------------
# multiple zeta values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MZVComposition:
    """Signed combination of multiple zeta values.

    ``terms`` holds ``(coefficient, exponents)`` with exponents listed from the
    smallest summation variable upward: (e_1, ..., e_k) means
    sum_{m_1 < ... < m_k} prod m_i^-e_i.
    """

    terms: tuple[tuple[int, tuple[int, ...]], ...]

    def signed_total(self) -> int:
        return sum(c for c, _ in self.terms)

    def weights(self) -> set[int]:
        return {sum(e) for _, e in self.terms}

    def evaluate(self, M: int = 100_000) -> tuple[float, float]:
        value = tail = 0.0
        for c, e in self.terms:
            v, t = mzv_eval(e, M)
            value += c * v
            tail += abs(c * t)
        return value, tail


def _perm_sign(p: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def mzv_expansion(n: int) -> MZVComposition:
    """H_n^(0)[zeta] as a signed sum of depth-n multiple zeta values.

    Expanding the determinant gives sum over permutations pi of
    sign(pi) * sum over all m_1..m_n of prod m_i^-(i + pi(i)).  The lattice is
    split by the ordering of the m_i; strata with ties cancel because the
    permutation sum is an alternant.  Each ordering contributes one ordered
    multiple zeta value per pi.
    """
    if not 2 <= n <= 4:
        raise ValueError("mzv_expansion supports 2 <= n <= 4")
    acc: dict[tuple[int, ...], int] = defaultdict(int)
    for pi in itertools.permutations(range(n)):
        sign = _perm_sign(pi)
        expo = [i + 1 + pi[i] + 1 for i in range(n)]  # exponent of m_i is i + pi(i), 1-based
        for order in itertools.permutations(range(n)):
            acc[tuple(expo[k] for k in order)] += sign
    terms = tuple(sorted(((c, e) for e, c in acc.items() if c), key=lambda t: t[1]))
    return MZVComposition(terms)


def mzv_display(n: int, convention: str = "smallest_first") -> MZVComposition:
    """sum_pi sign(pi) zeta(1+pi(1), ..., n+pi(n)) without symmetrizing over orderings.

    ``convention`` says which summation variable carries the first exponent.
    """
    if convention not in ("smallest_first", "largest_first"):
        raise ValueError(f"unknown convention {convention!r}")
    acc: dict[tuple[int, ...], int] = defaultdict(int)
    for pi in itertools.permutations(range(n)):
        expo = tuple(i + 1 + pi[i] + 1 for i in range(n))
        if convention == "largest_first":
            expo = expo[::-1]
        acc[expo] += _perm_sign(pi)
    return MZVComposition(tuple(sorted(((c, e) for e, c in acc.items() if c), key=lambda t: t[1])))


def _power_tail(e: int, M: int) -> float:
    # sum_{m > M} m^-e by Euler-Maclaurin, error O(M^(-e-3))
    return M ** (1 - e) / (e - 1) - 0.5 * M ** (-e) + e * M ** (-e - 1) / 12


def mzv_eval(exponents: Sequence[int], M: int = 100_000) -> tuple[float, float]:
    """Nested sum over m_1 < ... < m_k <= M of prod m_i^-e_i, plus its tail.

    Returns ``(value, tail)`` where ``value`` already includes the leading tail
    estimate zeta_<(e_1..e_{k-1}) * sum_{m > M} m^-e_k and ``tail`` is that
    estimate; what remains is O(M^(2 - e_k - e_{k-1})).
    """
    e = [int(x) for x in exponents]
    if not e:
        raise ValueError("empty composition")
    k = len(e)
    for j in range(k):
        if sum(e[j:]) <= k - j:
            raise ValueError(f"divergent multiple zeta value {tuple(e)}")
    if any(x < 1 for x in e):
        raise ValueError("exponents must be positive")
    m = np.arange(1, M + 1, dtype=np.float64)
    inner = np.ones(M)  # sum over the smaller variables, strictly below m
    prev_total = 1.0
    for j, ej in enumerate(e):
        level = inner * m ** (-float(ej))
        if j < k - 1:
            csum = np.cumsum(level)
            inner = np.concatenate(([0.0], csum[:-1]))
            prev_total = float(csum[-1])
        else:
            partial = math.fsum(level)
    if k == 1:
        prev_total = 1.0
    tail = prev_total * _power_tail(e[-1], M)
    return partial + tail, tail
