"""Extended-precision reals and the special functions the rest of the package uses.

All high-precision work runs on :mod:`mpmath` floats.  A :class:`PrecisionContext`
fixes the number of decimal digits a caller wants guaranteed; internally every
computation carries ``guard_digits`` more.  Values leave this module wrapped in
:class:`BigReal`, which records how many leading digits are certified.

Zeta values at integer arguments are computed by Euler-Maclaurin summation in
fixed-point integer arithmetic.  The cutoff and the number of Bernoulli
corrections are planned from the remainder bound, so the truncation error is
provably below the working tolerance.  An independent alternating-series route
through the Dirichlet eta function is provided as a cross-check.
"""

from __future__ import annotations

import json
import logging
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import mpmath
from mpmath.libmp import MPZ

logger = logging.getLogger(__name__)

__all__ = [
    "BigReal",
    "PrecisionContext",
    "PrecisionError",
    "ZetaCache",
    "get_zeta_cache",
    "log_barnes_g",
    "log_gamma",
    "make_context",
    "set_zeta_cache",
    "to_mpf",
    "zeta_eta",
    "zeta_int",
    "zeta_values",
]

MIN_DIGITS = 30
_LOG2_10 = math.log2(10)
# extra binary digits carried by the fixed-point zeta kernel so that results are
# (for all practical purposes) correctly rounded at the working precision
_ZETA_GUARD_BITS = 64


class PrecisionError(ValueError):
    """Raised when a precision request cannot be certified."""


@dataclass(frozen=True)
class PrecisionContext:
    digits: int
    guard_digits: int = 20

    def __post_init__(self) -> None:
        if int(self.digits) != self.digits or self.digits < MIN_DIGITS:
            raise PrecisionError(
                f"digits must be an integer >= {MIN_DIGITS}, got {self.digits!r}"
            )
        if self.guard_digits < 0:
            raise PrecisionError("guard_digits must be nonnegative")

    @property
    def working_digits(self) -> int:
        return self.digits + self.guard_digits

    @property
    def working_bits(self) -> int:
        return int(math.ceil(self.working_digits * _LOG2_10)) + 8

    def workprec(self):
        """Context manager switching mpmath to this context's working precision."""
        return mpmath.workprec(self.working_bits)

    def tolerance(self) -> mpmath.mpf:
        return mpmath.mpf(10) ** (-self.digits)


def make_context(digits: int, guard_digits: int = 20) -> PrecisionContext:
    """Return a context guaranteeing ``digits`` decimal digits (at least 30)."""
    return PrecisionContext(int(digits), guard_digits)


def to_mpf(x, ctx: PrecisionContext) -> mpmath.mpf:
    with ctx.workprec():
        if isinstance(x, BigReal):
            return +x.value
        return mpmath.mpf(x)


@dataclass(frozen=True)
class BigReal:
    """An arbitrary-precision real together with the number of certified digits.

    Serialization uses a sign, an integer significand string of exactly
    ``certified_digits`` digits and a base-10 exponent, so that
    ``value == sign * int(significand) * 10**exponent`` after rounding.
    """

    value: mpmath.mpf
    certified_digits: int

    def __post_init__(self) -> None:
        if self.certified_digits < 0:
            raise ValueError("certified_digits must be nonnegative")

    def __float__(self) -> float:
        return float(self.value)

    def is_zero(self) -> bool:
        return self.value == 0

    def log10(self) -> float:
        """Base-10 logarithm of the absolute value (finite even for 1e-16684)."""
        if self.value == 0:
            return float("-inf")
        with mpmath.workprec(80):
            return float(mpmath.log10(abs(self.value)))

    def to_record(self) -> tuple[str, str, int]:
        """Return ``(sign, significand, exponent)`` rounded to the certified digits."""
        if self.value == 0 or self.certified_digits == 0:
            return "+", "0", 0
        c = self.certified_digits
        sign = "-" if self.value < 0 else "+"
        with mpmath.workprec(int((c + 20) * _LOG2_10) + 64):
            a = abs(self.value)
            e = int(mpmath.floor(mpmath.log10(a))) - c + 1
            for _ in range(4):
                sig = int(mpmath.nint(a * mpmath.mpf(10) ** (-e)))
                if sig >= 10**c:
                    e += 1
                elif sig < 10 ** (c - 1):
                    e -= 1
                else:
                    break
        return sign, str(sig), e

    @classmethod
    def from_record(cls, sign: str, significand: str, exponent: int) -> "BigReal":
        digits = len(significand.lstrip("0"))
        if digits == 0:
            return cls(mpmath.mpf(0), 0)
        with mpmath.workprec(int((digits + 10) * _LOG2_10) + 64):
            v = mpmath.mpf(int(significand)) * mpmath.mpf(10) ** int(exponent)
            if sign == "-":
                v = -v
        return cls(v, digits)

    def to_string(self) -> str:
        sign, sig, exp = self.to_record()
        if sig == "0":
            return "0"
        mant = sig[0] + ("." + sig[1:] if len(sig) > 1 else "")
        e10 = exp + len(sig) - 1
        return f"{'-' if sign == '-' else ''}{mant}e{e10:+d}"

    def __str__(self) -> str:
        return self.to_string()


# ---------------------------------------------------------------------------
# zeta at integer arguments
# ---------------------------------------------------------------------------


def _log_em_term(s: int, j: int, log_n: float) -> float:
    # log |B_2j/(2j)! * s(s+1)...(s+2j-2) * N^(-s-2j+1)|, using |B_2j|/(2j)! <= 2*zeta(2)/(2pi)^2j
    return (
        math.log(2 * 1.6449340668482264)
        - 2 * j * math.log(2 * math.pi)
        + math.lgamma(s + 2 * j - 1)
        - math.lgamma(s)
        - (s + 2 * j - 1) * log_n
    )


def _corrections_needed(s: int, n: int, log_eps: float) -> int | None:
    """Smallest p with twice the first omitted term below eps, or None."""
    log_n = math.log(n)
    ok = lambda j: _log_em_term(s, j, log_n) + math.log(2) <= log_eps  # noqa: E731
    # terms shrink while (s+2j-1)(s+2j) < (2 pi N)^2, then grow
    j_star = max(1, int((2 * math.pi * n - s) / 2))
    if not ok(j_star):
        return None
    lo, hi = 1, j_star
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo - 1


def _em_plan(s: int, bits: int) -> tuple[int, int]:
    """Choose (N, p) for zeta(s) minimising cost at absolute error 2^-bits."""
    log_eps = -bits * math.log(2)
    best = None
    n = 2
    while True:
        p = _corrections_needed(s, n, log_eps)
        if p is not None:
            cost = n + 12 * p
            if best is None or cost < best[0]:
                best = (cost, n, p)
            elif cost > 2 * best[0]:
                break
        n = max(n + 1, int(n * 1.08))
        if n > 50 * bits + 100:
            break
    if best is None:
        raise PrecisionError(f"no Euler-Maclaurin plan for zeta({s}) at {bits} bits")
    return best[1], best[2]


_bernoulli_lock = threading.Lock()
_bernoulli_fixed: dict[int, list[int]] = {}


def _bernoulli_over_factorial(p: int, prec: int) -> list[int]:
    """Fixed-point values of B_2j/(2j)! for j = 1..p at ``prec`` bits."""
    with _bernoulli_lock:
        for have_prec, vals in sorted(_bernoulli_fixed.items(), reverse=True):
            if have_prec >= prec and len(vals) >= p:
                shift = have_prec - prec
                return [v >> shift if v >= 0 else -((-v) >> shift) for v in vals[:p]]
        vals = []
        with mpmath.workprec(prec + 32):
            fact = mpmath.mpf(2)
            for j in range(1, p + 1):
                if j > 1:
                    fact *= (2 * j - 1) * (2 * j)
                b = mpmath.bernoulli(2 * j) / fact
                vals.append(int(mpmath.nint(mpmath.ldexp(b, prec))))
        _bernoulli_fixed[prec] = vals
        return vals


def _zeta_fixed_batch(s_values: list[int], prec: int) -> dict[int, int]:
    """zeta(s) * 2^prec (truncated fixed point) for each s by Euler-Maclaurin."""
    plans = {s: _em_plan(s, prec - 8) for s in s_values}
    one = MPZ(1) << prec
    out: dict[int, int] = {}
    p_max = max(p for _, p in plans.values())
    bern = _bernoulli_over_factorial(p_max, prec) if p_max else []

    # power sums: sum_{k<N_s} k^-s, walking s upward for each k by exact small divisions
    order = sorted(s_values)
    sums = {s: MPZ(0) for s in order}
    n_max = max(n for n, _ in plans.values())
    for k in range(1, n_max):
        active = [s for s in order if plans[s][0] > k]
        if not active:
            break
        s_prev = active[0]
        x = one // MPZ(k) ** s_prev
        for s in active:
            if s != s_prev:
                x //= MPZ(k) ** (s - s_prev)
                s_prev = s
            sums[s] += x
            if x == 0:
                break

    for s in order:
        n, p = plans[s]
        big_n = MPZ(n)
        n_pow = big_n**s
        total = sums[s]
        total += (one * big_n) // (n_pow * (s - 1))  # N^(1-s)/(s-1)
        ns = one // n_pow
        total += ns >> 1  # N^-s / 2
        r = (ns * s) // big_n  # s * N^(-s-1)
        for j in range(1, p + 1):
            total += (bern[j - 1] * r) >> prec
            r = (r * (s + 2 * j - 1) * (s + 2 * j)) // (big_n * big_n)
        out[s] = total
    return out


def _fixed_to_mpf(x: int, prec: int, bits: int) -> mpmath.mpf:
    with mpmath.workprec(bits):
        return mpmath.ldexp(mpmath.mpf(x), -prec)


class ZetaCache:
    """Thread-safe store of zeta(s) values, optionally persisted as JSON lines.

    Each record holds ``s``, ``digits`` (the working digits it is valid for),
    ``significand`` and ``exponent``.  Entries carry more digits than ``digits``
    so that rounding a cached value reproduces a fresh computation.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._entries: dict[int, tuple[int, mpmath.mpf]] = {}
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        for lineno, line in enumerate(self.path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                s, digits = int(rec["s"]), int(rec["digits"])
                val = BigReal.from_record("+", rec["significand"], int(rec["exponent"])).value
            except (ValueError, KeyError, TypeError) as exc:
                logger.warning("zeta cache %s:%d unreadable (%s); skipped", self.path, lineno, exc)
                continue
            if s not in self._entries or self._entries[s][0] < digits:
                self._entries[s] = (digits, val)

    def get(self, s: int, working_digits: int) -> mpmath.mpf | None:
        with self._lock:
            entry = self._entries.get(s)
        if entry is not None and entry[0] >= working_digits:
            return entry[1]
        return None

    def put(self, s: int, working_digits: int, value: mpmath.mpf) -> None:
        with self._lock:
            old = self._entries.get(s)
            if old is not None and old[0] >= working_digits:
                return
            self._entries[s] = (working_digits, value)
        if self.path is not None:
            self.save()

    def entries(self) -> dict[int, tuple[int, mpmath.mpf]]:
        with self._lock:
            return dict(self._entries)

    def evict(self, s: int) -> None:
        with self._lock:
            self._entries.pop(s, None)
        if self.path is not None:
            self.save()

    def save(self) -> None:
        with self._lock:
            items = sorted(self._entries.items())
        lines = []
        for s, (digits, val) in items:
            _, sig, exp = BigReal(val, digits + 20).to_record()
            lines.append(
                json.dumps({"s": s, "digits": digits, "significand": sig, "exponent": exp})
            )
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        tmp.write_text("\n".join(lines) + ("\n" if lines else ""))
        tmp.replace(self.path)

    def audit(self) -> list[int]:
        """Re-derive every entry at its stored precision; evict and return mismatches."""
        bad = []
        for s, (digits, val) in sorted(self.entries().items()):
            ctx = PrecisionContext(max(MIN_DIGITS, digits), 0)
            fresh = _zeta_fresh([s], ctx)[s]
            with mpmath.workprec(ctx.working_bits):
                if +val != +fresh:
                    bad.append(s)
        for s in bad:
            logger.warning("zeta cache entry s=%d failed re-derivation; evicted", s)
            self.evict(s)
        return bad


_cache = ZetaCache()


def get_zeta_cache() -> ZetaCache:
    return _cache


def set_zeta_cache(cache: ZetaCache | str | Path | None) -> ZetaCache:
    """Install a new process-wide zeta cache (``None`` installs an empty in-memory one)."""
    global _cache
    _cache = cache if isinstance(cache, ZetaCache) else ZetaCache(cache)
    return _cache


def _zeta_fresh(s_values: list[int], ctx: PrecisionContext) -> dict[int, mpmath.mpf]:
    bits = ctx.working_bits
    prec = bits + _ZETA_GUARD_BITS
    fixed = _zeta_fixed_batch(s_values, prec)
    return {s: _fixed_to_mpf(v, prec, bits + _ZETA_GUARD_BITS) for s, v in fixed.items()}


def zeta_values(s_values: Iterable[int], ctx: PrecisionContext) -> dict[int, mpmath.mpf]:
    """Batch of zeta(s) for integer s >= 2, rounded to the context's working precision."""
    wanted = sorted(set(int(s) for s in s_values))
    for s in wanted:
        if s < 2:
            raise ValueError(f"zeta(s) needs integer s >= 2, got {s}")
    cache = get_zeta_cache()
    result: dict[int, mpmath.mpf] = {}
    missing = []
    for s in wanted:
        v = cache.get(s, ctx.working_digits)
        if v is None:
            missing.append(s)
        else:
            result[s] = v
    if missing:
        fresh = _zeta_fresh(missing, ctx)
        for s, v in fresh.items():
            cache.put(s, ctx.working_digits, v)
            result[s] = v
    with ctx.workprec():
        return {s: +result[s] for s in wanted}


def zeta_int(s: int, ctx: PrecisionContext) -> BigReal:
    """Riemann zeta at an integer ``s >= 2`` with absolute error below 10^-digits."""
    if int(s) != s or s < 2:
        raise ValueError(f"zeta(s) needs integer s >= 2, got {s!r}")
    return BigReal(zeta_values([s], ctx)[int(s)], ctx.digits)


def zeta_eta(s: int, ctx: PrecisionContext) -> BigReal:
    """zeta(s) through the alternating eta series with Borwein's acceleration.

    Independent of the Euler-Maclaurin route; used to cross-check it.
    """
    if int(s) != s or s < 2:
        raise ValueError(f"zeta(s) needs integer s >= 2, got {s!r}")
    s = int(s)
    # error <= 3 (3+sqrt 8)^-n / |1 - 2^(1-s)|
    n = int(math.ceil((ctx.working_digits + 2) * math.log(10) / math.log(3 + math.sqrt(8)))) + 2
    with ctx.workprec():
        # d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), accumulated in exact integers
        term = mpmath.mpf(1) / n  # i = 0 term of the sum, before the factor n
        acc = mpmath.mpf(0)
        d = []
        for i in range(n + 1):
            if i > 0:
                term *= mpmath.mpf(4 * (n + i - 1) * (n - i + 1)) / ((2 * i - 1) * (2 * i))
            acc += term
            d.append(n * acc)
        dn = d[n]
        total = mpmath.mpf(0)
        for k in range(n):
            t = (d[k] - dn) / mpmath.mpf(k + 1) ** s
            total += t if k % 2 == 0 else -t
        val = -total / (dn * (1 - mpmath.mpf(2) ** (1 - s)))
    return BigReal(val, ctx.digits)


# ---------------------------------------------------------------------------
# Gamma and Barnes G
# ---------------------------------------------------------------------------


def log_gamma(x, ctx: PrecisionContext) -> BigReal:
    """log Gamma(x) for real x > 0."""
    with ctx.workprec():
        xv = to_mpf(x, ctx)
        if xv <= 0:
            raise ValueError(f"log_gamma needs x > 0, got {x!r}")
        return BigReal(mpmath.loggamma(xv), ctx.digits)


def log_barnes_g(n: int, ctx: PrecisionContext) -> BigReal:
    """log G(n) = log prod_{i=0}^{n-2} i!, summed from log Gamma values."""
    if int(n) != n or n < 1:
        raise ValueError(f"log_barnes_g needs integer n >= 1, got {n!r}")
    with ctx.workprec():
        total = mpmath.mpf(0)
        for i in range(2, int(n) - 1):  # log Gamma(i+1) = log i!, vanishing for i = 0, 1
            total += mpmath.loggamma(i + 1)
    return BigReal(total, ctx.digits)
