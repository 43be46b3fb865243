"""Lattice Coulomb gas behind the zeta Hankel determinant, and Plancherel sums.

The determinant H_n[zeta] is a sum of exp(Phi(m)) over configurations
1 <= m_1 < ... < m_n of integer charges, with

    Phi(m) = -2n sum_i log m_i + 2 sum_{i<j} log(m_j - m_i).

This module evaluates Phi, searches for maximizing configurations by
randomized local moves, compares the empirical charge density with the
equilibrium density, and sums the analogous Plancherel series
Z_n = sum_{0 <= m_1 < ... < m_n} prod_{i<j} (m_i - m_j)^2 / prod (m_i!)^2.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .equilibrium import RHO, density_cdf

__all__ = [
    "Configuration",
    "Partition",
    "PlancherelSum",
    "PlancherelWeight",
    "best_of",
    "cdf_distance",
    "empirical_cdf",
    "exhaustive_optimum",
    "hook_dimension",
    "optimize",
    "partitions",
    "phi_discrete",
    "phi_predicted",
    "phi_unordered",
    "plancherel_Z",
    "plancherel_ratio",
    "plancherel_weight",
]

_EXACT_SIZE_LIMIT = 30


@dataclass(frozen=True)
class Configuration:
    m: tuple[int, ...]
    phi: float

    def __post_init__(self) -> None:
        if not self.m or self.m[0] < 1:
            raise ValueError("configuration must start at m_1 >= 1")
        if any(b <= a for a, b in zip(self.m, self.m[1:])):
            raise ValueError("configuration must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.m)


@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(p < 1 for p in self.parts):
            raise ValueError("partition parts must be positive")
        if any(b > a for a, b in zip(self.parts, self.parts[1:])):
            raise ValueError("partition parts must be weakly decreasing")

    @property
    def size(self) -> int:
        return sum(self.parts)

    def shifted(self, n: int) -> tuple[int, ...]:
        """m_i = lambda_i + n - i for i = 1..n (padding with zero parts), strictly decreasing."""
        if len(self.parts) > n:
            raise ValueError(f"partition with {len(self.parts)} rows does not fit in n = {n}")
        lam = self.parts + (0,) * (n - len(self.parts))
        return tuple(lam[i] + n - 1 - i for i in range(n))

    @classmethod
    def from_shifted(cls, m: Sequence[int]) -> "Partition":
        ms = sorted(m, reverse=True)
        n = len(ms)
        lam = [ms[i] - (n - 1 - i) for i in range(n)]
        if any(x < 0 for x in lam) or len(set(ms)) != n:
            raise ValueError("shifted coordinates must be distinct and nonnegative")
        return cls(tuple(x for x in lam if x > 0))


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------


def phi_discrete(m: Sequence[int], n: int) -> float:
    """Phi of a strictly increasing configuration of n positive integers."""
    arr = np.asarray(m, dtype=np.int64)
    if arr.shape != (n,):
        raise ValueError(f"expected {n} charges, got {arr.size}")
    if arr.size and arr.min() < 1:
        raise ValueError("charges must be positive integers")
    diffs = np.diff(arr)
    if np.any(diffs == 0):
        raise ValueError("coincident charges: the Vandermonde factor vanishes (energy -inf)")
    if np.any(diffs < 0):
        raise ValueError("configuration must be strictly increasing; use phi_unordered for arbitrary order")
    iu = np.triu_indices(n, k=1)
    gaps = (arr[None, :] - arr[:, None])[iu]
    return float(-2 * n * np.log(arr).sum() + 2 * np.log(gaps).sum())


def phi_unordered(m: Sequence[int], n: int) -> float:
    """Phi after sorting; Phi is symmetric in the charges."""
    return phi_discrete(sorted(m), n)


def phi_predicted(n: int) -> float:
    """Continuum value -n^2 (log 2n - 3/2) of the maximal energy."""
    return -(n**2) * (math.log(2 * n) - 1.5)


def _site_energy(b: int, m: np.ndarray, k: int, n: int) -> float:
    """Terms of Phi involving a charge at b, interacting with all charges except index k."""
    d = np.abs(m - b).astype(np.float64)
    d[k] = 1.0
    return -2 * n * math.log(b) + 2 * float(np.log(d).sum())


def optimize(n: int, seed: int, move_budget: int) -> Configuration:
    """Randomized local search for a configuration of maximal Phi.

    Starts from m_i = i and proposes single-charge moves: a shift within a
    window of width max(8, n/10), a multiplicative jump (so charges in the
    sparse tail can travel distances proportional to their position), and an
    extension of the outermost charge.  Only strict improvements are accepted,
    so the result never falls below the starting energy.  Deterministic for
    given (n, seed, move_budget).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if move_budget < 0:
        raise ValueError("move_budget must be >= 0")
    rng = np.random.default_rng(seed)
    m = np.arange(1, n + 1, dtype=np.int64)
    occupied = set(m.tolist())
    window = max(8, n // 10)
    phi = phi_discrete(m, n)
    if n == 1:
        return Configuration((1,), 0.0)
    for _ in range(move_budget):
        u = rng.random()
        if u < 0.5:
            k = int(rng.integers(n))
            step = int(rng.integers(1, window + 1)) * (1 if rng.random() < 0.5 else -1)
            b = int(m[k]) + step
        elif u < 0.85:
            k = int(rng.integers(n))
            b = int(round(int(m[k]) * math.exp(rng.normal(0.0, 0.25))))
        else:
            k = int(np.argmax(m))
            b = int(m[k]) + int(rng.geometric(1.0 / (1 + int(m[k]) // 4)))
        a = int(m[k])
        if b < 1 or b in occupied:
            continue
        delta = _site_energy(b, m, k, n) - _site_energy(a, m, k, n)
        if delta > 0:
            m[k] = b
            occupied.discard(a)
            occupied.add(b)
            phi += delta
    ms = tuple(sorted(int(x) for x in m))
    # re-evaluate once so accumulated rounding in phi does not leak out
    return Configuration(ms, phi_discrete(ms, n))


def _optimize_args(args: tuple[int, int, int]) -> Configuration:
    return optimize(*args)


def best_of(n: int, seeds: Sequence[int], move_budget: int, workers: int | None = None) -> tuple[int, Configuration]:
    """Independent restarts; returns (seed, configuration) with the largest Phi, lowest seed on ties."""
    if not seeds:
        raise ValueError("need at least one seed")
    jobs = [(n, s, move_budget) for s in seeds]
    if workers is None or workers <= 1:
        results = [optimize(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_optimize_args, jobs))
    best = max(zip(seeds, results), key=lambda sr: (sr[1].phi, -sr[0]))
    return best


def exhaustive_optimum(n: int, m_max: int = 50) -> Configuration:
    """Best configuration with all m_i <= m_max, by enumeration.

    Shifting every charge down by one keeps the differences and raises
    -2n sum log m_i, so an optimum has m_1 = 1 and only the remaining n-1
    charges are enumerated.
    """
    if n < 1 or m_max < n:
        raise ValueError("need 1 <= n <= m_max")
    if n == 1:
        return Configuration((1,), 0.0)
    logs = np.log(np.arange(m_max + 1, dtype=np.float64).clip(min=1))
    best_phi, best_m = -math.inf, None
    chunk = 200_000
    combos = itertools.combinations(range(2, m_max + 1), n - 1)
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        rest = block.reshape(-1, n - 1)
        full = np.hstack([np.ones((rest.shape[0], 1), dtype=np.int64), rest])
        phi = -2 * n * logs[full].sum(axis=1)
        for i in range(n):
            for j in range(i + 1, n):
                phi += 2 * logs[full[:, j] - full[:, i]]
        idx = int(np.argmax(phi))
        if phi[idx] > best_phi:
            best_phi, best_m = float(phi[idx]), tuple(int(x) for x in full[idx])
    return Configuration(best_m, phi_discrete(best_m, n))


# ---------------------------------------------------------------------------
# empirical density
# ---------------------------------------------------------------------------


def empirical_cdf(c: Configuration, n: int) -> list[tuple[float, float]]:
    """Jump points (m_i/n, i/n) of F(x) = #{i : m_i <= n x} / n."""
    if c.n != n:
        raise ValueError(f"configuration has {c.n} charges, expected {n}")
    return [(mi / n, (i + 1) / n) for i, mi in enumerate(c.m)]


def cdf_distance(c: Configuration, n: int) -> float:
    """sup_x |F_emp(x) - int_0^x rho|, checked on both sides of every jump."""
    worst = 0.0
    prev = 0.0
    for x, frac in empirical_cdf(c, n):
        f = density_cdf(RHO, x)
        worst = max(worst, abs(frac - f), abs(prev - f))
        prev = frac
    return worst


# ---------------------------------------------------------------------------
# Plancherel measure
# ---------------------------------------------------------------------------


def partitions(k: int, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of k in reverse lexicographic order."""
    if k < 0:
        raise ValueError("k must be >= 0")

    def rec(rem: int, cap: int) -> Iterator[tuple[int, ...]]:
        if rem == 0:
            yield ()
            return
        for p in range(min(rem, cap), 0, -1):
            for rest in rec(rem - p, p):
                yield (p,) + rest

    for parts in rec(k, k if max_part is None else max_part):
        yield Partition(parts)


def hook_dimension(p: Partition) -> int:
    """dim lambda = |lambda|! / prod of hook lengths."""
    conj = [sum(1 for part in p.parts if part > j) for j in range(p.parts[0])] if p.parts else []
    hooks = 1
    for i, row in enumerate(p.parts):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return math.factorial(p.size) // hooks


@dataclass(frozen=True)
class PlancherelWeight:
    log_value: float
    exact: Fraction | None = None

    @property
    def log_space(self) -> bool:
        """True when the exact rational was skipped (large partitions)."""
        return self.exact is None

    def __float__(self) -> float:
        return float(self.exact) if self.exact is not None else math.exp(self.log_value)


def plancherel_weight(p: Partition, n: int) -> PlancherelWeight:
    """prod_{i<j} (m_i - m_j)^2 / prod_i (m_i!)^2 with m_i = lambda_i + n - i."""
    m = p.shifted(n)
    log_num = 2 * sum(math.log(abs(a - b)) for a, b in itertools.combinations(m, 2))
    log_den = 2 * sum(math.lgamma(x + 1) for x in m)
    exact = None
    if p.size <= _EXACT_SIZE_LIMIT:
        num = math.prod((a - b) ** 2 for a, b in itertools.combinations(m, 2))
        den = math.prod(math.factorial(x) for x in m) ** 2
        exact = Fraction(num, den)
    return PlancherelWeight(log_num - log_den, exact)


def plancherel_ratio(p: Partition, n: int) -> Fraction:
    """Product form divided by (dim lambda / |lambda|!)^2, exactly (small partitions)."""
    w = plancherel_weight(p, n)
    if w.exact is None:
        raise ValueError("ratio is only computed exactly for |lambda| <= 30")
    return w.exact / Fraction(hook_dimension(p), math.factorial(p.size)) ** 2


@dataclass(frozen=True)
class PlancherelSum:
    n: int
    m_max: int
    Z: float
    error_estimate: float


def plancherel_Z(n: int, m_max: int) -> PlancherelSum:
    """Truncated Z_n over 0 <= m_1 < ... < m_n <= m_max.

    The error estimate is the contribution of the outermost shell (m_n = m_max);
    the terms decay factorially, so the next shell is far smaller.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if m_max < n - 1:
        raise ValueError(f"m_max must be >= n - 1 = {n - 1}")
    lf = [math.lgamma(x + 1) for x in range(m_max + 1)]
    terms: list[float] = []
    shell: list[float] = []
    for m in itertools.combinations(range(m_max + 1), n):
        lv = -2 * sum(lf[x] for x in m)
        for a, b in itertools.combinations(m, 2):
            lv += 2 * math.log(b - a)
        t = math.exp(lv)
        terms.append(t)
        if m[-1] == m_max:
            shell.append(t)
    return PlancherelSum(n, m_max, math.fsum(terms), math.fsum(shell))
