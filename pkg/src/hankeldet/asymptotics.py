"""Asymptotic fits for zeta Hankel determinants and the Selberg integral.

Coefficient extraction works in mpmath at a precision well above that of the
samples, because the design matrices in powers of 1/(2n+1) are badly
conditioned in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath

from .hankel import HankelResult
from .precision import BigReal, PrecisionContext, log_barnes_g

__all__ = [
    "ConditioningError",
    "FitResult",
    "ScalingConstants",
    "amplitudes",
    "barnes_asymptotic_log",
    "fit_inverse_series",
    "leading_law_residual",
    "scaling_constants",
    "scaling_law_residual",
    "selberg_asymptotic_log",
    "selberg_barnes_log",
    "selberg_exact_log",
    "zagier_scaling",
]

VARIABLES = {
    "inv_2n_plus_1": lambda n: 1 / mpmath.mpf(2 * n + 1),
    "inv_2n": lambda n: 1 / mpmath.mpf(2 * n),
}
_FIT_DPS = 80


class ConditioningError(ArithmeticError):
    """The fitting system is rank deficient."""


@dataclass(frozen=True)
class FitResult:
    variable: str
    coefficients: tuple[float, ...]
    window: tuple[int, int]
    residual_norm: float
    residuals: tuple[float, ...] = field(default=(), repr=False)

    def records(self) -> list[dict]:
        return [{"k": k, "coefficient": c} for k, c in enumerate(self.coefficients, start=1)]


def fit_inverse_series(samples: Sequence[tuple[int, object]], variable: str, order: int) -> FitResult:
    """Fit y ~ sum_{k=1..order} c_k u^k with u = 1/(2n+1) or 1/(2n).

    With exactly ``order`` samples the system is solved exactly; with more it is
    solved in the least-squares sense (QR).
    """
    if variable not in VARIABLES:
        raise ValueError(f"variable must be one of {sorted(VARIABLES)}")
    if order < 1:
        raise ValueError("order must be >= 1")
    ns = [int(n) for n, _ in samples]
    if len(set(ns)) != len(ns):
        raise ConditioningError("sample abscissae must be distinct")
    if len(samples) < order:
        raise ConditioningError(f"{len(samples)} samples cannot determine {order} coefficients")
    u_of = VARIABLES[variable]
    with mpmath.workdps(_FIT_DPS):
        ys = [y.value if isinstance(y, BigReal) else mpmath.mpf(y) for _, y in samples]
        rows = [[u_of(n) ** k for k in range(1, order + 1)] for n in ns]
        a = mpmath.matrix(rows)
        b = mpmath.matrix(ys)
        try:
            if len(samples) == order:
                c = mpmath.lu_solve(a, b)
            else:
                c, _ = mpmath.qr_solve(a, b)
        except ZeroDivisionError as exc:
            raise ConditioningError("singular fitting system") from exc
        res = [ys[i] - mpmath.fsum(rows[i][k] * c[k] for k in range(order)) for i in range(len(ns))]
        norm = mpmath.sqrt(mpmath.fsum(x * x for x in res))
        coeffs = tuple(float(x) for x in c)
    if not all(math.isfinite(x) for x in coeffs):
        raise ConditioningError("non-finite coefficients")
    return FitResult(
        variable=variable,
        coefficients=coeffs,
        window=(min(ns), max(ns)),
        residual_norm=float(norm),
        residuals=tuple(float(x) for x in res),
    )


# ---------------------------------------------------------------------------
# scaling constants
# ---------------------------------------------------------------------------


def _log_scaling(n: int, kind: int) -> mpmath.mpf:
    # kind 0: ((2n+1)/e^1.5)^-(n+1/2)^2 for H_n^(0); kind 1: (2n/e^1.5)^(-n^2+3/4) for H_{n-1}^(1)
    if kind == 0:
        return -((n + mpmath.mpf(1) / 2) ** 2) * (mpmath.log(2 * n + 1) - mpmath.mpf(3) / 2)
    return (-mpmath.mpf(n) ** 2 + mpmath.mpf(3) / 4) * (mpmath.log(2 * n) - mpmath.mpf(3) / 2)


def _index(result: HankelResult, kind: int) -> int:
    if result.spec.r != kind:
        raise ValueError(f"kind {kind} expects r = {kind} determinants, got r = {result.spec.r}")
    return result.spec.n if kind == 0 else result.spec.n + 1


def amplitudes(h_values: Sequence[HankelResult], kind: int) -> list[tuple[int, mpmath.mpf]]:
    """(n, H / scaling(n)) pairs; for kind 1 the determinant H_{n-1}^(1) is indexed by n."""
    if kind not in (0, 1):
        raise ValueError("kind must be 0 or 1")
    out = []
    with mpmath.workdps(_FIT_DPS):
        for res in h_values:
            n = _index(res, kind)
            out.append((n, mpmath.exp(mpmath.log(res.value.value) - _log_scaling(n, kind))))
    return sorted(out, key=lambda t: t[0])


@dataclass(frozen=True)
class ScalingConstants:
    A0_estimate: float | None = None
    A1_estimate: float | None = None
    ratio_A1_over_A0: float | None = None
    extrapolated: bool = True
    corrections0: tuple[float, ...] = ()
    corrections1: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        for v in (self.A0_estimate, self.A1_estimate):
            if v is not None and not v > 0:
                raise ValueError("scaling amplitudes must be positive")


def _extrapolate(pairs: list[tuple[int, mpmath.mpf]], kind: int, terms: int) -> tuple[mpmath.mpf, list[mpmath.mpf], bool]:
    """Eliminate the even-power corrections from A_n = A (1 + b_1 u^2 + ... + b_K u^2K)."""
    if len(pairs) < 3:
        return pairs[-1][1], [], False
    k = min(terms, len(pairs) - 1)
    use = pairs[-(k + 1):]
    u_of = VARIABLES["inv_2n_plus_1" if kind == 0 else "inv_2n"]
    with mpmath.workdps(_FIT_DPS):
        a = mpmath.matrix([[u_of(n) ** (2 * j) for j in range(k + 1)] for n, _ in use])
        c = mpmath.lu_solve(a, mpmath.matrix([v for _, v in use]))
        amp = c[0]
        return amp, [c[j] / amp for j in range(1, k + 1)], True


def zagier_scaling(h_values: Sequence[HankelResult], kind: int, terms: int = 6) -> ScalingConstants:
    """Extrapolate H / scaling(n) to n -> infinity for r = kind determinants."""
    pairs = amplitudes(h_values, kind)
    if not pairs:
        raise ValueError("no determinants supplied")
    amp, corr, done = _extrapolate(pairs, kind, terms)
    corr_f = tuple(float(x) for x in corr)
    if kind == 0:
        return ScalingConstants(A0_estimate=float(amp), extrapolated=done, corrections0=corr_f)
    return ScalingConstants(A1_estimate=float(amp), extrapolated=done, corrections1=corr_f)


def scaling_constants(
    h0_values: Sequence[HankelResult], h1_values: Sequence[HankelResult], terms: int = 6
) -> ScalingConstants:
    s0 = zagier_scaling(h0_values, 0, terms)
    s1 = zagier_scaling(h1_values, 1, terms)
    return ScalingConstants(
        A0_estimate=s0.A0_estimate,
        A1_estimate=s1.A1_estimate,
        ratio_A1_over_A0=s1.A1_estimate / s0.A0_estimate,
        extrapolated=s0.extrapolated and s1.extrapolated,
        corrections0=s0.corrections0,
        corrections1=s1.corrections1,
    )


def leading_law_residual(h_values: Sequence[HankelResult]) -> list[tuple[int, float]]:
    """log H_n + n^2 (log 2n - 3/2) for r = 0 determinants."""
    out = []
    with mpmath.workdps(40):
        for res in h_values:
            if res.spec.r != 0:
                raise ValueError("leading law applies to r = 0 determinants")
            n = res.spec.n
            out.append((n, float(mpmath.log(res.value.value) + n**2 * (mpmath.log(2 * n) - 1.5))))
    return sorted(out)


def scaling_law_residual(h_values: Sequence[HankelResult]) -> list[tuple[int, float]]:
    """log H_n + (n+1/2)^2 (log(2n+1) - 3/2), which tends to log A0."""
    out = []
    with mpmath.workdps(40):
        for res in h_values:
            n = res.spec.n
            out.append((n, float(mpmath.log(res.value.value) - _log_scaling(n, 0))))
    return sorted(out)


# ---------------------------------------------------------------------------
# Selberg integral S_n(1, 1, 1) and Barnes G
# ---------------------------------------------------------------------------


def selberg_exact_log(n: int, ctx: PrecisionContext) -> BigReal:
    """log S_n(1,1,1) = sum_{j=1}^n (2 log Gamma(j) + log Gamma(j+1) - log Gamma(n+j))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with ctx.workprec():
        total = mpmath.fsum(
            2 * mpmath.loggamma(j) + mpmath.loggamma(j + 1) - mpmath.loggamma(n + j)
            for j in range(1, n + 1)
        )
    return BigReal(total, ctx.digits)


def selberg_barnes_log(n: int, ctx: PrecisionContext) -> BigReal:
    """log S_n(1,1,1) = 3 log G(n+1) + log G(n+2) - log G(2n+1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with ctx.workprec():
        total = (
            3 * log_barnes_g(n + 1, ctx).value
            + log_barnes_g(n + 2, ctx).value
            - log_barnes_g(2 * n + 1, ctx).value
        )
    return BigReal(total, ctx.digits)


def selberg_asymptotic_log(n: int) -> float:
    """-2 log 2 n^2 + (log(2 pi n) - 1) n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return -2 * math.log(2) * n * n + (math.log(2 * math.pi * n) - 1) * n


def barnes_asymptotic_log(z: float) -> float:
    """z^2 (log z / 2 - 3/4) + log(2 pi) z / 2 - log(z) / 12, without the constant term."""
    if z < 1:
        raise ValueError("z must be >= 1")
    return z * z * (math.log(z) / 2 - 0.75) + 0.5 * math.log(2 * math.pi) * z - math.log(z) / 12
