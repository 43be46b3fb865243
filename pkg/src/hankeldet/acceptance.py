"""Acceptance checks, shared by ``hankeldet verify`` and the test suite.

Each check returns a :class:`CriterionResult` with the measured and expected
values; none of the tolerances here may be loosened to make a check pass.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass
from typing import Callable

import mpmath

from . import arithmetic as ar
from . import asymptotics as asy
from . import coulomb_gas as cg
from . import equilibrium as eq
from .hankel import HankelSpec, hankel, hankel_sequence, hankel_via_dirichlet, mzv_display, mzv_expansion, ratio_sequences
from .precision import make_context, zeta_int

__all__ = ["CRITERIA", "CriterionResult", "run_criteria", "run_criterion"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] criterion {self.number:2d} {self.title}: measured {self.measured}; "
            f"expected {self.expected} ({self.seconds:.1f} s)"
        )


@dataclass(frozen=True)
class _Criterion:
    number: int
    title: str
    level: str  # "quick" runs in both levels, "full" only in the full run
    check: Callable[[], tuple[bool, str, str]]
    time_limit: float | None = None


def _sig_digits(value: float, reference: float) -> float:
    if value == reference:
        return math.inf
    return -math.log10(abs(value - reference) / abs(reference))


@functools.lru_cache(maxsize=None)
def _zeta_sequence(r: int, n_max: int, digits: int = 30):
    return tuple(hankel_sequence(ar.ZETA, r, n_max, digits))


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def _c1():
    res = hankel(HankelSpec(ar.ZETA, 2, 0), 50)
    ctx = make_context(80)
    with ctx.workprec():
        z2, z3, z4 = (zeta_int(s, ctx).value for s in (2, 3, 4))
        ref = z2 * z4 - z3**2
        agree = float(-mpmath.log10(abs(res.value.value - ref) / abs(ref))) if res.value.value != ref else math.inf
    ok = res.digits_certified >= 50 and agree >= 50
    return ok, f"{res.digits_certified} certified digits, {agree:.1f} digits agree", ">= 50 digits"


def _c2():
    bad = [e.m for e in ar.h_table(2, 5000) if e.value != ar.sigma2(e.m) - e.m * ar.num_divisors(e.m)]
    return not bad, f"{len(bad)} mismatches for m <= 5000", "0 mismatches"


def _c3():
    failures = 0
    for n in range(1, 5):
        div = ar.superfactorial_square(n)
        fact = math.factorial(n)
        for e in ar.h_table(n, 5000):
            if e.value < 0 or (e.m < fact and e.value != 0) or e.value % div:
                failures += 1
    return failures == 0, f"{failures} violations for n <= 4, m <= 5000", "0 violations"


def _c4():
    ctx = make_context(40)
    notes, ok = [], True
    for series in (ar.ZETA, ar.MOEBIUS):
        for n, r in ((2, 0), (2, 1), (3, 0)):
            spec = HankelSpec(series, n, r)
            det = hankel(spec, 30).value.value
            partial, tail = hankel_via_dirichlet(spec, 2000, ctx)
            with ctx.workprec():
                gap = abs(det - partial.value)
                inside = gap <= tail.value
            ok &= bool(inside)
            notes.append(f"{series.name}({n},{r}) gap {float(gap):.2e} vs tail {float(tail.value):.2e}")
    return ok, "; ".join(notes), "gap <= tail bound for all six cases"


def _c5():
    det2 = float(hankel(HankelSpec(ar.ZETA, 2, 0), 30).value)
    det3 = float(hankel(HankelSpec(ar.ZETA, 3, 0), 30).value)
    e2 = abs(mzv_expansion(2).evaluate()[0] - det2)
    e3 = abs(mzv_expansion(3).evaluate()[0] - det3)
    shown = []
    for n, det in ((2, det2), (3, det3)):
        for conv in ("smallest_first", "largest_first"):
            shown.append(f"display n={n} {conv} deviates by {abs(mzv_display(n, conv).evaluate()[0] - det):.3e}")
    ok = e2 <= 1e-6 and e3 <= 1e-5
    return ok, f"n=2 error {e2:.2e}, n=3 error {e3:.2e}; " + "; ".join(shown), "n=2 <= 1e-6, n=3 <= 1e-5"


def _c6():
    seq = _zeta_sequence(0, 40, 10)
    picked = [res for res in seq if res.spec.n in (10, 20, 30, 40)]
    scaled = [(n, abs(v) / n**2) for n, v in asy.leading_law_residual(picked)]
    values = [v for _, v in scaled]
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    ok = decreasing and values[-1] <= 0.08
    shown = ", ".join(f"n={n}: {v:.4f}" for n, v in scaled)
    return ok, shown, "decreasing and <= 0.08 at n = 40"


def _c7():
    rows = ratio_sequences(35, 30)
    r0 = [(row.n, row.R0) for row in rows if 20 <= row.n <= 35]
    r1 = [(row.n, row.R1) for row in rows if 20 <= row.n <= 35]
    f0 = asy.fit_inverse_series(r0, "inv_2n_plus_1", 5).coefficients[:3]
    f1 = asy.fit_inverse_series(r1, "inv_2n", 5).coefficients[:3]
    t0, t1 = (1.0, -2.0, 7 / 3), (1.0, 1.0, -2 / 3)
    ok = all(abs(c - t) <= 0.01 * abs(t) for c, t in zip(f0 + f1, t0 + t1))
    fmt = lambda cs: "(" + ", ".join(f"{c:.5f}" for c in cs) + ")"  # noqa: E731
    return ok, f"R0 {fmt(f0)}, R1 {fmt(f1)}", "R0 (1, -2, 7/3), R1 (1, 1, -2/3) within 1%"


def _c8():
    sc = asy.scaling_constants(_zeta_sequence(0, 36), _zeta_sequence(1, 35))
    target_a0 = 0.351466738331
    target_ratio = math.exp(9 / 8) / math.sqrt(6)
    d0 = _sig_digits(sc.A0_estimate, target_a0)
    d1 = _sig_digits(sc.ratio_A1_over_A0, target_ratio)
    ok = d0 >= 6 and d1 >= 5
    return (
        ok,
        f"A0 = {sc.A0_estimate:.12f} ({d0:.1f} digits), A1/A0 = {sc.ratio_A1_over_A0:.12f} ({d1:.1f} digits)",
        f"A0 = {target_a0} to 6 digits, A1/A0 = {target_ratio:.12f} to 5 digits",
    )


def _c9():
    h0 = hankel(HankelSpec(ar.ZETA, 100, 0), 10)
    h1 = hankel(HankelSpec(ar.ZETA, 100, 1), 10)
    t0 = -16684 + math.log10(4.9)
    t1 = -16871 + math.log10(4.3)
    ok = abs(h0.log10_value - t0) <= 0.5 and abs(h1.log10_value - t1) <= 0.5
    return ok, f"log10 H0 = {h0.log10_value:.3f}, log10 H1 = {h1.log10_value:.3f}", f"{t0:.3f}, {t1:.3f} +- 0.5"


def _c10():
    ctx = make_context(40)
    s1 = asy.selberg_exact_log(1, ctx).value
    s2 = asy.selberg_exact_log(2, ctx).value
    with ctx.workprec():
        exact_ok = s1 == 0 and abs(s2 - mpmath.log(mpmath.mpf(1) / 6)) <= ctx.tolerance()
    diffs = {n: float(asy.selberg_exact_log(n, ctx).value) - asy.selberg_asymptotic_log(n) for n in range(10, 201)}
    worst_n = max(diffs, key=lambda n: abs(diffs[n]))
    drift = abs(diffs[200] - diffs[100])
    ok = exact_ok and abs(diffs[worst_n]) <= 1.0 and drift <= 0.05
    return (
        ok,
        f"S1, S2 exact: {exact_ok}; max |exact - asymptotic| = {abs(diffs[worst_n]):.4f} at n={worst_n}; drift {drift:.4f}",
        "exact S1 = 0, S2 = log(1/6); |diff| <= 1.0 on [10, 200]; drift <= 0.05",
    )


def _c11():
    notes, ok = [], True
    for d in (eq.RHO, eq.RHO_S, eq.RHO_P):
        val, _ = eq.normalization(d)
        ok &= abs(val - 1) <= 1e-10
        notes.append(f"norm {d.kind} {val - 1:+.1e}")
    xs = [5 * i / 49 for i in range(50)]
    pot = max(abs(eq.log_potential_rho(x) - eq.log_potential_quadrature(eq.RHO, x)[0]) for x in xs)
    ok &= pot <= 1e-8
    notes.append(f"potential {pot:.1e}")
    pv_rho = max(eq.pv_residual(eq.RHO, x) for x in (0.6, 1, 2, 5, 10))
    pv_s = max(eq.pv_residual(eq.RHO_S, x) for x in (1.5, 2, 5, 10))
    ok &= pv_rho <= 1e-6 and pv_s <= 1e-6
    notes.append(f"pv rho {pv_rho:.1e}, pv rhoS {pv_s:.1e}")
    passing = []
    for d in (eq.RHO_P, eq.RHO_P_MIRROR):
        res = max(eq.pv_residual(d, x) for x in (0.5, 1.0, 1.5))
        notes.append(f"pv {d.kind} {res:.3e}")
        if res <= 1e-5:
            passing.append(d.kind)
    ok &= len(passing) == 1
    notes.append(f"passing orientation: {passing[0] if len(passing) == 1 else passing or 'none'}")
    return ok, "; ".join(notes), "norms 1 +- 1e-10, potential <= 1e-8, pv <= 1e-6, exactly one rhoP orientation <= 1e-5"


def _c12():
    worst = 0.0
    for n in (1, 10, 100):
        worst = max(worst, abs(eq.phi_functional(eq.RHO, n) / cg.phi_predicted(n) - 1))
        worst = max(worst, abs(eq.phi_functional(eq.RHO_S, n) / (-2 * math.log(2) * n**2) - 1))
    return worst <= 1e-6, f"max relative error {worst:.1e}", "<= 1e-6"


def _c13():
    c = cg.optimize(200, 0, 100_000)
    ratio = c.phi / cg.phi_predicted(200)
    dist = cg.cdf_distance(c, 200)
    small_ok = all(cg.optimize(n, 0, 100_000).m == cg.exhaustive_optimum(n, 50).m for n in range(2, 7))
    ok = abs(ratio - 1) <= 0.03 and dist <= 0.05 and small_ok
    return (
        ok,
        f"phi/predicted = {ratio:.5f}, sup CDF distance {dist:.4f}, n <= 6 matches exhaustive: {small_ok}",
        "ratio within 3%, distance <= 0.05, exhaustive match",
    )


def _c14():
    z = cg.plancherel_Z(1, 40).Z
    direct = math.fsum(1 / math.factorial(m) ** 2 for m in range(41))
    burnside = all(
        sum(cg.hook_dimension(p) ** 2 for p in cg.partitions(k)) == math.factorial(k) for k in range(7)
    )
    ok = abs(z - direct) <= 1e-10 and burnside
    return ok, f"|Z_1 - direct| = {abs(z - direct):.1e}, sum dim^2 = k!: {burnside}", "<= 1e-10 and identity holds"


CRITERIA = (
    _Criterion(1, "exact 2x2 identity", "quick", _c1, 1.0),
    _Criterion(2, "h_2 closed form", "quick", _c2, 10.0),
    _Criterion(3, "h_n sign, support and divisibility", "quick", _c3, None),
    _Criterion(4, "Dirichlet representation", "quick", _c4, 60.0),
    _Criterion(5, "multiple zeta value expansion", "quick", _c5, None),
    _Criterion(6, "leading law", "quick", _c6, None),
    _Criterion(7, "ratio expansion coefficients", "quick", _c7, None),
    _Criterion(8, "scaling constants", "quick", _c8, None),
    _Criterion(9, "H_100 magnitudes", "full", _c9, None),
    _Criterion(10, "Selberg integral", "quick", _c10, 5.0),
    _Criterion(11, "equilibrium densities", "quick", _c11, 30.0),
    _Criterion(12, "energy functional", "quick", _c12, None),
    _Criterion(13, "Coulomb gas optimization", "quick", _c13, 120.0),
    _Criterion(14, "Plancherel sums", "quick", _c14, 10.0),
)


def run_criterion(number: int) -> CriterionResult:
    crit = next(c for c in CRITERIA if c.number == number)
    start = time.perf_counter()
    try:
        ok, measured, expected = crit.check()
    except Exception as exc:  # a crash is a failed criterion, reported with its cause
        ok, measured, expected = False, f"error: {type(exc).__name__}: {exc}", "no error"
    seconds = time.perf_counter() - start
    if crit.time_limit is not None and seconds > crit.time_limit:
        ok = False
        measured += f"; runtime {seconds:.1f} s over the {crit.time_limit:.0f} s limit"
    return CriterionResult(crit.number, crit.title, bool(ok), measured, expected, seconds)


def run_criteria(level: str = "quick") -> list[CriterionResult]:
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    return [run_criterion(c.number) for c in CRITERIA if level == "full" or c.level == "quick"]
