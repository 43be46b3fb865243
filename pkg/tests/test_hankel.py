from __future__ import annotations

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hankeldet.arithmetic import MOEBIUS, ZETA
from hankeldet.hankel import (
    DefinitenessError,
    HankelSpec,
    build_matrix,
    determinant,
    hankel,
    hankel_bruteforce,
    hankel_sequence,
    hankel_via_dirichlet,
    mzv_display,
    mzv_eval,
    mzv_expansion,
    printed_ratio,
    ratio_sequences,
    required_digits,
)
from hankeldet.precision import make_context


def _mp_hankel(series_fn, n: int, r: int, dps: int) -> mpmath.mpf:
    """Oracle: mpmath's own zeta and determinant at a generous precision."""
    with mpmath.workdps(dps):
        m = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                m[i, j] = series_fn(i + j + 2 + r)
        return mpmath.det(m)


def _rel(a, b) -> float:
    with mpmath.workdps(60):
        return float(abs(a - b) / abs(b))


def test_build_matrix_shapes():
    ctx = make_context(30)
    with mpmath.workdps(50):
        assert build_matrix(HankelSpec(ZETA, 1, 0), ctx)[0][0] == pytest.approx(float(mpmath.zeta(2)))
        m = build_matrix(HankelSpec(ZETA, 2, 1), ctx)
        flat = [float(x) for row in m for x in row]
        assert flat == pytest.approx([float(mpmath.zeta(s)) for s in (3, 4, 4, 5)])
        assert float(build_matrix(HankelSpec(MOEBIUS, 1, 0), ctx)[0][0]) == pytest.approx(6 / float(mpmath.pi) ** 2)


def test_spec_validation():
    with pytest.raises(ValueError):
        HankelSpec(ZETA, 0)
    with pytest.raises(ValueError):
        HankelSpec(ZETA, 2, -1)
    assert list(HankelSpec(ZETA, 3, 1).arguments()) == [3, 4, 5, 6, 7]


def test_determinant_identity_and_2x2():
    ctx = make_context(40)
    eye = [[mpmath.mpf(int(i == j)) for j in range(3)] for i in range(3)]
    assert determinant(eye, ctx, "lu").value == 1
    assert determinant(eye, ctx, "cholesky").value == 1


@given(st.integers(-1000, 1000), st.integers(-1000, 1000), st.integers(-1000, 1000), st.integers(-1000, 1000))
def test_lu_2x2_matches_formula(a, b, c, d):
    ctx = make_context(40)
    m = [[mpmath.mpf(a), mpmath.mpf(b)], [mpmath.mpf(c), mpmath.mpf(d)]]
    got = determinant(m, ctx, "lu").value
    with ctx.workprec():
        assert abs(got - (a * d - b * c)) <= mpmath.mpf(10) ** -40 * max(1, abs(a * d) + abs(b * c))


def test_singular_matrix_gives_zero_with_no_digits():
    ctx = make_context(40)
    m = [[mpmath.mpf(1), mpmath.mpf(2)], [mpmath.mpf(2), mpmath.mpf(4)]]
    res = determinant(m, ctx, "lu")
    assert res.value == 0 and res.certified_digits == 0


def test_cholesky_rejects_indefinite():
    ctx = make_context(40)
    m = [[mpmath.mpf(1), mpmath.mpf(2)], [mpmath.mpf(2), mpmath.mpf(1)]]
    with pytest.raises(DefinitenessError):
        determinant(m, ctx, "cholesky")


def test_transpose_invariance():
    ctx = make_context(60)
    m = build_matrix(HankelSpec(ZETA, 5, 1), ctx)
    t = [list(col) for col in zip(*m)]
    assert m == t
    assert determinant(m, ctx, "lu").value == determinant(t, ctx, "lu").value


def test_h2_is_the_explicit_combination():
    res = hankel(HankelSpec(ZETA, 2, 0), 50)
    with mpmath.workdps(120):
        ref = mpmath.zeta(2) * mpmath.zeta(4) - mpmath.zeta(3) ** 2
    assert res.digits_certified >= 50
    assert _rel(res.value.value, ref) < 1e-50
    assert res.method == "cholesky"
    assert res.log10_value == pytest.approx(-0.47442456, abs=1e-7)


@pytest.mark.parametrize("n,r", [(1, 0), (3, 0), (5, 1), (8, 0), (12, 1)])
def test_zeta_hankel_matches_mpmath_det(n, r):
    res = hankel(HankelSpec(ZETA, n, r), 30)
    ref = _mp_hankel(mpmath.zeta, n, r, required_digits(HankelSpec(ZETA, n, r), 30) + 40)
    assert res.value.value > 0
    assert _rel(res.value.value, ref) < 1e-30


@pytest.mark.parametrize("n,r", [(2, 0), (3, 1), (4, 0)])
def test_moebius_hankel_uses_lu(n, r):
    res = hankel(HankelSpec(MOEBIUS, n, r), 30)
    assert res.method == "lu"
    ref = _mp_hankel(lambda s: 1 / mpmath.zeta(s), n, r, 120)
    assert _rel(res.value.value, ref) < 1e-30


def test_cholesky_and_lu_agree():
    for n in (4, 10, 20):
        spec = HankelSpec(ZETA, n, 0)
        ctx = make_context(required_digits(spec, 40))
        m = build_matrix(spec, ctx)
        a, b = determinant(m, ctx, "cholesky"), determinant(m, ctx, "lu")
        digits = min(a.certified_digits, b.certified_digits)
        assert digits >= 30
        assert _rel(a.value, b.value) < 10.0 ** (-digits + 1)


def test_precision_monotonicity():
    lo = hankel(HankelSpec(ZETA, 6, 0), 20)
    hi = hankel(HankelSpec(ZETA, 6, 0), 60)
    assert _rel(lo.value.value, hi.value.value) < 10.0 ** (-lo.digits_certified + 1)


def test_sequence_matches_single_runs():
    seq = hankel_sequence(ZETA, 1, 8, 30)
    assert [r.spec.n for r in seq] == list(range(1, 9))
    for res in (seq[2], seq[7]):
        single = hankel(res.spec, 30)
        assert _rel(res.value.value, single.value.value) < 1e-29
    assert all(b.value.value < a.value.value for a, b in zip(seq, seq[1:]))


def test_dirichlet_n1_is_zeta_partial_sum():
    ctx = make_context(40)
    part, tail = hankel_via_dirichlet(HankelSpec(ZETA, 1, 0), 100, ctx)
    with ctx.workprec():
        direct = mpmath.fsum(mpmath.mpf(1) / mpmath.mpf(m) ** 2 for m in range(1, 101))
        assert abs(part.value - direct) < mpmath.mpf(10) ** -45
        assert abs(tail.value - (mpmath.zeta(2) - direct)) < mpmath.mpf(10) ** -35


@pytest.mark.parametrize("n,r", [(2, 0), (2, 1), (3, 0), (3, 1)])
def test_triple_agreement_for_zeta(n, r):
    ctx = make_context(40)
    spec = HankelSpec(ZETA, n, r)
    det = hankel(spec, 30).value.value
    part, tail = hankel_via_dirichlet(spec, 500, ctx)
    brute_small = hankel_bruteforce(spec, 30, ctx).value
    brute_big = hankel_bruteforce(spec, 60, ctx).value
    with ctx.workprec():
        assert part.value <= det <= part.value + tail.value
        assert brute_small < brute_big < det


def test_bruteforce_n2_approaches_determinant():
    ctx = make_context(30)
    spec = HankelSpec(ZETA, 2, 0)
    det = float(hankel(spec, 30).value)
    e200 = abs(float(hankel_bruteforce(spec, 200, ctx)) / det - 1)
    e400 = abs(float(hankel_bruteforce(spec, 400, ctx)) / det - 1)
    assert e200 < 2e-2 and e400 < e200
    with pytest.raises(ValueError):
        hankel_bruteforce(HankelSpec(ZETA, 5, 0), 10, ctx)


def test_moebius_needs_the_weighted_coefficients():
    # mu is multiplicative but not completely multiplicative, so h_n(m) mu(m)
    # differs from the exact regrouped coefficient and misses the determinant.
    ctx = make_context(40)
    spec = HankelSpec(MOEBIUS, 2, 1)
    det = hankel(spec, 30).value.value
    plain, tail = hankel_via_dirichlet(spec, 2000, ctx)
    weighted, _ = hankel_via_dirichlet(spec, 2000, ctx, weighted=True)
    with ctx.workprec():
        assert abs(plain.value - det) > tail.value
        assert abs(weighted.value - det) <= tail.value


def test_dirichlet_rejects_non_multiplicative_and_small_m():
    from hankeldet.arithmetic import DirichletSeries

    ctx = make_context(30)
    other = DirichletSeries("plain", lambda m: m % 3)
    with pytest.raises(ValueError):
        hankel_via_dirichlet(HankelSpec(other, 2, 0), 100, ctx)
    with pytest.raises(ValueError):
        hankel_via_dirichlet(HankelSpec(ZETA, 3, 0), 5, ctx)


def test_ratio_sequences_positive_and_follow_expansion():
    rows = ratio_sequences(12, 30)
    assert [row.n for row in rows] == list(range(1, 13))
    for row in rows:
        assert row.R0.value > 0 and row.R1.value > 0
    n = 12
    u0, u1 = 1 / (2 * n + 1), 1 / (2 * n)
    assert float(rows[-1].R0) == pytest.approx(u0 - 2 * u0**2 + 7 / 3 * u0**3, rel=1e-3)
    assert float(rows[-1].R1) == pytest.approx(u1 + u1**2 - 2 / 3 * u1**3, rel=1e-3)


def test_ratio_definitions_match_hankel_values():
    rows = ratio_sequences(5, 30)
    h0 = {k: hankel(HankelSpec(ZETA, k, 0), 30).value.value for k in range(1, 7)}
    h1 = {k: hankel(HankelSpec(ZETA, k, 1), 30).value.value for k in range(1, 6)}
    n = 4
    with mpmath.workdps(50):
        assert _rel(rows[n - 1].R0.value, h0[n + 1] * h1[n - 1] / (h0[n] * h1[n])) < 1e-28
        assert _rel(rows[n - 1].R1.value, h0[n - 1] * h1[n] / (h0[n] * h1[n - 1])) < 1e-28


def test_printed_index_pattern_grows():
    assert printed_ratio(10).value > 1e30


def test_mzv_expansion_structure():
    for n in (2, 3, 4):
        comp = mzv_expansion(n)
        assert comp.signed_total() == 0
        assert comp.weights() == {n * (n + 1)}
    two = mzv_expansion(2)
    assert dict((e, c) for c, e in two.terms) == {(2, 4): 1, (4, 2): 1, (3, 3): -2}


@pytest.mark.parametrize("n,tol", [(2, 1e-6), (3, 1e-5)])
def test_mzv_expansion_reproduces_determinant(n, tol):
    det = float(hankel(HankelSpec(ZETA, n, 0), 30).value)
    assert mzv_expansion(n).evaluate()[0] == pytest.approx(det, abs=tol)


def test_unsymmetrized_display_deviates():
    det = float(hankel(HankelSpec(ZETA, 2, 0), 30).value)
    for conv in ("smallest_first", "largest_first"):
        assert abs(mzv_display(2, conv).evaluate()[0] - det) > 1e-3
    with pytest.raises(ValueError):
        mzv_display(2, "middle_out")


def test_mzv_eval_against_known_values():
    with mpmath.workdps(30):
        z2, z3, z4 = (float(mpmath.zeta(s)) for s in (2, 3, 4))
    # depth one and the sum formula zeta(1,2) = zeta(3) (smallest variable first);
    # an exponent 1 below the top leaves an O(log M / M) remainder
    assert mzv_eval([2])[0] == pytest.approx(z2, abs=1e-12)
    assert mzv_eval([1, 2])[0] == pytest.approx(z3, abs=2e-5)
    # sum_{m1 < m2} 1/(m1 m2^3) = pi^4/360
    assert mzv_eval([1, 3])[0] == pytest.approx(float(mpmath.pi) ** 4 / 360, abs=1e-9)
    # stuffle: zeta(2)^2 = 2 zeta(2,2) + zeta(4)
    assert 2 * mzv_eval([2, 2])[0] + z4 == pytest.approx(z2 * z2, abs=1e-9)
    with pytest.raises(ValueError):
        mzv_eval([2, 1])
