from __future__ import annotations

import json

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hankeldet.precision import (
    BigReal,
    PrecisionContext,
    ZetaCache,
    get_zeta_cache,
    log_barnes_g,
    log_gamma,
    make_context,
    set_zeta_cache,
    zeta_eta,
    zeta_int,
    zeta_values,
)


def _oracle_zeta(s: int, digits: int) -> mpmath.mpf:
    with mpmath.workdps(digits + 30):
        return mpmath.zeta(s)


def _close(a, b, digits: int) -> bool:
    with mpmath.workdps(digits + 30):
        return abs(a - b) <= mpmath.mpf(10) ** (-digits)


@pytest.fixture(autouse=True)
def fresh_cache():
    set_zeta_cache(None)
    yield
    set_zeta_cache(None)


def test_context_rejects_low_digits():
    with pytest.raises(ValueError):
        PrecisionContext(29)
    ctx = make_context(40)
    assert ctx.working_digits == 60
    assert ctx.working_bits > 60 * 3.3


@pytest.mark.parametrize("s", [2, 3, 4, 7, 12, 40, 101])
@pytest.mark.parametrize("digits", [30, 100, 400])
def test_zeta_matches_mpmath(s, digits):
    got = zeta_int(s, make_context(digits))
    assert got.certified_digits == digits
    assert _close(got.value, _oracle_zeta(s, digits), digits)


def test_zeta_two_is_pi_squared_over_six():
    ctx = make_context(200)
    with mpmath.workdps(230):
        assert _close(zeta_int(2, ctx).value, mpmath.pi**2 / 6, 200)


@pytest.mark.parametrize("s", range(2, 13))
def test_euler_maclaurin_agrees_with_eta_route(s):
    ctx = make_context(80)
    assert _close(zeta_int(s, ctx).value, zeta_eta(s, ctx).value, 80)


@given(st.integers(2, 60), st.integers(30, 150))
def test_extra_digits_extend_not_contradict(s, d):
    lo = zeta_int(s, make_context(d)).value
    hi = zeta_int(s, make_context(d + 30)).value
    assert _close(lo, hi, d)


def test_zeta_rejects_bad_arguments():
    ctx = make_context(30)
    for s in (1, 0, -3, 2.5):
        with pytest.raises(ValueError):
            zeta_int(s, ctx)


def test_zeta_values_batch_matches_single():
    ctx = make_context(60)
    batch = zeta_values(range(2, 20), ctx)
    set_zeta_cache(None)
    for s in range(2, 20):
        assert batch[s] == zeta_values([s], ctx)[s]


@given(st.integers(-(10**40), 10**40).filter(lambda v: v != 0), st.integers(-50, 50), st.integers(1, 40))
def test_bigreal_record_round_trip(mant, exp10, digits):
    with mpmath.workdps(80):
        v = mpmath.mpf(mant) * mpmath.mpf(10) ** exp10
    b = BigReal(v, digits)
    sign, sig, exp = b.to_record()
    assert len(sig) == digits
    back = BigReal.from_record(sign, sig, exp)
    assert back.to_record() == (sign, sig, exp)
    with mpmath.workdps(80):
        assert abs(back.value - v) <= abs(v) * mpmath.mpf(10) ** (1 - digits)


def test_bigreal_zero_and_string():
    assert BigReal(mpmath.mpf(0), 10).to_record() == ("+", "0", 0)
    assert BigReal(mpmath.mpf(-1.5), 3).to_string() == "-1.50e+0"
    assert BigReal(mpmath.mpf(0), 10).log10() == float("-inf")


def test_bigreal_log10_of_tiny_value():
    with mpmath.workdps(50):
        v = mpmath.mpf("4.9e-16684")
    assert BigReal(v, 30).log10() == pytest.approx(-16684 + mpmath.log10(4.9), abs=1e-9)


def test_cache_hit_equals_fresh_value(tmp_path):
    path = tmp_path / "zeta.jsonl"
    ctx = make_context(120)
    set_zeta_cache(path)
    fresh = zeta_values(range(2, 30), ctx)
    assert path.exists()
    set_zeta_cache(path)  # reload from disk
    warm = zeta_values(range(2, 30), ctx)
    assert fresh == warm
    # a lower-precision request is served from the higher-precision entry
    low = make_context(40)
    from_cache = zeta_values([5], low)[5]
    set_zeta_cache(None)
    assert from_cache == zeta_values([5], low)[5]


def test_cache_audit_evicts_corrupted_entry(tmp_path):
    path = tmp_path / "zeta.jsonl"
    set_zeta_cache(path)
    zeta_values([3, 4, 5], make_context(50))
    lines = path.read_text().splitlines()
    rec = json.loads(lines[1])
    assert rec["s"] == 4
    sig = rec["significand"]
    rec["significand"] = sig[:10] + str((int(sig[10]) + 1) % 10) + sig[11:]
    lines[1] = json.dumps(rec)
    path.write_text("\n".join(lines) + "\n")
    cache = ZetaCache(path)
    assert cache.audit() == [4]
    assert 4 not in cache.entries()
    assert sorted(ZetaCache(path).entries()) == [3, 5]


def test_cache_skips_unreadable_lines(tmp_path):
    path = tmp_path / "zeta.jsonl"
    path.write_text("not json\n")
    assert ZetaCache(path).entries() == {}


def test_cache_is_shared_process_wide():
    cache = get_zeta_cache()
    zeta_values([7], make_context(30))
    assert 7 in cache.entries()


def test_log_gamma_matches_mpmath():
    ctx = make_context(50)
    with mpmath.workdps(80):
        assert _close(log_gamma(10.5, ctx).value, mpmath.loggamma(mpmath.mpf(10.5)), 50)
    with pytest.raises(ValueError):
        log_gamma(0, ctx)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 20, 60])
def test_log_barnes_g_matches_mpmath(n):
    ctx = make_context(40)
    with mpmath.workdps(80):
        assert _close(log_barnes_g(n, ctx).value, mpmath.log(mpmath.barnesg(n)), 35)


def test_barnes_recurrence():
    ctx = make_context(40)
    for n in range(2, 101):
        with ctx.workprec():
            diff = log_barnes_g(n + 1, ctx).value - log_barnes_g(n, ctx).value
        assert _close(diff, log_gamma(n, ctx).value, 38)
