from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import iv

from hankeldet import coulomb_gas as cg


def _phi_naive(m, n):
    return -2 * n * sum(math.log(x) for x in m) + 2 * sum(math.log(abs(a - b)) for a, b in itertools.combinations(m, 2))


def test_phi_small_examples():
    assert cg.phi_discrete([1], 1) == 0.0
    assert cg.phi_discrete([1, 2], 2) == pytest.approx(-4 * math.log(2))
    assert cg.phi_discrete([1, 2, 5], 3) == pytest.approx(-6 * math.log(10) + 2 * math.log(4 * 3))


@given(st.sets(st.integers(1, 500), min_size=1, max_size=25))
def test_phi_matches_naive_and_is_symmetric(charges):
    m = sorted(charges)
    n = len(m)
    assert cg.phi_discrete(m, n) == pytest.approx(_phi_naive(m, n), rel=1e-12, abs=1e-9)
    assert cg.phi_unordered(list(reversed(m)), n) == cg.phi_discrete(m, n)


def test_phi_rejects_bad_configurations():
    with pytest.raises(ValueError):
        cg.phi_discrete([1, 1], 2)
    with pytest.raises(ValueError):
        cg.phi_discrete([2, 1], 2)
    with pytest.raises(ValueError):
        cg.phi_discrete([0, 1], 2)
    with pytest.raises(ValueError):
        cg.phi_discrete([1, 2], 3)


def test_configuration_validation():
    with pytest.raises(ValueError):
        cg.Configuration((3, 2), 0.0)
    with pytest.raises(ValueError):
        cg.Configuration((), 0.0)
    assert cg.Configuration((1, 4), 0.0).n == 2


def test_phi_predicted_values():
    assert cg.phi_predicted(1) == pytest.approx(1.5 - math.log(2))
    assert cg.phi_predicted(100) == pytest.approx(-1e4 * (math.log(200) - 1.5))


@pytest.mark.parametrize("n", [1, 5, 30])
def test_optimize_is_deterministic_and_self_consistent(n):
    a = cg.optimize(n, 7, 5000)
    b = cg.optimize(n, 7, 5000)
    assert a == b
    assert a.n == n
    assert a.phi == cg.phi_discrete(a.m, n)
    assert a.phi >= cg.phi_discrete(range(1, n + 1), n)


def test_optimize_zero_budget_returns_start():
    c = cg.optimize(6, 0, 0)
    assert c.m == tuple(range(1, 7))
    with pytest.raises(ValueError):
        cg.optimize(0, 0, 10)
    with pytest.raises(ValueError):
        cg.optimize(3, 0, -1)


@given(st.integers(2, 12), st.integers(0, 2**16))
def test_optimize_never_decreases_energy(n, seed):
    c = cg.optimize(n, seed, 500)
    assert c.phi >= cg.phi_discrete(range(1, n + 1), n) - 1e-9


def test_exhaustive_known_optima():
    expected = {2: (1, 2), 3: (1, 2, 5), 4: (1, 2, 3, 8), 5: (1, 2, 3, 5, 15), 6: (1, 2, 3, 4, 7, 22)}
    for n, m in expected.items():
        assert cg.exhaustive_optimum(n, 50).m == m


def test_exhaustive_agrees_with_brute_force_over_all_tuples():
    # without fixing m_1 = 1
    n, cap = 3, 25
    best = max(itertools.combinations(range(1, cap + 1), n), key=lambda m: _phi_naive(m, n))
    assert cg.exhaustive_optimum(n, cap).m == best


@pytest.mark.parametrize("n", range(2, 7))
def test_local_search_finds_exhaustive_optimum(n):
    assert cg.optimize(n, 0, 100_000).m == cg.exhaustive_optimum(n, 50).m


def test_best_of_picks_max_and_lowest_seed_on_ties():
    seed, c = cg.best_of(4, [3, 1, 2], 20_000)
    assert seed == 1
    assert c.m == (1, 2, 3, 8)
    with pytest.raises(ValueError):
        cg.best_of(4, [], 10)


def test_best_of_parallel_matches_serial():
    assert cg.best_of(8, [0, 1], 3000, workers=2) == cg.best_of(8, [0, 1], 3000)


@pytest.mark.parametrize("n", [100, 150, 200])
def test_large_optimum_close_to_continuum_energy(n):
    c = cg.optimize(n, 0, 100_000)
    ratio = c.phi / cg.phi_predicted(n)
    assert 1.0 <= ratio <= 1.05


def test_empirical_density_close_to_equilibrium():
    c = cg.optimize(200, 0, 100_000)
    assert cg.cdf_distance(c, 200) < 0.02
    cdf = cg.empirical_cdf(c, 200)
    assert cdf[-1][1] == 1.0
    assert all(b[0] > a[0] for a, b in zip(cdf, cdf[1:]))
    with pytest.raises(ValueError):
        cg.empirical_cdf(c, 199)


def test_partitions_counts_and_dimension_identity():
    counts = [sum(1 for _ in cg.partitions(k)) for k in range(11)]
    assert counts == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
    for k in range(1, 11):
        assert sum(cg.hook_dimension(p) ** 2 for p in cg.partitions(k)) == math.factorial(k)
    assert cg.hook_dimension(cg.Partition((2, 1))) == 2
    assert cg.hook_dimension(cg.Partition((3, 2))) == 5


def test_partition_validation_and_shift_round_trip():
    with pytest.raises(ValueError):
        cg.Partition((1, 2))
    with pytest.raises(ValueError):
        cg.Partition((2, 0))
    p = cg.Partition((3, 1))
    assert p.shifted(3) == (5, 2, 0)
    assert cg.Partition.from_shifted(p.shifted(3)) == p
    with pytest.raises(ValueError):
        p.shifted(1)


def test_plancherel_weight_two_boxes():
    w = cg.plancherel_weight(cg.Partition((1, 1)), 2)
    assert cg.Partition((1, 1)).shifted(2) == (2, 1)
    assert w.exact == Fraction(1, 4)
    assert not w.log_space
    assert float(w) == 0.25


@pytest.mark.parametrize("k", range(1, 9))
def test_plancherel_ratio_is_one(k):
    for p in cg.partitions(k):
        for n in range(len(p.parts), len(p.parts) + 3):
            assert cg.plancherel_ratio(p, n) == 1


def test_plancherel_log_space_for_large_partitions():
    p = cg.Partition((20, 15))
    w = cg.plancherel_weight(p, 2)
    assert w.log_space
    expected = 2 * (math.log(cg.hook_dimension(p)) - math.lgamma(36))
    assert w.log_value == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        cg.plancherel_ratio(p, 2)


def _gessel(n: int) -> float:
    """Toeplitz determinant of modified Bessel functions."""
    mat = np.array([[iv(abs(j - k), 2.0) for k in range(n)] for j in range(n)])
    return float(np.linalg.det(mat))


@pytest.mark.parametrize("n,m_max", [(1, 40), (2, 30), (3, 22)])
def test_plancherel_Z_matches_bessel_determinant(n, m_max):
    z = cg.plancherel_Z(n, m_max)
    assert z.Z == pytest.approx(_gessel(n), rel=1e-12)
    assert z.error_estimate < 1e-12


def test_plancherel_Z_increasing_in_n_and_cutoff():
    zs = [cg.plancherel_Z(n, 18).Z for n in (1, 2, 3)]
    assert zs[0] < zs[1] < zs[2]
    assert cg.plancherel_Z(2, 5).Z < cg.plancherel_Z(2, 10).Z
    with pytest.raises(ValueError):
        cg.plancherel_Z(3, 1)
