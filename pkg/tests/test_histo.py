import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlhisto.histo import (
    LaplaceModel,
    PrecisionError,
    build_equal_mass,
    build_equal_width,
    codelen_full,
    codelen_retained,
    fit_laplace,
    log_binomial,
    log_multinomial,
    model_order_cost,
)


def exact_log2_multinomial(counts):
    num = math.factorial(sum(counts))
    for c in counts:
        num //= math.factorial(c)
    return math.log2(num)


def exact_log2_binomial(n, k):
    return math.log2(math.comb(n, k))


def test_log_multinomial_examples():
    assert log_multinomial([2, 2]) == pytest.approx(math.log2(6), abs=1e-12)
    assert log_multinomial([1, 1, 1]) == pytest.approx(math.log2(6), abs=1e-12)
    assert log_multinomial([17]) == pytest.approx(0.0, abs=1e-12)
    assert log_multinomial([]) == 0.0


def test_log_binomial_examples():
    assert log_binomial(6, 4) == pytest.approx(math.log2(15), abs=1e-12)
    assert log_binomial(9, 0) == pytest.approx(0.0, abs=1e-12)
    assert log_binomial(4, 2) == pytest.approx(math.log2(6), abs=1e-12)
    with pytest.raises(ValueError):
        log_binomial(3, 4)


def test_log_binomial_exhaustive_small():
    for n in range(61):
        for k in range(n + 1):
            assert abs(log_binomial(n, k) - exact_log2_binomial(n, k)) < 1e-9


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=8).filter(lambda c: sum(c) <= 50))
def test_log_multinomial_matches_big_integers(counts):
    assert abs(log_multinomial(counts) - exact_log2_multinomial(counts)) < 1e-9


def test_model_order_cost():
    assert model_order_cost(2) == pytest.approx(1.0)
    assert model_order_cost(4) == pytest.approx(4.0)
    assert model_order_cost(1) == 0.0
    assert model_order_cost(16) == pytest.approx(4 + 2 * 2)


def test_equal_width_examples():
    h = build_equal_width([0.1, 0.9], 2, (0, 1), 0.01)
    assert h.counts.tolist() == [1, 1]
    h = build_equal_width([2.0] * 5, 4, (2, 6), 0.01)
    assert h.counts.tolist() == [5, 0, 0, 0]
    np.testing.assert_allclose(h.widths, 1.0, atol=1e-12)
    # right edge belongs to the last bin
    assert build_equal_width([6.0], 4, (2, 6), 0.01).counts.tolist() == [0, 0, 0, 1]
    with pytest.raises(ValueError):
        build_equal_width([7.0], 4, (2, 6), 0.01)
    with pytest.raises(PrecisionError):
        build_equal_width([3.0], 4, (2, 6), 2.0)


def test_equal_width_uniform_counts():
    v = np.random.default_rng(0).uniform(0, 1, 1000)
    h = build_equal_width(v, 10, (0, 1), 1e-4)
    assert h.n == 1000
    sd = math.sqrt(1000 * 0.1 * 0.9)
    assert np.all(np.abs(h.counts - 100) <= 5 * sd)


def test_fit_laplace():
    assert fit_laplace([1.0, -1.0], 1.0).lam == pytest.approx(math.log(2), abs=1e-12)
    assert fit_laplace([1.0, -1.0], 1e-3).lam == pytest.approx(math.log1p(1e-3) / 1e-3, abs=1e-12)
    assert fit_laplace([1.0, -1.0], 1e-3).lam == pytest.approx(0.9995, abs=1e-4)
    assert fit_laplace([1e12], 1.0).lam < 1e-11
    with pytest.raises(ValueError, match="degenerate"):
        fit_laplace([0.0, 0.0], 1.0)


@pytest.mark.parametrize("lam,delta", [(1.0, 0.1), (0.05, 1.0), (3.0, 0.001)])
def test_laplace_pmf_normalises(lam, delta):
    model = LaplaceModel(lam, delta, 1.0)
    i = np.arange(int(math.ceil(50 / lam / delta)) + 1)
    assert abs(np.sum(model.pmf(i)) - 1) < 1e-9


def test_equal_mass_two_bins_split_at_zero():
    v = np.array([-3.0, -1.0, 0.5, 2.0, 4.0])
    h = build_equal_mass(v, 2, fit_laplace(v, 0.01), 0.01)
    assert h.edges[1] == 0.0
    assert h.counts.tolist() == [2, 3]
    np.testing.assert_allclose(h.edges, -h.edges[::-1], atol=1e-12)


def test_equal_mass_on_laplace_samples():
    rng = np.random.default_rng(5)
    n, lam = 20000, 0.5
    v = rng.laplace(0, 1 / lam, n)
    delta = 1e-3
    h = build_equal_mass(v, 4, fit_laplace(v, delta), delta)
    sd = math.sqrt(n * 0.25 * 0.75)
    assert np.all(np.abs(h.counts - n / 4) <= 5 * sd)


@pytest.mark.parametrize("m", [2, 3, 5, 8, 16])
def test_equal_mass_widths_grow_away_from_zero(m):
    v = np.random.default_rng(m).laplace(0, 2.0, 5000)
    delta = 1e-3
    h = build_equal_mass(v, m, fit_laplace(v, delta), delta)
    assert np.all(np.diff(h.edges) > 0)
    np.testing.assert_allclose(h.edges, -h.edges[::-1], atol=1e-12)
    w = h.widths
    half = m // 2
    right = w[m - half :]
    assert np.all(np.diff(right) >= 0)
    assert np.all(np.diff(w[:half][::-1]) >= 0)


def test_equal_mass_precision_error():
    v = np.random.default_rng(1).laplace(0, 1.0, 100)
    with pytest.raises(PrecisionError):
        build_equal_mass(v, 64, fit_laplace(v, 0.5), 0.5)


def test_equal_mass_distribution_deviation_shrinks():
    rng = np.random.default_rng(2024)
    devs = []
    for n in (1000, 16000):
        v = rng.laplace(0, 1.0, n)
        h = build_equal_mass(v, 8, fit_laplace(v, 1e-4), 1e-4)
        devs.append(np.max(np.abs(h.counts - n / 8)) / math.sqrt(n))
    # O(sqrt(n)) deviation: the normalised deviation stays bounded
    assert devs[1] < 3 * max(devs[0], 1.0)


def _h22():
    # counts [2, 2], w/delta = 4
    return build_equal_width([0.5, 1.0, 5.0, 6.0], 2, (0, 8), 1.0)


def test_codelen_full_examples():
    h = _h22()
    expected = math.log2(6) + math.log2(15) + 8
    assert codelen_full(h) == pytest.approx(expected, abs=1e-9)
    assert codelen_full(h) == pytest.approx(14.492, abs=1e-3)
    one = build_equal_width([0.3], 1, (0, 1), 1.0)
    assert codelen_full(one) == pytest.approx(1.0, abs=1e-12)
    empty = build_equal_width([], 3, (0, 3), 1.0)
    assert codelen_full(empty) == pytest.approx(0.0, abs=1e-12)


def test_codelen_retained_examples():
    h = _h22()
    assert codelen_retained(h, []) == pytest.approx(math.log2(5) + 2, abs=1e-9)
    assert codelen_retained(h, []) == pytest.approx(4.322, abs=1e-3)
    full = math.log2(6) + math.log2(35) + 8 + 2
    assert codelen_retained(h, [0, 1]) == pytest.approx(full, abs=1e-9)
    assert codelen_retained(h, [0, 1]) == pytest.approx(17.714, abs=1e-3)
    with pytest.raises(IndexError):
        codelen_retained(h, [2])


def test_codelen_retained_single_bin():
    n, m = 7, 3
    h = build_equal_width([0.5] * n, m, (0, 3), 1.0)
    assert codelen_retained(h, [0]) == pytest.approx(exact_log2_binomial(n + 2, n) + m, abs=1e-9)


def test_equal_width_data_cost_reduces():
    v = np.random.default_rng(9).uniform(-3, 3, 200)
    h = build_equal_width(v, 6, (-3, 3), 0.01)
    w = 1.0
    per_bin = float(np.sum(h.counts * np.log2(h.widths / h.delta)))
    assert per_bin == pytest.approx(h.n * math.log2(w / 0.01), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-100, 100, allow_nan=False), min_size=0, max_size=60),
    st.integers(1, 12),
    st.sets(st.integers(0, 11)),
)
def test_codelengths_non_negative(values, m, S):
    h = build_equal_width(values, m, (-100, 100), 0.5)
    assert h.n == len(values)
    assert codelen_full(h) >= 0
    assert codelen_retained(h, [i for i in S if i < m]) >= 0
