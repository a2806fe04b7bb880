"""Tests for series constants and the scalar convolution kernels."""

import math

import numpy as np
import pytest

from merlang import ParameterError
from merlang.coeffs import (QueueParams, SeriesConstants, coeff_a0_A0, coeff_block,
                            effective_orders, kernel_f, kernel_g, kernel_h, kernel_grid)
from merlang.specfun import MLParams, mittag_leffler3

FIG1 = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)


def brute_A0(m, r, lam, mu, k):
    from fractions import Fraction
    kmu = Fraction(k) * Fraction(mu)
    val = (Fraction(m) * Fraction(lam) ** r * kmu ** (m + r * k - 1)
           * math.factorial(m + r * (k + 1) - 1))
    return float(val / (math.factorial(r) * math.factorial(m + r * k)))


def brute_B(n, s, i, lam, mu, k):
    from fractions import Fraction
    kmu = Fraction(k) * Fraction(mu)
    val = (Fraction(lam) ** (n + i) * kmu ** (k * (i + 1) - s)
           * math.factorial(n + k - s + i * (k + 1)))
    return float(val / (math.factorial(k * (i + 1) - s) * math.factorial(n + i)))


def test_a0_trivial_cases():
    a0, A0 = coeff_a0_A0(1, 0, FIG1)
    assert a0 == 1 and A0 == pytest.approx(1.0, rel=1e-14)
    assert coeff_a0_A0(2, 3, FIG1)[0] == 2 + 3 * 5


def test_A0_value_m1_r1():
    a0, A0 = coeff_a0_A0(1, 1, FIG1)
    assert a0 == 6
    assert A0 == pytest.approx(960000.0, rel=1e-12)


def test_A0_against_exact_rational():
    for m, r in [(1, 0), (1, 2), (3, 1), (2, 4), (5, 5)]:
        _, A0 = coeff_a0_A0(m, r, FIG1)
        assert A0 == pytest.approx(brute_A0(m, r, 6, 5, 4), rel=1e-12), (m, r)


def test_block_delta_and_branches():
    blk = coeff_block(1, 1, 0, 1, 0, FIG1)
    assert blk.delta == 1 - 1 + 1 * 5 == 5
    assert blk.nu == blk.delta + blk.a0
    assert blk.C == pytest.approx(FIG1.k * FIG1.mu * blk.B * blk.A0, rel=1e-14)
    # s = k forces the (n+1, 1) branch of D and pi_
    blk_k = coeff_block(1, 4, 0, 1, 0, FIG1)
    assert blk_k.pi_ == (2 - 1 + 1 * 5) + blk_k.a0
    assert blk_k.D == pytest.approx(
        FIG1.k * FIG1.mu * brute_B(2, 1, 0, 6, 5, 4) * blk_k.A0, rel=1e-12)
    # s < k uses (n, s+1)
    blk_m = coeff_block(2, 3, 1, 1, 0, FIG1)
    assert blk_m.delta == 2 - 3 + 2 * 5 == 9
    assert blk_m.B == pytest.approx(brute_B(2, 3, 1, 6, 5, 4), rel=1e-12)
    assert blk_m.pi_ == (2 - 4 + 2 * 5) + blk_m.a0


def test_index_constants_increase():
    prev = 0
    for i in range(5):
        blk = coeff_block(2, 2, i, 1, 1, FIG1)
        assert blk.delta > prev
        prev = blk.delta
    a_prev = 0
    for m, r in [(1, 0), (2, 0), (2, 1), (3, 2)]:
        a0, _ = coeff_a0_A0(m, r, FIG1)
        assert a0 > a_prev
        a_prev = a0


def test_queue_params_validation():
    with pytest.raises(ParameterError):
        QueueParams(lam=-6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)
    with pytest.raises(ParameterError):
        QueueParams(lam=6.0, mu=5.0, k=0, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)
    with pytest.raises(ParameterError):
        QueueParams(lam=6.0, mu=5.0, k=4, c1=0.5, c2=0.6, alpha1=0.5, alpha2=0.3)
    with pytest.raises(ParameterError):
        QueueParams(lam=6.0, mu=5.0, k=4, c1=0.9, c2=0.1, alpha1=1.0, alpha2=0.3)
    with pytest.raises(ParameterError):
        QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.2, alpha2=0.3)
    # alpha1 = 1 with c1 = 1 is the classical-limit mode and must pass
    QueueParams(lam=6.0, mu=5.0, k=4, c1=1.0, c2=0.0, alpha1=1.0, alpha2=0.3)


def test_effective_orders_swap():
    q0 = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.0, c2=1.0, alpha1=0.5, alpha2=0.3)
    c1, a1, c2, a2 = effective_orders(q0)
    assert c1 == 1.0 and a1 == 0.3 and c2 == 0.0
    assert effective_orders(FIG1) == (0.4, 0.5, 0.6, 0.3)


def test_kernel_f_single_order_reduction():
    # c2 = 0 kills every h >= 1 term: f_1(t) = E^1_{a1,1}(-(lam+k mu) t^{a1})
    q = QueueParams(lam=6.0, mu=5.0, k=4, c1=1.0, c2=0.0, alpha1=0.5, alpha2=0.3)
    for t in (0.2, 0.7, 2.0):
        ref = mittag_leffler3(MLParams(0.5, 1.0, 1.0), -26.0 * np.sqrt(t))
        assert kernel_f(1, t, q) == pytest.approx(ref, rel=1e-12)


def test_kernel_h_classical_reduction():
    # alpha1 = 1, c1 = 1: h_1(t) = t E^1_{1,2}(-(lam+k mu) t) = (1-e^{-26t})/26
    q = QueueParams(lam=6.0, mu=5.0, k=4, c1=1.0, c2=0.0, alpha1=1.0, alpha2=0.3)
    for t in (0.1, 0.5, 1.5):
        ref = (1.0 - np.exp(-26.0 * t)) / 26.0
        assert kernel_h(1, t, q) == pytest.approx(ref, rel=1e-12)


def test_kernel_c1_zero_swaps_orders():
    q0 = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.0, c2=1.0, alpha1=0.5, alpha2=0.3)
    ref = mittag_leffler3(MLParams(0.3, 1.0, 1.0), -26.0 * 0.5 ** 0.3)
    assert kernel_f(1, 0.5, q0) == pytest.approx(ref, rel=1e-12)


def test_kernel_partial_sums_bracket():
    # with c2 > 0 the outer sum alternates; at desk scale (argument small
    # enough that every ML factor is still positive, w t^{a1} < ~1.2) the
    # odd/even partials bracket the limit
    q = QueueParams(lam=0.6, mu=0.5, k=1, c1=0.7, c2=0.3, alpha1=0.5, alpha2=0.3)
    t = 0.25
    w = q.rate_sum / q.c1
    ratio = q.c2 / q.c1
    partial = 0.0
    partials = []
    for h in range(10):
        beta = 0.5 + 0.2 * h + (1.0 - 0.5) / 1.0
        ml = mittag_leffler3(MLParams(0.5, beta, h + 1.0), -w * np.sqrt(t))
        assert ml > 0.0, h
        partial += (-ratio) ** h * t ** (0.2 * h) * ml
        partials.append(partial)
    limit = kernel_f(1, t, q) / t ** (0.5 - (0.5 - 1.0) / 1.0 - 1.0)
    partials = np.array(partials)
    assert np.all(partials[0::2] >= limit - 1e-12)
    assert np.all(partials[1::2] <= limit + 1e-12)


def test_kernel_grid_matches_scalar():
    ts = np.array([0.1, 0.6, 1.7])
    for kind, fn in (("f", kernel_f), ("g", kernel_g), ("h", kernel_h)):
        grid = kernel_grid(kind, 3, ts, FIG1)
        for j, t in enumerate(ts):
            assert fn(3, float(t), FIG1) == pytest.approx(grid[j], rel=1e-11)


def test_kernel_argument_validation():
    with pytest.raises(ParameterError):
        kernel_f(0, 0.5, FIG1)
    with pytest.raises(ParameterError):
        kernel_f(1, 0.0, FIG1)
    with pytest.raises(ParameterError):
        kernel_grid("x", 1, np.array([0.5]), FIG1)


def test_series_constants_positive():
    blk = coeff_block(3, 2, 2, 2, 1, FIG1)
    assert isinstance(blk, SeriesConstants)
    assert min(blk.a0, blk.delta, blk.nu, blk.pi_) > 0
    assert min(blk.A0, blk.B, blk.C, blk.D) > 0
