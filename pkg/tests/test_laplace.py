"""Tests for the closed-form transforms and the Talbot inversion oracle."""

import math

import mpmath as mp
import numpy as np
import pytest
from scipy.optimize import brentq

from merlang import OracleError, ParameterError, TruncationError
from merlang.coeffs import QueueParams, kernel_f, kernel_g, kernel_h
from merlang.laplace import (LTPoint, invert_lt, lt_busy, lt_event_survival,
                             lt_kernel, lt_mean, lt_p0, lt_pns, lt_service,
                             lt_waiting, phi)

FIG1 = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)
CLASSICAL = QueueParams(lam=6.0, mu=5.0, k=4, c1=1.0, c2=0.0, alpha1=1.0, alpha2=0.5)
MIX2 = QueueParams(lam=2.0, mu=3.0, k=2, c1=0.7, c2=0.3, alpha1=0.9, alpha2=0.45)


# --- independent oracle: per-phase first-passage root -----------------------
#
# The descent transform u(eta) of one phase completion for the embedded
# random walk solves lam*u^(k+1) - (eta+lam+k*mu)*u + k*mu = 0 on (0, 1).
# Everything below follows from renewal arguments, with no coefficient
# series involved, so agreement is a genuine cross-check.

def descent_root(eta, q):
    lam, kmu, k = q.lam, q.k * q.mu, q.k
    big_s = eta + lam + kmu

    def g(u):
        return lam * u ** (k + 1) - big_s * u + kmu

    return brentq(g, 1e-300, 1.0, xtol=1e-300, rtol=8.9e-16)


def classical_p0_lt(eta, q):
    # idle/busy alternating renewal: 1/(eta + lam - lam*B(eta))
    return 1.0 / (eta + q.lam - q.lam * descent_root(eta, q) ** q.k)


def weight(z, q):
    return q.c1 * z ** (q.alpha1 - 1) + q.c2 * z ** (q.alpha2 - 1)


def test_phi_monotone_and_classical():
    zs = np.linspace(0.05, 40.0, 200)
    vals = [phi(z, FIG1) for z in zs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert phi(1.0, FIG1) == pytest.approx(1.0, rel=1e-14)
    assert phi(3.7, CLASSICAL) == pytest.approx(3.7, rel=1e-14)


def test_lt_p0_matches_first_passage_oracle():
    for q in (FIG1, CLASSICAL, MIX2):
        for z in (0.5, 1.0, 2.0, 5.0, 20.0):
            want = weight(z, q) * classical_p0_lt(phi(z, q), q)
            assert lt_p0(z, q) == pytest.approx(want, rel=1e-10), (q.k, z)


def test_lt_busy_matches_first_passage_oracle():
    for q in (FIG1, CLASSICAL, MIX2):
        for z in (0.5, 1.0, 2.0, 5.0):
            ph = phi(z, q)
            want = weight(z, q) * descent_root(ph, q) ** q.k / ph
            assert lt_busy(z, q) == pytest.approx(want, rel=1e-10), (q.k, z)


def test_lt_mean_matches_first_passage_oracle():
    for q in (FIG1, CLASSICAL, MIX2):
        for z in (0.5, 1.0, 2.0, 5.0):
            ph = phi(z, q)
            want = weight(z, q) * (q.k * (q.lam - q.mu) / ph**2
                                   + q.k * q.mu * classical_p0_lt(ph, q) / ph)
            assert lt_mean(z, q) == pytest.approx(want, rel=1e-10), (q.k, z)


def test_governing_identity():
    # forward-equation balance of the empty state in transform space:
    # phi*p0 - weight + lam*p0 - k*mu*p_{1,1} = 0
    for z in (1.0, 2.0, 5.0):
        lhs = ((phi(z, FIG1) + FIG1.lam) * lt_p0(z, FIG1)
               - FIG1.k * FIG1.mu * lt_pns(1, 1, z, FIG1))
        assert abs(lhs - weight(z, FIG1)) / weight(z, FIG1) < 1e-6


def test_initial_values_at_large_z():
    # z*F(z) -> F(0+); the clock tail decays like phi(z)^-1, so the probe
    # sits far out at z = 1e15
    z = 1e15
    assert z * lt_p0(z, FIG1) == pytest.approx(1.0, abs=1e-3)
    assert z * lt_pns(1, 1, z, FIG1) == pytest.approx(0.0, abs=1e-3)
    assert z * lt_mean(z, FIG1) == pytest.approx(0.0, abs=1e-3)
    assert z * lt_busy(z, FIG1) == pytest.approx(0.0, abs=1e-3)
    assert z * lt_event_survival(FIG1.rate_sum, z, FIG1) == pytest.approx(1.0, abs=1e-3)


def test_partial_normalization():
    # z * (p0 + sum of p_{n,s}) rises toward 1 from below as the cutoff grows
    z = 2.0
    p0 = lt_p0(z, FIG1)
    tot3 = p0 + sum(lt_pns(n, s, z, FIG1)
                    for n in range(1, 4) for s in range(1, FIG1.k + 1))
    tot6 = p0 + sum(lt_pns(n, s, z, FIG1)
                    for n in range(1, 7) for s in range(1, FIG1.k + 1))
    assert 0.5 < z * tot3 < z * tot6 <= 1.0 + 1e-3


def test_lt_pns_rejects_bad_state():
    with pytest.raises(ParameterError):
        lt_pns(0, 1, 2.0, FIG1)
    with pytest.raises(ParameterError):
        lt_pns(1, 5, 2.0, FIG1)
    with pytest.raises(ParameterError):
        lt_pns(1, 0, 2.0, FIG1)


def test_event_survival_closed_forms():
    # classical clock: survival transform of Exp(theta) is 1/(theta+z)
    for theta in (6.0, 20.0, 26.0):
        for z in (0.5, 2.0, 10.0):
            assert lt_event_survival(theta, z, CLASSICAL) == pytest.approx(
                1.0 / (theta + z), rel=1e-14)
    # heavier rates survive less, transform ordering follows
    assert lt_event_survival(26.0, 2.0, FIG1) < lt_event_survival(6.0, 2.0, FIG1)
    with pytest.raises(ParameterError):
        lt_event_survival(-1.0, 2.0, FIG1)


def test_service_transform_limits():
    kmu = FIG1.k * FIG1.mu
    assert lt_service(1e-12, FIG1) == pytest.approx(1.0, abs=1e-3)
    z = 3.0
    assert lt_service(z, FIG1) == pytest.approx(
        (kmu / (kmu + phi(z, FIG1))) ** FIG1.k, rel=1e-14)
    q1 = QueueParams(lam=1.0, mu=2.0, k=1, c1=1.0, c2=0.0, alpha1=1.0, alpha2=0.5)
    assert lt_service(z, q1) == pytest.approx(2.0 / (2.0 + z), rel=1e-14)


def test_invert_lt_known_transforms():
    assert invert_lt(lambda s: 1 / (s + 1), 1.0) == pytest.approx(math.exp(-1), abs=1e-8)
    assert invert_lt(lambda s: 1 / s**2, 2.5) == pytest.approx(2.5, abs=1e-8)


def test_invert_lt_deterministic():
    a = invert_lt(lambda s: lt_p0(s, FIG1), 0.7)
    b = invert_lt(lambda s: lt_p0(s, FIG1), 0.7)
    assert a == b


def test_invert_lt_wraps_contour_failures():
    def bad(s):
        raise ValueError("no transform here")

    with pytest.raises(OracleError):
        invert_lt(bad, 1.0)
    with pytest.raises(ParameterError):
        invert_lt(lambda s: 1 / s, 0.0)


def test_kernel_transform_round_trip():
    # invert the single-factor kernel transforms and compare with the
    # direct time-domain evaluation
    for kind, ker in (("f", kernel_f), ("g", kernel_g), ("h", kernel_h)):
        for big_n in (1, 3):
            for t in (0.4, 1.2):
                got = invert_lt(lambda s: lt_kernel(kind, big_n, s, FIG1), t)
                want = ker(big_n, t, FIG1)
                assert got == pytest.approx(want, rel=1e-9), (kind, big_n, t)


def test_waiting_classical_is_memoryless():
    # exponential phases forget their age: transform is (k*mu/(k*mu+z))^n
    # regardless of t0; z on both sides of the region switch
    q = QueueParams(lam=1.0, mu=2.0, k=1, c1=1.0, c2=0.0, alpha1=1.0, alpha2=0.5)
    for z in (5.0, 0.5):
        got = lt_waiting(z, q, t=1.0, t0=0.4, n=2)
        assert got == pytest.approx((2.0 / (2.0 + z)) ** 2, rel=1e-8), z


def test_waiting_fresh_phase_reduction():
    # t0 -> t removes the aged phase: transform tends to k*mu/(k*mu+phi)
    z = 2.0
    got = lt_waiting(z, FIG1, t=1.0, t0=1.0 - 1e-12, n=1)
    want = 20.0 / (20.0 + phi(z, FIG1))
    assert got == pytest.approx(want, rel=3e-4)


def test_waiting_small_z_normalization():
    # the conditional waiting-time density is proper: transform -> 1 as
    # z -> 0+ (approach is only as fast as phi(z), hence the tiny probe)
    q = QueueParams(lam=0.4, mu=0.5, k=1, c1=0.7, c2=0.3, alpha1=0.6, alpha2=0.25)
    got = lt_waiting(1e-16, q, t=1.0, t0=0.4, n=3)
    assert got == pytest.approx(1.0, abs=1e-3)
    assert got <= 1.0 + 1e-12


def test_waiting_extra_customers_multiply():
    # each waiting customer contributes one full service-phase factor
    z = 1.5
    w1 = lt_waiting(z, FIG1, t=0.8, t0=0.798, n=1)
    w3 = lt_waiting(z, FIG1, t=0.8, t0=0.798, n=3)
    factor = 20.0 / (20.0 + phi(z, FIG1))
    assert w3 == pytest.approx(w1 * factor**2, rel=1e-10)


def test_waiting_validation():
    with pytest.raises(ParameterError):
        lt_waiting(2.0, FIG1, t=1.0, t0=1.0, n=1)
    with pytest.raises(ParameterError):
        lt_waiting(2.0, FIG1, t=1.0, t0=0.5, n=0)
    with pytest.raises(ParameterError):
        lt_waiting(-2.0, FIG1, t=1.0, t0=0.5, n=1)
    with pytest.raises(ParameterError):
        lt_waiting(2.0 + 1.0j, FIG1, t=1.0, t0=0.5, n=1)


def test_series_truncation_error_at_marginal_utilization():
    # lam = mu puts the branch point exactly at lam + k*mu; near z = 0 the
    # term ratio approaches 1 and the cap must trip, loudly
    q = QueueParams(lam=1.0, mu=1.0, k=1, c1=1.0, c2=0.0, alpha1=1.0, alpha2=0.5)
    with pytest.raises(TruncationError) as exc:
        lt_p0(1e-9, q)
    assert exc.value.last_term is not None


def test_scalar_type_round_trip():
    a = lt_p0(2.0, FIG1)
    b = lt_p0(mp.mpf(2), FIG1)
    c = lt_p0(2.0 + 0.0j, FIG1)
    assert isinstance(a, float) and isinstance(b, mp.mpf) and isinstance(c, complex)
    assert a == pytest.approx(float(b), rel=1e-13)
    assert c.real == pytest.approx(a, rel=1e-13) and c.imag == 0.0
    with pytest.raises(ParameterError):
        lt_p0(-1.0, FIG1)
    with pytest.raises(ParameterError):
        lt_p0(complex(-1.0, 0.0), FIG1)


def test_ltpoint_validation():
    pt = LTPoint(z=2.0, value=0.25)
    assert pt.z == 2.0 and pt.value == 0.25
    with pytest.raises(ParameterError):
        LTPoint(z=0.0, value=0.25)
    with pytest.raises(ParameterError):
        LTPoint(z=1.0, value=math.inf)
