"""Closed-form Laplace transforms of the transient queue quantities.

Every time-domain series in this package has an exact transform that is a
power series in 1/(lam + k*mu + phi(z)) with positive coefficients, plus a
few rational-in-phi closed forms.  This module evaluates those transforms
for real or complex z and provides a fixed-Talbot numerical inversion used
as a cross-validation oracle.  Series sums run in mpmath because the Talbot
contour amplifies node-local rounding noise by roughly exp(2*nodes/5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.special import gammaln

from .coeffs import QueueParams, effective_orders
from .errors import OracleError, ParameterError, TruncationError

TALBOT_NODES = 64
WORK_DPS = 40

# longest power-series prefix ever summed; the term ratio approaches
# (branch-point radius)/|lam+k*mu+phi| which stays below 0.97 for z >= 0.5
# at moderate utilization, so a few thousand terms is already generous
TERM_CAP_LT = 6000
QUIET_TERMS = 3

# conditional waiting-time double sums
WAIT_CAP = 200_000
WAIT_REGION_MARGIN = 0.85
WAIT_DPS_CAP = 3000

_LN10 = math.log(10.0)

_A0_TABLES: dict = {}
_B_TABLES: dict = {}
_BUSY_TABLES: dict = {}


@dataclass(frozen=True)
class LTPoint:
    """One sampled transform value.

    Attributes
    ----------
    z : float
        Transform variable, z > 0.
    value : float
        Transform value at z.
    """

    z: float
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.z) and self.z > 0.0):
            raise ParameterError("transform variable must be positive and finite")
        if not math.isfinite(self.value):
            raise ParameterError("transform value must be finite")


def _coerce(z):
    """Map z to an mpmath scalar, remembering how to map the result back."""
    if isinstance(z, mp.mpc):
        return z, "mpc"
    if isinstance(z, mp.mpf):
        return z, "mpf"
    if isinstance(z, complex):
        return mp.mpc(complex(z)), "complex"
    if isinstance(z, (int, float, np.integer, np.floating)):
        return mp.mpf(float(z)), "float"
    raise ParameterError("transform variable must be a real or complex scalar")


def _back(val, tag):
    if tag == "float":
        return float(val.real if isinstance(val, mp.mpc) else val)
    if tag == "complex":
        return complex(val)
    if tag == "mpf" and not isinstance(val, mp.mpc):
        return val
    if tag == "mpf":
        return val.real
    return val


def _check_domain(zm):
    # principal-branch powers need z off the closed negative real axis
    if isinstance(zm, mp.mpc):
        if zm.imag == 0 and zm.real <= 0:
            raise ParameterError("transform variable must avoid the branch cut")
        if zm == 0:
            raise ParameterError("transform variable must be nonzero")
    else:
        if not (mp.isfinite(zm) and zm > 0):
            raise ParameterError("transform variable must be positive and finite")


def phi(z, q):
    """Mixing exponent c1*z^a1 + c2*z^a2 of the random clock.

    Strictly increasing on z > 0; extends to complex z with principal
    branch powers.

    Parameters
    ----------
    z : scalar
        Real positive or complex (off the negative real axis) argument.
    q : QueueParams
        Queue parameter set.

    Returns
    -------
    scalar
        Same scalar family as the input.
    """
    zm, tag = _coerce(z)
    _check_domain(zm)
    val = q.c1 * zm**q.alpha1 + q.c2 * zm**q.alpha2
    return _back(val, tag)


def _phi_mp(zm, q):
    return q.c1 * zm**q.alpha1 + q.c2 * zm**q.alpha2


def _weight_mp(zm, q):
    # numerator weight c1*z^(a1-1) + c2*z^(a2-1) shared by every transform
    return q.c1 * zm ** (q.alpha1 - 1.0) + q.c2 * zm ** (q.alpha2 - 1.0)


def _tol():
    return mp.mpf(10) ** (-(mp.mp.dps - 8))


# ---------------------------------------------------------------------------
# coefficient tables
#
# The log-amplitudes are computed once per parameter set with vectorized
# gammaln.  Their float64 error acts like a smooth relative perturbation of
# the transform itself, so it passes through Talbot inversion at its own
# size (~1e-13) instead of being amplified the way node-local noise is.
# ---------------------------------------------------------------------------


def _build_a0(q, n_max):
    k = q.k
    lam = q.lam
    kmu = k * q.mu
    logw = np.full(n_max + 1, -np.inf)
    r = 0
    while r * (k + 1) + 1 <= n_max:
        m = np.arange(1, n_max - r * (k + 1) + 1, dtype=np.float64)
        a0 = m + r * (k + 1)
        la = (
            np.log(m)
            + r * math.log(lam)
            + (m + r * k - 1.0) * math.log(kmu)
            + gammaln(a0)
            - gammaln(r + 1.0)
            - gammaln(m + r * k + 1.0)
        )
        lo = r * (k + 1) + 1
        np.logaddexp(logw[lo : n_max + 1], la, out=logw[lo : n_max + 1])
        r += 1
    return logw[1:], np.arange(1, n_max + 1)


def _a0_terms(q, count):
    cached = _A0_TABLES.get(q)
    if cached is None or len(cached[0]) < count:
        cached = _build_a0(q, count)
        _A0_TABLES[q] = cached
    return cached


def _build_b(q, n, s, i_max):
    k = q.k
    lam = q.lam
    kmu = k * q.mu
    i = np.arange(0, i_max, dtype=np.float64)
    delta = n - s + (i + 1.0) * (k + 1.0)
    logb = (
        (n + i) * math.log(lam)
        + (k * (i + 1.0) - s) * math.log(kmu)
        + gammaln(delta)
        - gammaln(k * (i + 1.0) - s + 1.0)
        - gammaln(n + i + 1.0)
    )
    return logb, delta.astype(np.int64)


def _b_terms(q, n, s, count):
    key = (q, n, s)
    cached = _B_TABLES.get(key)
    if cached is None or len(cached[0]) < count:
        cached = _build_b(q, n, s, count)
        _B_TABLES[key] = cached
    return cached


def _build_busy(q, h_max):
    k = q.k
    lam = q.lam
    kmu = k * q.mu
    h = np.arange(0, h_max, dtype=np.float64)
    a0 = k + h * (k + 1.0)
    la = (
        math.log(k)
        + h * math.log(lam)
        + (k + h * k - 1.0) * math.log(kmu)
        + gammaln(a0)
        - gammaln(h + 1.0)
        - gammaln(k + h * k + 1.0)
    )
    return la, a0.astype(np.int64)


def _busy_terms(q, count):
    cached = _BUSY_TABLES.get(q)
    if cached is None or len(cached[0]) < count:
        cached = _build_busy(q, count)
        _BUSY_TABLES[q] = cached
    return cached


def _sum_series(provider, w, cap=TERM_CAP_LT):
    """Sum exp(logc_j)/w^expo_j with term-ratio stopping.

    provider(count) must return (logc, expo) arrays of length >= count
    (or the provider's hard maximum).  Raises TruncationError when the
    tail has not flattened out within cap terms.
    """
    tol = _tol()
    lw = mp.log(w)
    acc = mp.mpc(0) if isinstance(w, mp.mpc) else mp.mpf(0)
    logc, expo = provider(min(cap, 64))
    have = len(logc)
    j = 0
    quiet = 0
    rising = 0
    prev_mag = mp.mpf(0)
    while j < cap:
        if j >= have:
            logc, expo = provider(min(cap, 2 * have))
            have = len(logc)
            if j >= have:
                break
        term = mp.exp(mp.mpf(float(logc[j])) - int(expo[j]) * lw)
        acc += term
        mag = abs(term)
        if mag <= tol * abs(acc):
            quiet += 1
            if quiet >= QUIET_TERMS:
                return acc
        else:
            quiet = 0
        if mag > prev_mag:
            rising += 1
            if rising >= 60 and mag > 1e6 * (abs(acc) + 1):
                raise TruncationError(
                    "Laplace-domain series diverges at this argument",
                    last_term=float(mag),
                )
        else:
            rising = 0
        prev_mag = mag
        j += 1
    raise TruncationError(
        f"Laplace-domain series did not settle within {cap} terms",
        last_term=float(prev_mag),
    )


def _state_sum(q, w):
    return _sum_series(lambda c: _a0_terms(q, c), w)


def _block_sum(q, n, s, w):
    return _sum_series(lambda c: _b_terms(q, n, s, c), w)


# ---------------------------------------------------------------------------
# closed-form transforms
# ---------------------------------------------------------------------------


def lt_p0(z, q):
    """Transform of the empty-system probability.

    Evaluates weight(z) * sum over the state ladder of A0 coefficients
    against powers of 1/(lam + k*mu + phi(z)).

    Parameters
    ----------
    z : scalar
        Real positive or complex transform variable.
    q : QueueParams
        Queue parameter set.

    Returns
    -------
    scalar

    Raises
    ------
    TruncationError
        If the coefficient series fails to converge at this argument.
    """
    zm, tag = _coerce(z)
    _check_domain(zm)
    with mp.workdps(max(WORK_DPS, mp.mp.dps)):
        w = q.rate_sum + _phi_mp(zm, q)
        val = _weight_mp(zm, q) * _state_sum(q, w)
    return _back(val, tag)


def lt_pns(n, s, z, q):
    """Transform of the probability of n customers with s phases remaining.

    The three coefficient families share one denominator base, so the two
    double sums collapse exactly into products of single sums:
    weight * (S_B(n,s) + k*mu*S_A*(S_B(n,s) - S_B(next))) with next equal
    to (n,s+1) below the phase ceiling and (n+1,1) at it.

    Parameters
    ----------
    n : int
        Customers in system, n >= 1.
    s : int
        Remaining service phases of the customer in service, 1 <= s <= k.
    z : scalar
        Transform variable.
    q : QueueParams
        Queue parameter set.

    Returns
    -------
    scalar
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError("customer count must be an integer >= 1")
    if not isinstance(s, (int, np.integer)) or not 1 <= s <= q.k:
        raise ParameterError("phase index must be an integer in [1, k]")
    zm, tag = _coerce(z)
    _check_domain(zm)
    nxt = (n, s + 1) if s < q.k else (n + 1, 1)
    with mp.workdps(max(WORK_DPS, mp.mp.dps)):
        w = q.rate_sum + _phi_mp(zm, q)
        sb = _block_sum(q, n, s, w)
        sb_next = _block_sum(q, *nxt, w)
        sa = _state_sum(q, w)
        kmu = q.k * q.mu
        val = _weight_mp(zm, q) * (sb + kmu * sa * (sb - sb_next))
    return _back(val, tag)


def lt_mean(z, q):
    """Transform of the mean number of phases in the system.

    Equals k*(lam - mu)/(z*phi(z)) plus (k*mu/z) times the empty-state
    coefficient sum.
    """
    zm, tag = _coerce(z)
    _check_domain(zm)
    with mp.workdps(max(WORK_DPS, mp.mp.dps)):
        ph = _phi_mp(zm, q)
        w = q.rate_sum + ph
        kmu = q.k * q.mu
        val = q.k * (q.lam - q.mu) / (zm * ph) + kmu / zm * _state_sum(q, w)
    return _back(val, tag)


def lt_busy(z, q):
    """Transform of the busy-period distribution function.

    The busy period is a first passage from k phases to the empty state,
    so its transform is (k*mu/z) times the empty-state coefficient sum
    restricted to the diagonal m = k.
    """
    zm, tag = _coerce(z)
    _check_domain(zm)
    with mp.workdps(max(WORK_DPS, mp.mp.dps)):
        w = q.rate_sum + _phi_mp(zm, q)
        kmu = q.k * q.mu
        val = kmu / zm * _sum_series(lambda c: _busy_terms(q, c), w)
    return _back(val, tag)


def lt_event_survival(theta, z, q):
    """Transform of the survival function of an event time with rate theta.

    Exact rational form weight(z)/(theta + phi(z)); no truncation.  The
    rate theta is lam for inter-arrival times, k*mu for inter-phase times
    and lam + k*mu for sojourn times.
    """
    if not (isinstance(theta, (int, float, np.floating)) and math.isfinite(float(theta)) and theta > 0):
        raise ParameterError("event rate must be positive and finite")
    zm, tag = _coerce(z)
    _check_domain(zm)
    val = _weight_mp(zm, q) / (float(theta) + _phi_mp(zm, q))
    return _back(val, tag)


def lt_service(z, q):
    """Transform of the service-time density: (k*mu/(k*mu + phi(z)))^k."""
    zm, tag = _coerce(z)
    _check_domain(zm)
    kmu = q.k * q.mu
    val = (kmu / (kmu + _phi_mp(zm, q))) ** q.k
    return _back(val, tag)


def lt_kernel(kind, big_n, z, q):
    """Single-factor transform of one convolution kernel.

    The N-fold self-convolutions in the time-domain series all come from
    kernels whose transforms are z^p/(z^a1 + (c2/c1) z^a2 + (lam+k*mu)/c1)
    with p = (a1-1)/N for kind 'f', (a2-1)/N for 'g' and -1/N for 'h'
    (orders swap when c1 = 0).

    Parameters
    ----------
    kind : str
        One of 'f', 'g', 'h'.
    big_n : int
        Convolution order N >= 1.
    z : scalar
        Transform variable.
    q : QueueParams
        Queue parameter set.

    Returns
    -------
    scalar
    """
    if kind not in ("f", "g", "h"):
        raise ParameterError("kernel kind must be 'f', 'g' or 'h'")
    if not isinstance(big_n, (int, np.integer)) or big_n < 1:
        raise ParameterError("convolution order must be an integer >= 1")
    zm, tag = _coerce(z)
    _check_domain(zm)
    cl, al, cs, as2 = effective_orders(q)
    if kind == "f":
        p = (al - 1.0) / big_n
    elif kind == "g":
        p = (as2 - 1.0) / big_n
    else:
        p = -1.0 / big_n
    den = zm**al + (cs / cl) * zm**as2 + q.rate_sum / cl
    val = zm**p / den
    return _back(val, tag)


# ---------------------------------------------------------------------------
# conditional waiting time
# ---------------------------------------------------------------------------


def _lower_tail_factor(rho, x, ltau, lz):
    # P(rho+1, x) * z^-rho with the powers combined so only one rgamma and
    # one exp are paid per term: equals
    # exp(rho*ln(tau) + ln(x) - x) / Gamma(rho+2) * sum_j x^j / prod(rho+1+j)
    if x > rho + 41:
        return (1 - mp.gammainc(rho + 1, x, regularized=True)) * mp.exp(-rho * lz)
    head = mp.exp(rho * ltau + mp.log(x) - x) * mp.rgamma(rho + 2)
    term = mp.mpf(1)
    acc = term
    j = 1
    eps = mp.mpf(10) ** (-(mp.mp.dps + 5))
    while j < 100000:
        term *= x / (rho + 1 + j)
        acc += term
        if term <= eps * acc:
            return head * acc
        j += 1
    raise TruncationError("lower incomplete gamma series stalled", last_term=float(term))


def _double_series(mode, q, theta, zm, tau, shift, floor=None, cap=WAIT_CAP):
    """One of the (m, r) double sums behind event-time conditioning.

    mode 'time'  : sum of coef * tau^rho / Gamma(rho+1)      (survival value)
    mode 'upper' : sum of coef * Q(rho+1, z*tau) * z^-rho    (tail transform)
    mode 'lower' : sum of coef * P(rho+1, z*tau) * z^-rho
    with rho = a1*m + (a1-a2)*(r+shift) and coefficients
    (-cs/cl)^(r+shift) * (-theta/cl)^m * binom(m+r, r).

    Term magnitudes are log-concave along m (linear plus concave pieces),
    so each row is summed until its terms have crested and dropped below
    the stopping floor; rows stop the same way.  The floor is the larger
    of the arithmetic noise level and the caller's absolute tolerance.
    """
    cl, al, cs, as2 = effective_orders(q)
    # rho must carry full working precision: a float64 slip of 1e-16 in the
    # exponent times a ridge term of exp(40) leaves an absolute error far
    # above the final value
    alm = mp.mpf(al)
    dalm = mp.mpf(al) - mp.mpf(as2)
    tol = _tol()
    if floor is None:
        floor = mp.mpf(0)
    x = None if mode == "time" else zm * tau
    ltau = mp.log(tau)
    lz = None if mode == "time" else mp.log(zm)
    acc = mp.mpf(0)
    peak = mp.mpf("1e-300")
    total = 0
    rowquiet = 0
    prev_row_peak = None
    r = 0
    ratio_m = -mp.mpf(theta) / cl
    ratio_r = -mp.mpf(cs) / cl
    while True:
        if cs == 0.0 and (r + shift) > 0:
            break
        coef = ratio_r ** (r + shift)
        rowacc = mp.mpf(0)
        row_peak = mp.mpf(0)
        mquiet = 0
        prev_mag = None
        m = 0
        while True:
            rho = alm * m + dalm * (r + shift)
            if mode == "time":
                fac = mp.exp(rho * ltau) * mp.rgamma(rho + 1)
            elif mode == "upper":
                fac = mp.gammainc(rho + 1, x, regularized=True) * mp.exp(-rho * lz)
            else:
                fac = _lower_tail_factor(rho, x, ltau, lz)
            term = coef * fac
            rowacc += term
            total += 1
            mag = abs(term)
            if mag > peak:
                peak = mag
            if mag > row_peak:
                row_peak = mag
            stop = tol * peak
            if stop < floor:
                stop = floor
            if mag <= stop and prev_mag is not None and mag <= prev_mag:
                mquiet += 1
                if mquiet >= QUIET_TERMS:
                    break
            else:
                mquiet = 0
            if total > cap:
                raise TruncationError(
                    f"conditioning double sum did not settle within {cap} terms",
                    last_term=float(mag),
                )
            prev_mag = mag
            m += 1
            coef *= ratio_m * mp.mpf(m + r) / m
        acc += rowacc
        stop = tol * peak
        if stop < floor:
            stop = floor
        if row_peak <= stop and prev_row_peak is not None and row_peak <= prev_row_peak:
            rowquiet += 1
            if rowquiet >= 2:
                break
        else:
            rowquiet = 0
        prev_row_peak = row_peak
        if cs == 0.0:
            break
        r += 1
    return acc


def _event_survival_mp(theta, tau, q):
    flo = mp.mpf("1e-22")
    s0 = _double_series("time", q, theta, None, tau, 0, floor=flo)
    s1 = _double_series("time", q, theta, None, tau, 1, floor=flo)
    return s0 - s1


def _ridge_log(q, theta, tau):
    """Natural log of the largest conditioning-series term magnitude.

    Maximizes m*ln(u) + r*ln(v) + ln binom(m+r, r) - ln Gamma(rho+1) on a
    logarithmic (m, r) grid; this sets the cancellation depth and hence
    the working precision.
    """
    cl, al, cs, as2 = effective_orders(q)
    lu = math.log(theta / cl) + al * math.log(tau)
    m = np.unique(np.concatenate(
        [np.arange(0, 9), np.geomspace(1, 3e5, 220)]).astype(np.int64))
    if cs > 0.0:
        lv = math.log(cs / cl) + (al - as2) * math.log(tau)
        r = np.unique(np.concatenate(
            [np.arange(0, 9), np.geomspace(1, 3e4, 160)]).astype(np.int64))
    else:
        lv = 0.0
        r = np.array([0])
    mm, rr = np.meshgrid(m.astype(np.float64), r.astype(np.float64), indexing="ij")
    rho = al * mm + (al - as2) * rr
    w = (mm * lu + rr * lv + gammaln(mm + rr + 1.0) - gammaln(mm + 1.0)
         - gammaln(rr + 1.0) - gammaln(rho + 1.0))
    idx = np.unravel_index(int(np.argmax(w)), w.shape)
    if m[idx[0]] == m[-1] or (cs > 0.0 and r[idx[1]] == r[-1]):
        raise TruncationError(
            "conditioning series ridge extends beyond the supported range",
            last_term=float(w[idx]),
        )
    return max(float(w[idx]), 0.0)


def _wait_dps(ridge, extra):
    # the grid ridge can miss the true crest by the mesh spacing, hence
    # the five-percent headroom
    dps = WORK_DPS + int((1.05 * ridge + extra) / _LN10 + 5.0)
    if dps > WAIT_DPS_CAP:
        raise TruncationError(
            "conditioning series needs more cancellation headroom than supported",
            last_term=float(ridge),
        )
    return dps


def lt_waiting(z, q, t, t0, n):
    """Transform of the conditional waiting-time density.

    Conditions on n customers present at time t with the last phase
    completion at t0.  The waiting time is n-1 fresh phases plus the aged
    phase in service, so the transform is (k*mu/(k*mu+phi(z)))^(n-1) times
    1 - e^{z*tau}/psi(tau) * S(z) with tau = t - t0, psi the inter-phase
    survival function and S the conditioned tail transform.  S is summed
    from upper incomplete gammas where that double series converges
    (c1*z^a1 comfortably above k*mu) and otherwise from the exact
    rearrangement phi/(k*mu+phi) minus the lower-gamma companion series,
    which converges for every z > 0.

    Parameters
    ----------
    z : float
        Real positive transform variable.
    q : QueueParams
        Queue parameter set.
    t : float
        Observation time, t > 0.
    t0 : float
        Last phase-completion time, 0 <= t0 < t.
    n : int
        Customers present, n >= 1.

    Returns
    -------
    float

    Raises
    ------
    ParameterError
        On domain violations or vanishing survival weight.
    TruncationError
        If a conditioning series cannot be summed.
    """
    if isinstance(z, (complex, mp.mpc)) and not isinstance(z, (float, int)):
        raise ParameterError("waiting-time transform is evaluated on the real axis")
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError("customer count must be an integer >= 1")
    if not (isinstance(t, (int, float, np.floating)) and math.isfinite(float(t)) and t > 0):
        raise ParameterError("observation time must be positive and finite")
    if not (isinstance(t0, (int, float, np.floating)) and math.isfinite(float(t0)) and 0 <= t0 < t):
        raise ParameterError("conditioning time must satisfy 0 <= t0 < t")
    zm, _ = _coerce(z)
    _check_domain(zm)
    kmu = q.k * q.mu
    tau = float(t) - float(t0)
    cl, al, cs, as2 = effective_orders(q)
    zf = float(z)
    upper_ok = kmu / (cl * zf**al) + (cs / cl) * zf ** (as2 - al) <= WAIT_REGION_MARGIN
    ridge = _ridge_log(q, kmu, tau)
    # the lower-gamma route carries an extra exp(z*tau) of cancellation
    dps = _wait_dps(ridge, 0.0 if upper_ok else zf * tau)
    with mp.workdps(dps):
        taum = mp.mpf(tau)
        psi_tau = _event_survival_mp(kmu, taum, q)
        if psi_tau <= mp.mpf("1e-280"):
            raise ParameterError("inter-phase survival weight underflows at this age")
        ph = _phi_mp(zm, q)
        # the bracket gets multiplied by exp(z*tau), so resolve it to an
        # absolute exp(-z*tau)*1e-25; anything finer is wasted effort
        blo = mp.mpf("1e-25") * mp.exp(-zm * taum)
        if upper_ok:
            bracket = _double_series("upper", q, kmu, zm, taum, 0, floor=blo) - _double_series(
                "upper", q, kmu, zm, taum, 1, floor=blo
            )
        else:
            low = _double_series("lower", q, kmu, zm, taum, 0, floor=blo) - _double_series(
                "lower", q, kmu, zm, taum, 1, floor=blo
            )
            bracket = ph / (kmu + ph) - low
        val = (kmu / (kmu + ph)) ** (n - 1) * (1 - mp.exp(zm * taum) * bracket / psi_tau)
    return float(val)


# ---------------------------------------------------------------------------
# numerical inversion oracle
# ---------------------------------------------------------------------------


def invert_lt(transform, t, nodes=TALBOT_NODES):
    """Numerically invert a Laplace transform at one time point.

    Fixed-Talbot contour with the scale r = 2*nodes/(5*t); the cotangent
    contour avoids the negative real axis where the z^alpha branch cuts
    live.  Evaluation runs in mpmath because contour weights reach
    exp(2*nodes/5) and would otherwise amplify double-precision rounding
    of the transform values.  Deterministic for a fixed node count.

    Parameters
    ----------
    transform : callable
        F(z) analytic on Re(z) > 0, evaluable at mpmath scalars.
    t : float
        Inversion time, t > 0.
    nodes : int, optional
        Contour node count.

    Returns
    -------
    float

    Raises
    ------
    OracleError
        If the transform cannot be evaluated along the contour.
    """
    if not (isinstance(t, (int, float, np.floating)) and math.isfinite(float(t)) and t > 0):
        raise ParameterError("inversion time must be positive and finite")
    if not isinstance(nodes, (int, np.integer)) or nodes < 8:
        raise ParameterError("node count must be an integer >= 8")
    with mp.workdps(WORK_DPS):
        tm = mp.mpf(float(t))
        r = mp.mpf(2 * int(nodes)) / (5 * tm)
        try:
            acc = mp.mpf("0.5") * mp.exp(r * tm) * mp.mpc(transform(r)).real
            for j in range(1, int(nodes)):
                theta = mp.pi * j / int(nodes)
                cot = mp.cos(theta) / mp.sin(theta)
                s = r * theta * mp.mpc(cot, 1)
                sigma = theta + (theta * cot - 1) * cot
                acc += (mp.exp(s * tm) * mp.mpc(transform(s)) * mp.mpc(1, sigma)).real
        except (TruncationError, ParameterError, ValueError, ZeroDivisionError, OverflowError) as exc:
            raise OracleError(f"contour evaluation failed at t={float(t)}: {exc}") from exc
        val = r / int(nodes) * acc
    return float(val)
