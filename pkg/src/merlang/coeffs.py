"""Combinatorial constants and scalar kernels feeding the series formulas.

Everything here is pure arithmetic: the coefficient families (a0, A0) and
(B, delta, C, nu, D, pi_) that weight the convolution series of the queue's
state probabilities, and the scalar kernels f_N, g_N, h_N whose N-fold
self-convolutions those series are built from.  The kernels are power-times-
Mittag-Leffler sums

    f_N(t) = t^{alpha1-(alpha1-1)/N-1} sum_h (-c2/c1)^h t^{(alpha1-alpha2)h}
             * E^{h+1}_{alpha1, alpha1+(alpha1-alpha2)h+(1-alpha1)/N}(-w t^{alpha1}),

w = (lambda+k*mu)/c1, with g_N carrying (alpha2-1)/N in the leading power and
(1-alpha2)/N in the ML index, and h_N carrying (N-1)/N and 1/N.  Coefficient
products are assembled in log space; A0 and B overflow doubles quickly.
"""

import numpy as np
from dataclasses import dataclass
from scipy.special import gammaln

from .errors import ParameterError, TruncationError
from .specfun import MLParams, mittag_leffler3, ml3_neg_grid, REL_TOL, TERM_CAP

OVERFLOW_LOG = 709.0      # log threshold beyond which exp() would overflow


@dataclass(frozen=True)
class QueueParams:
    """Parameters of the mixed time-changed Erlang queue.

    Parameters
    ----------
    lam : float
        Arrival rate, positive.
    mu : float
        Service rate, positive; each service has k exponential phases of
        rate k*mu.
    k : int
        Phases per service, positive integer.
    c1, c2 : float
        Nonnegative mixture weights of the two stable orders, c1 + c2 = 1.
    alpha1 : float
        First order, in (0, 1]; alpha1 = 1 requires c1 = 1 (classical limit).
    alpha2 : float
        Second order, in (0, 1); must satisfy alpha2 < alpha1 when both
        weights are positive.
    """

    lam: float
    mu: float
    k: int
    c1: float
    c2: float
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ParameterError(f"lam must be positive, got {self.lam}")
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if not (isinstance(self.k, (int, np.integer)) and self.k >= 1):
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if not (np.isfinite(self.c1) and self.c1 >= 0):
            raise ParameterError(f"c1 must be nonnegative, got {self.c1}")
        if not (np.isfinite(self.c2) and self.c2 >= 0):
            raise ParameterError(f"c2 must be nonnegative, got {self.c2}")
        if abs(self.c1 + self.c2 - 1.0) > 1e-12:
            raise ParameterError(f"c1 + c2 must equal 1, got {self.c1 + self.c2}")
        if not (0.0 < self.alpha1 <= 1.0):
            raise ParameterError(f"alpha1 must lie in (0, 1], got {self.alpha1}")
        if not (0.0 < self.alpha2 < 1.0):
            raise ParameterError(f"alpha2 must lie in (0, 1), got {self.alpha2}")
        if self.c1 > 0 and self.c2 > 0 and not (self.alpha2 < self.alpha1):
            raise ParameterError(
                f"alpha2 < alpha1 required when both weights are positive, "
                f"got alpha1={self.alpha1}, alpha2={self.alpha2}")
        if self.alpha1 == 1.0 and self.c1 != 1.0:
            raise ParameterError("alpha1 = 1 is permitted only with c1 = 1")

    @property
    def rate_sum(self):
        """lambda + k*mu, the exponential clock rate of the embedded chain."""
        return self.lam + self.k * self.mu


def effective_orders(q):
    """Mixture weights and orders with the c1 = 0 degeneracy folded away.

    The series formulas divide by c1.  When c1 = 0 the queue is driven by
    the pure-alpha2 subordinator, which is the same single-order model with
    the roles of the two components swapped, so (c1, alpha1) <-> (c2, alpha2).

    Returns (c1, alpha1, c2, alpha2) with the first weight positive.
    """
    if q.c1 > 0:
        return q.c1, q.alpha1, q.c2, q.alpha2
    return q.c2, q.alpha2, 0.0, q.alpha2


@dataclass(frozen=True)
class SeriesConstants:
    """One (n, s, i, m, r) slice of the state-probability series weights."""

    a0: int
    A0: float
    B: float
    delta: int
    C: float
    nu: int
    D: float
    pi_: int

    def __post_init__(self):
        if min(self.a0, self.delta, self.nu, self.pi_) <= 0:
            raise ParameterError("index constants must be strictly positive")
        if not (self.A0 > 0 and self.B > 0 and self.C > 0 and self.D > 0):
            raise ParameterError("amplitude constants must be strictly positive")


def _log_a0_amp(m, r, q):
    """log A0 for indices (m, r): the zero-state series amplitude."""
    k, lam, kmu = q.k, q.lam, q.k * q.mu
    return (np.log(m) + r * np.log(lam) + (m + r * k - 1) * np.log(kmu)
            + gammaln(m + r * (k + 1)) - gammaln(r + 1.0) - gammaln(m + r * k + 1.0))


def coeff_a0_A0(m, r, q):
    """Zero-state series constants a0 = m + r(k+1) and amplitude A0.

    A0 = m lam^r (k mu)^{m+rk-1} (m+r(k+1)-1)! / (r! (m+rk)!), assembled in
    log space and exponentiated once.

    Parameters
    ----------
    m : int
        Phase-block index, m >= 1.
    r : int
        Arrival-block index, r >= 0.
    q : QueueParams

    Returns
    -------
    (int, float)
    """
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise ParameterError(f"m must be a positive integer, got {m}")
    if not (isinstance(r, (int, np.integer)) and r >= 0):
        raise ParameterError(f"r must be a nonnegative integer, got {r}")
    la = _log_a0_amp(m, r, q)
    if la > OVERFLOW_LOG:
        raise TruncationError("A0 overflows double precision", last_term=la)
    return m + r * (q.k + 1), float(np.exp(la))


def _log_b_amp(n, s, i, q):
    """log B for indices (n, s, i): the state-probability series amplitude."""
    k, lam, kmu = q.k, q.lam, q.k * q.mu
    return ((n + i) * np.log(lam) + (k * (i + 1) - s) * np.log(kmu)
            + gammaln(n + k - s + i * (k + 1) + 1.0)
            - gammaln(k * (i + 1) - s + 1.0) - gammaln(n + i + 1.0))


def _delta(n, s, i, k):
    return n - s + (i + 1) * (k + 1)


def coeff_block(n, s, i, m, r, q):
    """The eight series constants for one (n, s, i, m, r) index tuple.

    B = lam^{n+i} (k mu)^{k(i+1)-s} (n+k-s+i(k+1))! / ((k(i+1)-s)! (n+i)!),
    delta = n-s+(i+1)(k+1), C = k mu B A0, nu = delta + a0; D and pi_ repeat
    B and delta at the successor state, (n, s+1) for s < k and (n+1, 1) for
    s = k, times the same k mu A0 factor.

    Parameters
    ----------
    n : int
        Queue level, n >= 1.
    s : int
        Phase within the level, 1 <= s <= k.
    i, r : int
        Series indices, >= 0.
    m : int
        Series index, >= 1.
    q : QueueParams

    Returns
    -------
    SeriesConstants
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not (isinstance(s, (int, np.integer)) and 1 <= s <= q.k):
        raise ParameterError(f"s must lie in [1, k], got {s}")
    if not (isinstance(i, (int, np.integer)) and i >= 0):
        raise ParameterError(f"i must be a nonnegative integer, got {i}")
    a0, A0 = coeff_a0_A0(m, r, q)
    la = _log_a0_amp(m, r, q)
    lb = _log_b_amp(n, s, i, q)
    lkmu = np.log(q.k * q.mu)
    if s < q.k:
        lb_next = _log_b_amp(n, s + 1, i, q)
        d_next = _delta(n, s + 1, i, q.k)
    else:
        lb_next = _log_b_amp(n + 1, 1, i, q)
        d_next = _delta(n + 1, 1, i, q.k)
    logs = (lb, lkmu + lb + la, lkmu + lb_next + la)
    if max(logs) > OVERFLOW_LOG:
        raise TruncationError("series constant overflows double precision",
                              last_term=max(logs))
    return SeriesConstants(
        a0=a0,
        A0=A0,
        B=float(np.exp(lb)),
        delta=_delta(n, s, i, q.k),
        C=float(np.exp(logs[1])),
        nu=_delta(n, s, i, q.k) + a0,
        D=float(np.exp(logs[2])),
        pi_=d_next + a0,
    )


def _kernel_offsets(kind, N, a1, a2):
    """Leading t-exponent and ML-index offset of one kernel family."""
    if kind == "f":
        return a1 - (a1 - 1.0) / N - 1.0, (1.0 - a1) / N
    if kind == "g":
        return a1 - (a2 - 1.0) / N - 1.0, (1.0 - a2) / N
    if kind == "h":
        return a1 - (N - 1.0) / N, 1.0 / N
    raise ParameterError(f"unknown kernel kind {kind!r}")


def kernel_grid(kind, N, ts, q):
    """One kernel family evaluated on an array of positive times.

    Sums the outer Mittag-Leffler series with each term vectorized over the
    whole grid; the stopping rule is the specfun one applied to the worst
    still-active point.  Workhorse behind the scalar kernel_f/g/h and the
    transform-identity checks.
    """
    c1, a1, c2, a2 = effective_orders(q)
    ts = np.asarray(ts, dtype=float)
    if np.any(ts <= 0):
        raise ParameterError("kernel times must be positive")
    lead, off = _kernel_offsets(kind, N, a1, a2)
    w = q.rate_sum / c1
    ys = w * ts ** a1
    lt_ratio = np.log(c2 / c1) if c2 > 0 else -np.inf
    ltd = np.log(ts) * (a1 - a2)
    total = np.zeros_like(ts)
    active = np.ones(ts.shape, dtype=bool)
    quiet = np.zeros(ts.shape, dtype=int)
    for h in range(TERM_CAP + 1):
        beta = a1 + (a1 - a2) * h + off
        term = ml3_neg_grid(a1, beta, h + 1.0, ys)
        if h > 0:
            term = term * (-1.0 if h % 2 else 1.0) * np.exp(h * (lt_ratio + ltd))
        total[active] += term[active]
        if c2 == 0.0:
            break
        conv = np.abs(term) < REL_TOL * np.maximum(np.abs(total), 1e-300)
        quiet = np.where(conv, quiet + 1, 0)
        active &= ~(quiet >= 3)
        if not active.any():
            break
    else:
        raise TruncationError("kernel series did not converge within the term cap",
                              last_term=float(np.abs(term[active]).max()))
    return ts ** lead * total


def kernel_f(N, t, q):
    """Scalar kernel f_N(t); its N-fold self-convolution carries the
    zero-state probability series.

    Parameters
    ----------
    N : int
        Convolution order, N >= 1.
    t : float
        Time, t > 0 (the kernel may be singular at 0).
    q : QueueParams
    """
    return _kernel_scalar("f", N, t, q)


def kernel_g(N, t, q):
    """Scalar kernel g_N(t), the alpha2-weighted companion of f_N."""
    return _kernel_scalar("g", N, t, q)


def kernel_h(N, t, q):
    """Scalar kernel h_N(t), the mean-queue-length kernel."""
    return _kernel_scalar("h", N, t, q)


def _kernel_scalar(kind, N, t, q):
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise ParameterError(f"N must be a positive integer, got {N}")
    t = float(t)
    if not (np.isfinite(t) and t > 0):
        raise ParameterError(f"t must be positive, got {t}")
    return float(kernel_grid(kind, N, np.array([t]), q)[0])
