"""Time-domain curves of the mixed time-changed Erlang queue.

State probabilities, the queue-length pmf, the mean queue length, event-time
survival functions, the service-time density and the busy-period CDF, on a
uniform time grid.  Every closed-form curve here is a weighted sum over one
two-parameter kernel family

    K(beta, N)(t) = L^{-1}[ z^{beta-1} / (z^{a1} + (c2/c1) z^{a2} + w)^N ](t),

with w = (lam + k mu)/c1: the convolution-series weights only ever multiply
c1 K(a1, N) + c2 K(a2, N) (state probabilities and densities) or K(0, N)
(running integrals), so no numerical convolution enters the series curves.
Sums are grouped by the convolution order N; the reported truncation error
comes from the first omitted faces of the coefficient index rectangle.

K itself is evaluated two ways.  The workhorse collapses the inversion
contour onto the negative real axis,

    K(beta, N)(t) = [beta = 0] w^{-N}
        - (1/pi) int_0^inf e^{-rt} Im[ r^{beta-1} e^{i pi (beta-1)}
                                       / D(r e^{i pi})^N ] dr,

valid because D has no zeros off the cut, and is computed by a trapezoid
rule on a log grid shared by every diagonal and every grid time.  The
integrand envelope exceeds the result by at most (1/sin(pi a1))^N, so the
cut route is used only while N log(1/sin(pi a1)) stays within the float
cancellation budget; deeper diagonals integrate e^{zt} times the transform
over a deformed contour in extended precision, with the nodes shared by
every diagonal.  A separate product integration engine provides direct
grid convolution for kernels with an endpoint power singularity.
"""

import numpy as np
from dataclasses import dataclass
from enum import Enum
from scipy.special import gammaln, roots_jacobi, beta as beta_integral

from .errors import ParameterError, TruncationError
from .specfun import ml3_neg_grid, _log_lower_gamma
from .coeffs import (QueueParams, effective_orders, kernel_grid,
                     _log_a0_amp, _log_b_amp, _delta, _kernel_offsets)

DEFAULT_EPS_REL = 1e-8    # per-term relative truncation target
DEFAULT_MAX_M = 40        # phase-block index cap
DEFAULT_MAX_R = 40        # arrival-block index cap
DEFAULT_MAX_I = 40        # state-series index cap
DEFAULT_MAX_CONV_N = 256  # convolution order cap
DEFAULT_T_MAX = 3.0
DEFAULT_N_POINTS = 3001
FLAG_FACTOR = 10.0        # tail above FLAG_FACTOR*eps_rel*scale flags the curve
QUIET_DIAGS = 3           # consecutive negligible diagonals before a point settles
QUIET_J = 2               # consecutive negligible inner terms before a point settles
J_CAP = 4000              # hard cap on the inner alternating series
SKIP_MARGIN = 6.9         # log-scale safety margin of the diagonal skip bound
QUAD_STEP = 0.0625        # log-grid step of the cut quadrature
QUAD_EXP_CAP = 745.0      # largest rt resolved before e^{-rt} underflows
QUAD_FLOOR = 1e-4         # left-endpoint mass target, relative to eps_rel
U_MIN_CAP = -600.0        # hard floor of the log grid
CANCEL_BUDGET = 16.0      # max N log(1/sin(pi a1)) allowed on the cut route
TAIL_RHO_CAP = 0.98       # cap on the geometric tail ratio estimate
POINT_CHUNK = 1024        # grid points per quadrature matrix block
EDGE_CELLS = 4            # grid cells integrated with exact power moments
JACOBI_NODES = 24         # Gauss-Jacobi nodes for the shortest convolutions
REFINE_POINTS = 145       # log-spaced samples resolving the edge region
REFINE_DECADES = 6        # decades below EDGE_CELLS*h covered by them
VALUE_FLOOR = 1e-15       # scale floor for stopping rules and flags


class CurveKind(Enum):
    PROBABILITY = "Probability"
    SURVIVAL = "Survival"
    CDF = "CDF"
    MEAN = "Mean"
    DENSITY = "Density"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid 0, h, 2h, ..., t_max with h = t_max/(n_points-1)."""

    t_max: float = DEFAULT_T_MAX
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if not (isinstance(self.t_max, (int, float, np.floating))
                and np.isfinite(self.t_max) and self.t_max > 0):
            raise ParameterError(f"t_max must be positive and finite, got {self.t_max}")
        if not (isinstance(self.n_points, (int, np.integer)) and self.n_points >= 2):
            raise ParameterError(f"n_points must be an integer >= 2, got {self.n_points}")

    @property
    def h(self):
        """Grid spacing."""
        return self.t_max / (self.n_points - 1)

    def ts(self):
        """The grid times as an array, t[0] = 0."""
        return np.linspace(0.0, float(self.t_max), int(self.n_points))


@dataclass(frozen=True)
class TruncationPolicy:
    """Caps and tolerances for the convolution-series truncation."""

    eps_rel: float = DEFAULT_EPS_REL
    max_m: int = DEFAULT_MAX_M
    max_r: int = DEFAULT_MAX_R
    max_i: int = DEFAULT_MAX_I
    max_conv_N: int = DEFAULT_MAX_CONV_N

    def __post_init__(self):
        if not (np.isfinite(self.eps_rel) and self.eps_rel > 0):
            raise ParameterError(f"eps_rel must be positive, got {self.eps_rel}")
        for name in ("max_m", "max_r", "max_i", "max_conv_N"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and v >= 1):
                raise ParameterError(f"{name} must be an integer >= 1, got {v}")


@dataclass
class Curve:
    """A quantity sampled on a TimeGrid with a per-point truncation estimate.

    Values are raw sums: range clamping happens only on export, so an
    invariant violation stays visible to checks.  ``flagged`` marks curves
    whose tail estimate exceeded the policy threshold somewhere.
    """

    grid: TimeGrid
    values: np.ndarray
    kind: CurveKind
    trunc_error: np.ndarray
    flagged: bool = False

    def __post_init__(self):
        if not isinstance(self.grid, TimeGrid):
            raise ParameterError("grid must be a TimeGrid")
        if not isinstance(self.kind, CurveKind):
            raise ParameterError("kind must be a CurveKind")
        self.values = np.asarray(self.values, dtype=float)
        self.trunc_error = np.asarray(self.trunc_error, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise ParameterError("values must match the grid length")
        if self.trunc_error.shape != (self.grid.n_points,):
            raise ParameterError("trunc_error must match the grid length")
        if np.any(self.trunc_error < 0) or np.any(~np.isfinite(self.trunc_error)):
            raise ParameterError("trunc_error must be finite and nonnegative")

    def value_at(self, t):
        """Linear interpolation of the curve at time t in [0, t_max]."""
        t = float(t)
        if not (0.0 <= t <= self.grid.t_max):
            raise ParameterError(f"t must lie in [0, {self.grid.t_max}], got {t}")
        return float(np.interp(t, self.grid.ts(), self.values))

    def check_invariants(self, tol=1e-6):
        """List of invariant violations; empty when the curve is clean."""
        v = self.values
        bad = []
        if self.kind in (CurveKind.PROBABILITY, CurveKind.SURVIVAL, CurveKind.CDF):
            if v.min() < -tol or v.max() > 1.0 + tol:
                bad.append(f"range [{v.min():.3e}, {v.max():.3e}] leaves [0, 1]")
        if self.kind is CurveKind.SURVIVAL:
            if abs(v[0] - 1.0) > tol:
                bad.append(f"survival starts at {v[0]!r}, not 1")
            if np.diff(v).max(initial=-np.inf) > tol:
                bad.append("survival increases by more than tol somewhere")
        if self.kind is CurveKind.CDF:
            if abs(v[0]) > tol:
                bad.append(f"CDF starts at {v[0]!r}, not 0")
            if np.diff(v).min(initial=np.inf) < -tol:
                bad.append("CDF decreases by more than tol somewhere")
        if self.kind is CurveKind.MEAN and v.min() < -tol:
            bad.append(f"mean dips to {v.min():.3e}")
        return bad

    def _export_values(self):
        # clamp probability-like kinds on export only
        if self.kind in (CurveKind.PROBABILITY, CurveKind.SURVIVAL, CurveKind.CDF):
            return np.clip(self.values, 0.0, 1.0)
        return self.values

    def to_csv(self, path):
        """Write t,value,trunc_error rows with 17 significant digits."""
        ts = self.grid.ts()
        ev = self._export_values()
        with open(path, "w") as fh:
            fh.write("t,value,trunc_error\n")
            for t, v, e in zip(ts, ev, self.trunc_error):
                fh.write(f"{t:.17g},{v:.17g},{e:.17g}\n")

    def to_json(self, path):
        """Write grid, values and metadata with 17 significant digits."""
        ev = self._export_values()
        vals = ", ".join(f"{v:.17g}" for v in ev)
        errs = ", ".join(f"{e:.17g}" for e in self.trunc_error)
        text = ('{"t_max": %.17g, "n_points": %d, "kind": "%s", "flagged": %s,\n'
                ' "values": [%s],\n "trunc_error": [%s]}\n'
                % (self.grid.t_max, self.grid.n_points, self.kind.value,
                   "true" if self.flagged else "false", vals, errs))
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# kernel family evaluation
# ---------------------------------------------------------------------------


def _cut_tables(ts, w, a1, a2, crat, eps_rel):
    """Shared log-grid nodes of the branch-cut integral for an array of times.

    The left endpoint is pushed until the smallest r-power of the integrand
    has deposited all but QUAD_FLOOR*eps_rel of its mass; the right endpoint
    until e^{-rt} has underflowed for the smallest positive time.
    """
    a_floor = max(a2 if crat > 0.0 else a1, 0.05)
    relfloor = max(eps_rel * QUAD_FLOOR, 1e-14)
    u_min = max(np.log(relfloor) / a_floor, U_MIN_CAP)
    u_max = np.log(QUAD_EXP_CAP / float(np.min(ts)))
    us = np.arange(u_min, u_max + QUAD_STEP, QUAD_STEP)
    rs = np.exp(us)
    d = (rs ** a1 * np.exp(1j * np.pi * a1)
         + crat * rs ** a2 * np.exp(1j * np.pi * a2) + w)
    return {"us": us, "rs": rs, "lad": np.log(np.abs(d)),
            "agd": np.angle(d), "lnw": np.log(w)}


def _cut_terms(orders, logw, beta_coefs, tables, ts):
    """Diagonal term matrix sum_b coef_b e^{logw} K(beta_b, N)(t) by quadrature.

    Works entirely in log magnitudes, so the diagonal weights may exceed the
    float range as long as the weighted kernels do not.  beta = 0 transforms
    carry a pole at the origin whose residue w^{-N} is added on top of the
    cut integral.
    """
    us, lad, agd = tables["us"], tables["lad"], tables["agd"]
    nd = orders.size
    wmat = np.zeros((nd, us.size))
    for beta, coef in beta_coefs:
        lm = beta * us[None, :] + logw[:, None] - orders[:, None] * lad[None, :]
        ang = np.pi * (beta - 1.0) - orders[:, None] * agd[None, :]
        wmat += (-(coef * QUAD_STEP) / np.pi) * np.exp(lm) * np.sin(ang)
    terms = np.empty((nd, ts.size))
    rs = tables["rs"]
    for lo in range(0, ts.size, POINT_CHUNK):
        sl = slice(lo, min(lo + POINT_CHUNK, ts.size))
        terms[:, sl] = wmat @ np.exp(-np.outer(rs, ts[sl]))
    for beta, coef in beta_coefs:
        if beta == 0.0:
            terms += coef * np.exp(logw - orders * tables["lnw"])[:, None]
    return terms


def _k_classical(beta, n_ord, w, ts, shifts):
    """Exact classical kernels (a1 = 1): Erlang density and its integral."""
    n = int(n_ord)
    if beta == 1.0:
        return np.exp(shifts + (n - 1.0) * np.log(ts) - w * ts - gammaln(n))
    if beta == 0.0:
        return np.exp(shifts - n * np.log(w) - gammaln(n)
                      + _log_lower_gamma(float(n), w * ts))
    raise ParameterError(f"classical kernel family needs beta in {{0, 1}}, got {beta}")


def _k_series(beta, n_ord, w, c1, c2, a1, a2, ts, shifts, eps_rel):
    """K(beta, n_ord, w)(t) * e^{shifts} by the alternating binomial series.

    Expands the mixed denominator around its dominant order, one generalized
    Mittag-Leffler term per power of (c2/c1) t^{a1-a2}.  Used for diagonals
    too deep for the cut quadrature's cancellation budget.
    """
    ts = np.asarray(ts, dtype=float)
    shifts = np.broadcast_to(np.asarray(shifts, dtype=float), ts.shape)
    n = int(n_ord)
    lnt = np.log(ts)
    ys = w * ts ** a1
    if c2 == 0.0:
        b0 = a1 * n - beta + 1.0
        return ml3_neg_grid(a1, b0, float(n), ys, shift=shifts + (b0 - 1.0) * lnt)
    lrat = np.log(c2 / c1)
    out = np.zeros_like(ts)
    active = np.ones(ts.shape, dtype=bool)
    quiet = np.zeros(ts.shape, dtype=int)
    prev = np.full(ts.shape, np.inf)
    lbin = 0.0                                 # log C(n-1+j, j)
    for j in range(J_CAP + 1):
        pj = a1 * n - beta + (a1 - a2) * j
        idx = np.flatnonzero(active)
        sh = shifts[idx] + pj * lnt[idx] + j * lrat + lbin
        term = ml3_neg_grid(a1, pj + 1.0, n + float(j), ys[idx], shift=sh)
        if j % 2:
            term = -term
        out[idx] += term
        mag = np.abs(term)
        ok = (mag <= eps_rel * np.maximum(np.abs(out[idx]), VALUE_FLOOR)) & (mag <= prev[idx])
        quiet[idx] = np.where(ok, quiet[idx] + 1, 0)
        prev[idx] = mag
        settled = quiet[idx] >= QUIET_J
        if settled.any():
            active[idx[settled]] = False
        if not active.any():
            return out
        lbin += np.log((n + j) / (j + 1.0))
    raise TruncationError("kernel series did not settle within the inner cap",
                          last_term=float(np.abs(term).max()))


def _diag_bound(N, logw_d, beta_coefs, w, a1, ts, lnt):
    """Cheap log upper bound on one diagonal's magnitude at each point.

    Small t: t^p/Gamma(p+1) from the monotone leading envelope; large t: the
    w^{-N} t^{-beta} tail of the transform at z -> 0.
    """
    parts = []
    for beta, coef in beta_coefs:
        if a1 == 1.0:
            if beta == 1.0:
                e = (N - 1.0) * lnt - w * ts - gammaln(N)
            else:
                x = w * ts
                e = -N * np.log(w) + np.minimum(
                    0.0, N * (1.0 + np.log(x) - np.log(N)) - x)
        else:
            p = a1 * N - beta
            e = np.minimum(p * lnt - gammaln(p + 1.0), -beta * lnt - N * np.log(w))
        parts.append(e + np.log(coef))
    est = parts[0] if len(parts) == 1 else np.logaddexp(parts[0], parts[1])
    return logw_d + est


def _talbot_terms(orders, logw, signs, beta_coefs, w, crat, a1, a2, ts):
    """Deep-diagonal sum by extended-precision contour integration.

    Beyond the cut route's cancellation budget the flattened contour loses
    the value to float round-off, so these diagonals integrate e^{zt} times
    the transform over a deformed contour whose apex scale grows with the
    deepest order; the working precision absorbs the contour's intrinsic
    e^{Re z t} amplification.  Nodes are shared by every diagonal at a given
    time, one complex log of the denominator per node.
    """
    import mpmath as mp

    n_max = int(np.max(orders))
    deg = int(np.ceil(1.3 * a1 * n_max) + 32)
    dps = int(np.ceil(0.18 * deg) + 25)
    out = np.zeros(ts.size)
    with mp.workdps(dps):
        ii = mp.mpc(0, 1)
        la1, la2 = mp.mpf(a1), mp.mpf(a2)
        cr, wm = mp.mpf(crat), mp.mpf(w)
        for it, t in enumerate(np.asarray(ts, dtype=float)):
            tm = mp.mpf(t)
            r = 2 * mp.mpf(deg) / (5 * tm)
            ld = []
            lzs = []
            gam = []
            for j in range(deg):
                th = mp.pi * j / deg
                if j == 0:
                    z = r
                    g = mp.mpf("0.5") * mp.e ** (z * tm)
                else:
                    cot = mp.cos(th) / mp.sin(th)
                    z = r * th * (cot + ii)
                    # d/dtheta of z, folded into the trapezoid weight
                    g = (1 + ii * (th + (th * cot - 1) * cot)) * mp.e ** (z * tm)
                lzs.append(mp.log(z))
                gam.append(g)
                ld.append(mp.log(z ** la1 + cr * z ** la2 + wm))
            total = mp.mpf(0)
            for d in range(orders.size):
                n_d = int(orders[d])
                lw = mp.mpf(float(logw[d]))
                acc = mp.mpf(0)
                for beta, coef in beta_coefs:
                    bm = mp.mpf(beta)
                    s = mp.mpf(0)
                    for j in range(deg):
                        s += (gam[j] * mp.e ** ((bm - 1) * lzs[j]
                                                + lw - n_d * ld[j])).real
                    acc += coef * s
                total += float(signs[d]) * acc
            out[it] = float(total / (5 * tm) * 2)
    return out


def _deep_sum(orders, logw, signs, beta_coefs, w, c1, c2, a1, a2, ts, eps_rel, base):
    """Deep-diagonal contribution with a per-point relevance screen.

    base carries the mass already accumulated by the cut route; diagonals
    whose envelope bound sits below eps_rel times that scale at every time
    are dropped before the extended-precision contour pass.
    """
    lnt = np.log(ts)
    scale = np.maximum(np.abs(np.asarray(base, dtype=float)), VALUE_FLOOR)
    keep = np.zeros(orders.size, dtype=bool)
    for d in range(orders.size):
        est = _diag_bound(orders[d], logw[d], beta_coefs, w, a1, ts, lnt)
        keep[d] = bool((est >= np.log(eps_rel * scale) - SKIP_MARGIN).any())
    if not keep.any():
        return np.zeros(ts.size)
    crat = (c2 / c1) if c2 > 0.0 else 0.0
    return _talbot_terms(orders[keep], logw[keep], signs[keep], beta_coefs,
                         w, crat, a1, a2, ts)


def _sum_diagonals(orders, logw, signs, beta_coefs, w, c1, c2, a1, a2, ts, eps_rel):
    """sum_d sign_d e^{logw_d} sum_b coef_b K(beta_b, N_d, w) on positive times.

    Classical parameters use the exact Erlang forms; fractional diagonals go
    to the cut quadrature while N log(1/sin(pi a1)) fits the cancellation
    budget and to the extended-precision contour beyond it.
    """
    orders = np.asarray(orders)
    logw = np.asarray(logw, dtype=float)
    signs = np.asarray(signs, dtype=float)
    if a1 == 1.0:
        vals = np.zeros(ts.size)
        for d in range(orders.size):
            tot = np.zeros(ts.size)
            for beta, coef in beta_coefs:
                tot += coef * _k_classical(beta, orders[d], w, ts,
                                           np.full(ts.size, logw[d]))
            vals += signs[d] * tot
        return vals
    lam1 = 0.0 if a1 <= 0.5 else float(-np.log(np.sin(np.pi * a1)))
    shallow = orders * lam1 <= CANCEL_BUDGET
    vals = np.zeros(ts.size)
    if shallow.any():
        crat = (c2 / c1) if c2 > 0.0 else 0.0
        tables = _cut_tables(ts, w, a1, a2, crat, eps_rel)
        terms = _cut_terms(orders[shallow], logw[shallow], beta_coefs, tables, ts)
        vals += signs[shallow] @ terms
    deep = ~shallow
    if deep.any():
        vals += _deep_sum(orders[deep], logw[deep], signs[deep], beta_coefs,
                          w, c1, c2, a1, a2, ts, eps_rel, base=vals)
    return vals


# ---------------------------------------------------------------------------
# series weights, faces of the index rectangle, curve assembly
# ---------------------------------------------------------------------------


def _group_logsum(keys, logs, signs=None):
    """Group log-amplitudes by integer key: ascending keys, log|sum|, sign.

    Entries with log -inf (exactly-zero coefficients) are dropped up front;
    signed accumulation otherwise turns an all-zero group into nan.
    """
    keys = np.asarray(keys)
    logs = np.asarray(logs, dtype=float)
    live = np.isfinite(logs)
    if not live.all():
        keys = keys[live]
        logs = logs[live]
        if signs is not None:
            signs = np.asarray(signs, dtype=float)[live]
    order = np.argsort(keys, kind="stable")
    ks = keys[order]
    ls = logs[order]
    ss = None if signs is None else np.asarray(signs, dtype=float)[order]
    uniq, starts = np.unique(ks, return_index=True)
    bounds = np.append(starts, ks.size)
    out_log = np.empty(uniq.size)
    out_sign = np.ones(uniq.size)
    for i in range(uniq.size):
        sl = slice(bounds[i], bounds[i + 1])
        m = ls[sl].max()
        # shift-and-dot by hand: the library signed reduction loses the
        # group when its largest magnitude appears with both signs
        if ss is None:
            raw = float(np.exp(ls[sl] - m).sum())
        else:
            raw = float(np.dot(ss[sl], np.exp(ls[sl] - m)))
        if raw == 0.0:
            out_log[i] = -np.inf
            out_sign[i] = 0.0
        else:
            out_log[i] = np.log(abs(raw)) + m
            out_sign[i] = np.sign(raw)
    return uniq.astype(int), out_log, out_sign


def _a0_group(ms, rs_, q, shift=0.0):
    """Zero-state amplitudes on a (m, r) cell block, grouped by order."""
    M, R = np.meshgrid(np.asarray(ms), np.asarray(rs_), indexing="ij")
    la = _log_a0_amp(M, R, q) + shift
    N = M + R * (q.k + 1)
    orders, logw, _ = _group_logsum(N.ravel(), la.ravel())
    c1 = q.c1 if q.c1 > 0 else q.c2
    logw = logw - orders * np.log(c1)
    return orders, logw, np.ones(orders.size)


def _validate_inputs(q, grid, pol):
    if not isinstance(q, QueueParams):
        raise ParameterError("q must be a QueueParams")
    if not isinstance(grid, TimeGrid):
        raise ParameterError("grid must be a TimeGrid")
    if not isinstance(pol, TruncationPolicy):
        raise ParameterError("pol must be a TruncationPolicy")


def _face_tail(face_pairs, beta_coefs, w, c1, c2, a1, a2, ts, eps_rel):
    """Truncation estimate from the first two omitted faces of each cap.

    Each pair holds the diagonal sets of the first and second omitted index
    slice; the per-point tail is |first| inflated by the geometric ratio
    |second|/|first|, capped at TAIL_RHO_CAP.
    """
    tail = np.zeros(ts.size)
    for (set1, set2) in face_pairs:
        f1 = np.abs(_sum_diagonals(*set1, beta_coefs, w, c1, c2, a1, a2,
                                   ts, eps_rel))
        f2 = np.abs(_sum_diagonals(*set2, beta_coefs, w, c1, c2, a1, a2,
                                   ts, eps_rel))
        rho = np.clip(f2 / np.maximum(f1, 1e-300), 0.0, TAIL_RHO_CAP)
        tail += f1 / (1.0 - rho)
    return tail


def _assemble(kind, grid, main, faces, beta_coefs, w, c1, c2, a1, a2,
              eps_rel, ic, extra=None):
    ts = grid.ts()
    values = np.empty(grid.n_points)
    trunc = np.zeros(grid.n_points)
    values[0] = ic
    vals = _sum_diagonals(*main, beta_coefs, w, c1, c2, a1, a2, ts[1:], eps_rel)
    if extra is not None:
        vals = vals + extra
    values[1:] = vals
    if faces:
        trunc[1:] = _face_tail(faces, beta_coefs, w, c1, c2, a1, a2,
                               ts[1:], eps_rel)
    flagged = bool(np.any(
        trunc > FLAG_FACTOR * eps_rel * np.maximum(np.abs(values), 1.0)))
    return Curve(grid, values, kind, trunc, flagged)


def _a0_faces(q, pol, shift=0.0):
    """First/second omitted row and column of the (m, r) rectangle."""
    row = lambda m: _a0_group([m], np.arange(0, pol.max_r + 1), q, shift)
    col = lambda r: _a0_group(np.arange(1, pol.max_m + 1), [r], q, shift)
    return [(row(pol.max_m + 1), row(pol.max_m + 2)),
            (col(pol.max_r + 1), col(pol.max_r + 2))]


# ---------------------------------------------------------------------------
# curve operations
# ---------------------------------------------------------------------------


def p0_curve(q, grid, pol=None):
    """Zero-state probability curve p0(t).

    The double series over (m, r) is regrouped by the convolution order
    a0 = m + r(k+1); each diagonal contributes its grouped amplitude times
    c1 K(a1, a0) + c2 K(a2, a0), divided by c1^{a0}.  The t = 0 value is the
    initial condition 1; the truncation estimate comes from the first
    omitted row and column of the index rectangle.

    Parameters
    ----------
    q : QueueParams
    grid : TimeGrid
    pol : TruncationPolicy, optional

    Returns
    -------
    Curve
        kind Probability; ``flagged`` is set when the tail estimate exceeds
        FLAG_FACTOR * eps_rel somewhere.
    """
    pol = pol if pol is not None else TruncationPolicy()
    _validate_inputs(q, grid, pol)
    c1, a1, c2, a2 = effective_orders(q)
    w = q.rate_sum / c1
    main = _a0_group(np.arange(1, pol.max_m + 1), np.arange(0, pol.max_r + 1), q)
    beta_coefs = [(a1, c1)] + ([(a2, c2)] if c2 > 0 else [])
    return _assemble(CurveKind.PROBABILITY, grid, main, _a0_faces(q, pol),
                     beta_coefs, w, c1, c2, a1, a2, pol.eps_rel, ic=1.0)


def _pns_sets(n, s, q, pol):
    """Main diagonal set and omitted-face pairs of the three state families.

    The direct block runs over i, the feed-in and drain blocks over
    (i, m, r) with opposite signs; faces are the first and second omitted
    slices of each capped index.
    """
    k = q.k
    lkmu = np.log(k * q.mu)
    lc1 = np.log(q.c1 if q.c1 > 0 else q.c2)
    if s < k:
        n2, s2 = n, s + 1
    else:
        n2, s2 = n + 1, 1

    def cells(iv, ms, rs_):
        iv = np.atleast_1d(iv)
        lb = _log_b_amp(n, s, iv, q)
        lb2 = _log_b_amp(n2, s2, iv, q)
        delt = _delta(n, s, iv, k)
        delt2 = _delta(n2, s2, iv, k)
        M, R = np.meshgrid(np.asarray(ms), np.asarray(rs_), indexing="ij")
        la = (_log_a0_amp(M, R, q)).ravel()
        a0 = (M + R * (k + 1)).ravel()
        keys = np.concatenate([
            (delt[:, None] + a0[None, :]).ravel(),
            (delt2[:, None] + a0[None, :]).ravel(),
        ])
        logs = np.concatenate([
            (lkmu + lb[:, None] + la[None, :]).ravel(),
            (lkmu + lb2[:, None] + la[None, :]).ravel(),
        ])
        sgns = np.concatenate([
            np.ones(delt.size * a0.size),
            -np.ones(delt2.size * a0.size),
        ])
        return keys, logs, sgns

    def direct(iv):
        iv = np.atleast_1d(iv)
        return _delta(n, s, iv, k), _log_b_amp(n, s, iv, q), np.ones(iv.size)

    def grouped(parts):
        keys = np.concatenate([p[0] for p in parts])
        logs = np.concatenate([p[1] for p in parts])
        sgns = np.concatenate([p[2] for p in parts])
        orders, logw, osign = _group_logsum(keys, logs, sgns)
        keep = osign != 0.0
        orders, logw, osign = orders[keep], logw[keep], osign[keep]
        return orders, logw - orders * lc1, osign

    iv = np.arange(0, pol.max_i + 1)
    ms = np.arange(1, pol.max_m + 1)
    rs_ = np.arange(0, pol.max_r + 1)
    main = grouped([direct(iv), cells(iv, ms, rs_)])
    i_face = lambda i: grouped([direct([i]), cells([i], ms, rs_)])
    m_face = lambda m: grouped([cells(iv, [m], rs_)])
    r_face = lambda r: grouped([cells(iv, ms, [r])])
    faces = [(i_face(pol.max_i + 1), i_face(pol.max_i + 2)),
             (m_face(pol.max_m + 1), m_face(pol.max_m + 2)),
             (r_face(pol.max_r + 1), r_face(pol.max_r + 2))]
    return main, faces


def pns_curve(n, s, q, grid, pol=None):
    """State probability curve p_{n,s}(t) for queue level n, phase s.

    Three coefficient families on the same kernel ladder: the direct block
    (orders delta_i), the zero-state feed-in (orders delta_i + a0, positive)
    and the successor-state drain (same structure, negative).  All three are
    merged by order with signed log-sum grouping before evaluation.

    Parameters
    ----------
    n : int
        Queue level, n >= 1.
    s : int
        Service phase, 1 <= s <= k.
    q : QueueParams
    grid : TimeGrid
    pol : TruncationPolicy, optional

    Returns
    -------
    Curve
    """
    pol = pol if pol is not None else TruncationPolicy()
    _validate_inputs(q, grid, pol)
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not (isinstance(s, (int, np.integer)) and 1 <= s <= q.k):
        raise ParameterError(f"s must lie in [1, k], got {s}")
    c1, a1, c2, a2 = effective_orders(q)
    w = q.rate_sum / c1
    main, faces = _pns_sets(int(n), int(s), q, pol)
    beta_coefs = [(a1, c1)] + ([(a2, c2)] if c2 > 0 else [])
    return _assemble(CurveKind.PROBABILITY, grid, main, faces, beta_coefs,
                     w, c1, c2, a1, a2, pol.eps_rel, ic=0.0)


def queue_length_pmf(n, q, grid, pol=None):
    """Queue-length pmf curve P(Q(t) = n) via the level-phase state map.

    n = 0 delegates to p0_curve; n >= 1 maps to the state pair
    (ceil(n/k), n - k(ceil(n/k) - 1)).
    """
    if not (isinstance(n, (int, np.integer)) and n >= 0):
        raise ParameterError(f"n must be a nonnegative integer, got {n}")
    if n == 0:
        return p0_curve(q, grid, pol)
    a = -(-int(n) // q.k)
    b = int(n) - q.k * (a - 1)
    return pns_curve(a, b, q, grid, pol)


def mean_length_curve(q, grid, pol=None):
    """Mean queue length curve M(t).

    The drift part k(lam - mu)/c1 * t^{a1} E^1_{a1-a2, a1+1}(-(c2/c1) t^{a1-a2})
    plus k mu times the zero-state amplitudes on the running-integral kernel
    K(0, a0).  M(0) = 0.
    """
    pol = pol if pol is not None else TruncationPolicy()
    _validate_inputs(q, grid, pol)
    c1, a1, c2, a2 = effective_orders(q)
    w = q.rate_sum / c1
    ts = grid.ts()
    lkmu = np.log(q.k * q.mu)
    main = _a0_group(np.arange(1, pol.max_m + 1), np.arange(0, pol.max_r + 1),
                     q, shift=lkmu)
    amp = q.k * (q.lam - q.mu) / c1
    if c2 == 0.0:
        drift = amp * ts[1:] ** a1 * np.exp(-gammaln(a1 + 1.0))
    else:
        drift = amp * ts[1:] ** a1 * ml3_neg_grid(
            a1 - a2, a1 + 1.0, 1.0, (c2 / c1) * ts[1:] ** (a1 - a2))
    curve = _assemble(CurveKind.MEAN, grid, main, _a0_faces(q, pol, shift=lkmu),
                      [(0.0, 1.0)], w, c1, c2, a1, a2, pol.eps_rel, ic=0.0,
                      extra=drift)
    return curve


def survival_event_time(theta, q, grid, pol=None):
    """Survival function of an exponential-rate-theta event on the mixed clock.

    S(t) = K(a1, 1, theta/c1) + (c2/c1) K(a2, 1, theta/c1): the same
    functional gives inter-arrival (theta = lam), inter-phase (theta = k mu)
    and sojourn (theta = lam + k mu) times.  S(0) = 1.  The representation
    has a single exact term per component, so the truncation estimate is
    identically zero.

    Parameters
    ----------
    theta : float
        Event rate, theta > 0.
    q : QueueParams
    grid : TimeGrid
    pol : TruncationPolicy, optional

    Returns
    -------
    Curve
        kind Survival.
    """
    pol = pol if pol is not None else TruncationPolicy()
    _validate_inputs(q, grid, pol)
    theta = float(theta)
    if not (np.isfinite(theta) and theta > 0):
        raise ParameterError(f"theta must be positive, got {theta}")
    c1, a1, c2, a2 = effective_orders(q)
    w = theta / c1
    beta_coefs = [(a1, 1.0)] + ([(a2, c2 / c1)] if c2 > 0 else [])
    main = (np.array([1]), np.array([0.0]), np.array([1.0]))
    return _assemble(CurveKind.SURVIVAL, grid, main, [], beta_coefs,
                     w, c1, c2, a1, a2, pol.eps_rel, ic=1.0)


def service_density(q, grid, pol=None):
    """Service-time density f_X(t), the k-fold phase-density convolution.

    Closed form (k mu / c1)^k K(1, k, k mu / c1); at k = 1 this is the
    single-phase density itself.  The t = 0 sample is set to 0 with the
    other series curves; the density may in truth diverge there when
    k a1 < 1, which the t > 0 samples resolve.
    """
    pol = pol if pol is not None else TruncationPolicy()
    _validate_inputs(q, grid, pol)
    c1, a1, c2, a2 = effective_orders(q)
    w = q.k * q.mu / c1
    main = (np.array([q.k]), np.array([q.k * np.log(w)]), np.array([1.0]))
    return _assemble(CurveKind.DENSITY, grid, main, [], [(1.0, 1.0)],
                     w, c1, c2, a1, a2, pol.eps_rel, ic=0.0)


def busy_period_cdf(q, grid, pol=None):
    """Busy-period CDF F_B(t), defective when the queue is unstable.

    Sum over h >= 0 of k mu A0_{k,h} / c1^{a0} times K(0, a0) at orders
    a0 = k + h(k+1).  F_B(0) = 0; the truncation estimate comes from the
    first omitted h-terms.
    """
    pol = pol if pol is not None else TruncationPolicy()
    _validate_inputs(q, grid, pol)
    c1, a1, c2, a2 = effective_orders(q)
    w = q.rate_sum / c1
    lkmu = np.log(q.k * q.mu)

    def line(h_lo, h_hi):
        hs = np.arange(h_lo, h_hi + 1)
        la = _log_a0_amp(q.k, hs, q) + lkmu
        orders = q.k + hs * (q.k + 1)
        return orders, la - orders * np.log(c1), np.ones(orders.size)

    main = line(0, pol.max_r)
    faces = [(line(pol.max_r + 1, pol.max_r + 1),
              line(pol.max_r + 2, pol.max_r + 2))]
    return _assemble(CurveKind.CDF, grid, main, faces, [(0.0, 1.0)],
                     w, c1, c2, a1, a2, pol.eps_rel, ic=0.0)


def _p0_single_order(q, grid, pol):
    """Direct single-order p0 for the pure-clock reduction check.

    Valid only when one mixture weight vanishes: sums the grouped
    amplitudes against t^{a(N-1)} E^N_{a, a(N-1)+1}(-(lam+kmu) t^a) with no
    quadrature and no early stopping, as an independent reference path.
    """
    c1, a1, c2, _ = effective_orders(q)
    if c2 != 0.0:
        raise ParameterError("single-order path requires a vanishing weight")
    orders, logw, _ = _a0_group(np.arange(1, pol.max_m + 1),
                                np.arange(0, pol.max_r + 1), q)
    ts = grid.ts()
    lnt = np.log(ts[1:])
    ys = q.rate_sum * ts[1:] ** a1
    total = np.zeros(grid.n_points)
    total[0] = 1.0
    for N, lw in zip(orders, logw):
        b0 = a1 * N - a1 + 1.0
        total[1:] += ml3_neg_grid(a1, b0, float(N), ys, shift=lw + (b0 - 1.0) * lnt)
    return total


def grid_transform(curve, z):
    """Trapezoid estimate of the curve's Laplace transform at real z > 0.

    Integrates e^{-z t} times the curve over its grid and adds the
    constant-extension tail correction value(t_max) e^{-z t_max} / z.
    """
    z = float(z)
    if not (np.isfinite(z) and z > 0):
        raise ParameterError(f"z must be positive, got {z}")
    ts = curve.grid.ts()
    vals = curve.values
    tail = vals[-1] * np.exp(-z * curve.grid.t_max) / z
    return float(np.trapezoid(np.exp(-z * ts) * vals, ts) + tail)


# ---------------------------------------------------------------------------
# grid convolution with endpoint power singularities
# ---------------------------------------------------------------------------


@dataclass
class GridKernel:
    """Kernel samples on a grid with endpoint-exponent metadata.

    values[i] = kernel(t_i), and kernel(t) ~ const * t^lead as t -> 0+ with
    lead > -1; values[0] holds the limit (0, a finite constant, or inf).
    Kernels whose structure is finer than the grid step may carry refined
    samples on (0, EDGE_CELLS*h] in edge_ts/edge_vals; the convolution
    engine resolves the endpoint region through them and attaches fresh
    ones to its output, so iterated convolutions stay accurate.
    """

    grid: TimeGrid
    values: np.ndarray
    lead: float
    edge_ts: np.ndarray = None
    edge_vals: np.ndarray = None

    def __post_init__(self):
        if not isinstance(self.grid, TimeGrid):
            raise ParameterError("grid must be a TimeGrid")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise ParameterError("values must match the grid length")
        if not (np.isfinite(self.lead) and self.lead > -1.0):
            raise ParameterError(f"lead exponent must exceed -1, got {self.lead}")
        if (self.edge_ts is None) != (self.edge_vals is None):
            raise ParameterError("edge_ts and edge_vals must come together")
        if self.edge_ts is not None:
            self.edge_ts = np.asarray(self.edge_ts, dtype=float)
            self.edge_vals = np.asarray(self.edge_vals, dtype=float)
            top = min(EDGE_CELLS, self.grid.n_points - 1) * self.grid.h
            ok = (self.edge_ts.ndim == 1 and self.edge_ts.size >= 2
                  and self.edge_vals.shape == self.edge_ts.shape
                  and np.all(np.isfinite(self.edge_ts))
                  and np.all(np.isfinite(self.edge_vals))
                  and np.all(np.diff(self.edge_ts) > 0.0)
                  and self.edge_ts[0] > 0.0
                  and self.edge_ts[-1] <= top * (1.0 + 1e-12))
            if not ok:
                raise ParameterError("refined edge samples must be finite, "
                                     "increasing and inside the edge region")


def kernel_on_grid(kind, n_ord, grid, q):
    """Sample one convolution-kernel family member as a GridKernel.

    kind is "f", "g" or "h"; n_ord the family order N.  Positive times come
    from the kernel series; the t = 0 sample is the endpoint limit implied
    by the leading power.
    """
    if not isinstance(grid, TimeGrid):
        raise ParameterError("grid must be a TimeGrid")
    c1, a1, c2, a2 = effective_orders(q)
    lead, off = _kernel_offsets(kind, n_ord, a1, a2)
    ts = grid.ts()
    vals = np.empty(grid.n_points)
    vals[1:] = kernel_grid(kind, n_ord, ts[1:], q)
    if lead > 0:
        vals[0] = 0.0
    elif lead == 0:
        vals[0] = float(np.exp(-gammaln(a1 + off)))
    else:
        vals[0] = np.inf
    te = _edge_partition(grid.h, grid.n_points)
    return GridKernel(grid, vals, lead, edge_ts=te,
                      edge_vals=kernel_grid(kind, n_ord, te, q))


def _smooth_factor(vals, lead, ts):
    """Divide out the endpoint power; extrapolate the t = 0 sample."""
    if lead == 0.0:
        return np.array(vals, dtype=float)
    u = np.empty_like(vals)
    u[1:] = vals[1:] * ts[1:] ** (-lead)
    if vals.size >= 4:
        u[0] = 3.0 * u[1] - 3.0 * u[2] + u[3]
    else:
        u[0] = u[1]
    return u


def _edge_partition(h, n_points):
    """Log-spaced sample times filling the edge region (0, EDGE_CELLS h]."""
    ecap = min(EDGE_CELLS, n_points - 1)
    pts = ecap * h * np.logspace(-float(REFINE_DECADES), 0.0, REFINE_POINTS)
    return np.union1d(pts, h * np.arange(1.0, ecap + 1.0))


def _edge_smooth(kernel):
    """Smooth-factor interpolation table: (log-times, values, left limit).

    Refined edge samples drive the table inside the edge region when the
    kernel carries them; otherwise the coarse piecewise-linear model fills
    that region, which keeps plain sampled kernels on the unrefined
    product-integration behaviour.
    """
    grid = kernel.grid
    ts = grid.ts()
    U = _smooth_factor(kernel.values, kernel.lead, ts)
    if kernel.edge_ts is not None:
        te = kernel.edge_ts
        ue = kernel.edge_vals * te ** (-kernel.lead)
    else:
        ecap = min(EDGE_CELLS, grid.n_points - 1)
        te = _edge_partition(grid.h, grid.n_points)
        ue = np.interp(te, ts[:ecap + 1], U[:ecap + 1])
    keep = ts > te[-1] * (1.0 + 1e-12)
    ta = np.concatenate([te, ts[keep]])
    ua = np.concatenate([ue, U[keep]])
    return np.log(ta), ua, float(ua[0])


def _edge_strip(tab, pexp, other, h, n):
    """Endpoint-strip moments of one singular side for every offset at once.

    Integrates s^{pexp} times the table's piecewise-linear smooth factor
    against the other side's coarse-linear samples over the EDGE_CELLS
    cells nearest s = 0, by exact s^{pexp+c} moments on each table cell.
    """
    lt_tab, u_tab, u0 = tab
    e_cells = EDGE_CELLS
    nodes = np.exp(lt_tab[lt_tab <= np.log(e_cells * h) + 1e-12])
    nodes = np.union1d(nodes, h * np.arange(1.0, e_cells + 1.0))
    un = np.interp(np.log(nodes), lt_tab, u_tab, left=u0)
    lo = np.concatenate([[0.0], nodes[:-1]])
    hi = nodes
    slopes = np.concatenate([[0.0], np.diff(un) / np.diff(nodes)])
    offs = np.concatenate([[u0], un[:-1]]) - slopes * lo
    cell = np.clip((0.5 * (lo + hi) / h).astype(int), 0, e_cells - 1)
    out = np.zeros(n)
    for i in range(e_cells):
        sel = np.nonzero(cell == i)[0]
        if sel.size == 0:
            continue
        vhi = np.zeros(n)
        vlo = np.zeros(n)
        vhi[i:] = other[:n - i]                # other[j - i]
        vlo[i + 1:] = other[:n - i - 1]        # other[j - i - 1]
        slope = (vlo - vhi) / h
        aoff = vhi - slope * (i * h)
        for s in sel:
            au, bu = offs[s], slopes[s]
            m = [(hi[s] ** (pexp + c + 1) - lo[s] ** (pexp + c + 1))
                 / (pexp + c + 1) for c in range(3)]
            out += ((au * aoff) * m[0] + (au * slope + bu * aoff) * m[1]
                    + (bu * slope) * m[2])
    return out


def _conv_pair(ka, kb):
    """Product-integration convolution of two singular-endpoint kernels.

    a ~ t^p, b ~ t^q near zero, p, q > -1, the smooth factors interpolated
    from log-time tables refined inside the edge region.  A Gauss-Jacobi
    rule with the exact two-sided weight handles the shortest offsets and
    the refined samples of the result; exact power moments against the
    tables handle the EDGE_CELLS cells nearest each endpoint; a masked
    trapezoid rule covers the interior.  Error is O(h^2) uniformly in the
    offset once the tables resolve the operands.
    """
    grid = ka.grid
    p, qexp = ka.lead, kb.lead
    ts = grid.ts()
    h = grid.h
    n = grid.n_points
    tab_u = _edge_smooth(ka)
    tab_v = _edge_smooth(kb)
    u = np.array(ka.values, dtype=float)
    v = np.array(kb.values, dtype=float)
    if p != 0.0:
        u[0] = 0.0                             # raw samples; singular origin unused
    if qexp != 0.0:
        v[0] = 0.0
    r_lead = p + qexp + 1.0
    # two-sided Jacobi weight x^p (1-x)^q on (0, 1) for the shortest spans
    xj, wj = roots_jacobi(JACOBI_NODES, qexp, p)
    xs = 0.5 * (1.0 + xj)
    scale = 2.0 ** (-r_lead)

    def span(tj):
        uu = np.interp(np.log(tj * xs), tab_u[0], tab_u[1], left=tab_u[2])
        vv = np.interp(np.log(tj * (1.0 - xs)), tab_v[0], tab_v[1],
                       left=tab_v[2])
        return tj ** r_lead * scale * float(np.dot(wj, uu * vv))

    W = np.zeros(n)
    E = EDGE_CELLS
    top = min(2 * E, n - 1)
    for j in range(1, top + 1):
        W[j] = span(ts[j])
    if n - 1 > 2 * E:
        # interior trapezoid over cells [E, j-E], vectorized for all offsets
        um = np.where(np.arange(n) >= E, u, 0.0)
        vm = np.where(np.arange(n) >= E, v, 0.0)
        conv = np.convolve(um, vm)[:n]
        ue = np.zeros(n)
        ve = np.zeros(n)
        ue[E:] = u[:n - E]
        ve[E:] = v[:n - E]
        mid = h * (conv - 0.5 * (u[E] * ve + ue * v[E]))
        left = _edge_strip(tab_u, p, v, h, n)
        right = _edge_strip(tab_v, qexp, u, h, n)
        body = np.arange(n) > 2 * E
        W[body] = mid[body] + left[body] + right[body]
    if r_lead > 0:
        W[0] = 0.0
    elif r_lead == 0:
        W[0] = float(beta_integral(p + 1.0, qexp + 1.0)) * tab_u[2] * tab_v[2]
    else:
        W[0] = np.inf
    te_out = _edge_partition(h, n)
    return GridKernel(grid, W, r_lead, edge_ts=te_out,
                      edge_vals=np.array([span(t) for t in te_out]))


def nfold_convolve(kernel, N, pol=None):
    """N-fold self-convolution of a grid kernel by binary powering.

    Parameters
    ----------
    kernel : GridKernel
        Samples plus the endpoint exponent; the exponent steers the
        product-integration weights near the singular ends.
    N : int
        Convolution order, N >= 1; N = 1 returns a copy of the input.
    pol : TruncationPolicy, optional
        Supplies max_conv_N.

    Returns
    -------
    GridKernel

    Raises
    ------
    ParameterError
        If N exceeds the policy cap.
    """
    pol = pol if pol is not None else TruncationPolicy()
    if not isinstance(kernel, GridKernel):
        raise ParameterError("kernel must be a GridKernel")
    if not isinstance(pol, TruncationPolicy):
        raise ParameterError("pol must be a TruncationPolicy")
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise ParameterError(f"N must be a positive integer, got {N}")
    if N > pol.max_conv_N:
        raise ParameterError(f"N = {N} exceeds the policy cap {pol.max_conv_N}")
    if N == 1:
        return GridKernel(kernel.grid, kernel.values.copy(), kernel.lead,
                          edge_ts=kernel.edge_ts, edge_vals=kernel.edge_vals)
    result = None
    base = kernel
    nn = int(N)
    while nn:
        if nn & 1:
            result = base if result is None else _conv_pair(result, base)
        nn >>= 1
        if nn:
            base = _conv_pair(base, base)
    if result is kernel:
        return GridKernel(kernel.grid, kernel.values.copy(), kernel.lead,
                          edge_ts=kernel.edge_ts, edge_vals=kernel.edge_vals)
    return result
