"""Dev probe: analytic curves vs Talbot inversion of the closed-form LTs."""
import time
import numpy as np

from merlang.coeffs import QueueParams
from merlang.analytic import (TimeGrid, TruncationPolicy, p0_curve, pns_curve,
                              mean_length_curve, survival_event_time,
                              service_density, busy_period_cdf, grid_transform,
                              _p0_single_order)
from merlang import laplace as L

QF = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)

# coarse grid hitting t = 0.5, 1.0, 2.0, 3.0 exactly
grid = TimeGrid(t_max=3.0, n_points=13)
ts = grid.ts()
pol = TruncationPolicy()


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def check(name, curve, lt_fun, t_list):
    print(f"--- {name}")
    for t in t_list:
        i = int(round(t / grid.h))
        assert abs(ts[i] - t) < 1e-12
        ref = L.invert_lt(lambda z: lt_fun(z), t)
        got = curve.values[i]
        print(f"  t={t:4.2f}  curve={got:.10e}  talbot={ref:.10e}  rel={rel(got, ref):.2e}")


t0 = time.time()
c_p0 = p0_curve(QF, grid, pol)
print(f"p0 curve: {time.time()-t0:.2f}s  flagged={c_p0.flagged}  "
      f"max_tail={c_p0.trunc_error.max():.1e}")
check("p0", c_p0, lambda z: L.lt_p0(z, QF), [0.5, 1.0, 2.0, 3.0])

t0 = time.time()
c_p11 = pns_curve(1, 1, QF, grid, pol)
print(f"pns(1,1) curve: {time.time()-t0:.2f}s  flagged={c_p11.flagged}")
check("pns(1,1)", c_p11, lambda z: L.lt_pns(1, 1, z, QF), [0.5, 1.0, 2.0])

c_p23 = pns_curve(2, 3, QF, grid, pol)
check("pns(2,3)", c_p23, lambda z: L.lt_pns(2, 3, z, QF), [0.5, 1.0])

t0 = time.time()
c_mean = mean_length_curve(QF, grid, pol)
print(f"mean curve: {time.time()-t0:.2f}s  flagged={c_mean.flagged}")
check("mean", c_mean, lambda z: L.lt_mean(z, QF), [0.5, 1.0, 2.0, 3.0])

c_surv = survival_event_time(6.0, QF, grid, pol)
check("survival theta=6", c_surv, lambda z: L.lt_event_survival(6.0, z, QF),
      [0.5, 1.0, 2.0])

c_serv = service_density(QF, grid, pol)
check("service density", c_serv, lambda z: L.lt_service(z, QF), [0.5, 1.0, 2.0])

t0 = time.time()
c_busy = busy_period_cdf(QF, grid, pol)
print(f"busy curve: {time.time()-t0:.2f}s  flagged={c_busy.flagged}")
check("busy cdf", c_busy, lambda z: L.lt_busy(z, QF) / z, [0.5, 1.0, 2.0, 3.0])

# --- classical sanity: k=1, exponential service, c1=1, a1=1
QC = QueueParams(lam=2.0, mu=3.0, k=1, c1=1.0, c2=0.0, alpha1=1.0, alpha2=0.5)
gC = TimeGrid(t_max=2.0, n_points=9)
cC = p0_curve(QC, gC, pol)
# M/M/1 p0(t) reference via a 200-state generator exponential
from scipy.linalg import expm
NS = 200
G = np.zeros((NS, NS))
for j in range(NS):
    if j + 1 < NS:
        G[j, j + 1] = QC.lam
        G[j, j] -= QC.lam
    if j > 0:
        G[j, j - 1] = QC.mu
        G[j, j] -= QC.mu
print("--- classical p0 vs expm")
for t in [0.5, 1.0, 2.0]:
    i = int(round(t / gC.h))
    ref = expm(G * t)[0, 0]
    got = cC.values[i]
    print(f"  t={t:4.2f}  curve={got:.10e}  expm={ref:.10e}  rel={rel(got, ref):.2e}")

# survival classical exactness: theta=lam, e^{-lam t}
cS = survival_event_time(2.0, QC, gC, pol)
errs = np.abs(cS.values - np.exp(-2.0 * gC.ts()))
print(f"classical survival max abs err: {errs.max():.2e}")

# classical mean first term = k(lam-mu) t  (plus kmu running-integral part)
cM = mean_length_curve(QC, gC, pol)
refM = [L.invert_lt(lambda z: L.lt_mean(z, QC), t) for t in [0.5, 1.0, 2.0]]
for t, r in zip([0.5, 1.0, 2.0], refM):
    i = int(round(t / gC.h))
    print(f"  classical mean t={t}: curve={cM.values[i]:.8e} talbot={r:.8e} "
          f"rel={rel(cM.values[i], r):.2e}")

# --- c1=1 pure-fractional reduction: K path vs single-order direct path
QP = QueueParams(lam=6.0, mu=5.0, k=4, c1=1.0, c2=0.0, alpha1=0.6, alpha2=0.3)
polT = TruncationPolicy(eps_rel=1e-13)
gP = TimeGrid(t_max=3.0, n_points=13)
cP = p0_curve(QP, gP, polT)
direct = _p0_single_order(QP, gP, polT)
dmax = np.max(np.abs(cP.values - direct) / np.maximum(np.abs(direct), 1e-300))
print(f"c1=1 reduction: max rel dev = {dmax:.2e}")

# --- skip-bound validation: SKIP_MARGIN on vs effectively off
import merlang.analytic as A
c_on = p0_curve(QF, grid, pol)
A.SKIP_MARGIN = 1e9   # never skip
c_off = p0_curve(QF, grid, pol)
A.SKIP_MARGIN = 6.9
dev = np.max(np.abs(c_on.values - c_off.values))
print(f"skip-bound on/off max abs dev: {dev:.2e}")

# partial normalization at t <= 1
gN = TimeGrid(t_max=1.0, n_points=5)
tot = p0_curve(QF, gN, pol).values.copy()
t0 = time.time()
for n in range(1, 7):
    for s in range(1, QF.k + 1):
        tot += pns_curve(n, s, QF, gN, pol).values
print(f"partial normalization (24 states, {time.time()-t0:.1f}s): "
      f"min={tot[1:].min():.6f} max={tot[1:].max():.6f} (t=0 sum={tot[0]})")
