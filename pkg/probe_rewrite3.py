import time
import numpy as np
from scipy.linalg import expm
from merlang import (QueueParams, TimeGrid, TruncationPolicy, p0_curve, pns_curve,
                     busy_period_cdf, mean_length_curve)
from merlang.analytic import _p0_single_order
from merlang.laplace import lt_p0, invert_lt

# --- classical case vs matrix exponential ------------------------------
qc = QueueParams(lam=6.0, mu=5.0, k=4, c1=1.0, c2=0.0, alpha1=1.0, alpha2=0.3)
LMAX = 400
gen = np.zeros((LMAX + 1, LMAX + 1))
for L in range(LMAX + 1):
    if L + qc.k <= LMAX:
        gen[L, L + qc.k] += qc.lam
        gen[L, L] -= qc.lam
    if L >= 1:
        gen[L, L - 1] += qc.k * qc.mu
        gen[L, L] -= qc.k * qc.mu
grid = TimeGrid(3.0, 13)
pol = TruncationPolicy(max_m=100, max_r=100, max_i=100)
t0 = time.time()
cp = p0_curve(qc, grid, pol)
c11 = pns_curve(1, 1, qc, grid, pol)
c23 = pns_curve(2, 3, qc, grid, pol)
print(f"classical curves time={time.time()-t0:.2f}s", flush=True)
worst = 0.0
for i, t in enumerate(grid.ts()):
    P = expm(gen.T * t)[:, 0]   # column: start in state 0
    worst = max(worst,
                abs(cp.values[i] - P[0]),
                abs(c11.values[i] - P[qc.k * 0 + 1]),
                abs(c23.values[i] - P[qc.k * 1 + 3]))
print(f"classical p0/pns vs expm worst abs err = {worst:.2e}", flush=True)

# classical busy period vs absorbing chain
genb = gen.copy()
genb[0, :] = 0.0   # absorb at empty
cb = busy_period_cdf(qc, grid, pol)
worst = 0.0
for i, t in enumerate(grid.ts()):
    if t == 0.0:
        continue
    P = expm(genb.T * t)[:, qc.k]   # start with one customer: k phases
    worst = max(worst, abs(cb.values[i] - P[0]))
print(f"classical busy vs absorbing expm worst abs err = {worst:.2e}", flush=True)

# --- c1 = 1 pure-clock reduction ---------------------------------------
qr = QueueParams(lam=6.0, mu=5.0, k=4, c1=1.0, c2=0.0, alpha1=0.45, alpha2=0.3)
polr = TruncationPolicy(eps_rel=1e-13, max_m=12, max_r=12)
gr = TimeGrid(3.0, 61)
cr = p0_curve(qr, gr, polr)
ref = _p0_single_order(qr, gr, polr)
print(f"c1=1 reduction max |diff| = {np.abs(cr.values - ref).max():.2e}", flush=True)

# --- partial normalization at Figure params ----------------------------
q = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)
g2 = TimeGrid(1.0, 6)
t0 = time.time()
tot = p0_curve(q, g2, pol).values.copy()
for n in range(1, 7):
    for s in range(1, 5):
        tot += pns_curve(n, s, q, g2, pol).values
print(f"partial normalization (24 states) time={time.time()-t0:.1f}s "
      f"min={tot.min():.6f} max={tot.max():.6f}", flush=True)

# --- deep-diagonal path: large alpha1 mixed case -----------------------
qh = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.2, c2=0.8, alpha1=0.9, alpha2=0.8)
gh = TimeGrid(2.0, 5)
polh = TruncationPolicy(max_m=16, max_r=16)
t0 = time.time()
ch = p0_curve(qh, gh, polh)
print(f"\nlarge-a1 p0 time={time.time()-t0:.1f}s flagged={ch.flagged}", flush=True)
for i, t in enumerate(gh.ts()):
    if t == 0.0:
        continue
    ref = invert_lt(lambda z: lt_p0(z, qh), t)
    print(f"  t={t}: val={ch.values[i]:.10e} ref={ref:.10e} "
          f"rel={abs(ch.values[i]-ref)/ref:.2e} tail={ch.trunc_error[i]:.2e}", flush=True)

# --- full-grid timing ---------------------------------------------------
gf = TimeGrid(3.0, 3001)
t0 = time.time()
cf = p0_curve(q, gf, TruncationPolicy(max_m=40, max_r=40))
print(f"\nfull 3001-grid p0 caps=40: {time.time()-t0:.2f}s", flush=True)
t0 = time.time()
cf = p0_curve(q, gf, TruncationPolicy(max_m=100, max_r=100))
print(f"full 3001-grid p0 caps=100: {time.time()-t0:.2f}s", flush=True)
t0 = time.time()
cm = pns_curve(1, 1, q, gf, pol)
print(f"full 3001-grid pns(1,1) caps=100: {time.time()-t0:.2f}s", flush=True)
t0 = time.time()
cmean = mean_length_curve(q, gf, pol)
print(f"full 3001-grid mean caps=100: {time.time()-t0:.2f}s", flush=True)
