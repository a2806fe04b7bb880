import time
import numpy as np
import mpmath as mp

from merlang.analytic import (_talbot_terms, _cut_tables, _cut_terms,
                              TimeGrid, TruncationPolicy, p0_curve,
                              pns_curve, mean_length_curve)
from merlang.coeffs import QueueParams
from merlang.laplace import lt_p0, invert_lt


def gold_K(beta, N, w, crat, a1, a2, t, dps=80, degree=150):
    with mp.workdps(dps):
        la1, la2 = mp.mpf(a1), mp.mpf(a2)
        cr, wm = mp.mpf(crat), mp.mpf(w)
        bm = mp.mpf(beta)

        def F(z):
            return z ** (bm - 1) / (z ** la1 + cr * z ** la2 + wm) ** N

        return float(mp.invertlaplace(F, t, method="talbot", degree=degree))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


print("== overlap regime: a1=0.6 a2=0.3 crat=1.5 w=65 ==", flush=True)
ts = np.array([0.1, 1.0, 3.0])
for N in (20, 100):
    for betas in ([(0.6, 1.0), (0.3, 1.5)], [(0.0, 1.0)]):
        orders = np.array([N])
        logw = np.array([0.0])
        signs = np.array([1.0])
        t0 = time.time()
        tt = _talbot_terms(orders, logw, signs, betas, 65.0, 1.5, 0.6, 0.3, ts)
        dt = time.time() - t0
        tab = _cut_tables(ts, 65.0, 0.6, 0.3, 1.5, 1e-10)
        ct = (_cut_terms(orders, logw, betas, tab, ts))[0]
        for i, t in enumerate(ts):
            g = sum(c * gold_K(b, N, 65.0, 1.5, 0.6, 0.3, t)
                    for b, c in betas)
            print(f"N={N:3d} betas={betas[0][0]:.1f} t={t:.1f} "
                  f"talbot={tt[i]: .6e} rel={rel(tt[i], g):.2e}  "
                  f"cut rel={rel(ct[i], g):.2e}  ({dt:.2f}s)", flush=True)

print("== deep regime: a1=0.9 a2=0.8 crat=4 w=200 N=20 ==", flush=True)
for betas in ([(0.9, 1.0), (0.8, 4.0)], [(0.0, 1.0)]):
    orders = np.array([20])
    logw = np.array([0.0])
    signs = np.array([1.0])
    t0 = time.time()
    tt = _talbot_terms(orders, logw, signs, betas, 200.0, 4.0, 0.9, 0.8, ts)
    dt = time.time() - t0
    for i, t in enumerate(ts):
        g = sum(c * gold_K(b, 20, 200.0, 4.0, 0.9, 0.8, t, dps=100,
                           degree=200) for b, c in betas)
        print(f"betas={betas[0][0]:.1f} t={t:.1f} talbot={tt[i]: .6e} "
              f"rel={rel(tt[i], g):.2e}  ({dt:.2f}s)", flush=True)

print("== multi-diagonal deep batch: N=17..40 mixed signs ==", flush=True)
orders = np.arange(17, 41)
logw = np.linspace(0.0, 30.0, orders.size)
signs = np.where(orders % 2 == 0, 1.0, -1.0)
betas = [(0.9, 1.0), (0.8, 4.0)]
t0 = time.time()
tt = _talbot_terms(orders, logw, signs, betas, 200.0, 4.0, 0.9, 0.8, ts)
dt = time.time() - t0
for i, t in enumerate(ts):
    g = 0.0
    for d in range(orders.size):
        g += signs[d] * np.exp(logw[d]) * sum(
            c * gold_K(b, int(orders[d]), 200.0, 4.0, 0.9, 0.8, t,
                       dps=120, degree=260) for b, c in betas)
    print(f"t={t:.1f} batch={tt[i]: .6e} rel={rel(tt[i], g):.2e} "
          f"({dt:.2f}s total)", flush=True)

print("== large-a1 p0 curve: a1=0.9 a2=0.8 c1=0.2 caps=16 ==", flush=True)
qh = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.2, c2=0.8, alpha1=0.9, alpha2=0.8)
grid = TimeGrid(2.0, 5)
pol = TruncationPolicy(max_m=16, max_r=16)
t0 = time.time()
cv = p0_curve(qh, grid, pol)
dt = time.time() - t0
worst = 0.0
for i, t in enumerate(cv.grid.ts()):
    if t == 0.0:
        continue
    ref = invert_lt(lambda z: lt_p0(z, qh), t)
    r = rel(cv.values[i], ref)
    worst = max(worst, r)
    print(f"t={t:.2f} p0={cv.values[i]:.10f} ref={ref:.10f} rel={r:.2e}",
          flush=True)
print(f"worst rel={worst:.2e} flagged={cv.flagged} time={dt:.1f}s", flush=True)
