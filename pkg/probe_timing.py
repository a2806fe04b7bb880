"""Instrument the diagonal loop: where does the time go."""
import time
import numpy as np

from merlang.coeffs import QueueParams, effective_orders
import merlang.analytic as A
from merlang import specfun

QF = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)
pol = A.TruncationPolicy()
c1, a1, c2, a2 = effective_orders(QF)
w = QF.rate_sum / c1
orders, logw = A._a0_diagonals(QF, pol)
print(f"{orders.size} diagonals, N from {orders[0]} to {orders[-1]}", flush=True)

ts = np.array([3.0])
lnt = np.log(ts)
beta_coefs = [(a1, c1), (a2, c2)]

# walk diagonals manually at the single worst point t=3
acc = 0.0
for d in range(orders.size):
    est = A._diag_bound(orders[d], logw[d], beta_coefs, w, a1, ts, lnt)[0]
    thresh = np.log(pol.eps_rel * max(abs(acc), 1e-15)) - A.SKIP_MARGIN
    if est < thresh:
        print(f"N={orders[d]:4d} skipped (est {est:8.2f} < {thresh:8.2f})", flush=True)
        if orders[d] > 40:
            break
        continue
    t0 = time.time()
    njs = [0]
    orig = specfun.ml3_neg_grid
    def counting(*a, **k):
        njs[0] += 1
        return orig(*a, **k)
    A.ml3_neg_grid = counting
    tot = 0.0
    try:
        for beta, coef in beta_coefs:
            kv, kt = A._k_family(beta, orders[d], w, c1, c2, a1, a2, ts,
                                 logw[d] + np.log(coef), pol.eps_rel)
            tot += kv[0]
    finally:
        A.ml3_neg_grid = orig
    acc += tot
    dt = time.time() - t0
    print(f"N={orders[d]:4d} est={est:8.2f} term={tot:+.3e} acc={acc:.6e} "
          f"j_calls={njs[0]:4d} dt={dt:6.2f}s", flush=True)
    if dt > 30:
        print("...one diagonal above 30s, aborting walk", flush=True)
        break
