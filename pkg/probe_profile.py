"""Diagonal term profiles T_N(t) for p0: shape of the N-tail at fixed t."""
import numpy as np

from merlang.coeffs import QueueParams, effective_orders
import merlang.analytic as A

QF = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)
pol = A.TruncationPolicy()
c1, a1, c2, a2 = effective_orders(QF)
w = QF.rate_sum / c1
orders, logw = A._a0_diagonals(QF, pol)
logw = logw - orders * np.log(c1)

picks = list(range(0, 30, 3)) + list(range(30, 239, 20)) + [239]
for t in (0.25, 1.0, 3.0):
    ts = np.array([t])
    print(f"--- t = {t}", flush=True)
    prev = None
    prev_n = None
    for d in picks:
        tot = 0.0
        for beta, coef in [(a1, c1), (a2, c2)]:
            kv, _ = A._k_family(beta, orders[d], w, c1, c2, a1, a2, ts,
                                logw[d] + np.log(coef), pol.eps_rel)
            tot += kv[0]
        note = ""
        if prev is not None and prev > 0 and tot > 0:
            rho = (tot / prev) ** (1.0 / (orders[d] - prev_n))
            note = f"  per-N ratio={rho:.4f}"
        print(f"  N={orders[d]:4d}  T_N={tot:10.3e}{note}", flush=True)
        prev, prev_n = tot, orders[d]
