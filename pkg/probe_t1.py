"""Isolate the t=1 discrepancy: manual walk vs vector path vs Talbot."""
import time
import numpy as np

from merlang.coeffs import QueueParams, effective_orders
import merlang.analytic as A
import merlang.specfun as S
from merlang import laplace as L

QF = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)
pol = A.TruncationPolicy()
c1, a1, c2, a2 = effective_orders(QF)
w = QF.rate_sum / c1
orders, logw = A._a0_diagonals(QF, pol)
logw = logw - orders * np.log(c1)
beta_coefs = [(a1, c1), (a2, c2)]

ref = L.invert_lt(lambda z: L.lt_p0(z, QF), 1.0)
print(f"talbot p0(1.0) = {ref:.12e}", flush=True)

# --- count specfun dispatch methods during the walk
calls = {"n": 0, "mp_redo": 0, "pts": 0}
orig_mp = S._ml3_mp
def counting_mp(*a, **k):
    calls["mp_redo"] += 1
    return orig_mp(*a, **k)
S._ml3_mp = counting_mp

ts = np.array([1.0])
lnt = np.log(ts)
acc = 0.0
t0 = time.time()
for d in range(orders.size):
    tot = 0.0
    for beta, coef in beta_coefs:
        kv, kt = A._k_family(beta, orders[d], w, c1, c2, a1, a2, ts,
                             logw[d] + np.log(coef), pol.eps_rel)
        tot += kv[0]
    acc += tot
    if abs(tot) < 1e-16 * abs(acc) and d > 3:
        break
print(f"walk t=1: acc={acc:.12e}  rel_vs_talbot={abs(acc-ref)/ref:.2e}  "
      f"diags={d+1}  mp_redo_calls={calls['mp_redo']}  dt={time.time()-t0:.1f}s",
      flush=True)
S._ml3_mp = orig_mp

# --- vector path on a tiny grid containing t=1
calls["mp_redo"] = 0
S._ml3_mp = counting_mp
grid = A.TimeGrid(t_max=3.0, n_points=13)
t0 = time.time()
cv = A.p0_curve(QF, grid, pol)
S._ml3_mp = orig_mp
i = 4  # t=1.0 on this grid
print(f"vector t=1: {cv.values[i]:.12e}  rel_vs_talbot="
      f"{abs(cv.values[i]-ref)/ref:.2e}  mp_redo={calls['mp_redo']}  "
      f"dt={time.time()-t0:.1f}s  flagged={cv.flagged}", flush=True)
print(f"tail at t=1: {cv.trunc_error[i]:.2e}; max tail {cv.trunc_error.max():.2e} "
      f"at t={grid.ts()[np.argmax(cv.trunc_error)]}", flush=True)
