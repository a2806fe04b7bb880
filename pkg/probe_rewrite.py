import time
import numpy as np
from merlang import QueueParams, TimeGrid, TruncationPolicy, p0_curve
from merlang.laplace import lt_p0, invert_lt

q = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)

REF = {}
for t in (0.1, 0.5, 1.0, 2.0, 3.0):
    REF[t] = invert_lt(lambda z: lt_p0(z, q), t)
    print(f"ref p0({t}) = {REF[t]:.12e}", flush=True)

grid = TimeGrid(3.0, 31)
for caps in (40, 100):
    pol = TruncationPolicy(max_m=caps, max_r=caps)
    t0 = time.time()
    cur = p0_curve(q, grid, pol)
    dt = time.time() - t0
    print(f"\ncaps={caps}  time={dt:.2f}s  flagged={cur.flagged}", flush=True)
    for t in REF:
        v = cur.value_at(t)
        i = int(round(t / 3.0 * 30))
        err = abs(v - REF[t]) / REF[t]
        print(f"  t={t}: val={v:.12e} rel_err={err:.2e} tail={cur.trunc_error[i]:.2e}"
              f" actual_def={abs(v - REF[t]):.2e}", flush=True)
