import time
import numpy as np
from merlang import (QueueParams, TimeGrid, TruncationPolicy, p0_curve, pns_curve,
                     mean_length_curve, survival_event_time, service_density,
                     busy_period_cdf, queue_length_pmf)
from merlang.laplace import (lt_p0, lt_pns, lt_mean, lt_busy, lt_event_survival,
                             lt_service, invert_lt)

q = QueueParams(lam=6.0, mu=5.0, k=4, c1=0.4, c2=0.6, alpha1=0.5, alpha2=0.3)
grid = TimeGrid(3.0, 31)
pol = TruncationPolicy(max_m=100, max_r=100, max_i=100)
TS = (0.5, 1.0, 3.0)

def check(name, curve, lt, ts=TS):
    for t in ts:
        ref = invert_lt(lt, t)
        v = curve.value_at(t)
        rel = abs(v - ref) / max(abs(ref), 1e-300)
        print(f"  {name} t={t}: val={v:.10e} ref={ref:.10e} rel={rel:.2e}", flush=True)

t0 = time.time()
c = pns_curve(1, 1, q, grid, pol)
print(f"pns(1,1) time={time.time()-t0:.2f}s flagged={c.flagged}", flush=True)
check("pns(1,1)", c, lambda z: lt_pns(1, 1, z, q))

t0 = time.time()
c = pns_curve(2, 3, q, grid, pol)
print(f"pns(2,3) time={time.time()-t0:.2f}s flagged={c.flagged}", flush=True)
check("pns(2,3)", c, lambda z: lt_pns(2, 3, z, q))

t0 = time.time()
c = mean_length_curve(q, grid, pol)
print(f"mean time={time.time()-t0:.2f}s flagged={c.flagged}", flush=True)
check("mean", c, lambda z: lt_mean(z, q))

t0 = time.time()
c = survival_event_time(6.0, q, grid, pol)
print(f"survival(6) time={time.time()-t0:.2f}s flagged={c.flagged}", flush=True)
check("survival", c, lambda z: lt_event_survival(6.0, z, q))

t0 = time.time()
c = service_density(q, grid, pol)
print(f"service time={time.time()-t0:.2f}s flagged={c.flagged}", flush=True)
check("service", c, lambda z: lt_service(z, q))

t0 = time.time()
c = busy_period_cdf(q, grid, pol)
print(f"busy time={time.time()-t0:.2f}s flagged={c.flagged}", flush=True)
check("busy", c, lambda z: lt_busy(z, q) / z)
