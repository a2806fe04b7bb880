"""Validate the branch-cut quadrature for K(beta, N, w) vs mpmath inversion."""
import time
import numpy as np
import mpmath as mp


def k_cut(beta, N, w, a1, a2, crat, ts, step=0.25, logw=0.0):
    """K(beta,N,w)(t)*e^{logw} via the log-grid branch-cut trapezoid."""
    ts = np.asarray(ts, float)
    t_min = ts.min()
    u_max = np.log(745.0 / t_min)
    a_floor = max(min(a1, a2), 0.05)
    u_min = np.log(1e-11) / a_floor
    us = np.arange(u_min, u_max + step, step)
    rs = np.exp(us)
    d = rs ** a1 * np.exp(1j * np.pi * a1) + crat * rs ** a2 * np.exp(1j * np.pi * a2) + w
    lad = np.log(np.abs(d))
    agd = np.angle(d)
    lm = beta * us + logw - N * lad
    ang = np.pi * (beta - 1.0) - N * agd
    wts = (-step / np.pi) * np.exp(lm) * np.sin(ang)
    E = np.exp(-np.outer(rs, ts))
    return wts @ E


def k_ref(beta, N, w, a1, a2, crat, t, dps=50):
    """Independent reference by Talbot inversion in mpmath."""
    with mp.workdps(dps):
        f = lambda z: z ** (beta - 1.0) / (z ** a1 + crat * z ** a2 + w) ** N
        return float(mp.invertlaplace(f, t, method="talbot", degree=int(dps * 1.4)))


CASES = [
    # (a1, a2, crat, w, label)
    (0.5, 0.3, 1.5, 65.0, "figure params"),
    (0.7, 0.05, 0.25, 10.0, "small a2"),
    (0.9, 0.8, 4.0, 200.0, "heavy mix"),
    (0.6, 0.3, 0.0, 26.0, "pure c2=0"),
]

for a1, a2, crat, w, label in CASES:
    print(f"=== {label}: a1={a1} a2={a2} crat={crat} w={w}", flush=True)
    worst = 0.0
    for beta in (a1, a2, 0.0, 1.0):
        for N in (1, 4, 20, 100, 600):
            ts = np.array([1e-3, 0.1, 1.0, 3.0])
            t0 = time.time()
            got = k_cut(beta, N, w, a1, a2, crat, ts)
            dt = time.time() - t0
            for i, t in enumerate(ts):
                ref = k_ref(beta, N, w, a1, a2, crat, t)
                if ref == 0.0 and abs(got[i]) < 1e-250:
                    continue
                # absolute scale floor: terms below e^{-60} never matter
                if abs(ref) < 1e-260:
                    continue
                rel = abs(got[i] - ref) / abs(ref)
                worst = max(worst, rel) if abs(ref) > 1e-200 else worst
                mark = " <-- " if rel > 1e-9 and abs(ref) > 1e-150 else ""
                if rel > 1e-10 and abs(ref) > 1e-150:
                    print(f"  beta={beta:4.2f} N={N:3d} t={t:6.3f} "
                          f"got={got[i]: .6e} ref={ref: .6e} rel={rel:.1e}{mark}",
                          flush=True)
    print(f"  worst rel (refs above 1e-200): {worst:.2e}", flush=True)
