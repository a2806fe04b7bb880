"""Error scaling of the cut quadrature in (N, step); beta=0 residue fix."""
import numpy as np
import mpmath as mp


def k_cut(beta, N, w, a1, a2, crat, ts, step, relfloor=1e-11):
    ts = np.asarray(ts, float)
    u_max = np.log(745.0 / ts.min())
    a_floor = max(min(a1, a2) if crat > 0 else a1, 0.05)
    u_min = np.log(relfloor) / a_floor
    us = np.arange(u_min, u_max + step, step)
    rs = np.exp(us)
    d = rs ** a1 * np.exp(1j * np.pi * a1) + crat * rs ** a2 * np.exp(1j * np.pi * a2) + w
    lm = beta * us - N * np.log(np.abs(d))
    ang = np.pi * (beta - 1.0) - N * np.angle(d)
    wts = (-step / np.pi) * np.exp(lm) * np.sin(ang)
    out = wts @ np.exp(-np.outer(rs, ts))
    if beta == 0.0:
        out += np.exp(-N * np.log(w))
    return out


def k_ref(beta, N, w, a1, a2, crat, t, dps=60):
    with mp.workdps(dps):
        f = lambda z: z ** (beta - 1.0) / (z ** a1 + crat * z ** a2 + w) ** N
        return float(mp.invertlaplace(f, t, method="talbot", degree=int(dps * 1.4)))


def worst_rel(beta, N, w, a1, a2, crat, step):
    # evaluate near the term's own plateau: t with w t^{a1} ~ a1 N, plus wings
    t_peak = (max(a1 * N, 1.0) / w) ** (1.0 / a1)
    ts = np.unique(np.clip([t_peak / 3, t_peak, 3 * t_peak, 1.0, 3.0], 1e-3, 50.0))
    got = k_cut(beta, N, w, a1, a2, crat, ts, step)
    worst = 0.0
    for i, t in enumerate(ts):
        ref = k_ref(beta, N, w, a1, a2, crat, float(t))
        if abs(ref) < 1e-200:
            continue
        worst = max(worst, abs(got[i] - ref) / abs(ref))
    return worst


print("case: figure a1=0.5 a2=0.3 crat=1.5 w=65   beta=0.5", flush=True)
for N in (20, 100, 300):
    row = f"  N={N:4d}:"
    for step in (0.25, 0.125, 0.0625, 0.03125):
        row += f"  h={step}: {worst_rel(0.5, N, 65.0, 0.5, 0.3, 1.5, step):.1e}"
    print(row, flush=True)

print("case: pure a1=0.6 w=26   beta=0.6", flush=True)
for N in (20, 100, 300):
    row = f"  N={N:4d}:"
    for step in (0.25, 0.125, 0.0625, 0.03125):
        row += f"  h={step}: {worst_rel(0.6, N, 26.0, 0.6, 0.3, 0.0, step):.1e}"
    print(row, flush=True)

print("case: heavy a1=0.9 a2=0.8 crat=4 w=200  beta=0.9", flush=True)
for N in (20, 100, 300):
    row = f"  N={N:4d}:"
    for step in (0.25, 0.125, 0.0625, 0.03125):
        row += f"  h={step}: {worst_rel(0.9, N, 200.0, 0.9, 0.8, 4.0, step):.1e}"
    print(row, flush=True)

print("beta=0 residue check, figure params", flush=True)
for N in (1, 4, 20):
    for t in (0.001, 1.0, 3.0):
        got = k_cut(0.0, N, 65.0, 0.5, 0.3, 1.5, np.array([t]), 0.0625)[0]
        ref = k_ref(0.0, N, 65.0, 0.5, 0.3, 1.5, t)
        print(f"  N={N:3d} t={t:6.3f} rel={abs(got-ref)/abs(ref):.1e}", flush=True)
