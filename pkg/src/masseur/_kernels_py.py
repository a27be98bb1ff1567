"""Pure-Python twin of ``_kernels.pyx``. Keep the arithmetic order identical."""
import math

import numpy as np

TWO_PI = 6.283185307179586
FORCE_LIMIT = 1000.0


def force_loop(f_d, ref_x, ref_xd, ref_xdd, x0, f_meas0, m, b, sigma, T, k, n, c,
               vibrate, f_activate, vib_freq, vib_amp):
    f_d = np.asarray(f_d, dtype=float).tolist()
    ref_xd = np.asarray(ref_xd, dtype=float).tolist()
    ref_xdd = np.asarray(ref_xdd, dtype=float).tolist()
    N = len(f_d)
    depth = [0.0] * N
    rate = [0.0] * N
    fz = [0.0] * N
    xc = [0.0] * N
    phis = [0.0] * N
    x, xd, phi, ferr, f_meas = float(x0), 0.0, 0.0, 0.0, float(f_meas0)
    w = TWO_PI * vib_freq
    t_act = 0.0
    act = bad = -1
    sin, cos, isfinite = math.sin, math.cos, math.isfinite
    for i in range(N):
        t = i * T
        phi = phi + sigma * ferr / b
        xdd = ref_xdd[i] + ((f_d[i] - f_meas) - b * (xd - ref_xd[i]) - phi) / m
        xd = xd + xdd * T
        x = x + xd * T
        ferr = f_meas - f_d[i]
        s = x
        sd = xd
        if vibrate:
            if act < 0 and f_meas >= f_activate:
                act = i
                t_act = t
            if act >= 0:
                ph = w * (t - t_act)
                s = s + vib_amp * sin(ph)
                sd = sd + vib_amp * w * cos(ph)
        if s <= 0.0:
            f = 0.0
        else:
            try:
                f = k * s ** n + c * sd
            except OverflowError:
                f = math.inf
            if not f > 0.0:
                f = 0.0
        depth[i] = s
        rate[i] = sd
        fz[i] = f
        xc[i] = x
        phis[i] = phi
        if not (isfinite(x) and isfinite(xd) and isfinite(phi) and isfinite(f)) or abs(f) > FORCE_LIMIT:
            bad = i
            break
        f_meas = f
    arr = np.array
    return arr(depth), arr(rate), arr(fz), arr(xc), arr(phis), act, bad


def admittance_rollout(f_e, f_d, m, b, sigma, T):
    f_e = np.asarray(f_e, dtype=float).tolist()
    f_d = np.asarray(f_d, dtype=float).tolist()
    N = len(f_e)
    xs = [0.0] * N
    xds = [0.0] * N
    xdds = [0.0] * N
    phis = [0.0] * N
    x = xd = phi = ferr = 0.0
    for i in range(N):
        phi = phi + sigma * ferr / b
        xdd = 0.0 + ((f_d[i] - f_e[i]) - b * (xd - 0.0) - phi) / m
        xd = xd + xdd * T
        x = x + xd * T
        ferr = f_e[i] - f_d[i]
        xs[i] = x
        xds[i] = xd
        xdds[i] = xdd
        phis[i] = phi
    return np.array(xs), np.array(xds), np.array(xdds), np.array(phis)
