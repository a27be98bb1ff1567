# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled closed-loop kernels. Must stay operation-for-operation identical
to ``_kernels_py`` so both backends produce the same floats."""
import numpy as np

from libc.math cimport sin, cos, pow, isfinite, fabs

cdef double TWO_PI = 6.283185307179586
cdef double FORCE_LIMIT = 1000.0


cdef inline double _contact(double k, double n, double c, double s, double sd) noexcept nogil:
    cdef double f
    if s <= 0.0:
        return 0.0
    f = k * pow(s, n) + c * sd
    return f if f > 0.0 else 0.0


def force_loop(const double[:] f_d, const double[:] ref_x, const double[:] ref_xd,
               const double[:] ref_xdd, double x0, double f_meas0,
               double m, double b, double sigma, double T,
               double k, double n, double c,
               bint vibrate, double f_activate, double vib_freq, double vib_amp):
    cdef Py_ssize_t N = f_d.shape[0]
    depth_a = np.zeros(N)
    rate_a = np.zeros(N)
    fz_a = np.zeros(N)
    xc_a = np.zeros(N)
    phi_a = np.zeros(N)
    cdef double[:] depth = depth_a
    cdef double[:] rate = rate_a
    cdef double[:] fz = fz_a
    cdef double[:] xc = xc_a
    cdef double[:] phis = phi_a
    cdef double x = x0, xd = 0.0, xdd, phi = 0.0, ferr = 0.0, f_meas = f_meas0
    cdef double t, s, sd, f, ph, t_act = 0.0
    cdef double w = TWO_PI * vib_freq
    cdef Py_ssize_t i, act = -1, bad = -1
    with nogil:
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
            f = _contact(k, n, c, s, sd)
            depth[i] = s
            rate[i] = sd
            fz[i] = f
            xc[i] = x
            phis[i] = phi
            if not (isfinite(x) and isfinite(xd) and isfinite(phi) and isfinite(f)) or fabs(f) > FORCE_LIMIT:
                bad = i
                break
            f_meas = f
    return depth_a, rate_a, fz_a, xc_a, phi_a, act, bad


def admittance_rollout(const double[:] f_e, const double[:] f_d,
                       double m, double b, double sigma, double T):
    """Open-loop controller run against a static zero reference."""
    cdef Py_ssize_t N = f_e.shape[0]
    x_a = np.zeros(N)
    xd_a = np.zeros(N)
    xdd_a = np.zeros(N)
    phi_a = np.zeros(N)
    cdef double[:] xs = x_a
    cdef double[:] xds = xd_a
    cdef double[:] xdds = xdd_a
    cdef double[:] phis = phi_a
    cdef double x = 0.0, xd = 0.0, xdd, phi = 0.0, ferr = 0.0
    cdef Py_ssize_t i
    with nogil:
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
    return x_a, xd_a, xdd_a, phi_a
