# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Same algorithms, constants and operation order as the pure-Python twin in
``_kernels_py``; that module is the readable reference.  Only the inner
loops differ (C doubles and fixed-size arrays instead of tuples).
"""

import numpy as np

from libc.math cimport ceil, exp, fabs, floor, isfinite, pow, sqrt

BACKEND_NAME = "compiled"

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_NONFINITE = 3
STATUS_NEGATIVE = 4

cdef double _C2 = 1.0 / 5.0
cdef double _C3 = 3.0 / 10.0
cdef double _C4 = 4.0 / 5.0
cdef double _C5 = 8.0 / 9.0

cdef double _A21 = 1.0 / 5.0
cdef double _A31 = 3.0 / 40.0
cdef double _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0
cdef double _A42 = -56.0 / 15.0
cdef double _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0
cdef double _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0
cdef double _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0
cdef double _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0
cdef double _A64 = 49.0 / 176.0
cdef double _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0
cdef double _B3 = 500.0 / 1113.0
cdef double _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0
cdef double _B6 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0
cdef double _E3 = -71.0 / 16695.0
cdef double _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0
cdef double _E6 = 22.0 / 525.0
cdef double _E7 = -1.0 / 40.0

cdef double _SAFETY = 0.9
cdef double _MIN_FACTOR = 0.2
cdef double _MAX_FACTOR = 5.0


cdef inline void _rhs(const double* y, const double* p, double* out) noexcept nogil:
    cdef double x = y[0], yy = y[1], z = y[2], v = y[3], s = y[4]
    cdef double r = p[0], k = p[1], al = p[2], ph = p[3], lm = p[4]
    cdef double c1 = p[5], c2 = p[6], d = p[7], de = p[8], th = p[9]
    cdef double ga = p[10], mu = p[11], m1 = p[12], m2 = p[13]
    out[0] = r * x * (1.0 - x / k) - al * x * yy - ph * al * x * z
    out[1] = c1 * al * x * yy - lm * yy * v - d * yy - m1 * s * yy
    out[2] = c2 * ph * al * x * z + lm * yy * v - (d + de) * z - m2 * s * z
    out[3] = th * (d + de) * z - ga * v
    out[4] = -mu * s


cdef inline double _step_factor(double norm) noexcept nogil:
    cdef double factor
    if norm == 0.0:
        return _MAX_FACTOR
    factor = _SAFETY * pow(norm, -0.2)
    if factor < _MIN_FACTOR:
        return _MIN_FACTOR
    if factor > _MAX_FACTOR:
        return _MAX_FACTOR
    return factor


def integrate_segment(y0, double t0, double t1, p, double rtol, double atol,
                      double h0, double hmax, long max_steps):
    """See _kernels_py.integrate_segment; identical contract and results."""
    cdef double pp[14]
    cdef double y[5]
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double k5[5]
    cdef double k6[5]
    cdef double k7[5]
    cdef double ytmp[5]
    cdef double ynew[5]
    cdef double err[5]
    cdef double err_accum[5]
    cdef double* stages[7]
    cdef int i, si
    cdef long n = 0, naccept = 0, nreject = 0, nfev = 0, nclamp = 0
    cdef long cap = 1024
    cdef int status = STATUS_OK
    cdef bint boundary, finite_ok, clamped, negative
    cdef double t = t0, t_end = t1, t_fail = t1, t_next
    cdef double h, h_use, sc, q, acc, norm

    for i in range(14):
        pp[i] = p[i]
    for i in range(5):
        y[i] = y0[i]
        err_accum[i] = 0.0
    stages[0] = k1; stages[1] = k2; stages[2] = k3; stages[3] = k4
    stages[4] = k5; stages[5] = k6; stages[6] = k7

    ts_arr = np.empty(cap)
    hs_arr = np.empty(cap)
    ys_arr = np.empty((cap + 1, 5))
    ks_arr = np.empty((cap, 7, 5))
    cdef double[:] ts_v = ts_arr
    cdef double[:] hs_v = hs_arr
    cdef double[:, :] ys_v = ys_arr
    cdef double[:, :, :] ks_v = ks_arr
    for i in range(5):
        ys_v[0, i] = y[i]

    h = h0
    if hmax < h:
        h = hmax
    if t_end - t < h:
        h = t_end - t

    _rhs(y, pp, k1)
    nfev = 1

    while t < t_end:
        if naccept + nreject >= max_steps:
            status = STATUS_MAX_STEPS
            t_fail = t
            break
        boundary = h >= t_end - t
        h_use = t_end - t if boundary else h
        if (not boundary) and h_use < 1e-13 * max(1.0, fabs(t)):
            status = STATUS_STEP_UNDERFLOW
            t_fail = t
            break

        for i in range(5):
            ytmp[i] = y[i] + h_use * (_A21 * k1[i])
        _rhs(ytmp, pp, k2)
        for i in range(5):
            ytmp[i] = y[i] + h_use * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(ytmp, pp, k3)
        for i in range(5):
            ytmp[i] = y[i] + h_use * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(ytmp, pp, k4)
        for i in range(5):
            ytmp[i] = y[i] + h_use * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        _rhs(ytmp, pp, k5)
        for i in range(5):
            ytmp[i] = y[i] + h_use * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
        _rhs(ytmp, pp, k6)
        for i in range(5):
            ynew[i] = y[i] + h_use * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
        _rhs(ynew, pp, k7)
        nfev += 6
        for i in range(5):
            err[i] = h_use * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])

        finite_ok = True
        for i in range(5):
            if not isfinite(ynew[i]):
                finite_ok = False
                break
        if not finite_ok:
            status = STATUS_NONFINITE
            t_fail = t
            break

        acc = 0.0
        for i in range(5):
            sc = atol + rtol * max(fabs(y[i]), fabs(ynew[i]))
            q = err[i] / sc
            acc += q * q
        norm = sqrt(acc / 5.0)

        if norm <= 1.0:
            t_next = t_end if boundary else t + h_use
            clamped = False
            negative = False
            for i in range(5):
                if ynew[i] < 0.0:
                    if ynew[i] >= -atol:
                        ynew[i] = 0.0
                        nclamp += 1
                        clamped = True
                    else:
                        negative = True
                        break
            if negative:
                status = STATUS_NEGATIVE
                t_fail = t_next
                break
            if n == cap:
                cap *= 2
                new_ts = np.empty(cap); new_ts[:n] = ts_arr[:n]; ts_arr = new_ts
                new_hs = np.empty(cap); new_hs[:n] = hs_arr[:n]; hs_arr = new_hs
                new_ys = np.empty((cap + 1, 5)); new_ys[:n + 1] = ys_arr[:n + 1]; ys_arr = new_ys
                new_ks = np.empty((cap, 7, 5)); new_ks[:n] = ks_arr[:n]; ks_arr = new_ks
                ts_v = ts_arr; hs_v = hs_arr; ys_v = ys_arr; ks_v = ks_arr
            ts_v[n] = t
            hs_v[n] = h_use
            for si in range(7):
                for i in range(5):
                    ks_v[n, si, i] = stages[si][i]
            for i in range(5):
                err_accum[i] += fabs(err[i])
                y[i] = ynew[i]
                ys_v[n + 1, i] = y[i]
            n += 1
            if clamped:
                _rhs(y, pp, k1)
                nfev += 1
            else:
                for i in range(5):
                    k1[i] = k7[i]
            t = t_next
            naccept += 1
            h = h_use * _step_factor(norm)
            if h > hmax:
                h = hmax
        else:
            nreject += 1
            h = h_use * _step_factor(norm)

    err_out = np.empty(5)
    for i in range(5):
        err_out[i] = err_accum[i]
    return (
        ts_arr[:n].copy(),
        hs_arr[:n].copy(),
        ys_arr[:n + 1].copy(),
        ks_arr[:n].copy(),
        naccept,
        nreject,
        nfev,
        nclamp,
        err_out,
        h,
        status,
        t_fail,
    )


def rk4_segment(y0, double t0, double t1, double h, p):
    """See _kernels_py.rk4_segment; identical contract and results."""
    cdef double pp[14]
    cdef double y[5]
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double ytmp[5]
    cdef int i
    cdef long step, n
    cdef double span = t1 - t0, hs, half, sixth

    for i in range(14):
        pp[i] = p[i]
    for i in range(5):
        y[i] = y0[i]
    n = <long> ceil(span / h - 1e-9)
    if n < 1:
        n = 1
    hs = span / n
    half = 0.5 * hs
    sixth = hs / 6.0
    with nogil:
        for step in range(n):
            _rhs(y, pp, k1)
            for i in range(5):
                ytmp[i] = y[i] + half * k1[i]
            _rhs(ytmp, pp, k2)
            for i in range(5):
                ytmp[i] = y[i] + half * k2[i]
            _rhs(ytmp, pp, k3)
            for i in range(5):
                ytmp[i] = y[i] + hs * k3[i]
            _rhs(ytmp, pp, k4)
            for i in range(5):
                y[i] = y[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
    return (y[0], y[1], y[2], y[3], y[4]), n


cdef inline void _var_rhs(double t, const double* mm, const double* p,
                          double cv, double tb, double cs, double tsc,
                          double* out) noexcept nogil:
    cdef double r = p[0], k = p[1], al = p[2], ph = p[3], lm = p[4]
    cdef double c1 = p[5], c2 = p[6], d = p[7], de = p[8], th = p[9]
    cdef double ga = p[10], mu = p[11], m1 = p[12], m2 = p[13]
    cdef double vstar = cv * exp(-ga * (t - tb))
    cdef double sstar = cs * exp(-mu * (t - tsc))
    cdef double a2 = c1 * al * k - lm * vstar - d - m1 * sstar
    cdef double a3 = c2 * ph * k * al - (d + de) - m2 * sstar
    cdef double fv = lm * vstar
    cdef double fz = th * (d + de)
    cdef double e1, e2, e3, e4, e5
    cdef int j
    for j in range(5):
        e1 = mm[j]
        e2 = mm[5 + j]
        e3 = mm[10 + j]
        e4 = mm[15 + j]
        e5 = mm[20 + j]
        out[j] = -r * e1 - al * k * e2 - ph * al * k * e3
        out[5 + j] = a2 * e2
        out[10 + j] = fv * e2 + a3 * e3
        out[15 + j] = fz * e3 - ga * e4
        out[20 + j] = -mu * e5


def variational_segment(m0, double t0, double t1, p, double cv, double tb,
                        double cs, double tsc, double rtol, double atol,
                        double h0, double hmax, long max_steps):
    """See _kernels_py.variational_segment; identical contract and results."""
    cdef double pp[14]
    cdef double y[25]
    cdef double k1[25]
    cdef double k2[25]
    cdef double k3[25]
    cdef double k4[25]
    cdef double k5[25]
    cdef double k6[25]
    cdef double k7[25]
    cdef double ytmp[25]
    cdef double ynew[25]
    cdef double e
    cdef int i
    cdef long naccept = 0, nreject = 0, nfev = 0
    cdef int status = STATUS_OK
    cdef bint boundary, finite_ok
    cdef double t = t0, t_end = t1, t_fail = t1
    cdef double h, h_use, sc, q, acc, norm

    for i in range(14):
        pp[i] = p[i]
    for i in range(25):
        y[i] = m0[i]

    h = h0
    if hmax < h:
        h = hmax
    if t_end - t < h:
        h = t_end - t

    _var_rhs(t, y, pp, cv, tb, cs, tsc, k1)
    nfev = 1

    while t < t_end:
        if naccept + nreject >= max_steps:
            status = STATUS_MAX_STEPS
            t_fail = t
            break
        boundary = h >= t_end - t
        h_use = t_end - t if boundary else h
        if (not boundary) and h_use < 1e-13 * max(1.0, fabs(t)):
            status = STATUS_STEP_UNDERFLOW
            t_fail = t
            break

        for i in range(25):
            ytmp[i] = y[i] + h_use * (_A21 * k1[i])
        _var_rhs(t + _C2 * h_use, ytmp, pp, cv, tb, cs, tsc, k2)
        for i in range(25):
            ytmp[i] = y[i] + h_use * (_A31 * k1[i] + _A32 * k2[i])
        _var_rhs(t + _C3 * h_use, ytmp, pp, cv, tb, cs, tsc, k3)
        for i in range(25):
            ytmp[i] = y[i] + h_use * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _var_rhs(t + _C4 * h_use, ytmp, pp, cv, tb, cs, tsc, k4)
        for i in range(25):
            ytmp[i] = y[i] + h_use * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        _var_rhs(t + _C5 * h_use, ytmp, pp, cv, tb, cs, tsc, k5)
        for i in range(25):
            ytmp[i] = y[i] + h_use * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
        _var_rhs(t + h_use, ytmp, pp, cv, tb, cs, tsc, k6)
        for i in range(25):
            ynew[i] = y[i] + h_use * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
        _var_rhs(t + h_use, ynew, pp, cv, tb, cs, tsc, k7)
        nfev += 6

        finite_ok = True
        for i in range(25):
            if not isfinite(ynew[i]):
                finite_ok = False
                break
        if not finite_ok:
            status = STATUS_NONFINITE
            t_fail = t
            break

        acc = 0.0
        for i in range(25):
            e = h_use * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            sc = atol + rtol * max(fabs(y[i]), fabs(ynew[i]))
            q = e / sc
            acc += q * q
        norm = sqrt(acc / 25.0)

        if norm <= 1.0:
            t = t_end if boundary else t + h_use
            for i in range(25):
                y[i] = ynew[i]
                k1[i] = k7[i]
            naccept += 1
            h = h_use * _step_factor(norm)
            if h > hmax:
                h = hmax
        else:
            nreject += 1
            h = h_use * _step_factor(norm)

    m_out = np.empty(25)
    for i in range(25):
        m_out[i] = y[i]
    return m_out, naccept, nreject, nfev, h, status, t_fail
