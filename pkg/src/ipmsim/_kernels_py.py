"""Pure-Python numeric kernels.

Adaptive Dormand-Prince 5(4) stepping for the five-state pest model and for
its 5x5 variational system, plus a fixed-step classical RK4 oracle.  The
compiled extension ``ipmsim._kernels`` implements the same algorithms with the
same constants and operation order; the backend selector picks whichever is
available.

All segment integrators assume no impulse occurs strictly inside (t0, t1);
jump handling lives in :mod:`ipmsim.integrator`.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_NONFINITE = 3
STATUS_NEGATIVE = 4

# Dormand-Prince 5(4) tableau (FSAL: stage 7 is the next step's stage 1).
_C2 = 1.0 / 5.0
_C3 = 3.0 / 10.0
_C4 = 4.0 / 5.0
_C5 = 8.0 / 9.0

_A21 = 1.0 / 5.0
_A31 = 3.0 / 40.0
_A32 = 9.0 / 40.0
_A41 = 44.0 / 45.0
_A42 = -56.0 / 15.0
_A43 = 32.0 / 9.0
_A51 = 19372.0 / 6561.0
_A52 = -25360.0 / 2187.0
_A53 = 64448.0 / 6561.0
_A54 = -212.0 / 729.0
_A61 = 9017.0 / 3168.0
_A62 = -355.0 / 33.0
_A63 = 46732.0 / 5247.0
_A64 = 49.0 / 176.0
_A65 = -5103.0 / 18656.0
_B1 = 35.0 / 384.0
_B3 = 500.0 / 1113.0
_B4 = 125.0 / 192.0
_B5 = -2187.0 / 6784.0
_B6 = 11.0 / 84.0
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _rhs(y, p):
    x, yy, z, v, s = y
    r, k, al, ph, lm, c1, c2, d, de, th, ga, mu, m1, m2 = p
    return (
        r * x * (1.0 - x / k) - al * x * yy - ph * al * x * z,
        c1 * al * x * yy - lm * yy * v - d * yy - m1 * s * yy,
        c2 * ph * al * x * z + lm * yy * v - (d + de) * z - m2 * s * z,
        th * (d + de) * z - ga * v,
        -mu * s,
    )


def _step_factor(norm):
    if norm == 0.0:
        return _MAX_FACTOR
    factor = _SAFETY * norm ** -0.2
    if factor < _MIN_FACTOR:
        return _MIN_FACTOR
    if factor > _MAX_FACTOR:
        return _MAX_FACTOR
    return factor


def integrate_segment(y0, t0, t1, p, rtol, atol, h0, hmax, max_steps):
    """Adaptive DP5(4) from t0 to t1 with no interior events.

    Returns ``(ts, hs, ys, ks, naccept, nreject, nfev, nclamp, err_accum,
    h_last, status, t_fail)``: per accepted step the start time, size, stage
    derivatives; ``ys`` holds the n+1 step-boundary states.  Components that
    dip into (-atol, 0) are clamped to 0 and counted; beyond -atol the run
    stops with STATUS_NEGATIVE.
    """
    p = tuple(map(float, p))
    y = tuple(map(float, y0))
    t = float(t0)
    t_end = float(t1)
    h = min(float(h0), float(hmax), t_end - t)
    ts, hs, ys, ks = [], [], [y], []
    err_accum = [0.0, 0.0, 0.0, 0.0, 0.0]
    naccept = nreject = nclamp = 0
    status = STATUS_OK
    t_fail = t_end
    k1 = _rhs(y, p)
    nfev = 1
    while t < t_end:
        if naccept + nreject >= max_steps:
            status = STATUS_MAX_STEPS
            t_fail = t
            break
        boundary = h >= t_end - t
        h_use = t_end - t if boundary else h
        if not boundary and h_use < 1e-13 * max(1.0, abs(t)):
            status = STATUS_STEP_UNDERFLOW
            t_fail = t
            break

        y2 = tuple(y[i] + h_use * (_A21 * k1[i]) for i in range(5))
        k2 = _rhs(y2, p)
        y3 = tuple(y[i] + h_use * (_A31 * k1[i] + _A32 * k2[i]) for i in range(5))
        k3 = _rhs(y3, p)
        y4 = tuple(y[i] + h_use * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(5))
        k4 = _rhs(y4, p)
        y5 = tuple(
            y[i] + h_use * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            for i in range(5)
        )
        k5 = _rhs(y5, p)
        y6 = tuple(
            y[i]
            + h_use * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(5)
        )
        k6 = _rhs(y6, p)
        ynew = tuple(
            y[i] + h_use * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(5)
        )
        k7 = _rhs(ynew, p)
        nfev += 6
        err = tuple(
            h_use
            * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            for i in range(5)
        )

        if not all(math.isfinite(c) for c in ynew):
            status = STATUS_NONFINITE
            t_fail = t
            break

        acc = 0.0
        for i in range(5):
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            q = err[i] / sc
            acc += q * q
        norm = math.sqrt(acc / 5.0)

        if norm <= 1.0:
            t_next = t_end if boundary else t + h_use
            clamped = False
            yl = list(ynew)
            for i in range(5):
                if yl[i] < 0.0:
                    if yl[i] >= -atol:
                        yl[i] = 0.0
                        nclamp += 1
                        clamped = True
                    else:
                        status = STATUS_NEGATIVE
                        t_fail = t_next
                        break
            if status == STATUS_NEGATIVE:
                break
            ts.append(t)
            hs.append(h_use)
            ks.append((k1, k2, k3, k4, k5, k6, k7))
            for i in range(5):
                err_accum[i] += abs(err[i])
            y = tuple(yl)
            ys.append(y)
            if clamped:
                k1 = _rhs(y, p)
                nfev += 1
            else:
                k1 = k7
            t = t_next
            naccept += 1
            h = min(hmax, h_use * _step_factor(norm))
        else:
            nreject += 1
            h = h_use * _step_factor(norm)

    return (
        np.array(ts),
        np.array(hs),
        np.array(ys),
        np.array(ks),
        naccept,
        nreject,
        nfev,
        nclamp,
        np.array(err_accum),
        h,
        status,
        t_fail,
    )


def rk4_segment(y0, t0, t1, h, p):
    """Fixed-step classical RK4 over [t0, t1]; the step is shrunk to divide
    the span exactly.  Returns (final state, steps taken)."""
    p = tuple(map(float, p))
    span = float(t1) - float(t0)
    n = max(1, int(math.ceil(span / float(h) - 1e-9)))
    hs = span / n
    half = 0.5 * hs
    sixth = hs / 6.0
    y = tuple(map(float, y0))
    for _ in range(n):
        k1 = _rhs(y, p)
        k2 = _rhs(tuple(y[i] + half * k1[i] for i in range(5)), p)
        k3 = _rhs(tuple(y[i] + half * k2[i] for i in range(5)), p)
        k4 = _rhs(tuple(y[i] + hs * k3[i] for i in range(5)), p)
        y = tuple(y[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) for i in range(5))
    return y, n


def _var_rhs(t, mm, p, cv, tb, cs, tsc):
    r, k, al, ph, lm, c1, c2, d, de, th, ga, mu, m1, m2 = p
    vstar = cv * math.exp(-ga * (t - tb))
    sstar = cs * math.exp(-mu * (t - tsc))
    a2 = c1 * al * k - lm * vstar - d - m1 * sstar
    a3 = c2 * ph * k * al - (d + de) - m2 * sstar
    fv = lm * vstar
    fz = th * (d + de)
    out = [0.0] * 25
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
    return out


def variational_segment(m0, t0, t1, p, cv, tb, cs, tsc, rtol, atol, h0, hmax, max_steps):
    """Adaptive DP5(4) for the variational flow dM/dt = A(t) M over a segment
    without interior impulse times.

    The periodic control levels enter A(t) in closed form: v*(t) =
    cv e^{-gamma (t - tb)}, s*(t) = cs e^{-mu (t - tsc)} with tb, tsc the
    most recent impulse times at or before t0.  Returns
    ``(m1, naccept, nreject, nfev, h_last, status, t_fail)`` with m1 the
    row-major flattened 5x5 matrix at t1.
    """
    p = tuple(map(float, p))
    y = list(map(float, m0))
    t = float(t0)
    t_end = float(t1)
    h = min(float(h0), float(hmax), t_end - t)
    naccept = nreject = 0
    status = STATUS_OK
    t_fail = t_end
    k1 = _var_rhs(t, y, p, cv, tb, cs, tsc)
    nfev = 1
    while t < t_end:
        if naccept + nreject >= max_steps:
            status = STATUS_MAX_STEPS
            t_fail = t
            break
        boundary = h >= t_end - t
        h_use = t_end - t if boundary else h
        if not boundary and h_use < 1e-13 * max(1.0, abs(t)):
            status = STATUS_STEP_UNDERFLOW
            t_fail = t
            break

        y2 = [y[i] + h_use * (_A21 * k1[i]) for i in range(25)]
        k2 = _var_rhs(t + _C2 * h_use, y2, p, cv, tb, cs, tsc)
        y3 = [y[i] + h_use * (_A31 * k1[i] + _A32 * k2[i]) for i in range(25)]
        k3 = _var_rhs(t + _C3 * h_use, y3, p, cv, tb, cs, tsc)
        y4 = [y[i] + h_use * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(25)]
        k4 = _var_rhs(t + _C4 * h_use, y4, p, cv, tb, cs, tsc)
        y5 = [
            y[i] + h_use * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            for i in range(25)
        ]
        k5 = _var_rhs(t + _C5 * h_use, y5, p, cv, tb, cs, tsc)
        y6 = [
            y[i]
            + h_use * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(25)
        ]
        k6 = _var_rhs(t + h_use, y6, p, cv, tb, cs, tsc)
        ynew = [
            y[i] + h_use * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(25)
        ]
        k7 = _var_rhs(t + h_use, ynew, p, cv, tb, cs, tsc)
        nfev += 6

        if not all(math.isfinite(c) for c in ynew):
            status = STATUS_NONFINITE
            t_fail = t
            break

        acc = 0.0
        for i in range(25):
            e = h_use * (
                _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
            )
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            q = e / sc
            acc += q * q
        norm = math.sqrt(acc / 25.0)

        if norm <= 1.0:
            t = t_end if boundary else t + h_use
            y = ynew
            k1 = k7
            naccept += 1
            h = min(hmax, h_use * _step_factor(norm))
        else:
            nreject += 1
            h = h_use * _step_factor(norm)

    return np.array(y), naccept, nreject, nfev, h, status, t_fail
