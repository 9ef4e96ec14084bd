# Compiled twin of _kernel_py; same math, C loops. The penalty entry point
# is the hot call of the key-rate minimisation.

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, log, INFINITY

cnp.import_array()

BACKEND = "cython"

N_PARAMS = 34
N_CONSTRAINTS = 23

cdef double LOG2 = log(2.0)


cdef inline double _xlog2x(double x) noexcept nogil:
    if x <= 0.0:
        return 0.0
    return x * log(x) / LOG2


cdef double _usable_entropy_raw(double l1, double l2) noexcept nogil:
    cdef double e1 = 0.25 * (1.0 - l1)
    cdef double e3 = 0.25 * (1.0 + l1 - 2.0 * l2)
    cdef double e4 = 0.25 * (1.0 + l1 + 2.0 * l2)
    cdef double t = 2.0 * e1
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    cdef double h = -_xlog2x(t) - _xlog2x(1.0 - t)
    return 1.0 + h + 2.0 * _xlog2x(e1) + _xlog2x(e3) + _xlog2x(e4)


cdef void _fill_constraints(const double* x, double* out) noexcept nogil:
    cdef double l1 = x[0]
    cdef double l2 = x[1]
    cdef double prep[6][3]
    cdef double meas[6][3]
    cdef double t1[6]
    cdef double t2[6]
    cdef double q[6][6]
    cdef int i, j, a, b
    cdef double th, ph, sp, corr, total, same, diff, btot

    for i in range(4):
        th = x[2 + 2 * i]
        ph = x[3 + 2 * i]
        sp = sin(th)
        prep[i][0] = sp * cos(ph)
        prep[i][1] = sp * sin(ph)
        prep[i][2] = cos(th)
    prep[4][0] = 0.0; prep[4][1] = 0.0; prep[4][2] = 1.0
    prep[5][0] = 0.0; prep[5][1] = 0.0; prep[5][2] = -1.0
    for j in range(6):
        th = x[10 + 2 * j]
        ph = x[11 + 2 * j]
        sp = sin(th)
        meas[j][0] = sp * cos(ph)
        meas[j][1] = sp * sin(ph)
        meas[j][2] = cos(th)
    for i in range(6):
        t1[i] = x[22 + i]
        t2[i] = x[28 + i]

    total = 0.0
    for i in range(6):
        for j in range(6):
            corr = l2 * (prep[i][0] * meas[j][0] + prep[i][1] * meas[j][1])
            corr += l1 * prep[i][2] * meas[j][2]
            q[i][j] = t1[i] * t2[j] * (1.0 + corr)
            total += q[i][j]

    if total <= 0.0:
        for i in range(21):
            out[i] = 0.0
    else:
        for a in range(3):
            for b in range(3):
                same = q[2 * a][2 * b] + q[2 * a + 1][2 * b + 1]
                diff = q[2 * a][2 * b + 1] + q[2 * a + 1][2 * b]
                btot = same + diff
                if btot > 0.0:
                    out[3 * a + b] = (same - diff) / btot
                else:
                    out[3 * a + b] = 0.0
        for i in range(6):
            same = 0.0
            for j in range(6):
                same += q[i][j]
            out[9 + i] = same / total
        for j in range(6):
            same = 0.0
            for i in range(6):
                same += q[i][j]
            out[15 + j] = same / total
    out[21] = 1.0 + l1 - 2.0 * l2
    out[22] = 1.0 + l1 + 2.0 * l2


def usable_entropy_raw(double l1, double l2):
    return _usable_entropy_raw(l1, l2)


def model_constraints(x):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    if xv.shape[0] != N_PARAMS:
        raise ValueError("parameter vector must have length 34")
    cdef cnp.ndarray[double, ndim=1] out = np.empty(N_CONSTRAINTS, dtype=np.float64)
    _fill_constraints(&xv[0], &out[0])
    return out


def penalty_value(x, lower, upper, double weight):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] hi = np.ascontiguousarray(upper, dtype=np.float64)
    if xv.shape[0] != N_PARAMS or lo.shape[0] != N_CONSTRAINTS or hi.shape[0] != N_CONSTRAINTS:
        raise ValueError("bad argument lengths for penalty_value")
    cdef double f[23]
    cdef double v = 0.0
    cdef double d
    cdef int i
    with nogil:
        _fill_constraints(&xv[0], f)
        for i in range(23):
            d = lo[i] - f[i]
            if d > 0.0:
                v += d * d
            d = f[i] - hi[i]
            if d > 0.0:
                v += d * d
    return _usable_entropy_raw(xv[0], xv[1]) + weight * v
