# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the pointwise constitutive kernels.

Signatures and semantics match ``_pykernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, fabs, isfinite, exp, log

cnp.import_array()


cdef inline double _pow(double x, double e) nogil:
    # x > 0 on every call site; exp/log is cheaper than the general pow
    return exp(e * log(x))


cdef inline double _norm(const double[:, ::1] P, Py_ssize_t i) nogil:
    cdef Py_ssize_t j
    cdef double acc = 0.0
    for j in range(P.shape[1]):
        acc += P[i, j] * P[i, j]
    return sqrt(acc)


def _delta_view(delta, Py_ssize_t n):
    return np.ascontiguousarray(np.broadcast_to(np.asarray(delta, dtype=np.float64), (n,)))


def a_map(P, double p, delta):
    cdef const double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t n = Pv.shape[0], m = Pv.shape[1], i, j
    cdef const double[::1] dv = _delta_view(delta, n)
    out = np.zeros((n, m))
    cdef double[:, ::1] o = out
    cdef double r, g
    with nogil:
        for i in range(n):
            r = _norm(Pv, i)
            if r > 0.0:
                g = _pow(dv[i] + r, p - 2.0)
                for j in range(m):
                    o[i, j] = g * Pv[i, j]
    return out


def a_jacobian(P, double p, delta, double eps):
    cdef const double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t n = Pv.shape[0], m = Pv.shape[1], i, j, k
    cdef const double[::1] dv = _delta_view(delta, n)
    out = np.empty((n, m, m))
    cdef double[:, :, ::1] o = out
    cdef double r, g, c
    with nogil:
        for i in range(n):
            r = _norm(Pv, i)
            if r < eps:
                r = eps
            if dv[i] + r > 0.0:
                c = _pow(dv[i] + r, p - 3.0)
                g = c * (dv[i] + r)
                c = (p - 2.0) * c / r
            else:
                g = pow(dv[i] + r, p - 2.0)
                c = 0.0
            for j in range(m):
                for k in range(m):
                    o[i, j, k] = c * Pv[i, j] * Pv[i, k]
                o[i, j, j] += g
    return out


def a_delta_derivative(P, double p, delta):
    cdef const double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t n = Pv.shape[0], m = Pv.shape[1], i, j
    cdef const double[::1] dv = _delta_view(delta, n)
    out = np.zeros((n, m))
    cdef double[:, ::1] o = out
    cdef double r, c
    with nogil:
        for i in range(n):
            r = _norm(Pv, i)
            if r > 0.0:
                c = (p - 2.0) * _pow(dv[i] + r, p - 3.0)
                for j in range(m):
                    o[i, j] = c * Pv[i, j]
    return out


cdef inline double _invert_one(double s, double p, double d, double rtol, int max_iter) nogil:
    cdef double hi, lo, x, xn, fx, dfx, q
    cdef int it
    if s <= 0.0:
        return 0.0
    hi = pow(s, 1.0 / (p - 1.0))
    if d > 0.0:
        hi += s * pow(d, 2.0 - p)
    if not (hi > 0.0 and isfinite(hi)):
        hi = 1.0
    for it in range(2000):
        if pow(d + hi, p - 2.0) * hi - s >= 0.0:
            break
        hi *= 2.0
    lo = 0.0
    x = hi
    for it in range(max_iter):
        q = _pow(d + x, p - 3.0)
        fx = q * (d + x) * x - s
        dfx = q * ((p - 1.0) * x + d)
        if fx < 0.0:
            lo = x
        elif fx > 0.0:
            hi = x
        else:
            return x
        xn = x - fx / dfx
        if not (xn > lo and xn < hi):
            xn = 0.5 * (lo + hi)
        if fabs(xn - x) <= rtol * xn or hi - lo <= rtol * hi:
            return xn
        x = xn
    return x


def phi_prime_inverse(s, double p, delta, double rtol=1e-15, int max_iter=200):
    sa = np.atleast_1d(np.asarray(s, dtype=np.float64))
    cdef const double[::1] sv = np.ascontiguousarray(sa.ravel())
    cdef Py_ssize_t n = sv.shape[0], i
    cdef const double[::1] dv = _delta_view(np.broadcast_to(np.asarray(delta, dtype=np.float64), sa.shape).ravel(), n)
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _invert_one(sv[i], p, dv[i], rtol, max_iter)
    return out.reshape(sa.shape)
