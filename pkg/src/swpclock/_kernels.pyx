# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transfer-matrix and Crank-Nicolson kernels.

Same contracts as ``_kernels_py``; see there for argument conventions.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, exp, fabs

cnp.import_array()

cdef double SERIES_CUTOFF2 = 1e-6

# values this small carry no probability but make every subsequent
# multiply take the slow subnormal path, so the CN loop flushes them
cdef extern from *:
    """
    #if defined(__SSE2__) || defined(_M_X64)
    #include <xmmintrin.h>
    static unsigned int swp_ftz_on(void) {
        unsigned int old = _mm_getcsr();
        _mm_setcsr(old | 0x8040);
        return old;
    }
    static void swp_ftz_restore(unsigned int old) { _mm_setcsr(old); }
    #else
    static unsigned int swp_ftz_on(void) { return 0; }
    static void swp_ftz_restore(unsigned int old) { (void)old; }
    #endif
    """
    unsigned int swp_ftz_on() nogil
    void swp_ftz_restore(unsigned int old) nogil

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double creal(double complex)
    double cimag(double complex)


def transfer_amplitudes(k, du, kind, width, u, in_window, double x_left, double x_right):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kk = np.ascontiguousarray(k, dtype=np.float64).ravel()
    cdef Py_ssize_t n = kk.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dd = np.ascontiguousarray(
        np.broadcast_to(np.asarray(du, dtype=np.float64), (n,)))
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ekind = np.ascontiguousarray(kind, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ew = np.ascontiguousarray(width, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] eu = np.ascontiguousarray(u, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] ewin = np.ascontiguousarray(in_window, dtype=np.uint8)
    cdef Py_ssize_t ne = ekind.shape[0]

    m21_arr = np.empty(n, dtype=np.complex128)
    m22_arr = np.empty(n, dtype=np.complex128)
    log_arr = np.empty(n, dtype=np.float64)
    cdef double complex[::1] m21 = m21_arr
    cdef double complex[::1] m22 = m22_arr
    cdef double[::1] logs = log_arr

    cdef Py_ssize_t i, j
    cdef double kv, k2, p11, p12, p21, p22, n11, n12, n21, n22
    cdef double kap2, w, x, c, s, t, r, q, e, lg, r0, dr, c0, s0, cd, sd
    cdef double complex ph

    with nogil:
        for i in range(n):
            kv = kk[i]
            k2 = kv * kv
            p11 = 1.0; p12 = 0.0; p21 = 0.0; p22 = 1.0
            lg = 0.0
            for j in range(ne):
                if ekind[j] == 1:
                    p21 = p21 + eu[j] * p11
                    p22 = p22 + eu[j] * p12
                    continue
                w = ew[j]
                kap2 = k2 - eu[j]
                if ewin[j]:
                    kap2 = kap2 - dd[i]
                x = kap2 * w * w
                if fabs(x) < SERIES_CUTOFF2:
                    c = 1.0 - x / 2.0 + x * x / 24.0 - x * x * x / 720.0
                    s = w * (1.0 - x / 6.0 + x * x / 120.0 - x * x * x / 5040.0)
                elif x > 0:
                    r = sqrt(kap2)
                    if ewin[j] and k2 > eu[j]:
                        # angle kept as r0 w + dr w with r0 independent of du
                        r0 = sqrt(k2 - eu[j])
                        dr = -dd[i] / (r + r0)
                        c0 = cos(r0 * w)
                        s0 = sin(r0 * w)
                        cd = cos(dr * w)
                        sd = sin(dr * w)
                        c = c0 * cd - s0 * sd
                        s = (s0 * cd + c0 * sd) / r
                    else:
                        c = cos(r * w)
                        s = sin(r * w) / r
                else:
                    q = sqrt(-kap2)
                    e = exp(-2.0 * q * w)
                    c = 0.5 * (1.0 + e)
                    s = 0.5 * (1.0 - e) / q
                    lg = lg + q * w
                t = -kap2 * s
                n11 = c * p11 + s * p21
                n12 = c * p12 + s * p22
                n21 = t * p11 + c * p21
                n22 = t * p12 + c * p22
                p11 = n11; p12 = n12; p21 = n21; p22 = n22
            ph = cexp(1j * kv * (x_right - x_left))
            m22[i] = 0.5 * ph * ((p11 + p22) - 1j * (kv * p12 - p21 / kv))
            ph = cexp(1j * kv * (x_right + x_left))
            m21[i] = 0.5 * ph * ((p11 - p22) + 1j * (kv * p12 + p21 / kv))
            logs[i] = lg
    return m21_arr, m22_arr, log_arr


def cn_propagate(psi, potential, double dz, double dt, double hbar, double mu, long nsteps):
    cdef double complex[::1] y = psi
    cdef double[::1] v = np.ascontiguousarray(potential, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0]
    cdef double beta = dt / (2.0 * hbar)
    cdef double kin = hbar * hbar / (2.0 * mu * dz * dz)
    cdef double complex a_off = 1j * beta * (-kin)
    cdef double complex b_off = -1j * beta * (-kin)

    inv_m_arr = np.empty(n, dtype=np.complex128)
    cp_arr = np.empty(n, dtype=np.complex128)
    bd_arr = np.empty(n, dtype=np.complex128)
    dp_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] inv_m = inv_m_arr
    cdef double complex[::1] cp = cp_arr
    cdef double complex[::1] bdiag = bd_arr
    cdef double complex[::1] dp = dp_arr

    cdef Py_ssize_t j
    cdef long step
    cdef double complex m, r, prev
    cdef double norm0 = 0.0, norm, dev, max_dev = 0.0, edge, max_edge

    for j in range(n):
        bdiag[j] = 1.0 - 1j * beta * (2.0 * kin + v[j])
    inv_m[0] = 1.0 / (1.0 + 1j * beta * (2.0 * kin + v[0]))
    cp[0] = a_off * inv_m[0]
    for j in range(1, n):
        m = (1.0 + 1j * beta * (2.0 * kin + v[j])) - a_off * cp[j - 1]
        inv_m[j] = 1.0 / m
        cp[j] = a_off * inv_m[j]

    cdef unsigned int csr
    with nogil:
        csr = swp_ftz_on()
        for j in range(n):
            norm0 = norm0 + creal(y[j]) * creal(y[j]) + cimag(y[j]) * cimag(y[j])
        norm0 = norm0 * dz
        max_edge = creal(y[0]) * creal(y[0]) + cimag(y[0]) * cimag(y[0])
        edge = creal(y[n - 1]) * creal(y[n - 1]) + cimag(y[n - 1]) * cimag(y[n - 1])
        if edge > max_edge:
            max_edge = edge

        for step in range(nsteps):
            # forward sweep, right-hand side built on the fly from the old state
            r = bdiag[0] * y[0] + b_off * y[1]
            dp[0] = r * inv_m[0]
            for j in range(1, n - 1):
                r = bdiag[j] * y[j] + b_off * (y[j - 1] + y[j + 1])
                dp[j] = (r - a_off * dp[j - 1]) * inv_m[j]
            r = bdiag[n - 1] * y[n - 1] + b_off * y[n - 2]
            dp[n - 1] = (r - a_off * dp[n - 2]) * inv_m[n - 1]

            y[n - 1] = dp[n - 1]
            norm = creal(y[n - 1]) * creal(y[n - 1]) + cimag(y[n - 1]) * cimag(y[n - 1])
            for j in range(n - 2, -1, -1):
                y[j] = dp[j] - cp[j] * y[j + 1]
                norm = norm + creal(y[j]) * creal(y[j]) + cimag(y[j]) * cimag(y[j])
            dev = fabs(norm * dz - norm0) / norm0
            if dev > max_dev:
                max_dev = dev
            edge = creal(y[0]) * creal(y[0]) + cimag(y[0]) * cimag(y[0])
            if edge > max_edge:
                max_edge = edge
            edge = creal(y[n - 1]) * creal(y[n - 1]) + cimag(y[n - 1]) * cimag(y[n - 1])
            if edge > max_edge:
                max_edge = edge
        swp_ftz_restore(csr)
    return max_dev, max_edge
