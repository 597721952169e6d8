# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Same signatures and semantics as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, atan2, cos, sin, exp, hypot, fabs, M_PI

cnp.import_array()


cdef inline void _triangle(double k1, double k2, double kp,
                           double *area, double *d1, double *d2) noexcept nogil:
    cdef double a = k1, b = k2, c = kp, t, prod
    # sort descending
    if a < b:
        t = a; a = b; b = t
    if b < c:
        t = b; b = c; c = t
    if a < b:
        t = a; a = b; b = t
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    if prod > 0.0:
        area[0] = 0.25 * sqrt(prod)
    else:
        area[0] = 0.0
    d1[0] = atan2(4.0 * area[0], k1 * k1 + kp * kp - k2 * k2)
    d2[0] = atan2(4.0 * area[0], k2 * k2 + kp * kp - k1 * k1)


def triangle_batch(double kappa1, double kappa2, kperp):
    cdef const double[::1] kp = np.ascontiguousarray(kperp, dtype=np.float64).ravel()
    cdef Py_ssize_t n = kp.shape[0], i
    area = np.empty(n)
    d1 = np.empty(n)
    d2 = np.empty(n)
    cdef double[::1] av = area, d1v = d1, d2v = d2
    with nogil:
        for i in range(n):
            _triangle(kappa1, kappa2, kp[i], &av[i], &d1v[i], &d2v[i])
    shape = np.shape(kperp)
    return area.reshape(shape), d1.reshape(shape), d2.reshape(shape)


def amp_sq_batch(double kappa1, double kappa2, kperp, int m1, int m2, ma, mb):
    shape = np.shape(kperp)
    cdef const double[::1] kp = np.ascontiguousarray(kperp, dtype=np.float64).ravel()
    cdef Py_ssize_t n = kp.shape[0], i
    cdef const double complex[::1] mav = np.ascontiguousarray(np.broadcast_to(np.asarray(ma, dtype=complex), shape)).ravel()
    cdef const double complex[::1] mbv = np.ascontiguousarray(np.broadcast_to(np.asarray(mb, dtype=complex), shape)).ravel()
    amp = np.empty(n)
    env = np.empty(n)
    cdef double[::1] ampv = amp, envv = env
    cdef double area, d1, d2, ph, c, s, pref2, re, im, bnd
    cdef double complex za, zb
    with nogil:
        for i in range(n):
            _triangle(kappa1, kappa2, kp[i], &area, &d1, &d2)
            ph = m1 * d1 + m2 * d2
            c = cos(ph)
            s = sin(ph)
            pref2 = kappa1 * kappa2 / (2.0 * area)
            pref2 = pref2 * pref2
            za = mav[i]
            zb = mbv[i]
            re = (za.real + zb.real) * c - (za.imag - zb.imag) * s
            im = (za.imag + zb.imag) * c + (za.real - zb.real) * s
            ampv[i] = pref2 * (re * re + im * im)
            bnd = hypot(za.real, za.imag) + hypot(zb.real, zb.imag)
            envv[i] = pref2 * bnd * bnd
    return amp.reshape(shape), env.reshape(shape)


def ring_quadrature(double kappa1, double kappa2, double kx, double ky, int m1, int m2,
                    double complex ma, double complex mb, double sigma,
                    gh_x, gh_w, Py_ssize_t n_az):
    cdef const double[::1] xs = np.ascontiguousarray(gh_x, dtype=np.float64)
    cdef const double[::1] ws = np.ascontiguousarray(gh_w, dtype=np.float64)
    cdef Py_ssize_t n_rad = xs.shape[0], i, j
    cdef double dphi = 2.0 * M_PI / n_az
    cdef double phi0 = atan2(ky, kx)
    cdef double norm2 = 1.0 / (sqrt(2.0 * M_PI) * sigma)
    cdef double inv2s2 = 1.0 / (2.0 * sigma * sigma)
    cdef double sq2s = sqrt(2.0) * sigma
    cdef double sqpi = sqrt(M_PI)
    cdef double r, w, phi, cphi, sphi, k1x, k1y, k2x, k2y, k2, g2, ph, dk, c, s
    cdef double acc_re, acc_im, tot_re = 0.0, tot_im = 0.0, are, aim
    # azimuth trig tables shared by all radial nodes
    ctab = np.cos(phi0 + dphi * np.arange(n_az))
    stab = np.sin(phi0 + dphi * np.arange(n_az))
    cdef double[::1] cv = ctab, sv = stab
    with nogil:
        for i in range(n_rad):
            r = kappa1 + sq2s * xs[i]
            w = ws[i] / sqpi
            acc_re = 0.0
            acc_im = 0.0
            for j in range(n_az):
                cphi = cv[j]
                sphi = sv[j]
                k1x = r * cphi
                k1y = r * sphi
                k2x = kx - k1x
                k2y = ky - k1y
                k2 = hypot(k2x, k2y)
                dk = k2 - kappa2
                g2 = dk * dk * inv2s2
                if g2 > 745.0:
                    continue
                g2 = norm2 * exp(-g2)
                phi = phi0 + dphi * j
                ph = m1 * phi - m2 * atan2(k2y, k2x)
                if kx * k1y - ky * k1x > 0.0:
                    are = ma.real
                    aim = ma.imag
                else:
                    are = mb.real
                    aim = mb.imag
                c = cos(ph)
                s = sin(ph)
                acc_re += g2 * (c * are - s * aim)
                acc_im += g2 * (c * aim + s * are)
            tot_re += w * r * acc_re
            tot_im += w * r * acc_im
    return complex(tot_re * dphi, tot_im * dphi)
