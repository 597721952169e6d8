"""Pure numpy implementations of the hot kernels.

Mirrors ``_native.pyx`` function for function; used when the compiled
extension is not available.
"""

import math

import numpy as np


def triangle_batch(kappa1, kappa2, kperp):
    kp = np.asarray(kperp, dtype=float)
    s = np.sort(np.stack(np.broadcast_arrays(float(kappa1), float(kappa2), kp)), axis=0)[::-1]
    a, b, c = s[0], s[1], s[2]
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    area = 0.25 * np.sqrt(np.maximum(prod, 0.0))
    k1s, k2s, kps = kappa1 * kappa1, kappa2 * kappa2, kp * kp
    d1 = np.arctan2(4.0 * area, k1s + kps - k2s)
    d2 = np.arctan2(4.0 * area, k2s + kps - k1s)
    return area, d1, d2


def amp_sq_batch(kappa1, kappa2, kperp, m1, m2, ma, mb):
    """|J|^2 and its fringe-free envelope at each K_perp.

    ``ma`` and ``mb`` are complex arrays broadcastable to ``kperp``.
    """
    area, d1, d2 = triangle_batch(kappa1, kappa2, kperp)
    phase = m1 * d1 + m2 * d2
    with np.errstate(divide="ignore"):
        pref = kappa1 * kappa2 / (2.0 * area)
    pref2 = pref * pref
    c, s = np.cos(phase), np.sin(phase)
    ma = np.asarray(ma, dtype=complex)
    mb = np.asarray(mb, dtype=complex)
    re = (ma.real + mb.real) * c - (ma.imag - mb.imag) * s
    im = (ma.imag + mb.imag) * c + (ma.real - mb.real) * s
    amp_sq = pref2 * (re * re + im * im)
    bound = np.abs(ma) + np.abs(mb)
    env = pref2 * bound * bound
    return amp_sq, env


def ring_quadrature(kappa1, kappa2, kx, ky, m1, m2, ma, mb, sigma, gh_x, gh_w, n_az):
    """Gaussian-ring regularized amplitude integral over k1_perp.

    Radial direction: Gauss-Hermite nodes around kappa1 absorb the first
    ring.  Azimuth: periodic trapezoid with ``n_az`` points.
    """
    dphi = 2.0 * math.pi / n_az
    phi = math.atan2(ky, kx) + dphi * np.arange(n_az)
    cphi, sphi = np.cos(phi), np.sin(phi)
    norm2 = 1.0 / (math.sqrt(2.0 * math.pi) * sigma)
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    total = 0.0 + 0.0j
    for x, w in zip(gh_x, gh_w):
        r = kappa1 + math.sqrt(2.0) * sigma * x
        k1x, k1y = r * cphi, r * sphi
        k2x, k2y = kx - k1x, ky - k1y
        k2 = np.hypot(k2x, k2y)
        g2 = norm2 * np.exp(-((k2 - kappa2) ** 2) * inv2s2)
        phase = m1 * phi - m2 * np.arctan2(k2y, k2x)
        cfg_a = (kx * k1y - ky * k1x) > 0.0
        amp = np.where(cfg_a, ma, mb)
        total += (w / math.sqrt(math.pi)) * r * np.sum(g2 * np.exp(1j * phase) * amp)
    return complex(total * dphi)
