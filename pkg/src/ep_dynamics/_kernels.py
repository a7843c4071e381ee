"""Hot integrand kernels for the reservoir-energy quadrature.

Two interchangeable implementations of the same math: a numba ``@njit``
version (default) and a pure-numpy version, selected at import time by the
environment variable ``EP_DYNAMICS_NO_NUMBA=1``.  ``benchmarks/bench_kernels.py``
compares the two.

Kernel math, for the two-dot evolution matrix A and propagator D = e^{A tau}:
with M = A + i*eps*I the windowed Fourier kernel is

    Dt[j, m](eps) ~ e^{i eps tau} (M^{-1} D)[j, m] - M^{-1}[j, m]

(up to a global phase that cancels in |Dt|^2).  The integrand channels are

    I_j(eps) = 1/(2 pi) * sum_m Gamma_m f_m(eps) |Dt[j, m]|^2

Modes: 0 = full transient kernel, 1 = non-oscillatory part only (for the
smooth tail integrals), 2 = steady state (|M^{-1}|^2 only).
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("EP_DYNAMICS_NO_NUMBA", "0") not in ("1", "true", "yes")

MODE_TRANSIENT = 0
MODE_NONOSC = 1
MODE_STEADY = 2


def _integrand_impl(eps, tau, a11, a12, a21, a22,
                    d11, d12, d21, d22, f1, f2, G1, G2, mode):
    n = eps.shape[0]
    out = np.empty((2, n))
    osc = np.zeros((2, n))
    for i in range(n):
        ie = 1j * eps[i]
        m11 = a11 + ie
        m12 = a12
        m21 = a21
        m22 = a22 + ie
        det = m11 * m22 - m12 * m21
        i11 = m22 / det
        i12 = -m12 / det
        i21 = -m21 / det
        i22 = m11 / det
        if mode == MODE_STEADY:
            k11 = abs(i11) ** 2
            k12 = abs(i12) ** 2
            k21 = abs(i21) ** 2
            k22 = abs(i22) ** 2
        else:
            b11 = i11 * d11 + i12 * d21
            b12 = i11 * d12 + i12 * d22
            b21 = i21 * d11 + i22 * d21
            b22 = i21 * d12 + i22 * d22
            if mode == MODE_NONOSC:
                k11 = abs(b11) ** 2 + abs(i11) ** 2
                k12 = abs(b12) ** 2 + abs(i12) ** 2
                k21 = abs(b21) ** 2 + abs(i21) ** 2
                k22 = abs(b22) ** 2 + abs(i22) ** 2
            else:
                ph = np.exp(ie * tau)
                k11 = abs(ph * b11 - i11) ** 2
                k12 = abs(ph * b12 - i12) ** 2
                k21 = abs(ph * b21 - i21) ** 2
                k22 = abs(ph * b22 - i22) ** 2
                e11 = 2.0 * abs(b11) * abs(i11)
                e12 = 2.0 * abs(b12) * abs(i12)
                e21 = 2.0 * abs(b21) * abs(i21)
                e22 = 2.0 * abs(b22) * abs(i22)
                osc[0, i] = (G1 * f1[i] * e11 + G2 * f2[i] * e12) / (2.0 * np.pi)
                osc[1, i] = (G1 * f1[i] * e21 + G2 * f2[i] * e22) / (2.0 * np.pi)
        out[0, i] = (G1 * f1[i] * k11 + G2 * f2[i] * k12) / (2.0 * np.pi)
        out[1, i] = (G1 * f1[i] * k21 + G2 * f2[i] * k22) / (2.0 * np.pi)
    return out, osc


def _osc_coeff_impl(eps, a11, a12, a21, a22,
                    d11, d12, d21, d22, f1, f2, G1, G2):
    """Complex coefficient q_j(eps) of the oscillatory term Re(q_j e^{i eps tau})."""
    n = eps.shape[0]
    q = np.empty((2, n), dtype=np.complex128)
    for i in range(n):
        ie = 1j * eps[i]
        m11 = a11 + ie
        m22 = a22 + ie
        det = m11 * m22 - a12 * a21
        i11 = m22 / det
        i12 = -a12 / det
        i21 = -a21 / det
        i22 = m11 / det
        b11 = i11 * d11 + i12 * d21
        b12 = i11 * d12 + i12 * d22
        b21 = i21 * d11 + i22 * d21
        b22 = i21 * d12 + i22 * d22
        q[0, i] = -(G1 * f1[i] * b11 * np.conj(i11)
                    + G2 * f2[i] * b12 * np.conj(i12)) / np.pi
        q[1, i] = -(G1 * f1[i] * b21 * np.conj(i21)
                    + G2 * f2[i] * b22 * np.conj(i22)) / np.pi
    return q


if USE_NUMBA:
    from numba import njit

    integrand = njit(cache=True)(_integrand_impl)
    osc_coeff = njit(cache=True)(_osc_coeff_impl)
else:  # pure-numpy twin
    def integrand(eps, tau, a11, a12, a21, a22,
                  d11, d12, d21, d22, f1, f2, G1, G2, mode):
        ie = 1j * eps
        m11 = a11 + ie
        m22 = a22 + ie
        det = m11 * m22 - a12 * a21
        i11, i12 = m22 / det, -a12 / det
        i21, i22 = -a21 / det, m11 / det
        osc = np.zeros((2, eps.shape[0]))
        if mode == MODE_STEADY:
            k = np.array([[np.abs(i11) ** 2, np.abs(i12) ** 2],
                          [np.abs(i21) ** 2, np.abs(i22) ** 2]])
        else:
            b11 = i11 * d11 + i12 * d21
            b12 = i11 * d12 + i12 * d22
            b21 = i21 * d11 + i22 * d21
            b22 = i21 * d12 + i22 * d22
            if mode == MODE_NONOSC:
                k = np.array([[np.abs(b11) ** 2 + np.abs(i11) ** 2,
                               np.abs(b12) ** 2 + np.abs(i12) ** 2],
                              [np.abs(b21) ** 2 + np.abs(i21) ** 2,
                               np.abs(b22) ** 2 + np.abs(i22) ** 2]])
            else:
                ph = np.exp(ie * tau)
                k = np.array([[np.abs(ph * b11 - i11) ** 2, np.abs(ph * b12 - i12) ** 2],
                              [np.abs(ph * b21 - i21) ** 2, np.abs(ph * b22 - i22) ** 2]])
                e = np.array([[2 * np.abs(b11) * np.abs(i11), 2 * np.abs(b12) * np.abs(i12)],
                              [2 * np.abs(b21) * np.abs(i21), 2 * np.abs(b22) * np.abs(i22)]])
                osc = np.stack([
                    (G1 * f1 * e[0, 0] + G2 * f2 * e[0, 1]) / (2 * np.pi),
                    (G1 * f1 * e[1, 0] + G2 * f2 * e[1, 1]) / (2 * np.pi),
                ])
        out = np.stack([
            (G1 * f1 * k[0, 0] + G2 * f2 * k[0, 1]) / (2 * np.pi),
            (G1 * f1 * k[1, 0] + G2 * f2 * k[1, 1]) / (2 * np.pi),
        ])
        return out, osc

    def osc_coeff(eps, a11, a12, a21, a22,
                  d11, d12, d21, d22, f1, f2, G1, G2):
        ie = 1j * eps
        m11 = a11 + ie
        m22 = a22 + ie
        det = m11 * m22 - a12 * a21
        i11, i12 = m22 / det, -a12 / det
        i21, i22 = -a21 / det, m11 / det
        b11 = i11 * d11 + i12 * d21
        b12 = i11 * d12 + i12 * d22
        b21 = i21 * d11 + i22 * d21
        b22 = i21 * d12 + i22 * d22
        q1 = -(G1 * f1 * b11 * np.conj(i11) + G2 * f2 * b12 * np.conj(i12)) / np.pi
        q2 = -(G1 * f1 * b21 * np.conj(i21) + G2 * f2 * b22 * np.conj(i22)) / np.pi
        return np.stack([q1, q2])
