"""Dot chains with two-periodic reservoir rates: closed-form spectra and EPs.

The single-particle evolution matrix of an N-dot chain is tridiagonal with
diagonal ``-(Gamma_j/2 + i eps_d)`` and off-diagonal ``-i g``.  Uniform rates
give a Toeplitz matrix whose spectrum cannot support exceptional points, so
the minimal interesting case alternates ``Gamma_1, Gamma_2, Gamma_1, ...``.
Its eigenvalues are

    -i eps_d - Gamma/4 +- eta_j,
    eta_j = sqrt(((Gamma_1 - Gamma_2)/4)^2 - 4 g^2 cos^2(j pi / (N + 1)))

for j = 1..floor(N/2) with Gamma = Gamma_1 + Gamma_2, plus the isolated rate
``-Gamma_1/2 - i eps_d`` when N is odd.  Each eta_j = 0 is a second-order EP,
reached at ``g_j = |Gamma_1 - Gamma_2| / (8 cos(j pi/(N+1)))``.

For three dots the corresponding local master equation carries the quartet
``{-3 Gamma/4 - Gamma_1/2 +- eta_3, -Gamma/4 - Gamma_1/2 +- eta_3}`` with the
same eta_3, so the exceptional points of both routes coincide;
:func:`three_dot_correspondence` verifies this numerically.
"""

from __future__ import annotations

import numpy as np

from .lindblad import build_liouvillian
from .model import ChainParams, ValidationError

__all__ = [
    "build_chain_matrix",
    "chain_eta",
    "closed_form_spectrum",
    "ep_couplings",
    "three_dot_quartet",
    "three_dot_correspondence",
]


def build_chain_matrix(params: ChainParams) -> np.ndarray:
    """Tridiagonal single-particle evolution matrix for an N-dot chain."""
    probs = params.problems()
    if probs:
        raise ValidationError(probs)
    n = params.n_dots
    diag = -(0.5 * np.asarray(params.gamma) + 1j * np.asarray(params.eps))
    a = np.diag(diag.astype(complex))
    off = -1j * params.g * np.ones(n - 1)
    a += np.diag(off, 1) + np.diag(off, -1)
    return a


def _require_two_periodic(params: ChainParams):
    probs = list(params.problems())
    if not params.resonant:
        probs.append("closed-form chain spectrum requires resonant dots")
    g1 = params.gamma[0]
    g2 = params.gamma[1] if params.n_dots > 1 else g1
    pattern = tuple(g1 if j % 2 == 0 else g2 for j in range(params.n_dots))
    if params.gamma != pattern:
        probs.append(
            "closed-form chain spectrum requires two-periodic rates "
            f"(Gamma_1, Gamma_2 alternating); got {params.gamma}"
        )
    if probs:
        raise ValidationError(probs)
    return g1, g2


def chain_eta(params: ChainParams, j: int) -> complex:
    """Half-splitting eta_j of mode j = 1..floor(N/2) of a two-periodic chain."""
    g1, g2 = _require_two_periodic(params)
    n = params.n_dots
    if not 1 <= j <= n // 2:
        raise ValidationError([f"mode index {j} outside 1..{n // 2}"])
    e2 = (0.25 * (g1 - g2)) ** 2 \
        - 4.0 * params.g ** 2 * np.cos(j * np.pi / (n + 1)) ** 2
    return complex(np.sqrt(e2)) if e2 >= 0 else 1j * float(np.sqrt(-e2))


def closed_form_spectrum(params: ChainParams) -> np.ndarray:
    """Analytic eigenvalues of the two-periodic chain matrix.

    Sorted by (Re descending, Im ascending), matching the numerical
    eigensolver ordering.
    """
    g1, _ = _require_two_periodic(params)
    n = params.n_dots
    eps_d = params.eps[0]
    gamma = params.gamma[0] + (params.gamma[1] if n > 1 else params.gamma[0])
    base = -1j * eps_d - 0.25 * gamma
    vals = []
    for j in range(1, n // 2 + 1):
        ej = chain_eta(params, j)
        vals.extend([base + ej, base - ej])
    if n % 2 == 1:
        vals.append(-0.5 * g1 - 1j * eps_d)
    vals = np.array(vals, dtype=complex)
    order = np.lexsort((vals.imag, -vals.real))
    return vals[order]


def ep_couplings(n_dots: int, gamma1: float, gamma2: float) -> np.ndarray:
    """Couplings g at which a two-periodic chain has an exceptional point.

    One value per mode j = 1..floor(N/2), ascending; empty for equal rates,
    where the matrix is Toeplitz and stays semisimple.
    """
    if n_dots < 2:
        raise ValidationError([f"n_dots must be >= 2, got {n_dots}"])
    if gamma1 < 0 or gamma2 < 0:
        raise ValidationError(["reservoir rates must be non-negative"])
    if gamma1 == gamma2:
        return np.array([])
    j = np.arange(1, n_dots // 2 + 1)
    g = abs(gamma1 - gamma2) / (8.0 * np.cos(j * np.pi / (n_dots + 1)))
    return np.sort(g)


def three_dot_quartet(params: ChainParams) -> np.ndarray:
    """Expected master-equation eigenvalues tied to the three-dot EP.

    ``{-3 Gamma/4 - Gamma_1/2 +- eta_3, -Gamma/4 - Gamma_1/2 +- eta_3}`` with
    ``Gamma = Gamma_1 + Gamma_2``.
    """
    if params.n_dots != 3:
        raise ValidationError([f"three-dot routine got n_dots = {params.n_dots}"])
    g1, g2 = _require_two_periodic(params)
    gamma = g1 + g2
    e3 = chain_eta(params, 1)
    return np.array([
        -0.75 * gamma - 0.5 * g1 + e3,
        -0.75 * gamma - 0.5 * g1 - e3,
        -0.25 * gamma - 0.5 * g1 + e3,
        -0.25 * gamma - 0.5 * g1 - e3,
    ])


def three_dot_correspondence(params: ChainParams, specs) -> dict:
    """Check that the three-dot generator contains the analytic quartet.

    Builds the 64-dimensional Lindblad generator and reports the nearest
    spectral match for each expected eigenvalue, together with the generator
    norm used to scale the distances.
    """
    quartet = three_dot_quartet(params)
    liou = build_liouvillian(params, specs)
    vals = np.linalg.eigvals(liou)
    norm = float(np.linalg.norm(liou, 2))
    matches = []
    for q in quartet:
        dist = np.abs(vals - q)
        k = int(np.argmin(dist))
        matches.append({"expected": q, "found": complex(vals[k]),
                        "distance": float(dist[k])})
    return {
        "matches": matches,
        "max_distance": max(m["distance"] for m in matches),
        "liouvillian_norm": norm,
    }
