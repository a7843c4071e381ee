"""Brute-force oracle: dots coupled to explicitly discretized reservoirs.

The full dots-plus-baths system is quadratic, so the exact dynamics reduces
to the one-particle sector: with the single-particle Hamiltonian h of all
dot and bath modes, the correlation matrix ``C_ij = <a_i^dagger a_j>``
evolves as ``C(t) = U^* C(0) U^T`` with ``U = e^{-i h t}``.  Each reservoir
is a flat band of M modes spread uniformly over a wide window with couplings
chosen to reproduce the target wide-band rate Gamma.

This route makes no Markov, wide-band or weak-coupling approximation beyond
the discretization itself, so it serves as an independent oracle for the
reservoir-energy quadrature: populations converge to the continuum result as
M grows, and are trustworthy for t below the recurrence time 2 pi / (level
spacing).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ChainParams,
    InitialConditions,
    ValidationError,
    fermi,
    validate,
)

__all__ = [
    "DiscretizedBath",
    "discretize",
    "single_particle_hamiltonian",
    "recurrence_time",
    "oracle_populations",
]

DEFAULT_MODES = 3000
DEFAULT_BAND_FACTOR = 100.0


@dataclass(frozen=True)
class DiscretizedBath:
    """Flat-band reservoir discretization for one dot."""

    energies: np.ndarray   # mode energies, uniform grid
    couplings: np.ndarray  # dot-mode tunneling amplitudes
    occupations: np.ndarray  # thermal occupation of each mode


def _band_halfwidth(params: ChainParams, specs) -> float:
    center = float(np.mean(params.eps))
    scale = max(params.gamma_total, 4 * abs(params.g), 1.0)
    for spec in specs:
        if spec.occupation is not None:
            continue
        temp = 0.0 if spec.zero_temperature else spec.temperature
        scale = max(scale, temp, abs(spec.mu - center) + 10.0 * temp)
    return DEFAULT_BAND_FACTOR * scale


def discretize(params: ChainParams, specs, n_modes: int = DEFAULT_MODES,
               band_halfwidth: float | None = None) -> list[DiscretizedBath]:
    """Uniform flat-band discretization of every reservoir.

    The couplings ``t_k = sqrt(Gamma d_eps / (2 pi))`` reproduce the
    wide-band rate Gamma of each dot; dots with zero rate get no modes.
    """
    params, specs, _ = validate(params, specs, None)
    if n_modes < 2:
        raise ValidationError([f"n_modes must be >= 2, got {n_modes}"])
    center = float(np.mean(params.eps))
    half = band_halfwidth or _band_halfwidth(params, specs)
    baths = []
    for j, spec in enumerate(specs):
        gj = params.gamma[j]
        if gj == 0.0:
            baths.append(DiscretizedBath(
                energies=np.empty(0), couplings=np.empty(0),
                occupations=np.empty(0),
            ))
            continue
        energies = np.linspace(center - half, center + half, n_modes)
        d_eps = energies[1] - energies[0]
        couplings = np.full(n_modes, np.sqrt(gj * d_eps / (2.0 * np.pi)))
        baths.append(DiscretizedBath(
            energies=energies,
            couplings=couplings,
            occupations=np.atleast_1d(fermi(energies, spec)),
        ))
    return baths


def single_particle_hamiltonian(params: ChainParams,
                                baths: list[DiscretizedBath]) -> np.ndarray:
    """One-particle Hamiltonian of dots plus all discretized bath modes.

    Basis ordering: the n_dots dot modes first, then the bath modes of dot 1,
    dot 2, ...  The matrix is real symmetric apart from the (real) dot-bath
    couplings, and Hermitian overall.
    """
    n = params.n_dots
    dim = n + sum(b.energies.size for b in baths)
    h = np.zeros((dim, dim))
    for j in range(n):
        h[j, j] = params.eps[j]
    for j in range(n - 1):
        h[j, j + 1] = h[j + 1, j] = params.g
    offset = n
    for j, bath in enumerate(baths):
        m = bath.energies.size
        sl = slice(offset, offset + m)
        h[sl, sl] = np.diag(bath.energies)
        h[j, sl] = bath.couplings
        h[sl, j] = bath.couplings
        offset += m
    return h


def recurrence_time(baths: list[DiscretizedBath]) -> float:
    """Poincare recurrence estimate 2 pi / (level spacing) of the discretization."""
    spacings = [
        b.energies[1] - b.energies[0] for b in baths if b.energies.size > 1
    ]
    if not spacings:
        return np.inf
    return 2.0 * np.pi / max(spacings)


def oracle_populations(params: ChainParams, specs, init: InitialConditions,
                       times, n_modes: int = DEFAULT_MODES,
                       band_halfwidth: float | None = None) -> np.ndarray:
    """Exact dot populations of the discretized dots-plus-baths system.

    Returns shape (n_dots, n_t).  Initial state: dots at ``init.n`` with no
    coherences, bath modes thermally occupied, no dot-bath correlations.
    Raises if any requested time exceeds the recurrence horizon, where the
    discretization ceases to mimic a continuum.
    """
    params, specs, init = validate(params, specs, init)
    t_arr = np.atleast_1d(np.asarray(times, dtype=float))
    baths = discretize(params, specs, n_modes=n_modes,
                       band_halfwidth=band_halfwidth)
    horizon = recurrence_time(baths)
    if np.max(t_arr) > 0.5 * horizon:
        raise ValidationError(
            [f"requested time {np.max(t_arr):g} beyond half the recurrence "
             f"time ({0.5 * horizon:g}); increase n_modes or shrink the band"]
        )

    h = single_particle_hamiltonian(params, baths)
    occ0 = np.concatenate(
        [np.asarray(init.n)] + [b.occupations for b in baths]
    )
    evals, evecs = np.linalg.eigh(h)

    n = params.n_dots
    out = np.empty((n, t_arr.size))
    # <N_j(t)> = x^dagger C(0) x with x_s = sum_k conj(V_sk) V_jk e^{-i E_k t};
    # with diagonal C(0) this is sum_s occ0_s |x_s|^2, costing O(dim^2) per
    # time point instead of a dim^2 matrix exponential
    for it, t in enumerate(t_arr):
        phase = np.exp(-1j * evals * t)
        for j in range(n):
            x = evecs @ (phase * np.conj(evecs[j, :]))
            out[j, it] = float(np.real(occ0 @ (np.abs(x) ** 2)))
    return out
