"""Exact single-particle route: evolution matrix, damping regimes, populations.

For two resonant dots the non-Hermitian evolution matrix

    A = -[[Gamma_1/2 + i eps_d,  i g],
          [i g,  Gamma_2/2 + i eps_d]]

has eigenvalues ``-i eps_d - Gamma/4 +- eta`` with
``eta^2 = ((Gamma_1 - Gamma_2)/4)^2 - g^2`` and ``Gamma = Gamma_1 + Gamma_2``.
``eta^2 > 0`` is overdamped, ``eta^2 < 0`` underdamped, and ``eta = 0`` is a
second-order exceptional point at ``g = |Gamma_1 - Gamma_2| / 4``, where A is
defective and the propagator picks up a secular ``t e^{lambda t}`` term.

Dot populations split into a propagator (memory) term plus reservoir-injection
integrals over energy:

    <N_j(t)> = sum_m |D(t)[j,m]|^2 n_m(0)
             + sum_m Gamma_m int de/(2 pi) f_m(e) |Dt[j,m](e)|^2

with ``D(t) = e^{A t}`` and ``Dt(e) = (A + i e)^{-1} (e^{(A + i e) t} - 1)``
up to a global phase.  The integrals are evaluated by oscillation-aware
adaptive quadrature plus analytic tail corrections.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .linalg import NumericalError, expm
from .model import (
    ChainParams,
    InitialConditions,
    QuadratureSettings,
    ValidationError,
    fermi,
    validate,
)
from .quadrature import adaptive_integrate, filon_integrate, gauss_tail

__all__ = [
    "DampingRegime",
    "EtaValue",
    "build_A",
    "build_evolution_matrix",
    "eta_squared",
    "eta",
    "eta_he",
    "g_critical",
    "classify",
    "propagator",
    "transient_populations",
    "steady_state_populations",
    "kernel_resolvent",
    "kernel_spectral",
    "kernel_defective",
]

# |eta^2| relative bands for the propagator path selection (in units of
# max(Gamma)^2): below EP_THRESHOLD_REL the defective closed form is exact to
# round-off; above SPECTRAL_BAND_REL the eigenbasis is well conditioned; in
# between both analytic forms lose digits and the Pade expm takes over.
EP_THRESHOLD_REL = 1e-12
SPECTRAL_BAND_REL = 1e-6
SPECTRAL_COND_CAP = 1e8


@dataclass(frozen=True)
class DampingRegime:
    """Damping classification of a resonant two-dot system."""

    kind: str  # "underdamped" | "overdamped" | "exceptional"
    eta_squared: float
    threshold: float

    @property
    def at_exceptional_point(self) -> bool:
        return self.kind == "exceptional"


@dataclass(frozen=True)
class EtaValue:
    """Squared half-splitting and its principal square root.

    ``eta`` is real and non-negative for ``eta_squared >= 0`` (overdamped)
    and purely imaginary with positive imaginary part otherwise.
    """

    eta_squared: float
    eta: complex


def _require_two_dots(params: ChainParams):
    if params.n_dots != 2 or len(params.gamma) != 2 or len(params.eps) != 2:
        raise ValidationError(
            [f"two-dot routine called with n_dots = {params.n_dots}"]
        )


def _require_resonant(params: ChainParams):
    if not params.resonant:
        raise ValidationError(
            ["damping taxonomy requires resonant dots (equal energies); "
             f"got eps = {params.eps}"]
        )


def build_evolution_matrix(params: ChainParams) -> np.ndarray:
    """The 2x2 non-Hermitian matrix A governing d<sigma_j^-|/dt (minus noise)."""
    _require_two_dots(params)
    g1, g2 = params.gamma
    e1, e2 = params.eps
    return -np.array(
        [
            [0.5 * g1 + 1j * e1, 1j * params.g],
            [1j * params.g, 0.5 * g2 + 1j * e2],
        ],
        dtype=complex,
    )


build_A = build_evolution_matrix


def eta_squared(params: ChainParams) -> float:
    """Squared half-splitting ((Gamma_1 - Gamma_2)/4)^2 - g^2 (resonant dots)."""
    _require_two_dots(params)
    _require_resonant(params)
    g1, g2 = params.gamma
    return (0.25 * (g1 - g2)) ** 2 - params.g ** 2


def eta(params: ChainParams) -> complex:
    """Half-splitting eta; real when overdamped, positive-imaginary when not."""
    e2 = eta_squared(params)
    return complex(np.sqrt(e2)) if e2 >= 0 else 1j * float(np.sqrt(-e2))


def eta_he(params: ChainParams) -> EtaValue:
    """Half-splitting of the two-dot evolution matrix, as an :class:`EtaValue`."""
    return EtaValue(eta_squared=eta_squared(params), eta=eta(params))


def g_critical(params: ChainParams) -> float:
    """Inter-dot coupling |Gamma_1 - Gamma_2| / 4 where the two-dot EP sits."""
    _require_two_dots(params)
    g1, g2 = params.gamma
    return 0.25 * abs(g1 - g2)


def classify(params: ChainParams, threshold: float | None = None) -> DampingRegime:
    """Damping regime by the sign of eta^2, with an |eta^2| <= threshold EP band.

    The default threshold is ``1e-12 * max(Gamma)^2`` so that parameter draws
    constructed to sit on the exceptional point are classified as such despite
    round-off in ``g = |Gamma_1 - Gamma_2| / 4``.
    """
    e2 = eta_squared(params)
    if threshold is None:
        scale = max(max(params.gamma), np.finfo(float).tiny)
        threshold = EP_THRESHOLD_REL * scale ** 2
    if abs(e2) <= threshold:
        kind = "exceptional"
    elif e2 > 0:
        kind = "overdamped"
    else:
        kind = "underdamped"
    return DampingRegime(kind=kind, eta_squared=e2, threshold=threshold)


def propagator(params: ChainParams, t) -> np.ndarray:
    """e^{A t} for scalar or array t; shape (2, 2) or (len(t), 2, 2).

    Resonant systems use closed forms: the spectral decomposition away from
    the exceptional point and the exact ``e^{lambda t} (1 + t N)`` form (N the
    nilpotent part of A) on it.  Near-defective systems, ill-conditioned
    eigenbases and detuned dots fall back to the Pade matrix exponential.
    """
    a = build_evolution_matrix(params)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    scalar = np.ndim(t) == 0

    path = "expm"
    if params.resonant:
        regime = classify(params)
        scale = max(max(params.gamma), np.finfo(float).tiny)
        if regime.at_exceptional_point:
            path = "defective"
        elif abs(regime.eta_squared) >= SPECTRAL_BAND_REL * scale ** 2:
            path = "spectral"

    if path == "defective":
        lam = -0.25 * params.gamma_total - 1j * params.eps[0]
        nil = a - lam * np.eye(2)
        out = np.exp(lam * t_arr)[:, None, None] * (
            np.eye(2)[None] + t_arr[:, None, None] * nil[None]
        )
    elif path == "spectral":
        vals, vecs = np.linalg.eig(a)
        cond = np.linalg.cond(vecs)
        if cond > SPECTRAL_COND_CAP:
            warnings.warn(
                f"eigenbasis condition {cond:.2e} too large; "
                "falling back to the matrix exponential",
                stacklevel=2,
            )
            path = "expm"
        else:
            phases = np.exp(np.outer(t_arr, vals))  # (n, 2)
            out = np.einsum("jp,np,pm->njm", vecs, phases, np.linalg.inv(vecs))
    if path == "expm":
        out = np.stack([expm(a, tk) for tk in t_arr])

    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite propagator")
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# reference kernels (cross-checks; the production path runs in _kernels)
# ---------------------------------------------------------------------------

def kernel_resolvent(params: ChainParams, eps: float, tau: float) -> np.ndarray:
    """|Dt[j, m]|^2 from the resolvent identity; valid in every regime."""
    a = build_evolution_matrix(params)
    m = a + 1j * eps * np.eye(2)
    dt = np.linalg.solve(m, expm(m, tau) - np.eye(2))
    return np.abs(dt) ** 2


def kernel_spectral(params: ChainParams, eps: float, tau: float) -> np.ndarray:
    """|Dt|^2 from the eigendecomposition of A (away from the EP)."""
    a = build_evolution_matrix(params)
    vals, vecs = np.linalg.eig(a)
    z = vals + 1j * eps
    factors = (np.exp(z * tau) - 1.0) / z
    dt = np.einsum("jp,p,pm->jm", vecs, factors, np.linalg.inv(vecs))
    return np.abs(dt) ** 2


def kernel_defective(params: ChainParams, eps: float, tau: float) -> np.ndarray:
    """|Dt|^2 at the exceptional point, via the nilpotent part of A.

    With z = lambda + i eps and N = A - lambda the kernel is
    ``Dt = ((e^{z tau} - 1)/z) 1 + (tau e^{z tau}/z - (e^{z tau} - 1)/z^2) N``.
    """
    _require_resonant(params)
    a = build_evolution_matrix(params)
    lam = -0.25 * params.gamma_total - 1j * params.eps[0]
    nil = a - lam * np.eye(2)
    z = lam + 1j * eps
    ez = np.exp(z * tau)
    dt = ((ez - 1.0) / z) * np.eye(2) + (tau * ez / z - (ez - 1.0) / z ** 2) * nil
    return np.abs(dt) ** 2


# ---------------------------------------------------------------------------
# population integrals
# ---------------------------------------------------------------------------

def _window(params: ChainParams, specs) -> tuple[float, float]:
    """Integration window center and half-width covering resonance + thermal
    structure."""
    center = float(np.mean(params.eps))
    scale = max(params.gamma_total, 4 * abs(params.g))
    for spec in specs:
        if spec.occupation is not None:
            continue
        temp = 0.0 if spec.zero_temperature else spec.temperature
        scale = max(scale, temp, abs(spec.mu - center) + 10.0 * temp)
    return center, scale


def _fd_step(specs, span: float) -> float:
    temps = [
        s.temperature
        for s in specs
        if s.occupation is None and not s.zero_temperature
    ]
    h = 1e-3 * max(span, 1.0)
    if temps:
        h = min(h, 0.1 * min(temps))
    return h


def _steady_state_exists(a: np.ndarray) -> bool:
    return bool(np.max(np.linalg.eigvals(a).real) < -1e-14)


def _osc_tail(params, specs, a, dmat, tau, edge, sign, h):
    """Integration-by-parts value and error for the oscillatory tail.

    ``sign = +1`` integrates [edge, inf), ``sign = -1`` (-inf, edge].  Uses
    the two-term asymptotic expansion in 1/(i tau); the returned error is the
    finite-difference estimate of the next term.
    """
    g1f, g2f = params.gamma
    eps3 = np.array([edge - h, edge, edge + h])
    f1 = np.atleast_1d(fermi(eps3, specs[0]))
    f2 = np.atleast_1d(fermi(eps3, specs[1]))
    q3 = kern.osc_coeff(
        eps3, a[0, 0], a[0, 1], a[1, 0], a[1, 1],
        dmat[0, 0], dmat[0, 1], dmat[1, 0], dmat[1, 1],
        f1, f2, g1f, g2f,
    )
    q0 = q3[:, 1]
    q1 = (q3[:, 2] - q3[:, 0]) / (2.0 * h)
    q2 = (q3[:, 2] - 2.0 * q3[:, 1] + q3[:, 0]) / h ** 2
    phase = np.exp(1j * edge * tau)
    itau = 1j * tau
    value = -sign * phase * (q0 / itau - q1 / itau ** 2)
    err = float(np.max(np.abs(q2))) / tau ** 3
    return value.real, err


def _injection_integral(params, specs, a, dmat, tau, quad):
    """Reservoir-injection term for one time point; returns (values, error)."""
    g1f, g2f = params.gamma
    center, scale = _window(params, specs)
    base = quad.window_factor * scale
    # extend the splice points so the tail expansions converge: the remainder
    # of the two-term oscillatory expansion scales like Gamma / (L^4 tau^3)
    amp = params.gamma_total / np.pi
    l_osc = (60.0 * amp / (0.1 * quad.abs_tol * tau ** 3)) ** 0.25
    half = max(base, l_osc, 30.0 / tau)
    lo, hi = center - half, center + half

    args = (
        a[0, 0], a[0, 1], a[1, 0], a[1, 1],
        dmat[0, 0], dmat[0, 1], dmat[1, 0], dmat[1, 1],
    )

    def eval_smooth(eps):
        f1 = np.atleast_1d(fermi(eps, specs[0]))
        f2 = np.atleast_1d(fermi(eps, specs[1]))
        vals, _ = kern.integrand(eps, tau, *args, f1, f2, g1f, g2f,
                                 kern.MODE_NONOSC)
        return vals

    def eval_osc(eps):
        f1 = np.atleast_1d(fermi(eps, specs[0]))
        f2 = np.atleast_1d(fermi(eps, specs[1]))
        return kern.osc_coeff(eps, *args, f1, f2, g1f, g2f)

    # the kernel splits as (smooth part) + Re(q e^{i eps tau}); the smooth
    # part goes through plain adaptive quadrature, the oscillatory part
    # through Filon panels whose cost does not grow with tau
    value, err = adaptive_integrate(
        lambda eps: (eval_smooth(eps), None), lo, hi,
        0.5 * quad.abs_tol, max_panels=quad.max_panels,
    )
    osc_val, osc_err = filon_integrate(
        eval_osc, lo, hi, tau, 0.5 * quad.abs_tol,
        max_panels=quad.max_panels,
    )
    value = value + osc_val.real
    err += osc_err

    h = _fd_step(specs, half)
    for edge, sign in ((hi, 1.0), (lo, -1.0)):
        smooth, serr = gauss_tail(eval_smooth, edge, center)
        osc, oerr = _osc_tail(params, specs, a, dmat, tau, edge, sign, h)
        value = value + smooth + osc
        err += serr + oerr
    return value, err


def transient_populations(params: ChainParams, specs, init: InitialConditions,
                          t, quad: QuadratureSettings | None = None,
                          with_error: bool = False):
    """Dot populations <N_1(t)>, <N_2(t)> from the exact two-dot evolution.

    ``t`` is a scalar or array of times measured from the initial state.
    Returns an array of shape (2,) or (2, len(t)); with ``with_error=True``
    also the summed quadrature error estimate per time point.
    """
    params, specs, init = validate(params, specs, init)
    _require_two_dots(params)
    quad = quad or QuadratureSettings()

    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    scalar = np.ndim(t) == 0
    if np.any(t_arr < 0):
        raise ValidationError(["negative time in transient_populations"])

    a = build_evolution_matrix(params)
    dmats = propagator(params, t_arr)
    n0 = np.asarray(init.n)

    out = np.empty((2, t_arr.size))
    errs = np.zeros(t_arr.size)
    for k, tau in enumerate(t_arr):
        dmat = dmats[k]
        markov = np.abs(dmat) ** 2 @ n0
        if tau == 0.0 or params.gamma_total == 0.0:
            out[:, k] = markov
            continue
        inject, err = _injection_integral(params, specs, a, dmat, tau, quad)
        out[:, k] = markov + inject
        errs[k] = err

    if scalar:
        out, errs = out[:, 0], float(errs[0])
    return (out, errs) if with_error else out


def steady_state_populations(params: ChainParams, specs,
                             quad: QuadratureSettings | None = None,
                             with_error: bool = False):
    """Long-time dot populations sum_m Gamma_m int de/(2 pi) f_m |M^{-1}[j,m]|^2."""
    params, specs, _ = validate(params, specs, None)
    _require_two_dots(params)
    quad = quad or QuadratureSettings()

    a = build_evolution_matrix(params)
    if not _steady_state_exists(a):
        raise ValidationError(
            ["no steady state: the evolution matrix has an undamped mode "
             "(check that at least one reservoir rate is positive and the "
             "dots are coupled)"]
        )
    g1f, g2f = params.gamma
    center, scale = _window(params, specs)
    half = quad.window_factor * scale
    args = (a[0, 0], a[0, 1], a[1, 0], a[1, 1], 0j, 0j, 0j, 0j)

    def eval_fn(eps):
        f1 = np.atleast_1d(fermi(eps, specs[0]))
        f2 = np.atleast_1d(fermi(eps, specs[1]))
        vals, _ = kern.integrand(eps, 0.0, *args, f1, f2, g1f, g2f,
                                 kern.MODE_STEADY)
        return vals, None

    value, err = adaptive_integrate(
        lambda eps: eval_fn(eps), center - half, center + half,
        quad.abs_tol, max_panels=quad.max_panels,
    )
    for edge in (center + half, center - half):
        tail, terr = gauss_tail(lambda eps: eval_fn(eps)[0], edge, center)
        value = value + tail
        err += terr
    return (value, float(err)) if with_error else value
