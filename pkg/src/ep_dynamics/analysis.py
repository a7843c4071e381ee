"""Derived quantities: relaxation distance, anomalous-relaxation ratio,
regime curves and eigenvalue-sheet sweeps.

The central object is the distance to the steady state,
``chi_j(t) = |<N_j(t)> - <N_j>_ss|``, and the ratio

    R_j(t) = chi_j^EP(t; n^EP) / chi_j^over(t; n)

between a critically damped (exceptional-point) trajectory and an overdamped
one with the same reservoir rates.  ``R_j(0) > 1`` with ``R_j -> 0`` at long
times is the anomalous-relaxation signature: the initially more distant state
overtakes the closer one.  Asymptotically the numerator carries a polynomial
secular factor and the denominator a slower pure exponential, so after
dividing out ``t^2`` the log-ratio decays linearly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .heisenberg import (
    build_evolution_matrix,
    classify,
    eta,
    steady_state_populations,
    transient_populations,
)
from .linalg import jordan_structure
from .model import (
    ChainParams,
    InitialConditions,
    QuadratureSettings,
    TimeGrid,
    TimeSeries,
    ValidationError,
)

__all__ = [
    "MpembaReport",
    "SweepGrid",
    "chi",
    "mpemba_ratio",
    "riemann_sweep",
    "regime_curves",
]

CHI_FLOOR = 1e-14


@dataclass
class MpembaReport:
    """Ratio series R_j(t) between two relaxation trajectories, plus fit data.

    ``crossing_time[j]`` is the first grid time after which R_j stays below 1
    for the remainder of the grid, or None when no such time exists.  The
    slope fields describe a linear fit of ``ln R_1 - 2 ln t`` against t on
    the post-crossing window; ``slope_target`` is minus the overdamped
    half-splitting.
    """

    times: np.ndarray
    ratio: np.ndarray              # (n_dots, n_t), NaN where masked
    masked: np.ndarray             # bool (n_dots, n_t): denominator underflow
    ratio_initial: np.ndarray      # (n_dots,)
    crossing_time: list
    fitted_slope: float | None
    slope_target: float
    fit_residual: float | None
    chi_numerator: np.ndarray
    chi_denominator: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass
class SweepGrid:
    """Eigenvalue pair of the detuned two-dot matrix over a parameter grid."""

    detunings: np.ndarray
    couplings: np.ndarray
    eigenvalues: np.ndarray        # (n_detuning, n_g, 2) complex
    defective: np.ndarray          # bool (n_detuning, n_g)


def chi(params: ChainParams, specs, init: InitialConditions, t,
        quad: QuadratureSettings | None = None) -> np.ndarray:
    """Distance to the steady state |<N_j(t)> - <N_j>_ss| per dot."""
    steady = steady_state_populations(params, specs, quad=quad)
    trans = transient_populations(params, specs, init, t, quad=quad)
    if np.ndim(t) == 0:
        return np.abs(trans - steady)
    return np.abs(trans - steady[:, None])


def _crossing_index(r: np.ndarray) -> int | None:
    """First index after which the series stays below 1; None if absent."""
    below = r < 1.0
    if not below[-1]:
        return None
    # last index where the series is >= 1 (or NaN), then step past it
    bad = np.nonzero(~below)[0]
    k = (bad[-1] + 1) if bad.size else 0
    return int(k) if k < r.size else None


def mpemba_ratio(params_ep: ChainParams, params_over: ChainParams, specs,
                 init_ep: InitialConditions, init_over: InitialConditions,
                 grid: TimeGrid,
                 quad: QuadratureSettings | None = None) -> MpembaReport:
    """Ratio of relaxation distances between an EP and an overdamped system.

    Both parameter sets must share the reservoir rates; the first must sit at
    the exceptional point and the second must be overdamped.  The long-time
    fit removes the ``t^2`` secular factor from ``ln R_1`` and fits a line on
    the window starting one quarter past the crossing.
    """
    problems = []
    if params_ep.gamma != params_over.gamma:
        problems.append("reservoir rates must match between the two systems")
    reg_ep = classify(params_ep)
    reg_over = classify(params_over)
    if not reg_ep.at_exceptional_point:
        problems.append(f"first parameter set is {reg_ep.kind}, "
                        "expected exceptional")
    if reg_over.kind != "overdamped":
        problems.append(f"second parameter set is {reg_over.kind}, "
                        "expected overdamped")
    if problems:
        raise ValidationError(problems)

    times = grid.times
    chi_num = chi(params_ep, specs, init_ep, times, quad=quad)
    chi_den = chi(params_over, specs, init_over, times, quad=quad)

    masked = chi_den < CHI_FLOOR
    ratio = np.where(masked, np.nan, chi_num / np.where(masked, 1.0, chi_den))

    crossing = []
    for j in range(ratio.shape[0]):
        k = _crossing_index(np.where(masked[j], np.inf, ratio[j]))
        crossing.append(None if k is None else float(times[k]))

    eta_over = eta(params_over)
    slope_target = -float(eta_over.real)

    fitted_slope = None
    residual = None
    if crossing[0] is not None:
        start = crossing[0] + 0.25 * (times[-1] - crossing[0])
        sel = (times >= start) & (times > 0) & ~masked[0] & (ratio[0] > 0)
        if np.count_nonzero(sel) >= 3:
            x = times[sel]
            y = np.log(ratio[0][sel]) - 2.0 * np.log(x)
            coef, res = np.polynomial.polynomial.polyfit(
                x, y, 1, full=True
            )
            fitted_slope = float(coef[1])
            sse = float(res[0][0]) if len(res[0]) else 0.0
            residual = float(np.sqrt(sse / x.size))

    return MpembaReport(
        times=times,
        ratio=ratio,
        masked=masked,
        ratio_initial=ratio[:, 0].copy(),
        crossing_time=crossing,
        fitted_slope=fitted_slope,
        slope_target=slope_target,
        fit_residual=residual,
        chi_numerator=chi_num,
        chi_denominator=chi_den,
        meta={
            "eta_over": complex(eta_over),
            "gamma": params_ep.gamma,
            "g_ep": params_ep.g,
            "g_over": params_over.g,
        },
    )


def riemann_sweep(base: ChainParams, detuning_range, g_range,
                  resolution) -> SweepGrid:
    """Eigenvalue sheets of the detuned two-dot matrix over (detuning, g).

    The detuning delta shifts the dot energies to ``eps_d +- delta/2`` around
    their mean; each grid cell stores the eigenvalue pair, sorted by (Re
    descending, Im ascending), and a defectivity flag from the Jordan
    analysis.  Exceptional cells can only occur on the zero-detuning line.
    """
    if base.n_dots != 2:
        raise ValidationError(
            [f"eigenvalue sweep defined for 2 dots, got {base.n_dots}"]
        )
    if np.ndim(resolution) == 0:
        n_det = n_g = int(resolution)
    else:
        n_det, n_g = (int(r) for r in resolution)
    if n_det < 1 or n_g < 1:
        raise ValidationError([f"resolution must be >= 1, got {resolution}"])
    center = float(np.mean(base.eps))
    dets = np.linspace(*map(float, detuning_range), n_det)
    gs = np.linspace(*map(float, g_range), n_g)

    eigs = np.empty((n_det, n_g, 2), dtype=complex)
    defective = np.zeros((n_det, n_g), dtype=bool)
    for i, det in enumerate(dets):
        eps = (center + 0.5 * det, center - 0.5 * det)
        for k, g in enumerate(gs):
            p = ChainParams(n_dots=2, eps=eps, g=g, gamma=base.gamma)
            a = build_evolution_matrix(p)
            vals = np.linalg.eigvals(a)
            order = np.lexsort((vals.imag, -vals.real))
            eigs[i, k] = vals[order]
            clusters, _ = jordan_structure(a)
            defective[i, k] = any(
                s > 1 for _, sizes in clusters for s in sizes
            )
    return SweepGrid(detunings=dets, couplings=gs,
                     eigenvalues=eigs, defective=defective)


def _late_extremum(times: np.ndarray, series: np.ndarray, t_min: float,
                   tol: float) -> bool:
    """Whether the series keeps reversing direction at times > t_min.

    A single overshoot (one reversal) also occurs for monotone-regime
    transients leaving a non-equilibrium initial state, so the oscillatory
    fingerprint requires at least two reversals above the noise floor.
    """
    sel = times > t_min
    y = series[sel]
    if y.size < 4:
        return False
    d = np.diff(y)
    d = d[np.abs(d) > tol]
    if d.size < 3:
        return False
    return int(np.sum(np.sign(d[1:]) != np.sign(d[:-1]))) >= 2


def regime_curves(params_list, specs, init: InitialConditions, grid: TimeGrid,
                  normalize: bool = False,
                  quad: QuadratureSettings | None = None) -> list[TimeSeries]:
    """Population curves for several parameter sets, with regime annotations.

    Each returned series carries channels ``N1, N2`` (optionally divided by
    their steady-state values) and metadata: the damping classification and a
    per-dot flag for persistent direction reversals later than ``5/Gamma``
    (the fingerprint separating oscillatory from critically/overdamped
    relaxation, which may still overshoot once early on).
    """
    out = []
    times = grid.times
    for params in params_list:
        pops = transient_populations(params, specs, init, times, quad=quad)
        steady = steady_state_populations(params, specs, quad=quad)
        values = pops / steady[:, None] if normalize else pops
        gamma = max(params.gamma_total, np.finfo(float).tiny)
        # reversals below a per-mille of the dynamic range are relaxation
        # fine structure (or quadrature ripple), not oscillation
        floor = (quad.abs_tol if quad else 1e-9) * 100.0
        tols = [
            max(floor, 1e-3 * float(np.ptp(values[j])))
            for j in range(values.shape[0])
        ]
        regime = classify(params)
        meta = {
            "regime": regime.kind,
            "eta_squared": regime.eta_squared,
            "normalized": normalize,
            "gamma_total": params.gamma_total,
            "g": params.g,
            "late_extremum": [
                _late_extremum(times, values[j], 5.0 / gamma, tols[j])
                for j in range(values.shape[0])
            ],
        }
        channels = {f"N{j + 1}": values[j] for j in range(values.shape[0])}
        channels.update(
            {f"N{j + 1}_ss": np.full(times.size, steady[j])
             for j in range(steady.size)}
        )
        out.append(TimeSeries(times=times, channels=channels, meta=meta))
    return out
