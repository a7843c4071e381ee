"""Acceptance gate: end-to-end physics criteria with pinned tolerances.

Each test pins one externally meaningful guarantee of the package.  Shared
expensive computations (the finite-bath oracle runs) live in module-scoped
fixtures.  Tolerances are fixed here and must not be loosened; see the
module docstrings of the individual solvers for the numerical background.
"""

import time

import numpy as np
import pytest

from ep_dynamics import bathsim, chains, lindblad
from ep_dynamics.heisenberg import (
    build_evolution_matrix,
    eta,
    g_critical,
    propagator,
    transient_populations,
    steady_state_populations,
)
from ep_dynamics.analysis import mpemba_ratio
from ep_dynamics.linalg import expm, is_defective
from ep_dynamics.model import (
    ChainParams,
    InitialConditions,
    QuadratureSettings,
    ReservoirSpec,
    TimeGrid,
)

# the two reference rate pairs used throughout: strong and weak coupling to
# the reservoirs, with T = (1, 0.1) and mu = 0 at dot energy 1
GAMMA_STRONG = (0.5, 0.1)
GAMMA_WEAK = (1e-2, 1e-3)
SPECS = (ReservoirSpec(temperature=1.0), ReservoirSpec(temperature=0.1))


def _params(gamma, g):
    return ChainParams(n_dots=2, eps=(1.0, 1.0), g=g, gamma=gamma)


# ---------------------------------------------------------------------------
# shared expensive data
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def oracle_data():
    """Exact and finite-bath populations, strong coupling at the EP.

    Band halfwidth 100 * max(Gamma, T) = 100; times up to 10 / Gamma.
    """
    params = _params(GAMMA_STRONG, 0.1)
    init = InitialConditions(n=(0.0, 0.0))
    times = np.linspace(0.0, 10.0 / 0.6, 21)
    he = transient_populations(params, SPECS, init, times)
    oracle = {
        m: bathsim.oracle_populations(params, SPECS, init, times,
                                      n_modes=m, band_halfwidth=100.0)
        for m in (1500, 3000)
    }
    return {"times": times, "he": he, "oracle": oracle}


@pytest.fixture(scope="module")
def weak_coupling_data():
    """Exact vs master-equation populations for the weak-coupling rate pair.

    All three couplings of the reference setup (underdamped 5e-2, exceptional
    2.25e-3, overdamped 1e-3) over t in [0, 20/Gamma], Gamma = 1.1e-2.
    """
    init = InitialConditions(n=(0.0, 0.0))
    times = np.linspace(0.0, 20.0 / 1.1e-2, 41)
    out = {}
    for g in (5e-2, 2.25e-3, 1e-3):
        params = _params(GAMMA_WEAK, g)
        out[g] = {
            "he": transient_populations(params, SPECS, init, times),
            "me": lindblad.me_populations(params, SPECS, init, times),
        }
    out["times"] = times
    return out


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_01_exceptional_point_coincidence():
    """Exact-dynamics and master-equation routes agree on EP structure.

    1000 random rate/coupling draws: the defectivity flag of the 2x2
    evolution matrix and of the -Gamma/2 cluster of the 6-dimensional
    number-conserving sector agree exactly, and the half-splitting eta
    recovered from the sector spectrum matches the closed form to 1e-9.
    Budget: under one minute.
    """
    rng = np.random.default_rng(2024)
    t_start = time.monotonic()
    for k in range(1000):
        g1, g2 = rng.uniform(1e-3, 1.0, size=2)
        g = rng.uniform(0.0, 0.5)
        params = _params((g1, g2), g)
        a = build_evolution_matrix(params)
        he_flag = is_defective(a)

        gamma = g1 + g2
        clusters, _ = lindblad.sector_jordan_structure(params, SPECS)
        me_flag = any(
            any(s > 1 for s in sizes)
            for val, sizes in clusters
            if abs(val + 0.5 * gamma) < 0.2 * gamma
        )
        assert he_flag == me_flag, (k, params)

        e_he = eta(params)
        e_me = lindblad.eta_me(params, SPECS)
        assert abs(e_me - e_he) <= 1e-9, (k, params, e_he, e_me)
    assert time.monotonic() - t_start < 60.0


def test_criterion_02_critical_couplings_closed_form():
    """EP couplings for the two reference rate pairs, machine precision."""
    g_strong = g_critical(_params(GAMMA_STRONG, 0.0))
    g_weak = g_critical(_params(GAMMA_WEAK, 0.0))
    assert abs(g_strong - 0.1) <= np.spacing(0.1)
    assert abs(g_weak - 2.25e-3) <= np.spacing(2.25e-3)
    # the critical matrices are genuinely defective
    assert is_defective(build_evolution_matrix(_params(GAMMA_STRONG, g_strong)))
    assert is_defective(build_evolution_matrix(_params(GAMMA_WEAK, g_weak)))


def test_criterion_03_weak_coupling_me_agreement(weak_coupling_data):
    """Master equation tracks the exact route to 5% at weak coupling.

    Relative deviation is measured in the trajectory sup norm: the largest
    pointwise difference divided by the largest exact population.
    """
    for g in (5e-2, 2.25e-3, 1e-3):
        he = weak_coupling_data[g]["he"]
        me = weak_coupling_data[g]["me"]
        rel = np.max(np.abs(me - he)) / np.max(np.abs(he))
        assert rel <= 0.05, (g, rel)


def test_criterion_04_finite_bath_oracle(oracle_data):
    """Wide-band closed forms vs a brute-force discretized bath.

    3000 modes per bath, band halfwidth 100 * max(Gamma, T): absolute
    agreement to 1e-2 for t <= 10/Gamma, improving when the mode count is
    doubled from 1500 to 3000.
    """
    he = oracle_data["he"]
    err = {m: float(np.max(np.abs(orc - he)))
           for m, orc in oracle_data["oracle"].items()}
    assert err[3000] <= 1e-2
    assert err[3000] <= err[1500]


def test_criterion_05_uniform_occupancy_stationarity():
    """Both baths pinned at constant occupation c leave the dots at c.

    Guards the sign conventions of the injection terms; checked for both
    rate orderings and three occupations.
    """
    times = np.array([0.0, 2.0, 10.0, 40.0])
    for gamma in ((0.5, 0.1), (0.1, 0.5)):
        for c in (0.2, 0.5, 0.9):
            params = _params(gamma, 0.1)
            specs = (ReservoirSpec(occupation=c), ReservoirSpec(occupation=c))
            steady = steady_state_populations(params, specs)
            assert np.max(np.abs(steady - c)) <= 1e-6, (gamma, c)
            pops = transient_populations(
                params, specs, InitialConditions(n=(c, c)), times,
            )
            assert np.max(np.abs(pops - c)) <= 1e-6, (gamma, c)

            rho0 = lindblad.product_state(params, InitialConditions(n=(c, c)))
            rhos = lindblad.evolve(params, specs, rho0, times)
            me = lindblad.populations(params, rhos)
            assert np.max(np.abs(me - c)) <= 1e-10, (gamma, c)


def test_criterion_06_jordan_propagator_identity():
    """Closed-form defective propagator equals the matrix exponential.

    Max entrywise deviation <= 1e-10 over t in [0, 50/Gamma] at the EP.
    """
    params = _params(GAMMA_STRONG, 0.1)
    a = build_evolution_matrix(params)
    worst = 0.0
    for t in np.linspace(0.0, 50.0 / 0.6, 51):
        dev = np.max(np.abs(propagator(params, float(t)) - expm(a, t)))
        worst = max(worst, float(dev))
    assert worst <= 1e-10


@pytest.mark.parametrize("gamma,g_over,t_end", [
    (GAMMA_STRONG, 0.05, 150.0),
    (GAMMA_WEAK, 1e-3, 8250.0),
])
def test_criterion_07_anomalous_relaxation(gamma, g_over, t_end):
    """EP trajectory starts farther from the steady state yet overtakes.

    With n_EP = (1, 1) against an overdamped run from n = (0.5, 0.5):
    R_1(0) > 1, a crossing time exists, and after dividing out the secular
    t^2 factor the fitted slope of ln R_1 equals -eta_over within 10%.
    """
    params_ep = _params(gamma, g_critical(_params(gamma, 0.0)))
    params_over = _params(gamma, g_over)
    grid = TimeGrid(t0=0.0, t_end=t_end, steps=301)
    quad = QuadratureSettings(abs_tol=1e-12)
    rep = mpemba_ratio(
        params_ep, params_over, SPECS,
        InitialConditions(n=(1.0, 1.0)), InitialConditions(n=(0.5, 0.5)),
        grid, quad=quad,
    )
    assert rep.ratio_initial[0] > 1.0
    assert rep.crossing_time[0] is not None
    assert rep.fitted_slope is not None
    target = rep.slope_target
    assert abs(rep.fitted_slope - target) <= 0.1 * abs(target), \
        (rep.fitted_slope, target)


def test_criterion_08_quadratic_transient_signature():
    """The defective propagator imprints a t^2 secular factor.

    At the EP with every dot filled, the initial-state population term times
    e^{Gamma t / 2} is fitted log-log on t in [5/Gamma, 20/Gamma]; the slope
    pins the quadratic growth at 2 +- 0.05.
    """
    params = _params(GAMMA_STRONG, 0.1)
    gamma = 0.6
    times = np.linspace(5.0 / gamma, 20.0 / gamma, 40)
    d = propagator(params, times)                      # (n_t, 2, 2)
    term = np.sum(np.abs(d) ** 2, axis=(1, 2))         # n = (1, 1) weights
    scaled = term * np.exp(gamma * times / 2.0)
    coef = np.polynomial.polynomial.polyfit(
        np.log(times), np.log(scaled), 1,
    )
    slope = float(coef[1])
    assert abs(slope - 2.0) <= 0.05, slope


def test_criterion_09_chain_spectra():
    """Closed-form alternating-chain spectra and the three-dot EP quartet."""
    rng = np.random.default_rng(77)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        g1, g2 = rng.uniform(0.05, 1.0, size=2)
        g = rng.uniform(0.0, 0.6)
        gamma = tuple(g1 if j % 2 == 0 else g2 for j in range(n))
        params = ChainParams(n_dots=n, eps=(1.0,) * n, g=g, gamma=gamma)
        vals = np.linalg.eigvals(chains.build_chain_matrix(params))
        vals = vals[np.lexsort((vals.imag, -vals.real))]
        closed = chains.closed_form_spectrum(params)
        dev = max(float(np.min(np.abs(vals - c))) for c in closed)
        assert dev <= 1e-10, (n, g1, g2, g)

    # three-dot master-equation containment of the analytic quartet
    g_ep3 = float(chains.ep_couplings(3, 0.5, 0.1)[0])
    params3 = ChainParams(n_dots=3, eps=(1.0,) * 3, g=g_ep3,
                          gamma=(0.5, 0.1, 0.5))
    specs3 = (ReservoirSpec(temperature=1.0), ReservoirSpec(temperature=0.1),
              ReservoirSpec(temperature=1.0))
    out = chains.three_dot_correspondence(params3, specs3)
    assert out["max_distance"] <= 1e-8 * out["liouvillian_norm"]

    # boundary-driven three-dot chain: EP at g = Gamma / (4 sqrt(2))
    gs = chains.ep_couplings(3, 0.5, 0.0)
    assert gs.size == 1
    assert abs(gs[0] - 0.5 / (4.0 * np.sqrt(2.0))) <= np.spacing(gs[0])


def test_criterion_10_physicality(oracle_data, weak_coupling_data):
    """Density matrices stay physical; populations stay in [0, 1].

    Master-equation states: trace deviation <= 1e-12, Hermiticity defect
    <= 1e-12, minimum eigenvalue >= -1e-10.  Exact-route and finite-bath
    populations: within [-1e-6, 1 + 1e-6].
    """
    params = _params(GAMMA_STRONG, 0.1)
    rho0 = lindblad.product_state(params, InitialConditions(n=(1.0, 0.0)))
    times = np.linspace(0.0, 40.0, 41)
    rhos = lindblad.evolve(params, SPECS, rho0, times)
    for rho in rhos:
        rep = lindblad.physicality_report(rho)
        assert rep["trace_deviation"] <= 1e-12
        assert rep["hermiticity_deviation"] <= 1e-12
        assert rep["min_eigenvalue"] >= -1e-10

    for pops in (oracle_data["he"], *oracle_data["oracle"].values(),
                 *(weak_coupling_data[g][route]
                   for g in (5e-2, 2.25e-3, 1e-3) for route in ("he", "me"))):
        assert np.min(pops) >= -1e-6
        assert np.max(pops) <= 1.0 + 1e-6
