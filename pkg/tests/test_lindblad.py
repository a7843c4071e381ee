import numpy as np
import pytest

from ep_dynamics.heisenberg import eta, transient_populations
from ep_dynamics.lindblad import (
    build_hamiltonian,
    build_liouvillian,
    dot_operators,
    eta_me,
    evolve,
    liouvillian_spectrum,
    me_populations,
    number_sector_matrix,
    physicality_report,
    populations,
    product_state,
    sector_jordan_structure,
    steady_state,
)
from ep_dynamics.model import (
    ChainParams,
    InitialConditions,
    ReservoirSpec,
    ValidationError,
)

STRONG = ChainParams(n_dots=2, eps=(1.0, 1.0), g=0.1, gamma=(0.5, 0.1))
WEAK = ChainParams(n_dots=2, eps=(1.0, 1.0), g=2.25e-3, gamma=(1e-2, 1e-3))
SPECS = (ReservoirSpec(temperature=1.0), ReservoirSpec(temperature=0.1))


def test_dot_operators_are_fermionic():
    ops = dot_operators(3)
    dim = 8
    for j, cj in enumerate(ops):
        assert cj.shape == (dim, dim)
        # c^2 = 0 and {c, c^dagger} = 1
        assert np.allclose(cj @ cj, 0.0, atol=1e-14)
        assert np.allclose(cj @ cj.T.conj() + cj.T.conj() @ cj,
                           np.eye(dim), atol=1e-14)
    for i in range(3):
        for j in range(i + 1, 3):
            anti = ops[i] @ ops[j] + ops[j] @ ops[i]
            assert np.allclose(anti, 0.0, atol=1e-14)


def test_hamiltonian_is_hermitian_with_correct_single_particle_block():
    h = build_hamiltonian(STRONG)
    assert np.allclose(h, h.T.conj(), atol=1e-14)
    ops = dot_operators(2)
    # single-particle matrix elements <0|c_i H c_j^dagger|0>
    vac = np.zeros(4)
    vac[0] = 1.0
    hmat = np.array([
        [vac @ ops[i] @ h @ ops[j].T.conj() @ vac for j in range(2)]
        for i in range(2)
    ])
    assert np.allclose(hmat, [[1.0, 0.1], [0.1, 1.0]], atol=1e-14)


def test_liouvillian_preserves_trace():
    liou = build_liouvillian(STRONG, SPECS)
    vec_id = np.eye(4).reshape(-1)
    assert np.max(np.abs(vec_id @ liou)) < 1e-12 * np.linalg.norm(liou)


def test_spectrum_contains_analytic_sextet():
    spec = liouvillian_spectrum(STRONG, SPECS)
    gamma = STRONG.gamma_total
    e = eta(STRONG)
    expected = [0.0, -gamma, -gamma / 2, -gamma / 2,
                -gamma / 2 + 2 * e, -gamma / 2 - 2 * e]
    scale = max(1.0, gamma)
    for x in expected:
        assert np.min(np.abs(spec.eigenvalues - x)) < 1e-9 * scale


def test_eta_me_matches_eta_he_across_regimes():
    rng = np.random.default_rng(3)
    for _ in range(50):
        g1, g2 = rng.uniform(0.05, 1.0, size=2)
        g = rng.uniform(0.0, 0.5)
        p = ChainParams(n_dots=2, eps=(1.0, 1.0), g=g, gamma=(g1, g2))
        e_he = eta(p)
        e_me = eta_me(p, SPECS)
        assert abs(e_me - e_he) < 1e-9, p


def test_sector_jordan_block_at_exceptional_point():
    clusters, _ = sector_jordan_structure(STRONG, SPECS)
    gamma = STRONG.gamma_total
    at_half = [sizes for val, sizes in clusters
               if abs(val + 0.5 * gamma) < 0.05 * gamma]
    assert at_half and sorted(at_half[0], reverse=True)[0] >= 3


def test_sector_semisimple_away_from_exceptional_point():
    under = ChainParams(n_dots=2, eps=(1, 1), g=3.0, gamma=(0.5, 0.1))
    clusters, _ = sector_jordan_structure(under, SPECS)
    assert all(s == 1 for _, sizes in clusters for s in sizes)


def test_number_sector_closure():
    sector = number_sector_matrix(STRONG, SPECS)
    assert sector.shape == (6, 6)
    vals = np.linalg.eigvals(sector)
    assert np.min(np.abs(vals)) < 1e-12  # steady state inside the sector


def test_product_state_and_populations():
    rho = product_state(STRONG, InitialConditions(n=(0.3, 0.8)))
    assert np.isclose(np.trace(rho), 1.0)
    assert np.allclose(populations(STRONG, rho), [0.3, 0.8], atol=1e-14)


def test_steady_state_is_physical_and_stationary():
    rho = steady_state(STRONG, SPECS)
    rep = physicality_report(rho)
    assert rep["trace_deviation"] < 1e-12
    assert rep["hermiticity_deviation"] < 1e-12
    assert rep["min_eigenvalue"] > -1e-10
    liou = build_liouvillian(STRONG, SPECS)
    drift = liou @ rho.reshape(-1, order="F")
    assert np.max(np.abs(drift)) < 1e-12 * np.linalg.norm(liou)


def test_evolution_stays_physical():
    rho0 = product_state(STRONG, InitialConditions(n=(1.0, 0.0)))
    times = np.linspace(0.0, 30.0, 16)
    rhos = evolve(STRONG, SPECS, rho0, times)
    for rho in rhos:
        rep = physicality_report(rho)
        assert rep["trace_deviation"] < 1e-12
        assert rep["hermiticity_deviation"] < 1e-12
        assert rep["min_eigenvalue"] > -1e-10


def test_single_dot_relaxation_closed_form():
    # one dot, one reservoir: dN/dt = Gamma (f - N)
    p = ChainParams(n_dots=1, eps=(1.0,), g=0.0, gamma=(0.4,))
    spec = ReservoirSpec(temperature=1.0)
    times = np.linspace(0.0, 10.0, 9)
    pops = me_populations(p, (spec,), InitialConditions(n=(1.0,)), times)
    from ep_dynamics.model import fermi
    f = fermi(1.0, spec)
    expected = f + (1.0 - f) * np.exp(-0.4 * times)
    assert np.allclose(pops[0], expected, atol=1e-10)


def test_closed_pair_rabi_oscillation():
    p = ChainParams(n_dots=2, eps=(1.0, 1.0), g=0.2, gamma=(0.0, 0.0))
    times = np.array([0.0, 0.5 * np.pi / 0.2, np.pi / 0.2])
    pops = me_populations(p, SPECS, InitialConditions(n=(1.0, 0.0)), times)
    assert np.allclose(pops[0], [1.0, 0.0, 1.0], atol=1e-10)
    assert np.allclose(pops[0] + pops[1], 1.0, atol=1e-12)


def test_weak_coupling_tracks_exact_route():
    specs = (ReservoirSpec(temperature=1.0), ReservoirSpec(temperature=0.1))
    init = InitialConditions(n=(0.0, 0.0))
    times = np.linspace(0.0, 400.0, 9)
    me = me_populations(WEAK, specs, init, times)
    he = transient_populations(WEAK, specs, init, times)
    scale = np.max(np.abs(he))
    assert np.max(np.abs(me - he)) / scale < 0.05


def test_uniform_occupancy_stationary_under_master_equation():
    c = 0.5
    specs = (ReservoirSpec(occupation=c), ReservoirSpec(occupation=c))
    rho0 = product_state(STRONG, InitialConditions(n=(c, c)))
    rhos = evolve(STRONG, specs, rho0, np.array([0.0, 5.0, 40.0]))
    for rho in rhos:
        assert np.allclose(populations(STRONG, rho), c, atol=1e-10)


def test_too_many_dots_rejected():
    p = ChainParams(n_dots=7, eps=(1.0,) * 7, g=0.1, gamma=(0.1,) * 7)
    with pytest.raises(ValidationError):
        build_liouvillian(p, (ReservoirSpec(),) * 7)
