import numpy as np
import pytest

from ep_dynamics.chains import (
    build_chain_matrix,
    chain_eta,
    closed_form_spectrum,
    ep_couplings,
    three_dot_correspondence,
    three_dot_quartet,
)
from ep_dynamics.linalg import is_defective
from ep_dynamics.model import ChainParams, ReservoirSpec, ValidationError


def _alternating(n, g1, g2, g, eps_d=1.0):
    gamma = tuple(g1 if j % 2 == 0 else g2 for j in range(n))
    return ChainParams(n_dots=n, eps=(eps_d,) * n, g=g, gamma=gamma)


def test_chain_matrix_is_tridiagonal():
    p = _alternating(4, 0.5, 0.1, 0.2)
    a = build_chain_matrix(p)
    assert a.shape == (4, 4)
    assert np.allclose(np.triu(a, 2), 0.0) and np.allclose(np.tril(a, -2), 0.0)
    assert a[0, 0] == -(0.25 + 1j)
    assert a[1, 2] == -0.2j


def test_closed_form_matches_numerics_for_all_lengths():
    rng = np.random.default_rng(12)
    for n in range(2, 13):
        for _ in range(5):
            g1, g2 = rng.uniform(0.05, 1.0, size=2)
            g = rng.uniform(0.0, 0.6)
            p = _alternating(n, g1, g2, g, eps_d=rng.uniform(-1, 2))
            vals = np.linalg.eigvals(build_chain_matrix(p))
            vals = vals[np.lexsort((vals.imag, -vals.real))]
            closed = closed_form_spectrum(p)
            dist = max(float(np.min(np.abs(vals - c))) for c in closed)
            assert dist < 1e-10, (n, g1, g2, g)


def test_two_dot_chain_reduces_to_pair_formula():
    p = _alternating(2, 0.5, 0.1, 0.1)
    e1 = chain_eta(p, 1)
    # N = 2: eta_1^2 = ((G1-G2)/4)^2 - 4 g^2 cos^2(pi/3) = ((G1-G2)/4)^2 - g^2
    # (zero here; the square root amplifies round-off to ~1e-9)
    assert abs(e1) < 1e-8
    q = _alternating(2, 0.5, 0.1, 0.05)
    assert chain_eta(q, 1) == pytest.approx(np.sqrt(0.1 ** 2 - 0.05 ** 2),
                                            abs=1e-12)


def test_ep_couplings_produce_defective_matrices():
    for n in (3, 4, 5):
        gs = ep_couplings(n, 0.5, 0.1)
        assert gs.size == n // 2
        for g in gs:
            p = _alternating(n, 0.5, 0.1, float(g))
            assert is_defective(build_chain_matrix(p)), (n, g)


def test_equal_rates_yield_no_exceptional_points():
    assert ep_couplings(6, 0.3, 0.3).size == 0
    # Toeplitz chain: semisimple at any coupling
    p = _alternating(6, 0.3, 0.3, 0.25)
    assert not is_defective(build_chain_matrix(p))


def test_boundary_driven_three_dot_critical_coupling():
    gs = ep_couplings(3, 0.5, 0.0)
    assert gs.size == 1
    assert gs[0] == pytest.approx(0.5 / (4.0 * np.sqrt(2.0)), rel=1e-15)


def test_three_dot_quartet_inside_liouvillian_spectrum():
    g_ep = float(ep_couplings(3, 0.5, 0.1)[0])
    p = _alternating(3, 0.5, 0.1, g_ep)
    specs = (ReservoirSpec(temperature=1.0), ReservoirSpec(temperature=0.5),
             ReservoirSpec(temperature=1.0))
    out = three_dot_correspondence(p, specs)
    assert out["max_distance"] <= 1e-8 * out["liouvillian_norm"]
    assert len(out["matches"]) == 4
    assert three_dot_quartet(p).shape == (4,)


def test_non_alternating_chain_rejected():
    p = ChainParams(n_dots=4, eps=(1.0,) * 4, g=0.2,
                    gamma=(0.5, 0.1, 0.3, 0.1))
    with pytest.raises(ValidationError):
        closed_form_spectrum(p)


def test_mode_index_bounds():
    p = _alternating(5, 0.5, 0.1, 0.2)
    with pytest.raises(ValidationError):
        chain_eta(p, 0)
    with pytest.raises(ValidationError):
        chain_eta(p, 3)
