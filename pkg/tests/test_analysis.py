import numpy as np
import pytest

from ep_dynamics.analysis import (
    chi,
    mpemba_ratio,
    regime_curves,
    riemann_sweep,
)
from ep_dynamics.heisenberg import g_critical
from ep_dynamics.model import (
    ChainParams,
    InitialConditions,
    ReservoirSpec,
    TimeGrid,
    ValidationError,
)

GAMMA = (0.5, 0.1)
EP = ChainParams(n_dots=2, eps=(1.0, 1.0), g=0.1, gamma=GAMMA)
OVER = ChainParams(n_dots=2, eps=(1.0, 1.0), g=0.05, gamma=GAMMA)
UNDER = ChainParams(n_dots=2, eps=(1.0, 1.0), g=3.0, gamma=GAMMA)
SPECS = (ReservoirSpec(temperature=1.0), ReservoirSpec(temperature=0.1))


def test_chi_decays_from_steady_populations():
    # starting the dots at their steady populations still leaves the dot-bath
    # correlations un-equilibrated, so chi starts finite but must decay fast
    from ep_dynamics.heisenberg import steady_state_populations
    steady = steady_state_populations(EP, SPECS)
    init = InitialConditions(n=tuple(steady))
    early = np.max(chi(EP, SPECS, init, np.array([5.0])))
    late = np.max(chi(EP, SPECS, init, np.array([80.0])))
    assert late < 1e-6
    assert late < 1e-3 * early


def test_chi_ratio_label_swap_is_reciprocal():
    grid = np.linspace(0.0, 10.0, 11)
    a = chi(EP, SPECS, InitialConditions(n=(1.0, 1.0)), grid)
    b = chi(OVER, SPECS, InitialConditions(n=(0.5, 0.5)), grid)
    mask = (a[0] > 1e-12) & (b[0] > 1e-12)
    r = a[0][mask] / b[0][mask]
    r_swapped = b[0][mask] / a[0][mask]
    assert np.allclose(r * r_swapped, 1.0, atol=1e-12)


def test_mpemba_report_structure():
    grid = TimeGrid(t0=0.0, t_end=150.0, steps=151)
    rep = mpemba_ratio(EP, OVER, SPECS, InitialConditions(n=(1.0, 1.0)),
                       InitialConditions(n=(0.5, 0.5)), grid)
    assert rep.ratio_initial[0] > 1.0
    assert rep.crossing_time[0] is not None
    assert rep.slope_target == pytest.approx(-np.sqrt(0.1 ** 2 - 0.05 ** 2),
                                             abs=1e-15)
    assert rep.fitted_slope is not None
    assert rep.times.size == 151
    assert rep.chi_numerator.shape == (2, 151)


def test_mpemba_rejects_mismatched_rates_or_regimes():
    other = ChainParams(n_dots=2, eps=(1.0, 1.0), g=0.05, gamma=(0.4, 0.1))
    grid = TimeGrid(t_end=10.0, steps=11)
    with pytest.raises(ValidationError):
        mpemba_ratio(EP, other, SPECS, InitialConditions(n=(1, 1)),
                     InitialConditions(n=(0.5, 0.5)), grid)
    with pytest.raises(ValidationError):
        mpemba_ratio(OVER, EP, SPECS, InitialConditions(n=(1, 1)),
                     InitialConditions(n=(0.5, 0.5)), grid)


def test_riemann_sweep_defective_only_on_resonance_line():
    base = ChainParams(n_dots=2, eps=(1.0, 1.0), g=0.1, gamma=GAMMA)
    grid = riemann_sweep(base, (-0.4, 0.4), (0.05, 0.15), (5, 11))
    assert grid.eigenvalues.shape == (5, 11, 2)
    det_zero = np.argmin(np.abs(grid.detunings))
    assert grid.detunings[det_zero] == pytest.approx(0.0, abs=1e-12)
    # exceptional cells appear on the zero-detuning row at g = g_EP only
    g_ep_col = np.argmin(np.abs(grid.couplings - g_critical(base)))
    assert grid.defective[det_zero, g_ep_col]
    off_rows = [i for i in range(5) if i != det_zero]
    assert not grid.defective[off_rows, :].any()


def test_riemann_sweep_matches_closed_form_on_resonance():
    from ep_dynamics.heisenberg import eta
    base = ChainParams(n_dots=2, eps=(1.0, 1.0), g=0.0, gamma=GAMMA)
    grid = riemann_sweep(base, (0.0, 0.0), (0.0, 0.4), (1, 9))
    for k, g in enumerate(grid.couplings):
        p = ChainParams(n_dots=2, eps=(1.0, 1.0), g=float(g), gamma=GAMMA)
        base_val = -1j - 0.15
        expected = sorted([base_val + eta(p), base_val - eta(p)],
                          key=lambda z: (-z.real, z.imag))
        assert np.allclose(grid.eigenvalues[0, k], expected, atol=1e-12)


def test_regime_curves_annotation():
    grid = TimeGrid(t0=0.0, t_end=40.0, steps=321)
    curves = regime_curves([UNDER, EP, OVER], SPECS,
                           InitialConditions(n=(1.0, 0.0)), grid)
    kinds = [c.meta["regime"] for c in curves]
    assert kinds == ["underdamped", "exceptional", "overdamped"]
    # oscillatory relaxation keeps reversing direction; damped decay does not
    assert any(curves[0].meta["late_extremum"])
    assert not any(curves[2].meta["late_extremum"])
    assert "N1" in curves[0].channels and "N2_ss" in curves[0].channels
