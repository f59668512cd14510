import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import find_peaks

from starkhcp.analysis import characteristic_times
from starkhcp.basis import BasisState
from starkhcp.config import RunConfig
from starkhcp.dynamics import (
    SSFIBins,
    carpet,
    check_delay_grid,
    evolve_and_kick,
    ionization_field,
    kicked_populations,
    l_composition,
    lineout,
    manifold_band,
    ssfi_project,
)
from starkhcp.errors import ConfigError, InternalError
from starkhcp.kick import build_kick
from starkhcp.pipeline import Simulation
from starkhcp.stark import StarkBasis, WavePacket
from starkhcp.units import cm1_to_au, ps_to_au


def two_level(split_cm1=11.8, Q=0.05):
    sb = StarkBasis(0.0, np.array([0.0, cm1_to_au(split_cm1)]), np.eye(2), ())
    ko = build_kick(sb, np.array([[0.0, 1.0], [1.0, 0.0]]), Q)
    wp = WavePacket(np.array([1.0, 1.0j]) / math.sqrt(2), sb)
    return sb, ko, wp


def test_ionization_field_of_n26():
    e = -1 / (2 * 26**2)
    assert e**2 / 4 == pytest.approx(1.368e-7, rel=1e-3)
    assert float(ionization_field(e)) == pytest.approx(703, abs=0.5)


def test_zero_kick_keeps_populations(cs_sim):
    ko = build_kick(cs_sim.stark_basis, cs_sim.z_spectrum, 0.0)
    out = evolve_and_kick(cs_sim.packet, ko, 37.3)
    # identity kick; only the phase factors round
    assert np.allclose(np.abs(out.amplitudes), np.abs(cs_sim.packet.amplitudes), rtol=1e-14, atol=1e-300)


def test_norm_preserved(cs_sim):
    out = evolve_and_kick(cs_sim.packet, cs_sim.kick, 12.4)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_basis_mismatch(cs_sim):
    _, ko, _ = two_level()
    with pytest.raises(InternalError):
        evolve_and_kick(cs_sim.packet, ko, 1.0)


def test_two_level_full_revival():
    sb, ko, wp = two_level()
    period_ps = 2 * math.pi / sb.energies[1] / ps_to_au(1.0)
    P = kicked_populations(wp, ko, [0.0, period_ps, 3 * period_ps])
    assert np.allclose(P[0], P[1], atol=1e-12) and np.allclose(P[0], P[2], atol=1e-11)


def test_two_level_is_single_cosine():
    sb, ko, wp = two_level()
    t = np.linspace(0, 10, 401)
    p0 = kicked_populations(wp, ko, t)[:, 0]
    w = sb.energies[1] * ps_to_au(1.0)
    A = np.column_stack([np.ones_like(t), np.cos(w * t), np.sin(w * t)])
    coef, *_ = np.linalg.lstsq(A, p0, rcond=None)
    assert np.abs(A @ coef - p0).max() < 1e-12
    assert np.hypot(coef[1], coef[2]) > 1e-3


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 50), st.floats(0, 50))
def test_time_translation(t1, t2):
    _, _, wp = two_level()
    a = wp.at(ps_to_au(t1)).at(ps_to_au(t2)).amplitudes
    b = wp.at(ps_to_au(t1 + t2)).amplitudes
    assert np.allclose(a, b, atol=1e-9)


def test_ssfi_single_state_and_empty():
    e = -1 / (2 * 26**2)
    sb = StarkBasis(0.0, np.array([e]), np.eye(1), ())
    bins = SSFIBins.uniform(600, 800, 20, smear=0)
    row = ssfi_project(WavePacket(np.array([1.0 + 0j]), sb), bins)
    assert row.sum() == pytest.approx(1.0)
    assert bins.centers[np.argmax(row)] == pytest.approx(703, abs=5)
    assert np.all(ssfi_project(WavePacket(np.array([0j]), sb), bins) == 0)


def test_ssfi_overflow_warns():
    sb = StarkBasis(0.0, np.array([-1 / (2 * 40.0**2), -1 / (2 * 26.0**2)]), np.eye(2), ())
    bins = SSFIBins.uniform(600, 800, 10)
    with pytest.warns(UserWarning, match="outside"):
        row = ssfi_project(WavePacket(np.array([1.0, 1.0 + 0j]) / math.sqrt(2), sb), bins)
    assert row.sum() == pytest.approx(0.5)
    signal, below, above = bins.project(np.array([0.5, 0.5]), sb.energies)
    assert below == pytest.approx(0.5) and above == 0


def test_smearing_preserves_total():
    e = -1 / (2 * np.linspace(24, 28, 50) ** 2)
    p = np.full(50, 1 / 50)
    for smear in (0.0, 1.0, 3.0):
        signal, below, above = SSFIBins.for_n_star(22, 32, 64, smear).project(p, e)
        assert signal.sum() + below + above == pytest.approx(1.0, abs=1e-14)
        assert np.all(signal >= 0)


def test_bad_bins():
    with pytest.raises(ConfigError):
        SSFIBins(np.array([3.0, 2.0, 1.0]))
    with pytest.raises(ConfigError):
        SSFIBins.uniform(100, 50)


def test_carpet_rows_normalized(cs_carpet):
    assert np.abs(cs_carpet.row_totals() - 1).max() < 1e-9
    assert cs_carpet.signal.min() >= 0
    assert cs_carpet.signal.shape == (701, 64)


def test_zero_kick_carpet_is_flat(cs_sim):
    ko = build_kick(cs_sim.stark_basis, cs_sim.z_spectrum, 0.0)
    with pytest.warns(UserWarning, match="zero impulse"):
        c = carpet(cs_sim.packet, ko, np.arange(0, 20, 0.2), cs_sim.bins)
    assert np.abs(np.diff(c.signal, axis=0)).max() < 1e-10
    line = lineout(c, 703.0)
    assert np.ptp(line) < 1e-10


def test_coarse_delay_grid_warns():
    with pytest.warns(UserWarning, match="Kepler"):
        check_delay_grid(np.arange(0, 10, 1.0))
    with pytest.raises(ConfigError):
        check_delay_grid([0.0, 1.0, 0.5])


def test_lineout_band_and_range(cs_carpet):
    center, width = manifold_band(26)
    band = lineout(cs_carpet, center, width)
    single = lineout(cs_carpet, center)
    assert np.all(band >= single - 1e-15)
    with pytest.raises(ConfigError):
        lineout(cs_carpet, 5000.0)


def test_worker_count_does_not_change_results(cs_sim):
    t = np.arange(0, 30, 0.2)
    a = kicked_populations(cs_sim.packet, cs_sim.kick, t, workers=1)
    b = kicked_populations(cs_sim.packet, cs_sim.kick, t, workers=3)
    assert np.array_equal(a, b)


def test_l_composition_start_and_norm(cs_sim):
    lc = l_composition(cs_sim.packet, np.arange(0, 50, 0.5))
    assert np.abs(lc.total() - 1).max() < 1e-9
    assert lc.P[0, 1] > 0.98


def test_l_composition_constant_at_zero_field():
    sim = Simulation(RunConfig(field_vcm=0.0, n_min=20, n_max=32))
    lc = l_composition(sim.packet, np.arange(0, 80, 0.4))
    assert np.abs(lc.P - lc.P[0]).max() < 1e-10
    assert lc.P[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_l_composition_negative_time(cs_sim):
    with pytest.raises(ConfigError):
        l_composition(cs_sim.packet, [-1.0, 0.0])


def test_p_recurrence_near_stark_period(cs_sim):
    # closed form 2 pi / (3 F n) is 62.6 ps; Cs manifold spacing is a little tighter than 3 n F, so the recurrence comes later
    lc = l_composition(cs_sim.packet, np.arange(0, 120, 0.2))
    t, p1 = lc.times, lc.P[:, 1]
    idx, _ = find_peaks(p1, prominence=0.02)
    idx = idx[t[idx] > 30]
    t_rec = t[idx[np.argmax(p1[idx])]]
    tau = characteristic_times(26, 160).tau_stark
    assert abs(t_rec / tau - 1) < 0.15


def test_low_l_enhancement_at_80_vcm():
    sim = Simulation(RunConfig(field_vcm=80.0))
    basis = sim.system.basis
    w30s = sim.stark_basis.U[basis.index(BasisState(30, 0))] ** 2
    t = np.arange(10, 14.01, 0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        P = kicked_populations(sim.packet, sim.kick, t)
    assert (P @ w30s).max() > 3 * (sim.packet.populations @ w30s)
