"""Lumped-circuit coupling model, transmon diagonalization, Hamiltonian build."""

import math

import numpy as np
import pytest
from scipy import constants

from cqedkit.circuit import (
    CapacitanceNetwork,
    DispersiveSystem,
    ModeSpec,
    TransmonParams,
    beta,
    build_hamiltonian,
    cavity_self_kerr,
    chi_from_g,
    coupling_g,
    dephasing_time_from_t1_t2,
    ej_from_lj,
    g_from_chi,
    transmon_f01_alpha,
    transmon_spectrum,
    zero_point_voltage,
)

TWO_PI = 2.0 * math.pi


def _network(c_gap=5e-15, c_annulus=60e-15, c_junction=2e-15, c_cavity=1.4e-12, omega=TWO_PI * 9.3772e9):
    l_cavity = 1.0 / (omega**2 * c_cavity)
    return CapacitanceNetwork(c_gap, c_annulus, c_junction, c_cavity, l_cavity, 4.19e-9)


def test_beta_degenerate_divider():
    net = _network(c_annulus=0.0, c_junction=0.0)
    assert beta(net) == 1.0


def test_beta_direct_arithmetic():
    assert beta(_network(5e-15, 60e-15, 2e-15)) == pytest.approx(5.0 / 67.0, rel=1e-12)


def test_beta_monotone_in_gap_capacitance():
    rng = np.random.default_rng(5)
    for _ in range(10):
        cg = rng.uniform(1e-15, 50e-15)
        assert beta(_network(c_gap=1.1 * cg)) > beta(_network(c_gap=cg))


def test_network_validation():
    with pytest.raises(ValueError):
        _network(c_gap=0.0)
    with pytest.raises(ValueError):
        CapacitanceNetwork(1e-15, 0.0, 0.0, 1e-12, -1e-9, 1e-9)


def test_zero_point_voltage_scaling():
    # doubling C at fixed omega (halving L) scales V0 by 1/sqrt(2)
    v1 = zero_point_voltage(_network(c_cavity=1.0e-12))
    v2 = zero_point_voltage(_network(c_cavity=2.0e-12))
    assert v2 / v1 == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)


def test_zero_point_voltage_identity_case():
    # choose omega = 2C/hbar so that hbar*omega/2C = 1 V^2
    c = 1e-15
    omega = 2.0 * c / constants.hbar
    net = CapacitanceNetwork(1e-15, 0.0, 0.0, c, 1.0 / (omega**2 * c), 1e-9)
    assert zero_point_voltage(net) == pytest.approx(1.0, rel=1e-12)


def test_zero_point_voltage_arithmetic_oracle():
    # sqrt(hbar * 2pi*9.377 GHz / (2 * 280 fF))
    net = _network(c_cavity=280e-15, omega=TWO_PI * 9.377e9)
    expected = math.sqrt(constants.hbar * TWO_PI * 9.377e9 / (2.0 * 280e-15))
    assert zero_point_voltage(net) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(3.331e-6, rel=1e-3)


def test_coupling_unit_identity():
    # beta = 1 and V0 = hbar/e makes g = 1 rad/s
    c = 1e-15
    omega = 2.0 * c * constants.hbar / constants.e**2
    net = CapacitanceNetwork(1e-15, 0.0, 0.0, c, 1.0 / (omega**2 * c), 1e-9)
    assert zero_point_voltage(net) == pytest.approx(constants.hbar / constants.e, rel=1e-12)
    assert coupling_g(net) == pytest.approx(1.0, rel=1e-12)


def test_coupling_linear_in_beta():
    net1 = _network(c_gap=5e-15, c_annulus=95e-15, c_junction=0.0)   # beta = 0.05
    net2 = _network(c_gap=10e-15, c_annulus=90e-15, c_junction=0.0)  # beta = 0.10
    assert coupling_g(net2) / coupling_g(net1) == pytest.approx(2.0, rel=1e-12)


def test_device_network_hits_49_mhz():
    # bundled design values reproduce the qubit-storage coupling scale
    net = CapacitanceNetwork(4.511e-15, 28e-15, 0.65e-15, 1.4e-12, 0.205762e-9, 4.1913e-9)
    assert coupling_g(net) / TWO_PI == pytest.approx(49e6, abs=0.5e6)
    assert net.cavity_omega / TWO_PI == pytest.approx(9377.2e6, abs=0.1e6)


def test_ej_from_lj():
    assert ej_from_lj(4.19e-9) == pytest.approx(39.01e9, rel=1e-3)
    assert ej_from_lj(2.0e-9) / ej_from_lj(4.0e-9) == pytest.approx(2.0, rel=1e-12)
    assert ej_from_lj(1e3) < 1e3  # L -> infinity: E_J -> 0
    with pytest.raises(ValueError):
        ej_from_lj(0.0)


# --- transmon ---------------------------------------------------------------


def test_transmon_asymptotic_frequency():
    p = TransmonParams(e_j=39e9, e_c=204e6)
    f01 = transmon_spectrum(p)[1]
    asym = math.sqrt(8.0 * p.e_j * p.e_c) - p.e_c
    assert abs(f01 - asym) / asym < 0.01


def test_transmon_anharmonicity_near_minus_ec():
    # full diagonalization sits below -E_C by ~0.9/sqrt(E_J/E_C) (~6.5% here),
    # approaching -E_C from below as the ratio grows
    p = TransmonParams(e_j=39e9, e_c=204e6)
    _, alpha = transmon_f01_alpha(p)
    assert alpha < -p.e_c
    assert abs(alpha + p.e_c) / p.e_c < 0.10


def test_transmon_anharmonicity_trend():
    e_c = 204e6
    deviations = []
    for ratio in (20, 50, 100, 200):
        _, alpha = transmon_f01_alpha(TransmonParams(e_j=ratio * e_c, e_c=e_c))
        assert alpha < -e_c
        deviations.append(abs(alpha + e_c))
    assert all(a > b for a, b in zip(deviations, deviations[1:]))


def test_transmon_charge_dispersion_suppressed():
    e_c = 204e6
    p0 = TransmonParams(e_j=193 * e_c, e_c=e_c, n_g=0.0)
    p5 = TransmonParams(e_j=193 * e_c, e_c=e_c, n_g=0.5)
    f0 = transmon_spectrum(p0)[1]
    f5 = transmon_spectrum(p5)[1]
    assert abs(f0 - f5) / f0 < 1e-8


def test_transmon_regime_flag_and_validation():
    assert TransmonParams(39e9, 204e6).in_transmon_regime
    assert not TransmonParams(1e9, 204e6).in_transmon_regime
    with pytest.raises(ValueError):
        TransmonParams(-1e9, 204e6)
    with pytest.raises(ValueError):
        TransmonParams(39e9, 204e6, charge_cutoff=5)


def test_transmon_cutoff_convergence():
    # explicit small-but-valid cutoff still converges by auto-extension
    p = TransmonParams(e_j=39e9, e_c=204e6, charge_cutoff=10)
    f01 = transmon_spectrum(p)[1]
    f01_wide = transmon_spectrum(TransmonParams(39e9, 204e6, charge_cutoff=60))[1]
    assert abs(f01 - f01_wide) < 1.0  # Hz


# --- dispersive conversions ---------------------------------------------------


def test_g_from_chi_published_values():
    g1 = g_from_chi(TWO_PI * -1.17e6, TWO_PI * -2.03e9) / TWO_PI
    assert g1 == pytest.approx(48.73e6, rel=1e-3)
    g2 = g_from_chi(TWO_PI * -3.84e6, TWO_PI * 378e6) / TWO_PI
    assert g2 == pytest.approx(38.1e6, rel=1e-3)


def test_chi_g_round_trip_device_sign():
    for chi, delta in ((-1.17e6, -2.03e9), (-3.84e6, 378e6)):
        g = g_from_chi(TWO_PI * chi, TWO_PI * delta)
        back = chi_from_g(g, TWO_PI * delta) / TWO_PI
        assert back == pytest.approx(chi, rel=1e-12)


def test_chi_from_g_trivial_and_errors():
    assert chi_from_g(0.0, TWO_PI * 1e9) == 0.0
    with pytest.raises(ValueError):
        g_from_chi(TWO_PI * -1e6, 0.0)
    with pytest.raises(ValueError):
        chi_from_g(TWO_PI * 10e6, 0.0)
    with pytest.warns(UserWarning, match="dispersive"):
        chi_from_g(TWO_PI * 100e6, TWO_PI * 500e6)


def test_cavity_self_kerr_values():
    k1 = cavity_self_kerr(TWO_PI * -1.17e6, TWO_PI * -209.8e6) / TWO_PI
    assert k1 == pytest.approx(-1631.2, rel=1e-3)  # ~ -0.002 MHz at table rounding
    k2 = cavity_self_kerr(TWO_PI * -3.22e6, TWO_PI * -204.3e6) / TWO_PI
    assert k2 == pytest.approx(-12.69e3, rel=1e-3)  # ~ -0.012 MHz
    assert cavity_self_kerr(0.0, TWO_PI * -204e6) == 0.0
    with pytest.raises(ValueError):
        cavity_self_kerr(TWO_PI * -1e6, 0.0)


def test_dephasing_time_from_t1_t2():
    assert dephasing_time_from_t1_t2(6.4e-6, 11.7e-6) == pytest.approx(136.1e-6, rel=1e-3)
    assert dephasing_time_from_t1_t2(10e-6, 20e-6) is None
    assert dephasing_time_from_t1_t2(10e-6, 10e-6) == pytest.approx(20e-6, rel=1e-12)
    with pytest.raises(ValueError):
        dephasing_time_from_t1_t2(10e-6, 21e-6)


# --- dispersive system and Hamiltonian ----------------------------------------


def _two_mode_system(chi_hz=-1.17e6, cavity_dim=3, cavity_alpha=0.0):
    modes = (
        ModeSpec("qubit", TWO_PI * 7351.4e6, alpha=TWO_PI * -209.8e6, dim=2),
        ModeSpec("cavity", TWO_PI * 9377.2e6, alpha=TWO_PI * cavity_alpha, dim=cavity_dim),
    )
    chi = np.zeros((2, 2))
    chi[0, 1] = chi[1, 0] = TWO_PI * chi_hz
    return DispersiveSystem(modes, chi)


def test_dispersive_system_validation():
    modes = (ModeSpec("a", 1.0), ModeSpec("b", 2.0))
    with pytest.raises(ValueError, match="symmetric"):
        DispersiveSystem(modes, np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError, match="diagonal"):
        DispersiveSystem(modes, np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        ModeSpec("q", 1.0, t1=1e-6, t2=3e-6)  # T2 > 2 T1
    with pytest.raises(ValueError):
        ModeSpec("q", 1.0, dim=1)


def test_build_hamiltonian_rotating_frame_is_zero():
    modes = (ModeSpec("cavity", TWO_PI * 9.3772e9, alpha=0.0, dim=4),)
    sys1 = DispersiveSystem(modes, np.zeros((1, 1)))
    h = build_hamiltonian(sys1, frame_offsets=[modes[0].omega])
    assert np.max(np.abs(h.matrix)) == 0.0


def test_build_hamiltonian_cross_kerr_oracle():
    # explicit 6x6 diagonal: |q, n> has energy -chi * q * n (frames on resonance)
    sys2 = _two_mode_system()
    h = build_hamiltonian(sys2, frame_offsets=[m.omega for m in sys2.modes])
    expected = np.zeros((6, 6))
    chi = TWO_PI * -1.17e6
    alpha_q = TWO_PI * -209.8e6
    for q in range(2):
        for n in range(3):
            idx = q * 3 + n
            expected[idx, idx] = -chi * q * n - 0.5 * alpha_q * q * (q - 1)
    np.testing.assert_allclose(h.matrix, expected, atol=1e-3)
    # the |e, n> ladder runs upward at +2pi*1.17 MHz per photon
    assert h.matrix[3 + 1, 3 + 1].real == pytest.approx(TWO_PI * 1.17e6, rel=1e-12)


def test_build_hamiltonian_self_kerr_ladder():
    modes = (ModeSpec("cavity", TWO_PI * 9.3772e9, alpha=TWO_PI * -2e3, dim=4),)
    sys1 = DispersiveSystem(modes, np.zeros((1, 1)))
    h = build_hamiltonian(sys1, frame_offsets=[modes[0].omega])
    for n in range(4):
        assert h.matrix[n, n].real == pytest.approx(
            -0.5 * TWO_PI * -2e3 * n * (n - 1), abs=1e-9
        )


def test_build_hamiltonian_fock_diagonal():
    sys2 = _two_mode_system(cavity_dim=4, cavity_alpha=-2e3)
    h = build_hamiltonian(sys2)
    off = h.matrix - np.diag(np.diag(h.matrix))
    assert np.max(np.abs(off)) < 1e-12


def test_subsystem_and_replace():
    sys2 = _two_mode_system()
    sub = sys2.subsystem(("cavity",))
    assert sub.labels == ("cavity",)
    swapped = sys2.replace_mode(sys2.mode("qubit").with_t2(11.7e-6))
    assert swapped.mode("qubit").t2 == 11.7e-6
    assert sys2.chi_between("qubit", "cavity") == swapped.chi_between("qubit", "cavity")
