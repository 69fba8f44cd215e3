"""Seam-loss model, TE101 admittance, conductance fit, budgets."""

import math

import numpy as np
import pytest
from scipy import constants

from cqedkit.seams import (
    QMeasurementSet,
    RectangularCavity,
    SeamSpec,
    budget_report,
    combine_t1_budget,
    fit_seam_conductance,
    purcell_t1_estimate,
    q_from_seam,
    t1_limit_from_seam,
    te101_seam_admittance,
    te101_seam_admittance_quadrature,
)

TWO_PI = 2.0 * math.pi


def test_q_from_seam():
    assert q_from_seam(16.0, 1e8) == pytest.approx(6.25e6, rel=1e-12)
    assert q_from_seam(3.0, 3.0) == 1.0
    assert q_from_seam(3.0, 6.0) / q_from_seam(3.0, 3.0) == 2.0
    with pytest.raises(ValueError, match="unbounded"):
        q_from_seam(0.0, 1e8)
    with pytest.raises(ValueError):
        q_from_seam(1.0, 0.0)


def test_t1_limit_published_rows():
    # In/In perimeter, storage mode
    t_in = t1_limit_from_seam(15.96, 1e8, TWO_PI * 9.25e9)
    assert t_in == pytest.approx(107.8e-6, rel=1e-3)
    # Al/Au/In 3x3 mm square, qubit and storage modes
    t_q = t1_limit_from_seam(0.524, 4.2e5, TWO_PI * 7.3e9)
    assert t_q == pytest.approx(17.47e-6, rel=1e-3)
    t_mu = t1_limit_from_seam(0.172, 4.2e5, TWO_PI * 9.25e9)
    assert t_mu == pytest.approx(42.0e-6, rel=1e-3)


def test_t1_q_identity_random():
    rng = np.random.default_rng(23)
    for _ in range(10):
        y, g, w = rng.uniform(0.01, 100), rng.uniform(1e4, 1e9), rng.uniform(1e9, 1e11)
        assert t1_limit_from_seam(y, g, w) * w == pytest.approx(q_from_seam(y, g), rel=1e-12)


def test_te101_symmetric_reduction():
    cav = RectangularCavity(a=0.02, d=0.02, b=1e-3)
    f = 9e9
    omega = TWO_PI * f
    expected = 4.0 / (omega * constants.mu_0 * cav.a * cav.b)
    assert te101_seam_admittance(cav, f) == pytest.approx(expected, rel=1e-12)


def test_te101_height_scaling():
    f = 9.25e9
    y1 = te101_seam_admittance(RectangularCavity(0.022, 0.024, 300e-6), f)
    y2 = te101_seam_admittance(RectangularCavity(0.022, 0.024, 600e-6), f)
    assert y1 / y2 == pytest.approx(2.0, rel=1e-12)


def test_te101_device_geometry():
    cav = RectangularCavity(a=22e-3, d=24e-3, b=300e-6)
    assert cav.te101_frequency == pytest.approx(9.2429e9, rel=1e-4)
    y = te101_seam_admittance(cav, 9.25e9)
    assert y == pytest.approx(7.982, rel=1e-3)
    # ideal box sits within a factor 2.5 of the published 16.0 per Ohm*m
    assert 16.0 / 2.5 < y < 16.0 * 2.5


@pytest.mark.parametrize(
    "cav,f",
    [
        (RectangularCavity(22e-3, 24e-3, 300e-6), 9.25e9),
        (RectangularCavity(15e-3, 15e-3, 1e-3), None),
        (RectangularCavity(10e-3, 30e-3, 250e-6), None),
        (RectangularCavity(5e-3, 40e-3, 2e-3), None),
    ],
)
def test_te101_closed_form_vs_quadrature(cav, f):
    closed = te101_seam_admittance(cav, f)
    quad = te101_seam_admittance_quadrature(cav, f)
    assert abs(closed - quad) / quad < 1e-6


def test_fit_seam_conductance_noiseless():
    y = np.array([0.1, 1.0, 10.0])
    g, (lo, hi) = fit_seam_conductance(QMeasurementSet(tuple(zip(y, 4.2e5 / y))))
    assert g == pytest.approx(4.2e5, rel=1e-12)
    assert lo <= g <= hi


def test_fit_seam_conductance_noisy_monte_carlo():
    rng = np.random.default_rng(99)
    y = np.geomspace(0.05, 20, 20)
    q = (4.2e5 / y) * rng.lognormal(0.0, 0.10, 20)
    g, (lo, hi) = fit_seam_conductance(QMeasurementSet(tuple(zip(y, q))))
    assert abs(g - 4.2e5) / 4.2e5 < 0.10
    assert lo < g < hi


def test_fit_seam_conductance_scale_equivariance():
    y = np.array([0.3, 2.0, 7.0, 11.0])
    base, _ = fit_seam_conductance(QMeasurementSet(tuple(zip(y, 1e5 / y))))
    scaled, _ = fit_seam_conductance(QMeasurementSet(tuple(zip(y, 3.0 * 1e5 / y))))
    assert scaled == pytest.approx(3.0 * base, rel=1e-12)


def test_measurement_set_validation():
    with pytest.raises(ValueError):
        QMeasurementSet(((1.0, 1e5),))  # fewer than 2 samples
    with pytest.raises(ValueError):
        QMeasurementSet(((1.0, 1e5), (-1.0, 1e5)))


def test_purcell_estimate():
    t = purcell_t1_estimate(TWO_PI * 38e6, TWO_PI * 378e6, 1.0 / 1.0e-6)
    assert t == pytest.approx(98.95e-6, rel=1e-3)
    quad = purcell_t1_estimate(TWO_PI * 38e6, 2 * TWO_PI * 378e6, 1.0 / 1.0e-6)
    assert quad / t == pytest.approx(4.0, rel=1e-12)
    with pytest.raises(ValueError, match="unbounded"):
        purcell_t1_estimate(TWO_PI * 38e6, TWO_PI * 378e6, 0.0)
    with pytest.warns(UserWarning, match="Purcell"):
        purcell_t1_estimate(TWO_PI * 100e6, TWO_PI * 200e6, 1e6)


def test_combine_t1_budget():
    assert combine_t1_budget([100e-6]) == 100e-6
    assert combine_t1_budget([100e-6, 100e-6]) == pytest.approx(50e-6, rel=1e-12)
    # storage-mode channels quoted at 100 us and 40 us combine to 28.6 us,
    # bracketing the measured 34.3 us from below
    assert combine_t1_budget([100e-6, 40e-6]) == pytest.approx(28.571e-6, rel=1e-3)
    with pytest.raises(ValueError):
        combine_t1_budget([])
    with pytest.raises(ValueError):
        combine_t1_budget([1e-6, -1e-6])


def test_seam_spec_validation():
    with pytest.raises(ValueError):
        SeamSpec("bad", {"q": 1.0}, 0.0)
    with pytest.raises(ValueError):
        SeamSpec("bad", {"q": -1.0}, 1e5)


def test_budget_report_totals_and_purcell():
    seams = [
        SeamSpec("in_in", {"qubit": 0.0239, "storage": 15.96}, 1e8),
        SeamSpec("al_au_in", {"qubit": 0.524, "storage": 0.172}, 4.2e5),
        SeamSpec("candidate", {"qubit": 7.955, "storage": 0.0114}, 4.2e5),
    ]
    omegas = {"qubit": TWO_PI * 7.3e9, "storage": TWO_PI * 9.25e9}
    purcell = {"g": TWO_PI * 38e6, "delta": TWO_PI * 378e6, "kappa": 1e6}
    report = budget_report(seams, omegas, installed=("in_in", "al_au_in"), purcell=purcell)

    by_label = {e["label"]: e for e in report["seams"]}
    assert not by_label["candidate"]["installed"]
    expected_storage = combine_t1_budget(
        [
            t1_limit_from_seam(15.96, 1e8, omegas["storage"]),
            t1_limit_from_seam(0.172, 4.2e5, omegas["storage"]),
        ]
    )
    assert report["combined_t1_s"]["storage"] == pytest.approx(expected_storage, rel=1e-12)
    assert report["purcell"]["t1_s"] == pytest.approx(98.95e-6, rel=1e-3)


def test_budget_report_unknown_mode():
    with pytest.raises(KeyError):
        budget_report([SeamSpec("s", {"ghost": 1.0}, 1e5)], {"qubit": 1e10})


def test_budget_single_seam_equals_own_limit():
    seams = [SeamSpec("only", {"storage": 15.96}, 1e8)]
    omegas = {"storage": TWO_PI * 9.25e9}
    report = budget_report(seams, omegas)
    assert report["combined_t1_s"]["storage"] == pytest.approx(
        t1_limit_from_seam(15.96, 1e8, omegas["storage"]), rel=1e-12
    )
