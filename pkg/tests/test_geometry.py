"""Electrode outline curves and dipole limits."""

import math

import numpy as np
import pytest
from matplotlib.path import Path
from scipy import constants

from cqedkit.geometry import (
    PlanarCurve,
    aperture_dipole,
    cardioid_outline,
    dipole_radiated_power,
    piriform_island,
    thin_annulus_dipole,
    write_curve_csv,
)


def shoelace_area(curve: PlanarCurve) -> float:
    x, y = curve.x, curve.y
    return 0.5 * abs(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def test_cardioid_anchor_points():
    r = 750e-6
    c = cardioid_outline(r, n_points=256)
    np.testing.assert_allclose(c.points[0], [0.75 * r, 0.0], atol=1e-18)
    np.testing.assert_allclose(c.points[128], [-1.25 * r, 0.0], atol=1e-18)


def test_cardioid_mirror_symmetry():
    c = cardioid_outline(1.0, n_points=200)
    pts = c.points[:-1]
    mirrored = pts.copy()
    mirrored[:, 1] *= -1.0
    # t -> 2pi - t reverses the sample order
    np.testing.assert_allclose(mirrored[1:], pts[1:][::-1], atol=1e-12)


def test_piriform_anchor_points():
    b = 100e-6
    p = piriform_island(b, n_points=256)
    np.testing.assert_allclose(p.points[0], [0.5 * b, b], atol=1e-18)
    np.testing.assert_allclose(p.points[64], [-1.5 * b, 0.0], atol=1e-18)


def test_device_island_inside_aperture():
    outer = cardioid_outline(750e-6, n_points=720)
    island = piriform_island(100e-6, n_points=720)
    aperture = Path(outer.points)
    assert aperture.contains_points(island.points).all()


def test_curve_validation():
    with pytest.raises(ValueError):
        cardioid_outline(1.0, n_points=8)
    with pytest.raises(ValueError):
        cardioid_outline(-1.0)
    with pytest.raises(ValueError):
        piriform_island(0.0)
    pts = np.column_stack([np.linspace(0, 1, 20), np.zeros(20)])
    PlanarCurve(pts, closed=False)  # open curve is allowed
    with pytest.raises(ValueError, match="closed"):
        PlanarCurve(pts, closed=True)


def test_curve_area_scaling():
    a1 = shoelace_area(cardioid_outline(1.0, 4096))
    a3 = shoelace_area(cardioid_outline(3.0, 4096))
    assert a1 > 0
    assert a3 / a1 == pytest.approx(9.0, rel=1e-9)
    b1 = shoelace_area(piriform_island(1.0, 4096))
    b2 = shoelace_area(piriform_island(2.0, 4096))
    assert b1 > 0
    assert b2 / b1 == pytest.approx(4.0, rel=1e-9)


def test_thin_annulus_dipole():
    assert thin_annulus_dipole(1.0, 0.0) == 0.0
    expected = 4.0 * math.pi * constants.epsilon_0 / 3.0
    assert thin_annulus_dipole(1.0, 1.0) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(3.70883e-11, rel=1e-4)
    assert thin_annulus_dipole(2.0, 1.0) / thin_annulus_dipole(1.0, 1.0) == pytest.approx(4.0)


def test_aperture_dipole():
    assert aperture_dipole(1e-3, 0.0) == 0.0
    assert aperture_dipole(2e-3, 1.0) / aperture_dipole(1e-3, 1.0) == pytest.approx(8.0)
    # (2/3) eps0 (1 mm)^3 * 1 V/m
    expected = (2.0 / 3.0) * constants.epsilon_0 * 1e-9
    assert aperture_dipole(1e-3, 1.0) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(5.9028e-21, rel=1e-4)


def test_aperture_wavelength_warning():
    with pytest.warns(UserWarning, match="wavelength"):
        aperture_dipole(5e-2, 1.0, wavelength=3e-2)
    aperture_dipole(1e-3, 1.0, wavelength=3e-2)  # small aperture: silent


def test_dipole_radiated_power():
    assert dipole_radiated_power(0.0, 1e10) == 0.0
    w = 2.0 * math.pi * 9.25e9
    assert dipole_radiated_power(1.0, 2 * w) / dipole_radiated_power(1.0, w) == pytest.approx(16.0)
    # half-space radiation of p = 1e-20 C m at 9.25 GHz
    assert dipole_radiated_power(1e-20, w) == pytest.approx(6.3433e-14, rel=1e-4)


def test_dipole_homogeneity_random_inputs():
    rng = np.random.default_rng(17)
    for _ in range(8):
        r, v, c = rng.uniform(0.1, 3.0, 3)
        assert thin_annulus_dipole(c * r, v) == pytest.approx(
            c**2 * thin_annulus_dipole(r, v), rel=1e-12
        )
        assert aperture_dipole(c * r, v) == pytest.approx(
            c**3 * aperture_dipole(r, v), rel=1e-12
        )
        p, w = rng.uniform(0.1, 2.0, 2)
        assert dipole_radiated_power(c * p, w) == pytest.approx(
            c**2 * dipole_radiated_power(p, w), rel=1e-12
        )


def test_curve_csv_export(tmp_path):
    c = piriform_island(100e-6, n_points=64)
    path = tmp_path / "island.csv"
    write_curve_csv(c, path)
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    np.testing.assert_allclose(data, c.points, atol=0)
