"""Closed-form electrode outlines and dipole-moment limits.

The electrode shapes are parametric curves chosen for easy geometric
parameterization: the aperture cut from the outer conductor is a cardioid and
the inner island a piriform. The dipole helpers are the two analytic limits of
an annular opening in a conducting plane: an infinitely thin annulus at
voltage V0, and a plain circular aperture in an incident field. The smooth
crossover between the limits has no closed form and is deliberately not
modeled here.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants

__all__ = [
    "PlanarCurve",
    "cardioid_outline",
    "piriform_island",
    "thin_annulus_dipole",
    "aperture_dipole",
    "dipole_radiated_power",
    "write_curve_csv",
]

_EPS0 = constants.epsilon_0


@dataclass(frozen=True, eq=False)
class PlanarCurve:
    """Ordered (x, y) samples in meters; closed curves repeat the first point."""

    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 16:
            raise ValueError("need at least 16 (x, y) points")
        if self.closed and not np.allclose(pts[0], pts[-1], atol=1e-12, rtol=0.0):
            raise ValueError("closed curve must end where it starts (within 1e-12 m)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]


def _sampled_curve(fx, fy, n_points: int) -> PlanarCurve:
    if n_points < 16:
        raise ValueError("n_points must be >= 16")
    t = np.linspace(0.0, 2.0 * np.pi, int(n_points), endpoint=False)
    pts = np.column_stack([fx(t), fy(t)])
    pts = np.vstack([pts, pts[:1]])
    return PlanarCurve(pts, closed=True)


def cardioid_outline(r: float, n_points: int = 256) -> PlanarCurve:
    """Cardioid aperture outline, scale r:

    x = r/2 (2 cos t - cos 2t + 1/2),  y = r/2 (2 sin t - sin 2t)
    """
    if r <= 0:
        raise ValueError("r must be > 0")
    return _sampled_curve(
        lambda t: 0.5 * r * (2.0 * np.cos(t) - np.cos(2.0 * t) + 0.5),
        lambda t: 0.5 * r * (2.0 * np.sin(t) - np.sin(2.0 * t)),
        n_points,
    )


def piriform_island(b: float, n_points: int = 256) -> PlanarCurve:
    """Piriform island outline, scale b:

    x = b (1/2 - 2 sin t),  y = b cos t (1 + sin t)
    """
    if b <= 0:
        raise ValueError("b must be > 0")
    return _sampled_curve(
        lambda t: b * (0.5 - 2.0 * np.sin(t)),
        lambda t: b * np.cos(t) * (1.0 + np.sin(t)),
        n_points,
    )


def thin_annulus_dipole(r: float, v0: float) -> float:
    """|p| = (4 pi eps0 / 3) V0 r^2 for an infinitely thin annulus at V0.

    r in meters, v0 in volts; returns C*m (one of the two opposing dipoles).
    """
    if r <= 0:
        raise ValueError("r must be > 0")
    return (4.0 * np.pi * _EPS0 / 3.0) * v0 * r**2


def aperture_dipole(
    r_o: float, e0: float, epsilon: float = _EPS0, wavelength: float | None = None
) -> float:
    """|p| = (2/3) eps r_o^3 E0 for a circular aperture in an incident field.

    Valid for apertures small against the wavelength; warns when a wavelength
    is supplied and r_o >= wavelength.
    """
    if r_o <= 0:
        raise ValueError("r_o must be > 0")
    if wavelength is not None and r_o >= wavelength:
        warnings.warn(
            f"aperture radius {r_o} m is not small against wavelength {wavelength} m; "
            "dipole approximation unreliable",
            stacklevel=2,
        )
    return (2.0 / 3.0) * epsilon * r_o**3 * e0


def dipole_radiated_power(p: float, omega: float) -> float:
    """Average power radiated into half-space by an oscillating dipole:

    P = (1/2) (1/4 pi eps0) |p|^2 omega^4 / (3 c^3)
    """
    if p < 0:
        raise ValueError("dipole magnitude must be >= 0")
    if omega <= 0:
        raise ValueError("omega must be > 0")
    return 0.5 / (4.0 * np.pi * _EPS0) * p**2 * omega**4 / (3.0 * constants.c**3)


def write_curve_csv(curve: PlanarCurve, path) -> None:
    """Write a curve as two-column CSV (x, y in SI meters)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for px, py in curve.points:
            writer.writerow([repr(float(px)), repr(float(py))])
