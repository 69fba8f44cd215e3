"""Seam-loss model and coherence budgets.

A bonded joint is characterized by a conductance per unit length g_seam
(materials quality) and, per cavity mode, an admittance per unit length
y_seam (how much perpendicular surface current the mode pushes across the
joint). The mode quality factor limited by the seam is Q = g_seam / y_seam
and the lifetime limit T1 = g_seam / (y_seam * omega).

For an ideal rectangular cavity the TE101-mode admittance of the full
lid-perimeter seam has the closed form

    y = 4 (a^3 + d^3) / (omega * mu0 * a * b * d * (a^2 + d^2))

derived by integrating |J_s x l_hat|^2 along the perimeter against the mode's
magnetic energy; `te101_seam_admittance_quadrature` evaluates the same field
integrals numerically as an independent check. Peak field amplitudes are used
in both numerator and denominator so the 1/2 time-average factors cancel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import constants

from . import fits

__all__ = [
    "SeamSpec",
    "RectangularCavity",
    "QMeasurementSet",
    "q_from_seam",
    "t1_limit_from_seam",
    "te101_seam_admittance",
    "te101_seam_admittance_quadrature",
    "fit_seam_conductance",
    "purcell_t1_estimate",
    "combine_t1_budget",
    "budget_report",
    "write_budget_json",
]

_MU0 = constants.mu_0
_C = constants.c


@dataclass(frozen=True)
class SeamSpec:
    """One seam: per-mode admittance map and conductance, both per (Ohm*m)."""

    label: str
    y_seam: Mapping[str, float]
    g_seam: float

    def __post_init__(self):
        object.__setattr__(self, "y_seam", dict(self.y_seam))
        if self.g_seam <= 0:
            raise ValueError(f"seam {self.label!r}: conductance must be > 0")
        for mode, y in self.y_seam.items():
            if y < 0:
                raise ValueError(f"seam {self.label!r}: admittance for {mode!r} < 0")


@dataclass(frozen=True)
class RectangularCavity:
    """Rectangular cavity: a, d lateral extents and b height, meters."""

    a: float
    d: float
    b: float

    def __post_init__(self):
        if min(self.a, self.d, self.b) <= 0:
            raise ValueError("all cavity dimensions must be > 0")

    @property
    def te101_frequency(self) -> float:
        """Fundamental TE101 resonance (c/2) sqrt(1/a^2 + 1/d^2), Hz."""
        return 0.5 * _C * math.sqrt(1.0 / self.a**2 + 1.0 / self.d**2)


@dataclass(frozen=True)
class QMeasurementSet:
    """(y_seam, Q_internal) samples from seam-dominated resonators."""

    samples: tuple[tuple[float, float], ...]

    def __post_init__(self):
        samples = tuple((float(y), float(q)) for y, q in self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) < 2:
            raise ValueError("need at least 2 (y, Q) samples to fit")
        if any(y <= 0 or q <= 0 for y, q in samples):
            raise ValueError("all y and Q values must be positive")

    @property
    def y(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def q(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])


def q_from_seam(y: float, g: float) -> float:
    """Quality factor Q = g_seam / y_seam."""
    if g <= 0:
        raise ValueError("conductance must be > 0")
    if y == 0:
        raise ValueError("zero admittance: Q is unbounded")
    if y < 0:
        raise ValueError("admittance must be >= 0")
    return g / y


def t1_limit_from_seam(y: float, g: float, omega: float) -> float:
    """Lifetime limit T1 = g_seam / (y_seam * omega), seconds."""
    if omega <= 0:
        raise ValueError("omega must be > 0")
    return q_from_seam(y, g) / omega


def te101_seam_admittance(cav: RectangularCavity, frequency: float | None = None) -> float:
    """Closed-form TE101 admittance per unit length of the lid-perimeter seam.

    frequency in Hz; defaults to the cavity's own TE101 resonance. The seam
    path is fixed at the lid-sidewall junction (the chip-bond plane).
    """
    f = cav.te101_frequency if frequency is None else float(frequency)
    if f <= 0:
        raise ValueError("frequency must be > 0")
    omega = 2.0 * math.pi * f
    a, d, b = cav.a, cav.d, cav.b
    return 4.0 * (a**3 + d**3) / (omega * _MU0 * a * b * d * (a**2 + d**2))


def te101_seam_admittance_quadrature(
    cav: RectangularCavity, frequency: float | None = None, order: int = 96
) -> float:
    """Numerical evaluation of the seam/volume field integrals behind
    `te101_seam_admittance` (Gauss-Legendre quadrature); validation path.

    Fields of the TE101 mode with unit peak E_y:
        H_x = (pi / (omega mu0 d)) sin(pi x/a) cos(pi z/d)
        H_z = (pi / (omega mu0 a)) cos(pi x/a) sin(pi z/d)
    The lid-perimeter seam sees the vertical sidewall currents |J_perp| =
    |H_tangential| on each wall.
    """
    f = cav.te101_frequency if frequency is None else float(frequency)
    omega = 2.0 * math.pi * f
    a, d, b = cav.a, cav.d, cav.b
    kx = math.pi / (omega * _MU0 * d)  # amplitude of H_x
    kz = math.pi / (omega * _MU0 * a)  # amplitude of H_z

    xg, xw = np.polynomial.legendre.leggauss(order)
    sx = 0.5 * a * (xg + 1.0)
    wx = 0.5 * a * xw
    sz = 0.5 * d * (xg + 1.0)
    wz = 0.5 * d * xw

    h_x = lambda x, z: kx * np.sin(np.pi * x / a) * np.cos(np.pi * z / d)
    h_z = lambda x, z: kz * np.cos(np.pi * x / a) * np.sin(np.pi * z / d)

    # perimeter integral of |J_s x l_hat|^2: two x-walls and two z-walls
    seam = (
        np.sum(wz * h_z(0.0, sz) ** 2)
        + np.sum(wz * h_z(a, sz) ** 2)
        + np.sum(wx * h_x(sx, 0.0) ** 2)
        + np.sum(wx * h_x(sx, d) ** 2)
    )
    # volume integral of |H|^2 (fields independent of height: factor b)
    xx, zz = np.meshgrid(sx, sz, indexing="ij")
    ww = np.outer(wx, wz)
    volume = b * np.sum(ww * (h_x(xx, zz) ** 2 + h_z(xx, zz) ** 2))
    return float(seam / (omega * _MU0 * volume))


def fit_seam_conductance(data: QMeasurementSet) -> tuple[float, tuple[float, float]]:
    """Extract g_seam from (y, Q) data by the unit-slope log-log regression
    of Q = g_seam / y.

    Returns (g_seam, (low, high)) with a one-standard-error interval from the
    residual variance in the log domain. A free-slope fit is available as a
    diagnostic through `fits.fit_loglog_intercept`.
    """
    result = fits.fit_loglog_intercept(data)
    g = result.params["g_seam"]
    return g, (result.params["g_low"], result.params["g_high"])


def purcell_t1_estimate(g: float, delta: float, kappa: float) -> float:
    """Single-mode Purcell limit T1 = (delta/g)^2 / kappa.

    g, delta in rad/s; kappa in 1/s. Warns when the detuning is not large
    against the coupling.
    """
    if kappa == 0:
        raise ValueError("kappa = 0: Purcell lifetime is unbounded")
    if kappa < 0:
        raise ValueError("kappa must be > 0")
    if g == 0:
        raise ValueError("g = 0: Purcell lifetime is unbounded")
    if abs(delta) < 5.0 * abs(g):
        import warnings

        warnings.warn(
            f"|delta/g| = {abs(delta / g):.2f} < 5: Purcell estimate unreliable",
            stacklevel=2,
        )
    return (delta / g) ** 2 / kappa


def combine_t1_budget(limits) -> float:
    """Total lifetime of parallel loss channels: 1/T = sum 1/T_i."""
    limits = list(limits)
    if not limits:
        raise ValueError("no lifetime limits to combine")
    if any(t <= 0 for t in limits):
        raise ValueError("all lifetime limits must be > 0")
    return 1.0 / sum(1.0 / t for t in limits)


def budget_report(
    seams,
    mode_omegas: Mapping[str, float],
    installed=None,
    purcell: Mapping[str, float] | None = None,
) -> dict:
    """Assemble the loss budget: per-seam Q and T1 limits per mode, plus
    combined totals over the installed seams.

    mode_omegas maps mode label -> angular frequency (rad/s). `installed`
    optionally restricts which seam labels enter the combined totals (default:
    all). `purcell`, when given, carries {"g", "delta", "kappa"} (rad/s,
    rad/s, 1/s) and adds the readout Purcell estimate for the qubit.
    """
    seams = list(seams)
    installed_set = (
        {s.label for s in seams} if installed is None else set(installed)
    )
    report: dict = {"modes": {}, "seams": [], "combined_t1_s": {}}
    for label, omega in mode_omegas.items():
        report["modes"][label] = {"omega_rad_s": omega, "frequency_hz": omega / (2.0 * math.pi)}

    for seam in seams:
        entry = {
            "label": seam.label,
            "installed": seam.label in installed_set,
            "g_seam_per_ohm_m": seam.g_seam,
            "y_seam_per_ohm_m": {},
            "q_limit": {},
            "t1_limit_s": {},
        }
        for mode, y in seam.y_seam.items():
            if mode not in mode_omegas:
                raise KeyError(f"seam {seam.label!r} references unknown mode {mode!r}")
            entry["y_seam_per_ohm_m"][mode] = y
            if y > 0:
                entry["q_limit"][mode] = q_from_seam(y, seam.g_seam)
                entry["t1_limit_s"][mode] = t1_limit_from_seam(
                    y, seam.g_seam, mode_omegas[mode]
                )
        report["seams"].append(entry)

    for mode in mode_omegas:
        limits = [
            e["t1_limit_s"][mode]
            for e in report["seams"]
            if e["installed"] and mode in e["t1_limit_s"]
        ]
        if limits:
            report["combined_t1_s"][mode] = combine_t1_budget(limits)

    if purcell is not None:
        report["purcell"] = {
            "g_rad_s": purcell["g"],
            "delta_rad_s": purcell["delta"],
            "kappa_per_s": purcell["kappa"],
            "t1_s": purcell_t1_estimate(
                purcell["g"], purcell["delta"], purcell["kappa"]
            ),
        }
    return report


def write_budget_json(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
