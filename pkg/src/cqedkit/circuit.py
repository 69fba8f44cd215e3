"""Lumped-element coupling model, transmon diagonalization, and the dispersive
multimode Hamiltonian.

The coupling chain is the textbook capacitive-divider picture: a qubit island
couples to a cavity's zero-point voltage V0 = sqrt(hbar*omega/2C) through the
division ratio beta = C_g/(C_g + C_p + C_j), giving g = e*V0*beta/hbar.

Sign convention: cross-Kerr rates chi are stored signed (negative for this
device family). The Hamiltonian carries an explicit minus sign on the chi
term, so a negative stored chi shifts |e,n> up by |chi|*n; observable peak
splittings always use |chi|.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .quantum import ModeSpace, Operator

__all__ = [
    "ConvergenceError",
    "CapacitanceNetwork",
    "TransmonParams",
    "ModeSpec",
    "DispersiveSystem",
    "beta",
    "zero_point_voltage",
    "coupling_g",
    "ej_from_lj",
    "transmon_spectrum",
    "transmon_f01_alpha",
    "charge_dispersion",
    "g_from_chi",
    "chi_from_g",
    "cavity_self_kerr",
    "build_hamiltonian",
    "dephasing_time_from_t1_t2",
]

_E = constants.e
_HBAR = constants.hbar
_H = constants.h


class ConvergenceError(RuntimeError):
    """Charge-basis diagonalization did not converge within the cutoff budget."""


@dataclass(frozen=True)
class CapacitanceNetwork:
    """Lumped capacitances and inductances of the qubit-cavity circuit.

    c_gap   : island to opposite cavity wall (F)
    c_annulus: island to surrounding lower wall, across the open annulus (F)
    c_junction: junction self-capacitance (F)
    c_cavity, l_cavity: LC equivalent of the cavity mode (F, H)
    l_junction: junction inductance (H)

    c_annulus and c_junction may be zero (degenerate divider); the rest must
    be strictly positive so the cavity frequency 1/sqrt(LC) stays finite.
    """

    c_gap: float
    c_annulus: float
    c_junction: float
    c_cavity: float
    l_cavity: float
    l_junction: float

    def __post_init__(self):
        for name in ("c_gap", "c_cavity", "l_cavity", "l_junction"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("c_annulus", "c_junction"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def cavity_omega(self) -> float:
        """Cavity mode angular frequency 1/sqrt(LC) in rad/s."""
        return 1.0 / math.sqrt(self.l_cavity * self.c_cavity)


def beta(net: CapacitanceNetwork) -> float:
    """Capacitance division ratio C_g / (C_g + C_p + C_j), in (0, 1]."""
    return net.c_gap / (net.c_gap + net.c_annulus + net.c_junction)


def zero_point_voltage(net: CapacitanceNetwork) -> float:
    """Zero-point voltage V0 = sqrt(hbar*omega/2C) of the cavity mode, volts."""
    return math.sqrt(_HBAR * net.cavity_omega / (2.0 * net.c_cavity))


def coupling_g(net: CapacitanceNetwork) -> float:
    """Qubit-cavity coupling rate g = e*V0*beta/hbar in rad/s."""
    return _E * zero_point_voltage(net) * beta(net) / _HBAR


def ej_from_lj(l_junction: float) -> float:
    """Josephson energy E_J/h in Hz from the junction inductance.

    E_J/h = (Phi0/2pi)^2 / (L_j h) with Phi0 = h/2e.
    """
    if l_junction <= 0:
        raise ValueError("junction inductance must be > 0")
    phi0_reduced = _HBAR / (2.0 * _E)
    return phi0_reduced**2 / (l_junction * _H)


@dataclass(frozen=True)
class TransmonParams:
    """Cooper-pair-box parameters; energies are E/h in Hz.

    charge_cutoff is the half-width N of the charge basis n = -N..N. When
    None, a cutoff of ceil(sqrt(E_J/E_C)) + 20 is used and auto-extended
    until the qubit frequency is converged.
    """

    e_j: float
    e_c: float
    n_g: float = 0.0
    charge_cutoff: int | None = None

    def __post_init__(self):
        if self.e_j <= 0 or self.e_c <= 0:
            raise ValueError("E_J and E_C must be > 0")
        if self.charge_cutoff is not None and self.charge_cutoff < 10:
            raise ValueError("charge_cutoff must be >= 10")

    @property
    def ej_over_ec(self) -> float:
        return self.e_j / self.e_c

    @property
    def in_transmon_regime(self) -> bool:
        return self.ej_over_ec > 50.0

    def _default_cutoff(self) -> int:
        return max(10, math.ceil(math.sqrt(self.ej_over_ec)) + 20)


def _charge_basis_levels(p: TransmonParams, cutoff: int, n_levels: int) -> np.ndarray:
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    h = np.diag(4.0 * p.e_c * (n - p.n_g) ** 2)
    off = -0.5 * p.e_j * np.ones(2 * cutoff)
    h += np.diag(off, 1) + np.diag(off, -1)
    ev = np.linalg.eigvalsh(h)
    return ev[:n_levels] - ev[0]


def transmon_spectrum(p: TransmonParams, n_levels: int = 6) -> np.ndarray:
    """Lowest eigenfrequencies (Hz, ground level at 0) of the charge-basis
    Hamiltonian 4E_C(n - n_g)^2 - E_J/2 (|n><n+1| + h.c.).

    The charge cutoff is auto-extended until enlarging it by 5 moves the 0-1
    transition by less than 1 Hz.
    """
    n_levels = max(5, int(n_levels))
    cutoff = p.charge_cutoff or p._default_cutoff()
    levels = _charge_basis_levels(p, cutoff, n_levels)
    for _ in range(40):
        wider = _charge_basis_levels(p, cutoff + 5, n_levels)
        if abs(wider[1] - levels[1]) < 1.0:
            return wider
        cutoff += 5
        levels = wider
    raise ConvergenceError(
        f"qubit frequency not converged at charge_cutoff = {cutoff}; "
        "E_J/E_C may be too small for the charge basis"
    )


def transmon_f01_alpha(p: TransmonParams) -> tuple[float, float]:
    """Qubit frequency f01 and anharmonicity f12 - f01, both in Hz."""
    lv = transmon_spectrum(p, n_levels=5)
    return float(lv[1]), float(lv[2] - 2.0 * lv[1])


def charge_dispersion(p: TransmonParams) -> float:
    """Relative swing of f01 between offset charges n_g = 0 and 1/2."""
    sweet = transmon_spectrum(TransmonParams(p.e_j, p.e_c, 0.0, p.charge_cutoff))
    worst = transmon_spectrum(TransmonParams(p.e_j, p.e_c, 0.5, p.charge_cutoff))
    return float(abs(worst[1] - sweet[1]) / sweet[1])


def g_from_chi(chi: float, delta: float) -> float:
    """Coupling g = sqrt(|chi * delta|) from the two-level dispersive relation.

    chi and delta in rad/s; returns rad/s.
    """
    if delta == 0:
        raise ValueError("detuning must be nonzero")
    return math.sqrt(abs(chi * delta))


def chi_from_g(g: float, delta: float) -> float:
    """Dispersive shift from coupling and detuning, two-level relation.

    Returns -g^2/|delta|: the stored-sign convention is negative, which makes
    chi_from_g(g_from_chi(chi, delta), delta) == chi for device-signed chi
    with either detuning sign. Warns outside the dispersive regime.
    """
    if delta == 0:
        raise ValueError("detuning must be nonzero")
    if abs(g / delta) > 0.1:
        warnings.warn(
            f"|g/delta| = {abs(g / delta):.3f} > 0.1: dispersive relation unreliable",
            stacklevel=2,
        )
    return -(g**2) / abs(delta)


def cavity_self_kerr(chi_q: float, alpha_q: float) -> float:
    """Cavity self-Kerr chi_q^2 / (4 alpha_q), carrying the sign of alpha_q."""
    if alpha_q == 0:
        raise ValueError("qubit anharmonicity must be nonzero")
    return chi_q**2 / (4.0 * alpha_q)


def dephasing_time_from_t1_t2(t1: float, t2: float) -> float | None:
    """Pure-dephasing time from 1/T2 = 1/(2 T1) + 1/Tphi.

    Returns None when T2 = 2 T1 (no pure dephasing); rejects T2 > 2 T1.
    """
    if t1 <= 0 or t2 <= 0:
        raise ValueError("T1 and T2 must be > 0")
    if t2 > 2.0 * t1 * (1.0 + 1e-12):
        raise ValueError(f"T2 = {t2} exceeds 2*T1 = {2 * t1}")
    rate = 1.0 / t2 - 1.0 / (2.0 * t1)
    if rate <= 0:
        return None
    return 1.0 / rate


@dataclass(frozen=True)
class ModeSpec:
    """One mode of the dispersive model.

    omega and alpha are angular (rad/s); t1/t2 in seconds (None = lossless);
    n_thermal is the bath occupation; dim the simulation truncation.
    """

    label: str
    omega: float
    alpha: float = 0.0
    t1: float | None = None
    t2: float | None = None
    n_thermal: float = 0.0
    dim: int = 2

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"mode {self.label!r}: dim must be >= 2")
        if self.t1 is not None and self.t1 <= 0:
            raise ValueError(f"mode {self.label!r}: T1 must be > 0")
        if self.t2 is not None and self.t2 <= 0:
            raise ValueError(f"mode {self.label!r}: T2 must be > 0")
        if self.t1 is not None and self.t2 is not None:
            if self.t2 > 2.0 * self.t1 * (1.0 + 1e-12):
                raise ValueError(
                    f"mode {self.label!r}: T2 = {self.t2} exceeds 2*T1 = {2 * self.t1}"
                )
        if self.n_thermal < 0:
            raise ValueError(f"mode {self.label!r}: n_thermal must be >= 0")

    def with_t2(self, t2: float) -> "ModeSpec":
        return ModeSpec(
            self.label, self.omega, self.alpha, self.t1, t2, self.n_thermal, self.dim
        )


@dataclass(frozen=True, eq=False)
class DispersiveSystem:
    """Mode list plus the symmetric cross-Kerr matrix chi (rad/s, zero diagonal)."""

    modes: tuple[ModeSpec, ...]
    chi: np.ndarray = field(default=None)

    def __post_init__(self):
        modes = tuple(self.modes)
        object.__setattr__(self, "modes", modes)
        m = len(modes)
        if m == 0:
            raise ValueError("at least one mode required")
        labels = [s.label for s in modes]
        if len(set(labels)) != m:
            raise ValueError(f"duplicate mode labels: {labels}")
        chi = self.chi if self.chi is not None else np.zeros((m, m))
        chi = np.array(chi, dtype=float)
        if chi.shape != (m, m):
            raise ValueError(f"chi must be {m}x{m}, got {chi.shape}")
        if np.any(np.diag(chi) != 0.0):
            raise ValueError("chi diagonal must be zero")
        if not np.array_equal(chi, chi.T):
            raise ValueError("chi must be symmetric")
        chi.setflags(write=False)
        object.__setattr__(self, "chi", chi)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.modes)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no mode labeled {label!r} in {self.labels}") from None

    def mode(self, label: str) -> ModeSpec:
        return self.modes[self.index(label)]

    def chi_between(self, label_a: str, label_b: str) -> float:
        return float(self.chi[self.index(label_a), self.index(label_b)])

    def space(self) -> ModeSpace:
        return ModeSpace(tuple(s.dim for s in self.modes), self.labels)

    def subsystem(self, labels: tuple[str, ...] | list[str]) -> "DispersiveSystem":
        idx = [self.index(lb) for lb in labels]
        sub_modes = tuple(self.modes[i] for i in idx)
        sub_chi = self.chi[np.ix_(idx, idx)]
        return DispersiveSystem(sub_modes, sub_chi)

    def replace_mode(self, spec: ModeSpec) -> "DispersiveSystem":
        modes = tuple(spec if s.label == spec.label else s for s in self.modes)
        return DispersiveSystem(modes, self.chi)


def build_hamiltonian(
    sys: DispersiveSystem, frame_offsets=None
) -> Operator:
    """Dispersive Hamiltonian (units of rad/s, Fock-diagonal):

    H/hbar = sum_i (omega_i - frame_i) n_i - sum_{i<j} chi_ij n_i n_j
             - sum_i (alpha_i/2) n_i (n_i - 1)

    The cross-Kerr sum runs over unordered pairs, so the qubit shift per
    photon in a partner mode is chi_ij itself. frame_offsets (rad/s per mode)
    subtracts rotating-frame frequencies; None means the lab frame.
    """
    space = sys.space()
    m = len(sys.modes)
    if frame_offsets is None:
        frames = np.zeros(m)
    else:
        frames = np.asarray(frame_offsets, dtype=float)
        if frames.shape != (m,):
            raise ValueError(f"need one frame offset per mode ({m})")
    if space.size > 100_000:
        raise ValueError(f"Hilbert space of size {space.size} exceeds memory budget")

    grids = np.meshgrid(
        *[np.arange(d, dtype=float) for d in space.dims], indexing="ij"
    )
    diag = np.zeros(space.dims, dtype=float)
    for i, spec in enumerate(sys.modes):
        n_i = grids[i]
        diag += (spec.omega - frames[i]) * n_i
        diag -= 0.5 * spec.alpha * n_i * (n_i - 1.0)
        for j in range(i + 1, m):
            diag -= sys.chi[i, j] * n_i * grids[j]
    return Operator(space, np.diag(diag.ravel()), hermitian=True)
