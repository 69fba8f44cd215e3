"""Acceptance criteria for the toolkit, runnable as a suite.

Each criterion is a function returning per-check results; `run_all` prints
one pass/fail line per criterion. The same registry backs the `verify` CLI
verb and the pytest acceptance module, so there is a single source of truth
for the published numbers being reproduced and their tolerances.

Two checks are expected to fail and are retained deliberately (honest reds):

* seam-table-lifetimes, entry "circle r=1.75 mm" storage column: the printed
  57 us is not reproducible from the row's own admittance at the storage
  frequency (g/(y*omega) = 44.9 us); 57 us is exactly what the qubit
  frequency yields, so the printed entry mixes up the two mode frequencies.
* transmon-spectrum, anharmonicity tolerance: full charge-basis
  diagonalization at E_J/h = 39 GHz, E_C = 204 MHz gives alpha = -217.3 MHz,
  6.5% from the designed -204 MHz; the leading-order alpha = -E_C identity is
  only good to ~0.9/sqrt(E_J/E_C) and cannot meet 5% at this E_J/E_C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fits
from .circuit import (
    DispersiveSystem,
    ModeSpec,
    TransmonParams,
    build_hamiltonian,
    g_from_chi,
    transmon_f01_alpha,
    transmon_spectrum,
)
from .protocols import (
    add_noise,
    sim_cavity_decay,
    sim_number_splitting,
    sim_ramsey,
    sim_revival,
    sim_stark_slopes,
    sim_t1,
    q_from_lifetime,
)
from .quantum import ModeSpace
from .seams import (
    QMeasurementSet,
    RectangularCavity,
    fit_seam_conductance,
    t1_limit_from_seam,
    te101_seam_admittance,
    te101_seam_admittance_quadrature,
)

__all__ = ["CheckResult", "CriterionResult", "CRITERIA", "TABLE_S1", "run_all"]

_SEED = 20260811
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CheckResult:
    label: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        n_ok = sum(c.passed for c in self.checks)
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{status}] {self.title} ({n_ok}/{len(self.checks)} checks)"


def _check(label, passed, detail) -> CheckResult:
    return CheckResult(label, bool(passed), detail)


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


# --- criterion 1: dispersive chi <-> g conversion -------------------------

def crit_dispersive_conversion() -> list[CheckResult]:
    out = []
    cases = [
        ("storage", -1.17e6, -2.03e9, 48.7e6),
        ("readout", -3.84e6, 378e6, 38.1e6),
    ]
    for label, chi_hz, delta_hz, expected_hz in cases:
        g = g_from_chi(_TWO_PI * chi_hz, _TWO_PI * delta_hz) / _TWO_PI
        out.append(
            _check(
                f"g_from_chi ({label})",
                _rel(g, expected_hz) < 0.01,
                f"g/2pi = {g / 1e6:.3f} MHz vs {expected_hz / 1e6:.1f} MHz",
            )
        )
    return out


# --- criterion 2: seam-table lifetime arithmetic ---------------------------

# (label, y_qubit, y_storage, printed T1_q us, unit, printed T1_mu us, unit, g)
# Trailing zeros in the printed values are treated as placeholders, so the
# precision unit of "640" is 10 and of "91000" is 1000.
TABLE_S1 = (
    ("circle r=1.00 mm", 7.955, 0.0114, 1.1, 0.1, 640.0, 10.0, 4.2e5),
    ("circle r=1.25 mm", 1.565, 0.0467, 5.8, 0.1, 160.0, 10.0, 4.2e5),
    ("circle r=1.75 mm", 0.382, 0.161, 24.0, 1.0, 57.0, 1.0, 4.2e5),
    ("square 3x3 mm", 0.524, 0.172, 17.0, 1.0, 42.0, 1.0, 4.2e5),
    ("square 4x4 mm", 0.187, 0.398, 49.0, 1.0, 18.0, 1.0, 4.2e5),
    ("square 5x5 mm", 0.096, 0.756, 96.0, 1.0, 9.6, 0.1, 4.2e5),
    ("In/In perimeter", 0.0239, 15.96, 91000.0, 1000.0, 108.0, 1.0, 1.0e8),
)
_OMEGA_Q = _TWO_PI * 7.3e9
_OMEGA_MU = _TWO_PI * 9.25e9


def seam_table_entries():
    """(entry label, computed T1 us, printed T1 us, tolerance us) for all rows."""
    entries = []
    for label, y_q, y_mu, t_q, unit_q, t_mu, unit_mu, g in TABLE_S1:
        entries.append(
            (f"{label} / qubit", t1_limit_from_seam(y_q, g, _OMEGA_Q) * 1e6, t_q, unit_q)
        )
        entries.append(
            (f"{label} / storage", t1_limit_from_seam(y_mu, g, _OMEGA_MU) * 1e6, t_mu, unit_mu)
        )
    return entries


def crit_seam_table() -> list[CheckResult]:
    out = []
    for label, computed, printed, unit in seam_table_entries():
        out.append(
            _check(
                label,
                abs(computed - printed) <= unit,
                f"computed {computed:.2f} us vs printed {printed:g} us (±{unit:g})",
            )
        )
    return out


# --- criterion 3: Q-lifetime identity --------------------------------------

def crit_q_lifetime() -> list[CheckResult]:
    q = q_from_lifetime(_TWO_PI * 9.3772e9, 34.3e-6)
    return [
        _check(
            "storage quality factor",
            _rel(q, 2.02e6) < 1e-3 and _rel(q, 2.0e6) < 0.05,
            f"omega*T1 = {q:.4e} vs 2.02e6 (and within 5% of 2e6)",
        )
    ]


# --- criterion 4: revival timing -------------------------------------------

def _revival_system(dim=30) -> DispersiveSystem:
    modes = (
        ModeSpec("qubit", _TWO_PI * 7351.4e6, alpha=_TWO_PI * -209.8e6, dim=2),
        ModeSpec("storage", _TWO_PI * 9377.2e6, dim=dim),
    )
    chi = np.zeros((2, 2))
    chi[0, 1] = chi[1, 0] = _TWO_PI * -1.17e6
    return DispersiveSystem(modes, chi)


def crit_revival() -> list[CheckResult]:
    alpha = math.sqrt(3.0)
    step = 5e-9
    grid = np.arange(0.0, 2.6e-6 + step / 2, step)
    trace = sim_revival(_revival_system(), "qubit", "storage", alpha, grid)
    period = 1.0 / 1.17e6

    res = fits.fit_revival_period(trace)
    out = []
    peaks = res.params["peak_times"]
    out.append(
        _check(
            "revivals found",
            res.converged and len(peaks) >= 3,
            f"{len(peaks)} revival peaks, period {res.params['period'] * 1e6:.4f} us",
        )
    )
    for k, tp in enumerate(peaks, start=1):
        out.append(
            _check(
                f"revival {k} timing",
                abs(tp - k * period) <= step,
                f"peak at {tp * 1e6:.4f} us vs {k * period * 1e6:.4f} us (grid {step * 1e9:.0f} ns)",
            )
        )
    depth = float(np.min(trace.values))
    expected = math.exp(-2.0 * alpha**2)
    out.append(
        _check(
            "collapse depth",
            abs(depth - expected) < 1e-3,
            f"min contrast {depth:.6f} vs exp(-2|alpha|^2) = {expected:.6f}",
        )
    )
    return out


# --- criterion 5: number splitting ------------------------------------------

def _device_system() -> DispersiveSystem:
    modes = (
        ModeSpec("readout", _TWO_PI * 6973.4e6, alpha=_TWO_PI * -0.012e6, t1=1.0e-6, dim=2),
        ModeSpec(
            "qubit",
            _TWO_PI * 7351.4e6,
            alpha=_TWO_PI * -209.8e6,
            t1=6.4e-6,
            t2=9.5e-6,
            dim=2,
        ),
        ModeSpec("storage", _TWO_PI * 9377.2e6, alpha=_TWO_PI * -0.002e6, t1=34.3e-6, dim=30),
    )
    chi = np.zeros((3, 3))
    labels = ("readout", "qubit", "storage")
    pairs = {("qubit", "readout"): -3.84e6, ("qubit", "storage"): -1.17e6, ("readout", "storage"): -20e3}
    for (a, b), v in pairs.items():
        i, j = labels.index(a), labels.index(b)
        chi[i, j] = chi[j, i] = _TWO_PI * v
    return DispersiveSystem(modes, chi)


def crit_number_splitting() -> list[CheckResult]:
    system = _device_system()
    grid = np.linspace(-1.5e6, 6.5e6, 1601)
    trace = sim_number_splitting(system, "qubit", "storage", 1.0, grid)
    res = fits.fit_lorentzian_multiplet(trace, n_peaks=5)
    out = []
    spacing = res.params.get("spacing_mean", math.nan)
    out.append(
        _check(
            "peak spacing",
            res.converged and _rel(spacing, 1.17e6) < 0.02,
            f"fitted spacing {spacing / 1e6:.4f} MHz vs 1.17 MHz (2%)",
        )
    )
    weights = res.params["weights"]
    for n, w in enumerate(weights):
        expected = math.exp(-1.0) / math.factorial(n)
        out.append(
            _check(
                f"Poisson weight n={n}",
                _rel(w, expected) < 0.02,
                f"weight {w:.5f} vs {expected:.5f} (2%)",
            )
        )
    return out


# --- criterion 6: protocol round-trips ---------------------------------------

def crit_round_trips() -> list[CheckResult]:
    system = _device_system()
    rng = np.random.default_rng(_SEED)
    out = []

    def run_t1(noise):
        grid = np.linspace(0.0, 32e-6, 161)
        trace = sim_t1(system, "qubit", grid)
        if noise:
            trace = add_noise(trace, 0.02, rng)
        return fits.fit_exponential(trace).params["t_decay"], 6.4e-6

    def run_ramsey(noise):
        grid = np.linspace(0.0, 20e-6, 401)
        trace = sim_ramsey(system, "qubit", 400e3, grid, echo=False)
        if noise:
            trace = add_noise(trace, 0.02, rng)
        res = fits.fit_damped_fringes(trace)
        return res.params["t2"], 9.5e-6

    def run_echo(noise):
        sys_echo = system.replace_mode(system.mode("qubit").with_t2(11.7e-6))
        grid = np.linspace(0.0, 25e-6, 301)
        trace = sim_ramsey(sys_echo, "qubit", 300e3, grid, echo=True)
        if noise:
            trace = add_noise(trace, 0.02, rng)
        return fits.fit_damped_fringes(trace).params["t2"], 11.7e-6

    def run_cavity(noise):
        grid = np.linspace(0.0, 120e-6, 161)
        trace = sim_cavity_decay(system, "qubit", "storage", math.sqrt(3.0), grid)
        if noise:
            trace = add_noise(trace, 0.02, rng)
            clipped = np.clip(trace.values, 1e-6, 1.0)
            trace = type(trace)(trace.x, clipped, trace.meta)
        res = fits.fit_poissonian_decay(trace)
        return res.params["t1"], 34.3e-6

    for label, runner in (
        ("t1_decay", run_t1),
        ("ramsey", run_ramsey),
        ("hahn_echo", run_echo),
        ("cavity_decay", run_cavity),
    ):
        for noise, tol in ((False, 0.02), (True, 0.05)):
            got, want = runner(noise)
            tag = "noisy" if noise else "clean"
            out.append(
                _check(
                    f"{label} ({tag})",
                    _rel(got, want) < tol,
                    f"recovered {got * 1e6:.3f} us vs {want * 1e6:.1f} us "
                    f"({_rel(got, want) * 100:.2f}% vs {tol * 100:.0f}%)",
                )
            )

    # fringe frequency round-trip on the clean Ramsey trace
    grid = np.linspace(0.0, 20e-6, 401)
    trace = sim_ramsey(system, "qubit", 400e3, grid, echo=False)
    f = fits.fit_damped_fringes(trace).params["frequency"]
    out.append(
        _check(
            "ramsey fringe frequency",
            _rel(f, 400e3) < 0.01,
            f"fitted {f / 1e3:.2f} kHz vs 400 kHz",
        )
    )
    return out


# --- criterion 7: Stark slope ratio ------------------------------------------

def crit_stark_ratio() -> list[CheckResult]:
    system = _device_system()
    powers = np.linspace(0.05, 1.0, 20)
    _, _, ratio = sim_stark_slopes(
        system, powers, kappa_r=1.0 / 1.0e-6,
        chi_qr=_TWO_PI * -3.84e6, chi_rmu=_TWO_PI * -20e3,
    )
    return [
        _check(
            "slope ratio",
            abs(ratio - 192.0) < 1e-9,
            f"ratio = {ratio!r} vs 192 (exact)",
        )
    ]


# --- criterion 8: transmon spectrum ------------------------------------------

def crit_transmon() -> list[CheckResult]:
    p = TransmonParams(e_j=39e9, e_c=204e6)
    f01, alpha = transmon_f01_alpha(p)
    asym = math.sqrt(8.0 * p.e_j * p.e_c) - p.e_c
    sweet = transmon_spectrum(TransmonParams(p.e_j, p.e_c, 0.0))[1]
    worst = transmon_spectrum(TransmonParams(p.e_j, p.e_c, 0.5))[1]
    dispersion = abs(worst - sweet) / sweet
    return [
        _check(
            "anharmonicity",
            _rel(alpha, -204e6) < 0.05,
            f"alpha = {alpha / 1e6:.2f} MHz vs -204 MHz (5%)",
        ),
        _check(
            "charge dispersion",
            dispersion < 1e-8,
            f"relative dispersion {dispersion:.3e} < 1e-8",
        ),
        _check(
            "asymptotic frequency",
            _rel(f01, asym) < 0.01,
            f"f01 = {f01 / 1e9:.4f} GHz vs sqrt(8 EJ EC) - EC = {asym / 1e9:.4f} GHz (1%)",
        ),
    ]


# --- criterion 9: TE101 seam admittance ---------------------------------------

def crit_te101() -> list[CheckResult]:
    out = []
    for cav, f in (
        (RectangularCavity(a=22e-3, d=24e-3, b=300e-6), 9.25e9),
        (RectangularCavity(a=15e-3, d=15e-3, b=1e-3), None),
        (RectangularCavity(a=10e-3, d=30e-3, b=250e-6), None),
    ):
        closed = te101_seam_admittance(cav, f)
        quad = te101_seam_admittance_quadrature(cav, f)
        out.append(
            _check(
                f"closed form vs quadrature (a={cav.a * 1e3:g} mm, d={cav.d * 1e3:g} mm)",
                _rel(closed, quad) < 1e-6,
                f"{closed:.6f} vs {quad:.6f} per Ohm*m",
            )
        )
    device = te101_seam_admittance(RectangularCavity(22e-3, 24e-3, 300e-6), 9.25e9)
    factor = 16.0 / device
    out.append(
        _check(
            "device-geometry admittance scale",
            1.0 / 2.5 <= factor <= 2.5,
            f"ideal box gives {device:.2f} per Ohm*m vs published 16.0 "
            f"(factor {factor:.2f}, sloped-sidewall geometry difference)",
        )
    )
    return out


# --- criterion 10: conductance regression --------------------------------------

def crit_regression() -> list[CheckResult]:
    out = []
    y = np.array([0.1, 1.0, 10.0])
    data = QMeasurementSet(tuple(zip(y, 4.2e5 / y)))
    g, _ = fit_seam_conductance(data)
    out.append(
        _check(
            "noiseless recovery",
            _rel(g, 4.2e5) < 1e-12,
            f"g = {g:.6e} vs 4.2e5 (exact)",
        )
    )

    rng = np.random.default_rng(_SEED)
    y20 = np.geomspace(0.05, 20.0, 20)
    q20 = (4.2e5 / y20) * rng.lognormal(0.0, 0.10, 20)
    g_noisy, _ = fit_seam_conductance(QMeasurementSet(tuple(zip(y20, q20))))
    out.append(
        _check(
            "10% lognormal noise",
            _rel(g_noisy, 4.2e5) < 0.10,
            f"g = {g_noisy:.4e} vs 4.2e5 ({_rel(g_noisy, 4.2e5) * 100:.2f}% off)",
        )
    )

    scaled, _ = fit_seam_conductance(QMeasurementSet(tuple(zip(y, 7.0 * (4.2e5 / y)))))
    out.append(
        _check(
            "scale equivariance",
            _rel(scaled, 7.0 * g) < 1e-12,
            f"g(7Q) = {scaled:.6e} vs 7*g = {7 * g:.6e}",
        )
    )
    return out


# --- criterion 11: Lindblad engine properties -----------------------------------

def crit_lindblad() -> list[CheckResult]:
    from .quantum import (
        Operator,
        coherent_state,
        evolve_lindblad,
        fock_state,
        ladder,
        number_op,
    )

    out = []

    # analytic T1 decay of an excited qubit
    qspace = ModeSpace((2,), ("qubit",))
    t1 = 6.4e-6
    grid = np.linspace(0.0, 32e-6, 161)
    excited = fock_state(qspace, (1,))
    h0 = Operator(qspace, np.zeros((2, 2)), hermitian=True)
    states = evolve_lindblad(excited, h0, [(ladder(qspace, 0), 1.0 / t1)], grid)
    pe = np.array([s.populations(0)[1] for s in states])
    err = float(np.max(np.abs(pe - np.exp(-grid / t1))))
    out.append(
        _check("analytic T1 decay", err < 1e-4, f"max |P_e - exp(-t/T1)| = {err:.2e} < 1e-4")
    )

    # trace and positivity with decay on a two-mode dispersive system
    modes = (
        ModeSpec("qubit", _TWO_PI * 7351.4e6, alpha=_TWO_PI * -209.8e6, t1=6.4e-6, t2=9.5e-6, dim=2),
        ModeSpec("storage", _TWO_PI * 9377.2e6, t1=34.3e-6, dim=10),
    )
    chi = np.zeros((2, 2))
    chi[0, 1] = chi[1, 0] = _TWO_PI * -1.17e6
    system = DispersiveSystem(modes, chi)
    space = system.space()
    h = build_hamiltonian(system, frame_offsets=[m.omega for m in modes])
    state = coherent_state(space, 1, 1.2)
    from .protocols import _apply_unitary, _embed_on_mode, _rotation

    state = _apply_unitary(state, _embed_on_mode(space, 0, _rotation(2, math.pi / 2, math.pi / 2)))
    from .circuit import dephasing_time_from_t1_t2

    tphi = dephasing_time_from_t1_t2(6.4e-6, 9.5e-6)
    c_ops = [
        (ladder(space, 0), 1.0 / 6.4e-6),
        (number_op(space, 0), 2.0 / tphi),
        (ladder(space, 1), 1.0 / 34.3e-6),
    ]
    grid2 = np.linspace(0.0, 10e-6, 51)
    states = evolve_lindblad(state, h, c_ops, grid2)
    tr_drift = max(abs(np.trace(s.density) - 1.0) for s in states)
    min_eig = min(float(np.linalg.eigvalsh(s.density)[0]) for s in states)
    out.append(
        _check("trace conservation", tr_drift < 1e-6, f"max |tr-1| = {tr_drift:.2e} < 1e-6")
    )
    out.append(
        _check("positivity", min_eig > -1e-6, f"min eigenvalue = {min_eig:.2e} > -1e-6")
    )

    # purity conservation without collapse operators
    states_u = evolve_lindblad(state, h, [], grid2)
    p0 = state.purity()
    drift = max(abs(s.purity() - p0) for s in states_u)
    out.append(
        _check("unitary purity", drift < 1e-8, f"max purity drift = {drift:.2e} < 1e-8")
    )
    return out


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    func: object

    def run(self) -> CriterionResult:
        return CriterionResult(self.number, self.title, tuple(self.func()))


CRITERIA = (
    Criterion(1, "dispersive-conversion", crit_dispersive_conversion),
    Criterion(2, "seam-table-lifetimes", crit_seam_table),
    Criterion(3, "q-lifetime-identity", crit_q_lifetime),
    Criterion(4, "revival-timing", crit_revival),
    Criterion(5, "number-splitting", crit_number_splitting),
    Criterion(6, "protocol-round-trips", crit_round_trips),
    Criterion(7, "stark-slope-ratio", crit_stark_ratio),
    Criterion(8, "transmon-spectrum", crit_transmon),
    Criterion(9, "te101-admittance", crit_te101),
    Criterion(10, "conductance-regression", crit_regression),
    Criterion(11, "lindblad-properties", crit_lindblad),
)


def run_all(printer=print) -> list[CriterionResult]:
    results = []
    for criterion in CRITERIA:
        result = criterion.run()
        results.append(result)
        if printer is not None:
            printer(result.summary())
            for check in result.checks:
                if not check.passed:
                    printer(f"    FAIL {check.label}: {check.detail}")
    return results
