"""Simulated measurement protocols on a dispersive multimode system.

Every protocol runs in the multi-rotating frame (each mode at its own
frequency), so only detunings, cross-Kerr, and self-Kerr terms drive the
dynamics and microsecond traces integrate quickly. Pulses are instantaneous
unitaries; the spectrally selective number-resolved pulse is modeled as a
projector-conditioned flip, which is exact when its bandwidth is small
against the dispersive shift.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuit import DispersiveSystem, ModeSpec, build_hamiltonian, dephasing_time_from_t1_t2
from .quantum import (
    ModeSpace,
    Operator,
    State,
    coherent_state,
    evolve_lindblad,
    evolve_unitary,
    fock_state,
    ladder,
    number_op,
    partial_trace,
)

__all__ = [
    "TraceSeries",
    "ProtocolConfig",
    "TraceFormatError",
    "PROTOCOL_NAMES",
    "sim_t1",
    "sim_ramsey",
    "sim_number_splitting",
    "sim_revival",
    "sim_cavity_decay",
    "sim_stark_slopes",
    "stark_shift_traces",
    "q_from_lifetime",
    "run_protocol",
    "add_noise",
    "write_trace_csv",
    "read_trace_csv",
]

PROTOCOL_NAMES = (
    "t1_decay",
    "ramsey",
    "hahn_echo",
    "number_splitting",
    "revival",
    "cavity_decay",
    "stark_slope",
)

_BOUNDED_KINDS = {"population"}


class TraceFormatError(ValueError):
    """A trace CSV file does not match the expected schema."""


@dataclass(frozen=True, eq=False)
class TraceSeries:
    """Labeled (x, value) series produced by a simulated experiment.

    meta carries the protocol name and parameters; meta["kind"] defaults to
    "population", which enforces values within [-1e-6, 1 + 1e-6].
    """

    x: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape:
            raise ValueError("x and values must be 1-D arrays of equal length")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly monotone increasing")
        meta = dict(self.meta)
        meta.setdefault("kind", "population")
        if meta["kind"] in _BOUNDED_KINDS:
            if np.min(v) < -1e-6 or np.max(v) > 1.0 + 1e-6:
                raise ValueError(
                    f"population values outside [-1e-6, 1+1e-6]: "
                    f"[{np.min(v):.3e}, {np.max(v):.3e}]"
                )
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "meta", meta)


def _require(spec: ModeSpec, attr: str, what: str):
    if getattr(spec, attr) is None:
        raise ValueError(f"mode {spec.label!r} has no {what}")


def _single_mode_space(spec: ModeSpec, dim: int | None = None) -> ModeSpace:
    return ModeSpace((dim or spec.dim,), (spec.label,))


def _zero_hamiltonian(space: ModeSpace) -> Operator:
    return Operator(space, np.zeros((space.size, space.size)), hermitian=True)


def _collapse_ops(space: ModeSpace, mode_index: int, spec: ModeSpec):
    """Relaxation (with thermal excitation) and pure dephasing for one mode."""
    ops = []
    a = ladder(space, mode_index)
    if spec.t1 is not None and math.isfinite(spec.t1):
        ops.append((a, (1.0 + spec.n_thermal) / spec.t1))
        if spec.n_thermal > 0:
            ops.append((a.dag(), spec.n_thermal / spec.t1))
    if spec.t2 is not None:
        if spec.t1 is not None and math.isfinite(spec.t1):
            tphi = dephasing_time_from_t1_t2(spec.t1, spec.t2)
        else:
            tphi = spec.t2
        if tphi is not None:
            ops.append((number_op(space, mode_index), 2.0 / tphi))
    return ops


def _rotation(dim: int, theta: float, phase: float) -> np.ndarray:
    """Rotation by theta about the equatorial axis at `phase` on the lowest
    two levels, identity elsewhere."""
    u = np.eye(dim, dtype=complex)
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    u[0, 0] = c
    u[1, 1] = c
    u[0, 1] = -1j * s * np.exp(-1j * phase)
    u[1, 0] = -1j * s * np.exp(1j * phase)
    return u


def _apply_unitary(state: State, u: np.ndarray) -> State:
    rho = u @ state.density @ u.conj().T
    return State(state.space, (rho + rho.conj().T) / 2.0, tol=max(state.tol, 1e-9))


def _embed_on_mode(space: ModeSpace, mode_index: int, block: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for k, d in enumerate(space.dims):
        out = np.kron(out, block if k == mode_index else np.eye(d))
    return out


def sim_t1(system: DispersiveSystem, mode: str, t_grid) -> TraceSeries:
    """Energy-relaxation trace: excite the mode, watch the excited-state
    population decay under its T1 (and thermal occupation, if any)."""
    spec = system.mode(mode)
    _require(spec, "t1", "T1")
    space = _single_mode_space(spec)
    state = fock_state(space, (1,))
    states = evolve_lindblad(
        state, _zero_hamiltonian(space), _collapse_ops(space, 0, spec), t_grid
    )
    values = np.array([s.populations(0)[1] for s in states])
    return TraceSeries(
        np.asarray(t_grid, float),
        values,
        {
            "protocol": "t1_decay",
            "mode": mode,
            "t1_s": spec.t1,
            "n_thermal": spec.n_thermal,
        },
    )


def sim_ramsey(
    system: DispersiveSystem, mode: str, detuning: float, t_grid, echo: bool = False
) -> TraceSeries:
    """Ramsey (or Hahn-echo) fringes of a two-level mode.

    pi/2 - wait(t) [- pi at t/2 if echo] - pi/2, with the drive detuned by
    `detuning` (Hz). In the echo variant the physical detuning phase is
    refocused; fringes are reintroduced by ramping the phase of the final
    pi/2 pulse at the nominal detuning, so the fringe frequency is
    deliberately detuning-insensitive.
    """
    spec = system.mode(mode)
    _require(spec, "t1", "T1")
    _require(spec, "t2", "T2")
    t = np.asarray(t_grid, dtype=float)
    space = _single_mode_space(spec, dim=2)
    c_ops = _collapse_ops(space, 0, spec)
    h = Operator(
        space, 2.0 * math.pi * detuning * number_op(space, 0).matrix, hermitian=True
    )
    half_pi = _rotation(2, math.pi / 2.0, math.pi / 2.0)
    ground = fock_state(space, (0,))
    prepared = _apply_unitary(ground, half_pi)

    def read_out(state: State, tau: float) -> float:
        phase = math.pi / 2.0 + (2.0 * math.pi * detuning * tau if echo else 0.0)
        final = _apply_unitary(state, _rotation(2, math.pi / 2.0, phase))
        return float(final.populations(0)[1])

    values = np.empty_like(t)
    if not echo:
        states = evolve_lindblad(prepared, h, c_ops, t)
        for k, tau in enumerate(t):
            values[k] = read_out(states[k], tau)
    else:
        flip = _rotation(2, math.pi, math.pi / 2.0)
        for k, tau in enumerate(t):
            if tau == 0.0:
                state = _apply_unitary(prepared, flip)
            else:
                half = evolve_lindblad(prepared, h, c_ops, [0.0, tau / 2.0])[-1]
                half = _apply_unitary(half, flip)
                state = evolve_lindblad(half, h, c_ops, [0.0, tau / 2.0])[-1]
            values[k] = read_out(state, tau)

    return TraceSeries(
        t,
        np.clip(values, 0.0, 1.0),
        {
            "protocol": "hahn_echo" if echo else "ramsey",
            "mode": mode,
            "detuning_hz": detuning,
            "t1_s": spec.t1,
            "t2_s": spec.t2,
        },
    )


def sim_number_splitting(
    system: DispersiveSystem,
    qubit: str,
    cavity: str,
    alpha: complex,
    freq_grid,
    linewidth: float | None = None,
) -> TraceSeries:
    """Photon-number-resolved qubit spectrum after displacing the cavity.

    The dispersive ladder gives Lorentzian peaks at offsets n*|chi| from the
    bare qubit line, weighted by the displaced cavity's photon-number
    populations. The x axis is the probe offset in Hz.
    """
    chi = system.chi_between(qubit, cavity)
    if chi == 0.0:
        raise ValueError(f"no cross-Kerr between {qubit!r} and {cavity!r}")
    cav = system.mode(cavity)
    qub = system.mode(qubit)
    weights = coherent_state(_single_mode_space(cav), 0, alpha).populations(0)

    if linewidth is None:
        if qub.t2 is not None:
            linewidth = 1.0 / (math.pi * qub.t2)
        else:
            linewidth = abs(chi) / (2.0 * math.pi) / 20.0
    spacing = abs(chi) / (2.0 * math.pi)
    if spacing < 3.0 * linewidth:
        warnings.warn(
            f"peak spacing {spacing:.3g} Hz not large against linewidth "
            f"{linewidth:.3g} Hz: not in the strong dispersive regime",
            stacklevel=2,
        )

    f = np.asarray(freq_grid, dtype=float)
    half = linewidth / 2.0
    values = np.zeros_like(f)
    for n, w in enumerate(weights):
        values += w * half**2 / ((f - n * spacing) ** 2 + half**2)
    return TraceSeries(
        f,
        values,
        {
            "protocol": "number_splitting",
            "qubit": qubit,
            "cavity": cavity,
            "alpha": abs(alpha),
            "chi_hz": chi / (2.0 * math.pi),
            "linewidth_hz": linewidth,
            "weights": [float(w) for w in weights],
        },
    )


def sim_revival(
    system: DispersiveSystem,
    qubit: str,
    cavity: str,
    alpha: complex,
    t_grid,
    decoherence: bool = False,
) -> TraceSeries:
    """Collapse and revival of qubit coherence after a cavity displacement.

    Prepares |alpha> x (|g>+|e>)/sqrt(2) and tracks the Ramsey contrast
    2 |<g| rho_qubit |e>| under the dispersive Hamiltonian; revivals recur at
    multiples of 2 pi / |chi|. Decoherence is off by default (pure cross-Kerr
    dynamics, evolved exactly in the Fock eigenbasis).
    """
    sub = system.subsystem((qubit, cavity))
    space = sub.space()
    state = coherent_state(space, 1, alpha)
    state = _apply_unitary(
        state, _embed_on_mode(space, 0, _rotation(space.dims[0], math.pi / 2.0, math.pi / 2.0))
    )
    h = build_hamiltonian(sub, frame_offsets=[m.omega for m in sub.modes])
    if decoherence:
        c_ops = []
        for k, m in enumerate(sub.modes):
            c_ops += _collapse_ops(space, k, m)
        states = evolve_lindblad(state, h, c_ops, t_grid)
    else:
        states = evolve_unitary(state, h, t_grid)
    contrast = np.array(
        [2.0 * abs(partial_trace(s, 0)[0, 1]) for s in states]
    )
    chi = sub.chi_between(qubit, cavity)
    return TraceSeries(
        np.asarray(t_grid, float),
        np.clip(contrast, 0.0, 1.0),
        {
            "protocol": "revival",
            "qubit": qubit,
            "cavity": cavity,
            "alpha": abs(alpha),
            "chi_hz": chi / (2.0 * math.pi),
            "expected_period_s": (2.0 * math.pi / abs(chi)) if chi else math.inf,
            "decoherence": decoherence,
        },
    )


def sim_cavity_decay(
    system: DispersiveSystem,
    qubit: str,
    cavity: str,
    alpha0: complex,
    delay_grid,
    pulse_bandwidth: float | None = None,
) -> TraceSeries:
    """Cavity energy decay probed by a photon-number-selective qubit flip.

    Displace the cavity to |alpha0>, wait, then flip the qubit conditioned on
    the cavity being empty. The flip probability is P(n=0 at t), which for a
    decaying coherent state is exp(-|alpha0|^2 e^{-t/T1}). The selective pulse
    is treated as an instantaneous projector-conditioned flip; a warning is
    recorded in meta when `pulse_bandwidth` (Hz) is not small against |chi|.
    """
    cav = system.mode(cavity)
    _require(cav, "t1", "T1")
    chi = system.chi_between(qubit, cavity)
    meta_warnings = []
    if pulse_bandwidth is not None and abs(chi) > 0:
        if pulse_bandwidth >= abs(chi) / (2.0 * math.pi):
            msg = (
                f"selective pulse bandwidth {pulse_bandwidth:.3g} Hz >= "
                f"|chi|/2pi = {abs(chi) / (2 * math.pi):.3g} Hz: selectivity violated"
            )
            warnings.warn(msg, stacklevel=2)
            meta_warnings.append(msg)

    space = _single_mode_space(cav)
    state = coherent_state(space, 0, alpha0)
    states = evolve_lindblad(
        state, _zero_hamiltonian(space), _collapse_ops(space, 0, cav), delay_grid
    )
    values = np.array([s.populations(0)[0] for s in states])
    return TraceSeries(
        np.asarray(delay_grid, float),
        np.clip(values, 0.0, 1.0),
        {
            "protocol": "cavity_decay",
            "qubit": qubit,
            "cavity": cavity,
            "n0": abs(alpha0) ** 2,
            "t1_s": cav.t1,
            "warnings": meta_warnings,
        },
    )


def _stark_response(powers, kappa_r: float, drive_detuning: float) -> np.ndarray:
    p = np.asarray(powers, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("need at least two drive powers")
    if np.any(p <= 0):
        raise ValueError("drive powers must be positive")
    return p / (drive_detuning**2 + (kappa_r / 2.0) ** 2)


def sim_stark_slopes(
    system: DispersiveSystem,
    powers,
    kappa_r: float,
    chi_qr: float,
    chi_rmu: float,
    drive_detuning: float = 2.0 * math.pi * 3e6,
):
    """Stark-shift slopes of qubit and storage lines versus drive power.

    The readout photon number follows the steady-state linear response
    n ~ P / (Delta_d^2 + (kappa/2)^2); each mode coupled to the readout by
    chi shifts by -chi * n. Returns (slope_qubit, slope_storage, ratio) with
    slopes in rad/s per unit power; the ratio equals chi_qr/chi_rmu and is
    math.inf when the storage slope vanishes.
    """
    n_bar = _stark_response(powers, kappa_r, drive_detuning)
    p = np.asarray(powers, dtype=float)
    shift_q = -chi_qr * n_bar
    shift_mu = -chi_rmu * n_bar
    slope_q = float(np.polyfit(p, shift_q, 1)[0])
    slope_mu = float(np.polyfit(p, shift_mu, 1)[0])
    if slope_mu == 0.0:
        return slope_q, slope_mu, math.inf
    return slope_q, slope_mu, slope_q / slope_mu


def stark_shift_traces(
    system: DispersiveSystem,
    powers,
    kappa_r: float,
    chi_qr: float,
    chi_rmu: float,
    drive_detuning: float = 2.0 * math.pi * 3e6,
) -> tuple[TraceSeries, TraceSeries]:
    """Qubit and storage Stark-shift traces (Hz versus drive power)."""
    n_bar = _stark_response(powers, kappa_r, drive_detuning)
    p = np.asarray(powers, dtype=float)
    meta = {
        "protocol": "stark_slope",
        "kind": "frequency_shift",
        "drive_detuning_hz": drive_detuning / (2.0 * math.pi),
    }
    tq = TraceSeries(p, -chi_qr * n_bar / (2.0 * math.pi), {**meta, "line": "qubit"})
    tm = TraceSeries(p, -chi_rmu * n_bar / (2.0 * math.pi), {**meta, "line": "storage"})
    return tq, tm


def q_from_lifetime(omega: float, t1: float) -> float:
    """Quality factor Q = omega * T1."""
    if omega <= 0:
        raise ValueError("omega must be > 0")
    if t1 < 0:
        raise ValueError("T1 must be >= 0")
    return omega * t1


@dataclass(frozen=True)
class ProtocolConfig:
    """One named protocol run: which simulation, on which modes, on what grid."""

    protocol: str
    mode: str | None = None
    qubit: str | None = None
    cavity: str | None = None
    readout: str | None = None
    detuning_hz: float | None = None
    t_max: float | None = None
    points: int = 0
    f_start: float | None = None
    f_stop: float | None = None
    displacement: float | None = None
    t2_override: float | None = None
    pulse_bandwidth_hz: float | None = None
    drive_detuning_hz: float | None = None
    power_max: float = 1.0
    noise: float = 0.0
    n_peaks: int | None = None

    _REQUIRED = {
        "t1_decay": ("mode", "t_max", "points"),
        "ramsey": ("mode", "detuning_hz", "t_max", "points"),
        "hahn_echo": ("mode", "detuning_hz", "t_max", "points"),
        "number_splitting": ("qubit", "cavity", "displacement", "f_start", "f_stop", "points"),
        "revival": ("qubit", "cavity", "displacement", "t_max", "points"),
        "cavity_decay": ("qubit", "cavity", "displacement", "t_max", "points"),
        "stark_slope": ("qubit", "cavity", "readout", "points"),
    }

    def __post_init__(self):
        if self.protocol not in PROTOCOL_NAMES:
            raise ValueError(
                f"unknown protocol {self.protocol!r}; available: {', '.join(PROTOCOL_NAMES)}"
            )
        missing = [
            name
            for name in self._REQUIRED[self.protocol]
            if getattr(self, name) in (None, 0)
        ]
        if missing:
            raise ValueError(
                f"protocol {self.protocol!r} missing fields: {', '.join(missing)}"
            )
        if self.points < 16:
            raise ValueError("grid must have at least 16 points")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.points)

    def freq_grid(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, self.points)

    def power_grid(self) -> np.ndarray:
        return np.linspace(self.power_max / self.points, self.power_max, self.points)


def add_noise(trace: TraceSeries, sigma: float, rng: np.random.Generator) -> TraceSeries:
    """Additive Gaussian measurement noise; relabels the trace kind so the
    population bound no longer applies."""
    if sigma <= 0:
        return trace
    noisy = trace.values + rng.normal(0.0, sigma, trace.values.shape)
    meta = {**trace.meta, "kind": "measurement", "noise_sigma": sigma}
    return TraceSeries(trace.x, noisy, meta)


def run_protocol(
    system: DispersiveSystem, cfg: ProtocolConfig, rng: np.random.Generator | None = None
) -> dict:
    """Dispatch one protocol; returns {"trace": ..., "fitter": ..., "extra": ...}.

    The fitter name keys into the CLI's fitting table so simulate runs can be
    re-fit offline from their CSV output.
    """
    name = cfg.protocol
    if name in ("ramsey", "hahn_echo") and cfg.t2_override is not None:
        system = system.replace_mode(system.mode(cfg.mode).with_t2(cfg.t2_override))

    extra: dict = {}
    if name == "t1_decay":
        trace = sim_t1(system, cfg.mode, cfg.time_grid())
        fitter = "exponential"
    elif name in ("ramsey", "hahn_echo"):
        trace = sim_ramsey(
            system, cfg.mode, cfg.detuning_hz, cfg.time_grid(), echo=name == "hahn_echo"
        )
        fitter = "damped_fringes"
    elif name == "number_splitting":
        trace = sim_number_splitting(
            system, cfg.qubit, cfg.cavity, cfg.displacement, cfg.freq_grid()
        )
        fitter = "lorentzian_multiplet"
        weights = trace.meta["weights"]
        if cfg.n_peaks:
            extra["n_peaks"] = cfg.n_peaks
        else:
            keep = np.cumsum(weights) < 0.995
            extra["n_peaks"] = int(min(max(np.count_nonzero(keep) + 1, 1), 8))
    elif name == "revival":
        trace = sim_revival(system, cfg.qubit, cfg.cavity, cfg.displacement, cfg.time_grid())
        fitter = "revival_period"
    elif name == "cavity_decay":
        trace = sim_cavity_decay(
            system,
            cfg.qubit,
            cfg.cavity,
            cfg.displacement,
            cfg.time_grid(),
            pulse_bandwidth=cfg.pulse_bandwidth_hz,
        )
        fitter = "poissonian_decay"
    elif name == "stark_slope":
        readout = system.mode(cfg.readout)
        _require(readout, "t1", "T1 (sets kappa)")
        kappa = 1.0 / readout.t1
        chi_qr = system.chi_between(cfg.qubit, cfg.readout)
        chi_rmu = system.chi_between(cfg.readout, cfg.cavity)
        drive = 2.0 * math.pi * (cfg.drive_detuning_hz or 3e6)
        powers = cfg.power_grid()
        slope_q, slope_mu, ratio = sim_stark_slopes(
            system, powers, kappa, chi_qr, chi_rmu, drive
        )
        trace, trace_mu = stark_shift_traces(
            system, powers, kappa, chi_qr, chi_rmu, drive
        )
        extra = {
            "slope_qubit_rad_s_per_power": slope_q,
            "slope_storage_rad_s_per_power": slope_mu,
            "ratio": ratio,
            "storage_trace": trace_mu,
        }
        fitter = None
    else:  # pragma: no cover - guarded by ProtocolConfig
        raise ValueError(f"unknown protocol {name!r}")

    if cfg.noise > 0 and trace is not None and fitter is not None:
        if rng is None:
            raise ValueError("noisy protocol requires a seeded random generator")
        trace = add_noise(trace, cfg.noise, rng)
    return {"trace": trace, "fitter": fitter, "extra": extra}


def write_trace_csv(trace: TraceSeries, path) -> None:
    """CSV with '#'-prefixed metadata lines, then an x,value header and rows."""
    with open(path, "w", newline="") as fh:
        for key in sorted(trace.meta):
            fh.write(f"# {key}={json.dumps(trace.meta[key], sort_keys=True)}\n")
        fh.write("x,value\n")
        for xv, yv in zip(trace.x, trace.values):
            fh.write(f"{float(xv)!r},{float(yv)!r}\n")


def read_trace_csv(path) -> TraceSeries:
    """Inverse of `write_trace_csv`; schema errors carry the line number."""
    meta: dict = {}
    xs: list[float] = []
    ys: list[float] = []
    header_seen = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, raw = body.partition("=")
                    try:
                        meta[key.strip()] = json.loads(raw)
                    except json.JSONDecodeError:
                        meta[key.strip()] = raw
                continue
            if not header_seen:
                if line.replace(" ", "") != "x,value":
                    raise TraceFormatError(
                        f"{path}: line {lineno}: expected header 'x,value', got {line!r}"
                    )
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise TraceFormatError(
                    f"{path}: line {lineno}: expected two comma-separated values"
                )
            try:
                xs.append(float(parts[0]))
                ys.append(float(parts[1]))
            except ValueError:
                raise TraceFormatError(
                    f"{path}: line {lineno}: non-numeric value"
                ) from None
    if not header_seen:
        raise TraceFormatError(f"{path}: missing 'x,value' header")
    if not xs:
        raise TraceFormatError(f"{path}: no data rows")
    meta.setdefault("kind", "measurement")
    return TraceSeries(np.array(xs), np.array(ys), meta)
