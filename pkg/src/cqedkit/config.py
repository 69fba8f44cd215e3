"""Run configuration: flat INI-style text with unit-suffixed numbers.

Every dimensioned value carries its unit as a suffix ("6.4us", "9377.2MHz",
"-1.17MHz"); unknown sections and keys are rejected outright so a typo in a
physics parameter cannot pass silently. Frequencies are /2pi values in the
file and converted to angular units when the DispersiveSystem is built.
"""

from __future__ import annotations

import configparser
import importlib.resources
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .circuit import CapacitanceNetwork, DispersiveSystem, ModeSpec, TransmonParams, ej_from_lj
from .protocols import PROTOCOL_NAMES, ProtocolConfig
from .seams import SeamSpec

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_quantity", "default_config_path"]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


_UNITS = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "capacitance": {"F": 1.0, "uF": 1e-6, "nF": 1e-9, "pF": 1e-12, "fF": 1e-15, "aF": 1e-18},
    "inductance": {"H": 1.0, "mH": 1e-3, "uH": 1e-6, "nH": 1e-9, "pH": 1e-12},
}

_QUANTITY_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([A-Za-z]*)$")


def parse_quantity(text: str, dimension: str) -> float:
    """Parse "6.4us" -> 6.4e-6 etc.; the suffix must match `dimension`."""
    table = _UNITS[dimension]
    m = _QUANTITY_RE.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}")
    value, suffix = m.groups()
    if not suffix:
        raise ConfigError(
            f"{text!r}: {dimension} values need a unit suffix "
            f"({', '.join(sorted(table))})"
        )
    if suffix not in table:
        raise ConfigError(
            f"{text!r}: unknown {dimension} unit {suffix!r} "
            f"(expected one of {', '.join(sorted(table))})"
        )
    return float(value) * table[suffix]


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse number {text!r}") from None


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"cannot parse integer {text!r}") from None


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


# key -> parser, per section family
_DEVICE_KEYS = {"name": str, "seed": _parse_int}
_MODE_KEYS = {
    "frequency": ("frequency",),
    "anharmonicity": ("frequency",),
    "t1": ("time",),
    "t2": ("time",),
    "thermal_occupation": _parse_float,
    "dim": _parse_int,
}
_CIRCUIT_KEYS = {
    "c_gap": ("capacitance",),
    "c_annulus": ("capacitance",),
    "c_junction": ("capacitance",),
    "c_cavity": ("capacitance",),
    "l_cavity": ("inductance",),
    "l_junction": ("inductance",),
    "e_charging": ("frequency",),
    "offset_charge": _parse_float,
    "charge_cutoff": _parse_int,
}
_SEAM_KEYS = {"conductance": _parse_float, "installed": _parse_bool}
_PROTOCOL_KEYS = {
    "type": str,
    "mode": str,
    "qubit": str,
    "cavity": str,
    "readout": str,
    "detuning": ("frequency",),
    "t_max": ("time",),
    "points": _parse_int,
    "f_start": ("frequency",),
    "f_stop": ("frequency",),
    "displacement": _parse_float,
    "t2": ("time",),
    "pulse_bandwidth": ("frequency",),
    "drive_detuning": ("frequency",),
    "power_max": _parse_float,
    "noise": _parse_float,
    "n_peaks": _parse_int,
}
_OUTPUT_KEYS = {"directory": str}


def _convert(section: str, key: str, raw: str, table: dict):
    if key not in table:
        raise ConfigError(
            f"[{section}] unknown key {key!r}; allowed: {', '.join(sorted(table))}"
        )
    spec = table[key]
    if isinstance(spec, tuple):
        return parse_quantity(raw, spec[0])
    return spec(raw)


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration."""

    name: str
    seed: int
    modes: tuple[ModeSpec, ...]
    chi_pairs: dict
    circuit: CapacitanceNetwork | None
    transmon: TransmonParams | None
    budget_omegas: dict
    seams: tuple[SeamSpec, ...]
    installed_seams: tuple[str, ...]
    protocols: dict
    output_dir: str = "runs"
    path: str = field(default="", compare=False)

    def system(self) -> DispersiveSystem:
        labels = [m.label for m in self.modes]
        n = len(labels)
        chi = np.zeros((n, n))
        for (a, b), value in self.chi_pairs.items():
            i, j = labels.index(a), labels.index(b)
            chi[i, j] = chi[j, i] = value
        return DispersiveSystem(self.modes, chi)

    def protocol(self, name: str) -> ProtocolConfig:
        if name not in self.protocols:
            raise ConfigError(
                f"no protocol {name!r} in config; available: "
                f"{', '.join(sorted(self.protocols)) or '(none)'}"
            )
        return self.protocols[name]


def default_config_path() -> str:
    """Path of the bundled device configuration."""
    return str(importlib.resources.files("cqedkit").joinpath("data/device.cfg"))


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    name = "unnamed"
    seed = 0
    modes: list[ModeSpec] = []
    chi_pairs: dict = {}
    circuit = None
    transmon = None
    budget_omegas: dict = {}
    seams: list[SeamSpec] = []
    installed: list[str] = []
    protocols: dict = {}
    output_dir = "runs"

    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "device":
            vals = {k: _convert(section, k, v, _DEVICE_KEYS) for k, v in items.items()}
            name = vals.get("name", name)
            seed = vals.get("seed", seed)
        elif section.startswith("mode."):
            label = section[len("mode."):]
            if not label:
                raise ConfigError("mode section needs a label: [mode.<label>]")
            vals = {k: _convert(section, k, v, _MODE_KEYS) for k, v in items.items()}
            if "frequency" not in vals:
                raise ConfigError(f"[{section}] missing required key 'frequency'")
            try:
                modes.append(
                    ModeSpec(
                        label=label,
                        omega=2.0 * math.pi * vals["frequency"],
                        alpha=2.0 * math.pi * vals.get("anharmonicity", 0.0),
                        t1=vals.get("t1"),
                        t2=vals.get("t2"),
                        n_thermal=vals.get("thermal_occupation", 0.0),
                        dim=vals.get("dim", 2),
                    )
                )
            except ValueError as exc:
                raise ConfigError(f"[{section}] {exc}") from None
        elif section == "cross_kerr":
            for key, raw in items.items():
                if key.count("/") != 1:
                    raise ConfigError(
                        f"[cross_kerr] key {key!r} must be '<mode>/<mode>'"
                    )
                a, b = key.split("/")
                chi_pairs[(a, b)] = 2.0 * math.pi * parse_quantity(raw, "frequency")
        elif section == "circuit":
            vals = {k: _convert(section, k, v, _CIRCUIT_KEYS) for k, v in items.items()}
            needed = ("c_gap", "c_annulus", "c_junction", "c_cavity", "l_cavity", "l_junction")
            missing = [k for k in needed if k not in vals]
            if missing:
                raise ConfigError(f"[circuit] missing fields: {', '.join(missing)}")
            try:
                circuit = CapacitanceNetwork(
                    c_gap=vals["c_gap"],
                    c_annulus=vals["c_annulus"],
                    c_junction=vals["c_junction"],
                    c_cavity=vals["c_cavity"],
                    l_cavity=vals["l_cavity"],
                    l_junction=vals["l_junction"],
                )
            except ValueError as exc:
                raise ConfigError(f"[circuit] {exc}") from None
            if "e_charging" in vals:
                transmon = TransmonParams(
                    e_j=ej_from_lj(vals["l_junction"]),
                    e_c=vals["e_charging"],
                    n_g=vals.get("offset_charge", 0.0),
                    charge_cutoff=vals.get("charge_cutoff"),
                )
        elif section == "budget":
            for key, raw in items.items():
                if not key.startswith("frequency."):
                    raise ConfigError(
                        f"[budget] unknown key {key!r}; allowed: frequency.<mode>"
                    )
                label = key[len("frequency."):]
                budget_omegas[label] = 2.0 * math.pi * parse_quantity(raw, "frequency")
        elif section.startswith("seam."):
            label = section[len("seam."):]
            y_map: dict = {}
            vals: dict = {}
            for key, raw in items.items():
                if key.startswith("y."):
                    y_map[key[2:]] = _parse_float(raw)
                else:
                    vals[key] = _convert(section, key, raw, _SEAM_KEYS)
            if "conductance" not in vals:
                raise ConfigError(f"[{section}] missing required key 'conductance'")
            if not y_map:
                raise ConfigError(f"[{section}] needs at least one y.<mode> admittance")
            try:
                seams.append(SeamSpec(label, y_map, vals["conductance"]))
            except ValueError as exc:
                raise ConfigError(f"[{section}] {exc}") from None
            if vals.get("installed", True):
                installed.append(label)
        elif section.startswith("protocol."):
            pname = section[len("protocol."):]
            vals = {k: _convert(section, k, v, _PROTOCOL_KEYS) for k, v in items.items()}
            ptype = vals.pop("type", pname)
            if ptype not in PROTOCOL_NAMES:
                raise ConfigError(
                    f"[{section}] unknown protocol type {ptype!r}; "
                    f"available: {', '.join(PROTOCOL_NAMES)}"
                )
            kwargs = {
                "protocol": ptype,
                "mode": vals.get("mode"),
                "qubit": vals.get("qubit"),
                "cavity": vals.get("cavity"),
                "readout": vals.get("readout"),
                "detuning_hz": vals.get("detuning"),
                "t_max": vals.get("t_max"),
                "points": vals.get("points", 0),
                "f_start": vals.get("f_start"),
                "f_stop": vals.get("f_stop"),
                "displacement": vals.get("displacement"),
                "t2_override": vals.get("t2"),
                "pulse_bandwidth_hz": vals.get("pulse_bandwidth"),
                "drive_detuning_hz": vals.get("drive_detuning"),
                "power_max": vals.get("power_max", 1.0),
                "noise": vals.get("noise", 0.0),
                "n_peaks": vals.get("n_peaks"),
            }
            try:
                protocols[pname] = ProtocolConfig(**kwargs)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {exc}") from None
        elif section == "output":
            vals = {k: _convert(section, k, v, _OUTPUT_KEYS) for k, v in items.items()}
            output_dir = vals.get("directory", output_dir)
        else:
            raise ConfigError(
                f"unknown section [{section}]; allowed: device, mode.<label>, "
                "cross_kerr, circuit, budget, seam.<label>, protocol.<name>, output"
            )

    if not modes:
        raise ConfigError("config defines no [mode.<label>] sections")
    labels = {m.label for m in modes}
    for a, b in chi_pairs:
        unknown = {a, b} - labels
        if unknown:
            raise ConfigError(f"[cross_kerr] unknown mode(s): {', '.join(sorted(unknown))}")
    for seam in seams:
        unknown = set(seam.y_seam) - labels
        if unknown:
            raise ConfigError(
                f"[seam.{seam.label}] unknown mode(s): {', '.join(sorted(unknown))}"
            )
    for label in budget_omegas:
        if label not in labels:
            raise ConfigError(f"[budget] unknown mode {label!r}")

    return RunConfig(
        name=name,
        seed=seed,
        modes=tuple(modes),
        chi_pairs=chi_pairs,
        circuit=circuit,
        transmon=transmon,
        budget_omegas=budget_omegas,
        seams=tuple(seams),
        installed_seams=tuple(installed),
        protocols=protocols,
        output_dir=output_dir,
        path=str(path),
    )
