"""Command-line entry point.

Verbs: design | budget | simulate <name> [...] | fit <file> <model> | verify.
Exit codes: 0 success, 1 fit non-convergence (or failed verify), 2 input error.
All outputs are deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from types import SimpleNamespace

import numpy as np

from . import acceptance, fits
from .circuit import (
    beta,
    cavity_self_kerr,
    coupling_g,
    ej_from_lj,
    g_from_chi,
    transmon_f01_alpha,
    transmon_spectrum,
    zero_point_voltage,
)
from .config import ConfigError, RunConfig, default_config_path, load_config
from .protocols import TraceFormatError, read_trace_csv, run_protocol, write_trace_csv
from .seams import budget_report, write_budget_json

_TWO_PI = 2.0 * math.pi

_FITTERS = {
    "exponential": lambda trace, args: fits.fit_exponential(trace),
    "poissonian_decay": lambda trace, args: fits.fit_poissonian_decay(trace),
    "damped_fringes": lambda trace, args: fits.fit_damped_fringes(trace),
    "lorentzian_multiplet": lambda trace, args: fits.fit_lorentzian_multiplet(
        trace, args.n_peaks or trace.meta.get("n_peaks", 3)
    ),
    "loglog_intercept": lambda trace, args: fits.fit_loglog_intercept(
        list(zip(trace.x, trace.values))
    ),
    "revival_period": lambda trace, args: fits.fit_revival_period(trace),
}


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    raise TypeError(f"not JSON serializable: {type(value)}")


def _out_dir(args, cfg: RunConfig) -> str:
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def _find_transmon_label(cfg: RunConfig) -> str:
    return max(cfg.modes, key=lambda m: abs(m.alpha)).label


def cmd_design(args) -> int:
    cfg = load_config(args.config)
    if cfg.circuit is None:
        raise ConfigError("config has no [circuit] section; nothing to design")
    net = cfg.circuit
    report: dict = {
        "beta": beta(net),
        "v0_volts": zero_point_voltage(net),
        "cavity_frequency_hz": net.cavity_omega / _TWO_PI,
        "g_rad_per_s": coupling_g(net),
        "g_over_2pi_hz": coupling_g(net) / _TWO_PI,
        "e_j_hz": ej_from_lj(net.l_junction),
    }
    if cfg.transmon is not None:
        p = cfg.transmon
        f01, alpha = transmon_f01_alpha(p)
        sweet = transmon_spectrum(type(p)(p.e_j, p.e_c, 0.0, p.charge_cutoff))[1]
        worst = transmon_spectrum(type(p)(p.e_j, p.e_c, 0.5, p.charge_cutoff))[1]
        report["e_c_hz"] = p.e_c
        report["e_j_over_e_c"] = p.ej_over_ec
        report["transmon"] = {
            "f01_hz": f01,
            "anharmonicity_hz": alpha,
            "charge_dispersion_rel": abs(worst - sweet) / sweet,
            "in_transmon_regime": p.in_transmon_regime,
        }

    qubit = _find_transmon_label(cfg)
    system = cfg.system()
    q_omega = system.mode(qubit).omega
    couplings = {}
    for mode in system.modes:
        if mode.label == qubit:
            continue
        chi = system.chi_between(qubit, mode.label)
        if chi == 0.0:
            continue
        delta = q_omega - mode.omega
        entry = {
            "chi_over_2pi_hz": chi / _TWO_PI,
            "detuning_over_2pi_hz": delta / _TWO_PI,
            "g_over_2pi_hz": g_from_chi(chi, delta) / _TWO_PI,
        }
        alpha_q = system.mode(qubit).alpha
        if alpha_q != 0.0:
            entry["self_kerr_over_2pi_hz"] = cavity_self_kerr(chi, alpha_q) / _TWO_PI
        couplings[mode.label] = entry
    report["dispersive"] = couplings

    out = _out_dir(args, cfg)
    path = os.path.join(out, "design.json")
    _write_json(report, path)
    print(f"beta = {report['beta']:.5f}")
    print(f"V0 = {report['v0_volts'] * 1e6:.4f} uV")
    print(f"g/2pi (circuit) = {report['g_over_2pi_hz'] / 1e6:.3f} MHz")
    print(f"E_J = {report['e_j_hz'] / 1e9:.3f} GHz", end="")
    if "e_j_over_e_c" in report:
        print(f"; E_J/E_C = {report['e_j_over_e_c']:.1f}")
        t = report["transmon"]
        print(
            f"transmon f01 = {t['f01_hz'] / 1e9:.4f} GHz, "
            f"anharmonicity = {t['anharmonicity_hz'] / 1e6:.2f} MHz"
        )
    else:
        print()
    for label, entry in couplings.items():
        print(
            f"{label}: chi/2pi = {entry['chi_over_2pi_hz'] / 1e6:.3f} MHz at "
            f"{entry['detuning_over_2pi_hz'] / 1e6:.1f} MHz -> "
            f"g/2pi = {entry['g_over_2pi_hz'] / 1e6:.2f} MHz"
        )
    print(f"wrote {path}")
    return 0


def cmd_budget(args) -> int:
    cfg = load_config(args.config)
    if not cfg.seams:
        raise ConfigError("config has no [seam.<label>] sections; nothing to budget")
    system = cfg.system()
    omegas = {m.label: m.omega for m in system.modes}
    omegas.update(cfg.budget_omegas)
    seam_modes = {m for s in cfg.seams for m in s.y_seam}
    omegas = {k: v for k, v in omegas.items() if k in seam_modes}

    purcell = None
    qubit = _find_transmon_label(cfg)
    for mode in system.modes:
        if mode.label == qubit or mode.t1 is None:
            continue
        chi = system.chi_between(qubit, mode.label)
        if chi == 0.0:
            continue
        # readout = the lossiest coupled cavity (largest kappa)
        kappa = 1.0 / mode.t1
        delta = system.mode(qubit).omega - mode.omega
        g = g_from_chi(chi, delta)
        if purcell is None or kappa > purcell["kappa"]:
            purcell = {"g": g, "delta": delta, "kappa": kappa}

    report = budget_report(cfg.seams, omegas, installed=cfg.installed_seams, purcell=purcell)
    out = _out_dir(args, cfg)
    path = os.path.join(out, "budget.json")
    write_budget_json(report, path)

    for entry in report["seams"]:
        limits = ", ".join(
            f"{mode}: {t * 1e6:.1f} us" for mode, t in sorted(entry["t1_limit_s"].items())
        )
        mark = "installed" if entry["installed"] else "candidate"
        print(f"seam {entry['label']} ({mark}): {limits}")
    for mode, total in sorted(report["combined_t1_s"].items()):
        print(f"combined {mode}: {total * 1e6:.1f} us")
    if "purcell" in report:
        print(f"purcell (qubit via readout): {report['purcell']['t1_s'] * 1e6:.1f} us")
    print(f"wrote {path}")
    return 0


def _simulate_one(cfg: RunConfig, name: str, out: str, seed: int) -> tuple[str, bool]:
    pconf = cfg.protocol(name)
    rng = np.random.default_rng([seed, zlib.crc32(name.encode())])
    outcome = run_protocol(cfg.system(), pconf, rng)
    trace = outcome["trace"]
    csv_path = os.path.join(out, f"{name}.csv")
    write_trace_csv(trace, csv_path)
    written = [csv_path]

    converged = True
    if outcome["fitter"] is not None:
        fitter = _FITTERS[outcome["fitter"]]
        fit_args = SimpleNamespace(n_peaks=outcome["extra"].get("n_peaks"))
        result = fitter(trace, fit_args)
        converged = result.converged
        payload = result.to_dict()
        payload["fitter"] = outcome["fitter"]
        payload["protocol"] = name
        fit_path = os.path.join(out, f"{name}_fit.json")
        _write_json(payload, fit_path)
        written.append(fit_path)
    else:
        extra = dict(outcome["extra"])
        storage = extra.pop("storage_trace", None)
        if storage is not None:
            storage_path = os.path.join(out, f"{name}_storage.csv")
            write_trace_csv(storage, storage_path)
            written.append(storage_path)
        extra["protocol"] = name
        res_path = os.path.join(out, f"{name}_result.json")
        _write_json(extra, res_path)
        written.append(res_path)
    return ", ".join(written), converged


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    out = _out_dir(args, cfg)
    for name in args.protocols:
        if name not in cfg.protocols:
            raise ConfigError(
                f"no protocol {name!r} in config; available: "
                f"{', '.join(sorted(cfg.protocols)) or '(none)'}"
            )

    all_converged = True
    jobs = max(1, args.jobs)
    if jobs == 1 or len(args.protocols) == 1:
        results = [ _simulate_one(cfg, name, out, seed) for name in args.protocols ]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(lambda n: _simulate_one(cfg, n, out, seed), args.protocols)
            )
    for name, (written, converged) in zip(args.protocols, results):
        status = "ok" if converged else "NOT CONVERGED"
        print(f"{name}: {status}; wrote {written}")
        all_converged &= converged
    return 0 if all_converged else 1


def cmd_fit(args) -> int:
    if args.model not in _FITTERS:
        raise ConfigError(
            f"unknown model {args.model!r}; available: {', '.join(sorted(_FITTERS))}"
        )
    trace = read_trace_csv(args.file)
    result = _FITTERS[args.model](trace, args)
    payload = result.to_dict()
    payload["fitter"] = args.model
    payload["source"] = os.path.basename(args.file)
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(
            args.out, os.path.splitext(os.path.basename(args.file))[0] + "_fit.json"
        )
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return 0 if result.converged else 1


def cmd_verify(args) -> int:
    results = acceptance.run_all(printer=print)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if n_pass == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=default_config_path(),
        help="run configuration file (default: bundled device)",
    )
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--jobs", type=int, default=1, help="concurrent protocol runs")

    parser = argparse.ArgumentParser(
        prog="cqedkit",
        description="Design, budget, simulate, and fit a multilayer circuit-QED device",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("design", parents=[common], help="coupling and transmon design report")
    sub.add_parser("budget", parents=[common], help="seam-loss and Purcell budget report")

    p_sim = sub.add_parser("simulate", parents=[common], help="run measurement protocols")
    p_sim.add_argument("protocols", nargs="+", metavar="name")

    p_fit = sub.add_parser("fit", parents=[common], help="fit a trace CSV with a named model")
    p_fit.add_argument("file")
    p_fit.add_argument("model")
    p_fit.add_argument("--n-peaks", dest="n_peaks", type=int, default=None)

    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "design": cmd_design,
        "budget": cmd_budget,
        "simulate": cmd_simulate,
        "fit": cmd_fit,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, TraceFormatError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
