"""Command-line entry point: ``ghostfactor <subcommand> ...``.

Exit codes: 0 success, 2 invalid configuration, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

import numpy as np

from . import decoherence_model as dm
from .experiment import CampaignConfig, ConfigError, emit_report, read_config_file, run_campaign
from .filter_function import (
    DEFAULT_BAND,
    ConvergenceError,
    SpectralDensity,
    control_spectrum,
    decay_envelope,
    read_spectrum_csv,
    write_control_spectrum_csv,
    write_decay_envelope_csv,
)
from .number_theory import ReducedResidue, preprocess
from .qubit_sim import PulseSchedule, residue_phases

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# flag name -> (CampaignConfig field, converter)
_FACTORIZE_KEYS = {
    "number": ("n", int),
    "lmax": ("l_max", int),
    "pulses": ("m_max", int),
    "tau": ("tau", float),
    "tpi": ("t_pi", float),
    "t2": ("t2", float),
    "t2-worst": ("t2_worst", float),
    "preprocess": ("preprocess", str),
    "sigma": ("measurement_sigma", float),
    "detune-max": ("detune_max", float),
    "shots": ("shots", int),
    "seed": ("seed", int),
}
_REQUIRED = ("number", "lmax", "pulses", "tau", "tpi", "t2")


def _schedule(args) -> PulseSchedule:
    return PulseSchedule(tau=args.tau, t_pi=args.tpi, m_max=args.pulses)


def _add_timing(p, pulses=True):
    if pulses:
        p.add_argument("--pulses", type=int, required=True, help="pulse count M")
    p.add_argument("--tau", type=float, required=True, help="free evolution per block (ns)")
    p.add_argument("--tpi", type=float, required=True, help="pi-pulse duration (ns)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghostfactor", description="Gauss-sum factorization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factorize", help="run a factorization campaign")
    p.add_argument("--config", help="flat key = value file; keys are flag names")
    p.add_argument("--number", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--pulses", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--tpi", type=float)
    p.add_argument("--t2", type=float)
    p.add_argument("--t2-worst", type=float)
    p.add_argument("--preprocess", choices=("none", "basic", "extended"))
    p.add_argument("--sigma", type=float, help="multiplicative measurement noise")
    p.add_argument("--detune-max", type=float, help="rad/ns; enables Monte Carlo detuning")
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("discernability", help="predicted discernability")
    _add_timing(p)
    p.add_argument("--t2", type=float, required=True)
    p.add_argument("--t2-worst", type=float)

    p = sub.add_parser("mmax", help="pulse-count bound for a target discernability")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--t2", type=float, required=True)
    _add_timing(p, pulses=False)

    p = sub.add_parser("preprocess", help="strip small factors")
    p.add_argument("--number", type=int, required=True)
    p.add_argument("--extended", action="store_true")

    p = sub.add_parser("filter-fn", help="control spectrum R_w and g on a log grid")
    p.add_argument("--residue", required=True, help="P/Q")
    _add_timing(p)
    p.add_argument("--omega-min", type=float, required=True)
    p.add_argument("--omega-max", type=float, required=True)
    p.add_argument("--points", type=int, default=2048)
    p.add_argument("--out", required=True)

    p = sub.add_parser("decay", help="decay envelope exp(-chi) per pulse count")
    p.add_argument("--residue", required=True, help="P/Q")
    _add_timing(p)
    p.add_argument("--spectrum", required=True, help="white, pink or a two-column CSV")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--omega-min", type=float, default=DEFAULT_BAND[0])
    p.add_argument("--omega-max", type=float, default=DEFAULT_BAND[1])
    p.add_argument("--out", required=True)
    return parser


def _campaign_config(args) -> CampaignConfig:
    values: dict[str, str] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for flag in _FACTORIZE_KEYS:
        v = getattr(args, flag.replace("-", "_"))
        if v is not None:
            values[flag] = str(v)
    unknown = set(values) - set(_FACTORIZE_KEYS) - {"out", "format"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required settings: {', '.join('--' + k for k in missing)}")
    kwargs = {}
    for flag, (name, conv) in _FACTORIZE_KEYS.items():
        if flag in values:
            try:
                kwargs[name] = conv(values[flag])
            except ValueError as exc:
                raise ConfigError(f"bad value for {flag}: {values[flag]!r}") from exc
    if args.out is None and "out" in values:
        args.out = values["out"]
    if args.format is None:
        args.format = values.get("format", "json")
    if args.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {args.format!r}")
    return CampaignConfig(**kwargs)


def _cmd_factorize(args) -> int:
    report = run_campaign(_campaign_config(args))
    text = emit_report(report, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"identified factors: {report.identified_factors}")
        print(f"cutoff: {report.cutoff:.6f}")
    return EXIT_OK


def _cmd_discernability(args) -> int:
    tau0 = _schedule(args).tau0
    x = tau0 / args.t2
    print(f"closed_form: {dm.discernability_closed(args.pulses, x):.6f}")
    print(f"exact: {dm.discernability_exact(args.pulses, x):.6f}")
    if args.t2_worst is not None:
        print(f"adjusted: {dm.adjusted_discernability(args.pulses, args.t2, args.t2_worst, tau0):.6f}")
    return EXIT_OK


def _cmd_mmax(args) -> int:
    tau0 = args.tau + args.tpi
    m = dm.m_max(args.target, args.t2, tau0)
    n_bound, log10_n = dm.largest_factorizable(m)
    print(f"m_max: {m}")
    print(f"log10_n_bound: {log10_n:.4f}")
    return EXIT_OK


def _cmd_preprocess(args) -> int:
    rec = preprocess(args.number, extended=args.extended)
    for key, value in asdict(rec).items():
        if value is not None:
            print(f"{key}: {value}")
    return EXIT_OK


def _phases(args) -> np.ndarray:
    r = ReducedResidue.parse(args.residue)
    return residue_phases(r.p, r.q, args.pulses)


def _cmd_filter_fn(args) -> int:
    if not 0 < args.omega_min < args.omega_max or args.points < 2:
        raise ConfigError("need 0 < omega-min < omega-max and points >= 2")
    grid = np.geomspace(args.omega_min, args.omega_max, args.points)
    spec = control_spectrum(grid, args.pulses, _schedule(args), _phases(args))
    write_control_spectrum_csv(spec, args.out)
    return EXIT_OK


def _cmd_decay(args) -> int:
    band = (args.omega_min, args.omega_max)
    if args.spectrum == "white":
        s = SpectralDensity.white(args.sigma, band)
    elif args.spectrum == "pink":
        s = SpectralDensity.pink(args.sigma, band)
    else:
        s = SpectralDensity.tabulated(*read_spectrum_csv(args.spectrum), sigma=args.sigma)
    env = decay_envelope(args.pulses, _schedule(args), _phases(args), s)
    write_decay_envelope_csv(env, args.out)
    return EXIT_OK


_COMMANDS = {
    "factorize": _cmd_factorize,
    "discernability": _cmd_discernability,
    "mmax": _cmd_mmax,
    "preprocess": _cmd_preprocess,
    "filter-fn": _cmd_filter_fn,
    "decay": _cmd_decay,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConvergenceError, dm.InfeasibleTarget, FloatingPointError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
