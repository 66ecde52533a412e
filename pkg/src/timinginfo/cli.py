"""Command-line front end.

Exit codes: 0 success, 1 a checked inequality or invariant failed, 2 bad usage or I/O.
A JSON config file may set any flag (keys use underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from . import __version__
from .bounds import SLACK, run_bound_suite, write_csv
from .broadcastopt import (
    conjecture_probe,
    measure_prepare_baseline,
    optimize_broadcast,
    symmetric_cloner_map,
    broadcast_objective,
    trivial_split_map,
)
from .covariant import (
    PAULI_X,
    CovarianceViolation,
    build_extension,
    equatorial_orbit_states,
    phase_covariant_clone,
    shift_decompose,
)
from .infomeasures import InfoValue, holevo_information, orbit_ensemble, timing_information
from .io import InputError, channel_from_json, dump_json, hamiltonian_from_json, load_json, state_from_json
from .qcore import DimensionError, HamiltonianSpec, PureState, StateEnsemble, random_density
from .thermo import THERMO_CSV_FIELDS, PassivityViolation, run_thermo_suite

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "input": None,
    "hamiltonian": None,
    "samples": None,
    "instances": None,
    "seed": 0,
    "restarts": 20,
    "dims": None,
    "unit": "bits",
    "out": None,
    "kt": 1.0,
    "window": 1,
    "workers": 1,
    "ensemble": "orbit",
}

class UsageError(Exception):
    pass


def fmt(value: float, unit: str) -> str:
    v = InfoValue(value).in_units(unit)
    # Avoid printing "-0.0000" for round-off below zero.
    if abs(v) < 5e-5:
        v = 0.0
    return f"{v:.4f} {'bit' if unit == 'bits' else 'nats'}"


def parse_dims(text) -> tuple[int, int, int]:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(",")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"--dims expects three integers a,b,e, got {text!r}") from exc
    if len(dims) != 3 or min(dims) < 1:
        raise UsageError(f"--dims expects three positive integers a,b,e, got {text!r}")
    return dims


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        data = load_json(args.config)
        if not isinstance(data, dict):
            raise InputError("config file must hold a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(data)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["unit"] not in ("bits", "nats"):
        raise UsageError("unit must be 'bits' or 'nats'")
    if cfg["dims"] is not None:
        cfg["dims"] = parse_dims(cfg["dims"])
    for key in ("samples", "instances", "restarts", "window", "workers"):
        if cfg[key] is not None and int(cfg[key]) < 1:
            raise UsageError(f"{key} must be positive")
    if not float(cfg["kt"]) > 0:
        raise UsageError("kt must be positive")
    return cfg


def _load_hamiltonian(cfg, default_dim: int | None = None) -> HamiltonianSpec:
    if cfg["hamiltonian"]:
        return hamiltonian_from_json(load_json(cfg["hamiltonian"]))
    if default_dim is None:
        raise UsageError("--hamiltonian is required")
    return HamiltonianSpec.diagonal(np.arange(default_dim, dtype=float))


def cmd_timing_info(cfg) -> int:
    if not cfg["input"]:
        raise UsageError("--input (state file) is required")
    rho = state_from_json(load_json(cfg["input"]))
    h = _load_hamiltonian(cfg)
    if h.dim != rho.dim:
        raise InputError(f"state dimension {rho.dim} does not match Hamiltonian dimension {h.dim}")
    info = timing_information(rho, h)
    print(f"timing information: {fmt(info, cfg['unit'])}")
    if cfg["samples"]:
        if not h.is_integer:
            raise InputError("orbit sampling needs an integer spectrum")
        orbit = holevo_information(orbit_ensemble(rho, h, int(cfg["samples"])))
        print(f"orbit Holevo information ({cfg['samples']} samples): {fmt(orbit, cfg['unit'])}")
        if abs(orbit - info) > 1e-8:
            print("orbit estimate disagrees with the dephasing formula", file=sys.stderr)
            return EXIT_VIOLATION
    return EXIT_OK


def cmd_cloner_demo(cfg) -> int:
    samples = int(cfg["samples"] or 64)
    unit = cfg["unit"]
    points = equatorial_orbit_states(samples)
    originals = StateEnsemble.uniform([PureState(np.array([1.0, x + 1j * y]) / math.sqrt(2)).density() for x, y in points])
    copies = StateEnsemble.uniform([phase_covariant_clone(p) for p in points])
    info_orig = holevo_information(originals)
    info_copy = holevo_information(copies)
    avg = info_copy
    delta = info_orig - avg
    economical = broadcast_objective(symmetric_cloner_map(), originals)
    print(f"orbit samples: {samples}")
    print(f"original information: {fmt(info_orig, unit)}")
    print(f"per-copy information: {fmt(info_copy, unit)}")
    print(f"average information: {fmt(avg, unit)}")
    print(f"broadcasting loss: {fmt(delta, unit)}")
    print(f"ancilla-free cloner average: {fmt(economical.avg, unit)}")
    if cfg["out"]:
        dump_json({
            "samples": samples,
            "unit": unit,
            "original": InfoValue(info_orig).in_units(unit),
            "per_copy": InfoValue(info_copy).in_units(unit),
            "average": InfoValue(avg).in_units(unit),
            "delta": InfoValue(delta).in_units(unit),
            "ancilla_free_average": economical.avg.in_units(unit),
        }, cfg["out"])
    ok = info_copy <= info_orig + 1e-9 and economical.avg <= info_orig + 1e-9
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_bounds_verify(cfg) -> int:
    instances = int(cfg["instances"] or 1000)
    rows = run_bound_suite(instances, int(cfg["seed"]), workers=int(cfg["workers"]))
    if cfg["out"]:
        write_csv(rows, cfg["out"])
    bad = [r for r in rows if r["violations"]]
    tightest = min(r["margin"] for r in rows)
    print(f"instances: {instances}")
    print(f"seed: {cfg['seed']}")
    print(f"violations: {len(bad)} (slack {SLACK:g})")
    print(f"smallest deficit-minus-bound margin: {tightest:.3e} nats")
    for r in bad[:10]:
        print(f"  instance {r['index']} (seed {r['seed']}): {r['violations']}", file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_extend_channel(cfg) -> int:
    if not cfg["input"]:
        raise UsageError("--input (channel file) is required")
    g = channel_from_json(load_json(cfg["input"]))
    h = _load_hamiltonian(cfg, default_dim=g.dim_in)
    if h.dim != g.dim_in or g.dim_in != g.dim_out:
        raise InputError("channel must act on the Hamiltonian's space")
    try:
        sk = shift_decompose(g, h)
    except CovarianceViolation as exc:
        print(f"channel is not time-covariant: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    try:
        ext = build_extension(sk, window=int(cfg["window"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    trials = int(cfg["samples"] or 100)
    rng = np.random.default_rng(int(cfg["seed"]))
    recon = max(ext.reconstruction_error(g, random_density(h.dim, rng)) for _ in range(trials))
    checks = {
        "reconstruction error": recon,
        "commutator norm (reachable)": ext.commutator_norm(),
        "unitarity error": ext.unitarity_error(),
        "environment initial energy": ext.initial_energy_residual(),
    }
    print(f"shifts: {' '.join(f'{s:g}' for s in sk.shifts)}")
    print(f"environment dimension: {ext.env_dim}")
    print(f"total dimension: {ext.dim * ext.env_dim}")
    for name, value in checks.items():
        print(f"{name}: {value:.3e}")
    if cfg["out"]:
        dump_json(ext.to_json(), cfg["out"])
    return EXIT_OK if max(checks.values()) < 1e-9 else EXIT_VIOLATION


def _broadcast_ensemble(cfg) -> StateEnsemble:
    if cfg["ensemble"] == "basis":
        h = _load_hamiltonian(cfg, default_dim=2)
        states = []
        for p in h.projections:
            w, v = np.linalg.eigh(p)
            states.extend(PureState(v[:, i]).density() for i in np.flatnonzero(w > 0.5))
        return StateEnsemble.uniform(states)
    if cfg["ensemble"] != "orbit":
        raise UsageError("ensemble must be 'orbit' or 'basis'")
    if cfg["input"]:
        rho = state_from_json(load_json(cfg["input"]))
        h = _load_hamiltonian(cfg, default_dim=rho.dim)
    else:
        h = _load_hamiltonian(cfg, default_dim=2)
        rho = PureState(np.ones(h.dim) / math.sqrt(h.dim)).density()
    if h.dim != rho.dim:
        raise InputError("state and Hamiltonian dimensions differ")
    if not h.is_integer:
        raise InputError("orbit sampling needs an integer spectrum")
    return orbit_ensemble(rho, h, int(cfg["samples"] or 64))


def cmd_broadcast_opt(cfg) -> int:
    unit = cfg["unit"]
    e = _broadcast_ensemble(cfg)
    d = e.dim
    dims = cfg["dims"] or (d, d, 1)
    result = optimize_broadcast(e, dims, restarts=int(cfg["restarts"]), seed=int(cfg["seed"]), workers=int(cfg["workers"]))
    trivial = broadcast_objective(trivial_split_map(d, 1, 1), e)
    print(f"ensemble: {cfg['ensemble']} ({len(e.states)} states, dimension {d})")
    print(f"dims (A, B, E): {dims[0]}, {dims[1]}, {dims[2]}")
    print(f"restarts: {cfg['restarts']} (seed {cfg['seed']})")
    print(f"original information: {fmt(result.info_orig, unit)}")
    print(f"trivial split average: {fmt(trivial.avg, unit)}")
    if d == 2:
        cloner = broadcast_objective(symmetric_cloner_map(), e)
        mp = measure_prepare_baseline(e, [(np.eye(2) + PAULI_X) / 2, (np.eye(2) - PAULI_X) / 2])
        print(f"ancilla-free cloner average: {fmt(cloner.avg, unit)}")
        print(f"sigma_x measure-prepare: {fmt(mp, unit)}")
    print(f"best info A: {fmt(result.info_a, unit)}")
    print(f"best info B: {fmt(result.info_b, unit)}")
    print(f"best average: {fmt(result.avg, unit)}")
    print(f"achieved loss (upper bound on minimal loss): {fmt(result.achieved_delta, unit)}")
    conjecture_probe(result, e)
    if cfg["out"]:
        dump_json(result.to_json(), cfg["out"])
    slack = 1e-6
    ok = result.info_a <= result.info_orig + slack and result.info_b <= result.info_orig + slack
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_thermo(cfg) -> int:
    inputs = int(cfg["instances"] or 100)
    h = _load_hamiltonian(cfg, default_dim=2)
    try:
        rows = run_thermo_suite(inputs, int(cfg["seed"]), kT=float(cfg["kt"]), h=h)
    except (CovarianceViolation, PassivityViolation) as exc:
        print(f"channel suite is not covariant and passive: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    if cfg["out"]:
        write_csv(rows, cfg["out"], THERMO_CSV_FIELDS)
    bad = sum(r["violation"] for r in rows)
    worst_identity = max(abs(r["identity_residual"]) for r in rows)
    channels = sorted({r["channel"] for r in rows})
    print(f"kT: {float(cfg['kt']):g}")
    print(f"channels: {', '.join(channels)}")
    print(f"rows: {len(rows)}")
    print(f"free-energy loss below kT * information loss: {bad}")
    print(f"smallest margin: {min(r['margin'] for r in rows):.3e}")
    print(f"largest decomposition residual: {worst_identity:.3e}")
    return EXIT_VIOLATION if bad or worst_identity > 1e-9 else EXIT_OK


COMMANDS = {
    "timing-info": (cmd_timing_info, "timing information of a state under a Hamiltonian"),
    "cloner-demo": (cmd_cloner_demo, "phase-covariant cloning of the equatorial qubit orbit"),
    "bounds-verify": (cmd_bounds_verify, "Monte-Carlo check of the information-deficit bounds"),
    "extend-channel": (cmd_extend_channel, "energy-conserving unitary extension of a covariant channel"),
    "broadcast-opt": (cmd_broadcast_opt, "search for broadcasting maps"),
    "thermo": (cmd_thermo, "free-energy loss versus timing-information loss"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timinginfo", description="Timing information of quantum clock signals.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with default values for the flags below")
        p.add_argument("--input", help="state or channel JSON file")
        p.add_argument("--hamiltonian", help="Hamiltonian JSON file")
        p.add_argument("--samples", type=int, help="orbit samples or random trial states")
        p.add_argument("--instances", type=int, help="number of random instances")
        p.add_argument("--seed", type=int)
        p.add_argument("--restarts", type=int)
        p.add_argument("--dims", help="output dims a,b,e")
        p.add_argument("--unit", choices=("bits", "nats"))
        p.add_argument("--out", help="output CSV or JSON path")
        p.add_argument("--kt", type=float)
        p.add_argument("--window", type=int, help="environment lattice half-width")
        p.add_argument("--workers", type=int, help="worker processes")
        p.add_argument("--ensemble", choices=("orbit", "basis"), help="broadcast ensemble")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler, _ = COMMANDS[args.command]
    try:
        cfg = resolve_config(args)
        return handler(cfg)
    except (InputError, UsageError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
