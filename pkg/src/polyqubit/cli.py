"""Command-line front end.

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or config
error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .constants import TOLERANCES
from .errors import DomainError, IntegrationError, PolyqubitError
from .experiments import (
    PHASE_SPACE_COLUMNS,
    POPULATION_COLUMNS,
    Experiment,
    GateParams,
    SweepSpec,
    bell_target,
    run_phase_space,
    run_population_trace,
    run_xx_mismatch_sweep,
    run_zz_phase_mismatch_sweep,
)
from .intragates import standard_programs, verify_program
from .output import SCHEMA_VERSION, config_hash, write_csv, write_json
from .polyenc import MAX_P, PolyEncoding

log = logging.getLogger("polyqubit")

OMEGA_CONVENTION = (
    "Omega = g1*g2/delta; populations from |00> follow sin^2(Omega t/2) in the "
    "adiabatic limit; Omega t/pi = 0.5 is the maximally entangled point"
)
SWEEP_COLUMNS = ("parameter", "mean_fidelity", "std_fidelity", "min_fidelity", "n_seeds", "n_failures", "reason")

_TOP_KEYS = {"schema_version", "experiment", "grid", "seeds", "rng_seed", "gate", "samples", "threads", "output"}
_GATE_KEYS = {f.name for f in fields(GateParams)}


class ConfigError(PolyqubitError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


def _grid(raw):
    if raw is None:
        return None
    if isinstance(raw, dict):
        missing = {"start", "stop", "num"} - set(raw)
        if missing:
            raise ConfigError("grid", f"range form needs {sorted(missing)}")
        return tuple(np.linspace(float(raw["start"]), float(raw["stop"]), int(raw["num"])))
    if isinstance(raw, (list, tuple)):
        return tuple(float(x) for x in raw)
    raise ConfigError("grid", "must be a list of numbers or {start, stop, num}")


def load_config(path) -> tuple[SweepSpec, dict]:
    """Parse and validate a YAML run config; returns the spec and raw dict."""
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("path", f"no such file {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("document", f"not valid YAML ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("document", "top level must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    for required in ("schema_version", "experiment"):
        if required not in raw:
            raise ConfigError(required, "missing required field")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {raw['schema_version']!r}")
    try:
        experiment = Experiment(raw["experiment"])
    except ValueError:
        raise ConfigError("experiment", f"unknown experiment {raw['experiment']!r}") from None
    gate_raw = raw.get("gate", {}) or {}
    if not isinstance(gate_raw, dict):
        raise ConfigError("gate", "must be a mapping")
    unknown = set(gate_raw) - _GATE_KEYS
    if unknown:
        raise ConfigError(f"gate.{sorted(unknown)[0]}", "unknown field")
    try:
        gate = GateParams(**gate_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError("gate", str(exc)) from None
    for key in ("seeds", "rng_seed", "samples", "threads"):
        if key in raw and not isinstance(raw[key], int):
            raise ConfigError(key, "must be an integer")
    try:
        spec = SweepSpec(
            experiment,
            _grid(raw.get("grid")),
            raw.get("seeds", 100),
            raw.get("rng_seed", 0),
            gate,
            raw.get("samples", 100),
            raw.get("threads", 1),
        )
    except DomainError as exc:
        raise ConfigError("spec", str(exc)) from None
    return spec, raw


def _output_paths(raw: dict, spec: SweepSpec, out: str | None, config_path) -> tuple[Path, str]:
    section = raw.get("output") or {}
    directory = Path(out or section.get("dir", "."))
    stem = section.get("stem", Path(config_path).stem)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError("output.dir", f"cannot create {directory}: {exc}") from None
    return directory, stem


def _metadata(spec: SweepSpec, chash: str, started: float, extra: dict) -> dict:
    return {
        "software_version": __version__,
        "spec": spec.to_dict(),
        "tolerances": TOLERANCES,
        "omega_convention": OMEGA_CONVENTION,
        "gate_time": spec.gate.gate_time,
        "dt": spec.gate.dt,
        "timestamp": {
            "utc": datetime.now(timezone.utc).isoformat(),
            "wall_time_s": time.perf_counter() - started,
        },
        **extra,
    }


def _apply_overrides(spec: SweepSpec, args) -> None:
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigError("seeds", "must be >= 1")
        spec.seeds = args.seeds
    if args.threads is not None:
        spec.threads = max(1, args.threads)


def cmd_show_encoding(args) -> int:
    enc = PolyEncoding(args.p)
    if args.format == "json":
        print(json.dumps({
            "p": enc.p,
            "labels": list(enc.qubit_labels),
            "levels": [{"index": m, **bits} for m, bits in enc.table()],
            "edges": {k: [list(e) for e in v] for k, v in enc.edge_set.items()},
        }, indent=2))
        return 0
    print(f"p = {enc.p}: {enc.level_count} atomic levels, qubits {' '.join(enc.qubit_labels)}")
    for m, bits in enc.table():
        qubits = " (x) ".join(f"|{b}>_{lab}" for lab, b in bits.items())
        print(f"  |{m}> = {qubits}")
    total = 0
    for label, edges in enc.edge_set.items():
        total += len(edges)
        print(f"  {label} edges: " + " ".join(f"({m},{n})" for m, n in edges))
    print(f"  total edges: {total}")
    return 0


def cmd_verify_gates(args) -> int:
    reports = [verify_program(prog) for prog in standard_programs(args.p)]
    ok = all(r.passed for r in reports)
    if args.format == "json":
        print(json.dumps([asdict(r) for r in reports], indent=2))
    else:
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            print(f"{status}  {r.name:<16} max_error={r.max_error:.3e} unitarity={r.unitarity_error:.3e}")
    return 0 if ok else 1


def cmd_evolve(args) -> int:
    started = time.perf_counter()
    spec, raw = load_config(args.config)
    _apply_overrides(spec, args)
    directory, stem = _output_paths(raw, spec, args.out, args.config)
    chash = config_hash(spec.to_dict())
    if spec.experiment is Experiment.XX_POPULATION:
        trace = run_population_trace(spec)
        path = write_csv(directory / f"{stem}.csv", POPULATION_COLUMNS, trace.rows(), chash)
        extra = {"max_norm_error": float(np.max(trace.norm_error))}
    elif spec.experiment is Experiment.ZZ_PHASE_SPACE:
        per_seed = run_phase_space(spec)
        rows = (
            (float(t), br.label, float(a.real), float(a.imag), seed)
            for seed, branches in per_seed.items()
            for br in branches
            for t, a in zip(br.times, br.alpha)
        )
        path = write_csv(directory / f"{stem}.csv", PHASE_SPACE_COLUMNS, rows, chash)
        closure = max(abs(br.alpha[-1]) for branches in per_seed.values() for br in branches)
        extra = {"max_closure_alpha": float(closure)}
    else:
        raise ConfigError("experiment", "evolve supports xx_population and zz_phase_space")
    write_json(directory / f"{stem}.meta.json", _metadata(spec, chash, started, extra), chash)
    print(f"wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    spec, raw = load_config(args.config)
    _apply_overrides(spec, args)
    directory, stem = _output_paths(raw, spec, args.out, args.config)
    chash = config_hash(spec.to_dict())
    if spec.experiment is Experiment.XX_RABI_MISMATCH:
        records = run_xx_mismatch_sweep(spec)
    elif spec.experiment is Experiment.ZZ_PHASE_MISMATCH:
        records = run_zz_phase_mismatch_sweep(spec)
    else:
        raise ConfigError("experiment", "sweep supports xx_rabi_mismatch and zz_phase_mismatch")
    rows = [tuple(asdict(r)[c] for c in SWEEP_COLUMNS) for r in records]
    if args.format == "json":
        clean = [
            {c: (None if isinstance(v, float) and math.isnan(v) else v) for c, v in zip(SWEEP_COLUMNS, row)}
            for row in rows
        ]
        path = write_json(directory / f"{stem}.json", {"records": clean}, chash)
    else:
        path = write_csv(directory / f"{stem}.csv", SWEEP_COLUMNS, rows, chash)
    target = bell_target(spec.gate, spec.experiment, spec.rng_seed)
    extra = {"bell_target": [[float(z.real), float(z.imag)] for z in target]}
    write_json(directory / f"{stem}.meta.json", _metadata(spec, chash, started, extra), chash)
    failed = sum(1 for r in records if r.n_failures)
    print(f"wrote {path} ({len(records)} points, {failed} failed)")
    return 1 if failed == len(records) else 0


def _p_arg(text: str) -> int:
    p = int(text)
    if not 2 <= p <= MAX_P:
        raise argparse.ArgumentTypeError(f"p must be in 2..{MAX_P}")
    return p


def _p_any(text: str) -> int:
    p = int(text)
    if not 1 <= p <= MAX_P:
        raise argparse.ArgumentTypeError(f"p must be in 1..{MAX_P}")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyqubit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("show-encoding", help="print the level table and hypercube edges")
    enc.add_argument("--p", type=_p_any, default=2)
    enc.add_argument("--format", choices=("text", "json"), default="text")
    enc.set_defaults(func=cmd_show_encoding)

    ver = sub.add_parser("verify-gates", help="check every intra-atomic gate program")
    ver.add_argument("--p", type=_p_arg, default=2)
    ver.add_argument("--format", choices=("text", "json"), default="text")
    ver.set_defaults(func=cmd_verify_gates)

    for name, func, helptext in (
        ("evolve", cmd_evolve, "population trace or phase-space trajectory"),
        ("sweep", cmd_sweep, "mismatch fidelity sweep"),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("config")
        cmd.add_argument("--out")
        cmd.add_argument("--seeds", type=int)
        cmd.add_argument("--threads", type=int)
        cmd.add_argument("--format", choices=("csv", "json"), default="csv")
        cmd.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return 1
    except PolyqubitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
