"""Command-line front end.

Exit codes: 0 success, 1 configuration or parse error, 2 verification or
optimization failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    WIRINGS,
    BeamSplitter,
    Circuit,
    CircuitError,
    PhaseShifter,
    compile_circuit,
    load_circuit,
    preset,
    preset_arity,
)
from .conditioning import (
    DetectionPattern,
    SumMismatch,
    TargetPattern,
    herald,
    output_state,
    profile_fidelity,
    success_probability,
    truncation_profile,
)
from .fock import OccupationVector, SingleModeInput
from .literals import parse_list, parse_number
from .optimizer import (
    REPRODUCED,
    OptimizationProblem,
    OptimizeConfig,
    optimize,
    verify_catalog,
)

EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2
SIG_DIGITS = 12


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Output formatting


def fmt(x: float) -> float:
    """Round to 12 significant digits; also folds -0.0 into 0.0."""
    if x is None or not math.isfinite(x):
        return x
    v = float(f"{x:.{SIG_DIGITS}g}")
    return v + 0.0


def cfmt(z: complex) -> list:
    return [fmt(z.real), fmt(z.imag)]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return cfmt(complex(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(obj, indent: int) -> str:
    # objects and lists of containers are broken over lines, scalar lists stay inline
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        items = [pad + _emit(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    return json.dumps(obj)


def dumps(obj) -> str:
    return _emit(_jsonable(obj), 0) + "\n"


# ---------------------------------------------------------------------------
# Config parsing


def parse_signal(text: str) -> SingleModeInput:
    kind, _, rest = text.partition(":")
    try:
        if kind == "coherent":
            parts = rest.split(":")
            alpha = complex(parts[0].replace(" ", "")) if "j" in parts[0] else parse_number(parts[0])
            cutoff = int(parts[1]) if len(parts) > 1 and parts[1] else None
            return SingleModeInput.coherent(alpha, cutoff)
        if kind == "fock":
            return SingleModeInput.fock(int(rest))
        if kind == "custom":
            with open(rest) as fh:
                raw = json.load(fh)
            gammas = [complex(v[0], v[1]) if isinstance(v, list) else parse_number(v) for v in raw]
            return SingleModeInput.custom(gammas)
    except (ValueError, IndexError, OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"--signal {text!r}: {exc}") from exc
    raise ConfigError(f"--signal {text!r}: expected coherent:ALPHA[:CUTOFF], fock:K or custom:FILE")


def parse_target(text: str) -> TargetPattern:
    parts = text.split(":")
    try:
        if parts[0] == "trunc" and len(parts) == 2:
            return TargetPattern.truncation(int(parts[1]))
        if parts[0] == "punch" and len(parts) == 3:
            return TargetPattern.punch(int(parts[1]), [int(k) for k in parts[2].split(",") if k])
        if parts[0] == "fock" and len(parts) == 3:
            return TargetPattern.fock(int(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"--target {text!r}: {exc}") from exc
    raise ConfigError(f"--target {text!r}: expected trunc:D, punch:D:K1,K2 or fock:D:K")


def parse_counts(text: str, flag: str) -> OccupationVector:
    try:
        return OccupationVector(int(v) for v in text.replace("[", "").replace("]", "").split(","))
    except ValueError as exc:
        raise ConfigError(f"{flag} {text!r}: {exc}") from exc


def parse_free(text: str) -> tuple[list[int], list[int]]:
    """``T1,T4,xi4`` -> 0-based slots within the preset's parameter lists."""
    t_slots, x_slots = [], []
    for tok in [t.strip() for t in text.split(",") if t.strip()]:
        if tok.lower().startswith("xi"):
            x_slots.append(tok[2:])
        elif tok.upper().startswith("T"):
            t_slots.append(tok[1:])
        else:
            raise ConfigError(f"--free: cannot parse {tok!r}")
    return t_slots, x_slots


@dataclass
class RunConfig:
    command: str
    circuit: Circuit | None = None
    preset: str | None = None
    t2: list | None = None
    xi: list | None = None
    signal: SingleModeInput = field(default_factory=lambda: SingleModeInput.coherent(1.0))
    ancilla: OccupationVector | None = None
    detection: OccupationVector | None = None
    target: TargetPattern | None = None
    starts: int = 50
    seed: int = 0
    free: str | None = None
    wirings: list | None = None
    entries: list | None = None
    sweep: str | None = None
    output_format: str = "json"
    out: str | None = None


def _preset_numbers(name: str) -> list[int]:
    return [1, 4] if name == "qsd6" else [1, 2, 3, 4, 5]


def build_config(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.output_format = getattr(args, "format", "json") or "json"
    cfg.out = getattr(args, "out", None)
    cfg.seed = getattr(args, "seed", 0) or 0
    if getattr(args, "starts", None) is not None:
        if args.starts < 1:
            raise ConfigError("--starts must be >= 1")
        cfg.starts = args.starts
    if cfg.command in ("simulate", "optimize", "sweep"):
        circuit_file = getattr(args, "circuit", None)
        if circuit_file and args.preset:
            raise ConfigError("use either --circuit or --preset, not both")
        if not circuit_file and not args.preset:
            raise ConfigError("a circuit is required: --circuit FILE or --preset NAME")
        try:
            if circuit_file:
                if cfg.command == "optimize":
                    raise ConfigError("optimize works on presets; use --preset")
                cfg.circuit = load_circuit(circuit_file)
            else:
                cfg.preset = args.preset
                arity = preset_arity(args.preset)
                cfg.t2 = parse_list(args.t2) if args.t2 else [1.0] * arity
                cfg.xi = parse_list(args.xi) if args.xi else [0.0] * arity
                cfg.circuit = preset(args.preset, cfg.t2, cfg.xi)
        except (CircuitError, ValueError, OSError) as exc:
            raise ConfigError(str(exc)) from exc
        n = cfg.circuit.num_modes
        cfg.ancilla = (
            parse_counts(args.ancilla, "--ancilla") if args.ancilla else OccupationVector([1] * (n - 1))
        )
        cfg.detection = parse_counts(args.detect, "--detect") if args.detect else cfg.ancilla
        if len(cfg.ancilla) != n - 1 or len(cfg.detection) != n - 1:
            raise ConfigError(f"--ancilla and --detect need {n - 1} entries for a {n}-mode circuit")
        if cfg.detection.total() != cfg.ancilla.total():
            raise ConfigError(
                f"--detect total {cfg.detection.total()} differs from --ancilla total "
                f"{cfg.ancilla.total()}"
            )
        d = cfg.ancilla.total() + 1
        cfg.target = parse_target(args.target) if args.target else TargetPattern.truncation(d)
        if cfg.target.d != d:
            raise ConfigError(f"--target dimension {cfg.target.d} does not match d={d}")
        if getattr(args, "signal", None):
            cfg.signal = parse_signal(args.signal)
    if cfg.command == "optimize":
        cfg.free = args.free
    if cfg.command == "sweep":
        cfg.sweep = args.sweep
    if cfg.command == "verify":
        cfg.wirings = [w for w in args.wirings.split(",") if w] if args.wirings else None
        cfg.entries = [e for e in args.entries.split(",") if e] if args.entries else None
    return cfg


# ---------------------------------------------------------------------------
# Commands


def _profile_report(circuit: Circuit, cfg: RunConfig, full_simulation: bool) -> dict:
    det = DetectionPattern(cfg.detection)
    prof = truncation_profile(circuit, cfg.ancilla, det)
    s = compile_circuit(circuit)
    report: dict = {
        "modes": circuit.num_modes,
        "scattering_matrix": [[complex(v) for v in row] for row in s],
        "ancilla": list(cfg.ancilla),
        "detection": list(cfg.detection),
        "d": prof.d,
        "target": cfg.target.label(),
        "profile": [complex(v) for v in prof.c],
    }
    heralds = prof.norm2() > 0
    report["profile_fidelity"] = profile_fidelity(prof, cfg.target) if heralds else None
    report["probability"] = success_probability(prof, cfg.signal)
    if heralds:
        try:
            state, ideal = output_state(prof, cfg.signal, cfg.target)
            report["output_state"] = [complex(v) for v in state.coefficients(prof.d)]
            report["ideal_fidelity"] = ideal
        except ValueError:
            report["output_state"] = []
            report["ideal_fidelity"] = None
    else:
        report["output_state"] = []
        report["ideal_fidelity"] = None
    report["signal"] = {
        "kind": cfg.signal.kind,
        "cutoff": cfg.signal.cutoff,
        "tail_mass": cfg.signal.tail_mass(),
    }
    if cfg.signal.kind == "coherent":
        report["signal"]["alpha"] = complex(cfg.signal.alpha)
    if full_simulation:
        _, p_full = herald(circuit, cfg.ancilla, det, cfg.signal)
        report["simulated_probability"] = p_full
    return report


def cmd_simulate(cfg: RunConfig) -> tuple[int, str]:
    report = _profile_report(cfg.circuit, cfg, full_simulation=True)
    return EXIT_OK, dumps(report)


def cmd_verify(cfg: RunConfig) -> tuple[int, str, str]:
    try:
        rep = verify_catalog(cfg.wirings, cfg.entries)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc
    status = rep.best_status()
    six_port = [c.entry for c in rep.checks if c.wiring == "qsd6"]
    ok = all(status[e] == REPRODUCED for e in six_port)
    rows = [
        {
            "entry": c.entry,
            "wiring": c.wiring,
            "status": c.status,
            "fidelity": c.fidelity,
            "infidelity": 1.0 - c.fidelity,
            "probability": c.probability,
            "profile": c.profile,
        }
        for c in rep.checks
    ]
    payload = {
        "reference_signal": {"kind": "coherent", "alpha": 1.0, "cutoff": rep.reference_signal.cutoff},
        "checks": rows,
        "reproduced_by": rep.reproduced_by(),
        "best_status": status,
        "consistency_error": rep.consistency_error(),
        "six_port_ok": ok,
    }
    lines = [f"{'entry':<12} {'wiring':<11} {'status':<10} {'1-F':>10} {'P(alpha=1)':>12}"]
    for c in rep.checks:
        lines.append(
            f"{c.entry:<12} {c.wiring:<11} {c.status:<10} {1 - c.fidelity:>10.2e} {c.probability:>12.6f}"
        )
    lines.append("")
    for entry, ws in rep.reproduced_by().items():
        lines.append(f"{entry:<12} reproduced by: {', '.join(ws) if ws else '-'}")
    if cfg.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["entry", "wiring", "status", "fidelity", "probability"])
        for c in rep.checks:
            writer.writerow([c.entry, c.wiring, c.status, fmt(c.fidelity), fmt(c.probability)])
        text = buf.getvalue()
    else:
        text = dumps(payload)
    return (EXIT_OK if ok else EXIT_FAILED), text, "\n".join(lines) + "\n"


def _problem_from_config(cfg: RunConfig) -> OptimizationProblem:
    numbers = _preset_numbers(cfg.preset)
    if cfg.free is None:
        free_t2 = free_xi = None
    else:
        t_names, x_names = parse_free(cfg.free)
        try:
            free_t2 = [numbers.index(int(v)) for v in t_names]
            free_xi = [numbers.index(int(v)) for v in x_names]
        except ValueError as exc:
            raise ConfigError(f"--free {cfg.free!r}: valid indices are {numbers}") from exc
    try:
        return OptimizationProblem(
            cfg.preset,
            cfg.ancilla,
            cfg.detection,
            cfg.target,
            t2=tuple(cfg.t2),
            xi=tuple(cfg.xi),
            free_t2=free_t2,
            free_xi=free_xi,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_optimize(cfg: RunConfig) -> tuple[int, str]:
    problem = _problem_from_config(cfg)
    sol = optimize(problem, OptimizeConfig(starts=cfg.starts, seed=cfg.seed))
    payload = sol.to_dict()
    payload["ancilla"] = list(cfg.ancilla)
    payload["detection"] = list(cfg.detection)
    return (EXIT_OK if sol.feasible else EXIT_FAILED), dumps(payload)


def _parse_sweep(text: str):
    """``T4=0:1:101``; several names (``T2,T4=...``) are swept together."""
    names, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or len(parts) != 3:
        raise ConfigError(f"--sweep {text!r}: expected NAME=a:b:steps, e.g. T4=0:1:101")
    try:
        a, b, steps = parse_number(parts[0]), parse_number(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"--sweep {text!r}: {exc}") from exc
    if steps < 1:
        raise ConfigError("--sweep needs at least one step")
    swept = []
    for name in [n.strip() for n in names.split(",")]:
        if name.upper().startswith("T") and name[1:].isdigit():
            swept.append(("t2", "B" + name[1:]))
        elif name.lower().startswith("xi") and name[2:].isdigit():
            swept.append(("xi", "P" + name[2:]))
        else:
            raise ConfigError(f"--sweep parameter {name!r}: use T<k> or xi<k>")
    kinds = {k for k, _ in swept}
    if len(kinds) != 1:
        raise ConfigError("--sweep parameters swept together must all be T or all be xi")
    if "t2" in kinds and not (0 <= min(a, b) and max(a, b) <= 1):
        raise ConfigError("--sweep transmittance range must lie in [0, 1]")
    grid = [a] if steps == 1 else list(np.linspace(a, b, steps))
    return swept, grid


def _with_parameters(circuit: Circuit, swept, value: float) -> Circuit:
    labels = {label: kind for kind, label in swept}
    elements = []
    for el in circuit.elements:
        kind = labels.pop(el.label, None)
        if kind == "t2":
            el = BeamSplitter(el.mode_a, el.mode_b, float(value), el.label)
        elif kind == "xi":
            el = PhaseShifter(el.mode, float(value), el.label)
        elements.append(el)
    if labels:
        raise ConfigError(f"circuit has no element labelled {', '.join(labels)}")
    return Circuit(circuit.num_modes, tuple(elements))


def cmd_sweep(cfg: RunConfig) -> tuple[int, str]:
    if not cfg.sweep:
        raise ConfigError("sweep needs --sweep NAME=a:b:steps")
    swept, grid = _parse_sweep(cfg.sweep)
    d = cfg.ancilla.total() + 1
    header = ["param", "fidelity", "probability"]
    for n in range(d):
        header += [f"c{n}_re", f"c{n}_im"]
    det = DetectionPattern(cfg.detection)
    rows = []
    for value in grid:
        circuit = _with_parameters(cfg.circuit, swept, value)
        prof = truncation_profile(circuit, cfg.ancilla, det)
        # an unheralded point has no defined fidelity: null in JSON, empty in CSV
        fid = fmt(profile_fidelity(prof, cfg.target)) if prof.norm2() > 0 else None
        row = [fmt(value), fid, fmt(success_probability(prof, cfg.signal))]
        for c in prof.c:
            row += cfmt(complex(c))
        rows.append(row)
    if cfg.output_format == "json":
        return EXIT_OK, dumps([dict(zip(header, r)) for r in rows])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return EXIT_OK, buf.getvalue()


# ---------------------------------------------------------------------------
# Argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_circuit_flags(p):
    p.add_argument("--circuit", help="circuit JSON file")
    p.add_argument("--preset", help="qsd6, " + ", ".join(WIRINGS))
    p.add_argument("--t2", help="comma-separated transmittances, e.g. 1/3,1/4,1,1/3,1/2")
    p.add_argument("--xi", help="comma-separated phases, e.g. 0,0,0,0,pi/2")
    p.add_argument("--signal", help="coherent:ALPHA[:CUTOFF] | fock:K | custom:FILE")
    p.add_argument("--ancilla", help="ancilla photon counts on modes 1..N-1")
    p.add_argument("--detect", help="required counts on output modes 2..N")
    p.add_argument("--target", help="trunc:D | punch:D:K1,K2 | fock:D:K")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtruncate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="profile, probability and output state for one setup")
    _add_circuit_flags(p)
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--out")

    p = sub.add_parser("verify", help="check the solution catalog against eight-port wirings")
    p.add_argument("--wirings", help="comma-separated eight-port wirings (default: all)")
    p.add_argument("--entries", help="comma-separated catalog entries (default: all)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")

    p = sub.add_parser("optimize", help="search parameters realizing a target")
    _add_circuit_flags(p)
    p.add_argument("--free", help="free parameters, e.g. T1,T4,xi4 (default: all)")
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--starts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="CSV scan of one parameter")
    _add_circuit_flags(p)
    p.add_argument("--sweep", required=True, help="NAME=a:b:steps, e.g. T4=0:1:101 or T2,T4=0:1:11")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    return parser


def run(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        table = None
        if cfg.command == "simulate":
            code, text = cmd_simulate(cfg)
        elif cfg.command == "verify":
            code, text, table = cmd_verify(cfg)
        elif cfg.command == "optimize":
            code, text = cmd_optimize(cfg)
        else:
            code, text = cmd_sweep(cfg)
    except (ConfigError, SumMismatch) as exc:
        print(f"qtruncate {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if table:
        sys.stderr.write(table)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
