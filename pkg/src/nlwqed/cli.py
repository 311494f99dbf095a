"""Command-line interface.

Subcommands: bands, solve, evolve, sweep, cascade, validate. Runs are
driven by TOML config files; `--set dotted.key=value` overrides apply
after the file parse and are echoed, with the fully resolved config, into
the run manifest. Unknown keys are fatal. Angle-valued fields accept
pi-suffixed literals such as "0.05pi".

Exit codes: 0 success, 2 configuration error (with a line/column
diagnostic when the TOML parser provides one), 3 physics error (the error
class name is printed on a single line).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__, report
from .errors import ConfigError, PhysicsError
from .model import (
    CouplingPoint,
    EmitterSpec,
    LatticeSpec,
    WavepacketSpec,
    antisymmetric_three_point,
    band_table,
    small_atom,
    triplon_band,
)
from .hilbert import TruncationRule
from .pga import build_kernel, solve_momentum_space, solve_real_space, sweep_solve
from .propagate import EvolutionConfig
from . import experiments as xp

_PI_LITERAL = re.compile(r"^[+-]?((\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?pi$")


def _coerce_pi(value):
    if isinstance(value, str) and _PI_LITERAL.match(value.strip()):
        text = value.strip()[:-2]
        if text in ("", "+"):
            return math.pi
        if text == "-":
            return -math.pi
        return float(text) * math.pi
    return value


def _normalize(node):
    if isinstance(node, dict):
        return {k: _normalize(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_normalize(v) for v in node]
    return _coerce_pi(node)


# ---------------------------------------------------------------------------
# config schemas: every key a subcommand may consume, nothing else
# ---------------------------------------------------------------------------

_LATTICE = {"n_sites": int, "hopping": float, "nonlinearity": float}
_COUPLING = {"site": int, "strength": float, "phase": float}
_EMITTER = {"detuning": float, "couplings": [_COUPLING]}
_PACKET = {
    "kind": str,
    "center_momentum": float,
    "width": float,
    "center_position": float,
    "clearance_factor": float,
}
_EVOLUTION = {
    "total_time": float,
    "snapshots": int,
    "method": str,
    "tolerance": float,
}

SCHEMAS: dict[str, dict] = {
    "bands": {
        "lattice": _LATTICE,
        "bands": {"points": int, "triplon": bool, "r_max": int, "triplon_points": int},
    },
    "solve": {
        "lattice": _LATTICE,
        "emitter": _EMITTER,
        "solve": {"k0": float, "cutoff": int, "formulation": str},
    },
    "sweep": {
        "lattice": _LATTICE,
        "sweep": {
            "template": str,
            "k0": float,
            "cutoff": int,
            "detuning": float,
            "center": int,
            "refine": bool,
            "g": {"min": float, "max": float, "count": int},
            "phi": {"min": float, "max": float, "count": int},
        },
    },
    "evolve": {
        "lattice": _LATTICE,
        "packet": _PACKET,
        "emitters": [_EMITTER],
        "evolution": _EVOLUTION,
        "observables": {"pair_cutoff": int, "triple_cutoff": int},
    },
    "cascade": {
        "lattice": _LATTICE,
        "packet": _PACKET,
        "emitters": [_EMITTER],
        "evolution": _EVOLUTION,
        "observables": {"pair_cutoff": int, "triple_cutoff": int},
        "truncation": {"max_photon_spread": int},
        "cascade": {
            "preset": str,
            "g1": float,
            "phi1": float,
            "g2": float,
            "phi2": float,
            "detector_offset": int,
            "convergence_tol": float,
            "n_sites": int,
            "packet_width": float,
            "total_time": float,
            "snapshots": int,
            "r_max": int,
        },
    },
    "validate": {"validate": {"quick": bool}},
}


def _check_keys(node, schema, path: str) -> None:
    if isinstance(schema, list):
        if not isinstance(node, list):
            raise ConfigError(f"{path or 'config'}: expected an array of tables")
        for i, item in enumerate(node):
            _check_keys(item, schema[0], f"{path}[{i}]")
        return
    if isinstance(schema, dict):
        if not isinstance(node, dict):
            raise ConfigError(f"{path or 'config'}: expected a table")
        for key, value in node.items():
            if key not in schema:
                raise ConfigError(f"unknown key '{path + '.' if path else ''}{key}'")
            _check_keys(value, schema[key], f"{path}.{key}" if path else key)
        return
    # scalar leaf: numeric widening int -> float is fine
    if schema is float and isinstance(node, (int, float)) and not isinstance(node, bool):
        return
    if schema is int and isinstance(node, int) and not isinstance(node, bool):
        return
    if schema is bool and isinstance(node, bool):
        return
    if schema is str and isinstance(node, str):
        return
    raise ConfigError(f"{path}: expected {schema.__name__}, got {type(node).__name__}")


def load_config(path: str | None, overrides: list[str], subcommand: str) -> dict:
    if path is None:
        config: dict = {}
    else:
        try:
            with open(path, "rb") as fh:
                config = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        dotted, text = item.split("=", 1)
        try:
            value = tomllib.loads(f"v = {text}")["v"]
        except tomllib.TOMLDecodeError:
            value = text  # bare strings (incl. pi literals) pass through
        node = config
        parts = dotted.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path '{dotted}' crosses a non-table")
        node[parts[-1]] = value
    config = _normalize(config)
    _check_keys(config, SCHEMAS[subcommand], "")
    return config


# ---------------------------------------------------------------------------
# builders shared by the subcommands
# ---------------------------------------------------------------------------

def _lattice(config: dict) -> LatticeSpec:
    sec = config.get("lattice", {})
    return LatticeSpec(
        n_sites=int(sec.get("n_sites", 800)),
        hopping=float(sec.get("hopping", 1.0)),
        nonlinearity=float(sec.get("nonlinearity", 6.0)),
    )


def _emitter(sec: dict) -> EmitterSpec:
    cps = tuple(
        CouplingPoint(int(c["site"]), float(c["strength"]), float(c.get("phase", 0.0)))
        for c in sec.get("couplings", [])
    )
    return EmitterSpec(detuning=float(sec["detuning"]), couplings=cps)


def _packet(sec: dict) -> tuple[WavepacketSpec, float]:
    spec = WavepacketSpec(
        kind=sec.get("kind", "gaussian"),
        center_momentum=float(sec.get("center_momentum", math.pi / 2)),
        width=float(sec.get("width", 0.004)),
        center_position=float(sec.get("center_position", 0.0)),
    )
    return spec, float(sec.get("clearance_factor", 5.0))


def _evolution(sec: dict, default_time: float = 300.0) -> EvolutionConfig:
    total = float(sec.get("total_time", default_time))
    snaps = int(sec.get("snapshots", 30))
    times = tuple(np.linspace(total / snaps, total, snaps))
    return EvolutionConfig(
        total_time=total,
        snapshot_times=times,
        method=sec.get("method", "chebyshev"),
        tolerance=float(sec.get("tolerance", 1e-9)),
    )


def _write_manifest(outdir: Path, command: str, config: dict, outputs: list[str], extra=None) -> None:
    manifest = report.build_manifest(command, config, outputs, extra)
    report.write_json(outdir / "manifest.json", manifest)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_bands(config: dict, outdir: Path, threads: int) -> int:
    lattice = _lattice(config)
    sec = config.get("bands", {})
    band = None
    if sec.get("triplon", False):
        band = triplon_band(
            lattice,
            np.linspace(-np.pi, np.pi, int(sec.get("triplon_points", 49))),
            r_max=int(sec.get("r_max", 12)),
        )
    table = band_table(lattice, int(sec.get("points", 201)), band)
    outputs = []
    k = table["momentum"]
    for name in ("single_photon", "doublon", "triplon"):
        if f"{name}_energy" not in table:
            continue
        rows = [
            {"momentum": k[i], "energy": table[f"{name}_energy"][i],
             "group_velocity": table[f"{name}_velocity"][i]}
            for i in range(len(k))
        ]
        outputs.append(str(report.write_csv(
            outdir / f"band_{name}.csv", ["momentum", "energy", "group_velocity"], rows)))
    outputs.append(str(report.fig_bands(outdir / "bands.png", table)))
    _write_manifest(outdir, "bands", config, outputs)
    return 0


def cmd_solve(config: dict, outdir: Path, threads: int) -> int:
    lattice = _lattice(config)
    emitter = _emitter(config["emitter"])
    sec = config.get("solve", {})
    k0 = float(sec.get("k0", math.pi / 2))
    cutoff = int(sec.get("cutoff", 3))
    formulation = sec.get("formulation", "both")
    kernel = build_kernel(emitter, k0, lattice, cutoff)
    payload: dict = {
        "kernel": {
            "sites": kernel.sites.tolist(),
            "size": kernel.size,
            "resonant_momentum": kernel.resonant_momentum,
            "v_photon": kernel.v_photon,
            "v_pair": kernel.v_pair,
            "localization_length": kernel.localization_length,
            "truncation_tail": kernel.truncation_tail,
        }
    }
    if formulation in ("both", "real_space"):
        payload["real_space"] = solve_real_space(kernel).to_dict()
    if formulation in ("both", "momentum_space"):
        payload["momentum_space"] = solve_momentum_space(kernel).to_dict()
    out = report.write_json(outdir / "solve.json", payload)
    _write_manifest(outdir, "solve", config, [str(out)])
    return 0


def _axis(sec: dict, default_min: float, default_max: float, default_count: int):
    return np.linspace(
        float(sec.get("min", default_min)),
        float(sec.get("max", default_max)),
        int(sec.get("count", default_count)),
    )


def cmd_sweep(config: dict, outdir: Path, threads: int) -> int:
    lattice = _lattice(config)
    sec = config.get("sweep", {})
    template = sec.get("template", "antisymmetric_three_point")
    k0 = float(sec.get("k0", math.pi / 2))
    cutoff = int(sec.get("cutoff", 3))
    detuning = float(sec.get("detuning", xp.DETUNING_PAIR))
    center = int(sec.get("center", lattice.n_sites // 2))
    gs = _axis(sec.get("g", {}), 0.02, 0.5, 49)
    outputs = []
    if template == "small_atom":
        factory = lambda g: small_atom(center, g, detuning)
        grid = [{"g": float(g)} for g in gs]
        sweep = sweep_solve(factory, grid, k0, lattice, cutoff, max_workers=threads)
        rows = sweep.rows()
        outputs.append(str(report.write_csv(outdir / "sweep.csv", list(rows[0].keys()), rows)))
        outputs.append(str(report.fig_sweep(outdir / "sweep.png", rows, "g")))
        best = sweep.argmax_conversion()
        summary = {"argmax": rows[best]}
    elif template == "antisymmetric_three_point":
        phis = _axis(sec.get("phi", {}), 0.0, 0.25 * math.pi, 51)
        scenario = xp.Scenario(
            name="sweep",
            lattice=lattice,
            emitters=(antisymmetric_three_point(center, 0.3, 0.05 * math.pi, detuning),),
            wavepacket=WavepacketSpec("plane_wave", k0),
            evolution=EvolutionConfig(total_time=1.0, snapshot_times=(1.0,)),
        )
        opt = xp.run_rga_optimum(
            scenario, gs, phis, cutoff=cutoff,
            refine=bool(sec.get("refine", True)), numeric_verification=False,
        )
        rows = opt.sweep_rows
        outputs.append(str(report.write_csv(outdir / "sweep.csv", list(rows[0].keys()), rows)))
        conv = np.array([row["u_plus2"] for row in rows]).reshape(len(gs), len(phis))
        outputs.append(str(report.fig_heatmap(
            outdir / "sweep.png", gs, phis / math.pi, conv,
            "coupling strength g", "phase step / pi", "forward conversion")))
        summary = opt.summary()
        outputs.append(str(report.write_json(outdir / "optimum.json", summary)))
    else:
        raise ConfigError(f"unknown sweep template '{template}'")
    _write_manifest(outdir, "sweep", config, outputs, extra={"summary": summary})
    return 0


def _scenario_from_config(config: dict, *, need_truncation: bool) -> xp.Scenario:
    lattice = _lattice(config)
    emitters = tuple(_emitter(sec) for sec in config.get("emitters", []))
    if not emitters:
        raise ConfigError("at least one [[emitters]] table is required")
    packet, clearance = _packet(config.get("packet", {}))
    evolution = _evolution(config.get("evolution", {}))
    obs = config.get("observables", {})
    truncation = None
    if "truncation" in config:
        truncation = TruncationRule(int(config["truncation"]["max_photon_spread"]))
    if need_truncation and truncation is None:
        raise ConfigError("cascade runs need [truncation].max_photon_spread")
    return xp.Scenario(
        name="cli_run",
        lattice=lattice,
        emitters=emitters,
        wavepacket=packet,
        evolution=evolution,
        clearance_factor=clearance,
        pair_cutoff=int(obs.get("pair_cutoff", 2)),
        triple_cutoff=int(obs.get("triple_cutoff", 2)),
        truncation=truncation,
    )


def cmd_evolve(config: dict, outdir: Path, threads: int) -> int:
    scenario = _scenario_from_config(config, need_truncation=False)
    extra = None
    if len(scenario.emitters) == 1:
        result = xp.run_evolution_map(scenario)
        run = result.run
        extra = {"kinematics": result.summary()}
    else:
        run = xp.run_numeric(scenario, collect_density=True)
    outputs = xp.write_run_outputs(outdir, scenario, run)
    _write_manifest(outdir, "evolve", config, outputs, extra)
    return 0


def cmd_cascade(config: dict, outdir: Path, threads: int) -> int:
    sec = config.get("cascade", {})
    if "emitters" in config:
        scenario = _scenario_from_config(config, need_truncation=True)
    else:
        params = dict(
            xp.CASCADE_BALANCED if sec.get("preset", "full") == "balanced" else xp.CASCADE_FULL
        )
        for key in ("g1", "phi1", "g2", "phi2"):
            if key in sec:
                params[key] = float(sec[key])
        kwargs = {
            k: sec[k]
            for k in ("n_sites", "packet_width", "total_time", "snapshots", "r_max")
            if k in sec
        }
        scenario = xp.cascade_scenario(params, **kwargs)
    tol = sec.get("convergence_tol")
    result = xp.run_cascade(
        scenario,
        detector_offset=int(sec.get("detector_offset", 12)),
        convergence_tol=float(tol) if tol is not None else None,
    )
    outputs = xp.write_run_outputs(outdir, scenario, result.run)
    outputs.append(str(report.write_json(outdir / "cascade_summary.json", result.summary())))
    _write_manifest(outdir, "cascade", config, outputs, extra={"summary": result.summary()})
    return 0


def cmd_validate(config: dict, outdir: Path, threads: int) -> int:
    from .oracles import validate_suite

    quick = bool(config.get("validate", {}).get("quick", True))
    results = validate_suite(quick=quick)
    for res in results:
        print(res.line())
    payload = {
        r.name: {"passed": r.passed, "detail": r.detail} for r in results
    }
    report.write_json(outdir / "validate.json", payload)
    _write_manifest(outdir, "validate", config, [str(outdir / "validate.json")])
    return 0 if all(r.passed for r in results) else 1


_COMMANDS = {
    "bands": cmd_bands,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "evolve": cmd_evolve,
    "cascade": cmd_cascade,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlwqed",
        description="Bound-state photon conversion in nonlinear waveguides",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--replay", metavar="MANIFEST",
        help="re-run the command recorded in a manifest.json, byte-identically",
    )
    sub = parser.add_subparsers(dest="subcommand")
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML config file")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[],
            metavar="KEY=VALUE", help="dotted-key override, applied after the file",
        )
        p.add_argument("--outdir", default=None, help="output directory (default: ./runs/<cmd>)")
        p.add_argument(
            "--threads", type=int,
            default=int(os.environ.get("NLWQED_THREADS", "1")),
            help="worker pool size for sweep-style subcommands",
        )
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.replay:
            manifest = json.loads(Path(args.replay).read_text())
            subcommand = manifest["command"]
            config = manifest["resolved_config"]
            _check_keys(config, SCHEMAS[subcommand], "")
            outdir = Path(getattr(args, "outdir", None) or Path(args.replay).parent)
            threads = getattr(args, "threads", 1)
        else:
            if not args.subcommand:
                parser.print_help()
                return 2
            subcommand = args.subcommand
            config = load_config(args.config, args.overrides, subcommand)
            outdir = Path(args.outdir or Path("runs") / subcommand)
            threads = args.threads
        outdir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[subcommand](config, outdir, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PhysicsError as exc:
        print(exc.name, file=sys.stderr)
        if getattr(args, "verbose", 0):
            print(str(exc), file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
