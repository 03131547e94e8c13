"""Command-line front end: config parsing, sweeps, CSV/SVG/manifest output.

Commands: sweep-snr, sweep-chains, sweep-depth, convergence, validate.
Configurations are JSON documents (see README for the schema); SNR is given
in dB and converted once here at the boundary.  Exit codes: 0 success,
1 usage/config error, 2 numeric/solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import checks
from .architecture import ReuseArchitecture, default_intra_offsets
from .arrays import ArrayGeometry, ArrayKind
from .channel import ChannelParams
from .errors import ArchitectureError, ConfigError, GeometryError, NumericError
from .evaluation import (EvalUnit, ExperimentSpec, ResultTable,
                         pc_architecture, run_convergence, run_experiment)
from .optimizer import OptimizerConfig
from .svgplot import render_line_svg

_SWEEP_COMMANDS = ("sweep-snr", "sweep-chains", "sweep-depth", "convergence")
_BASELINES = ("none", "upa_pc", "nonupa_pc", "ideal_digital_reuse",
              "ideal_digital_no_reuse")


@dataclass(frozen=True)
class RunConfig:
    """Parsed command-line invocation."""

    command: str
    config_path: Optional[Path]
    output_dir: Optional[Path]
    seed: Optional[int] = None
    trials: Optional[int] = None
    threads: int = 1


class _Ctx:
    """Walks a JSON document tracking the field path for error messages."""

    def __init__(self, doc: dict, path: str = ""):
        if not isinstance(doc, dict):
            raise ConfigError(f"{path or 'config'}: expected an object")
        self.doc = doc
        self.path = path

    def _at(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def get(self, key: str, kind, default=None, required: bool = False):
        if key not in self.doc:
            if required:
                raise ConfigError(f"missing required field {self._at(key)}")
            return default
        value = self.doc[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is not None and not isinstance(value, kind):
            raise ConfigError(
                f"{self._at(key)}: expected {getattr(kind, '__name__', kind)}, "
                f"got {type(value).__name__}")
        return value

    def sub(self, key: str, required: bool = False) -> "_Ctx":
        value = self.get(key, dict, default={}, required=required)
        return _Ctx(value, self._at(key))

    def int_list(self, key: str, required: bool = False) -> list[int]:
        values = self.get(key, list, default=[], required=required)
        out = []
        for i, v in enumerate(values):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{self._at(key)}[{i}]: expected integer")
            out.append(v)
        return out

    def float_list(self, key: str, required: bool = False) -> list[float]:
        values = self.get(key, list, default=[], required=required)
        out = []
        for i, v in enumerate(values):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{self._at(key)}[{i}]: expected number")
            out.append(float(v))
        return out


def _geometry(kind: ArrayKind, n_blocks: int, lo_depth: int,
              block_spacing: float, intra_spacing: float) -> ArrayGeometry:
    if kind is ArrayKind.UPA:
        return ArrayGeometry(ArrayKind.UPA, n_blocks * lo_depth, 1,
                             block_spacing, intra_spacing)
    return ArrayGeometry(ArrayKind.RYDBERG_NON_UPA, n_blocks, lo_depth,
                         block_spacing, intra_spacing)


def _rydberg_geometry(n_blocks: int, lo_depth: int, block_spacing: float,
                      intra_spacing: float) -> ArrayGeometry:
    """LO depth 1 degenerates to the plain UPA over the blocks."""
    if lo_depth == 1:
        return ArrayGeometry(ArrayKind.UPA, n_blocks, 1, block_spacing,
                             intra_spacing)
    return ArrayGeometry(ArrayKind.RYDBERG_NON_UPA, n_blocks, lo_depth,
                         block_spacing, intra_spacing)


def _build_arch(n_blocks: int, lo_depth: int, apd_depth: int,
                resolution_bits: Optional[int],
                intra_spacing: float) -> ReuseArchitecture:
    offsets = default_intra_offsets(n_blocks, lo_depth, intra_spacing)
    return ReuseArchitecture(n_blocks=n_blocks, lo_depth=lo_depth,
                             apd_depth=apd_depth, intra_offsets=offsets,
                             resolution_bits=resolution_bits)


def _arch_entries(ctx: _Ctx, swept_key: Optional[str]) -> list[_Ctx]:
    raw = ctx.get("architectures", list, default=[], required=True)
    if not raw:
        raise ConfigError("architectures: at least one entry required")
    entries = []
    for i, entry in enumerate(raw):
        sub = _Ctx(entry if isinstance(entry, dict) else None,
                   f"architectures[{i}]")
        if swept_key and swept_key in sub.doc:
            raise ConfigError(
                f"{sub.path}.{swept_key}: fixed here; it is the sweep parameter")
        entries.append(sub)
    return entries


def _resolution(entry: _Ctx) -> Optional[int]:
    value = entry.doc.get("resolution_bits", None)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(
            f"{entry.path}.resolution_bits: expected positive integer or null")
    return value


def parse_config(path: Path, command: str,
                 seed_override: Optional[int] = None,
                 trials_override: Optional[int] = None) -> tuple[ExperimentSpec, dict]:
    """Load and validate a JSON experiment configuration.

    Returns the resolved spec plus the effective config document (with any
    seed/trials overrides applied) for the reproducibility manifest.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if seed_override is not None:
        doc["seed"] = seed_override
    if trials_override is not None:
        doc["trials"] = trials_override
    return build_spec(doc, command), doc


def build_spec(doc: dict, command: str) -> ExperimentSpec:
    ctx = _Ctx(doc)
    name = ctx.get("name", str, default="experiment")

    ch = ctx.sub("channel", required=True)
    n_tx = ch.get("n_tx", int, required=True)
    n_clusters = ch.get("n_clusters", int, default=5)
    n_rays = ch.get("n_rays", int, default=10)
    powers = tuple(ch.float_list("cluster_powers")) or (1.0,) * n_clusters
    spread = math.radians(ch.get("angular_spread_deg", float, default=10.0))
    block_spacing = ch.get("block_spacing", float, default=0.5)
    intra_spacing = ch.get("intra_spacing", float,
                           default=0.1 * block_spacing)

    n_blocks = ctx.get("n_blocks", int, required=True)
    n_streams = ctx.get("n_streams", int, required=True)
    snr_db = tuple(ctx.float_list("snr_db",
                                  required=(command in ("sweep-snr",))))
    if command == "sweep-snr" and not snr_db:
        raise ConfigError("snr_db: empty sweep; give at least one SNR point")
    if not snr_db:
        snr_db = (0.0,)
    trials = ctx.get("trials", int, default=500)
    seed = ctx.get("seed", int, required=True)

    sv = ctx.sub("solver")
    solver_cfg = OptimizerConfig(
        epsilon=sv.get("epsilon", float, default=1e-4),
        max_iterations=sv.get("max_iterations", int, default=100))

    baselines = ctx.get("baselines", list, default=[])
    for b in baselines:
        if b not in _BASELINES:
            raise ConfigError(
                f"baselines: unknown baseline {b!r} (choose from {_BASELINES})")
    baselines = [b for b in baselines if b != "none"]
    pc_chains = ctx.get("pc_chains", int)

    try:
        if command in ("sweep-snr", "convergence"):
            units, sweep_param = _units_sweep_snr(
                ctx, command, n_blocks, block_spacing, intra_spacing,
                baselines, pc_chains)
        elif command == "sweep-chains":
            units, sweep_param = _units_sweep_chains(
                ctx, n_blocks, block_spacing, intra_spacing, baselines)
        elif command == "sweep-depth":
            units, sweep_param = _units_sweep_depth(
                ctx, n_blocks, block_spacing, intra_spacing, baselines)
        else:
            raise ConfigError(f"unknown command {command!r}")
    except (GeometryError, ArchitectureError) as exc:
        raise ConfigError(str(exc)) from exc

    reference = next((u.geometry for u in units), None)
    channel = ChannelParams(n_tx=n_tx, rx_geometry=reference,
                            n_clusters=n_clusters, n_rays=n_rays,
                            cluster_powers=powers, angular_spread=spread)
    return ExperimentSpec(channel=channel, units=tuple(units),
                          n_streams=n_streams, snr_db=snr_db, trials=trials,
                          seed=seed, solver=solver_cfg,
                          sweep_param=sweep_param, name=name)


def _reference_depth(ctx: _Ctx, arch_units: list[EvalUnit]) -> int:
    explicit = ctx.get("reference_lo_depth", int)
    if explicit is not None:
        return explicit
    depths = [u.arch.lo_depth for u in arch_units if u.arch is not None]
    return max(depths) if depths else 1


def _baseline_units(ctx: _Ctx, baselines: list[str], n_blocks: int,
                    block_spacing: float, intra_spacing: float,
                    pc_chains: Optional[int], arch_units: list[EvalUnit],
                    sweep_value: Optional[float] = None,
                    ref_depth: Optional[int] = None,
                    chains_override: Optional[int] = None) -> list[EvalUnit]:
    units: list[EvalUnit] = []
    depth = ref_depth if ref_depth is not None else _reference_depth(ctx, arch_units)
    nonupa = _rydberg_geometry(n_blocks, depth, block_spacing, intra_spacing)
    for b in baselines:
        if b == "ideal_digital_no_reuse":
            units.append(EvalUnit(
                label="ideal digital, no reuse",
                kind="ideal_digital",
                geometry=_rydberg_geometry(n_blocks, 1, block_spacing,
                                           intra_spacing),
                sweep_value=sweep_value))
        elif b == "ideal_digital_reuse":
            units.append(EvalUnit(
                label=f"ideal digital, lo_depth={depth}",
                kind="ideal_digital", geometry=nonupa, sweep_value=sweep_value))
        elif b in ("upa_pc", "nonupa_pc"):
            chains = chains_override if chains_override is not None else pc_chains
            if chains is None:
                raise ConfigError(f"baseline {b!r} requires pc_chains")
            n_r = n_blocks * depth
            arch = pc_architecture(n_r, chains)
            if b == "upa_pc":
                geometry = ArrayGeometry(ArrayKind.UPA, n_r, 1, block_spacing,
                                         intra_spacing)
                kind, label = "pc_upa", f"UPA PC, chains={chains}"
            else:
                geometry = nonupa
                kind, label = "pc_nonupa", f"non-UPA PC, chains={chains}"
            units.append(EvalUnit(label=label, kind=kind, geometry=geometry,
                                  arch=arch, solver="altmin",
                                  sweep_value=sweep_value))
    return units


def _units_sweep_snr(ctx: _Ctx, command: str, n_blocks: int,
                     block_spacing: float, intra_spacing: float,
                     baselines: list[str],
                     pc_chains: Optional[int]) -> tuple[list[EvalUnit], str]:
    units: list[EvalUnit] = []
    for entry in _arch_entries(ctx, swept_key=None):
        lo = entry.get("lo_depth", int, default=1)
        apd = entry.get("apd_depth", int, default=1)
        label = entry.get("label", str,
                          default=f"lo_depth={lo}, apd_depth={apd}")
        arch = _build_arch(n_blocks, lo, apd, _resolution(entry), intra_spacing)
        units.append(EvalUnit(
            label=label, kind="rydberg",
            geometry=_rydberg_geometry(n_blocks, lo, block_spacing,
                                       intra_spacing),
            arch=arch, solver=entry.get("solver", str, default="auto")))
    if command == "convergence":
        if baselines:
            raise ConfigError("convergence traces do not take baselines")
    else:
        units.extend(_baseline_units(ctx, baselines, n_blocks, block_spacing,
                                     intra_spacing, pc_chains, units))
    return units, "snr_db"


def _units_sweep_chains(ctx: _Ctx, n_blocks: int, block_spacing: float,
                        intra_spacing: float,
                        baselines: list[str]) -> tuple[list[EvalUnit], str]:
    sweep = ctx.sub("sweep", required=True)
    if sweep.get("param", str, required=True) != "n_chains":
        raise ConfigError("sweep.param must be 'n_chains' for sweep-chains")
    values = sweep.int_list("values", required=True)
    if not values:
        raise ConfigError("sweep.values is empty")
    units: list[EvalUnit] = []
    entries = _arch_entries(ctx, swept_key="apd_depth")
    for chains in values:
        arch_units: list[EvalUnit] = []
        for entry in entries:
            lo = entry.get("lo_depth", int, default=1)
            n_r = n_blocks * lo
            if chains <= 0 or n_r % chains != 0:
                raise ConfigError(
                    f"sweep.values: {chains} chains do not divide N_r={n_r}")
            label = entry.get("label", str, default=f"lo_depth={lo}")
            arch = _build_arch(n_blocks, lo, n_r // chains,
                               _resolution(entry), intra_spacing)
            arch_units.append(EvalUnit(
                label=label, kind="rydberg",
                geometry=_rydberg_geometry(n_blocks, lo, block_spacing,
                                           intra_spacing),
                arch=arch, solver=entry.get("solver", str, default="auto"),
                sweep_value=float(chains)))
        units.extend(arch_units)
        units.extend(_baseline_units(
            ctx, baselines, n_blocks, block_spacing, intra_spacing, None,
            arch_units, sweep_value=float(chains), chains_override=chains))
    return units, "n_chains"


def _units_sweep_depth(ctx: _Ctx, n_blocks: int, block_spacing: float,
                       intra_spacing: float,
                       baselines: list[str]) -> tuple[list[EvalUnit], str]:
    sweep = ctx.sub("sweep", required=True)
    if sweep.get("param", str, required=True) != "lo_depth":
        raise ConfigError("sweep.param must be 'lo_depth' for sweep-depth")
    values = sweep.int_list("values", required=True)
    if not values:
        raise ConfigError("sweep.values is empty")
    bad = [b for b in baselines if b in ("upa_pc", "nonupa_pc")]
    if bad:
        raise ConfigError(
            f"PC baselines {bad} are not supported in sweep-depth")
    units: list[EvalUnit] = []
    entries = _arch_entries(ctx, swept_key="lo_depth")
    for depth in values:
        if depth < 1:
            raise ConfigError(f"sweep.values: lo_depth {depth} must be >= 1")
        arch_units: list[EvalUnit] = []
        for entry in entries:
            apd = entry.get("apd_depth", int, default=1)
            label = entry.get("label", str, default=f"apd_depth={apd}")
            arch = _build_arch(n_blocks, depth, apd, _resolution(entry),
                               intra_spacing)
            arch_units.append(EvalUnit(
                label=label, kind="rydberg",
                geometry=_rydberg_geometry(n_blocks, depth, block_spacing,
                                           intra_spacing),
                arch=arch, solver=entry.get("solver", str, default="auto"),
                sweep_value=float(depth)))
        units.extend(arch_units)
        units.extend(_baseline_units(
            ctx, baselines, n_blocks, block_spacing, intra_spacing, None,
            arch_units, sweep_value=float(depth), ref_depth=depth))
    return units, "lo_depth"


def emit_results(table: ResultTable, output_dir: Path,
                 manifest_config: Optional[dict] = None,
                 command: str = "", value_name: str = "mean_se_bps_hz") -> list[Path]:
    """Write results.csv, results.svg, and manifest.json.

    The CSV is the authoritative output: UTF-8, LF endings, %.12e means.
    """
    if not table.rows:
        raise ConfigError("result table is empty; nothing to write")
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "results.csv"
        lines = ["label,sweep_param,sweep_value,mean_se_bps_hz,stderr,trials,seed"]
        for r in table.rows:
            label = r.label.replace('"', '""')
            label = f'"{label}"' if ("," in r.label or '"' in r.label) else label
            lines.append(
                f"{label},{r.sweep_param},{r.sweep_value:.6g},"
                f"{r.mean_se:.12e},{r.stderr:.12e},{r.trials},{table.seed}")
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8",
                            newline="\n")

        series: dict[str, tuple[list[float], list[float]]] = {}
        for r in table.rows:
            xs, ys = series.setdefault(r.label, ([], []))
            xs.append(r.sweep_value)
            ys.append(r.mean_se)
        svg = render_line_svg([(label, xs, ys) for label, (xs, ys) in series.items()],
                              title=table.name, x_label=table.sweep_param,
                              y_label=value_name)
        svg_path = out / "results.svg"
        svg_path.write_text(svg, encoding="utf-8", newline="\n")

        manifest = {
            "command": command,
            "config": manifest_config,
            "failures": table.failures,
            "name": table.name,
            "seed": table.seed,
            "sweep_param": table.sweep_param,
        }
        manifest_path = out / "manifest.json"
        manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ConfigError(f"cannot write outputs to {out}: {exc}") from exc
    return [csv_path, svg_path, manifest_path]


def validate_command(config_path: Optional[Path] = None) -> int:
    """Run the oracle self-checks, optionally adding the proportional
    equivalence check for each architecture in a config file."""
    archs = [None]
    if config_path is not None:
        spec, _ = parse_config(config_path, "sweep-snr")
        archs = [u.arch for u in spec.units if u.kind == "rydberg"] or [None]
    results = checks.run_all(arch=archs[0])
    for extra in archs[1:]:
        results.append(checks.check_proportional_equivalence(arch=extra))
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        print(f"{r.name.ljust(width)}  {r.status:4s}  {r.detail}")
        failed += r.status == "FAIL"
    print(f"{failed} check(s) failed" if failed else "all checks passed")
    return 1 if failed else 0


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydcomb",
        description="Reuse-architecture array combining simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, blurb in (
            ("sweep-snr", "spectral efficiency vs SNR"),
            ("sweep-chains", "spectral efficiency vs laser-chain count"),
            ("sweep-depth", "spectral efficiency vs LO reuse depth"),
            ("convergence", "solver residual vs iteration")):
        p = sub.add_parser(cmd, help=blurb)
        p.add_argument("--config", required=True, type=Path,
                       help="JSON experiment configuration")
        p.add_argument("--out", required=True, type=Path,
                       help="output directory for results.csv/svg + manifest")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--trials", type=_positive_int, default=None,
                       help="override the config trial count")
        p.add_argument("--threads", type=_positive_int, default=None,
                       help="worker threads (default: SIM_THREADS or 1)")
    v = sub.add_parser("validate", help="run the fast oracle self-checks")
    v.add_argument("--config", type=Path, default=None,
                   help="optionally check the architectures of this config")
    return parser


def run(config: RunConfig) -> int:
    """Execute one parsed invocation; returns the process exit code."""
    if config.command == "validate":
        return validate_command(config.config_path)
    spec, doc = parse_config(config.config_path, config.command,
                             seed_override=config.seed,
                             trials_override=config.trials)
    if config.command == "convergence":
        table = run_convergence(spec, threads=config.threads)
        value_name = "mean_residual"
    else:
        table = run_experiment(spec, threads=config.threads)
        value_name = "mean_se_bps_hz"
    paths = emit_results(table, config.output_dir, manifest_config=doc,
                         command=config.command, value_name=value_name)
    print(f"wrote {', '.join(str(p) for p in paths)}")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    threads = args.__dict__.get("threads")
    if threads is None:
        env = os.environ.get("SIM_THREADS", "")
        threads = int(env) if env.isdigit() and int(env) >= 1 else 1
    config = RunConfig(command=args.command,
                       config_path=getattr(args, "config", None),
                       output_dir=getattr(args, "out", None),
                       seed=getattr(args, "seed", None),
                       trials=getattr(args, "trials", None),
                       threads=threads)
    try:
        return run(config)
    except (ConfigError, GeometryError, ArchitectureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
