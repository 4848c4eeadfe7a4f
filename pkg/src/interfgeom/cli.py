"""Command-line scans of the pulled-back metrics over the (M, T) plane.

Example::

    interfgeom scan --model dirac --m -1:1:41 --t 0.1:1.0:10 --bz 201 --out scan.csv

A config file of ``key = value`` lines (``#`` comments allowed) may supply the
same settings; command-line flags win over file values.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bandmodels import get_model
from .errors import ConfigError, GaplessParameter
from .pullback import MetricSample, chern_number, metric_scan

log = logging.getLogger("interfgeom")

CSV_COLUMNS = [
    "M",
    "T",
    "g_interf_classical",
    "g_interf_quantum",
    "g_interf_total",
    "g_bures_classical",
    "g_bures_quantum",
    "g_bures_total",
    "g_fs",
    "gapless_cells",
]
CHERN_COLUMN = "chern"
REFINED_COLUMNS = ["refined_bz_grid", "g_interf_total_refined", "g_bures_total_refined"]
JSON_FORMAT = 1


@dataclass(frozen=True)
class Range:
    lo: float
    hi: float
    steps: int

    def values(self) -> list[float]:
        if self.steps == 1:
            return [self.lo]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.steps)]

    def __str__(self) -> str:
        return f"{self.lo!r}:{self.hi!r}:{self.steps}"


def parse_range(text: str, key: str) -> Range:
    """Parse ``min:max:steps`` (endpoints inclusive)."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"{key} must look like min:max:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{key} must look like min:max:steps, got {text!r}") from None
    if steps < 1:
        raise ConfigError(f"{key} steps must be >= 1")
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ConfigError(f"{key} bounds must be finite")
    return Range(lo, hi, steps)


@dataclass(frozen=True)
class ScanConfig:
    model: str = "dirac"
    m_range: Range = Range(-1.0, 1.0, 41)
    t_range: Range = Range(0.25, 1.0, 4)
    bz_grid: int = 201
    out: str | None = None
    json: str | None = None
    svg_dir: str | None = None
    emit_chern: bool = False
    emit_convergence_pair: bool = False
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.t_range.lo <= 0 or self.t_range.hi <= 0:
            raise ConfigError("temperatures must be positive (t min > 0)")
        if self.bz_grid % 2 == 0:
            raise ConfigError("bz_grid must be odd")
        if self.bz_grid < 3:
            raise ConfigError("bz_grid must be >= 3")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")


_BOOL_WORDS = {"1": True, "true": True, "yes": True, "on": True,
               "0": False, "false": False, "no": False, "off": False}


def _to_bool(value: str, key: str) -> bool:
    try:
        return _BOOL_WORDS[str(value).strip().lower()]
    except KeyError:
        raise ConfigError(f"{key} must be a boolean, got {value!r}") from None


def _to_int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from None


# config-file key -> (ScanConfig field, converter)
_KEYS = {
    "model": ("model", lambda v, k: str(v).strip()),
    "m": ("m_range", parse_range),
    "t": ("t_range", parse_range),
    "bz": ("bz_grid", _to_int),
    "bz_grid": ("bz_grid", _to_int),
    "out": ("out", lambda v, k: str(v).strip()),
    "json": ("json", lambda v, k: str(v).strip()),
    "svg_dir": ("svg_dir", lambda v, k: str(v).strip()),
    "emit_chern": ("emit_chern", _to_bool),
    "emit_convergence_pair": ("emit_convergence_pair", _to_bool),
    "seed": ("seed", _to_int),
    "workers": ("workers", _to_int),
}


def read_config_file(path: str | Path) -> dict:
    """Read ``key = value`` lines into ScanConfig field values."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[scan]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    values = {}
    for key, raw in parser["scan"].items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        name, convert = _KEYS[key]
        values[name] = convert(raw, key)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interfgeom", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    scan = sub.add_parser("scan", help="integrate the metrics over an (M, T) grid")
    scan.add_argument("--config", help="key = value settings file")
    scan.add_argument("--model", help="built-in model name (dirac)")
    scan.add_argument("--m", dest="m", metavar="MIN:MAX:STEPS", help="mass parameter range")
    scan.add_argument("--t", dest="t", metavar="MIN:MAX:STEPS", help="temperature range, T > 0")
    scan.add_argument("--bz", type=int, help="odd Brillouin-zone grid size N (N x N cells)")
    scan.add_argument("--out", help="CSV output path ('-' for stdout)")
    scan.add_argument("--json", help="JSON output path")
    scan.add_argument("--svg-dir", help="directory for SVG heatmaps and line cuts")
    scan.add_argument("--emit-chern", action="store_true", default=None,
                      help="add a lower-band Chern number column")
    scan.add_argument("--emit-convergence-pair", action="store_true", default=None,
                      help="add totals recomputed on a 2N+1 grid")
    scan.add_argument("--seed", type=int, help="recorded in JSON metadata")
    scan.add_argument("--workers", type=int, help="parallel rows (default $INTERFGEOM_WORKERS or 1)")
    return parser


def _glue_ranges(argv: list[str]) -> list[str]:
    """Turn ``--m -1:1:41`` into ``--m=-1:1:41`` so argparse does not read a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--m", "--t"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def parse_config(argv: list[str] | None = None) -> ScanConfig:
    """Build a ScanConfig from ``scan`` arguments plus an optional config file."""
    args = build_parser().parse_args(_glue_ranges(sys.argv[1:] if argv is None else list(argv)))
    return config_from_args(args)


def config_from_args(args: argparse.Namespace) -> ScanConfig:
    values = read_config_file(args.config) if args.config else {}
    flags = {
        "model": args.model,
        "m_range": parse_range(args.m, "m") if args.m is not None else None,
        "t_range": parse_range(args.t, "t") if args.t is not None else None,
        "bz_grid": args.bz,
        "out": args.out,
        "json": args.json,
        "svg_dir": args.svg_dir,
        "emit_chern": args.emit_chern,
        "emit_convergence_pair": args.emit_convergence_pair,
        "seed": args.seed,
        "workers": args.workers,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    return ScanConfig(**values)


def fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


def sample_rows(samples: list[MetricSample]) -> list[list]:
    """One CSV row (base columns only) per scan sample."""
    return [
        [s.M, s.T, s.g_interf.classical, s.g_interf.quantum, s.g_interf.total,
         s.g_bures.classical, s.g_bures.quantum, s.g_bures.total, s.g_fs, s.gapless_cells]
        for s in samples
    ]


def scan_rows(config: ScanConfig) -> tuple[list[str], list[list]]:
    """Compute the scan and return CSV columns and typed rows."""
    model = get_model(config.model)
    Ms, Ts = config.m_range.values(), config.t_range.values()
    log.info("scanning %d x %d cells of %s on a %d^2 grid", len(Ms), len(Ts), model.name, config.bz_grid)
    samples = metric_scan(model, Ms, Ts, config.bz_grid, workers=config.workers)
    columns = list(CSV_COLUMNS)
    rows = sample_rows(samples)
    if config.emit_chern:
        columns.append(CHERN_COLUMN)
        cherns = {}
        for M in Ms:
            try:
                cherns[M] = chern_number(model, M, config.bz_grid)
            except GaplessParameter:
                cherns[M] = None
        for row in rows:
            row.append(cherns[row[0]])
    if config.emit_convergence_pair:
        n2 = 2 * config.bz_grid + 1
        columns.extend(REFINED_COLUMNS)
        fine = metric_scan(model, Ms, Ts, n2, workers=config.workers)
        for row, s in zip(rows, fine):
            row.extend([n2, s.g_interf.total, s.g_bures.total])
    return columns, rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return fmt(value)


def render_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render_json(config: ScanConfig, columns: list[str], rows: list[list]) -> str:
    payload = {
        "format": JSON_FORMAT,
        "model": config.model,
        "m": str(config.m_range),
        "t": str(config.t_range),
        "bz_grid": config.bz_grid,
        "seed": config.seed,
        "rows": [dict(zip(columns, row)) for row in rows],
    }
    return json.dumps(payload, indent=1) + "\n"


def write_svgs(directory: str | Path, columns: list[str], rows: list[list]) -> list[Path]:
    """Static heatmaps of both totals over (M, T) and line cuts at each T."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "interfgeom"
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    col = {c: i for i, c in enumerate(columns)}
    table = np.array([[r[col[c]] for c in ("M", "T", "g_interf_total", "g_bures_total")] for r in rows],
                     dtype=float)
    Ms = np.unique(table[:, 0])
    Ts = np.unique(table[:, 1])
    shape = (len(Ms), len(Ts))
    paths = []
    meta = {"Date": None, "Creator": "interfgeom"}
    for key, label, idx in (("interf", "interferometric", 2), ("bures", "Bures", 3)):
        grid = table[:, idx].reshape(shape)
        fig, ax = plt.subplots(figsize=(6, 4))
        mesh = ax.pcolormesh(Ms, Ts, grid.T, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=f"{label} metric")
        ax.set_xlabel("M")
        ax.set_ylabel("T")
        ax.set_title(f"{label} metric pullback")
        path = directory / f"{key}_heatmap.svg"
        fig.savefig(path, format="svg", metadata=meta)
        plt.close(fig)
        paths.append(path)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    for j, T in enumerate(Ts):
        axes[0].plot(Ms, table[:, 2].reshape(shape)[:, j], label=f"T={T:g}")
        axes[1].plot(Ms, table[:, 3].reshape(shape)[:, j], label=f"T={T:g}")
    for ax, title in zip(axes, ("interferometric", "Bures")):
        ax.set_xlabel("M")
        ax.set_title(title)
        ax.legend(fontsize="small")
    path = directory / "line_cuts.svg"
    fig.savefig(path, format="svg", metadata=meta)
    plt.close(fig)
    paths.append(path)
    return paths


def run_scan(config: ScanConfig) -> int:
    """Run a scan and write the requested outputs; returns a process exit code."""
    try:
        columns, rows = scan_rows(config)
    except ValueError as exc:
        print(f"interfgeom: error: {exc}", file=sys.stderr)
        return 1
    text = render_csv(columns, rows)
    try:
        if config.out in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(config.out).write_text(text, encoding="utf-8")
        if config.json:
            Path(config.json).write_text(render_json(config, columns, rows), encoding="utf-8")
        if config.svg_dir:
            write_svgs(config.svg_dir, columns, rows)
    except OSError as exc:
        print(f"interfgeom: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_ranges(sys.argv[1:] if argv is None else list(argv)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        parser.error(str(exc))
    return run_scan(config)


if __name__ == "__main__":
    sys.exit(main())
