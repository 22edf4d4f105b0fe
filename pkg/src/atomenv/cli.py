"""Command-line front end: ``atomenv {evolve,sweep,critical}``.

Exit codes: 0 success, 2 configuration error, 3 numerical corruption,
4 no interior maximum in a critical-distance search.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AtomEnvError, NoInteriorMaximum
from .measures import CorrelationRecord
from .model import GeometryConfig, InitialState, wavelengths_to_k0r
from .sweep import MEASURES, NotUnimodal, SweepPlan, find_critical_distance, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NO_MAXIMUM = 0, 2, 3, 4

HEADER = (
    "gamma_t", "k0r", "E_AB", "delta_AB", "C_AB", "I_AB",
    "S_cond", "E_AE", "delta_AE", "theta_opt", "phi_opt",
)

# option name -> (converter, subcommands accepting it)
_COMMON = ("evolve", "sweep", "critical")
OPTIONS = {
    "family": (str, _COMMON),
    "amp2": (float, _COMMON),
    "dipole-angle": (float, _COMMON),
    "omega0": (float, _COMMON),
    "distance-unit": (str, _COMMON),
    "out": (str, _COMMON),
    "format": (str, _COMMON),
    "workers": (int, ("evolve", "sweep")),
    "k0r": (float, ("evolve",)),
    "r-min": (float, ("sweep", "critical")),
    "r-max": (float, ("sweep", "critical")),
    "r-steps": (int, ("sweep",)),
    "gt": (str, _COMMON),
    "t-min": (float, ("evolve", "sweep")),
    "t-max": (float, ("evolve", "sweep")),
    "t-steps": (int, ("evolve", "sweep")),
    "measure": (str, ("critical",)),
}
DEFAULTS = {
    "family": "Phi",
    "amp2": 0.5,
    "dipole-angle": math.pi / 2,
    "omega0": 0.0,
    "distance-unit": "k0r",
    "format": "csv",
    "workers": 1,
    "measure": "E_AE",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    initial: InitialState
    geometry: GeometryConfig
    r_values: tuple
    t_values: tuple
    distance_unit: str
    output_path: str | None
    format: str
    measure: str = "E_AE"
    workers: int = 1

    @property
    def delimiter(self) -> str:
        return "," if self.format == "csv" else "\t"


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def _grid(lo, hi, steps, what):
    if lo is None or hi is None or steps is None:
        raise ConfigError(f"{what} range needs min, max and steps")
    if steps < 1:
        raise ConfigError(f"{what} range is empty (steps={steps})")
    if steps == 1:
        if lo != hi:
            raise ConfigError(f"{what} range with one step needs min == max")
        return [lo]
    if not hi > lo:
        raise ConfigError(f"{what} range is empty (min={lo} >= max={hi})")
    return list(np.linspace(lo, hi, steps))


def build_config(subcommand: str, file_values: dict, flag_values: dict) -> RunConfig:
    """Merge defaults, config-file values and flags (in increasing priority)."""
    merged = {}
    for source in (file_values, flag_values):
        for key, value in source.items():
            if value is None:
                continue
            if subcommand not in OPTIONS[key][1]:
                raise ConfigError(f"option {key!r} does not apply to {subcommand!r}")
            merged[key] = value
    for key, value in DEFAULTS.items():
        if subcommand in OPTIONS[key][1]:
            merged.setdefault(key, value)
    cfg = {}
    for key, value in merged.items():
        conv = OPTIONS[key][0]
        try:
            cfg[key] = conv(value) if not isinstance(value, conv) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc

    if cfg["format"] not in ("csv", "tsv"):
        raise ConfigError(f"format must be csv or tsv, got {cfg['format']!r}")
    unit = cfg["distance-unit"]
    if unit not in ("k0r", "wavelength"):
        raise ConfigError(f"distance-unit must be k0r or wavelength, got {unit!r}")
    if cfg.get("measure", "E_AE") not in MEASURES:
        raise ConfigError(f"measure must be one of {MEASURES}")
    if cfg.get("workers", 1) < 1:
        raise ConfigError("workers must be >= 1")

    try:
        initial = InitialState.from_amp2(cfg["family"], cfg["amp2"])
        geometry = GeometryConfig(1.0, cfg["dipole-angle"], 1.0, cfg["omega0"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if subcommand == "evolve":
        if "k0r" not in cfg:
            raise ConfigError("evolve needs --k0r")
        r_values = [cfg["k0r"]]
    elif subcommand == "sweep":
        r_values = _grid(cfg.get("r-min"), cfg.get("r-max"), cfg.get("r-steps"), "r")
    else:
        if cfg.get("r-min") is None or cfg.get("r-max") is None:
            raise ConfigError("critical needs --r-min and --r-max")
        if not 0 < cfg["r-min"] < cfg["r-max"]:
            raise ConfigError("critical needs 0 < r-min < r-max")
        r_values = [cfg["r-min"], cfg["r-max"]]
    if unit == "wavelength":
        r_values = [float(x) for x in wavelengths_to_k0r(r_values)]

    has_gt = "gt" in cfg
    has_trange = any(k in cfg for k in ("t-min", "t-max", "t-steps"))
    if subcommand == "critical":
        gts = _float_list(cfg.get("gt", ""))
        if len(gts) != 1:
            raise ConfigError("critical needs exactly one --gt value")
        t_values = gts
    elif has_gt and has_trange:
        raise ConfigError("give either --gt or a t range, not both")
    elif has_gt:
        t_values = _float_list(cfg["gt"])
        if not t_values:
            raise ConfigError("empty --gt list")
    else:
        t_values = _grid(cfg.get("t-min"), cfg.get("t-max"), cfg.get("t-steps"), "t")
    if any(t < 0 for t in t_values):
        raise ConfigError("times must be non-negative")

    if subcommand != "critical":
        try:
            SweepPlan(initial, tuple(r_values), tuple(t_values), geometry)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    return RunConfig(
        subcommand=subcommand,
        initial=initial,
        geometry=geometry,
        r_values=tuple(float(r) for r in r_values),
        t_values=tuple(float(t) for t in t_values),
        distance_unit=unit,
        output_path=cfg.get("out"),
        format=cfg["format"],
        measure=cfg.get("measure", "E_AE"),
        workers=cfg.get("workers", 1),
    )


def fmt(value: float) -> str:
    """Nine significant digits, '.' decimal point, no negative zero."""
    value = float(value)
    if value == 0.0:
        value = 0.0
    return format(value, ".9g")


def format_records(records: list[CorrelationRecord], delimiter: str = ",") -> str:
    lines = [delimiter.join(HEADER)]
    for rec in records:
        rec.check()
        lines.append(delimiter.join(fmt(v) for v in rec.as_row()))
    return "\n".join(lines) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def _plan(cfg: RunConfig) -> SweepPlan:
    return SweepPlan(cfg.initial, cfg.r_values, cfg.t_values, cfg.geometry)


def cmd_evolve(cfg: RunConfig) -> int:
    records = run_sweep(_plan(cfg), workers=cfg.workers)
    _emit(format_records(records, cfg.delimiter), cfg.output_path)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    records = run_sweep(_plan(cfg), workers=cfg.workers)
    _emit(format_records(records, cfg.delimiter), cfg.output_path)
    return EXIT_OK


def cmd_critical(cfg: RunConfig) -> int:
    gt = cfg.t_values[0]
    res = find_critical_distance(cfg.initial, cfg.geometry, gt, cfg.measure, cfg.r_values)
    scale = 2 * math.pi if cfg.distance_unit == "wavelength" else 1.0
    print(
        f"gamma_t={fmt(gt)} measure={cfg.measure} "
        f"r_critical={fmt(res.r_critical / scale)} peak={fmt(res.peak_value)}"
    )
    if cfg.output_path is not None:
        d = cfg.delimiter
        rows = [f"k0r{d}{cfg.measure}"]
        rows += [f"{fmt(r)}{d}{fmt(v)}" for r, v in zip(res.scan_r, res.scan_values)]
        _emit("\n".join(rows) + "\n", cfg.output_path)
    return EXIT_OK


COMMANDS = {"evolve": cmd_evolve, "sweep": cmd_sweep, "critical": cmd_critical}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="atomenv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    helps = {
        "evolve": "correlations versus time at one distance",
        "sweep": "correlations on a distance x time grid",
        "critical": "distance maximizing an atom-environment measure",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="key=value file; flags override its entries")
        for key, (conv, cmds) in OPTIONS.items():
            if name in cmds:
                p.add_argument(f"--{key}", dest=key, type=conv if conv is not str else None, default=None)
    return parser


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        flags = {k: v for k, v in vars(args).items() if k in OPTIONS}
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(args.subcommand, file_values, flags)
        return COMMANDS[cfg.subcommand](cfg)
    except ConfigError as exc:
        print(f"atomenv: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoInteriorMaximum, NotUnimodal) as exc:
        print(f"atomenv: {exc}", file=sys.stderr)
        return EXIT_NO_MAXIMUM
    except AtomEnvError as exc:
        print(f"atomenv: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
