"""Command line front end: ``cqec run``, ``cqec sweep`` and ``cqec presets``.

Every output directory gets ``config.txt`` (or one per sweep point), which
``--config`` reads back to reproduce the run bit for bit.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import FIELD_KEYS, PRESETS, SimConfig, _field, config_dict, dump_config, parse_config
from .errors import ConfigError, ContractViolation, NumericalIntegrityError
from .simulator import EnsembleResult, analytic_f1, analytic_f3d, run_ensemble

log = logging.getLogger("cqec")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

# flags that map one to one onto config keys: (flag, type, help)
_SIM_FLAGS = (
    ("code", str, "code name: toy or bitflip3"),
    ("gamma", float, "error rate (1/s)"),
    ("kappa", float, "measurement strength (1/s)"),
    ("lambda", float, "maximum feedback strength (1/s)"),
    ("filter-rate", float, "filter decay rate r (1/s)"),
    ("window", float, "filter window T (s)"),
    ("eta", float, "detection efficiency in (0, 1]"),
    ("dt", float, "time step (s)"),
    ("t-final", float, "simulated time (s)"),
    ("trajectories", int, "number of trajectories"),
    ("seed", int, "master seed"),
    ("threshold", float, "switch a channel on when R < -threshold"),
    ("stride", int, "store every n-th step"),
)


def analytic_columns(code: str) -> list[str]:
    if code == "toy":
        return ["f1_analytic"]
    if code == "bitflip3":
        return ["f1_analytic", "f3d_analytic"]
    return []


def _num(x: float) -> str:
    x = float(x)
    return "0" if x == 0 else repr(x)


def curve_csv(res: EnsembleResult) -> str:
    cfg = res.config
    extra = analytic_columns(cfg.code)
    cols = {"f1_analytic": analytic_f1(cfg.gamma, res.times), "f3d_analytic": analytic_f3d(cfg.gamma, res.times)}
    lines = [",".join(["t", "f_mean", "f_stderr"] + extra)]
    for i, t in enumerate(res.times):
        row = [_num(round(t, 12)), _num(res.mean[i]), _num(res.stderr[i])]
        row += [_num(cols[c][i]) for c in extra]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summary(res: EnsembleResult) -> dict:
    cfg = res.config
    out = res.metadata()
    t = float(res.times[-1])
    baselines = {"f1_analytic": float(analytic_f1(cfg.gamma, t)), "f3d_analytic": float(analytic_f3d(cfg.gamma, t))}
    out["analytic_final"] = {k: baselines[k] for k in analytic_columns(cfg.code)}
    return out


def manifest(cfg: SimConfig, preset: str | None, outputs: list[str]) -> dict:
    return {
        "config": config_dict(cfg),
        "preset": preset,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": outputs,
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _flags(args) -> dict:
    flags = {}
    for name, _, _ in _SIM_FLAGS:
        flags[name] = getattr(args, name.replace("-", "_"))
    flags["mode"] = args.mode
    flags["sme-scheme"] = args.sme_scheme
    if args.early_feedback:
        flags["early-feedback"] = True
    return flags


def _config(args) -> SimConfig:
    return parse_config(args.config, _flags(args), args.preset)


def cmd_run(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %d trajectories, %d steps each", cfg.n_traj, cfg.n_steps)
    res = run_ensemble(cfg, threads=args.threads)
    names = ["curve.csv", "config.txt", "summary.json"]
    _write(out / "curve.csv", curve_csv(res))
    _write(out / "config.txt", dump_config(cfg))
    doc = {"manifest": manifest(cfg, args.preset, [str(out / n) for n in names]), **summary(res)}
    _write(out / "summary.json", json.dumps(doc, indent=2) + "\n")
    f, se = res.final
    print(f"F({res.times[-1]:g}) = {f:.4f} +- {se:.4f}  ({res.n_traj} trajectories, {res.n_aborted} aborted)")
    return EXIT_OK


def _sweep_values(args) -> tuple[str, list[str]]:
    """Parameter key and raw values; a preset's own sweep fills in what is missing."""
    default = PRESETS[args.preset].sweep if args.preset else None
    if args.param:
        param = FIELD_KEYS[_field(args.param)]
    elif default:
        param = FIELD_KEYS[default[0]]
    else:
        raise ConfigError("sweep: --param is required when the preset defines no sweep")
    if args.values:
        values = [v.strip() for v in args.values.split(",") if v.strip()]
    elif default and default[0] == _field(param):
        values = [repr(v) for v in default[1]]
    else:
        raise ConfigError("sweep: --values is required")
    return param, values


def cmd_sweep(args) -> int:
    param, values = _sweep_values(args)
    out = Path(args.out)
    base = _config(args)
    out.mkdir(parents=True, exist_ok=True)
    points = []
    outputs = []
    for raw in values:
        cfg = parse_config(args.config, {**_flags(args), param: raw}, args.preset)
        tag = f"{param}={raw}"
        log.info("sweep point %s", tag)
        res = run_ensemble(cfg, threads=args.threads)
        csv_name, cfg_name = f"curve_{tag}.csv", f"config_{tag}.txt"
        _write(out / csv_name, curve_csv(res))
        _write(out / cfg_name, dump_config(cfg))
        outputs += [str(out / csv_name), str(out / cfg_name)]
        point = summary(res)
        point["value"] = raw
        point["csv"] = csv_name
        points.append(point)
        f, se = res.final
        print(f"{tag}: F({res.times[-1]:g}) = {f:.4f} +- {se:.4f}")
    outputs.append(str(out / "summary.json"))
    doc = {"manifest": manifest(base, args.preset, outputs), "parameter": param, "points": points}
    _write(out / "summary.json", json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name, p in PRESETS.items():
        print(f"{name}: {p.description}")
        cfg = SimConfig(**p.values)
        print("    " + ", ".join(f"{k}={v}" for k, v in config_dict(cfg).items()))
        if p.sweep:
            print(f"    sweep {FIELD_KEYS[p.sweep[0]]}: {','.join(map(str, p.sweep[1]))}")
    return EXIT_OK


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", help="key = value file; flags override it")
    for name, kind, text in _SIM_FLAGS:
        p.add_argument(f"--{name}", type=kind, help=text)
    p.add_argument("--mode", choices=("sse", "sme"))
    p.add_argument("--sme-scheme", choices=("kraus", "euler"))
    p.add_argument("--early-feedback", action="store_true", help="feed back before the filter window fills")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqec", description="continuous quantum error correction trajectories")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="simulate one ensemble")
    _add_sim_flags(run)
    run.set_defaults(func=cmd_run)
    sweep = sub.add_parser("sweep", help="simulate one ensemble per parameter value")
    _add_sim_flags(sweep)
    sweep.add_argument("--param", help="config key to vary, e.g. gamma or eta")
    sweep.add_argument("--values", help="comma separated values")
    sweep.set_defaults(func=cmd_sweep)
    presets = sub.add_parser("presets", help="list the named presets")
    presets.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalIntegrityError as exc:
        print(f"numerical integrity failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
