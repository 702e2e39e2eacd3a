"""Command-line entry point: ``fireflybeam <subcommand> [options]``.

Subcommands ``classic``, ``cognitive``, ``ris`` and ``wpt`` run a Monte Carlo
experiment and emit one row per (trial, sweep point, solver).  ``pattern``
solves the cognitive scenario once and prints the radiation pattern of the
firefly solution.  ``complexity`` evaluates an operation-count estimate.

Options given in a ``--config`` JSON file override command-line flags.  On
failure a JSON object ``{"error": ..., "type": ...}`` is written to stderr and
the exit status is non-zero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import channels
from .errors import ConfigError, FireflyBeamError
from .harness import (
    ESTIMATE_NAMES,
    ESTIMATE_PARAMETERS,
    ExperimentPlan,
    FASettings,
    complexity_estimate,
    emit,
    radiation_pattern,
    run_experiment,
    solve_fa,
)

_DEFAULT_SOLVERS = {
    "classic": "fa,iterative_printed,iterative_recovered",
    "cognitive": "fa",
    "ris": "fa,ao",
    "wpt": "fa,sca",
}


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fireflies", type=int, help="firefly population N")
    p.add_argument("--generations", type=int, help="firefly generations T")
    p.add_argument("--antennas", type=int, help="BS antennas M_t")
    p.add_argument("--config", help="JSON file whose keys override these flags")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fireflybeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ("classic", "cognitive", "ris", "wpt"):
        p = sub.add_parser(kind, help=f"Monte Carlo run of the {kind} problem")
        _common(p)
        p.add_argument("--trials", type=int, default=1)
        p.add_argument("--users", type=int)
        p.add_argument("--ris-elements", type=int)
        p.add_argument("--sinr-db", type=_floats, help="SINR target(s) in dB; several values form a sweep")
        p.add_argument("--power-dbm", type=_floats, help="power budget(s) in dBm; several values form a sweep")
        p.add_argument("--solvers", default=_DEFAULT_SOLVERS[kind])
        p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("pattern", help="radiation pattern of the cognitive firefly solution")
    _common(p)
    p.add_argument("--angles", type=_floats, default=None,
                   help="comma-separated angles in degrees (default -90..90 step 1)")
    p = sub.add_parser("complexity", help="operation-count estimate")
    p.add_argument("estimate", type=int, choices=sorted(ESTIMATE_PARAMETERS),
                   help="; ".join(f"{k}: {v}" for k, v in ESTIMATE_NAMES.items()))
    p.add_argument("params", nargs="*", help="NAME=VALUE pairs, e.g. T=30 U=2 M_t=4")
    p.add_argument("--config", help="JSON file with parameter values")
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    overrides = channels.load_config(args.config)
    merged = vars(args).copy()
    for key, value in overrides.items():
        merged[key.replace("-", "_")] = value
    return argparse.Namespace(**merged)


def _settings(args) -> FASettings:
    settings = FASettings()
    if args.fireflies is not None:
        settings = replace(settings, population=int(args.fireflies))
    if args.generations is not None:
        settings = replace(settings, generations=int(args.generations))
    return settings


def _scenario_overrides(args) -> dict:
    mapping = {"antennas": "antennas", "users": "users", "ris_elements": "ris_elements"}
    config = {key: int(getattr(args, attr)) for attr, key in mapping.items()
              if getattr(args, attr, None) is not None}
    config.update(getattr(args, "scenario", None) or {})
    return config


def _listify(value):
    if value is None:
        return None
    return [float(v) for v in (value if isinstance(value, (list, tuple)) else [value])]


def _run(args) -> str:
    scenario = _scenario_overrides(args)
    sweep_axis, sweep_values = None, ()
    for axis in ("sinr_db", "power_dbm"):
        values = _listify(getattr(args, axis, None))
        if values is None:
            continue
        if len(values) == 1:
            scenario[axis] = values[0]
        elif sweep_axis is not None:
            raise ConfigError("only one of --sinr-db / --power-dbm may list several values")
        else:
            sweep_axis, sweep_values = axis, tuple(values)
    solvers = args.solvers.split(",") if isinstance(args.solvers, str) else list(args.solvers)
    plan = ExperimentPlan(kind=args.command, trials=int(args.trials),
                          solvers=tuple(s.strip() for s in solvers if s.strip()),
                          sweep_axis=sweep_axis, sweep_values=sweep_values,
                          base_seed=int(args.seed), fa=_settings(args), scenario=scenario,
                          workers=int(args.workers))
    return emit(run_experiment(plan), args.format, args.out)


def _pattern(args) -> str:
    config = channels.default_config("cognitive")
    config.update(_scenario_overrides(args))
    scenario = channels.build_scenario("cognitive", config, np.random.default_rng(args.seed))
    settings = _settings(args)
    if args.fireflies is None:
        settings = replace(settings, population=100)
    if args.generations is None:
        settings = replace(settings, generations=80)
    solution = solve_fa("cognitive", scenario, settings, args.seed)
    angles = _listify(args.angles) or list(np.arange(-90.0, 90.5, 1.0))
    gains = radiation_pattern(solution.variables["W"], angles, config["spacing_ratio"])
    if args.format == "json":
        text = json.dumps({"angle_deg": [float(a) for a in angles], "gain_db": gains.tolist(),
                           "feasible": solution.feasible, "power": solution.objective}, indent=2) + "\n"
    else:
        text = "angle_deg,gain_db\n" + "".join(f"{a:g},{g:.6f}\n" for a, g in zip(angles, gains))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _complexity(args) -> str:
    params = {}
    if args.config:
        params.update(channels.load_config(args.config))
    for item in args.params:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"expected NAME=VALUE, got {item!r}")
        params[name] = float(value)
    value = complexity_estimate(args.estimate, params)
    return json.dumps({"estimate": args.estimate, "value": value,
                       "order": int(np.floor(np.log10(value)))}) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "complexity":
            text = _complexity(args)
        else:
            args = _merge_config(args)
            text = _pattern(args) if args.command == "pattern" else _run(args)
    except (FireflyBeamError, OSError, ValueError) as exc:
        payload = {"error": str(exc), "type": type(exc).__name__}
        if isinstance(exc, ConfigError) and exc.missing:
            payload["missing"] = list(exc.missing)
        print(json.dumps(payload), file=sys.stderr)
        return 1
    if not getattr(args, "out", None):
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
