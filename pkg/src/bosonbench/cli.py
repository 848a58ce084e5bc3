"""Command line entry point: ``bosonbench <experiment> [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import BosonBenchError
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, _jsonable, parse_config_file, run

_FLAGS = {
    "--seed": ("seed", int),
    "--modes": ("modes", int),
    "--photons": ("photons", int),
    "--trials": ("trials", int),
    "--samples": ("samples", int),
    "--epsilon": ("epsilon", float),
    "--alpha": ("alpha", float),
    "--radius": ("radius", float),
    "--sigma": ("sigma", float),
    "--threshold": ("threshold", float),
    "--cap": ("cap", int),
    "--budget-seconds": ("budget_seconds", float),
    "--space-size": ("space_size", int),
    "--sequences": ("sequences", int),
    "--order": ("order", int),
    "--eta": ("eta", float),
    "--coherent": ("coherent", float),
    "--circuit": ("circuit", str),
    "--out": ("out", str),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bosonbench", description="Desk-scale Boson-Sampling experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="flat key = value file; command-line flags override it")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    restricted = p.add_mutually_exclusive_group()
    restricted.add_argument("--restricted", dest="restricted", action="store_true", default=None,
                            help="work on the collision-free outcomes only")
    restricted.add_argument("--full", dest="restricted", action="store_false",
                            help="work on all outcomes")
    for flag, (dest, typ) in _FLAGS.items():
        p.add_argument(flag, dest=dest, type=typ, default=None)
    return p


def _error(exc: Exception, code: int) -> int:
    obj = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        obj["keys"] = exc.keys
    print(json.dumps(obj), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = parse_config_file(args.config) if args.config else {}
        data["experiment"] = args.experiment
        for key, value in vars(args).items():
            if key in ("config", "experiment") or value is None:
                continue
            data[key] = value
        cfg = ExperimentConfig.from_mapping(data)
        rec = run(cfg)
    except ConfigError as exc:
        return _error(exc, 2)
    except (BosonBenchError, OSError, ValueError) as exc:
        return _error(exc, 1)
    if not cfg.out:
        sys.stdout.write(json.dumps(_jsonable(rec.summary_object()), indent=2, sort_keys=True) + "\n")
    return 0 if rec.complete else 3


if __name__ == "__main__":
    sys.exit(main())
