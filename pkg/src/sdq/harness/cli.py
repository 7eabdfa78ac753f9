"""Command-line entry points: sdq run / sdq sweep / sdq verify.

Exit codes: 0 success, 2 validation error, 3 pipeline error, 4 verification
failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .acceptance import ALL_CHECKS, run_all_checks
from .config import ConfigError, ExperimentConfig
from .experiments import PipelineError, run_experiment

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PIPELINE = 3
EXIT_VERIFY = 4


def _parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError("override", f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdq",
        description="Gate and entanglement simulations for movable-microtrap qubits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a config file or name")
    run_p.add_argument("config", help="config JSON path or experiment name")
    run_p.add_argument("--experiment", default=None,
                       help="experiment name when no config file is given")
    run_p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted config override")
    run_p.add_argument("--output", default=None, help="output directory")
    run_p.add_argument("--threads", type=int, default=None,
                       help="sweep worker processes (0 = auto)")

    sweep_p = sub.add_parser("sweep", help="run a sweep experiment")
    sweep_p.add_argument("--experiment", required=True,
                         help="fig1 | fig2 (or full names)")
    sweep_p.add_argument("--override", action="append", default=[],
                         metavar="KEY=VALUE")
    sweep_p.add_argument("--output", default=None)
    sweep_p.add_argument("--threads", type=int, default=None)

    verify_p = sub.add_parser("verify", help="run the acceptance checks")
    verify_p.add_argument("--only", action="append", default=[],
                          help="run only the named checks "
                               f"(known: {', '.join(ALL_CHECKS)})")
    verify_p.add_argument("--override", action="append", default=[],
                          metavar="KEY=VALUE",
                          help="numerics override, e.g. dt_1d=0.2")
    verify_p.add_argument("--output", default=None,
                          help="directory for the JSON report")
    return parser


_ALIASES = {
    "fig1": "fig1_sweep",
    "fig2": "fig2_fidelity_map",
    "fig3": "fig3_entangler",
    "fig4": "fig4_optimize",
}


def _load_config(args) -> ExperimentConfig:
    name = getattr(args, "config", None) or args.experiment
    if name and os.path.exists(name):
        config = ExperimentConfig.load(name)
    else:
        exp = _ALIASES.get(name, name)
        config = ExperimentConfig(experiment=exp)
    overrides = dict(_parse_override(o) for o in args.override)
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    if args.output is not None:
        overrides["output"] = args.output
    if overrides:
        config = config.with_overrides(overrides)
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    manifest = run_experiment(config)
    print(f"{config.experiment}: wrote {len(manifest.outputs)} file(s) "
          f"in {manifest.wall_time_s:.1f}s")
    for entry in manifest.outputs:
        print(f"  {entry['path']}  sha256={entry['sha256'][:12]}")
    if manifest.errors:
        print(f"  {len(manifest.errors)} cell error(s) recorded in the manifest")
        return EXIT_PIPELINE
    return EXIT_OK


def _cmd_verify(args) -> int:
    overrides = dict(_parse_override(o) for o in args.override) or None
    names = args.only or None
    results = run_all_checks(names, overrides=overrides)
    any_fail = False
    payload = []
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        any_fail |= not res.passed
        print(f"[{status}] {res.name} ({res.elapsed_s:.1f}s)")
        for m in res.metrics:
            print(f"    {m.name}: {m.measured:.6g} {m.comparator} {m.threshold}"
                  f" -> {'ok' if m.passed else 'FAIL'}")
        if res.notes:
            print(f"    note: {res.notes}")
        payload.append({
            "name": res.name,
            "passed": res.passed,
            "elapsed_s": res.elapsed_s,
            "notes": res.notes,
            "metrics": [
                {
                    "name": m.name,
                    "measured": m.measured,
                    "comparator": m.comparator,
                    "threshold": m.threshold,
                    "passed": m.passed,
                }
                for m in res.metrics
            ],
        })
    out_dir = args.output or "."
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "verify_results.json"), "w",
              encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    return EXIT_VERIFY if any_fail else EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command in ("run", "sweep"):
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
