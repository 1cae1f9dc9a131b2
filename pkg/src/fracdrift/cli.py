"""Command line front end.

Subcommands: selftest, run <config.json|builtin-name>, list-scenarios.
Exit codes: 0 success, 1 experiment failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .experiments import builtin_scenarios, run_scenario


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fracdrift",
        description="Numerical experiments for the nonlocal drift equation "
        "and its exterior-measurement inverse problem.",
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out-dir", type=str, default=None,
                        help="root directory for scenario outputs")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for column solves")
    sub = parser.add_subparsers(dest="command", required=True)

    p_self = sub.add_parser("selftest", help="run the built-in validation suite")
    p_self.add_argument("--s", type=float, default=0.75)
    p_self.add_argument("--h", type=float, default=1 / 128)

    p_run = sub.add_parser("run", help="run a scenario from a JSON config "
                           "file or a builtin name")
    p_run.add_argument("config", type=str)

    sub.add_parser("list-scenarios", help="list builtin scenario names")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "list-scenarios":
        for name, cfg in sorted(builtin_scenarios().items()):
            print(f"{name}: {cfg['kind']}")
        return 0

    try:
        if args.command == "selftest":
            config = {
                "name": "selftest",
                "kind": "selftest",
                "seed": args.seed if args.seed is not None else 0,
                "params": {"s": args.s, "h": args.h},
            }
        else:
            builtin = builtin_scenarios()
            if args.config in builtin:
                config = builtin[args.config]
            elif Path(args.config).exists():
                config = args.config
            else:
                raise ConfigError(args.config,
                                  "neither a config file nor a builtin name")
        summary = run_scenario(config, out_dir=args.out_dir, seed=args.seed,
                               threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "selftest":
        for check in summary.get("checks", []):
            status = "pass" if check["passed"] else "FAIL"
            tol = f" (tol {check['tol']:g})" if check["tol"] is not None else ""
            print(f"[{status}] {check['name']}: {check['value']:.3e}{tol}")
    print(json.dumps({k: summary.get(k) for k in ("name", "kind", "seed", "ok")}))
    return 0 if summary.get("ok", False) else 1


if __name__ == "__main__":
    sys.exit(main())
