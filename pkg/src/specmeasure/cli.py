"""Command line entry point.

Exit codes: 0 all checks passed, 1 some tolerance check failed,
2 usage, configuration or validation error.
"""

import argparse
import logging
import sys

from .config import canonical_names, load_config
from .errors import ConfigError, InvalidArgument
from .experiment import cache_clear, cache_list, run_experiment

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="specmeasure", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="config path or canonical name")
    run.add_argument("--out", help="output directory")
    run.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    run.add_argument("--tolerance-profile", choices=("default", "strict"), default="default")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")

    cache = sub.add_parser("cache", help="inspect or clear the table cache")
    cache.add_argument("action", choices=("ls", "clear"))

    sub.add_parser("configs", help="list canonical configs")
    return p


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "configs":
        print("\n".join(canonical_names()))
        return EXIT_OK
    if args.command == "cache":
        if args.action == "ls":
            for p in cache_list():
                print(f"{p.name}\t{p.stat().st_size}")
        else:
            print(f"removed {cache_clear()} entries")
        return EXIT_OK

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "validate":
        print(f"{cfg.name}: ok ({', '.join(cfg.suites) or 'no suites'})")
        return EXIT_OK

    try:
        report = run_experiment(cfg, out_dir=args.out, use_cache=not args.no_cache,
                                profile=args.tolerance_profile)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for suite, summary in report.summary.items():
        verdict = {True: "PASS", False: "FAIL", None: "INCONCLUSIVE"}[summary.get("pass")]
        print(f"{suite:16s} {verdict}")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
