import argparse
import logging
import sys

from ..scenario import SUBCOMMANDS, run_scenario


def _get_args(argv=None):
    parser = argparse.ArgumentParser(
        prog="optitest", description="Optimal adaptive testing policies for epidemics")
    parser.add_argument("--config", required=True, help="scenario file")
    parser.add_argument("--subcommand", required=True, choices=SUBCOMMANDS,
                        help="what to run")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (overrides the scenario)")
    parser.add_argument("--jobs", type=int, default=None,
                        help="parallel replicate workers (overrides the scenario)")
    parser.add_argument("--out", default=None,
                        help="output directory (overrides the scenario)")
    parser.add_argument("--cost-curve", default=False, action="store_true",
                        help="also emit the switching cost curve (optimize only)")
    parser.add_argument("--strict", default=False, action="store_true",
                        help="fail a cost sweep with flagged rows")
    parser.add_argument("-v", "--verbose", default=0, action="count",
                        help="log progress; repeat for solver details")
    return parser.parse_args(argv)


def main(argv=None):
    args  = _get_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s:%(name)s: %(message)s")

    result = run_scenario(args.config, args.subcommand, seed=args.seed, jobs=args.jobs,
                          out=args.out, cost_curve=args.cost_curve, strict=args.strict)
    for line in result.lines:
        print(line)
    if result.error is not None:
        print("error: {}".format(result.error), file=sys.stderr)
    print(result.summary)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
