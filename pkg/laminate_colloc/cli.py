#!/usr/bin/python3

"""
laminate-colloc command line

    laminate-colloc run --layers 11 --S 20 --degrees 6 6 4 --spans 4
    laminate-colloc sweep --config sweep.json --workers 4
    laminate-colloc profiles --layers 3 --S 20 --out figures
    laminate-colloc verify --golden

Exit codes: 0 success, 1 case failure, 2 configuration error.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace

from . import bench
from .exceptions import CaseException, ConfigException
from .pagano import BACKENDS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

# flag destination -> CaseConfig field
_CASE_FLAGS = {
    "layers": "layers",
    "S": "slenderness",
    "degrees": "degrees",
    "spans": "spans",
    "thickness_spans": "thickness_spans",
    "samples": "samples",
    "station": "station",
    "backend": "backend",
    "sigma0": "sigma0",
}


def _add_case_flags(parser, many=False):
    nargs = "+" if many else None
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--layers", type=int, nargs=nargs, help="number of layers")
    parser.add_argument("--S", type=float, nargs=nargs, help="slenderness L / t")
    parser.add_argument(
        "--degrees",
        type=int,
        nargs=3,
        metavar=("P", "Q", "R"),
        help="spline degrees",
    )
    parser.add_argument("--spans", type=int, nargs=nargs, help="in-plane knot spans")
    parser.add_argument("--thickness-spans", type=int, help="knot spans through t")
    parser.add_argument("--samples", type=int, help="x3 samples of the profile")
    parser.add_argument(
        "--station",
        type=float,
        nargs=2,
        metavar=("X1", "X2"),
        help="sampling station as fractions of L",
    )
    parser.add_argument("--backend", choices=BACKENDS, help="reference backend")
    parser.add_argument("--sigma0", type=float, help="load amplitude (MPa)")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--workers", type=int, default=1, help="worker processes")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="laminate-colloc",
        description="Homogenized isogeometric collocation of cross-ply plates",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_case_flags(sub.add_parser("run", help="run a single case"))
    _add_case_flags(sub.add_parser("sweep", help="run a matrix of cases"), many=True)
    _add_case_flags(sub.add_parser("profiles", help="export profile data"))
    verify = sub.add_parser("verify", help="reference checks and table reproduction")
    verify.add_argument(
        "--golden", action="store_true", help="also reproduce the shipped tables"
    )
    verify.add_argument("--workers", type=int, default=1, help="worker processes")
    return parser


def case_from_args(args):
    """
    CaseConfig from the optional JSON file, overridden by explicit flags
    """
    cfg = bench.load_case(args.config) if args.config else bench.CaseConfig()
    overrides = {}
    for flag, name in _CASE_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    try:
        return replace(cfg, **overrides).validate()
    except (TypeError, ValueError) as e:
        raise ConfigException("invalid flags: {}".format(e))


def sweep_from_args(args):
    if args.config:
        configs = bench.load_sweep(args.config)
        if any(getattr(args, f) is not None for f in ("layers", "S", "spans")):
            raise ConfigException("sweep axes come either from --config or from flags")
        overrides = {
            name: getattr(args, flag)
            for flag, name in _CASE_FLAGS.items()
            if flag not in ("layers", "S", "spans") and getattr(args, flag) is not None
        }
        return [replace(c, **overrides).validate() for c in configs]
    base = {
        name: getattr(args, flag)
        for flag, name in _CASE_FLAGS.items()
        if flag not in ("layers", "S", "spans") and getattr(args, flag) is not None
    }
    return bench.sweep_configs(
        bench.CaseConfig(**base).validate(),
        layers=args.layers,
        slenderness=args.S,
        spans=args.spans,
    )


def _write_records(records, out_dir, stem):
    os.makedirs(out_dir, exist_ok=True)
    bench.write_results_csv(records, os.path.join(out_dir, stem + ".csv"))
    bench.write_results_json(records, os.path.join(out_dir, stem + ".json"))


def _report(records):
    for r in records:
        if r.ok:
            print(
                "{:<24} raw {:>24} recovered {:>24}".format(
                    r.config.label, str(r.raw), str(r.recovered)
                )
            )
        else:
            print("{:<24} FAILED {}".format(r.config.label, r.error))


def cmd_run(args):
    cfg = case_from_args(args)
    record = bench.run_case(cfg)
    _write_records([record], args.out, cfg.label)
    _report([record])
    return EXIT_OK


def cmd_sweep(args):
    records = bench.run_sweep(sweep_from_args(args), args.workers)
    _write_records(records, args.out, "sweep")
    _report(records)
    return EXIT_OK if all(r.ok for r in records) else EXIT_FAILURE


def cmd_profiles(args):
    cfg = case_from_args(args)
    stations = [cfg.station] if args.station is not None else bench.DEFAULT_STATIONS
    for path in bench.emit_profiles(cfg, args.out, stations):
        print(path)
    return EXIT_OK


def cmd_verify(args):
    checks = bench.verify(golden=args.golden, workers=args.workers)
    for c in checks:
        print("{} {}: {}".format("ok  " if c.passed else "FAIL", c.name, c.detail))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILURE


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "profiles": cmd_profiles,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigException as e:
        logger.error("configuration error: %s", e.message)
        return EXIT_CONFIG
    except CaseException as e:
        logger.error("case failed: %s", e.message)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
