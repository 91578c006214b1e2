"""Command-line front end: run scenarios, compare controllers, run suites."""

import argparse
import csv
import json
import logging
import os
from pathlib import Path
import sys

from . import experiments as ex
from .config import schema_text
from .errors import ConfigError, IncompatibleScenarios, SoftArmError
from .metrics import MetricsReport

OUT_ENV = "SOFTARM_OUT"
DEFAULT_OUT = "softarm_out"

EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INCOMPATIBLE = 3

log = logging.getLogger("softarm")


def _out_dir(arg):
    path = Path(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _write_run(out, run):
    name = run.config.name
    run.trace.to_csv(out / f"{name}.csv")
    _write_json(out / f"{name}.metrics.json", run.report.to_dict())


def _write_table(path, reports):
    cols = list(MetricsReport.__dataclass_fields__)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank"] + cols)
        for i, rep in enumerate(reports, 1):
            d = rep.to_dict()
            w.writerow([i] + [repr(d[c]) if isinstance(d[c], float) else d[c] for c in cols])


def _print_table(reports):
    print(f"{'rank':>4}  {'scenario':<36} {'steady RMS (m)':>14} {'mean L2 (m)':>12} "
          f"{'mean |tau| (N)':>14} {'sat duty':>9}")
    for i, r in enumerate(reports, 1):
        print(f"{i:>4}  {r.name:<36} {r.steady_rms:>14.4e} {r.mean_l2:>12.4e} "
              f"{r.mean_abs_tau:>14.4g} {r.saturation_duty:>9.3f}")


def _report_comparison(out, runs, checks, extra=None):
    for run in runs:
        _write_run(out, run)
    ranked = sorted(runs, key=lambda r: r.report.steady_rms)
    reports = [r.report for r in ranked]
    _write_table(out / "comparison.csv", reports)
    doc = {"ranking": [r.to_dict() for r in reports],
           "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]}
    if extra:
        doc.update(extra)
    _write_json(out / "comparison.json", doc)
    _print_table(reports)
    for c in checks:
        print(c.line())


def cmd_run(args):
    cfg = ex.load_scenario(args.scenario)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    out = _out_dir(args.out)
    run = ex.run_all([cfg])[0]
    _write_run(out, run)
    _print_table([run.report])
    print(f"wrote {out / (cfg.name + '.csv')}")
    return 0


def cmd_compare(args):
    configs = [ex.load_scenario(s) for s in args.scenarios]
    ex.check_compatible(configs)
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        configs = [c.replace(name=f"{c.name}_{i}") for i, c in enumerate(configs)]
    out = _out_dir(args.out)
    runs = ex.run_all(configs, args.jobs)
    _, checks = ex.compare(runs)
    _report_comparison(out, runs, checks)
    return 0


def cmd_suite(args):
    configs = ex.suite_configs(args.name, args.seed)
    out = _out_dir(args.out) / args.name
    out.mkdir(parents=True, exist_ok=True)
    runs = ex.run_all(configs, args.jobs)
    _, checks = ex.compare(runs)
    _report_comparison(out, runs, checks, {"suite": args.name, "master_seed": args.seed})
    return 0


def cmd_schema(args):
    sys.stdout.write(schema_text())
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="softarm", description=__doc__)
    p.add_argument("--list-scenarios", action="store_true", help="list bundled scenarios and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")

    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("scenario", help="scenario file or bundled scenario name")
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    r.add_argument("--seed", type=int)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="run and rank scenarios sharing trajectory and duration")
    c.add_argument("scenarios", nargs="+")
    c.add_argument("--out")
    c.add_argument("--jobs", type=int, default=ex.default_jobs())
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("suite", help="run a bundled comparison suite")
    s.add_argument("name", choices=sorted(ex.SUITES))
    s.add_argument("--out")
    s.add_argument("--seed", type=int, default=0, help="master seed")
    s.add_argument("--jobs", type=int, default=ex.default_jobs())
    s.set_defaults(func=cmd_suite)

    sc = sub.add_parser("schema", help="print the scenario schema with defaults")
    sc.set_defaults(func=cmd_schema)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list_scenarios:
        for name in ex.bundled_names():
            print(name)
        return 0
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        key = f" (key: {exc.key})" if exc.key else ""
        print(f"softarm: configuration error{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"softarm: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IncompatibleScenarios as exc:
        print(f"softarm: incompatible scenarios: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except SoftArmError as exc:
        t = getattr(exc, "t", None)
        when = f" at t={t:.6g} s" if t is not None else ""
        print(f"softarm: {type(exc).__name__}{when}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
