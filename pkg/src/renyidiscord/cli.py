"""Command-line entry point: ``renyidiscord {timeseries,sweep,plateau,validate}``."""
import argparse
import logging
import sys

from . import experiment as ex

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("renyidiscord")


def _write(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_timeseries(args):
    cfg = ex.load_config(args.config)
    rows = ex.run_timeseries(cfg, threads=args.threads)
    _write(ex.format_csv(ex.TIMESERIES_COLUMNS, rows), args.output)
    return EXIT_OK


def _cmd_sweep(args):
    cfg = ex.load_config(args.config)
    rows = ex.run_sweep(cfg, threads=args.threads)
    _write(ex.format_csv(ex.SWEEP_COLUMNS, rows), args.output)
    return EXIT_OK


def _cmd_plateau(args):
    groups = ex.read_series_csv(args.csv)
    rows = []
    for key, series in groups.items():
        report = ex.detect_plateau(series, args.tol, args.min_points)
        for t0, t1, mean in report.intervals:
            rows.append((key, t0, t1, mean))
        log.info("sweep_value=%s: %d plateau(s), max %.6g", key, len(report.intervals),
                 report.series_max)
    if all(key is None for key in groups):
        rows = [r[1:] for r in rows]
        columns = ("t_begin", "t_end", "mean_value")
    else:
        columns = ("sweep_value", "t_begin", "t_end", "mean_value")
    _write(ex.format_csv(columns, rows), args.output)
    return EXIT_OK


def _cmd_validate(args):
    cfg = ex.load_config(args.config)
    n = cfg.time_grid.n_points
    total = n * (len(cfg.sweep.values) if cfg.sweep else 1)
    print(f"ok: {args.config} ({total} discord evaluations)")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="renyidiscord",
        description="Rényi discord of two dimers in Ising-correlated spin baths.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("timeseries", _cmd_timeseries, "discord time series for one config"),
        ("sweep", _cmd_sweep, "time series for every value of the sweep axis"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("-o", "--output", default="-")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: all CPUs)")
        p.set_defaults(func=fn)

    p = sub.add_parser("plateau", help="detect frozen intervals in a CSV")
    p.add_argument("csv")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--min-points", type=int, default=10)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_plateau)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ex.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ex.StageError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
