"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 instance generation
exhausted its retries, 3 a fatal divergent schedule.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import experiments
from .anneal import DivergentScheduleError
from .models import GenerationError, gen_ising, gen_unique_3sat, serialize_instance

EXIT_OK, EXIT_CONFIG, EXIT_GENERATION, EXIT_DIVERGENT = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="number of qubits")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--theta", type=_floats, dest="thetas", help="angles in units of Omega, e.g. 0,0.5,1")
    p.add_argument("--t-total", type=_floats, dest="t_totals", help="anneal times, comma separated")
    p.add_argument("--ds", type=float, help="step in s (default 0.01)")
    p.add_argument("--ensemble-size", type=int, help="instances or random draws")
    p.add_argument("--errors", type=_ints, help="numbers of wrong guess entries")
    p.add_argument("--lg", type=_ints, help="guess length(s)")
    p.add_argument("--method", choices=("eigh", "taylor"), help="per-step propagator")
    p.add_argument("--norm", choices=("spectral", "frobenius"))
    p.add_argument("--out-dir", help="output directory (default results)")
    p.add_argument("--format", dest="formats", type=lambda t: [x for x in t.split(",") if x],
                   help="csv,json")
    p.add_argument("--plot", dest="plot", action="store_true", default=None, help="write SVG figures")
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.add_argument("--config", help="JSON file of config fields; overrides flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steered-qa", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-instance", help="generate a random instance as JSON")
    g.add_argument("--kind", choices=("ising", "sat3"), default="ising")
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--h-mean", type=float, default=0.01)
    g.add_argument("--W", type=float, default=0.05)
    g.add_argument("--J-s", type=float, default=1.0)
    g.add_argument("--out", help="file to write (default stdout)")

    for kind, text in [("ising-ensemble", "random Ising ensemble: gaps and success probabilities"),
                       ("instance-report", "spectra, schedules and dynamics of one instance"),
                       ("sat-sweep", "unique-solution 3SAT: improvement ratio against angle"),
                       ("pert-sweep", "perturbative target overlap sweeps")]:
        p = sub.add_parser(kind, help=text)
        _add_run_flags(p)
        if kind == "instance-report":
            p.add_argument("--instance", dest="instance_file", help="instance JSON (default: bundled demo)")
            p.add_argument("--schedule", choices=("linear", "optimal", "both"))

    f = sub.add_parser("find-demo", help="scan seeds for an instance showing the steering effects")
    f.add_argument("--start", type=int, default=0)
    f.add_argument("--max-seeds", type=int, default=500)
    f.add_argument("--n", type=int, default=8)
    return parser


def config_from_args(args: argparse.Namespace) -> experiments.ExperimentConfig:
    names = ("n", "seed", "thetas", "t_totals", "ds", "ensemble_size", "errors", "lg", "method",
             "norm", "out_dir", "formats", "plot", "instance_file", "schedule")
    values = {k: getattr(args, k, None) for k in names}
    if args.config:
        try:
            with open(args.config) as fh:
                extra = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise experiments.ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(extra, dict):
            raise experiments.ConfigError("config file must hold a JSON object")
        if extra.get("kind", args.command) != args.command:
            raise experiments.ConfigError(f"config kind {extra['kind']!r} does not match {args.command!r}")
        values.update(extra)
    return experiments.make_config(args.command, **values)


def _gen_instance(args) -> int:
    if args.kind == "ising":
        inst = gen_ising(args.n, args.h_mean, args.W, args.J_s, args.seed)
    else:
        inst = gen_unique_3sat(args.n, args.seed)
    text = serialize_instance(inst) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here 2 means generation failure
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen-instance":
            return _gen_instance(args)
        if args.command == "find-demo":
            print(experiments.find_demo_seed(args.start, args.max_seeds, args.n))
            return EXIT_OK
        cfg = config_from_args(args)
        result = experiments.run(cfg)
        for path in experiments.emit_outputs(result):
            print(path)
        return EXIT_OK
    except experiments.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GenerationError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except DivergentScheduleError as exc:
        print(f"divergent schedule: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
