"""Command-line front end: run/sweep experiment specs, compare result files.

Exit codes: 0 on success, 2 for spec or validation problems, 1 for anything
else; failures print one machine-readable JSON line to stderr.
"""

import argparse
import json
import sys

from . import harness

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybeam",
        description="Hybrid beamforming spectral-efficiency experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_exec(name, help_text):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("spec", help="experiment spec file (key = value)")
        cmd.add_argument("--trials", type=int, help="override trial count")
        cmd.add_argument("--seed", type=int, help="override master seed")
        cmd.add_argument("--out", help="override output CSV path")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker threads (trials run in parallel)")
        cmd.add_argument("--timing", action="store_true",
                         help="record wall time per solve in the ms column "
                              "(makes output nondeterministic)")
        return cmd

    add_exec("run", "run every algorithm over the spec's SNR grid")
    add_exec("sweep", "run once per sweep value with paired channels")

    cmp_cmd = sub.add_parser("compare",
                             help="join result CSVs and tabulate SE deltas")
    cmp_cmd.add_argument("files", nargs="+", help="result CSV paths")
    cmp_cmd.add_argument("--out", help="write the table here instead of stdout")
    return parser


def _load_spec(args) -> harness.ExperimentSpec:
    spec = harness.parse_spec_file(args.spec)
    if args.trials is not None:
        spec.trials = args.trials
    if args.seed is not None:
        spec.master_seed = args.seed
    if args.out is not None:
        spec.output = args.out
    spec.threads = args.threads
    spec.timing = args.timing
    spec.validate()
    return spec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            spec = _load_spec(args)
            rows = harness.run(spec)
            print(f"wrote {spec.output} ({len(rows)} rows)")
        elif args.command == "sweep":
            spec = _load_spec(args)
            rows = harness.sweep(spec)
            print(f"wrote {spec.output} ({len(rows)} rows)")
        elif args.command == "compare":
            table = harness.compare(args.files, out=args.out)
            if args.out is None:
                sys.stdout.write(table)
            else:
                print(f"wrote {args.out}")
    except (ValueError, FileNotFoundError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}),
              file=sys.stderr)
        return 2
    except Exception as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
