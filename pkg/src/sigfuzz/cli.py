"""Command-line entry points: run, ablate, coverage, seeds, nwise, benchmarks."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, benchmarks
from .coverage.report import coverage_report, dumps, format_decisions, format_summary
from .exec.corpus import save_corpus
from .exec.testcase import LayoutMismatch
from .fuzzer.campaign import CampaignConfig, fuzz_campaign
from .harness import ARMS, replay_corpus, resolve_model, run_ablation, summary_text, write_ablation, write_report
from .ir import InstrumentError, ModelError, instrument
from .ir.parser import parse_number
from .seedgen.nwise import fast_nwise
from .seedgen.seeds import run_seedgen

log = logging.getLogger("sigfuzz")

EXIT_OK = 0
EXIT_ERROR = 1


def _nonneg_float(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _campaign_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("model", help="model file, or a bundled benchmark name (see `benchmarks`)")
    p.add_argument("--budget", type=_nonneg_float, default=60.0, help="fuzzing seconds after seeding (default 60)")
    p.add_argument("--workers", type=_pos_int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nwise", type=_pos_int, default=2, help="n-wise strength for constant ports (default 2)")
    p.add_argument("--unroll", type=_pos_int, default=None, help="time-step unrolling bound for seeding")
    p.add_argument("--seedgen-budget", type=_nonneg_float, default=5.0, help="seed generation seconds (default 5)")
    p.add_argument("--no-signal-mutations", action="store_true", help="disable square and curve mutations")
    p.add_argument("--no-bmc-seeds", action="store_true", help="skip constraint-solved seeds")
    p.add_argument("--clock", choices=("auto", "logical", "wall"), default="auto",
                   help="budget clock; auto counts executions when single-worker (reproducible)")


def _config(args) -> CampaignConfig:
    return CampaignConfig(
        budget=args.budget,
        workers=args.workers,
        seed=args.seed,
        signal_mutations=not args.no_signal_mutations,
        bmc_seeds=not args.no_bmc_seeds,
        nwise=args.nwise,
        unroll=args.unroll,
        seedgen_budget=args.seedgen_budget,
        clock=args.clock,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigfuzz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="seed, fuzz and measure one model")
    _campaign_flags(p)
    p.add_argument("--report", type=Path, default=None, help="directory for summary, series, corpus, findings")

    p = sub.add_parser("ablate", help="paired trials: full campaign against ablated arms")
    _campaign_flags(p)
    p.add_argument("--trials", type=_pos_int, default=10)
    p.add_argument("--arms", default="full,raw", help=f"comma list from {','.join(ARMS)}; the first is the baseline")
    p.add_argument("--report", type=Path, default=None)

    p = sub.add_parser("coverage", help="replay a corpus directory and report merged coverage")
    p.add_argument("model")
    p.add_argument("corpus", type=Path)
    p.add_argument("--json", action="store_true", help="print the machine-readable report")

    p = sub.add_parser("seeds", help="seed generation only")
    p.add_argument("model")
    p.add_argument("--budget", type=_nonneg_float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nwise", type=_pos_int, default=2)
    p.add_argument("--unroll", type=_pos_int, default=None)
    p.add_argument("--no-bmc-seeds", action="store_true")
    p.add_argument("--out", type=Path, default=None, help="write seeds.json and the seed corpus here")

    p = sub.add_parser("nwise", help="n-wise combination suite")
    p.add_argument("model", nargs="?", help="take candidates from the model's constant ports")
    p.add_argument("-n", type=_pos_int, default=2, help="strength (default 2)")
    p.add_argument("--values", action="append", default=[], metavar="V1,V2,...",
                   help="candidate list of one parameter; repeat per parameter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")

    sub.add_parser("benchmarks", help="list bundled benchmark models")
    return parser


# commands


def cmd_run(args) -> int:
    model = resolve_model(args.model)
    report = fuzz_campaign(model, _config(args))
    print(summary_text(report), end="")
    if args.report is not None:
        write_report(report, args.report)
        print(f"report written to {args.report}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    model = resolve_model(args.model)
    arms = tuple(a.strip() for a in args.arms.split(",") if a.strip())
    ab = run_ablation(model, trials=args.trials, budget=args.budget, seed=args.seed, arms=arms, base=_config(args))
    print(ab.table(), end="")
    if args.report is not None:
        write_ablation(ab, args.report)
        print(f"ablation written to {args.report}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    model = resolve_model(args.model)
    cov = replay_corpus(model, args.corpus)
    if args.json:
        print(dumps(coverage_report(cov)), end="")
    else:
        print(format_summary(cov.metrics()))
        print(format_decisions(cov))
    return EXIT_OK


def cmd_seeds(args) -> int:
    im = instrument(resolve_model(args.model))
    res = run_seedgen(im, K=args.unroll, budget=args.budget, n=args.nwise, seed=args.seed, bmc=not args.no_bmc_seeds)
    counts = ", ".join(f"{k}={v}" for k, v in sorted(res.report.seeds.items()))
    agg = res.report.aggregate()
    by: dict = {}
    for st in agg.values():
        by[st] = by.get(st, 0) + 1
    print(f"{len(res.seeds)} seeds ({counts}); K={res.report.K}, {res.report.paths} paths"
          f"{'' if res.report.complete else ' (incomplete)'}")
    print("targets: " + (", ".join(f"{k}={v}" for k, v in sorted(by.items())) or "-"))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "seeds.json").write_text(dumps(res.report.as_dict()))
        save_corpus(args.out / "corpus", res.seeds)
        print(f"seeds written to {args.out}")
    return EXIT_OK


def cmd_nwise(args) -> int:
    if args.values and args.model:
        raise ValueError("give either a model or --values lists, not both")
    if args.values:
        cands = [[parse_number(v.strip()) for v in spec.split(",") if v.strip()] for spec in args.values]
        suite = fast_nwise(min(args.n, len(cands)), cands, args.seed)
        rows = [list(c) for c in suite]
        names = [f"p{i}" for i in range(len(cands))]
    elif args.model:
        im = instrument(resolve_model(args.model))
        ports = [p for p in im.model.input_ports if not p.is_signal and p.candidates]
        if not ports:
            print("model has no constant ports with candidate values")
            return EXIT_OK
        suite = fast_nwise(min(args.n, len(ports)), [p.candidates for p in ports], args.seed)
        rows = [list(c) for c in suite]
        names = [p.id for p in ports]
    else:
        raise ValueError("nwise needs a model or at least one --values list")
    if args.json:
        print(json.dumps({"n": suite.n, "parameters": names, "cases": rows}))
    else:
        print("\t".join(names))
        for r in rows:
            print("\t".join(str(v) for v in r))
        print(f"{len(rows)} cases, strength {suite.n}", file=sys.stderr)
    return EXIT_OK


def cmd_benchmarks(args) -> int:
    for name in benchmarks.NAMES:
        im = instrument(benchmarks.load(name))
        multi = sum(1 for d in im.decisions if d.condition_count >= 2)
        print(f"{name:<12} steps={im.layout.sample_count:<4} decisions={len(im.decisions):<3}"
              f" multi-condition={multi}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "ablate": cmd_ablate,
    "coverage": cmd_coverage,
    "seeds": cmd_seeds,
    "nwise": cmd_nwise,
    "benchmarks": cmd_benchmarks,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as e:
        print(f"sigfuzz: {e}", file=sys.stderr)
    except ModelError as e:
        print(f"sigfuzz: invalid model:\n{e}", file=sys.stderr)
    except (InstrumentError, LayoutMismatch, ValueError) as e:
        print(f"sigfuzz: {e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
