"""Command line interface.

    keyforge <bb84|substitute|skapd|sweep> [options]

Exit status: 0 on success, 2 on usage errors, 3 when every trial aborted.
"""

from __future__ import annotations

import argparse
import sys

from .config import SweepConfig, UsageError, parse_config
from .runner import (
    report_csv,
    report_json,
    run_experiment,
    run_sweep,
    sweep_csv,
    sweep_json,
)

_FLAG_KEYS = ("config", "rounds", "length", "seed", "eve", "t", "na", "nb",
              "ne", "block", "passes", "safety", "eve_bound", "trials",
              "out", "format", "debug_keys")


def _add_options(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", metavar="FILE",
                    help="TOML config file; flags override its values")
    sp.add_argument("--rounds", type=int, metavar="N",
                    help="protocol rounds (bb84, substitute)")
    sp.add_argument("--length", type=int, metavar="L",
                    help="satellite string length (skapd)")
    sp.add_argument("--seed", type=int, metavar="S",
                    help="master seed, 64-bit (default 0)")
    sp.add_argument("--eve", choices=("none", "intercept"),
                    help="adversary strategy (bb84)")
    sp.add_argument("--t", choices=("classical", "oracle"),
                    help="substituted transport kind (substitute)")
    sp.add_argument("--na", type=int, metavar="N",
                    help="photons per bit for Alice (skapd)")
    sp.add_argument("--nb", type=int, metavar="N",
                    help="photons per bit for Bob (skapd)")
    sp.add_argument("--ne", type=int, metavar="N",
                    help="photons per bit for Eve (skapd)")
    sp.add_argument("--block", type=int, metavar="N",
                    help="advantage distillation block size (skapd)")
    sp.add_argument("--passes", type=int, metavar="P",
                    help="reconciliation passes (skapd)")
    sp.add_argument("--safety", type=int, metavar="S",
                    help="privacy amplification safety margin (skapd)")
    sp.add_argument("--eve-bound", type=int, metavar="B",
                    help="bound on adversary knowledge in bits (skapd)")
    sp.add_argument("--trials", type=int, metavar="T",
                    help="independent trials (default 1)")
    sp.add_argument("--out", metavar="PATH",
                    help="write the report here instead of stdout")
    sp.add_argument("--format", choices=("csv", "json"),
                    help="report format (default csv)")
    sp.add_argument("--debug-keys", action="store_true", default=None,
                    help="include per-stage key snapshots (json only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keyforge",
        description="Deterministic simulator of key-establishment protocols "
                    "and their classical post-processing.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for name, summary in (
        ("bb84", "four-state protocol with optional intercept-resend"),
        ("substitute", "same protocol over a substituted transport"),
        ("skapd", "satellite pipeline with distillation and amplification"),
        ("sweep", "run one experiment across a list of parameter values"),
    ):
        _add_options(sub.add_parser(name, help=summary))
    return parser


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: getattr(args, k) for k in _FLAG_KEYS
             if getattr(args, k) is not None and k != "config"}
    try:
        cfg = parse_config(args.kind, args.config, flags)
    except UsageError as exc:
        print(f"keyforge: {exc}", file=sys.stderr)
        return 2

    if isinstance(cfg, SweepConfig):
        results = run_sweep(cfg)
        text = sweep_json(cfg, results) if cfg.format == "json" \
            else sweep_csv(cfg, results)
        _write(text, cfg.out)
        reports = [r for _, r in results]
        if reports and all(r.all_aborted() for r in reports):
            return 3
        return 0

    report = run_experiment(cfg)
    text = report_json(report) if cfg.format == "json" else report_csv(report)
    _write(text, cfg.out)
    if report.all_aborted():
        return 3
    return 0


def entrypoint() -> None:
    sys.exit(main())
