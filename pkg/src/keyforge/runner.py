"""Experiment orchestration: independent seeded trials, aggregation, sweeps,
and report serialization (CSV rows or a nested JSON document).

Each trial derives its own master seed from the run seed and the trial
index, so trials are independent and a parallel executor produces exactly
the same report as a serial loop.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bb84 import run_bb84
from .config import ExperimentConfig, SweepConfig
from .metrics import CSV_FIELDS, CSV_HEADER, SecurityReport, key_rate, \
    mutual_information
from .model import bits_to_hex
from .postprocess import StageLedger
from .rng import RandomSource, sub_seed
from .skapd import run_skapd
from .substitution import run_substitution


@dataclass
class TrialOutcome:
    trial: int
    report: SecurityReport
    ledgers: list[StageLedger] = field(default_factory=list)
    snapshots: dict[str, str] = field(default_factory=dict)


@dataclass
class RunReport:
    config: ExperimentConfig
    outcomes: list[TrialOutcome]

    def all_aborted(self) -> bool:
        return bool(self.outcomes) and all(o.report.aborted
                                           for o in self.outcomes)

    def aggregates(self) -> dict:
        out: dict = {}
        for name in CSV_FIELDS:
            values = []
            for o in self.outcomes:
                v = getattr(o.report, name)
                if v is None:
                    continue
                values.append(float(v))
            if values:
                arr = np.asarray(values)
                out[name] = {
                    "mean": float(arr.mean()),
                    "std": float(arr.std()),
                    "count": len(values),
                }
            else:
                out[name] = {"count": 0}
        return out


def _trial_seed(cfg: ExperimentConfig, trial: int) -> int:
    return sub_seed(cfg.seed, f"trial:{trial}")


def _bb84_trial(cfg: ExperimentConfig, trial: int) -> TrialOutcome:
    seed = _trial_seed(cfg, trial)
    res = run_bb84(cfg.rounds, seed, cfg.eve)
    n = res.sifted_length
    if res.eve_guesses is not None:
        guesses = res.eve_guesses
    else:
        # a passive adversary has nothing better than coin flips
        guesses = RandomSource(seed, "eve").bits(n)
    if n:
        eve_acc = float(np.mean(guesses == res.alice_key))
        eve_mi = mutual_information(guesses, res.alice_key)
    else:
        eve_acc = None
        eve_mi = 0.0
    report = SecurityReport(
        qber=res.qber,
        sift_fraction=res.sift_fraction,
        eve_accuracy=eve_acc,
        eve_mi=float(eve_mi),
        key_rate=key_rate(n, cfg.rounds),
        final_len=n,
        leaked=0,
        aborted=False,
    )
    snapshots = {}
    if cfg.debug_keys:
        snapshots = {"sifted.alice": bits_to_hex(res.alice_key),
                     "sifted.bob": bits_to_hex(res.bob_key)}
    return TrialOutcome(trial, report, [], snapshots)


def _substitute_trial(cfg: ExperimentConfig, trial: int) -> TrialOutcome:
    seed = _trial_seed(cfg, trial)
    res = run_substitution(cfg.rounds, seed, cfg.t)
    n = res.sifted_length
    eve_mi = mutual_information(res.eve_guesses, res.alice_key) if n else 0.0
    report = SecurityReport(
        qber=res.qber,
        sift_fraction=res.sift_fraction,
        eve_accuracy=res.eve_accuracy if n else None,
        eve_mi=float(eve_mi),
        key_rate=key_rate(n, cfg.rounds),
        final_len=n,
        leaked=res.t_tap_bits,
        aborted=False,
    )
    snapshots = {}
    if cfg.debug_keys:
        snapshots = {"sifted.alice": bits_to_hex(res.alice_key),
                     "sifted.bob": bits_to_hex(res.bob_key),
                     "eve.reconstruction": bits_to_hex(res.eve_guesses)}
    return TrialOutcome(trial, report, [], snapshots)


def _skapd_trial(cfg: ExperimentConfig, trial: int) -> TrialOutcome:
    seed = _trial_seed(cfg, trial)
    out = run_skapd(cfg.length, cfg.na, cfg.nb, cfg.ne, cfg.block,
                    cfg.passes, cfg.safety, cfg.eve_bound, seed,
                    collect_snapshots=cfg.debug_keys)
    distilled = out.ledgers[1].output_length
    if out.final_length > 0:
        eve_acc = float(np.mean(out.eve_final == out.alice_final))
    else:
        eve_acc = None
    report = SecurityReport(
        qber=out.raw_pair_error,
        sift_fraction=distilled / cfg.length,
        eve_accuracy=eve_acc,
        eve_mi=float(mutual_information(out.copies["eve"].bits, out.s0.bits)),
        key_rate=key_rate(out.final_length, cfg.length),
        final_len=out.final_length,
        leaked=out.leaked_total,
        aborted=out.aborted,
    )
    return TrialOutcome(trial, report, out.ledgers, out.snapshots)


_TRIALS = {
    "bb84": _bb84_trial,
    "substitute": _substitute_trial,
    "skapd": _skapd_trial,
}


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialOutcome:
    return _TRIALS[cfg.kind](cfg, trial)


def run_experiment(cfg: ExperimentConfig, parallel: bool = False) -> RunReport:
    """Execute cfg.trials independent sessions; order-independent output."""
    if parallel and cfg.trials > 1:
        with ThreadPoolExecutor(max_workers=min(cfg.trials, 8)) as pool:
            outcomes = list(pool.map(lambda i: run_trial(cfg, i),
                                     range(cfg.trials)))
    else:
        outcomes = [run_trial(cfg, i) for i in range(cfg.trials)]
    return RunReport(cfg, outcomes)


def run_sweep(sweep: SweepConfig,
              parallel: bool = False) -> list[tuple[object, RunReport]]:
    results = []
    for value in sweep.values:
        cfg = dataclasses.replace(sweep.template, **{sweep.param: value})
        results.append((value, run_experiment(cfg, parallel)))
    return results


def report_csv(report: RunReport) -> str:
    lines = [CSV_HEADER]
    lines += [o.report.csv_row(o.trial) for o in report.outcomes]
    return "\n".join(lines) + "\n"


def _report_obj(report: RunReport) -> dict:
    obj = {
        "config": report.config.as_dict(),
        "trials": [o.report.as_dict(o.trial) for o in report.outcomes],
        "ledgers": [[l.as_dict() for l in o.ledgers]
                    for o in report.outcomes],
        "aggregates": report.aggregates(),
    }
    if report.config.debug_keys:
        obj["debug_keys"] = {str(o.trial): o.snapshots
                             for o in report.outcomes}
    return obj


def report_json(report: RunReport) -> str:
    return json.dumps(_report_obj(report), indent=2, sort_keys=True) + "\n"


def sweep_csv(sweep: SweepConfig,
              results: list[tuple[object, RunReport]]) -> str:
    lines = ["value," + CSV_HEADER]
    for value, report in results:
        for o in report.outcomes:
            lines.append(f"{value},{o.report.csv_row(o.trial)}")
    return "\n".join(lines) + "\n"


def sweep_json(sweep: SweepConfig,
               results: list[tuple[object, RunReport]]) -> str:
    obj = {
        "param": sweep.param,
        "values": list(sweep.values),
        "reports": [{"value": v, "report": _report_obj(r)}
                    for v, r in results],
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
