"""Experiment configuration: defaults, TOML file parsing, flag overrides.

A config names an experiment kind plus its parameters. Files use flat TOML
key/value pairs with the same names as the CLI flags; flags win over file
values. Unknown keys and kind-inapplicable keys are usage errors.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

KINDS = ("bb84", "substitute", "skapd")
SWEEPABLE = ("rounds", "block", "ne", "safety", "eve")

_COMMON = {"seed", "trials", "out", "format", "debug_keys"}
_KIND_KEYS = {
    "bb84": {"rounds", "eve"},
    "substitute": {"rounds", "t"},
    "skapd": {"length", "na", "nb", "ne", "block", "passes", "safety",
              "eve_bound"},
}


class UsageError(ValueError):
    """Bad flags or config file contents; maps to exit status 2."""


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    trials: int = 1
    out: str | None = None
    format: str = "csv"
    debug_keys: bool = False
    # bb84 / substitute
    rounds: int = 1000
    eve: str = "none"
    t: str = "classical"
    # skapd
    length: int = 10000
    na: int = 5
    nb: int = 5
    ne: int = 1
    block: int = 2
    passes: int = 4
    safety: int = 64
    eve_bound: int = 0

    def as_dict(self) -> dict:
        keys = sorted(_COMMON | _KIND_KEYS[self.kind] | {"kind"})
        return {k: getattr(self, k) for k in keys}


@dataclass
class SweepConfig:
    param: str
    values: list
    template: ExperimentConfig
    out: str | None = None
    format: str = "csv"


def allowed_keys(kind: str) -> set[str]:
    return _COMMON | _KIND_KEYS[kind]


def _check_int(cfg: ExperimentConfig, name: str, low: int,
               high: int | None = None) -> None:
    v = getattr(cfg, name)
    if not isinstance(v, int) or isinstance(v, bool):
        raise UsageError(f"{name} must be an integer, got {v!r}")
    if v < low or (high is not None and v > high):
        bound = f">= {low}" if high is None else f"in [{low}, {high}]"
        raise UsageError(f"{name} must be {bound}, got {v}")


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.kind not in KINDS:
        raise UsageError(f"unknown experiment kind {cfg.kind!r}")
    _check_int(cfg, "seed", 0, 2 ** 64 - 1)
    _check_int(cfg, "trials", 1)
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.out is not None and not isinstance(cfg.out, str):
        raise UsageError(f"out must be a path string, got {cfg.out!r}")
    if not isinstance(cfg.debug_keys, bool):
        raise UsageError("debug_keys must be a boolean")
    if cfg.debug_keys and cfg.format != "json":
        raise UsageError("--debug-keys requires --format json")
    if cfg.kind in ("bb84", "substitute"):
        _check_int(cfg, "rounds", 1)
    if cfg.kind == "bb84" and cfg.eve not in ("none", "intercept"):
        raise UsageError(f"eve must be none or intercept, got {cfg.eve!r}")
    if cfg.kind == "substitute" and cfg.t not in ("classical", "oracle"):
        raise UsageError(f"t must be classical or oracle, got {cfg.t!r}")
    if cfg.kind == "skapd":
        _check_int(cfg, "length", 1)
        for k in ("na", "nb", "ne", "safety", "eve_bound"):
            _check_int(cfg, k, 0)
        _check_int(cfg, "block", 1)
        _check_int(cfg, "passes", 1)
    return cfg


def _reject_unknown(provided: dict, kind: str, source: str) -> None:
    extra = set(provided) - allowed_keys(kind)
    if extra:
        names = ", ".join(sorted(extra))
        raise UsageError(
            f"{source}: key(s) not applicable to {kind}: {names}")


def _load_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config file {path}: {exc}")


def parse_config(kind: str, config_path: str | None,
                 flags: dict) -> ExperimentConfig | SweepConfig:
    """Build a validated config for one experiment kind or a sweep.

    flags holds only the options the user actually passed. For sweeps, the
    config file must name the template kind, the swept parameter, and the
    values list; flags apply to the template.
    """
    file_values = _load_file(config_path) if config_path else {}
    if kind == "sweep":
        return _parse_sweep(file_values, flags)

    if "kind" in file_values:
        if file_values["kind"] != kind:
            raise UsageError(
                f"config file kind {file_values['kind']!r} does not match "
                f"command {kind!r}")
        file_values = {k: v for k, v in file_values.items() if k != "kind"}
    _reject_unknown(file_values, kind, "config file")
    _reject_unknown(flags, kind, "flags")

    cfg = ExperimentConfig(kind=kind)
    for k, v in file_values.items():
        cfg = dataclasses.replace(cfg, **{k: v})
    for k, v in flags.items():
        cfg = dataclasses.replace(cfg, **{k: v})
    return validate(cfg)


def _parse_sweep(file_values: dict, flags: dict) -> SweepConfig:
    if not file_values:
        raise UsageError("sweep requires --config with kind, param, values")
    for required in ("kind", "param", "values"):
        if required not in file_values:
            raise UsageError(f"sweep config missing {required!r}")
    template_kind = file_values["kind"]
    if template_kind not in KINDS:
        raise UsageError(f"unknown experiment kind {template_kind!r}")
    param = file_values["param"]
    if param not in SWEEPABLE:
        raise UsageError(
            f"parameter {param!r} is not sweepable "
            f"(choose from {', '.join(SWEEPABLE)})")
    if param not in allowed_keys(template_kind):
        raise UsageError(
            f"parameter {param!r} does not apply to {template_kind!r}")
    values = file_values["values"]
    if not isinstance(values, list) or not values:
        raise UsageError("values must be a non-empty list")

    template_values = {k: v for k, v in file_values.items()
                       if k not in ("kind", "param", "values")}
    _reject_unknown(template_values, template_kind, "config file")
    _reject_unknown({k: v for k, v in flags.items()
                     if k not in ("out", "format")},
                    template_kind, "flags")

    cfg = ExperimentConfig(kind=template_kind)
    for k, v in template_values.items():
        cfg = dataclasses.replace(cfg, **{k: v})
    for k, v in flags.items():
        cfg = dataclasses.replace(cfg, **{k: v})
    cfg = dataclasses.replace(cfg, out=None)
    validate(cfg)

    # each swept value must itself produce a valid config
    for v in values:
        validate(dataclasses.replace(cfg, **{param: v}))

    return SweepConfig(
        param=param,
        values=list(values),
        template=cfg,
        out=flags.get("out", file_values.get("out")),
        format=flags.get("format", file_values.get("format", "csv")),
    )
