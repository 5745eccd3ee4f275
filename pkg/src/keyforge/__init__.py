"""keyforge: deterministic, seeded simulation of key-establishment
protocols, eavesdropping strategies, and classical post-processing."""

from .bb84 import BB84Result, InterceptResend, eve_accuracy, run_bb84
from .channels import (
    BroadcastChannel,
    ClassicalChannel,
    ProtocolViolation,
    PulseRecord,
    QuantumChannel,
    TapLog,
)
from .config import ExperimentConfig, SweepConfig, UsageError, parse_config
from .metrics import SecurityReport, key_rate, mutual_information, qber
from .model import Basis, Polarization, Transcript, bits_to_hex, hex_to_bits
from .postprocess import (
    InsufficientSecrecyMargin,
    StageLedger,
    advantage_distill,
    block_error,
    cascade_reconcile,
    estimate_error,
    privacy_amplify,
    toeplitz_hash,
)
from .rng import RandomSource, generator, sub_seed
from .runner import RunReport, run_experiment, run_sweep
from .skapd import NoisyCopy, SatelliteString, ml_decode, run_skapd, \
    satellite_broadcast
from .substitution import SubstitutionResult, run_substitution

__version__ = "0.1.0"

__all__ = [
    "BB84Result", "InterceptResend", "eve_accuracy", "run_bb84",
    "BroadcastChannel", "ClassicalChannel", "ProtocolViolation",
    "PulseRecord", "QuantumChannel", "TapLog",
    "ExperimentConfig", "SweepConfig", "UsageError", "parse_config",
    "SecurityReport", "key_rate", "mutual_information", "qber",
    "Basis", "Polarization", "Transcript", "bits_to_hex", "hex_to_bits",
    "InsufficientSecrecyMargin", "StageLedger", "advantage_distill",
    "block_error", "cascade_reconcile", "estimate_error", "privacy_amplify",
    "toeplitz_hash",
    "RandomSource", "generator", "sub_seed",
    "RunReport", "run_experiment", "run_sweep",
    "NoisyCopy", "SatelliteString", "ml_decode", "run_skapd",
    "satellite_broadcast",
    "SubstitutionResult", "run_substitution",
    "__version__",
]
