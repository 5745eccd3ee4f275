"""Session metrics: error rates, mutual information, key rate.

All functions are pure and operate on 0/1 integer arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CSV_FIELDS = ("qber", "sift_fraction", "eve_accuracy", "eve_mi", "key_rate",
              "final_len", "leaked", "aborted")


def qber(key_a: np.ndarray, key_b: np.ndarray) -> float:
    """Disagreement fraction between two equal-length keys."""
    a = np.asarray(key_a)
    b = np.asarray(key_b)
    if len(a) != len(b):
        raise ValueError("keys must have equal length")
    if len(a) == 0:
        raise ValueError("keys must be non-empty")
    return float(np.mean(a != b))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def mutual_information(x: np.ndarray, y: np.ndarray,
                       return_flag: bool = False):
    """Plug-in mutual information of two bit strings, in bits.

    Estimated from the empirical 2x2 joint distribution. A degenerate
    marginal (either variable constant) carries no information; the value
    is 0.0 and, with return_flag, the flag marks the degeneracy.
    """
    x = np.asarray(x).astype(np.uint8)
    y = np.asarray(y).astype(np.uint8)
    if len(x) != len(y):
        raise ValueError("inputs must have equal length")
    if len(x) == 0:
        raise ValueError("inputs must be non-empty")
    n = len(x)
    counts = np.bincount(x * 2 + y, minlength=4)
    joint = counts.reshape(2, 2) / n
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    degenerate = bool(px[0] in (0.0, 1.0) or py[0] in (0.0, 1.0))
    mi = 0.0
    if not degenerate:
        for i in (0, 1):
            for j in (0, 1):
                p = joint[i, j]
                if p > 0:
                    mi += p * math.log2(p / (px[i] * py[j]))
        mi = max(mi, 0.0)
    if return_flag:
        return mi, degenerate
    return mi


def key_rate(final_length: int, channel_uses: int) -> float:
    """Final key bits per channel use (pulses sent or satellite bits)."""
    if channel_uses <= 0:
        raise ValueError("channel uses must be positive")
    if final_length < 0:
        raise ValueError("final length must be >= 0")
    return final_length / channel_uses


@dataclass
class SecurityReport:
    """Per-trial metrics row. None marks a value undefined for the trial
    (for example Eve's accuracy when the pipeline aborted with no key)."""

    qber: float
    sift_fraction: float
    eve_accuracy: float | None
    eve_mi: float
    key_rate: float
    final_len: int
    leaked: int
    aborted: bool

    def csv_row(self, trial: int) -> str:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return str(int(v))
            if isinstance(v, float):
                return repr(v)
            return str(v)

        cells = [str(trial)] + [fmt(getattr(self, f)) for f in CSV_FIELDS]
        return ",".join(cells)

    def as_dict(self, trial: int) -> dict:
        obj = {"trial": trial}
        for f in CSV_FIELDS:
            v = getattr(self, f)
            if isinstance(v, bool):
                v = int(v)
            obj[f] = v
        return obj


CSV_HEADER = "trial," + ",".join(CSV_FIELDS)
