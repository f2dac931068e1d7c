"""Integer slope predictors and their residual metrics.

A predictor of order L estimates the next sample from the last L ones
with fixed integer coefficients (repeated first differences):

    order 1:  x^(n) = x(n-1)
    order 2:  x^(n) = 2 x(n-1) - x(n-2)
    order 3:  x^(n) = 3 x(n-1) - 3 x(n-2) + x(n-3)
    order 4:  x^(n) = 4 x(n-1) - 6 x(n-2) + 4 x(n-3) - x(n-4)

The residual e(n) = x(n) - x^(n) is what gets packed. History starts as
zeros on both sides of the link, so encoder and decoder agree from the
first sample. All arithmetic is exact integer math.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import CorruptStreamError

SAMPLE_BITS = 12
SAMPLE_MIN = -(1 << (SAMPLE_BITS - 1))
SAMPLE_MAX = (1 << (SAMPLE_BITS - 1)) - 1

# Residuals of orders 1..2 on 12-bit input always fit 14 bits.
RESIDUAL_BITS = SAMPLE_BITS + 2

PREDICTOR_COEFFS: dict[int, tuple[int, ...]] = {
    1: (1,),
    2: (2, -1),
    3: (3, -3, 1),
    4: (4, -6, 4, -1),
}


def coefficients(order: int) -> tuple[int, ...]:
    try:
        return PREDICTOR_COEFFS[order]
    except KeyError:
        raise ValueError(f"predictor order must be 1..4, got {order!r}") from None


def zero_state(order: int) -> list[int]:
    """Fresh history (most recent first), predetermined to zeros."""
    return [0] * len(coefficients(order))


def check_sample(x: int) -> int:
    if not SAMPLE_MIN <= x <= SAMPLE_MAX:
        raise ValueError(f"sample {x} outside {SAMPLE_MIN}..{SAMPLE_MAX}")
    return x


def predict(history: Sequence[int], order: int) -> int:
    """Predicted next sample from history (most recent first)."""
    coef = coefficients(order)
    if len(history) != len(coef):
        raise ValueError(f"order-{order} predictor needs {len(coef)} history samples, got {len(history)}")
    return sum(a * h for a, h in zip(coef, history))


def prediction_error(x: int, history: Sequence[int], order: int) -> int:
    check_sample(x)
    return x - predict(history, order)


def advance(history: Sequence[int], x: int) -> list[int]:
    """Shift x into the history, dropping the oldest entry."""
    return [x, *history[:-1]]


def reconstruct(error: int, history: Sequence[int], order: int) -> int:
    """Inverse of prediction_error; rejects results outside the sample range."""
    x = predict(history, order) + error
    if not SAMPLE_MIN <= x <= SAMPLE_MAX:
        raise CorruptStreamError(f"reconstructed sample {x} outside {SAMPLE_MIN}..{SAMPLE_MAX}")
    return x


def residuals(samples: Sequence[int], order: int) -> np.ndarray:
    """Residual sequence for a whole channel, zero-initialized history.

    Vectorized equivalent of running prediction_error / advance over the
    sequence; returns int64 so no intermediate can overflow.
    """
    coef = coefficients(order)
    x = np.asarray(samples, dtype=np.int64)
    if x.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    if x.size:
        if x.min() < SAMPLE_MIN or x.max() > SAMPLE_MAX:
            raise ValueError(f"samples outside {SAMPLE_MIN}..{SAMPLE_MAX}")
    L = len(coef)
    padded = np.concatenate([np.zeros(L, dtype=np.int64), x])
    predicted = np.zeros(x.size, dtype=np.int64)
    for k, a in enumerate(coef, start=1):
        predicted += a * padded[L - k : L - k + x.size]
    return x - predicted


def mape(samples: Sequence[int], order: int) -> float:
    """Mean absolute prediction error over the sequence, warm-up included."""
    e = residuals(samples, order)
    if e.size == 0:
        raise ValueError("cannot score an empty sequence")
    return int(np.abs(e).sum()) / e.size


def rmspe(samples: Sequence[int], order: int) -> float:
    """Root mean square prediction error over the sequence, warm-up included."""
    e = residuals(samples, order)
    if e.size == 0:
        raise ValueError("cannot score an empty sequence")
    return math.sqrt(int((e * e).sum()) / e.size)
