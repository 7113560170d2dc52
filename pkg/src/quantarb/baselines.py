"""Static ensemble baselines: per-level median, per-level mean, point mean."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import QuantileForecast
from .errors import DimensionMismatch


def _stack(forecasts: Sequence[QuantileForecast]) -> np.ndarray:
    if not forecasts:
        raise ValueError("at least one forecast is required")
    levels = forecasts[0].levels.levels
    for i, fc in enumerate(forecasts):
        if fc.levels.levels != levels:
            raise DimensionMismatch(f"forecast {i} uses a different quantile grid")
    return np.array([fc.values for fc in forecasts], dtype=float)


def quantile_median_ensemble(forecasts: Sequence[QuantileForecast]) -> QuantileForecast:
    """Per-level median across models; even counts average the middle pair."""
    values = np.median(_stack(forecasts), axis=0)
    return QuantileForecast(forecasts[0].levels, tuple(float(v) for v in values))


def quantile_mean_ensemble(forecasts: Sequence[QuantileForecast]) -> QuantileForecast:
    """Per-level arithmetic mean across models."""
    values = np.mean(_stack(forecasts), axis=0)
    return QuantileForecast(forecasts[0].levels, tuple(float(v) for v in values))


def point_mean(forecasts: Sequence[QuantileForecast]) -> float:
    """Mean of the models' level-0.5 values."""
    if not forecasts:
        raise ValueError("at least one forecast is required")
    return float(np.mean([fc.median for fc in forecasts]))
