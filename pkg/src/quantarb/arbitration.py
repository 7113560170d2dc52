"""Dynamic arbitration over a model pool via weighted predictive sampling.

Per timestep: score each model's recent accuracy over a rolling performance
window, convert scores to weights, apportion a fixed sample budget across
models, draw from each model's inverse CDF, and report empirical quantiles of
the pooled draws. The arbitrated median then stands in for the unknown
observation when the window is updated, so weights adapt inside the horizon
without access to actuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    ArbitrationStep,
    ArbitrationTrace,
    ForecastPanel,
    PerformanceRecord,
    PerformanceWindow,
    QuantileForecast,
    QuantileLevels,
    WeightVector,
)
from .errors import AlignmentMismatch, DimensionMismatch, EmptyWindow
from .metrics import crps_timestep
from .quantiles import RandomStreams, empirical_quantiles, fit_inverse_cdf, sample

# Weight-rule labels recorded in traces.
RULE_UNIFORM = "uniform"
RULE_INVERSE_ERROR = "inverse_error"
RULE_SOFTMAX = "softmax"
RULE_STATIC = "static"

#: Cap applied to the horizon-derived default window capacity.
DEFAULT_WINDOW_CAP = 16


@dataclass(frozen=True)
class ArbitratorConfig:
    """Knobs for one arbitration run.

    ``window_capacity=None`` resolves to ``min(horizon, 16)`` at run time.
    ``levels=None`` reports arbitrated quantiles on the input forecasts' own
    grid. Mode ``static-uniform`` freezes weights at 1/N for ablations.
    """

    n_total: int = 1500
    window_capacity: int | None = None
    levels: QuantileLevels | None = None
    softmax_temperature: float = 1.0
    near_zero_epsilon: float = 1e-9
    mode: str = "dynamic"

    def __post_init__(self) -> None:
        if self.n_total < 1:
            raise ValueError(f"n_total must be >= 1, got {self.n_total}")
        if self.window_capacity is not None and self.window_capacity < 1:
            raise ValueError(f"window capacity must be >= 1, got {self.window_capacity}")
        if not self.softmax_temperature > 0.0:
            raise ValueError(f"softmax temperature must be > 0, got {self.softmax_temperature}")
        if self.near_zero_epsilon < 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.near_zero_epsilon}")
        if self.mode not in ("dynamic", "static-uniform"):
            raise ValueError(f"unknown weighting mode {self.mode!r}")

    def resolve_capacity(self, horizon: int) -> int:
        if self.window_capacity is not None:
            return self.window_capacity
        return min(horizon, DEFAULT_WINDOW_CAP)


def average_crps_scores(window: PerformanceWindow) -> tuple[float, ...]:
    """Each model's CRPS against the window's observations, averaged.

    Window order does not matter; every model is scored against the same
    observations.
    """
    if window.is_empty:
        raise EmptyWindow("cannot score models against an empty window")
    n_models = len(window.records[0].forecasts)
    scores = []
    for i in range(n_models):
        per_record = [
            crps_timestep(rec.forecasts[i], rec.observation) for rec in window.records
        ]
        scores.append(math.fsum(per_record) / len(per_record))
    return tuple(scores)


def weights_with_rule(
    scores: Sequence[float], config: ArbitratorConfig
) -> tuple[WeightVector, str]:
    """Weights from scores, plus which rule produced them.

    Inverse-error weighting when every score is safely positive; otherwise a
    temperature softmax of the negated scores, which tolerates exact zeros.
    Both paths use exact summation so the result is independent of model
    order.
    """
    if min(scores) > config.near_zero_epsilon:
        return WeightVector.normalized([1.0 / s for s in scores]), RULE_INVERSE_ERROR
    logits = [-s / config.softmax_temperature for s in scores]
    shift = max(logits)
    exps = [math.exp(z - shift) for z in logits]
    return WeightVector.normalized(exps), RULE_SOFTMAX


def compute_weights(scores: Sequence[float], config: ArbitratorConfig) -> WeightVector:
    """Arbitration weights from average-CRPS scores."""
    weights, _ = weights_with_rule(scores, config)
    return weights


def allocate_samples(weights: WeightVector, n_total: int) -> tuple[int, ...]:
    """Largest-remainder apportionment of the sample budget by weights.

    Counts always sum to ``n_total`` exactly; zero counts are legal. Remainder
    units go to the largest fractional parts, lowest index first on ties.
    """
    if n_total < 1:
        raise ValueError(f"n_total must be >= 1, got {n_total}")
    scaled = [w * n_total for w in weights.weights]
    counts = [math.floor(x) for x in scaled]
    remainder = n_total - sum(counts)
    by_fraction = sorted(
        range(len(counts)), key=lambda i: (counts[i] - scaled[i], i)
    )
    for i in by_fraction[:remainder]:
        counts[i] += 1
    return tuple(counts)


def arbitrate_timestep(
    forecasts: Sequence[QuantileForecast],
    weights: WeightVector,
    config: ArbitratorConfig,
    streams: RandomStreams,
    model_names: Sequence[str] | None = None,
) -> tuple[QuantileForecast, tuple[int, ...]]:
    """Pool weighted draws from every model and summarize them as quantiles.

    Each model draws from its own substream, keyed by name when names are
    given (index otherwise); that keying is what makes the result invariant
    under model reordering.
    """
    if len(forecasts) != len(weights):
        raise DimensionMismatch(
            f"{len(forecasts)} forecasts for {len(weights)} weights"
        )
    counts = allocate_samples(weights, config.n_total)
    pools = []
    for i, (forecast, count) in enumerate(zip(forecasts, counts)):
        if count == 0:
            continue
        key = model_names[i] if model_names is not None else i
        rng = streams.child(key).generator()
        pools.append(sample(fit_inverse_cdf(forecast), count, rng))
    levels = config.levels if config.levels is not None else forecasts[0].levels
    return empirical_quantiles(np.concatenate(pools), levels), counts


def run_arbitration(
    panel: ForecastPanel,
    initial_window: PerformanceWindow | None = None,
    config: ArbitratorConfig | None = None,
    streams: RandomStreams | None = None,
    seed: int = 0,
) -> ArbitrationTrace:
    """Arbitrate one panel over its full horizon.

    The feedback loop is sequential: each step's arbitrated median is pushed
    into the window as a stand-in observation before the next step is scored.
    Pass ``streams`` shared across panels to keep per-model draws identical
    regardless of which other series are processed; plain ``seed`` builds a
    fresh stream tree.
    """
    config = config if config is not None else ArbitratorConfig()
    n = panel.n_models
    if config.n_total < n:
        raise ValueError(
            f"n_total {config.n_total} cannot cover {n} models with one sample each"
        )
    if initial_window is None:
        window = PerformanceWindow(config.resolve_capacity(panel.horizon))
    else:
        window = initial_window
        if not window.is_empty and len(window.records[0].forecasts) != n:
            raise DimensionMismatch(
                f"initial window records cover {len(window.records[0].forecasts)} "
                f"models, panel has {n}"
            )
    if streams is None:
        streams = RandomStreams(seed)
    series_streams = streams.child("series", panel.series_id)
    names = panel.model_names
    steps = []
    for t in range(panel.horizon):
        forecasts = panel.forecasts_at(t)
        if config.mode == "static-uniform":
            scores, weights, rule = None, WeightVector.uniform(n), RULE_STATIC
        elif window.is_empty:
            scores, weights, rule = None, WeightVector.uniform(n), RULE_UNIFORM
        else:
            scores = average_crps_scores(window)
            weights, rule = weights_with_rule(scores, config)
        arbitrated, counts = arbitrate_timestep(
            forecasts, weights, config, series_streams.child("t", t), model_names=names
        )
        simulated = arbitrated.median
        window = window.push(PerformanceRecord(simulated, forecasts))
        steps.append(
            ArbitrationStep(
                forecast=arbitrated,
                weights=weights,
                sample_counts=counts,
                simulated_truth=simulated,
                scores=scores,
                weight_rule=rule,
            )
        )
    return ArbitrationTrace(
        series_id=panel.series_id,
        model_names=names,
        n_total=config.n_total,
        steps=tuple(steps),
    )


def seed_window_from_context(
    panel: ForecastPanel,
    backtest_forecasts: Mapping[str, Sequence[Sequence[float]]] | None = None,
    config: ArbitratorConfig | None = None,
) -> PerformanceWindow:
    """Build an initial window from backtest forecasts over the context tail.

    ``backtest_forecasts`` maps every panel model to an L x K quantile matrix
    for the last L context steps; the true context values become the window
    observations. Without backtest forecasts the window starts empty and the
    first arbitration step falls back to uniform weights.
    """
    config = config if config is not None else ArbitratorConfig()
    capacity = config.resolve_capacity(panel.horizon)
    if not backtest_forecasts:
        return PerformanceWindow(capacity)
    if set(backtest_forecasts) != set(panel.model_names):
        missing = sorted(set(panel.model_names) - set(backtest_forecasts))
        extra = sorted(set(backtest_forecasts) - set(panel.model_names))
        raise AlignmentMismatch(
            f"backtest models do not match panel models (missing {missing}, extra {extra})"
        )
    lengths = {name: len(m) for name, m in backtest_forecasts.items()}
    if len(set(lengths.values())) != 1:
        raise AlignmentMismatch(f"backtest step counts disagree: {lengths}")
    span = next(iter(lengths.values()))
    usable = min(capacity, len(panel.context))
    if span > usable:
        raise AlignmentMismatch(
            f"{span} backtest steps cannot align with the last {usable} context values"
        )
    levels = panel.levels
    observations = panel.context[-span:] if span else ()
    window = PerformanceWindow(capacity)
    for j in range(span):
        forecasts = tuple(
            QuantileForecast(levels, tuple(backtest_forecasts[name][j]))
            for name in panel.model_names
        )
        window = window.push(PerformanceRecord(observations[j], forecasts))
    return window
