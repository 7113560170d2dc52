"""Continuous inverse CDFs from discrete quantiles, and sampling machinery.

A forecast's K quantile points are turned into a continuous, monotone quantile
function: a shape-preserving cubic through the knots on the interior level
range, continued linearly beyond the outermost knots using the adjacent
segment slopes. Inverse-transform draws from that function feed the pooled
empirical quantiles used by arbitration.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .core import QuantileForecast, QuantileLevels
from .errors import EmptySampleSet


class InverseCdf:
    """Monotone quantile function fitted to ``(level, value)`` knots.

    Exactly interpolates every knot; non-decreasing on all of (0, 1). Evaluate
    with scalar or array probabilities.
    """

    __slots__ = ("levels", "values", "_interior", "_lo_slope", "_hi_slope")

    def __init__(self, levels: np.ndarray, values: np.ndarray) -> None:
        levels = np.asarray(levels, dtype=float)
        # Running max absorbs sub-tolerance float dips so the fit is always
        # fed non-decreasing knots.
        values = np.maximum.accumulate(np.asarray(values, dtype=float))
        self.levels = levels
        self.values = values
        if len(levels) >= 2:
            # Tied knots make the slope formula divide by zero internally;
            # the fit is still correct (flat segment), so keep it quiet.
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                self._interior = PchipInterpolator(levels, values, extrapolate=False)
            self._lo_slope = max(0.0, (values[1] - values[0]) / (levels[1] - levels[0]))
            self._hi_slope = max(0.0, (values[-1] - values[-2]) / (levels[-1] - levels[-2]))
        else:
            self._interior = None
            self._lo_slope = 0.0
            self._hi_slope = 0.0

    def __call__(self, p: float | Sequence[float] | np.ndarray) -> float | np.ndarray:
        scalar = np.isscalar(p)
        pa = np.atleast_1d(np.asarray(p, dtype=float))
        out = np.empty_like(pa)
        lo = pa <= self.levels[0]
        hi = pa >= self.levels[-1]
        mid = ~(lo | hi)
        out[lo] = self.values[0] + (pa[lo] - self.levels[0]) * self._lo_slope
        out[hi] = self.values[-1] + (pa[hi] - self.levels[-1]) * self._hi_slope
        if self._interior is not None and mid.any():
            out[mid] = self._interior(pa[mid])
        return float(out[0]) if scalar else out

    @property
    def support(self) -> tuple[float, float]:
        """Range of attainable values: [F^-1(0), F^-1(1)]."""
        low = self.values[0] - self.levels[0] * self._lo_slope
        high = self.values[-1] + (1.0 - self.levels[-1]) * self._hi_slope
        return float(low), float(high)


def fit_inverse_cdf(forecast: QuantileForecast) -> InverseCdf:
    """Fit the continuous inverse CDF of a validated quantile forecast."""
    return InverseCdf(np.asarray(forecast.levels.levels), np.asarray(forecast.values))


def sample(icdf: InverseCdf, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` inverse-transform samples using the caller's random stream."""
    if n < 0:
        raise ValueError(f"sample count must be >= 0, got {n}")
    if n == 0:
        return np.empty(0, dtype=float)
    return np.asarray(icdf(rng.random(n)), dtype=float)


def empirical_quantiles(
    samples: Sequence[float] | np.ndarray, levels: QuantileLevels
) -> QuantileForecast:
    """Empirical quantiles of a pooled sample set at the given levels.

    Uses the sorted-sample linear-interpolation estimator at position
    ``(n - 1) * alpha``; output values are monotone by construction.
    """
    xs = np.asarray(samples, dtype=float)
    if xs.size == 0:
        raise EmptySampleSet("cannot take quantiles of an empty sample set")
    q = np.quantile(xs, np.asarray(levels.levels))
    return QuantileForecast(levels, tuple(float(v) for v in q))


def _component_key(component: str | int) -> int:
    """Stable 64-bit key for one stream-path component."""
    if isinstance(component, bool):  # bool is an int subclass; keep it out
        raise TypeError("stream path components must be str or int")
    if isinstance(component, int):
        return component & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.blake2b(str(component).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RandomStreams:
    """Deterministic tree of counter-based random streams.

    Each node is identified by a master seed plus a path of string/int keys;
    ``child`` extends the path and ``generator`` materializes an independent
    Philox stream. Keying substreams by names (not positions) is what makes
    arbitration permutation-equivariant bit-for-bit.
    """

    __slots__ = ("seed", "path")

    def __init__(self, seed: int, path: tuple[int, ...] = ()) -> None:
        self.seed = int(seed)
        self.path = tuple(path)

    def child(self, *components: str | int) -> "RandomStreams":
        return RandomStreams(
            self.seed, self.path + tuple(_component_key(c) for c in components)
        )

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence((self.seed & 0xFFFFFFFFFFFFFFFF,) + self.path)
        return np.random.Generator(np.random.Philox(seq))
