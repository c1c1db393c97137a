"""Volume of the ordered region 0 < t1 < ... < tx <= t, three ways.

The closed form t**x / x! is checked against an iterated one-dimensional
cumulative integral and against the fraction of uniform tuples that come out
strictly ascending.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng

MAX_DIMENSION = 10**6
MAX_EXTENT = 1e6
_LOG_MAX_FLOAT = math.log(np.finfo(float).max)
_MC_BLOCK = 1 << 16


@dataclass(frozen=True)
class OrthantSpec:
    dimension: int
    extent: float

    def __post_init__(self):
        x = self.dimension
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
            raise TypeError(f"dimension must be an integer, got {x!r}")
        if not (1 <= x <= MAX_DIMENSION):
            raise ValueError(f"dimension must lie in [1, {MAX_DIMENSION}], got {x}")
        t = float(self.extent)
        if not (math.isfinite(t) and 0.0 < t <= MAX_EXTENT):
            raise ValueError(f"extent must lie in (0, {MAX_EXTENT:g}], got {self.extent!r}")
        object.__setattr__(self, "dimension", int(x))
        object.__setattr__(self, "extent", t)


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    samples: int

    def __post_init__(self):
        if self.std_error < 0 or self.samples <= 0:
            raise ValueError(f"invalid estimate {self!r}")

    def z_score(self, exact: float) -> float:
        """Deviation in units of std_error (inf when std_error is 0 and value is off)."""
        diff = abs(self.value - exact)
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.inf
        return diff / self.std_error


def log_orthant_volume(spec: OrthantSpec) -> float:
    return spec.dimension * math.log(spec.extent) - math.lgamma(spec.dimension + 1)


def rectangle_volume(spec: OrthantSpec) -> float:
    """Volume t**x of the box (0, t]^x."""
    return spec.extent**spec.dimension


def orthant_volume_exact(spec: OrthantSpec) -> float:
    """t**x / x!, evaluated in log space."""
    if spec.dimension == 1:
        return spec.extent
    lv = log_orthant_volume(spec)
    if lv > _LOG_MAX_FLOAT:
        raise OverflowError(f"volume exp({lv:.1f}) is not representable; use log_orthant_volume")
    return math.exp(lv)


def orthant_volume_recursive(spec: OrthantSpec, quad_steps: int = 10_000) -> float:
    """Iterate V_{k+1}(u) = integral_0^u V_k with the composite trapezoid rule."""
    if quad_steps < 10:
        raise ValueError(f"quad_steps must be >= 10, got {quad_steps}")
    t = spec.extent
    if spec.dimension == 1:
        return t
    u = np.linspace(0.0, t, quad_steps + 1)
    h = t / quad_steps
    v = u
    for _ in range(spec.dimension - 1):
        v = np.concatenate(([0.0], np.cumsum(0.5 * h * (v[1:] + v[:-1]))))
    return float(v[-1])


def orthant_volume_mc(spec: OrthantSpec, samples: int, seed: int) -> VolumeEstimate:
    """Hit-fraction estimate: t**x times the share of strictly ascending tuples.

    Coordinates are drawn one column at a time and only for tuples still
    ascending, which changes the cost but not the estimator.
    """
    if samples < 1000:
        raise ValueError(f"samples must be >= 1000, got {samples}")
    x, t = spec.dimension, spec.extent
    rect = rectangle_volume(spec)
    if x == 1:
        return VolumeEstimate(rect, 0.0, samples)
    hits = 0
    for b, size in _rng.blocks(samples, _MC_BLOCK):
        g = _rng.stream(seed, b)
        prev = t * (1.0 - g.random(size))
        for _ in range(x - 1):
            cur = t * (1.0 - g.random(prev.size))
            prev = cur[cur > prev]
            if prev.size == 0:
                break
        hits += prev.size
    p_hat = hits / samples
    return VolumeEstimate(rect * p_hat, rect * math.sqrt(p_hat * (1.0 - p_hat) / samples), samples)


def conditional_event_density(x: int, t: float) -> float:
    """x! / t**x: the density of x ordered event times given x events in (0, t]."""
    if x == 0:
        raise ValueError("the conditional density is undefined for zero events")
    return math.exp(log_conditional_event_density(x, t))


def log_conditional_event_density(x: int, t: float) -> float:
    if x == 0:
        raise ValueError("the conditional density is undefined for zero events")
    return -log_orthant_volume(OrthantSpec(x, t))
