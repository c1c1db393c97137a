"""Homogeneous Poisson process on (0, t] and executable checks of its axioms."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import rng as _rng
from .dist_core import PoissonParams, Pmf, poisson_pmf, poisson_pmf_table
from .stat_tests import (
    CountHistogram,
    GofResult,
    chi_square_gof,
    chi_square_two_sample,
    empirical_moments,
    moment_bands,
    pearson_correlation,
    uniformity_gof,
)

METHODS = ("interarrival", "conditional_uniform")


@dataclass(frozen=True)
class ProcessConfig:
    rate: float
    horizon: float
    seed: int = 0
    method: str = "interarrival"

    def __post_init__(self):
        rate, horizon = float(self.rate), float(self.horizon)
        if not (math.isfinite(rate) and rate > 0.0):
            raise ValueError(f"rate must be positive and finite, got {self.rate!r}")
        if not (math.isfinite(horizon) and horizon > 0.0):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        _rng._check_seed(self.seed)
        object.__setattr__(self, "rate", rate)
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def mu(self) -> float:
        return self.rate * self.horizon


@dataclass(frozen=True)
class EventSequence:
    times: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.array(self.times, dtype=float, copy=True).reshape(-1)
        horizon = float(self.horizon)
        if horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if times.size:
            if times[0] <= 0.0 or times[-1] > horizon:
                raise ValueError("event times must lie in (0, horizon]")
            if np.any(np.diff(times) <= 0.0):
                raise ValueError("event times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", horizon)

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, EventSequence):
            return NotImplemented
        return self.horizon == other.horizon and np.array_equal(self.times, other.times)

    __hash__ = None


@dataclass(frozen=True)
class Subdivision:
    """Disjoint half-open intervals (a, b] inside (0, horizon]."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("a subdivision needs at least one interval")
        for a, b in ivs:
            if not (a < b):
                raise ValueError(f"interval ({a}, {b}] is empty or reversed")
            if a < 0.0:
                raise ValueError(f"interval ({a}, {b}] starts before 0")
        ordered = sorted(ivs)
        for (a0, b0), (a1, b1) in zip(ordered, ordered[1:]):
            if a1 < b0:
                raise ValueError(f"intervals ({a0}, {b0}] and ({a1}, {b1}] overlap")
        object.__setattr__(self, "intervals", ivs)

    def check_within(self, horizon: float) -> None:
        for a, b in self.intervals:
            if b > horizon:
                raise ValueError(f"interval ({a}, {b}] extends past the horizon {horizon}")

    @property
    def lengths(self) -> list[float]:
        return [b - a for a, b in self.intervals]


class ReplicaBatch:
    """Event times of many independent replicas, stored flat with offsets."""

    def __init__(self, counts: np.ndarray, times: np.ndarray, horizon: float):
        self.counts = np.asarray(counts, dtype=np.int64)
        self.times = np.asarray(times, dtype=float)
        self.horizon = float(horizon)
        self.offsets = np.concatenate(([0], np.cumsum(self.counts)))

    def __len__(self) -> int:
        return self.counts.size

    def sequence(self, i: int) -> EventSequence:
        return EventSequence(self.times[self.offsets[i] : self.offsets[i + 1]], self.horizon)

    def replica_ids(self) -> np.ndarray:
        return np.repeat(np.arange(self.counts.size), self.counts)

    def histogram(self) -> CountHistogram:
        return CountHistogram.from_counts(self.counts)

    def count_in(self, subdivision: Subdivision) -> np.ndarray:
        """Per-replica counts, shape (replicas, intervals)."""
        subdivision.check_within(self.horizon)
        ids = self.replica_ids()
        out = np.empty((self.counts.size, len(subdivision.intervals)), dtype=np.int64)
        for j, (a, b) in enumerate(subdivision.intervals):
            inside = (self.times > a) & (self.times <= b)
            out[:, j] = np.bincount(ids[inside], minlength=self.counts.size)
        return out


# ---------------------------------------------------------------------------
# generation


def _interarrival_row(g: np.random.Generator, rate: float, t: float) -> np.ndarray:
    out = []
    s = 0.0
    while True:
        s_next = s + g.standard_exponential() / rate
        if s_next > t:
            return np.array(out)
        if s_next > s:
            out.append(s_next)
            s = s_next


def _interarrival_block(g: np.random.Generator, rate: float, t: float, size: int):
    mu = rate * t
    width = int(mu + 6.0 * math.sqrt(mu) + 16)
    cum = np.cumsum(g.standard_exponential((size, width)) / rate, axis=1)
    pending = np.nonzero(cum[:, -1] <= t)[0]
    while pending.size:
        extra = np.full((size, width), np.inf)
        extra[pending] = cum[pending, -1:] + np.cumsum(g.standard_exponential((pending.size, width)) / rate, axis=1)
        cum = np.hstack((cum, extra))
        pending = pending[cum[pending, -1] <= t]
    mask = cum <= t
    counts = mask.sum(axis=1)
    times = cum[mask]
    # a zero gap, or one lost to rounding, breaks strict ordering; redraw that row
    bad = np.zeros(size, dtype=bool)
    bad[cum[:, 0] <= 0.0] = True
    with np.errstate(invalid="ignore"):
        bad |= np.any((np.diff(cum, axis=1) <= 0.0) & mask[:, 1:], axis=1)
    if bad.any():
        offsets = np.concatenate(([0], np.cumsum(counts)))
        rows = [times[offsets[i] : offsets[i + 1]] for i in range(size)]
        for i in np.nonzero(bad)[0]:
            rows[i] = _interarrival_row(g, rate, t)
        counts = np.array([r.size for r in rows])
        times = np.concatenate(rows)
    return counts, times


def _conditional_uniform_block(seed: int, b: int, rate: float, t: float, size: int, place: bool = True):
    # counts and times use separate substreams so a replica's draws do not depend on the block size
    counts = _rng.stream(seed, 1, b, 0).poisson(rate * t, size).astype(np.int64)
    if not place:
        return counts, None
    g = _rng.stream(seed, 1, b, 1)
    row_ids = np.repeat(np.arange(size), counts)
    times = t * (1.0 - g.random(row_ids.size))
    order = np.lexsort((times, row_ids))
    times = times[order]
    while times.size > 1:
        tied = np.nonzero((np.diff(times) == 0.0) & (np.diff(row_ids) == 0))[0] + 1
        if tied.size == 0:
            break
        times[tied] = t * (1.0 - g.random(tied.size))
        order = np.lexsort((times, row_ids))
        times = times[order]
    return counts, times


def simulate(config: ProcessConfig, replicas: int) -> ReplicaBatch:
    """Run ``replicas`` independent copies of the process on (0, horizon]."""
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    counts, times = [], []
    for b, size in _rng.blocks(replicas):
        if config.method == "interarrival":
            c, ts = _interarrival_block(_rng.stream(config.seed, 0, b), config.rate, config.horizon, size)
        else:
            c, ts = _conditional_uniform_block(config.seed, b, config.rate, config.horizon, size)
        counts.append(c)
        times.append(ts)
    return ReplicaBatch(np.concatenate(counts), np.concatenate(times), config.horizon)


def simulate_counts(config: ProcessConfig, replicas: int) -> np.ndarray:
    """Full-horizon event counts per replica; same values as ``simulate(...).counts``."""
    if config.method == "interarrival":
        return simulate(config, replicas).counts
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    parts = []
    for b, size in _rng.blocks(replicas):
        c, _ = _conditional_uniform_block(config.seed, b, config.rate, config.horizon, size, place=False)
        parts.append(c)
    return np.concatenate(parts)


def generate(config: ProcessConfig) -> EventSequence:
    """One realization; identical to replica 0 of ``simulate`` with the same config."""
    return simulate(config, 1).sequence(0)


def count_in(events: EventSequence, subdivision: Subdivision) -> np.ndarray:
    subdivision.check_within(events.horizon)
    ts = events.times
    return np.array(
        [np.searchsorted(ts, b, side="right") - np.searchsorted(ts, a, side="right") for a, b in subdivision.intervals],
        dtype=np.int64,
    )


def empirical_pmf(hist: CountHistogram) -> Pmf:
    """Relative frequencies N(x) / N as a table with no missing mass."""
    if hist.total == 0:
        raise ValueError("cannot build a pmf from an empty histogram")
    lo, hi = hist.min, hist.max + 1
    probs = hist.dense(lo, hi) / hist.total
    return Pmf(lo, probs, 0.0)


# ---------------------------------------------------------------------------
# axiom checks


def rarity_reference_ratio(m: float) -> float:
    """P[N >= 2] / P[N = 1] for N ~ Poisson(m), i.e. (e^m - 1 - m) / m."""
    if m <= 0.0:
        raise ValueError("m must be positive")
    if m < 1e-3:
        return m / 2 + m * m / 6 + m**3 / 24 + m**4 / 120
    return (math.expm1(m) - m) / m


@dataclass(frozen=True)
class RarityRow:
    width: float
    ratio: float | None
    reference: float
    std_error: float
    bins: int
    singles: int
    multiples: int

    def z_score(self) -> float | None:
        if self.ratio is None:
            return None
        return abs(self.ratio - self.reference) / self.std_error

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "ratio": self.ratio,
            "reference": self.reference,
            "std_error": self.std_error,
            "bins": self.bins,
            "singles": self.singles,
            "multiples": self.multiples,
        }


def axiom_rarity_check(config: ProcessConfig, bin_widths: Sequence[float], replicas: int) -> list[RarityRow]:
    """Pooled ratio of bins with >= 2 events to bins with exactly 1, per width.

    Each width tiles (0, floor(t / width) * width] with bins (a, a + width].
    The standard error is the delta-method value at the exact probabilities.
    """
    widths = [float(w) for w in bin_widths]
    if not widths:
        raise ValueError("need at least one bin width")
    for w in widths:
        if not (0.0 < w <= config.horizon):
            raise ValueError(f"bin width {w} must lie in (0, horizon={config.horizon}]")
    if any(b >= a for a, b in zip(widths, widths[1:])):
        raise ValueError("bin widths must be strictly decreasing")
    batch = simulate(config, replicas)
    ids = batch.replica_ids()
    rows = []
    for w in widths:
        n_bins = int(math.floor(config.horizon / w * (1 + 1e-12)))
        idx = np.maximum(np.ceil(batch.times / w).astype(np.int64) - 1, 0)
        keep = idx < n_bins
        _, per_bin = np.unique(ids[keep] * n_bins + idx[keep], return_counts=True)
        singles = int(np.sum(per_bin == 1))
        multiples = int(np.sum(per_bin >= 2))
        m = config.rate * w
        ref = rarity_reference_ratio(m)
        p_one = m * math.exp(-m)
        total_bins = n_bins * replicas
        se = math.sqrt(ref * (1.0 + ref) / (p_one * total_bins))
        ratio = multiples / singles if singles else None
        rows.append(RarityRow(w, ratio, ref, se, total_bins, singles, multiples))
    return rows


@dataclass(frozen=True)
class IndependenceResult:
    correlation: float | None
    std_error: float
    replicas: int

    def to_dict(self) -> dict:
        return {"correlation": self.correlation, "std_error": self.std_error, "replicas": self.replicas}


def _pair(config: ProcessConfig, pair) -> Subdivision:
    if len(pair) != 2:
        raise ValueError("need exactly two intervals")
    sub = Subdivision(tuple(pair))
    sub.check_within(config.horizon)
    return sub


def axiom_independence_check(config: ProcessConfig, pair, replicas: int) -> IndependenceResult:
    """Correlation between counts in two disjoint intervals across replicas."""
    sub = _pair(config, pair)
    counts = simulate(config, replicas).count_in(sub)
    return IndependenceResult(pearson_correlation(counts[:, 0], counts[:, 1]), 1.0 / math.sqrt(replicas), replicas)


def axiom_stationarity_check(config: ProcessConfig, pair, replicas: int) -> GofResult:
    """Two-sample chi-square between count histograms of two equal-length disjoint intervals."""
    sub = _pair(config, pair)
    la, lb = sub.lengths
    if not math.isclose(la, lb, rel_tol=1e-12):
        raise ValueError(f"intervals must have equal length, got {la} and {lb}")
    counts = simulate(config, replicas).count_in(sub)
    return chi_square_two_sample(CountHistogram.from_counts(counts[:, 0]), CountHistogram.from_counts(counts[:, 1]))


@dataclass(frozen=True)
class RateEstimate:
    ratios: tuple
    pooled: float


def rate_estimate(hist_pairs: Sequence[tuple[int, float]]) -> RateEstimate:
    """Per-window ratios x_i / t_i and the pooled sum(x) / sum(t)."""
    pairs = [(int(x), float(t)) for x, t in hist_pairs]
    if not pairs:
        raise ValueError("need at least one (count, extent) pair")
    if any(t <= 0.0 for _, t in pairs):
        raise ValueError("extents must be positive")
    if any(x < 0 for x, _ in pairs):
        raise ValueError("counts must be >= 0")
    ratios = tuple(x / t for x, t in pairs)
    return RateEstimate(ratios, sum(x for x, _ in pairs) / math.fsum(t for _, t in pairs))


# ---------------------------------------------------------------------------
# law checks


@dataclass(frozen=True)
class PoissonLawReport:
    histogram: CountHistogram
    gof: GofResult
    zero_frequency: float
    zero_expected: float
    zero_std_error: float
    mean: float
    variance: float
    mean_std_error: float
    variance_std_error: float

    def to_dict(self) -> dict:
        return {
            "gof": self.gof.to_dict(),
            "zero_frequency": self.zero_frequency,
            "zero_expected": self.zero_expected,
            "zero_std_error": self.zero_std_error,
            "mean": self.mean,
            "variance": self.variance,
            "mean_std_error": self.mean_std_error,
            "variance_std_error": self.variance_std_error,
        }


def verify_poisson_law(config: ProcessConfig, replicas: int) -> PoissonLawReport:
    """Full-horizon counts against Poisson(rate * horizon): GOF, zero frequency, moments."""
    params = PoissonParams(config.mu)
    hist = CountHistogram.from_counts(simulate_counts(config, replicas))
    gof = chi_square_gof(hist, poisson_pmf_table(params, 1e-12))
    p0 = poisson_pmf(0, params)
    mean, var = empirical_moments(hist)
    se_mean, se_var = moment_bands(config.mu, replicas)
    return PoissonLawReport(
        hist,
        gof,
        hist[0] / replicas,
        p0,
        math.sqrt(p0 * (1 - p0) / replicas),
        mean,
        var,
        se_mean,
        se_var,
    )


def pooled_times_given_count(config: ProcessConfig, replicas: int, count: int) -> np.ndarray:
    batch = simulate(config, replicas)
    sel = np.nonzero(batch.counts == count)[0]
    if sel.size == 0:
        return np.empty(0)
    return np.concatenate([batch.times[batch.offsets[i] : batch.offsets[i + 1]] for i in sel])


def verify_conditional_uniformity(
    config: ProcessConfig, replicas: int, count: int | None = None, n_bins: int = 20
) -> GofResult:
    """Event times from replicas with exactly ``count`` events, pooled and binned on (0, t]."""
    if count is None:
        count = max(1, int(round(config.mu)))
    times = pooled_times_given_count(config, replicas, count)
    return uniformity_gof(times, 0.0, config.horizon, n_bins)


def compare_methods(config: ProcessConfig, replicas: int) -> GofResult:
    """Two-sample chi-square between count histograms of the two generators."""
    a = simulate_counts(replace(config, method="interarrival"), replicas)
    b = simulate_counts(replace(config, method="conditional_uniform"), replicas)
    return chi_square_two_sample(CountHistogram.from_counts(a), CountHistogram.from_counts(b))
