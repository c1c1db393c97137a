"""Exact Poisson, binomial and multinomial laws.

Point probabilities use the saddle-point formulation (Stirling remainder plus
a deviance term) rather than a raw log-gamma difference: lgamma(x + 1) near
x = 1e6 carries an absolute error of a few 1e-9, which would leak straight
into the relative error of the probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_2PI = math.log(2.0 * math.pi)

# Stirling remainder lgamma(n + 1) - (n + 1/2) log n + n - log sqrt(2 pi) for n = 0..15
_STIRLERR_TABLE = (
    0.0,
    0.08106146679532726,
    0.0413406959554093,
    0.02767792568499834,
    0.020790672103765093,
    0.016644691189821193,
    0.013876128823070748,
    0.01189670994589177,
    0.010411265261972096,
    0.009255462182712733,
    0.00833056343336287,
    0.007573675487951841,
    0.00694284010720953,
    0.006408994188004207,
    0.0059513701127588475,
    0.005554733551962801,
)

MAX_COUNT = 10**9
NORMALIZATION_TOL = 1e-12


def _stirlerr(n: int) -> float:
    if n <= 15:
        return _STIRLERR_TABLE[n]
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    nn = float(n) * n
    if n > 500:
        return (s0 - s1 / nn) / n
    if n > 80:
        return (s0 - (s1 - s2 / nn) / nn) / n
    if n > 35:
        return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, m: float) -> float:
    """Deviance term x log(x/m) + m - x, accurate when x is close to m."""
    if abs(x - m) < 0.1 * (x + m):
        v = (x - m) / (x + m)
        s = (x - m) * v
        ej = 2.0 * x * v
        v = v * v
        j = 1
        while True:
            ej *= v
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / m) + m - x


def _check_count(x, name: str = "x") -> int:
    if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
        if isinstance(x, (float, np.floating)) and float(x).is_integer():
            x = int(x)
        else:
            raise TypeError(f"{name} must be an integer count, got {x!r}")
    x = int(x)
    if x < 0:
        raise ValueError(f"{name} must be >= 0, got {x}")
    return x


# ---------------------------------------------------------------------------
# parameter types


@dataclass(frozen=True)
class PoissonParams:
    """Expected count ``mu = rate * extent`` of a Poisson law."""

    mu: float

    def __post_init__(self):
        mu = float(self.mu)
        if not math.isfinite(mu) or mu <= 0.0:
            raise ValueError(f"mu must be positive and finite, got {self.mu!r}")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_rate(cls, rate: float, extent: float) -> "PoissonParams":
        return cls(float(rate) * float(extent))


@dataclass(frozen=True)
class BinomialParams:
    n: int
    p: float

    def __post_init__(self):
        n = _check_count(self.n, "n")
        p = float(self.p)
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        return 1.0 - self.p


@dataclass(frozen=True)
class MultinomialParams:
    n: int
    probs: tuple

    def __post_init__(self):
        n = _check_count(self.n, "n")
        probs = tuple(float(p) for p in self.probs)
        if len(probs) == 0:
            raise ValueError("probs must be non-empty")
        if any(not math.isfinite(p) or p < 0.0 for p in probs):
            raise ValueError("every category probability must be >= 0")
        if abs(math.fsum(probs) - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probs must sum to 1 within {NORMALIZATION_TOL}, got {math.fsum(probs)!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "probs", probs)

    def as_binomial(self) -> BinomialParams:
        """The two-category case as a binomial on the first category."""
        if len(self.probs) != 2:
            raise ValueError("only a two-category multinomial reduces to a binomial")
        return BinomialParams(self.n, self.probs[0])


@dataclass(frozen=True)
class Pmf:
    """Probability table on ``offset, offset + 1, ...`` with explicit missing mass.

    ``tail_bound`` is the probability not represented in ``probs``; it is never
    folded back into the table by renormalization.
    """

    offset: int
    probs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        offset = _check_count(self.offset, "offset")
        probs = np.array(self.probs, dtype=float, copy=True).reshape(-1)
        if probs.size == 0:
            raise ValueError("a Pmf needs at least one support point")
        if not np.all(np.isfinite(probs)) or probs.min() < 0.0 or probs.max() > 1.0:
            raise ValueError("pmf entries must lie in [0, 1]")
        tail = float(self.tail_bound)
        if not math.isfinite(tail) or tail < 0.0:
            raise ValueError(f"tail_bound must be >= 0, got {self.tail_bound!r}")
        total = math.fsum(probs) + tail
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probs + tail_bound must equal 1 within {NORMALIZATION_TOL}, got {total!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_bound", tail)

    def __eq__(self, other):
        if not isinstance(other, Pmf):
            return NotImplemented
        return (
            self.offset == other.offset
            and self.tail_bound == other.tail_bound
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.probs.size)

    @property
    def stop(self) -> int:
        """One past the last support point."""
        return self.offset + self.probs.size

    def __len__(self) -> int:
        return self.probs.size

    def __call__(self, x: int) -> float:
        i = int(x) - self.offset
        if 0 <= i < self.probs.size:
            return float(self.probs[i])
        return 0.0

    def log_probs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.probs)

    def total(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        return math.fsum(self.support * self.probs)

    def variance(self) -> float:
        m = self.mean()
        return math.fsum((self.support - m) ** 2 * self.probs)

    def dense(self, start: int, stop: int) -> np.ndarray:
        """Probabilities on ``start..stop-1``; zeros outside the table."""
        out = np.zeros(stop - start)
        lo = max(start, self.offset)
        hi = min(stop, self.stop)
        if hi > lo:
            out[lo - start : hi - start] = self.probs[lo - self.offset : hi - self.offset]
        return out


def point_mass(x: int) -> Pmf:
    """Degenerate law at ``x`` (the explicit stand-in for mu = 0)."""
    return Pmf(_check_count(x), np.array([1.0]))


# ---------------------------------------------------------------------------
# Poisson


def poisson_logpmf(x: int, params: PoissonParams) -> float:
    x = _check_count(x)
    mu = params.mu
    if x == 0:
        return -mu
    return -_stirlerr(x) - _bd0(float(x), mu) - _LOG_SQRT_2PI - 0.5 * math.log(x)


def poisson_pmf(x: int, params: PoissonParams) -> float:
    """P(X = x) for X ~ Poisson(mu)."""
    x = _check_count(x)
    mu = params.mu
    if x == 0:
        return math.exp(-mu)
    return math.exp(-_stirlerr(x) - _bd0(float(x), mu)) / math.sqrt(2.0 * math.pi * x)


def poisson_pmf_table(params: PoissonParams, mass_tol: float = 1e-12) -> Pmf:
    """Poisson table grown outward from floor(mu) until mass >= 1 - mass_tol.

    The growth stops early only when neither side can add a representable
    amount of mass; whatever is left is reported as ``tail_bound``.
    """
    mass_tol = float(mass_tol)
    if not (0.0 < mass_tol < 1.0):
        raise ValueError(f"mass_tol must lie in (0, 1), got {mass_tol!r}")
    centre = min(int(math.floor(params.mu)), MAX_COUNT)
    lo = hi = centre
    values = {centre: poisson_pmf(centre, params)}
    # Neumaier-compensated running mass, so the stopping rule agrees with fsum below
    captured, comp = values[centre], 0.0
    left = poisson_pmf(lo - 1, params) if lo > 0 else 0.0
    right = poisson_pmf(hi + 1, params)
    while 1.0 - (captured + comp) > mass_tol:
        if left == 0.0 and right == 0.0:
            break
        if left >= right:
            lo -= 1
            add = values[lo] = left
            left = poisson_pmf(lo - 1, params) if lo > 0 else 0.0
        else:
            hi += 1
            add = values[hi] = right
            right = poisson_pmf(hi + 1, params)
        total = captured + add
        if abs(captured) >= abs(add):
            comp += (captured - total) + add
        else:
            comp += (add - total) + captured
        captured = total
    probs = np.array([values[x] for x in range(lo, hi + 1)])
    tail = max(0.0, 1.0 - math.fsum(probs))
    return Pmf(lo, probs, tail)


# ---------------------------------------------------------------------------
# binomial / multinomial


def _binomial_log_raw(x: int, n: int, p: float, q: float) -> float:
    if p == 0.0:
        return 0.0 if x == 0 else -math.inf
    if q == 0.0:
        return 0.0 if x == n else -math.inf
    if x == 0:
        if n == 0:
            return 0.0
        return n * math.log1p(-p) if p < 0.1 else n * math.log(q)
    if x == n:
        return n * math.log(p)
    lc = (
        _stirlerr(n)
        - _stirlerr(x)
        - _stirlerr(n - x)
        - _bd0(float(x), n * p)
        - _bd0(float(n - x), n * q)
    )
    lf = _LOG_2PI + math.log(x) + math.log1p(-x / n)
    return lc - 0.5 * lf


def binomial_logpmf(x: int, params: BinomialParams) -> float:
    x = _check_count(x)
    if x > params.n:
        raise ValueError(f"x = {x} exceeds the number of trials n = {params.n}")
    return _binomial_log_raw(x, params.n, params.p, 1.0 - params.p)


def binomial_pmf(x: int, params: BinomialParams) -> float:
    """P(X = x) for X ~ Binomial(n, p)."""
    return math.exp(binomial_logpmf(x, params))


def binomial_pmf_table(params: BinomialParams) -> Pmf:
    """Full-support binomial table; no truncation so ``tail_bound`` is 0."""
    n, p = params.n, params.p
    q = 1.0 - p
    probs = np.array([math.exp(_binomial_log_raw(x, n, p, q)) for x in range(n + 1)])
    tail = max(0.0, 1.0 - math.fsum(probs))
    return Pmf(0, probs, tail)


def multinomial_logpmf(counts: Sequence[int], params: MultinomialParams) -> float:
    counts = [_check_count(c, "counts") for c in counts]
    if len(counts) != len(params.probs):
        raise ValueError(f"got {len(counts)} counts for {len(params.probs)} categories")
    if sum(counts) != params.n:
        raise ValueError(f"counts sum to {sum(counts)}, expected n = {params.n}")
    # chain of conditional binomials: category i given what is left after 0..i-1
    remaining_n = params.n
    remaining_p = list(params.probs)
    logp = 0.0
    for i, c in enumerate(counts[:-1]):
        rest = math.fsum(remaining_p[i + 1 :])
        total = remaining_p[i] + rest
        if total <= 0.0:
            return 0.0 if remaining_n == 0 else -math.inf
        p, q = remaining_p[i] / total, rest / total
        logp += _binomial_log_raw(c, remaining_n, p, q)
        if logp == -math.inf:
            return logp
        remaining_n -= c
    return logp


def multinomial_pmf(counts: Sequence[int], params: MultinomialParams) -> float:
    return math.exp(multinomial_logpmf(counts, params))


def conditional_subcount_law(n: int, sub_extents: Sequence[float], total_extent: float) -> MultinomialParams:
    """Multinomial law of counts in sub-extents given ``n`` points on the whole.

    The last category is the remainder ``total_extent - sum(sub_extents)``.
    """
    n = _check_count(n, "n")
    total_extent = float(total_extent)
    if not math.isfinite(total_extent) or total_extent <= 0.0:
        raise ValueError(f"total_extent must be positive, got {total_extent!r}")
    extents = [float(e) for e in sub_extents]
    if not extents:
        raise ValueError("need at least one sub-extent")
    if any(not math.isfinite(e) or e <= 0.0 for e in extents):
        raise ValueError("sub-extents must be positive")
    covered = math.fsum(extents)
    if covered > total_extent * (1.0 + NORMALIZATION_TOL):
        raise ValueError(f"sub-extents sum to {covered!r}, more than the total extent {total_extent!r}")
    probs = [e / total_extent for e in extents]
    remainder = max(0.0, (total_extent - covered) / total_extent)
    probs.append(remainder)
    # absorb rounding so the category probabilities sum to 1 exactly enough
    drift = math.fsum(probs) - 1.0
    if drift > 0.0:
        probs[-1] = max(0.0, probs[-1] - drift)
    return MultinomialParams(n, tuple(probs))


# ---------------------------------------------------------------------------
# distances


def tv_distance(a: Pmf, b: Pmf) -> float:
    """Half the L1 distance on the union support, with both tails added.

    The tails are added in full, so the result is an upper bound that is exact
    when both tables are complete.
    """
    start = min(a.offset, b.offset)
    stop = max(a.stop, b.stop)
    diff = np.abs(a.dense(start, stop) - b.dense(start, stop))
    tv = 0.5 * (math.fsum(diff) + a.tail_bound + b.tail_bound)
    return min(1.0, max(0.0, tv))


@dataclass(frozen=True)
class LimitPoint:
    n: int
    tv: float


def poisson_limit_sweep(mu: float, n_values: Sequence[int], mass_tol: float = 1e-15) -> list[LimitPoint]:
    """TV between Binomial(n, mu/n) and Poisson(mu) for each n."""
    target = poisson_pmf_table(PoissonParams(mu), mass_tol)
    mu = float(mu)
    out = []
    for n in n_values:
        n = _check_count(n, "n")
        if n < mu:
            raise ValueError(f"n = {n} is below mu = {mu}; mu/n would exceed 1")
        out.append(LimitPoint(n, tv_distance(binomial_pmf_table(BinomialParams(n, mu / n)), target)))
    return out
