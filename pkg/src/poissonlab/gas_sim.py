"""Point particles in a 3D box: sub-volume counts at fixed N and at fixed density."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng as _rng
from .dist_core import (
    BinomialParams,
    MultinomialParams,
    PoissonParams,
    binomial_pmf_table,
    conditional_subcount_law,
    multinomial_pmf,
    poisson_pmf_table,
    tv_distance,
)
from .stat_tests import CountHistogram, GofResult, chi_square_cells, chi_square_gof, chi_square_two_sample

FIXED_N = "fixed_N"
FIXED_DENSITY = "fixed_density"
_STREAM_TAG = 2
_PARTICLES_PER_BLOCK = 1 << 18


def _positive_triple(values, name: str) -> tuple:
    vals = tuple(float(v) for v in values)
    if len(vals) != 3:
        raise ValueError(f"{name} needs exactly 3 components, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class Box:
    extents: tuple

    def __post_init__(self):
        ext = _positive_triple(self.extents, "extents")
        if any(not math.isfinite(e) or e <= 0.0 for e in ext):
            raise ValueError(f"box extents must be positive, got {ext}")
        object.__setattr__(self, "extents", ext)

    @property
    def volume(self) -> float:
        lx, ly, lz = self.extents
        return lx * ly * lz

    def as_region(self) -> "Region":
        return Region((0.0, 0.0, 0.0), self.extents)


@dataclass(frozen=True)
class Region:
    """Axis-aligned box; a point belongs to it when lower < coord <= upper on every axis."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = _positive_triple(self.lower, "lower")
        hi = _positive_triple(self.upper, "upper")
        if any(not (a < b) for a, b in zip(lo, hi)):
            raise ValueError(f"region lower {lo} must be strictly below upper {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lower, self.upper))

    def within(self, box: Box) -> bool:
        return all(a >= 0.0 and b <= e for a, b, e in zip(self.lower, self.upper, box.extents))

    def overlaps(self, other: "Region") -> bool:
        return all(a0 < b1 and a1 < b0 for a0, b0, a1, b1 in zip(self.lower, self.upper, other.lower, other.upper))

    def contains(self, positions: np.ndarray) -> np.ndarray:
        pos = np.asarray(positions, dtype=float)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((pos > lo) & (pos <= hi), axis=-1)


def _check_regions(box: Box, regions: Sequence[Region]) -> tuple:
    regions = tuple(regions)
    for r in regions:
        if not isinstance(r, Region):
            raise TypeError(f"expected a Region, got {r!r}")
        if not r.within(box):
            raise ValueError(f"region {r} is not contained in the box {box.extents}")
    for a, b in itertools.combinations(regions, 2):
        if a.overlaps(b):
            raise ValueError(f"regions {a} and {b} overlap")
    return regions


@dataclass(frozen=True)
class GasConfig:
    """Exactly one of ``n_particles`` (fixed_N) or ``density`` (fixed_density)."""

    box: Box
    n_particles: int | None = None
    density: float | None = None
    regions: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if (self.n_particles is None) == (self.density is None):
            raise ValueError("give exactly one of n_particles (fixed_N) or density (fixed_density)")
        if self.n_particles is not None:
            n = self.n_particles
            if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
                raise ValueError(f"n_particles must be an integer >= 0, got {n!r}")
            object.__setattr__(self, "n_particles", int(n))
        else:
            lam = float(self.density)
            if not (math.isfinite(lam) and lam > 0.0):
                raise ValueError(f"density must be positive, got {self.density!r}")
            object.__setattr__(self, "density", lam)
        object.__setattr__(self, "regions", _check_regions(self.box, self.regions))
        _rng._check_seed(self.seed)

    @property
    def mode(self) -> str:
        return FIXED_N if self.n_particles is not None else FIXED_DENSITY

    @property
    def mean_particles(self) -> float:
        return float(self.n_particles) if self.mode == FIXED_N else self.density * self.box.volume


def _uniform_points(g: np.random.Generator, box: Box, shape: tuple) -> np.ndarray:
    ext = np.asarray(box.extents)
    return ext * (1.0 - g.random(shape + (3,)))


def _redraw_duplicates(g: np.random.Generator, box: Box, pos: np.ndarray) -> np.ndarray:
    """Redraw exact position repeats within each replica of a (replicas, n, 3) array."""
    if pos.shape[1] < 2:
        return pos
    while True:
        # an exact repeat needs equal x first, so screen on sorted x only
        xs = np.sort(pos[..., 0], axis=-1)
        suspects = np.nonzero(np.any(np.diff(xs, axis=-1) == 0.0, axis=-1))[0]
        redrawn = False
        for i in suspects:
            _, first = np.unique(pos[i], axis=0, return_index=True)
            dup = np.setdiff1d(np.arange(pos.shape[1]), first)
            if dup.size:
                pos[i, dup] = _uniform_points(g, box, (dup.size,))
                redrawn = True
        if not redrawn:
            return pos


def place_particles(config: GasConfig) -> np.ndarray:
    """One configuration of particle positions, shape (n, 3), in (0, L] per axis."""
    g = _rng.stream(config.seed, _STREAM_TAG, 0)
    if config.mode == FIXED_N:
        n = config.n_particles
    else:
        n = int(g.poisson(config.density * config.box.volume))
    pos = _uniform_points(g, config.box, (n,))
    return _redraw_duplicates(g, config.box, pos[None])[0]


def count_in_region(positions: np.ndarray, region: Region) -> int:
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    return int(np.count_nonzero(region.contains(positions)))


def region_counts(config: GasConfig, regions: Sequence[Region], replicas: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-replica counts in each region, shape (replicas, k), and total particle counts."""
    regions = _check_regions(config.box, regions)
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    k = len(regions)
    mean = max(1.0, config.mean_particles)
    block = max(1, int(_PARTICLES_PER_BLOCK // mean))
    mode_key = 0 if config.mode == FIXED_N else 1
    counts = np.empty((replicas, k), dtype=np.int64)
    totals = np.empty(replicas, dtype=np.int64)
    done = 0
    for b, size in _rng.blocks(replicas, block):
        g = _rng.stream(config.seed, _STREAM_TAG, mode_key, b)
        if config.mode == FIXED_N:
            n = config.n_particles
            pos = _redraw_duplicates(g, config.box, _uniform_points(g, config.box, (size, n)))
            for j, r in enumerate(regions):
                counts[done : done + size, j] = r.contains(pos).sum(axis=1)
            totals[done : done + size] = n
        else:
            tot = g.poisson(config.density * config.box.volume, size).astype(np.int64)
            ids = np.repeat(np.arange(size), tot)
            pos = _uniform_points(g, config.box, (ids.size,))
            pos = _redraw_flat_duplicates(g, config.box, pos, ids)
            for j, r in enumerate(regions):
                counts[done : done + size, j] = np.bincount(ids[r.contains(pos)], minlength=size)
            totals[done : done + size] = tot
        done += size
    return counts, totals


def _redraw_flat_duplicates(g, box: Box, pos: np.ndarray, ids: np.ndarray) -> np.ndarray:
    while pos.shape[0] > 1:
        if not np.any(np.diff(np.sort(pos[:, 0])) == 0.0):
            return pos
        order = np.lexsort((pos[:, 2], pos[:, 1], pos[:, 0], ids))
        sp, si = pos[order], ids[order]
        dup = np.all(sp[1:] == sp[:-1], axis=1) & (si[1:] == si[:-1])
        if not dup.any():
            return pos
        idx = order[1:][dup]
        pos[idx] = _uniform_points(g, box, (idx.size,))
    return pos


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class BinomialExperiment:
    histogram: CountHistogram
    gof: GofResult
    law: BinomialParams


def _require_fixed_n(config: GasConfig) -> None:
    if config.mode != FIXED_N:
        raise ValueError("this experiment needs a fixed_N configuration")


def conditional_binomial_experiment(config: GasConfig, region: Region | None, replicas: int) -> BinomialExperiment:
    """Region-count histogram at fixed N against Binomial(N, v / V)."""
    _require_fixed_n(config)
    if region is None:
        if len(config.regions) != 1:
            raise ValueError("pass a region or configure exactly one")
        region = config.regions[0]
    counts, _ = region_counts(config, [region], replicas)
    law = BinomialParams(config.n_particles, min(1.0, region.volume / config.box.volume))
    hist = CountHistogram.from_counts(counts[:, 0])
    return BinomialExperiment(hist, chi_square_gof(hist, binomial_pmf_table(law)), law)


@dataclass(frozen=True)
class MultinomialExperiment:
    joint: dict
    gof: GofResult
    law: MultinomialParams
    marginals: tuple

    def joint_rows(self) -> list[tuple]:
        n = self.law.n
        return [(*key, n - sum(key), freq) for key, freq in sorted(self.joint.items())]


def _joint_support(law: MultinomialParams, observed: dict) -> set:
    """Observed cells plus a +-6 sd box around the mean of each listed category."""
    n, probs = law.n, law.probs[:-1]
    axes = []
    for p in probs:
        m, sd = n * p, math.sqrt(n * p * (1 - p))
        axes.append(range(max(0, int(m - 6 * sd - 1)), min(n, int(m + 6 * sd + 1)) + 1))
    cells = set(observed)
    if math.prod(len(a) for a in axes) <= 200_000:
        cells.update(c for c in itertools.product(*axes) if sum(c) <= n)
    return cells


def multinomial_partition_experiment(
    config: GasConfig, regions: Sequence[Region] | None, replicas: int
) -> MultinomialExperiment:
    """Joint counts in k disjoint regions at fixed N against the multinomial law.

    The remainder (particles outside every region) is implied by the joint
    cell. With a single region the result is the binomial experiment.
    """
    _require_fixed_n(config)
    regions = config.regions if regions is None else tuple(regions)
    if not regions:
        raise ValueError("need at least one region")
    n = config.n_particles
    law = conditional_subcount_law(n, [r.volume for r in regions], config.box.volume)
    counts, _ = region_counts(config, regions, replicas)
    keys, freq = np.unique(counts, axis=0, return_counts=True)
    joint = {tuple(int(v) for v in key): int(f) for key, f in zip(keys, freq)}
    marginals = []
    for j in range(len(regions)):
        h = CountHistogram.from_counts(counts[:, j])
        marginal_law = BinomialParams(n, min(1.0, law.probs[j]))
        marginals.append((h, chi_square_gof(h, binomial_pmf_table(marginal_law))))
    if len(regions) == 1:
        gof = marginals[0][1]
    else:
        cells = _joint_support(law, joint)
        probs = {c: multinomial_pmf((*c, n - sum(c)), law) for c in cells if sum(c) <= n}
        gof = chi_square_cells(joint, probs, replicas)
    return MultinomialExperiment(joint, gof, law, tuple(marginals))


def conditioning_equivalence(
    density_config: GasConfig, region: Region, replicas: int, total: int | None = None, fixed_replicas: int | None = None
) -> tuple[GofResult, int]:
    """Fixed-density region counts given ``total`` particles vs fixed_N = total.

    Returns the two-sample chi-square and the number of fixed-density replicas
    that hit the conditioning total.
    """
    if density_config.mode != FIXED_DENSITY:
        raise ValueError("density_config must be a fixed_density configuration")
    if total is None:
        total = int(math.floor(density_config.mean_particles))
    counts, totals = region_counts(density_config, [region], replicas)
    conditioned = counts[totals == total, 0]
    fixed = GasConfig(density_config.box, n_particles=total, seed=density_config.seed)
    fixed_counts, _ = region_counts(fixed, [region], fixed_replicas or max(conditioned.size, 1000))
    gof = chi_square_two_sample(CountHistogram.from_counts(conditioned), CountHistogram.from_counts(fixed_counts[:, 0]))
    return gof, int(conditioned.size)


@dataclass(frozen=True)
class ThermoPoint:
    n: int
    volume: float
    tv: float


def thermodynamic_limit_sweep(
    density: float, v: float, nv_pairs: Sequence[tuple[int, float]], mass_tol: float = 1e-15
) -> list[ThermoPoint]:
    """Exact TV between Binomial(N, v / V) and Poisson(density * v) for each (N, V)."""
    density, v = float(density), float(v)
    if not (density > 0.0 and v > 0.0):
        raise ValueError("density and v must be positive")
    target = poisson_pmf_table(PoissonParams(density * v), mass_tol)
    out = []
    for n, vol in nv_pairs:
        n, vol = int(n), float(vol)
        if not math.isclose(n / vol, density, rel_tol=1e-12):
            raise ValueError(f"pair (N={n}, V={vol}) has N/V = {n / vol}, not the density {density}")
        if v > vol:
            raise ValueError(f"sub-volume v = {v} exceeds V = {vol}")
        law = BinomialParams(n, min(1.0, v / vol))
        out.append(ThermoPoint(n, vol, tv_distance(binomial_pmf_table(law), target)))
    return out
