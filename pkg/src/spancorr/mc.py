"""Seeded Monte Carlo plumbing: chunked substreams and estimator reports.

Work is split into fixed-size chunks; chunk ``i`` draws from the ``i``-th
child of ``SeedSequence(seed)``.  Chunk results are combined in chunk order,
so estimates do not depend on how many worker threads ran the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy.stats import norm

CHUNK = 1 << 16

T = TypeVar("T")


def chunk_plan(n_samples: int, chunk: int = CHUNK) -> list[int]:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    full, rest = divmod(n_samples, chunk)
    return [chunk] * full + ([rest] if rest else [])


def chunk_seeds(seed: int, k: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(k)


def run_chunks(
    fn: Callable[[int, np.random.SeedSequence], T],
    n_samples: int,
    seed: int,
    threads: int = 1,
    chunk: int = CHUNK,
) -> list[T]:
    """Call ``fn(size, seedseq)`` for every chunk; results come back in chunk order."""
    sizes = chunk_plan(n_samples, chunk)
    seeds = chunk_seeds(seed, len(sizes))
    if threads <= 1 or len(sizes) == 1:
        return [fn(s, ss) for s, ss in zip(sizes, seeds)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, sizes, seeds))


@dataclass(frozen=True)
class Moments:
    """Count, mean and centred sum of squares of a sample; merges with Chan's update."""

    count: int
    mean: float
    m2: float

    @classmethod
    def of(cls, x: np.ndarray) -> "Moments":
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return cls(0, 0.0, 0.0)
        mu = float(x.mean())
        return cls(int(x.size), mu, float(((x - mu) ** 2).sum()))

    def merge(self, other: "Moments") -> "Moments":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return Moments(n, mean, m2)

    @classmethod
    def combine(cls, parts: Sequence["Moments"]) -> "Moments":
        out = cls(0, 0.0, 0.0)
        for p in parts:
            out = out.merge(p)
        return out

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0


@dataclass(frozen=True)
class EstimatorReport:
    name: str
    estimate: float
    sample_variance: float
    standard_error: float
    n_samples: int
    seed: int | None
    ci_low: float
    ci_high: float
    level: float = 0.95

    @classmethod
    def from_moments(cls, name: str, mom: Moments, seed: int | None, level: float = 0.95) -> "EstimatorReport":
        se = math.sqrt(mom.variance / mom.count) if mom.count else math.nan
        z = float(norm.ppf(0.5 + level / 2))
        return cls(name, mom.mean, mom.variance, se, mom.count, seed, mom.mean - z * se, mom.mean + z * se, level)

    @classmethod
    def from_samples(cls, name: str, x: np.ndarray, seed: int | None, level: float = 0.95) -> "EstimatorReport":
        return cls.from_moments(name, Moments.of(x), seed, level)

    def z_score(self, target: float) -> float:
        if self.standard_error == 0:
            return 0.0 if self.estimate == target else math.inf
        return (self.estimate - target) / self.standard_error

    def within(self, target: float, sigmas: float = 4.0) -> bool:
        return abs(self.z_score(target)) <= sigmas

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "estimate": self.estimate,
            "sample_variance": self.sample_variance,
            "standard_error": self.standard_error,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "ci": [self.ci_low, self.ci_high],
            "level": self.level,
        }


def int_seed(ss: np.random.SeedSequence) -> int:
    """A 63-bit integer seed for code that wants a plain int (numba kernels)."""
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
