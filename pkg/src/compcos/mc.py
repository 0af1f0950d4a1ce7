"""Seeded, partitioned Monte Carlo estimation.

A run of ``samples`` draws is split into ``partitions`` contiguous shares.
Partition ``p`` of stream ``(seed, stream_id)`` draws from its own
``PCG64`` generator keyed by ``SeedSequence(seed, spawn_key=(stream_id, p))``
and is processed in fixed-size chunks.  Per-partition moments are merged
in partition order, so the result depends only on ``(seed, stream_id,
samples, partitions)`` and not on how many threads ran the work.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

CHUNK = 1 << 15


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def generator(self, partition: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, partition))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, offset: int) -> "RngStream":
        """An independent stream for a different estimate in the same run."""
        return RngStream(self.seed, self.stream_id * 1009 + offset + 1)


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo estimate.

    ``stderr`` is the larger of the real and imaginary standard errors.
    """

    value: complex
    stderr: float
    samples: int
    skipped: int = 0

    @property
    def skipped_fraction(self) -> float:
        return self.skipped / self.samples if self.samples else 0.0

    def scaled(self, factor: complex) -> "McEstimate":
        return McEstimate(self.value * factor, self.stderr * abs(factor), self.samples, self.skipped)

    def to_dict(self) -> dict:
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "stderr": self.stderr,
            "samples": self.samples,
            "skipped": self.skipped,
        }


class _Moments:
    """Running mean and sum of squared deviations (Welford / Chan merge)."""

    __slots__ = ("n", "mean", "m2", "skipped")

    def __init__(self):
        self.n = 0
        self.mean = np.zeros(2)
        self.m2 = np.zeros(2)
        self.skipped = 0

    def push(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=complex).ravel()
        good = np.isfinite(values)
        self.skipped += int(values.size - good.sum())
        values = values[good]
        if values.size == 0:
            return
        x = np.stack([values.real, values.imag])
        other = _Moments()
        other.n = values.size
        other.mean = x.mean(axis=1)
        other.m2 = ((x - other.mean[:, None]) ** 2).sum(axis=1)
        self.merge(other)

    def merge(self, other: "_Moments") -> None:
        if other.n == 0:
            self.skipped += other.skipped
            return
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean = self.mean + delta * other.n / n
        self.m2 = self.m2 + other.m2 + delta**2 * self.n * other.n / n
        self.n = n
        self.skipped += other.skipped


def split_counts(samples: int, partitions: int) -> list[int]:
    base, rem = divmod(samples, partitions)
    return [base + (1 if p < rem else 0) for p in range(partitions)]


def monte_carlo(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    samples: int,
    rng: RngStream,
    partitions: int = 1,
    scale: complex = 1.0,
    workers: int = 1,
    chunk: int = CHUNK,
) -> McEstimate:
    """Estimate ``scale * E[draw]``.

    ``draw(gen, size)`` returns ``size`` integrand values; non-finite
    entries are counted as skipped and excluded from the mean.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    if partitions < 1:
        raise ValueError("partitions must be positive")
    counts = split_counts(samples, partitions)

    def run(p: int) -> _Moments:
        gen = rng.generator(p)
        acc = _Moments()
        left = counts[p]
        while left > 0:
            size = min(chunk, left)
            acc.push(draw(gen, size))
            left -= size
        return acc

    if workers > 1 and partitions > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(partitions)))
    else:
        parts = [run(p) for p in range(partitions)]

    total = _Moments()
    for part in parts:
        total.merge(part)
    if total.n < 2:
        return McEstimate(complex("nan"), math.inf, samples, total.skipped)
    var = total.m2 / (total.n - 1)
    stderr = float(np.sqrt(var.max() / total.n)) * abs(scale)
    value = complex(total.mean[0], total.mean[1]) * scale
    return McEstimate(value, stderr, samples, total.skipped)


def combined_stderr(*estimates) -> float:
    """Standard error of a sum or difference of independent estimates."""
    return math.sqrt(sum(float(getattr(e, "stderr", e)) ** 2 for e in estimates))
