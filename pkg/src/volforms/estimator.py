"""Reproducible random streams and plain Monte Carlo averages.

Streams are keyed Philox generators: the 128-bit key packs ``seed`` in the low
64 bits and ``stream_index`` in the high 64 bits, so two streams are the same
sequence exactly when their ``(seed, stream_index)`` pairs agree, and distinct
indices give independent counter-based sequences. Normal variates come from
numpy's ``Generator.standard_normal`` (ziggurat) on that bit generator; the
acceptance seeds are pinned against this choice.

Partitioning over workers is canonical: ``n`` draws are cut into ``workers``
contiguous blocks by :func:`partition`, and block ``j`` is drawn from
``RngStream(seed, stream_index + j)``. Results depend on ``(seed,
stream_index, n, workers)`` only, never on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "RngStream",
    "McEstimate",
    "NonFiniteSampleError",
    "partition",
    "draw",
    "estimate",
    "estimate_values",
]

_MASK64 = (1 << 64) - 1


class NonFiniteSampleError(ValueError):
    """A sampler returned NaN or infinity."""

    def __init__(self, index: int, value: float):
        super().__init__(f"non-finite sample {value!r} at draw index {index}")
        self.index = index
        self.value = value


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if not 0 <= self.stream_index <= _MASK64:
            raise ValueError(f"stream_index must be a non-negative 64-bit integer, got {self.stream_index}")

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        key = self.seed | (self.stream_index << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, offset: int) -> "RngStream":
        return RngStream(self.seed, self.stream_index + offset)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if not self.std_error >= 0:
            raise ValueError("std_error must be non-negative")

    @classmethod
    def from_values(cls, values) -> "McEstimate":
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NonFiniteSampleError(int(bad[0]), float(values[bad[0]]))
        n = values.size
        if n < 2:
            raise ValueError("need at least two samples for a standard error")
        return cls(float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)), n)

    @property
    def std_dev(self) -> float:
        return self.std_error * math.sqrt(self.n_samples)

    def combine(self, other: "McEstimate") -> "McEstimate":
        """Pool two independent estimates as if their samples were concatenated."""
        n1, n2 = self.n_samples, other.n_samples
        n = n1 + n2
        delta = other.mean - self.mean
        mean = self.mean + delta * n2 / n
        m2 = (self.std_dev**2) * (n1 - 1) + (other.std_dev**2) * (n2 - 1) + delta**2 * n1 * n2 / n
        return McEstimate(mean, math.sqrt(m2 / (n - 1) / n), n)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "se": self.std_error, "n": self.n_samples}


def partition(n: int, workers: int) -> list[tuple[int, int, int]]:
    """Canonical split of ``range(n)`` into ``(worker, start, stop)`` blocks.

    Block sizes differ by at most one, larger blocks first.
    """
    if workers < 1:
        raise ValueError("workers must be positive")
    base, extra = divmod(n, workers)
    out, start = [], 0
    for j in range(workers):
        stop = start + base + (1 if j < extra else 0)
        out.append((j, start, stop))
        start = stop
    return out


def draw(block_sampler: Callable[[np.random.Generator, int], np.ndarray], n: int,
         stream: RngStream, workers: int = 1) -> np.ndarray:
    """Concatenate ``block_sampler(generator, size)`` over the canonical partition.

    ``block_sampler`` must return an array whose leading axis has length
    ``size``. Blocks run on a thread pool when ``workers > 1``; the output
    order is the partition order regardless.
    """
    blocks = [(stream.child(j), stop - start) for j, start, stop in partition(n, workers)]

    def run(item):
        sub, size = item
        out = np.asarray(block_sampler(sub.generator(), size))
        if out.shape[:1] != (size,):
            raise ValueError(f"sampler returned leading shape {out.shape[:1]}, expected ({size},)")
        return out

    if workers == 1:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    return np.concatenate(parts, axis=0)


def estimate(sampler: Callable[[np.random.Generator, int], np.ndarray], n: int,
             stream: RngStream, workers: int = 1) -> McEstimate:
    """Sample mean and standard error of ``n`` draws from ``sampler``.

    ``sampler(generator, size)`` returns ``size`` independent real draws.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    return McEstimate.from_values(draw(_as_block(sampler), n, stream, workers))


def estimate_values(values) -> McEstimate:
    return McEstimate.from_values(values)


def _as_block(sampler):
    def block(gen, size):
        return np.asarray(sampler(gen, size), dtype=np.float64).reshape(size)

    return block
