"""How often does a random ReLU network evaluate ReLU exactly at its kink?

Each sample draws a fresh network with ``L`` layers of width ``w`` (input
dimension ``w``, zero biases) and a fresh input. Weights and inputs are
i.i.d. ``N(0, scale^2)`` in the working precision. A sample is a hit when
some pre-activation compares equal to ``0.0`` (``-0.0`` included).

Samples are processed in chunks of ``CHUNK``; chunk ``c`` of cell ``(L, w)``
draws from the stream keyed by ``(seed, L, w, c)``, so hit counts do not
depend on the number of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from ..rng import stream

CHUNK = 512
DTYPES = {"f64": np.float64, "f32": np.float32}


@dataclass(frozen=True)
class CellResult:
    depth: int
    width: int
    samples: int
    hits: int
    lo: float
    hi: float

    @property
    def probability(self) -> float:
        return self.hits / self.samples

    def row(self) -> list[str]:
        return [str(self.depth), str(self.width), str(self.samples), str(self.hits),
                repr(self.probability), repr(self.lo), repr(self.hi)]


HEADER = ["depth", "width", "samples", "hits", "probability", "ci_lo", "ci_hi"]


@dataclass
class ReluActivityReport:
    cells: list
    precision: str
    scale: float
    seed: int

    def cell(self, depth: int, width: int) -> CellResult:
        for c in self.cells:
            if (c.depth, c.width) == (depth, width):
                return c
        raise KeyError((depth, width))

    def rows(self):
        return [c.row() for c in self.cells]


def binomial_interval(hits: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Clopper-Pearson interval for a binomial proportion."""
    ci = binomtest(hits, n).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


def _chunk_hits(depth: int, width: int, chunk: int, size: int, seed: int, dtype, scale: float) -> int:
    rng = stream(seed, depth, width, chunk)
    s = dtype(scale)
    a = rng.standard_normal((size, width), dtype=dtype) * s
    hit = np.zeros(size, dtype=bool)
    for _ in range(depth):
        W = rng.standard_normal((size, width, width), dtype=dtype) * s
        # einsum's own loops sum in a fixed order; BLAS may not
        z = np.einsum("bij,bj->bi", W, a)
        hit |= (z == 0).any(axis=1)
        a = np.maximum(z, dtype(0))
    return int(hit.sum())


def count_hits(depth: int, width: int, samples: int, seed: int = 0, precision: str = "f32",
               scale: float = 1.0, threads: int = 1) -> int:
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if depth < 1 or width < 1:
        raise ValueError("depth and width must be positive")
    dtype = DTYPES[precision]
    jobs = [(c, min(CHUNK, samples - c * CHUNK)) for c in range((samples + CHUNK - 1) // CHUNK)]

    def run(job):
        return _chunk_hits(depth, width, job[0], job[1], seed, dtype, scale)

    if threads <= 1:
        return sum(map(run, jobs))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return sum(pool.map(run, jobs))


def relu_activity(depths, widths, samples: int, seed: int = 0, precision: str = "f32",
                  scale: float = 1.0, threads: int = 1) -> ReluActivityReport:
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if precision not in DTYPES:
        raise ValueError(f"precision must be one of {sorted(DTYPES)}")
    cells = []
    for L in depths:
        for w in widths:
            h = count_hits(L, w, samples, seed, precision, scale, threads)
            lo, hi = binomial_interval(h, samples)
            cells.append(CellResult(int(L), int(w), samples, h, lo, hi))
    return ReluActivityReport(cells, precision, scale, seed)
