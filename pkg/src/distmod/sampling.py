"""Random multigraphs whose expected adjacency equals a null matrix.

Entries of a null matrix are expected edge counts, not probabilities (the
diagonal can approach a node's degree at short field ranges), so the default
law is Poisson per unordered pair. A Bernoulli mode exists for comparisons
against simple graphs; it clips means above 1 and is biased there.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import numpy as np
from scipy import sparse

from .errors import ValidationError
from .graph import Graph
from .nullmodel import NullMatrix

__all__ = ["SampleBatch", "sample_null_graphs", "write_sample_summary"]


@dataclass(frozen=True)
class SampleBatch:
    """Sampled graphs plus the empirical mean adjacency across them."""

    graphs: tuple[Graph, ...]
    null: NullMatrix
    seed: int
    law: str
    mean_adjacency: np.ndarray

    @property
    def count(self) -> int:
        return len(self.graphs)


def sample_null_graphs(nm: NullMatrix, count: int, seed: int = 0, law: str = "poisson") -> SampleBatch:
    """Draw ``count`` independent multigraphs from the null model.

    Off-diagonal multiplicities are drawn per unordered pair with mean
    p_ij; self-loop counts are drawn with mean p_ii / 2 so the diagonal
    adjacency entry (2 per loop) has mean p_ii. Each sample uses an rng
    derived from (seed, sample index), so batches are reproducible and
    samples could be generated in parallel.
    """
    if count < 1:
        raise ValidationError(f"sample count must be >= 1, got {count}")
    if law not in ("poisson", "bernoulli"):
        raise ValidationError(f"unknown sampling law {law!r}")
    n = nm.n
    if np.any(nm.p < 0):
        raise ValidationError("null matrix entries must be nonnegative")
    iu, ju = np.triu_indices(n, k=1)
    pair_means = nm.p[iu, ju]
    loop_means = np.diagonal(nm.p) / 2.0

    graphs = []
    mean = np.zeros((n, n))
    for s in range(count):
        rng = np.random.default_rng([seed, s])
        if law == "poisson":
            mults = rng.poisson(pair_means)
            loops = rng.poisson(loop_means)
        else:
            mults = (rng.random(pair_means.size) < np.minimum(pair_means, 1.0)).astype(np.int64)
            loops = (rng.random(n) < np.minimum(loop_means, 1.0)).astype(np.int64)
        dense = np.zeros((n, n), dtype=np.int64)
        dense[iu, ju] = mults
        dense += dense.T
        dense[np.arange(n), np.arange(n)] = 2 * loops
        graphs.append(Graph(sparse.csr_array(dense)))
        mean += dense
    mean /= count
    mean.setflags(write=False)
    return SampleBatch(graphs=tuple(graphs), null=nm, seed=seed, law=law, mean_adjacency=mean)


def write_sample_summary(batch: SampleBatch, stream: IO[str]) -> None:
    """CSV of expected vs empirical mean adjacency, upper triangle with diagonal."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("i", "j", "p_expected", "p_empirical", "n_samples"))
    n = batch.null.n
    for i in range(n):
        for j in range(i, n):
            writer.writerow(
                (
                    i,
                    j,
                    repr(float(batch.null.p[i, j])),
                    repr(float(batch.mean_adjacency[i, j])),
                    batch.count,
                )
            )
