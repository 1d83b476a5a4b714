"""Community assignments and partition similarity scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.metrics import normalized_mutual_info_score, rand_score

from .errors import ValidationError

__all__ = ["Partition", "PartitionSimilarity", "compare_partitions"]


def _canonicalize(labels: np.ndarray) -> np.ndarray:
    """Relabel communities 0..c-1 in order of their smallest member index."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse]


@dataclass(frozen=True)
class Partition:
    """Node-to-community assignment in canonical form.

    Labels are always renumbered so community g is the g-th community by
    smallest contained node index, which makes partitions from different runs
    directly comparable.
    """

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ValidationError("partition labels must be a 1-D vector")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            raise ValidationError("partition labels must be integers")
        labels = _canonicalize(labels.astype(np.int64)) if labels.size else labels.astype(np.int64)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def single_community(cls, n: int) -> "Partition":
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def num_communities(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def communities(self) -> tuple[np.ndarray, ...]:
        """Member index arrays, one per community, in label order."""
        if not self.labels.size:
            return ()
        order = np.argsort(self.labels, kind="stable")
        return tuple(np.split(order, np.cumsum(np.bincount(self.labels))[:-1]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def refines(self, other: "Partition") -> bool:
        """True when every community of self lies inside one community of other."""
        if self.n != other.n:
            raise ValidationError("partitions must cover the same nodes")
        for members in self.communities:
            if np.unique(other.labels[members]).size > 1:
                return False
        return True


@dataclass(frozen=True)
class PartitionSimilarity:
    nmi: float
    rand: float


def compare_partitions(a: Partition, b: Partition) -> PartitionSimilarity:
    """Label-permutation-invariant similarity between two partitions.

    NMI is 1 exactly when the partitions agree up to relabeling and 0 for
    independent labelings; the Rand index is the fraction of node pairs on
    which the partitions agree.
    """
    if a.n != b.n:
        raise ValidationError(f"partition lengths differ: {a.n} vs {b.n}")
    if a.n == 0:
        return PartitionSimilarity(nmi=1.0, rand=1.0)
    nmi = float(normalized_mutual_info_score(a.labels, b.labels))
    if a.n < 2:
        return PartitionSimilarity(nmi=1.0, rand=1.0)
    rand = float(rand_score(a.labels, b.labels))
    return PartitionSimilarity(nmi=min(max(nmi, 0.0), 1.0), rand=min(max(rand, 0.0), 1.0))
