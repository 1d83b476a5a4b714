"""Partition search: exact enumeration for tiny graphs, greedy otherwise.

The greedy scheme alternates node-move sweeps with community aggregation.
Unlike the textbook degree-based variant, the expectation matrix is carried
along and block-summed explicitly at every level, because a distance-aware
null matrix is not a rank-1 product and admits no shortcut. The score of a
coarse-level partition is identical to the score of its flattening, so each
level only ever improves the original objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ValidationError
from .graph import Graph
from .nullmodel import NullMatrix
from .partition import Partition

__all__ = [
    "OptimizerConfig",
    "AggregatedInstance",
    "LevelRecord",
    "LouvainResult",
    "brute_force_best_partition",
    "local_move_pass",
    "aggregate",
    "louvain_optimize",
]

BRUTE_FORCE_MAX_NODES = 12


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for the greedy optimizer; the seed is recorded in all outputs."""

    seed: int = 0
    max_passes: int = 100
    gain_tolerance: float = 1e-12
    sweep_order: str = "shuffle"

    def __post_init__(self):
        if self.gain_tolerance < 0:
            raise ValidationError("gain_tolerance must be >= 0")
        if self.sweep_order not in ("shuffle", "index"):
            raise ValidationError(f"sweep_order must be 'shuffle' or 'index', got {self.sweep_order!r}")
        if self.max_passes < 1:
            raise ValidationError("max_passes must be >= 1")


@dataclass(frozen=True)
class AggregatedInstance:
    """A coarsened problem: block-summed adjacency and expectation matrices.

    ``node_map`` sends each original node to its current super-node, and
    ``two_m`` stays the original total, so scores at any level are directly
    comparable.
    """

    adjacency: sparse.csr_array
    null: np.ndarray
    node_map: np.ndarray
    two_m: float

    @classmethod
    def from_graph(cls, g: Graph, nm: NullMatrix) -> "AggregatedInstance":
        if g.n != nm.n:
            raise ValidationError(f"graph has {g.n} nodes but null matrix is {nm.n}x{nm.n}")
        if g.num_edges == 0:
            raise ValidationError("optimization needs m > 0")
        adj = sparse.csr_array(g.adjacency.astype(np.float64))
        return cls(adj, nm.p, np.arange(g.n, dtype=np.int64), 2.0 * g.num_edges)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def q(self, part: Partition) -> float:
        """Score of a partition over the current super-nodes."""
        if part.n != self.n:
            raise ValidationError(f"partition covers {part.n} super-nodes, instance has {self.n}")
        total = 0.0
        for members in part.communities:
            total += float(self.adjacency[members][:, members].sum())
            total -= float(self.null[np.ix_(members, members)].sum())
        return total / self.two_m

    def flatten(self, part: Partition) -> Partition:
        """Map a super-node partition back to the original nodes."""
        return Partition(part.labels[self.node_map])


def aggregate(inst: AggregatedInstance, part: Partition) -> AggregatedInstance:
    """Merge each community into one super-node, block-summing both matrices."""
    if part.n != inst.n:
        raise ValidationError(f"partition covers {part.n} super-nodes, instance has {inst.n}")
    c = part.num_communities
    indicator = sparse.csr_array(
        (np.ones(inst.n), (np.arange(inst.n), part.labels)), shape=(inst.n, c)
    )
    adj = sparse.csr_array(indicator.T @ inst.adjacency @ indicator)
    dense_ind = indicator.toarray()
    null = dense_ind.T @ inst.null @ dense_ind
    return AggregatedInstance(adj, null, part.labels[inst.node_map], inst.two_m)


def local_move_pass(
    inst: AggregatedInstance, cfg: OptimizerConfig, part: Partition
) -> tuple[Partition, float]:
    """Greedy node moves until a full sweep changes nothing.

    Moving node i from its community to community C changes the score by
    (2/2m) * (sum over j in C of (A_ij - P_ij) - same sum over its current
    community), both sums excluding j = i. A move is applied when the gain
    exceeds the configured tolerance; on ties the smallest candidate label
    wins, and a vacant label plays the role of "split off alone". Returns the
    new partition and the accumulated gain of all accepted moves.
    """
    if part.n != inst.n:
        raise ValidationError(f"partition covers {part.n} super-nodes, instance has {inst.n}")
    n = inst.n
    labels = part.labels.astype(np.int64).copy()
    a = inst.adjacency
    indptr, indices, data = a.indptr, a.indices, a.data
    a_diag = a.diagonal()
    p_diag = np.diagonal(inst.null)
    scale = 2.0 / inst.two_m
    rng = np.random.default_rng(cfg.seed)
    total_gain = 0.0
    for _ in range(cfg.max_passes):
        moved = False
        order = rng.permutation(n) if cfg.sweep_order == "shuffle" else np.arange(n)
        for i in order:
            current = labels[i]
            lo, hi = indptr[i], indptr[i + 1]
            s = np.bincount(labels[indices[lo:hi]], weights=data[lo:hi], minlength=n)
            s -= np.bincount(labels, weights=inst.null[i], minlength=n)
            s[current] -= a_diag[i] - p_diag[i]
            gains = (s - s[current]) * scale
            best = int(np.argmax(gains))
            if best != current and gains[best] > cfg.gain_tolerance:
                labels[i] = best
                total_gain += float(gains[best])
                moved = True
        if not moved:
            break
    return Partition(labels), total_gain


@dataclass(frozen=True)
class LevelRecord:
    """One coarsening level: size, score after the move pass, and the gap
    between accumulated gains and the recomputed score."""

    level: int
    supernodes: int
    communities: int
    q: float
    gain_residual: float


@dataclass(frozen=True)
class LouvainResult:
    partition: Partition
    q: float
    levels: tuple[LevelRecord, ...]
    seed: int


def louvain_optimize(g: Graph, nm: NullMatrix, cfg: OptimizerConfig | None = None) -> LouvainResult:
    """Move-and-aggregate search for a high-modularity partition.

    Each level starts from super-node singletons, runs move sweeps, then
    collapses communities and repeats until a level makes no merge. The
    per-level score trace is nondecreasing. Identical inputs and seed give
    an identical partition.
    """
    cfg = cfg or OptimizerConfig()
    inst = AggregatedInstance.from_graph(g, nm)
    levels: list[LevelRecord] = []
    part = Partition.singletons(inst.n)
    while True:
        start = Partition.singletons(inst.n)
        q_before = inst.q(start)
        part, gain = local_move_pass(inst, cfg, start)
        q_after = inst.q(part)
        levels.append(
            LevelRecord(
                level=len(levels),
                supernodes=inst.n,
                communities=part.num_communities,
                q=q_after,
                gain_residual=abs(q_after - (q_before + gain)),
            )
        )
        if part.num_communities == inst.n or len(levels) >= cfg.max_passes:
            break
        inst = aggregate(inst, part)
    final = inst.flatten(part)
    return LouvainResult(partition=final, q=levels[-1].q, levels=tuple(levels), seed=cfg.seed)


def _all_assignments(n: int) -> np.ndarray:
    """Every set partition of n items as canonical label vectors.

    Rows are restricted-growth strings in lexicographic order: item 0 gets
    label 0 and each later item picks an existing label or the next unused
    one. Lexicographic order makes argmax tie-breaking reproducible.
    """
    rgs = np.zeros((1, 1), dtype=np.int8)
    max_label = np.zeros(1, dtype=np.int8)
    for _ in range(n - 1):
        counts = max_label.astype(np.int64) + 2
        parent = np.repeat(np.arange(rgs.shape[0]), counts)
        offsets = np.cumsum(counts) - counts
        child = (np.arange(counts.sum()) - offsets[parent]).astype(np.int8)
        rgs = np.concatenate([rgs[parent], child[:, None]], axis=1)
        max_label = np.maximum(max_label[parent], child)
    return rgs


def brute_force_best_partition(g: Graph, nm: NullMatrix) -> tuple[Partition, float]:
    """Global optimum by enumerating every set partition (n <= 12 only).

    Ties go to the lexicographically smallest canonical assignment vector.
    """
    n = g.n
    if n > BRUTE_FORCE_MAX_NODES:
        raise ValidationError(
            f"exhaustive search refused for n={n} (> {BRUTE_FORCE_MAX_NODES}); partition count grows too fast"
        )
    if g.num_edges == 0:
        raise ValidationError("optimization needs m > 0")
    if g.n != nm.n:
        raise ValidationError(f"graph has {g.n} nodes but null matrix is {nm.n}x{nm.n}")
    b = g.adjacency.toarray().astype(np.float64) - nm.p
    assignments = _all_assignments(n)
    q = np.full(assignments.shape[0], np.trace(b))
    for i in range(n):
        for j in range(i + 1, n):
            q += (2.0 * b[i, j]) * (assignments[:, i] == assignments[:, j])
    q /= 2.0 * g.num_edges
    best = int(np.argmax(q))
    return Partition(assignments[best].astype(np.int64)), float(q[best])
