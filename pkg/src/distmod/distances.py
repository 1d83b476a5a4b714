"""Pairwise node distances from structure, attributes, or files.

All builders return an exactly symmetric matrix with a zero diagonal.
Unreachable or unspecified pairs carry ``inf``; finite stand-ins are never
substituted, so downstream distance functions can apply their own d -> inf
limit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np
from scipy.sparse import csgraph
from scipy.spatial.distance import cdist

from .errors import ParseError, ValidationError
from .graph import Graph, NodeAttributes, _as_text_stream

__all__ = [
    "DistanceMatrix",
    "distance_from_adjacency_rows",
    "distance_hop",
    "distance_from_attributes",
    "load_distance_file",
]

SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative pairwise distances with provenance.

    ``source`` records how the matrix was produced: "structural-row",
    "structural-hop", "attribute", or "file".
    """

    values: np.ndarray
    source: str = "file"

    def __post_init__(self):
        d = np.asarray(self.values, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValidationError(f"distance matrix must be square, got {d.shape}")
        if np.isnan(d).any():
            raise ValidationError("distance matrix contains NaN")
        d = (d + d.T) / 2.0  # exact when already symmetric; cheap insurance otherwise
        np.fill_diagonal(d, 0.0)
        if d.size and np.min(d) < 0:
            raise ValidationError("distances must be nonnegative")
        d.setflags(write=False)
        object.__setattr__(self, "values", d)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def finite_offdiagonal(self) -> np.ndarray:
        mask = np.isfinite(self.values)
        np.fill_diagonal(mask, False)
        return self.values[mask]

    def min_positive(self) -> float:
        vals = self.finite_offdiagonal()
        vals = vals[vals > 0]
        if not vals.size:
            raise ValidationError("no positive finite distances")
        return float(vals.min())

    def max_finite(self) -> float:
        vals = self.finite_offdiagonal()
        if not vals.size:
            raise ValidationError("no finite off-diagonal distances")
        return float(vals.max())


def distance_from_adjacency_rows(g: Graph, metric: str = "euclidean") -> DistanceMatrix:
    """Distances between adjacency rows, for graphs without attributes.

    ``euclidean`` compares rows as count vectors; ``jaccard`` compares the
    neighbor supports (1 - |intersection| / |union|), with two empty supports
    defined as distance 0 since such nodes are structurally identical.
    """
    if g.n < 1:
        raise ValidationError("graph must have at least one node")
    rows = g.adjacency.toarray().astype(np.float64)
    if metric == "euclidean":
        d = cdist(rows, rows, "euclidean")
    elif metric == "jaccard":
        support = rows > 0
        inter = (support.astype(np.float64) @ support.T.astype(np.float64))
        sizes = support.sum(axis=1).astype(np.float64)
        union = sizes[:, None] + sizes[None, :] - inter
        with np.errstate(invalid="ignore", divide="ignore"):
            d = 1.0 - np.where(union > 0, inter / np.where(union > 0, union, 1.0), 1.0)
    else:
        raise ValidationError(f"unknown row metric {metric!r}")
    return DistanceMatrix(d, source="structural-row")


def distance_hop(g: Graph) -> DistanceMatrix:
    """Unweighted shortest-path (BFS) distances; inf for unreachable pairs."""
    if g.n == 0:
        return DistanceMatrix(np.zeros((0, 0)), source="structural-hop")
    d = csgraph.shortest_path(g.adjacency, directed=False, unweighted=True)
    return DistanceMatrix(d, source="structural-hop")


def distance_from_attributes(attrs: NodeAttributes, order: float = 2.0) -> DistanceMatrix:
    """Minkowski distance of the given order between attribute vectors.

    Order 2 is Euclidean, 1 is Manhattan, inf is Chebyshev; orders below 1 are
    rejected because they do not give a metric.
    """
    if not (order >= 1.0):
        raise ValidationError(f"Minkowski order must be >= 1, got {order}")
    x = attrs.values
    if np.isinf(order):
        d = cdist(x, x, "chebyshev")
    else:
        d = cdist(x, x, "minkowski", p=float(order))
    return DistanceMatrix(d, source="attribute")


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"line {lineno}: {token!r} is not a number") from None


def load_distance_file(
    source: IO[str] | str | Path,
    n: int,
    labels: tuple[str, ...] | None = None,
) -> DistanceMatrix:
    """Read a distance matrix from CSV.

    Two layouts are accepted. A dense n x n matrix, optionally preceded by a
    header row of node labels (reordered to match ``labels`` when given), or
    triplet rows ``i,j,d`` where omitted pairs default to inf. Entries must be
    symmetric within 1e-9 (then averaged) and nonnegative; the diagonal is
    forced to zero.
    """
    stream = _as_text_stream(source)
    rows = [row for row in csv.reader(stream) if row and any(f.strip() for f in row)]
    rows = [[f.strip() for f in row] for row in rows if not row[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError("distance file is empty")

    def _is_number(tok: str) -> bool:
        try:
            float(tok)
            return True
        except ValueError:
            return tok.lower() in ("inf", "+inf", "infinity")

    header: list[str] | None = None
    body = rows
    if not all(_is_number(t) for t in rows[0]):
        header, body = rows[0], rows[1:]
    dense_shaped = len(body) == n and all(len(r) >= n for r in body)
    if header is not None or dense_shaped:
        return _load_dense(body, header, n, labels)
    if all(len(r) == 3 for r in body):
        return _load_triplets(body, n, labels)
    raise ParseError(f"distance file is neither a dense {n}x{n} matrix nor i,j,d triplets")


def _finalize_file_matrix(d: np.ndarray) -> DistanceMatrix:
    if not np.array_equal(np.isinf(d), np.isinf(d.T)):
        i, j = np.argwhere(np.isinf(d) != np.isinf(d.T))[0]
        raise ValidationError(f"pair ({i},{j}) is infinite in one direction only")
    finite_pair = np.isfinite(d)
    with np.errstate(invalid="ignore"):
        gap = np.abs(np.where(finite_pair, d - d.T, 0.0))
    if gap.size and gap.max() > SYMMETRY_TOL:
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise ValidationError(
            f"asymmetry beyond tolerance at pair ({i},{j}): {d[i, j]!r} vs {d[j, i]!r}"
        )
    return DistanceMatrix((d + d.T) / 2.0, source="file")


def _load_dense(body, header, n, labels) -> DistanceMatrix:
    if len(body) != n:
        raise ValidationError(f"expected {n} matrix rows, got {len(body)}")
    cells = []
    for lineno, row in enumerate(body, start=1):
        vals = row[-n:] if len(row) == n + 1 else row  # allow a leading label column
        if len(vals) != n:
            raise ParseError(f"matrix row {lineno}: expected {n} entries, got {len(row)}")
        cells.append([_parse_float(t, lineno) for t in vals])
    d = np.array(cells, dtype=np.float64)
    if np.any(d[np.isfinite(d)] < 0):
        raise ValidationError("negative distance entry")
    if header is not None and labels is not None:
        names = header[-n:]
        if sorted(names) == sorted(labels) and tuple(names) != tuple(labels):
            perm = [names.index(lab) for lab in labels]
            d = d[np.ix_(perm, perm)]
    return _finalize_file_matrix(d)


def _load_triplets(body, n, labels) -> DistanceMatrix:
    index = {lab: i for i, lab in enumerate(labels)} if labels else {}

    def _node(tok: str, lineno: int) -> int:
        if tok in index:
            return index[tok]
        try:
            i = int(tok)
        except ValueError:
            raise ParseError(f"line {lineno}: unknown node {tok!r}") from None
        if not 0 <= i < n:
            raise ValidationError(f"line {lineno}: node index {i} out of range for n={n}")
        return i

    d = np.full((n, n), np.inf)
    seen = np.zeros((n, n), dtype=bool)
    for lineno, row in enumerate(body, start=1):
        i, j = _node(row[0], lineno), _node(row[1], lineno)
        val = _parse_float(row[2], lineno)
        if val < 0:
            raise ValidationError(f"line {lineno}: negative distance {val!r}")
        d[i, j] = val
        seen[i, j] = True
    one_sided = seen & ~seen.T
    d.T[one_sided] = d[one_sided]  # mirror pairs specified in a single direction
    np.fill_diagonal(d, 0.0)
    return _finalize_file_matrix(d)
