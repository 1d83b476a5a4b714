"""Undirected multigraph representation and ingestion.

The adjacency matrix is stored sparse (entries are edge multiplicities) and is
immutable after construction, so graphs can be shared freely across workers.
A self-loop contributes 2 to its diagonal entry and 2 to the node degree,
which keeps the degree sum equal to twice the edge count with no special
cases. The convention is ours; inputs only describe loops as ``a a`` lines.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import ParseError, ValidationError
from .partition import Partition

__all__ = [
    "Graph",
    "NodeAttributes",
    "load_edge_list",
    "dump_edge_list",
    "load_attributes",
    "degrees",
    "connected_components",
    "drop_isolated_nodes",
]


def _as_text_stream(source: IO[str] | str | Path) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8")
    return source


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph with integer edge multiplicities.

    Attributes
    ----------
    adjacency : scipy.sparse.csr_array
        Symmetric n x n matrix of nonnegative integers. Off-diagonal entries
        count parallel edges; a diagonal entry is twice the number of
        self-loops at that node.
    node_labels : tuple of str, optional
        External identifiers in node-index order, kept from the input file so
        runs are reproducible and results can be mapped back.
    """

    adjacency: sparse.csr_array
    node_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        a = self.adjacency
        if a.shape[0] != a.shape[1]:
            raise ValidationError(f"adjacency must be square, got {a.shape}")
        if not np.issubdtype(a.dtype, np.integer):
            raise ValidationError("adjacency entries must be integers")
        if a.nnz and a.data.min() < 0:
            raise ValidationError("adjacency entries must be nonnegative")
        if (a != a.T).nnz != 0:
            raise ValidationError("adjacency must be symmetric")
        if int(a.sum()) % 2 != 0:
            raise ValidationError("total adjacency weight must be even")
        if self.node_labels is not None and len(self.node_labels) != a.shape[0]:
            raise ValidationError("node_labels length must equal node count")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        """Edge count m, counting multiplicities; a self-loop counts once."""
        return int(self.adjacency.sum()) // 2

    @property
    def label_index(self) -> dict[str, int]:
        if self.node_labels is None:
            return {str(i): i for i in range(self.n)}
        return {lab: i for i, lab in enumerate(self.node_labels)}

    @classmethod
    def from_dense(cls, array, node_labels=None) -> "Graph":
        a = sparse.csr_array(np.asarray(array, dtype=np.int64))
        return cls(a, tuple(node_labels) if node_labels is not None else None)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple], node_labels=None) -> "Graph":
        """Build from (i, j) or (i, j, multiplicity) index tuples."""
        rows, cols, vals = [], [], []
        for e in edges:
            i, j = int(e[0]), int(e[1])
            mult = int(e[2]) if len(e) > 2 else 1
            if mult < 0:
                raise ValidationError(f"negative multiplicity for edge {i}-{j}")
            if i == j:
                rows.append(i)
                cols.append(i)
                vals.append(2 * mult)
            else:
                rows.extend((i, j))
                cols.extend((j, i))
                vals.extend((mult, mult))
        a = sparse.coo_array((vals, (rows, cols)), shape=(n, n), dtype=np.int64).tocsr()
        a.sum_duplicates()
        return cls(a, tuple(node_labels) if node_labels is not None else None)


def load_edge_list(source: IO[str] | str | Path, directed_input: bool = False) -> Graph:
    """Read a whitespace-separated edge list into a Graph.

    Each non-comment line is ``src dst [multiplicity]``; identifiers are
    arbitrary strings and ``#`` starts a comment. Nodes are indexed 0..n-1 in
    first-appearance order. Repeated undirected edges accumulate multiplicity.

    With ``directed_input`` the file is taken to list each undirected edge
    once per direction (a symmetric arc dump); every arc must have a matching
    reverse arc of equal multiplicity, and the pair yields a single edge.

    Raises
    ------
    ParseError
        On a malformed line, with its line number.
    ValidationError
        On a negative multiplicity, or on asymmetric arcs in directed mode.
    """
    stream = _as_text_stream(source)
    index: dict[str, int] = {}
    entries: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'src dst [multiplicity]', got {len(parts)} fields")
        mult = 1
        if len(parts) == 3:
            try:
                mult = int(parts[2])
            except ValueError:
                raise ParseError(f"line {lineno}: multiplicity {parts[2]!r} is not an integer") from None
            if mult < 0:
                raise ValidationError(f"line {lineno}: negative multiplicity {mult}")
        pair = []
        for tok in parts[:2]:
            if tok not in index:
                index[tok] = len(index)
            pair.append(index[tok])
        entries.append((pair[0], pair[1], mult))

    n = len(index)
    labels = tuple(sorted(index, key=index.get))
    if not directed_input:
        return Graph.from_edges(n, entries, node_labels=labels)

    arcs = np.zeros((n, n), dtype=np.int64)
    loops = np.zeros(n, dtype=np.int64)
    for i, j, mult in entries:
        if i == j:
            loops[i] += mult
        else:
            arcs[i, j] += mult
    if not np.array_equal(arcs, arcs.T):
        i, j = np.argwhere(arcs != arcs.T)[0]
        a, b = labels[i], labels[j]
        raise ValidationError(f"directed input is not symmetric: arc {a}->{b} has no matching reverse")
    dense = arcs
    dense[np.arange(n), np.arange(n)] = 2 * loops
    return Graph.from_dense(dense, node_labels=labels)


def dump_edge_list(g: Graph, stream: IO[str]) -> None:
    """Write ``src dst multiplicity`` lines; the inverse of load_edge_list."""
    labels = g.node_labels or tuple(str(i) for i in range(g.n))
    coo = g.adjacency.tocoo()
    for i, j, v in zip(coo.row, coo.col, coo.data):
        if i < j:
            stream.write(f"{labels[i]} {labels[j]} {int(v)}\n")
        elif i == j:
            stream.write(f"{labels[i]} {labels[i]} {int(v) // 2}\n")
    for i in np.flatnonzero(degrees(g) == 0):  # keep isolated nodes discoverable on reload
        stream.write(f"{labels[i]} {labels[i]} 0\n")


def degrees(g: Graph) -> np.ndarray:
    """Degree vector k, with k_i the i-th adjacency row sum."""
    return np.asarray(g.adjacency.sum(axis=1)).ravel().astype(np.int64)


def connected_components(g: Graph) -> Partition:
    """Partition nodes into connected components, labeled by smallest member."""
    if g.n == 0:
        return Partition(np.zeros(0, dtype=np.int64))
    _, labels = csgraph.connected_components(g.adjacency, directed=False)
    return Partition(labels.astype(np.int64))


def drop_isolated_nodes(g: Graph, attrs: "NodeAttributes | None" = None):
    """Return (graph, attrs, kept_indices) with zero-degree nodes removed.

    Degree-based node powers reject isolated nodes; this is the opt-in way to
    strip them before analysis.
    """
    keep = np.flatnonzero(degrees(g) > 0)
    sub = g.adjacency[keep][:, keep]
    labels = tuple(g.node_labels[i] for i in keep) if g.node_labels else None
    new_attrs = None
    if attrs is not None:
        new_attrs = NodeAttributes(attrs.values[keep], attrs.columns)
    return Graph(sparse.csr_array(sub), labels), new_attrs, keep


@dataclass(frozen=True)
class NodeAttributes:
    """Real-valued node attribute vectors aligned to node indices."""

    values: np.ndarray
    columns: tuple[str, ...] = field(default=())

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValidationError("attribute values must be a 2-D array")
        if not np.isfinite(vals).all():
            raise ValidationError("attribute values must be finite")
        if self.columns and len(self.columns) != vals.shape[1]:
            raise ValidationError("column names must match attribute width")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise ValidationError(f"unknown attribute column {name!r}")
        return self.values[:, self.columns.index(name)]


def load_attributes(source: IO[str] | str | Path, g: Graph) -> NodeAttributes:
    """Read a node-attribute CSV and align rows to the graph's node order.

    The header names the columns; the first column holds node identifiers
    matching the edge-list labels. Rows for unknown identifiers are ignored,
    but every graph node must be covered.
    """
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("attribute file is empty") from None
    if len(header) < 2:
        raise ParseError("attribute header needs an id column plus at least one value column")
    columns = tuple(h.strip() for h in header[1:])
    index = g.label_index
    values = np.full((g.n, len(columns)), np.nan)
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(columns) + 1:
            raise ParseError(f"line {lineno}: expected {len(columns) + 1} fields, got {len(row)}")
        node = index.get(row[0].strip())
        if node is None:
            continue
        try:
            values[node] = [float(x) for x in row[1:]]
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric attribute value") from None
    missing = np.flatnonzero(np.isnan(values).any(axis=1))
    if missing.size:
        labels = g.node_labels or tuple(str(i) for i in range(g.n))
        raise ValidationError(f"attributes missing for node {labels[missing[0]]!r}")
    return NodeAttributes(values, columns)


def dump_attributes(g: Graph, attrs: NodeAttributes, stream: IO[str]) -> None:
    """Write attributes as CSV with node labels; inverse of load_attributes."""
    labels = g.node_labels or tuple(str(i) for i in range(g.n))
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("node",) + tuple(attrs.columns))
    for i in range(g.n):
        writer.writerow([labels[i]] + [repr(float(v)) for v in attrs.values[i]])
