"""Distance-aware null models for modularity.

A null model assigns each node pair an expected edge count built from node
powers N_i and a distance-decay function f(d). Node i exerts a field
potential N_i * f(d_ij) at node j; the expected count is the product of the
two potentials at i, normalized by the superposed potential of all nodes
at i, then symmetrized:

    raw_ij = N_i N_j f(d_ij) / sum_t N_t f(d_ti)
    p_ij   = (raw_ij + raw_ji) / 2

Row i of the raw matrix sums to N_i, so the total of p equals sum(N); with
the powers normalized to sum to 2m, the null model preserves the observed
edge count. Degree powers with constant f reduce to the classic
degree-product null model, and uniform powers with constant f to the
Erdos-Renyi expectation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distances import DistanceMatrix
from .errors import DegenerateFieldError, ValidationError
from .graph import Graph, degrees

__all__ = [
    "DistanceFunction",
    "PowerSpec",
    "NullMatrix",
    "make_power_spec",
    "build_null_matrix",
    "ng_null_matrix",
    "modularity_matrix",
    "learn_distance_function",
]

# exp(-x) underflows to zero a little past this; clamping avoids overflow noise
# in the exponent without changing any representable result.
_EXP_CLAMP = 745.0

_PARAMETRIC_KINDS = ("gaussian", "rational", "constant", "window")
_TABLE_KINDS = ("learned", "table")


@dataclass(frozen=True)
class DistanceFunction:
    """Distance-decay function used as the field kernel.

    Kinds
    -----
    gaussian : exp(-(d/sigma)^exponent)
    rational : 1 / (1 + (d/sigma)^exponent)
    constant : 1 everywhere (no distance effect)
    window   : 1 for d <= sigma, else 0
    learned / table : step function over distance bins

    ``sigma`` sets the field range: small sigma gives a short-range field,
    large sigma a long-range one. Values at the infinite sentinel follow the
    d -> inf limit (1 for constant, 0 otherwise).
    """

    kind: str
    sigma: float | None = None
    exponent: float | None = None
    bin_edges: np.ndarray | None = None
    bin_values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind in ("gaussian", "rational"):
            if self.sigma is None or not self.sigma > 0:
                raise ValidationError(f"{self.kind} kernel needs sigma > 0, got {self.sigma}")
            if self.exponent is None or not self.exponent > 0:
                raise ValidationError(f"{self.kind} kernel needs exponent > 0, got {self.exponent}")
        elif self.kind == "window":
            if self.sigma is None or not self.sigma > 0:
                raise ValidationError(f"window kernel needs sigma > 0, got {self.sigma}")
        elif self.kind == "constant":
            pass
        elif self.kind in _TABLE_KINDS:
            edges = np.asarray(self.bin_edges, dtype=np.float64)
            values = np.asarray(self.bin_values, dtype=np.float64)
            if edges.ndim != 1 or edges.size < 2:
                raise ValidationError("table kernel needs at least two bin edges")
            if np.any(np.diff(edges) < 0) or edges[0] < 0:
                raise ValidationError("bin edges must be nondecreasing and start at >= 0")
            if values.shape != (edges.size - 1,):
                raise ValidationError("need one value per bin")
            if not np.isfinite(values).all() or np.any(values < 0):
                raise ValidationError("bin values must be finite and nonnegative")
            edges.setflags(write=False)
            values.setflags(write=False)
            object.__setattr__(self, "bin_edges", edges)
            object.__setattr__(self, "bin_values", values)
        else:
            raise ValidationError(f"unknown distance function kind {self.kind!r}")

    @classmethod
    def gaussian(cls, sigma: float, exponent: float = 2.0) -> "DistanceFunction":
        return cls("gaussian", sigma=float(sigma), exponent=float(exponent))

    @classmethod
    def rational(cls, sigma: float, exponent: float = 2.0) -> "DistanceFunction":
        return cls("rational", sigma=float(sigma), exponent=float(exponent))

    @classmethod
    def constant(cls) -> "DistanceFunction":
        return cls("constant")

    @classmethod
    def window(cls, sigma: float) -> "DistanceFunction":
        return cls("window", sigma=float(sigma))

    @classmethod
    def from_table(cls, bin_edges, bin_values, kind: str = "table") -> "DistanceFunction":
        return cls(kind, bin_edges=np.asarray(bin_edges), bin_values=np.asarray(bin_values))

    @property
    def sentinel_value(self) -> float:
        """Value assigned to unreachable (infinite-distance) pairs."""
        return 1.0 if self.kind == "constant" else 0.0

    def evaluate(self, d):
        """Evaluate on a scalar or array of distances; inf is allowed, NaN is not."""
        arr = np.asarray(d, dtype=np.float64)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.isnan(arr).any():
            raise ValidationError("distance is NaN")
        infinite = np.isinf(arr)
        finite = np.where(infinite, 0.0, arr)
        if np.any(finite < 0):
            raise ValidationError("distances must be nonnegative")
        out = self._evaluate_finite(finite)
        out[infinite] = self.sentinel_value
        return float(out[0]) if scalar else out.reshape(np.shape(d))

    def _evaluate_finite(self, d: np.ndarray) -> np.ndarray:
        if self.kind == "gaussian":
            with np.errstate(over="ignore"):
                expo = np.power(d / self.sigma, self.exponent)
            return np.exp(-np.minimum(expo, _EXP_CLAMP))
        if self.kind == "rational":
            with np.errstate(over="ignore"):
                expo = np.power(d / self.sigma, self.exponent)
            return 1.0 / (1.0 + expo)
        if self.kind == "constant":
            return np.ones_like(d)
        if self.kind == "window":
            return (d <= self.sigma).astype(np.float64)
        # step lookup: bins are half-open [e_k, e_{k+1}), last bin closed,
        # and anything past the last edge decays to 0
        idx = np.searchsorted(self.bin_edges, d, side="right") - 1
        valid = (idx >= 0) & (d <= self.bin_edges[-1])
        idx = np.clip(idx, 0, self.bin_values.size - 1)
        return np.where(valid, self.bin_values[idx], 0.0).astype(np.float64)

    __call__ = evaluate

    def as_config(self) -> dict:
        cfg: dict = {"kind": self.kind}
        if self.sigma is not None:
            cfg["sigma"] = float(self.sigma)
        if self.exponent is not None:
            cfg["exponent"] = float(self.exponent)
        if self.bin_edges is not None:
            cfg["bin_edges"] = [float(x) for x in self.bin_edges]
            cfg["bin_values"] = [float(x) for x in self.bin_values]
        return cfg


def learn_distance_function(g: Graph, dmat: DistanceMatrix, bins: int | Sequence[float] = 10) -> DistanceFunction:
    """Estimate f(d) from the network itself.

    Each bin's value is the fraction of all edge endpoints (ordered node
    pairs, weighted by adjacency) whose pair distance falls in the bin:
    value(b) = sum over ordered (i,j) with d_ij in b of A_ij, divided by 2m.
    Bins with no edges get 0. By default the bins split [0, max finite d]
    evenly; pass explicit edges for custom binning.
    """
    if g.num_edges == 0:
        raise ValidationError("cannot learn a distance function from an empty graph")
    if g.n != dmat.n:
        raise ValidationError(f"graph has {g.n} nodes but distances are {dmat.n}x{dmat.n}")
    max_fin = dmat.max_finite()  # raises when every off-diagonal distance is infinite
    if isinstance(bins, (int, np.integer)):
        if bins < 1:
            raise ValidationError(f"need at least one bin, got {bins}")
        edges = np.linspace(0.0, max_fin, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=np.float64)
    nbins = edges.size - 1
    coo = g.adjacency.tocoo()
    dvals = dmat.values[coo.row, coo.col]
    keep = np.isfinite(dvals) & (dvals <= edges[-1])
    idx = np.searchsorted(edges, dvals[keep], side="right") - 1
    idx = np.clip(idx, 0, nbins - 1)
    sums = np.bincount(idx, weights=coo.data[keep].astype(np.float64), minlength=nbins)
    values = sums / (2.0 * g.num_edges)
    return DistanceFunction.from_table(edges, values, kind="learned")


@dataclass(frozen=True)
class PowerSpec:
    """Node powers N_i, normalized so their sum equals 2m.

    ``kind`` is one of degree, uniform, attribute, explicit; ``raw`` keeps the
    pre-normalization values for provenance.
    """

    kind: str
    raw: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.raw, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if raw.shape != values.shape or raw.ndim != 1:
            raise ValidationError("power vectors must be matching 1-D arrays")
        if np.any(values <= 0) or not np.isfinite(values).all():
            raise ValidationError("normalized powers must be positive and finite")
        raw.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def total(self) -> float:
        return float(self.values.sum())


def make_power_spec(g: Graph, kind: str, raw=None) -> PowerSpec:
    """Build node powers of the requested kind, rescaled to sum to 2m.

    degree uses k_i unchanged (the degree vector already sums to 2m);
    uniform spreads 2m evenly; explicit / attribute rescale a user vector.
    Zero or negative raw powers are rejected: a powerless node cannot receive
    edges in the null model and breaks the per-node normalization.
    """
    m = g.num_edges
    if m == 0:
        raise ValidationError("null-model powers need at least one edge (m > 0)")
    two_m = 2.0 * m
    if kind == "degree":
        k = degrees(g).astype(np.float64)
        if np.any(k == 0):
            bad = int(np.flatnonzero(k == 0)[0])
            label = g.node_labels[bad] if g.node_labels else str(bad)
            raise ValidationError(
                f"node {label!r} is isolated; degree powers need k > 0 "
                "(use drop_isolated_nodes to strip such nodes first)"
            )
        raw_vec = k
    elif kind == "uniform":
        raw_vec = np.ones(g.n, dtype=np.float64)
    elif kind in ("explicit", "attribute"):
        if raw is None:
            raise ValidationError(f"{kind} powers need a raw value vector")
        raw_vec = np.asarray(raw, dtype=np.float64)
        if raw_vec.shape != (g.n,):
            raise ValidationError(f"raw powers must have length {g.n}")
        if not np.isfinite(raw_vec).all() or np.any(raw_vec <= 0):
            raise ValidationError("raw powers must be finite and strictly positive")
    else:
        raise ValidationError(f"unknown power kind {kind!r}")
    values = raw_vec * (two_m / raw_vec.sum())
    return PowerSpec(kind, raw_vec, values)


@dataclass(frozen=True)
class NullMatrix:
    """Expected-edge-count matrices for a null model.

    ``p`` is the symmetric matrix used in modularity; ``p_raw`` is the
    pre-symmetrization field form whose row i sums to ``row_targets[i]`` (the
    node's power). ``config`` is a JSON-serializable description sufficient
    to rebuild the model (power kind, kernel kind and parameters).
    """

    p: np.ndarray
    p_raw: np.ndarray
    row_targets: np.ndarray
    config: dict

    def __post_init__(self):
        for name in ("p", "p_raw", "row_targets"):
            mat = np.asarray(getattr(self, name), dtype=np.float64)
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if self.p.shape != self.p_raw.shape or self.p.shape[0] != self.p.shape[1]:
            raise ValidationError("null matrices must be square and same shape")
        if self.row_targets.shape != (self.p.shape[0],):
            raise ValidationError("row_targets must have one entry per node")

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def total(self) -> float:
        return float(self.p.sum())

    def audit(self) -> dict:
        """Numerical residuals of the model's defining identities."""
        expected_total = float(self.row_targets.sum())
        row_sums = self.p_raw.sum(axis=1)
        gap = np.abs(row_sums - self.row_targets)
        positive = self.row_targets > 0
        row_residual = float((gap[positive] / self.row_targets[positive]).max()) if positive.any() else 0.0
        if (~positive).any():
            row_residual = max(row_residual, float(gap[~positive].max()))
        return {
            "symmetry_residual": float(np.abs(self.p - self.p.T).max()) if self.n else 0.0,
            "total_relative_residual": abs(self.total - expected_total) / expected_total,
            "row_sum_max_relative_residual": row_residual,
        }


def build_null_matrix(powers: PowerSpec, dmat: DistanceMatrix, f: DistanceFunction) -> NullMatrix:
    """Assemble the null matrix from powers, distances, and a kernel.

    Raises DegenerateFieldError when some node's superposed potential is zero,
    which can happen for kernels with f(0) = 0 (a learned table, typically).
    """
    if powers.n != dmat.n:
        raise ValidationError(f"powers cover {powers.n} nodes but distances are {dmat.n}x{dmat.n}")
    weights = f.evaluate(dmat.values)
    n_vec = powers.values
    superposed = weights.T @ n_vec  # potential of all nodes felt at each node
    bad = np.flatnonzero(superposed <= 0)
    if bad.size:
        raise DegenerateFieldError(int(bad[0]))
    p_raw = (n_vec[:, None] * (n_vec[None, :] * weights)) / superposed[:, None]
    p = (p_raw + p_raw.T) / 2.0
    config = {"power": powers.kind, "f": f.as_config()}
    return NullMatrix(p=p, p_raw=p_raw, row_targets=n_vec, config=config)


def ng_null_matrix(g: Graph) -> NullMatrix:
    """Degree-product null model: p_ij = k_i k_j / 2m."""
    m = g.num_edges
    if m == 0:
        raise ValidationError("degree-product null model needs m > 0")
    k = degrees(g).astype(np.float64)
    p = np.outer(k, k) / (2.0 * m)
    config = {"power": "degree", "f": {"kind": "constant"}}
    return NullMatrix(p=p, p_raw=p, row_targets=k, config=config)


def modularity_matrix(g: Graph, nm: NullMatrix) -> np.ndarray:
    """Dense matrix of adjacency minus expectation, A - P."""
    if g.n != nm.n:
        raise ValidationError(f"graph has {g.n} nodes but null matrix is {nm.n}x{nm.n}")
    return g.adjacency.toarray().astype(np.float64) - nm.p
