"""Partition quality scores against a null model.

The score is the within-community edge fraction minus its expectation:
Q = (1/2m) * sum over same-community ordered pairs of (A_ij - P_ij).
Because the null matrix total equals 2m, the all-in-one partition always
scores 0, and Q lies in [-1, 1].
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .graph import Graph
from .nullmodel import NullMatrix
from .partition import Partition

__all__ = ["modularity_q", "modularity_q_sigma_zero"]


def _check_dims(g: Graph, part: Partition, nm: NullMatrix | None = None) -> None:
    if part.n != g.n:
        raise ValidationError(f"partition covers {part.n} nodes, graph has {g.n}")
    if nm is not None and nm.n != g.n:
        raise ValidationError(f"null matrix is {nm.n}x{nm.n}, graph has {g.n} nodes")
    if g.num_edges == 0:
        raise ValidationError("modularity is undefined for m = 0")


def modularity_q(g: Graph, nm: NullMatrix, part: Partition, method: str = "blocks") -> float:
    """Modularity of ``part`` under the null model ``nm``.

    ``blocks`` sums (A - P) over each community block, which avoids
    materializing a dense n^2 indicator; ``scan`` is the literal
    all-ordered-pairs evaluation kept as a cross-check.
    """
    _check_dims(g, part, nm)
    two_m = 2.0 * g.num_edges
    if method == "blocks":
        total = 0.0
        for members in part.communities:
            a_block = g.adjacency[members][:, members].sum()
            p_block = nm.p[np.ix_(members, members)].sum()
            total += float(a_block) - float(p_block)
        return total / two_m
    if method == "scan":
        same = part.labels[:, None] == part.labels[None, :]
        diff = g.adjacency.toarray().astype(np.float64) - nm.p
        return float(diff[same].sum()) / two_m
    raise ValidationError(f"unknown method {method!r}")


def modularity_q_sigma_zero(g: Graph, part: Partition) -> float:
    """Closed-form short-range limit of the distance-modularity score.

    As the field range shrinks to zero the null matrix tends to diag(k), and
    the score becomes (within-community edge fraction) - 1. It is 0 exactly
    when every edge is intra-community (one community, or the connected
    components, or anything coarser), and negative otherwise.
    """
    _check_dims(g, part)
    two_m = 2.0 * g.num_edges
    intra = 0.0
    for members in part.communities:
        intra += float(g.adjacency[members][:, members].sum())
    return intra / two_m - 1.0
