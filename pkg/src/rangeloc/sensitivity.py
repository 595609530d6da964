"""Ranging sensitivity analysis.

Linearizing the distance map around an embedding gives a sparse matrix A with
one row per measurable edge and two columns (x, y) per non-anchor vertex:
small position perturbations dP produce distance perturbations dD = A @ dP.
The spread of A's singular values measures how strongly measurement errors
can deform the embedding, so its condition number serves as a realization
quality gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .model import Edge, EmbeddedGraph, Point2, RangeGraph, euclid

#: Embedded edges shorter than this give no usable direction vector.
DEGENERATE_EDGE = 1e-12


class RankDeficiencyError(ValueError):
    """Raised when a solve requires a full-rank sensitivity matrix."""

    def __init__(self, message: str, spectrum: "SpectrumResult"):
        super().__init__(message)
        self.spectrum = spectrum


@dataclass(frozen=True)
class SensitivityMatrix:
    """Dense sensitivity matrix with row/column bookkeeping.

    Rows follow sorted edge order over edges with at least one non-anchor
    endpoint; columns are (x, y) pairs of the non-anchor vertices in
    ascending vertex order.
    """

    matrix: np.ndarray
    row_index: dict[Edge, int]
    col_index: dict[int, tuple[int, int]]
    anchors: tuple[int, ...]
    ordinary: tuple[int, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@dataclass(frozen=True)
class SpectrumResult:
    """Singular spectrum of a sensitivity matrix.

    ``singular_values`` has one entry per column (descending, zero-padded when
    there are fewer rows than columns).  ``condition_number`` is the ratio of
    the largest to smallest singular value, infinite when the matrix is
    rank-deficient at ``tolerance``.
    """

    singular_values: np.ndarray
    condition_number: float
    full_rank: bool
    tolerance: float


def build_rsm(
    embedded: EmbeddedGraph,
    anchors: Iterable[int] | None = None,
    vertices: Iterable[int] | None = None,
) -> SensitivityMatrix:
    """Build the sensitivity matrix of an embedding.

    ``vertices`` restricts the analysis to an induced subgraph (default: all
    located vertices); ``anchors`` overrides the graph's anchor set (the
    intersection with ``vertices`` is used).  Anchor-anchor edges contribute
    no row; anchors contribute no columns, so a subgraph with only
    anchor-anchor edges yields a 0-row matrix.  Edge direction entries use
    the embedded inter-point distances, not the measured values, so a
    zero-length embedded edge is an error.
    """
    graph = embedded.graph
    locs = embedded.locations
    if vertices is None:
        vert_set = set(locs)
    else:
        vert_set = set(vertices)
        missing = vert_set - set(locs)
        if missing:
            raise ValueError(f"vertices without locations: {sorted(missing)}")
    if anchors is None:
        anchor_set = set(graph.anchor_set) & vert_set
    else:
        anchor_set = set(anchors) & vert_set

    ordinary = tuple(sorted(vert_set - anchor_set))
    col_index = {v: (2 * k, 2 * k + 1) for k, v in enumerate(ordinary)}

    rows: list[Edge] = [
        (i, j)
        for i, j in graph.sorted_edges
        if i in vert_set and j in vert_set and not (i in anchor_set and j in anchor_set)
    ]

    matrix = np.zeros((len(rows), 2 * len(ordinary)), dtype=float)
    row_index: dict[Edge, int] = {}
    for r, (i, j) in enumerate(rows):
        row_index[(i, j)] = r
        pi, pj = locs[i], locs[j]
        d = euclid(pi, pj)
        if d <= DEGENERATE_EDGE:
            raise ValueError(f"zero-length embedded edge ({i}, {j})")
        ux, uy = (pi.x - pj.x) / d, (pi.y - pj.y) / d
        if i in col_index:
            cx, cy = col_index[i]
            matrix[r, cx] = ux
            matrix[r, cy] = uy
        if j in col_index:
            cx, cy = col_index[j]
            matrix[r, cx] = -ux
            matrix[r, cy] = -uy

    return SensitivityMatrix(
        matrix=matrix,
        row_index=row_index,
        col_index=col_index,
        anchors=tuple(sorted(anchor_set)),
        ordinary=ordinary,
    )


def condition_number(sensitivity: SensitivityMatrix) -> SpectrumResult:
    """Singular spectrum and condition number of a sensitivity matrix.

    The smallest singular value is taken at index 2*(n-m)-1, padding with
    zeros when the matrix has fewer rows than columns.  Rank is judged
    against sigma_max * max(rows, cols) * machine epsilon.
    """
    a = sensitivity.matrix
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        raise ValueError("no perturbable edges")
    svals = np.linalg.svd(a, compute_uv=False)
    padded = np.zeros(cols, dtype=float)
    padded[: len(svals)] = svals
    sigma_max = float(padded[0]) if cols else 0.0
    sigma_min = float(padded[cols - 1]) if cols else 0.0
    tolerance = sigma_max * max(rows, cols) * np.finfo(float).eps
    full_rank = sigma_min > tolerance and sigma_max > 0.0
    cond = sigma_max / sigma_min if full_rank else math.inf
    return SpectrumResult(
        singular_values=padded,
        condition_number=cond,
        full_rank=full_rank,
        tolerance=tolerance,
    )


def rank_check(sensitivity: SensitivityMatrix, n: int, m: int) -> bool:
    """True iff the matrix has full column rank 2*(n - m).

    ``n`` is the subgraph vertex count and ``m`` the anchor count; fewer than
    two anchors leave the coordinate frame undefined and raise ValueError.
    """
    if m < 2:
        raise ValueError("anchor frame undefined: need at least 2 anchors")
    expected = 2 * (n - m)
    if sensitivity.matrix.shape[1] != expected:
        raise ValueError(
            f"matrix has {sensitivity.matrix.shape[1]} columns, expected {expected}"
        )
    spectrum = condition_number(sensitivity)
    rank = int(np.sum(spectrum.singular_values > spectrum.tolerance))
    return rank == expected


def predict_perturbation(
    sensitivity: SensitivityMatrix,
    delta_d: Mapping[Edge, float] | np.ndarray,
) -> dict[int, np.ndarray]:
    """Per-vertex displacement that best explains the edge-length changes.

    Solves the minimum-norm least-squares problem A dP = dD.  ``delta_d`` is
    either a row-aligned vector or a mapping from edge keys (missing edges
    default to 0).  Raises RankDeficiencyError, carrying the spectrum, when
    the matrix is rank-deficient.
    """
    spectrum = condition_number(sensitivity)
    if not spectrum.full_rank:
        raise RankDeficiencyError("sensitivity matrix is rank-deficient", spectrum)
    rows = sensitivity.matrix.shape[0]
    if isinstance(delta_d, Mapping):
        vec = np.zeros(rows, dtype=float)
        for edge, value in delta_d.items():
            key = (edge[0], edge[1]) if edge[0] < edge[1] else (edge[1], edge[0])
            if key not in sensitivity.row_index:
                raise ValueError(f"edge {edge} has no row in the matrix")
            vec[sensitivity.row_index[key]] = float(value)
    else:
        vec = np.asarray(delta_d, dtype=float)
        if vec.shape != (rows,):
            raise ValueError(f"delta_d has shape {vec.shape}, expected ({rows},)")
    solution, *_ = np.linalg.lstsq(sensitivity.matrix, vec, rcond=None)
    return {
        v: solution[list(cols)] for v, cols in sensitivity.col_index.items()
    }


def node_condition_number(
    graph: RangeGraph,
    locations: Mapping[int, Point2],
    frame_anchors: Iterable[int],
    vertex: int,
) -> float:
    """Condition number of the subgraph induced by the located set.

    Used as the per-node realization gate: ``locations`` holds the already
    realized vertices plus the candidate's tentative location, and
    ``frame_anchors`` are the vertices whose coordinates are held fixed.
    Degenerate subgraphs (rank deficiency, collinear references, no
    perturbable edges) report infinity rather than raising.
    """
    if vertex not in locations:
        raise ValueError(f"candidate vertex {vertex} has no tentative location")
    embedded = EmbeddedGraph(graph, dict(locations))
    try:
        sens = build_rsm(embedded, anchors=frame_anchors)
        return condition_number(sens).condition_number
    except ValueError:
        return math.inf
