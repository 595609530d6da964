"""Shared helpers for the test suite: tiny graph builders and rigidity checks."""

import math
from itertools import combinations

import numpy as np
import networkx as nx

from rangeloc.model import Point2, RangeGraph


def measure(points, edges):
    """Exact pairwise distances for the given edges, keyed by sorted pair."""
    out = {}
    for i, j in edges:
        a, b = points[i], points[j]
        out[(min(i, j), max(i, j))] = math.hypot(a.x - b.x, a.y - b.y)
    return out


def graph_from_points(points, edges, anchors=()):
    """RangeGraph with noise-free measurements taken from true positions."""
    return RangeGraph(
        node_count=len(points),
        anchor_ids=tuple(anchors),
        measured=measure(points, edges),
    )


def radius_edges(points, radius):
    """All vertex pairs within the given range of each other."""
    ids = sorted(points)
    return [
        (i, j)
        for i, j in combinations(ids, 2)
        if math.hypot(points[i].x - points[j].x, points[i].y - points[j].y) <= radius
    ]


def rigidity_rank(points, edges):
    """Rank of the 2D rigidity matrix of the embedded graph."""
    ids = sorted(points)
    col = {v: 2 * k for k, v in enumerate(ids)}
    matrix = np.zeros((len(edges), 2 * len(ids)))
    for r, (i, j) in enumerate(edges):
        dx = points[i].x - points[j].x
        dy = points[i].y - points[j].y
        matrix[r, col[i]] = dx
        matrix[r, col[i] + 1] = dy
        matrix[r, col[j]] = -dx
        matrix[r, col[j] + 1] = -dy
    return int(np.linalg.matrix_rank(matrix))


def is_rigid(points, edges):
    """Generic rigidity: the rigidity matrix has rank 2n - 3."""
    if len(points) < 3:
        return False
    return rigidity_rank(points, edges) == 2 * len(points) - 3


def is_globally_rigid(points, edges):
    """Generic global rigidity: redundantly rigid and 3-connected.

    Every edge must be removable without losing rigidity, and the graph must
    stay connected after deleting any two vertices.
    """
    n = len(points)
    if n == 3:
        return len(edges) == 3
    target = 2 * n - 3
    if rigidity_rank(points, edges) != target:
        return False
    for k in range(len(edges)):
        if rigidity_rank(points, edges[:k] + edges[k + 1:]) != target:
            return False
    g = nx.Graph(edges)
    g.add_nodes_from(sorted(points))
    return nx.node_connectivity(g) >= 3


# Hourglass with two dense four-vertex wings sharing the near-vertical waist
# edge {2, 3}: the only strip whose removal splits the rest is the waist, so
# the embedding has exactly one mirror (sides {0, 1} and {4, 5}).
BOWTIE_POINTS = {
    0: Point2(-2.5, 1.3),
    1: Point2(-2.55, -1.28),
    2: Point2(0.0, 1.0),
    3: Point2(0.04, -1.03),
    4: Point2(2.6, 1.25),
    5: Point2(2.4, -1.35),
}
BOWTIE_EDGES = sorted(
    set(combinations((0, 1, 2, 3), 2)) | set(combinations((2, 3, 4, 5), 2))
)
BOWTIE_HALF_WIDTH = 0.2


def bowtie(anchors=()):
    """The hourglass graph above with the requested anchors."""
    return graph_from_points(BOWTIE_POINTS, BOWTIE_EDGES, anchors), dict(BOWTIE_POINTS)
