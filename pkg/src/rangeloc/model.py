"""Range graphs, bounded-noise measurements, and random scenario generation.

Vertices are integers 0..n-1.  A subset of vertices are anchors whose true
coordinates are known to the localization pipeline; every other vertex must be
placed from noisy pairwise distance measurements.  All coordinates and
distances are in meters.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

Edge = tuple[int, int]

#: Floor applied to noisy measurements so distances stay strictly positive.
MIN_DISTANCE = 1e-9

MULTIPLICATIVE = "multiplicative-gaussian"
ADDITIVE = "additive-bounded"
NONE = "none"

_NOISE_KINDS = (MULTIPLICATIVE, ADDITIVE, NONE)


def edge_key(i: int, j: int) -> Edge:
    """Canonical (low, high) key for an undirected edge."""
    if i == j:
        raise ValueError(f"self-loop on vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Point2:
    """A 2D location in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


def euclid(a: Point2, b: Point2) -> float:
    """Euclidean distance between two points."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class NoiseModel:
    """Description of ranging noise.

    kind: one of "multiplicative-gaussian", "additive-bounded", "none".
    scale: magnitude (dimensionless factor for multiplicative noise, meters
        for additive noise).
    bound: hard cap C on the absolute measurement error in meters.  ``None``
        selects the default at scenario-build time: 2*scale*radius for
        multiplicative noise (~95% coverage at the longest edge) or 2*scale
        for additive noise.
    """

    kind: str = NONE
    scale: float = 0.0
    bound: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.scale < 0:
            raise ValueError("noise scale must be >= 0")
        if self.bound is not None and self.bound < 0:
            raise ValueError("noise bound must be >= 0")
        if self.kind == NONE and self.scale != 0:
            raise ValueError("noise kind 'none' requires scale 0")

    def resolved_bound(self, radius: float) -> float:
        """Error cap C, falling back to the documented default when unset."""
        if self.bound is not None:
            return self.bound
        if self.kind == MULTIPLICATIVE:
            return 2.0 * self.scale * radius
        if self.kind == ADDITIVE:
            return 2.0 * self.scale
        return 0.0


def apply_noise(true_distance: float, noise: NoiseModel, draw: float) -> float:
    """Corrupt one true distance with a single standard-normal draw.

    Multiplicative noise gives d*(1 + scale*draw); additive noise adds
    scale*draw clamped to [-C, C].  The result is floored at MIN_DISTANCE.
    """
    if true_distance <= 0:
        raise ValueError("true distance must be positive")
    if noise.kind == NONE:
        return true_distance
    if noise.kind == MULTIPLICATIVE:
        value = true_distance * (1.0 + noise.scale * draw)
    else:
        cap = noise.bound if noise.bound is not None else 2.0 * noise.scale
        delta = min(max(noise.scale * draw, -cap), cap)
        value = true_distance + delta
    return max(value, MIN_DISTANCE)


@dataclass(frozen=True)
class RangeGraph:
    """Measured range graph: vertex count, anchor ids, and edge measurements.

    ``measured`` maps canonical (i, j) keys with i < j to measured distances.
    Instances are treated as immutable after construction.
    """

    node_count: int
    anchor_ids: tuple[int, ...]
    measured: dict[Edge, float]

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        anchors = tuple(sorted(set(self.anchor_ids)))
        if len(anchors) != len(self.anchor_ids):
            raise ValueError("duplicate anchor ids")
        object.__setattr__(self, "anchor_ids", anchors)
        for a in anchors:
            if not 0 <= a < self.node_count:
                raise ValueError(f"anchor {a} out of range")
        for (i, j), d in self.measured.items():
            if not (0 <= i < j < self.node_count):
                raise ValueError(f"bad edge key ({i}, {j})")
            if not (d > 0 and math.isfinite(d)):
                raise ValueError(f"non-positive measurement on edge ({i}, {j})")

    @cached_property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.measured))

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {v: [] for v in range(self.node_count)}
        for i, j in self.sorted_edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return {v: tuple(sorted(ns)) for v, ns in nbrs.items()}

    @cached_property
    def anchor_set(self) -> frozenset[int]:
        return frozenset(self.anchor_ids)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def has_edge(self, i: int, j: int) -> bool:
        return edge_key(i, j) in self.measured

    def distance(self, i: int, j: int) -> float:
        return self.measured[edge_key(i, j)]

    def is_connected(self) -> bool:
        if self.node_count == 1:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for u in self.adjacency[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return len(seen) == self.node_count


@dataclass(frozen=True)
class EmbeddedGraph:
    """A range graph together with coordinates for some (or all) vertices."""

    graph: RangeGraph
    locations: dict[int, Point2]

    def __post_init__(self) -> None:
        for v in self.locations:
            if not 0 <= v < self.graph.node_count:
                raise ValueError(f"located vertex {v} out of range")

    @classmethod
    def from_scenario(cls, scenario: "Scenario") -> "EmbeddedGraph":
        locs = {v: p for v, p in enumerate(scenario.true_positions)}
        return cls(scenario.graph, locs)

    def located(self) -> frozenset[int]:
        return frozenset(self.locations)

    def located_edges(self) -> list[Edge]:
        """Edges whose endpoints both carry coordinates, in sorted order."""
        locs = self.locations
        return [(i, j) for i, j in self.graph.sorted_edges if i in locs and j in locs]


@dataclass(frozen=True)
class Scenario:
    """Ground truth plus the measured graph derived from it."""

    true_positions: tuple[Point2, ...]
    graph: RangeGraph
    area: tuple[float, float]
    radius: float
    seed: int
    connected: bool
    noise: NoiseModel = NoiseModel()

    def anchor_coordinates(self) -> dict[int, Point2]:
        """Calibrated coordinates of the anchors (ground truth by definition)."""
        return {a: self.true_positions[a] for a in self.graph.anchor_ids}


def _triangle_product(points: tuple[Point2, ...], tri: tuple[int, int, int]) -> float:
    i, j, k = tri
    return (
        euclid(points[i], points[j])
        * euclid(points[i], points[k])
        * euclid(points[j], points[k])
    )


def _default_anchors(
    points: tuple[Point2, ...], edges: set[Edge], count: int
) -> tuple[int, ...]:
    """Pick anchors by the max distance-product triangle, extended greedily.

    The base triple is the mutually adjacent triangle maximizing the product
    of its true pairwise distances (lexicographic tie-break); if the graph has
    no triangle, the best non-adjacent triple is used instead.  Additional
    anchors maximize the product of true distances to those already chosen.
    """
    n = len(points)
    adjacency: dict[int, set[int]] = {v: set() for v in range(n)}
    for i, j in edges:
        adjacency[i].add(j)
        adjacency[j].add(i)

    best: tuple[int, int, int] | None = None
    best_product = -1.0
    for i, j in sorted(edges):
        for k in sorted(adjacency[i] & adjacency[j]):
            if k <= j:
                continue
            product = _triangle_product(points, (i, j, k))
            if product > best_product:
                best, best_product = (i, j, k), product
    if best is None:
        # no triangle at all: fall back to the best unconstrained triple
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    product = _triangle_product(points, (i, j, k))
                    if product > best_product:
                        best, best_product = (i, j, k), product
    assert best is not None
    chosen = list(best)
    while len(chosen) < count:
        best_v, best_score = -1, -1.0
        for v in range(n):
            if v in chosen:
                continue
            score = 1.0
            for a in chosen:
                score *= euclid(points[v], points[a])
            if score > best_score:
                best_v, best_score = v, score
        chosen.append(best_v)
    return tuple(sorted(chosen[:count]))


def generate_scenario(
    n: int,
    area: tuple[float, float] = (100.0, 100.0),
    radius: float = 30.0,
    anchor_count: int = 3,
    noise: NoiseModel = NoiseModel(),
    seed: int = 0,
    anchors: Iterable[int] | None = None,
) -> Scenario:
    """Draw a random scenario: uniform positions, disk-graph edges, noisy ranges.

    Positions are uniform over the area rectangle; an edge joins every pair
    whose true distance is <= radius.  Anchor-anchor edges carry the true
    distance exactly; every other edge is corrupted by the noise model with
    one draw per edge in sorted edge order.  A disconnected graph is reported
    via ``Scenario.connected``, not an error.
    """
    if n < 3:
        raise ValueError("need at least 3 vertices")
    if not 3 <= anchor_count <= n:
        raise ValueError("anchor_count must satisfy 3 <= anchor_count <= n")
    if radius <= 0 or area[0] <= 0 or area[1] <= 0:
        raise ValueError("radius and area must be positive")

    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2)) * np.array(area, dtype=float)
    points = tuple(Point2(float(x), float(y)) for x, y in coords)

    edges: set[Edge] = set()
    for i in range(n):
        for j in range(i + 1, n):
            if euclid(points[i], points[j]) <= radius:
                edges.add((i, j))

    if anchors is not None:
        anchor_ids = tuple(sorted(set(int(a) for a in anchors)))
        if len(anchor_ids) != anchor_count:
            raise ValueError("explicit anchor list does not match anchor_count")
        for a in anchor_ids:
            if not 0 <= a < n:
                raise ValueError(f"anchor {a} out of range")
    else:
        anchor_ids = _default_anchors(points, edges, anchor_count)
    anchor_set = set(anchor_ids)

    measured: dict[Edge, float] = {}
    for i, j in sorted(edges):
        true_d = euclid(points[i], points[j])
        if i in anchor_set and j in anchor_set:
            measured[(i, j)] = true_d
        elif noise.kind == NONE:
            measured[(i, j)] = true_d
        else:
            measured[(i, j)] = apply_noise(true_d, noise, float(rng.standard_normal()))

    graph = RangeGraph(node_count=n, anchor_ids=anchor_ids, measured=measured)
    return Scenario(
        true_positions=points,
        graph=graph,
        area=(float(area[0]), float(area[1])),
        radius=float(radius),
        seed=int(seed),
        connected=graph.is_connected(),
        noise=noise,
    )


def ambiguous_region_check(
    candidate: Point2, vertex: int, embedded: EmbeddedGraph, bound: float
) -> bool:
    """True iff the candidate is within the error bound of every located neighbor.

    Checks |dist(candidate, p_j) - d_vj| <= bound for all located neighbors j
    of ``vertex``.  A vertex with no located neighbors is unconstrained and
    raises ValueError.
    """
    graph = embedded.graph
    located = [j for j in graph.neighbors(vertex) if j in embedded.locations]
    if not located:
        raise ValueError(f"unconstrained vertex {vertex}: no located neighbors")
    for j in located:
        if abs(euclid(candidate, embedded.locations[j]) - graph.distance(vertex, j)) > bound:
            return False
    return True


# --- serialization ---------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "n": scenario.graph.node_count,
        "area": [scenario.area[0], scenario.area[1]],
        "radius": scenario.radius,
        "seed": scenario.seed,
        "anchors": list(scenario.graph.anchor_ids),
        "positions": [[p.x, p.y] for p in scenario.true_positions],
        "edges": [
            {"i": i, "j": j, "measured": scenario.graph.measured[(i, j)]}
            for i, j in scenario.graph.sorted_edges
        ],
        "noise": {
            "kind": scenario.noise.kind,
            "scale": scenario.noise.scale,
            "bound": scenario.noise.bound,
        },
        "connected": scenario.connected,
    }


def scenario_from_dict(data: Mapping) -> Scenario:
    n = int(data["n"])
    points = tuple(Point2(float(x), float(y)) for x, y in data["positions"])
    if len(points) != n:
        raise ValueError("positions length does not match n")
    measured = {
        edge_key(int(e["i"]), int(e["j"])): float(e["measured"]) for e in data["edges"]
    }
    graph = RangeGraph(
        node_count=n,
        anchor_ids=tuple(int(a) for a in data["anchors"]),
        measured=measured,
    )
    noise_data = data.get("noise", {"kind": NONE, "scale": 0.0, "bound": None})
    noise = NoiseModel(
        kind=noise_data.get("kind", NONE),
        scale=float(noise_data.get("scale", 0.0)),
        bound=None if noise_data.get("bound") is None else float(noise_data["bound"]),
    )
    connected = bool(data.get("connected", graph.is_connected()))
    return Scenario(
        true_positions=points,
        graph=graph,
        area=(float(data["area"][0]), float(data["area"][1])),
        radius=float(data["radius"]),
        seed=int(data["seed"]),
        connected=connected,
        noise=noise,
    )


def dump_json(data: dict, path: str | Path) -> None:
    """Write a JSON document deterministically (sorted keys, trailing newline)."""
    Path(path).write_text(
        json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    dump_json(scenario_to_dict(scenario), path)


def load_scenario(path: str | Path) -> Scenario:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return scenario_from_dict(data)
