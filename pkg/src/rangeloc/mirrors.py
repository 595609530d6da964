"""Flip-risk analysis on an embedding.

A realization of a graph from distances can be locally reflected across any
set of vertices that (a) lie within a thin strip around a common line and
(b) separate the rest of the graph into two groups with no edge between them.
This module finds such strips ("bands"), verifies which ones are genuine
mirrors, and enumerates the alternative realizations they imply.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

from .model import EmbeddedGraph, Point2, euclid

#: Two embedded vertices closer than this define no usable line.
COINCIDENT_TOL = 1e-9

#: Default ceiling on flip candidates per realization (2**6).
CANDIDATE_CAP = 64


@dataclass(frozen=True)
class Band:
    """A strip of half-width ``half_width`` around the line through two vertices.

    ``u``/``w`` snapshot the coordinates of the first two covered vertices at
    creation time; they define the center line for all later side tests.
    ``members`` lists covered vertices in insertion order.
    """

    index: int
    anchor_pair: tuple[int, int]
    u: Point2
    w: Point2
    members: tuple[int, ...]
    half_width: float


def line_side(u: Point2, w: Point2, p: Point2) -> int:
    """Sign of the cross product (w-u) x (p-u): +1 left, -1 right, 0 on line."""
    cross = (w.x - u.x) * (p.y - u.y) - (w.y - u.y) * (p.x - u.x)
    if cross > 0:
        return 1
    if cross < 0:
        return -1
    return 0


def point_line_side(band: Band, point: Point2) -> int:
    """Side of the band's center line the point falls on (+1, -1, or 0)."""
    return line_side(band.u, band.w, point)


def point_band_distance(point: Point2, band: Band) -> float:
    """Perpendicular distance from the point to the band's center line."""
    return _line_distance(band.u, band.w, point)


def _line_distance(u: Point2, w: Point2, p: Point2) -> float:
    dx, dy = w.x - u.x, w.y - u.y
    length = math.hypot(dx, dy)
    if length <= COINCIDENT_TOL:
        raise ValueError("degenerate line: coincident defining points")
    return abs(dx * (p.y - u.y) - dy * (p.x - u.x)) / length


def find_min_dis(point: Point2, candidate_bands: Iterable[Band]) -> tuple[Band | None, float]:
    """Nearest band to the point; ties go to the lowest band index.

    Returns (None, inf) when there are no candidates.
    """
    best: Band | None = None
    best_d = math.inf
    for band in sorted(candidate_bands, key=lambda b: b.index):
        d = point_band_distance(point, band)
        if d < best_d:
            best, best_d = band, d
    return best, best_d


def generate_bands(embedded: EmbeddedGraph, half_width: float) -> list[Band]:
    """Cover the embedded vertices with near-collinear bands.

    Vertex pairs are scanned in ascending (i, j) order.  If no band covering i
    lies within ``half_width`` of j, a new band is created with its center
    line through p_i and p_j; otherwise j joins the nearest such band.
    Pairs closer than COINCIDENT_TOL define no line and are skipped.
    """
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    locs = embedded.locations
    verts = sorted(locs)

    pairs: list[tuple[int, int]] = []
    lines: list[tuple[Point2, Point2]] = []
    member_lists: list[list[int]] = []
    member_sets: list[set[int]] = []
    covering: dict[int, list[int]] = {v: [] for v in verts}

    for a, i in enumerate(verts):
        for j in verts[a + 1:]:
            nearest, dist = -1, math.inf
            for k in covering[i]:
                d = _line_distance(lines[k][0], lines[k][1], locs[j])
                if d < dist:
                    nearest, dist = k, d
            if nearest < 0 or dist > half_width:
                if euclid(locs[i], locs[j]) <= COINCIDENT_TOL:
                    continue
                k = len(pairs)
                pairs.append((i, j))
                lines.append((locs[i], locs[j]))
                member_lists.append([i, j])
                member_sets.append({i, j})
                covering[i].append(k)
                covering[j].append(k)
            elif j not in member_sets[nearest]:
                member_lists[nearest].append(j)
                member_sets[nearest].add(j)
                covering[j].append(nearest)

    return [
        Band(
            index=k,
            anchor_pair=pairs[k],
            u=lines[k][0],
            w=lines[k][1],
            members=tuple(member_lists[k]),
            half_width=half_width,
        )
        for k in range(len(pairs))
    ]


@dataclass(frozen=True)
class MirrorReport:
    """Verification outcome for every distinct strip of an embedding.

    ``bands`` holds one entry per distinct covered vertex set, axis taken
    from the first vertex pair (ascending order) whose strip covers exactly
    that set; ``covered[k]`` is that set; ``sides[k]`` holds the (positive,
    negative) vertex groups when strip k is a mirror, else None.
    """

    bands: tuple[Band, ...]
    indicator: tuple[bool, ...]
    covered: tuple[frozenset[int], ...]
    sides: tuple[tuple[frozenset[int], frozenset[int]] | None, ...]

    @property
    def mirror_count(self) -> int:
        return sum(self.indicator)

    def mirrors(self) -> list[int]:
        """Indices of the bands verified as mirrors."""
        return [k for k, flag in enumerate(self.indicator) if flag]


def detect_mirrors(embedded: EmbeddedGraph, bands: Iterable[Band]) -> MirrorReport:
    """Verify which near-collinear strips are mirrors of the embedding.

    Candidate strips are the width-2c neighborhoods of the line through
    every located vertex pair, scanned in ascending pair order with strips
    covering an already-seen vertex set skipped, so the outcome is
    independent of band construction order.  The half-width c is taken from
    the supplied bands.  A strip is a mirror when, with its vertices
    removed, (1) both sides of its center line are non-empty, (2) no edge
    joins the two sides, and (3) at most one side contains an anchor.
    """
    graph = embedded.graph
    locs = embedded.locations
    located = sorted(locs)
    anchors = graph.anchor_set & set(located)
    located_edges = embedded.located_edges()

    band_list = list(bands)
    if not band_list:
        return MirrorReport(bands=(), indicator=(), covered=(), sides=())
    half_width = band_list[0].half_width

    strips: list[Band] = []
    indicator: list[bool] = []
    covered_sets: list[frozenset[int]] = []
    sides: list[tuple[frozenset[int], frozenset[int]] | None] = []
    seen: set[frozenset[int]] = set()

    for a, i in enumerate(located):
        for j in located[a + 1:]:
            u, w = locs[i], locs[j]
            if euclid(u, w) <= COINCIDENT_TOL:
                continue
            covered = frozenset(
                v for v in located if _line_distance(u, w, locs[v]) <= half_width
            )
            if covered in seen:
                continue
            seen.add(covered)
            strip = Band(
                index=len(strips),
                anchor_pair=(i, j),
                u=u,
                w=w,
                members=tuple(sorted(covered)),
                half_width=half_width,
            )

            pos: set[int] = set()
            neg: set[int] = set()
            for v in located:
                if v in covered:
                    continue
                side = point_line_side(strip, locs[v])
                if side > 0:
                    pos.add(v)
                else:  # outside the strip means strictly off the line
                    neg.add(v)

            ok = bool(pos) and bool(neg)
            if ok:
                for p, q in located_edges:
                    if (p in pos and q in neg) or (p in neg and q in pos):
                        ok = False
                        break
            if ok and anchors & pos and anchors & neg:
                ok = False

            strips.append(strip)
            indicator.append(ok)
            covered_sets.append(covered)
            sides.append((frozenset(pos), frozenset(neg)) if ok else None)

    return MirrorReport(
        bands=tuple(strips),
        indicator=tuple(indicator),
        covered=tuple(covered_sets),
        sides=tuple(sides),
    )


def reflect_point(u: Point2, w: Point2, p: Point2) -> Point2:
    """Reflect p across the line through u and w."""
    dx, dy = w.x - u.x, w.y - u.y
    norm_sq = dx * dx + dy * dy
    if norm_sq <= COINCIDENT_TOL * COINCIDENT_TOL:
        raise ValueError("degenerate line: coincident defining points")
    px, py = p.x - u.x, p.y - u.y
    t = (px * dx + py * dy) / norm_sq
    foot_x, foot_y = u.x + t * dx, u.y + t * dy
    return Point2(2.0 * foot_x - p.x, 2.0 * foot_y - p.y)


def reflect_across_mirror(
    embedded: EmbeddedGraph, mirror: Band, side: Iterable[int]
) -> dict[int, Point2]:
    """Reflect one side group across the mirror's center line.

    ``side`` must consist of located vertices strictly on a single side of the
    line and outside the strip; anything else raises ValueError.  Returns a
    full location map with only the side group moved.
    """
    locs = embedded.locations
    group = frozenset(side)
    result = dict(locs)
    if not group:
        return result
    signs = set()
    for v in group:
        if v not in locs:
            raise ValueError(f"side vertex {v} has no location")
        if point_band_distance(locs[v], mirror) <= mirror.half_width:
            raise ValueError(f"side vertex {v} lies within the band strip")
        signs.add(point_line_side(mirror, locs[v]))
    if len(signs) != 1:
        raise ValueError("side group spans both sides of the mirror line")
    for v in group:
        result[v] = reflect_point(mirror.u, mirror.w, locs[v])
    return result


def _flip_side(
    report_sides: tuple[frozenset[int], frozenset[int]],
    anchors: frozenset[int],
    pinned: frozenset[int],
) -> frozenset[int] | None:
    """Pick which side of a mirror to flip, or None if neither is allowed.

    Sides containing pinned vertices never move.  Among the allowed sides,
    prefer anchor-free ones, then the smaller, then the lexicographically
    smallest vertex list (the two choices differ only by a whole-graph
    reflection, which merging absorbs).
    """
    allowed = [s for s in report_sides if not (s & pinned)]
    if not allowed:
        return None
    return min(allowed, key=lambda s: (bool(s & anchors), len(s), sorted(s)))


def enumerate_flip_candidates(
    embedded: EmbeddedGraph,
    report: MirrorReport,
    pinned: Iterable[int] = (),
    cap: int = CANDIDATE_CAP,
) -> list[dict[int, Point2]]:
    """Alternative location maps implied by the verified mirrors.

    The base embedding comes first.  Every combination of single-mirror flips
    is enumerated while 2**m <= cap; beyond the cap only single-mirror flips
    are kept.  Pinned vertices (typically the seed triangle) are never moved,
    so all candidates agree on their coordinates.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    pinned_set = frozenset(pinned)
    anchors = embedded.graph.anchor_set & embedded.located()

    flippable: list[tuple[Band, frozenset[int]]] = []
    for k in report.mirrors():
        assert report.sides[k] is not None
        side = _flip_side(report.sides[k], anchors, pinned_set)
        if side:
            flippable.append((report.bands[k], side))

    base = dict(embedded.locations)
    candidates = [base]
    m = len(flippable)
    if 2**m <= cap:
        subsets: Iterable[tuple[tuple[Band, frozenset[int]], ...]] = itertools.chain.from_iterable(
            itertools.combinations(flippable, r) for r in range(1, m + 1)
        )
    else:
        subsets = ((item,) for item in flippable)

    for subset in subsets:
        if len(candidates) >= cap:
            break
        locs = dict(base)
        for band, side in subset:
            for v in side:
                locs[v] = reflect_point(band.u, band.w, locs[v])
        candidates.append(locs)
    return candidates


def report_to_dict(report: MirrorReport) -> dict:
    """JSON-ready summary of a mirror report."""
    bands = []
    for k, band in enumerate(report.bands):
        entry = {
            "index": band.index,
            "pair": list(band.anchor_pair),
            "members": list(band.members),
            "covered": sorted(report.covered[k]),
            "is_mirror": report.indicator[k],
            "sides": None,
        }
        if report.sides[k] is not None:
            pos, neg = report.sides[k]
            entry["sides"] = [sorted(pos), sorted(neg)]
        bands.append(entry)
    return {"mirror_count": report.mirror_count, "bands": bands}
