"""Tests for strip detection, mirror verification, and flip enumeration."""

import math
from itertools import combinations

import numpy as np
import pytest

from rangeloc.model import EmbeddedGraph, Point2, RangeGraph
from rangeloc.mirrors import (
    Band,
    detect_mirrors,
    enumerate_flip_candidates,
    find_min_dis,
    generate_bands,
    point_band_distance,
    reflect_across_mirror,
    reflect_point,
    report_to_dict,
)

from conftest import BOWTIE_HALF_WIDTH, bowtie, graph_from_points, measure


def brute_force_mirror_count(points, graph, half_width):
    """Independent mirror count: enumerate candidate subsets directly.

    Every distinct subset coverable by the width-2*half_width strip of some
    located vertex pair (first generating pair in ascending order keeps the
    axis) is checked for: both line sides non-empty, no edge joining the
    sides, and anchors on at most one side.
    """
    located = sorted(points)
    anchors = set(graph.anchor_ids)
    edges = list(graph.sorted_edges)
    subsets = {}
    for i in located:
        for j in located:
            if j <= i:
                continue
            ui, uj = points[i], points[j]
            dx, dy = uj.x - ui.x, uj.y - ui.y
            length = math.hypot(dx, dy)
            if length <= 1e-9:
                continue
            covered = frozenset(
                v
                for v in located
                if abs(dx * (points[v].y - ui.y) - dy * (points[v].x - ui.x)) / length
                <= half_width
            )
            if covered not in subsets:
                subsets[covered] = (i, j)
    count = 0
    for subset, (i, j) in subsets.items():
        ui, uj = points[i], points[j]
        dx, dy = uj.x - ui.x, uj.y - ui.y
        pos, neg = set(), set()
        for v in located:
            if v in subset:
                continue
            cross = dx * (points[v].y - ui.y) - dy * (points[v].x - ui.x)
            (pos if cross > 0 else neg).add(v)
        if not pos or not neg:
            continue
        if any((a in pos and b in neg) or (a in neg and b in pos) for a, b in edges):
            continue
        if anchors & pos and anchors & neg:
            continue
        count += 1
    return count


def random_embedding(seed):
    """Small random embedded graph drawn from one of three shape families."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 11))
    family = seed % 3
    if family == 0:
        coords = rng.uniform(0, 10, size=(n, 2))
    elif family == 1:
        xs = np.sort(rng.uniform(0, 12, size=n))
        ys = rng.uniform(-0.4, 0.4, size=n)
        coords = np.column_stack([xs, ys])
    else:
        half = n // 2
        left = rng.uniform(0, 4, size=(half, 2))
        right = rng.uniform(0, 4, size=(n - half, 2)) + np.array([8.0, 1.0])
        coords = np.vstack([left, right])
    points = {v: Point2(float(x), float(y)) for v, (x, y) in enumerate(coords)}
    radius = float(rng.uniform(3.0, 9.0))
    edges = [
        (i, j)
        for i, j in combinations(range(n), 2)
        if math.hypot(points[i].x - points[j].x, points[i].y - points[j].y) <= radius
    ]
    n_anchors = int(rng.integers(0, 4))
    anchors = tuple(sorted(rng.choice(n, size=min(n_anchors, n), replace=False).tolist()))
    graph = RangeGraph(node_count=n, anchor_ids=anchors, measured=measure(points, edges))
    return points, graph


def test_generate_bands_collinear_example():
    pts = {0: Point2(0, 0), 1: Point2(1, 0.05), 2: Point2(2, 0)}
    graph = graph_from_points(pts, [(0, 1), (0, 2), (1, 2)])
    bands = generate_bands(EmbeddedGraph(graph, pts), 0.15)
    assert len(bands) == 1
    assert bands[0].members == (0, 1, 2)
    assert bands[0].anchor_pair == (0, 1)
    with pytest.raises(ValueError):
        generate_bands(EmbeddedGraph(graph, pts), 0.0)


def test_generate_bands_spread_points_make_pair_bands():
    pts = {0: Point2(0, 0), 1: Point2(4, 0), 2: Point2(0, 3)}
    graph = graph_from_points(pts, [(0, 1), (0, 2), (1, 2)])
    bands = generate_bands(EmbeddedGraph(graph, pts), 0.1)
    assert len(bands) == 3
    assert sorted(b.anchor_pair for b in bands) == [(0, 1), (0, 2), (1, 2)]


def test_find_min_dis():
    pts = {0: Point2(0, 0), 1: Point2(4, 0), 2: Point2(0, 3)}
    graph = graph_from_points(pts, [(0, 1), (0, 2), (1, 2)])
    bands = generate_bands(EmbeddedGraph(graph, pts), 0.1)
    horizontal = next(b for b in bands if b.anchor_pair == (0, 1))
    band, dist = find_min_dis(Point2(2.0, 0.2), bands)
    assert band is horizontal
    assert dist == pytest.approx(0.2, abs=1e-12)
    none_band, inf_dist = find_min_dis(Point2(0, 0), [])
    assert none_band is None and math.isinf(inf_dist)


def test_find_min_dis_tie_prefers_lowest_index():
    a = Band(0, (0, 1), Point2(0, 0), Point2(1, 0), (0, 1), 0.5)
    b = Band(1, (2, 3), Point2(0, 2), Point2(1, 2), (2, 3), 0.5)
    band, dist = find_min_dis(Point2(0.5, 1.0), [b, a])
    assert band is a
    assert dist == pytest.approx(1.0, abs=1e-12)


def test_bowtie_has_exactly_one_mirror():
    graph, pts = bowtie()
    emb = EmbeddedGraph(graph, pts)
    report = detect_mirrors(emb, generate_bands(emb, BOWTIE_HALF_WIDTH))
    assert report.mirror_count == 1
    k = report.mirrors()[0]
    assert report.covered[k] == frozenset({2, 3})
    assert set(report.sides[k]) == {frozenset({0, 1}), frozenset({4, 5})}


def test_bowtie_anchors_on_one_side_keep_the_mirror():
    graph, pts = bowtie(anchors=(0, 1, 2))
    emb = EmbeddedGraph(graph, pts)
    report = detect_mirrors(emb, generate_bands(emb, BOWTIE_HALF_WIDTH))
    assert report.mirror_count == 1


def test_bowtie_anchors_on_both_sides_kill_the_mirror():
    for anchors in ((0, 4), (1, 5), (0, 1, 4)):
        graph, pts = bowtie(anchors=anchors)
        emb = EmbeddedGraph(graph, pts)
        report = detect_mirrors(emb, generate_bands(emb, BOWTIE_HALF_WIDTH))
        assert report.mirror_count == 0


def test_detect_mirrors_matches_brute_force_enumeration():
    for seed in range(60):
        points, graph = random_embedding(seed)
        half_width = 0.5
        emb = EmbeddedGraph(graph, points)
        report = detect_mirrors(emb, generate_bands(emb, half_width))
        expected = brute_force_mirror_count(points, graph, half_width)
        assert report.mirror_count == expected, f"seed {seed}"


def test_reflect_point_properties():
    u, w = Point2(0, 0), Point2(1, 0)
    p = Point2(0.3, 2.0)
    image = reflect_point(u, w, p)
    assert (image.x, image.y) == pytest.approx((0.3, -2.0), abs=1e-12)
    back = reflect_point(u, w, image)
    assert (back.x, back.y) == pytest.approx((p.x, p.y), abs=1e-12)
    on_line = reflect_point(u, w, Point2(0.7, 0.0))
    assert (on_line.x, on_line.y) == pytest.approx((0.7, 0.0), abs=1e-12)
    with pytest.raises(ValueError):
        reflect_point(u, u, p)


def test_reflect_across_mirror_preserves_strip_distances():
    graph, pts = bowtie()
    emb = EmbeddedGraph(graph, pts)
    report = detect_mirrors(emb, generate_bands(emb, BOWTIE_HALF_WIDTH))
    k = report.mirrors()[0]
    band = report.bands[k]
    side = next(s for s in report.sides[k] if 4 in s)
    flipped = reflect_across_mirror(emb, band, side)
    # strip vertices and the untouched side stay put
    for v in (0, 1, 2, 3):
        assert flipped[v] == pts[v]
    # all measured edges incident to the flipped side keep their lengths
    for (i, j), d in graph.measured.items():
        got = math.hypot(flipped[i].x - flipped[j].x, flipped[i].y - flipped[j].y)
        assert got == pytest.approx(d, abs=1e-9)
    # flipping twice restores the embedding
    twice = reflect_across_mirror(EmbeddedGraph(graph, flipped), band, side)
    for v in range(6):
        assert math.hypot(twice[v].x - pts[v].x, twice[v].y - pts[v].y) <= 1e-12


def test_reflect_across_mirror_errors():
    graph, pts = bowtie()
    emb = EmbeddedGraph(graph, pts)
    report = detect_mirrors(emb, generate_bands(emb, BOWTIE_HALF_WIDTH))
    band = report.bands[report.mirrors()[0]]
    with pytest.raises(ValueError):
        reflect_across_mirror(emb, band, (2, 4))  # 2 sits inside the strip
    with pytest.raises(ValueError):
        reflect_across_mirror(emb, band, (0, 4))  # spans both sides
    partial = EmbeddedGraph(graph, {v: pts[v] for v in range(5)})
    with pytest.raises(ValueError):
        reflect_across_mirror(partial, band, (4, 5))
    assert reflect_across_mirror(emb, band, ()) == pts


def test_enumerate_flip_candidates_on_bowtie():
    graph, pts = bowtie()
    emb = EmbeddedGraph(graph, pts)
    report = detect_mirrors(emb, generate_bands(emb, BOWTIE_HALF_WIDTH))
    candidates = enumerate_flip_candidates(emb, report)
    assert len(candidates) == 2
    assert candidates[0] == pts
    moved = [v for v in range(6) if candidates[1][v] != pts[v]]
    assert moved in ([0, 1], [4, 5])

    # pinning both sides leaves only the base embedding
    pinned = enumerate_flip_candidates(emb, report, pinned=(0, 4))
    assert pinned == [pts]
    assert enumerate_flip_candidates(emb, report, cap=1) == [pts]
    with pytest.raises(ValueError):
        enumerate_flip_candidates(emb, report, cap=0)


def test_enumerate_flip_candidates_respects_cap():
    # three stacked near-collinear rows make several independent mirrors
    rows = [0.0, 5.0, 10.0, 15.0]
    pts = {}
    for r, y in enumerate(rows):
        for c in range(3):
            pts[3 * r + c] = Point2(5.0 * c, y + (0.02 if c == 1 else 0.0))
    edges = []
    for r in range(len(rows)):
        base = 3 * r
        edges += [(base, base + 1), (base + 1, base + 2), (base, base + 2)]
        if r + 1 < len(rows):
            edges += [(base + c, base + 3 + c) for c in range(3)]
            edges += [(base, base + 4), (base + 1, base + 5)]
    graph = graph_from_points(pts, edges)
    emb = EmbeddedGraph(graph, pts)
    report = detect_mirrors(emb, generate_bands(emb, 0.1))
    assert report.mirror_count >= 2
    full = enumerate_flip_candidates(emb, report)
    assert len(full) <= 64
    capped = enumerate_flip_candidates(emb, report, cap=3)
    assert len(capped) == 3
    assert capped[0] == pts


def test_point_band_distance():
    band = Band(0, (0, 1), Point2(0, 0), Point2(2, 0), (0, 1), 0.5)
    assert point_band_distance(Point2(1, 0.3), band) == pytest.approx(0.3, abs=1e-12)
    assert point_band_distance(Point2(-4, -2), band) == pytest.approx(2.0, abs=1e-12)


def test_report_to_dict_schema():
    graph, pts = bowtie()
    emb = EmbeddedGraph(graph, pts)
    report = detect_mirrors(emb, generate_bands(emb, BOWTIE_HALF_WIDTH))
    data = report_to_dict(report)
    assert data["mirror_count"] == 1
    assert len(data["bands"]) == len(report.bands)
    flagged = [b for b in data["bands"] if b["is_mirror"]]
    assert len(flagged) == 1
    assert flagged[0]["covered"] == [2, 3]
    assert sorted(map(sorted, flagged[0]["sides"])) == [[0, 1], [4, 5]]
