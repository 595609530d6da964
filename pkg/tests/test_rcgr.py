"""Tests for component seeding, growth, gated realization, and global merging."""

import math

import numpy as np
import pytest

from rangeloc.model import (
    MULTIPLICATIVE,
    NoiseModel,
    Point2,
    RangeGraph,
    euclid,
    generate_scenario,
)
from rangeloc.rcgr import (
    build_components,
    fit_rigid_map,
    grow_component,
    merge_components,
    rcgr,
    select_robust_triangle,
)
from rangeloc.realization import robust_realize

from conftest import bowtie, graph_from_points, measure


def test_select_robust_triangle_prefers_long_sides():
    # two triangles sharing an edge; the one with longer sides wins
    pts = {
        0: Point2(0, 0),
        1: Point2(10, 0),
        2: Point2(5, 8),
        3: Point2(5, -1),
    }
    graph = graph_from_points(pts, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])
    assert select_robust_triangle(range(4), graph) == (0, 1, 2)
    # restricting the pool forces the flat triangle
    assert select_robust_triangle([0, 1, 3], graph) == (0, 1, 3)
    assert select_robust_triangle([0, 2, 3], graph) is None


def test_select_robust_triangle_no_triangle():
    pts = {0: Point2(0, 0), 1: Point2(1, 0), 2: Point2(2, 0), 3: Point2(3, 0)}
    graph = graph_from_points(pts, [(0, 1), (1, 2), (2, 3)])
    assert select_robust_triangle(range(4), graph) is None


def test_grow_component_wheel_absorbed():
    hub = Point2(0, 0)
    rim = [Point2(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]
    pts = {0: hub, **{k + 1: p for k, p in enumerate(rim)}}
    edges = [(0, k + 1) for k in range(6)]
    edges += [(k + 1, (k + 1) % 6 + 1) for k in range(6)]
    graph = graph_from_points(pts, edges)
    members = grow_component({0, 1, 2}, range(7), graph)
    assert members == set(range(7))


def test_grow_component_pendant_never_absorbed():
    pts = {0: Point2(0, 0), 1: Point2(1, 0), 2: Point2(0, 1), 3: Point2(5, 5)}
    graph = graph_from_points(pts, [(0, 1), (0, 2), (1, 2), (2, 3)])
    members = grow_component({0, 1, 2}, range(4), graph)
    assert members == {0, 1, 2}


def test_grow_component_stops_at_single_bridge():
    # two triangles joined by one edge: growth never crosses the bridge
    pts = {
        0: Point2(0, 0), 1: Point2(1, 0), 2: Point2(0.5, 1),
        3: Point2(4, 0), 4: Point2(5, 0), 5: Point2(4.5, 1),
    }
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
    graph = graph_from_points(pts, edges)
    assert grow_component({0, 1, 2}, range(6), graph) == {0, 1, 2}


def test_grow_component_cascades():
    # 3 joins via {1, 2}; 4 joins only after 3 is in
    pts = {
        0: Point2(0, 0), 1: Point2(1, 0), 2: Point2(0.5, 1),
        3: Point2(1.5, 1), 4: Point2(2, 0),
    }
    edges = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)]
    graph = graph_from_points(pts, edges)
    assert grow_component({0, 1, 2}, range(5), graph) == {0, 1, 2, 3, 4}


def test_rcgr_partition_invariant():
    noise = NoiseModel(kind=MULTIPLICATIVE, scale=0.1)
    for seed in range(8):
        scen = generate_scenario(25, radius=30, anchor_count=3, noise=noise, seed=seed)
        bound = scen.noise.resolved_bound(scen.radius)
        comps = rcgr(scen.graph, kappa_threshold=4.0, noise_bound=bound)
        seen = set()
        for comp in comps:
            assert not (comp.members & seen), f"seed {seed}"
            seen |= comp.members
        assert seen <= set(range(25))


def test_rcgr_single_component_exact_on_rigid_graph():
    scen = generate_scenario(12, radius=45, anchor_count=3, seed=14)
    comps = rcgr(scen.graph, kappa_threshold=math.inf)
    assert len(comps) == 1
    assert comps[0].members == frozenset(range(12))
    assert len(comps[0].candidates) == 1
    assert comps[0].mirror_count == 0


def test_rcgr_noise_free_end_to_end():
    scen = generate_scenario(12, radius=45, anchor_count=3, seed=14)
    comps = rcgr(scen.graph, kappa_threshold=math.inf)
    anchor_coords = {a: scen.true_positions[a] for a in scen.graph.anchor_ids}
    solution = merge_components(comps, scen.graph, anchor_coords)
    assert solution.unmerged == ()
    for v in range(12):
        assert euclid(solution.locations[v], scen.true_positions[v]) <= 1e-6


def test_rcgr_gate_only_removes_within_a_run():
    # rerunning each gated component's inputs with the gate open realizes a
    # superset of what the gated run realized
    noise = NoiseModel(kind=MULTIPLICATIVE, scale=0.1)
    for seed in range(6):
        scen = generate_scenario(25, radius=30, anchor_count=3, noise=noise, seed=seed)
        bound = scen.noise.resolved_bound(scen.radius)
        comps = rcgr(scen.graph, kappa_threshold=4.0, noise_bound=bound)
        for comp in comps:
            starters = {v: comp.realized.locations[v] for v in comp.seed_triangle}
            grown = grow_component(comp.seed_triangle, comp.members, scen.graph)
            open_gate = robust_realize(
                sorted(grown), starters, scen.graph,
                kappa_threshold=math.inf, noise_bound=bound,
            )
            assert comp.members <= set(open_gate.members), f"seed {seed}"


def test_rcgr_is_deterministic():
    noise = NoiseModel(kind=MULTIPLICATIVE, scale=0.1)
    scen = generate_scenario(25, radius=30, anchor_count=3, noise=noise, seed=3)
    bound = scen.noise.resolved_bound(scen.radius)
    a = rcgr(scen.graph, kappa_threshold=4.0, noise_bound=bound)
    b = rcgr(scen.graph, kappa_threshold=4.0, noise_bound=bound)
    assert [c.members for c in a] == [c.members for c in b]
    assert [c.seed_triangle for c in a] == [c.seed_triangle for c in b]
    assert [len(c.candidates) for c in a] == [len(c.candidates) for c in b]


def test_bowtie_component_has_one_mirror_and_merges_correctly():
    graph, pts = bowtie(anchors=(0, 1, 2))
    comps = rcgr(graph, kappa_threshold=1e18, half_width=0.2)
    assert len(comps) == 1
    comp = comps[0]
    assert comp.members == frozenset(range(6))
    assert comp.mirror_count == 1
    assert len(comp.candidates) >= 2

    solution = merge_components(comps, graph, {a: pts[a] for a in (0, 1, 2)})
    for v in range(6):
        assert euclid(solution.locations[v], pts[v]) <= 1e-6


def test_merge_orthogonality_and_anchor_fixity():
    noise = NoiseModel(kind=MULTIPLICATIVE, scale=0.05)
    scen = generate_scenario(25, radius=32, anchor_count=3, noise=noise, seed=7)
    bound = scen.noise.resolved_bound(scen.radius)
    comps = rcgr(scen.graph, kappa_threshold=6.0, noise_bound=bound)
    anchor_coords = {a: scen.true_positions[a] for a in scen.graph.anchor_ids}
    solution = merge_components(comps, scen.graph, anchor_coords)
    for rot, _ in solution.transforms.values():
        assert np.allclose(rot.T @ rot, np.eye(2), atol=1e-10)
    for a, p in anchor_coords.items():
        assert solution.locations[a] == p


def test_merge_under_constrained_component_left_out():
    # cluster B hangs off cluster A by two single-vertex links: too few
    # constraints to place it, so it must be flagged rather than guessed
    pts = {
        0: Point2(0, 0), 1: Point2(4, 0), 2: Point2(2, 3), 3: Point2(2, -3),
        4: Point2(40, 0), 5: Point2(44, 0), 6: Point2(42, 3), 7: Point2(42, -3),
    }
    edges = [
        (0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3),
        (4, 5), (4, 6), (5, 6), (4, 7), (5, 7), (6, 7),
        (2, 6), (3, 7),
    ]
    graph = graph_from_points(pts, edges, anchors=(0, 1, 2))
    comps = rcgr(graph, kappa_threshold=1e18)
    by_members = {frozenset({0, 1, 2, 3}), frozenset({4, 5, 6, 7})}
    assert {c.members for c in comps} == by_members
    solution = merge_components(comps, graph, {a: pts[a] for a in (0, 1, 2)})
    far = next(c for c in comps if 4 in c.members)
    assert solution.unmerged == (far.id,)
    for v in (4, 5, 6, 7):
        assert v not in solution.locations
    for v in (0, 1, 2, 3):
        assert euclid(solution.locations[v], pts[v]) <= 1e-6


def test_merge_uses_inter_component_links():
    # cluster B has no anchors but three links into A: enough to place it
    # (link directions spread widely, so the lengths pin the pose uniquely)
    pts = {
        0: Point2(0, 0), 1: Point2(4, 0), 2: Point2(2, 3), 3: Point2(2, -3),
        4: Point2(12.880718959558534, -6.649277403421802),
        5: Point2(16.005371126956646, -6.256736178015854),
        6: Point2(14.12212463648377, -3.1305260421245698),
        7: Point2(14.222695064243597, -7.7331092431849715),
    }
    edges = [
        (0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3),
        (4, 5), (4, 6), (5, 6), (4, 7), (5, 7), (6, 7),
        (1, 4), (2, 6), (3, 7),
    ]
    graph = graph_from_points(pts, edges, anchors=(0, 1, 2))
    comps = rcgr(graph, kappa_threshold=1e18)
    assert {frozenset(c.members) for c in comps} == {
        frozenset({0, 1, 2, 3}), frozenset({4, 5, 6, 7})
    }
    solution = merge_components(comps, graph, {a: pts[a] for a in (0, 1, 2)})
    assert solution.unmerged == ()
    for v in range(8):
        assert euclid(solution.locations[v], pts[v]) <= 1e-6


def test_fit_rigid_map_recovers_known_transform():
    rng = np.random.default_rng(2)
    for reflect in (False, True):
        theta = 0.7
        rot = np.array([
            [math.cos(theta), -math.sin(theta)],
            [math.sin(theta), math.cos(theta)],
        ])
        if reflect:
            rot = rot @ np.diag([1.0, -1.0])
        t = np.array([5.0, -2.0])
        local = rng.uniform(0, 10, size=(5, 2))
        target = local @ rot.T + t
        pairs = [(local[k], target[k]) for k in range(5)]
        got_rot, got_t, cost = fit_rigid_map(pairs, [])
        assert cost <= 1e-12
        assert np.allclose(got_rot, rot, atol=1e-6)
        assert np.allclose(got_t, t, atol=1e-6)


def test_fit_rigid_map_link_only_constraints():
    rng = np.random.default_rng(8)
    theta = -1.1
    rot = np.array([
        [math.cos(theta), -math.sin(theta)],
        [math.sin(theta), math.cos(theta)],
    ])
    t = np.array([3.0, 8.0])
    local = rng.uniform(0, 6, size=(4, 2))
    placed = rng.uniform(10, 20, size=(4, 2))
    links = [
        (local[k], placed[k], float(np.linalg.norm(local[k] @ rot.T + t - placed[k])))
        for k in range(4)
    ]
    _, _, cost = fit_rigid_map([], links)
    assert cost <= 1e-10
    with pytest.raises(ValueError):
        fit_rigid_map([], [])


def test_build_components_index_order_baseline_structure():
    noise = NoiseModel(kind=MULTIPLICATIVE, scale=0.1)
    scen = generate_scenario(25, radius=30, anchor_count=3, noise=noise, seed=5)
    bound = scen.noise.resolved_bound(scen.radius)
    comps = call = build_components(
        scen.graph,
        kappa_threshold=math.inf,
        noise_bound=bound,
        order="index",
        enumerate_mirrors=False,
    )
    for comp in comps:
        assert len(comp.candidates) == 1
        assert comp.mirror_count == 0
        assert comp.realized.kappa == {}
    robust = rcgr(scen.graph, kappa_threshold=4.0, noise_bound=bound)
    # the ungated baseline realizes at least as many vertices per seed run
    call_total = sum(len(c.members) for c in call)
    robust_total = sum(len(c.members) for c in robust)
    assert call_total >= robust_total
