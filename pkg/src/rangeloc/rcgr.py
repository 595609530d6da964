"""Robust component generation and realization, plus global merging.

The pipeline repeatedly seeds a component with the most robust available
triangle (largest product of measured side lengths), grows it over vertices
with two or more edges into it, realizes it sequentially in a local frame
under a condition-number gate, and enumerates the flip alternatives implied
by its mirrors.  Components are then mapped into the global frame by fitting
orthogonal transforms to member anchors and inter-component edges, and the
merged estimate is polished by a joint least-squares pass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .mirrors import (
    CANDIDATE_CAP,
    MirrorReport,
    _flip_side,
    detect_mirrors,
    generate_bands,
    reflect_point,
)
from .model import EmbeddedGraph, Point2, RangeGraph, euclid
from .nls import levenberg_marquardt
from .realization import (
    BranchAxis,
    RealizedSet,
    init_local_frame,
    jointly_refine,
    reflect_branch,
    robust_realize,
)

#: Band half-widths below this are meaningless once coordinates carry
#: floating-point error.
MIN_HALF_WIDTH = 1e-6


@dataclass(frozen=True)
class Component:
    """One realized component in its local frame."""

    id: int
    members: frozenset[int]
    realized: RealizedSet
    candidates: tuple[dict[int, Point2], ...]
    seed_triangle: tuple[int, int, int]
    mirror_count: int


@dataclass(frozen=True)
class GlobalSolution:
    """Merged global estimate.

    ``locations`` covers anchors (calibrated exactly) and every member of a
    merged component; ``transforms`` maps component ids to the orthogonal
    matrix and translation taking local to global coordinates;
    ``candidate_choice`` records which flip candidate won; ``unmerged`` lists
    components left unplaced for lack of constraints.
    """

    locations: dict[int, Point2]
    transforms: dict[int, tuple[np.ndarray, np.ndarray]]
    candidate_choice: dict[int, int]
    residual: float
    unmerged: tuple[int, ...]


def _triangles_by_product(
    available: Iterable[int], graph: RangeGraph
) -> list[tuple[float, tuple[int, int, int]]]:
    verts = set(available)
    out: list[tuple[float, tuple[int, int, int]]] = []
    for i, j in graph.sorted_edges:
        if i not in verts or j not in verts:
            continue
        common = set(graph.neighbors(i)) & set(graph.neighbors(j)) & verts
        for k in sorted(common):
            if k <= j:
                continue
            product = (
                graph.distance(i, j) * graph.distance(i, k) * graph.distance(j, k)
            )
            out.append((product, (i, j, k)))
    out.sort(key=lambda item: (-item[0], item[1]))
    return out


def select_robust_triangle(
    available: Iterable[int], graph: RangeGraph
) -> tuple[int, int, int] | None:
    """Mutually adjacent triple maximizing the product of measured lengths.

    Ties break lexicographically; None means no triangle is available.
    """
    ranked = _triangles_by_product(available, graph)
    return ranked[0][1] if ranked else None


def grow_component(
    seed: Iterable[int], ungrouped: Iterable[int], graph: RangeGraph
) -> set[int]:
    """Extend a member set with every vertex having >= 2 edges into it.

    Sweeps candidate vertices in ascending index order until a fixed point.
    """
    members = set(seed)
    pool = set(ungrouped) - members
    changed = True
    while changed:
        changed = False
        for v in sorted(pool):
            links = sum(1 for u in graph.neighbors(v) if u in members)
            if links >= 2:
                members.add(v)
                pool.discard(v)
                changed = True
    return members


def _component_candidates(
    embedded: EmbeddedGraph,
    report: MirrorReport,
    axes: Sequence[BranchAxis],
    pinned: Iterable[int],
    cap: int,
) -> list[dict[int, Point2]]:
    """Alternative location maps from open branch axes and verified mirrors.

    Base embedding first.  Branch-axis flips are listed oldest first so nested
    reference lines stay consistent under composition; mirror flips reflect
    across the band-line snapshots.  Every combination is enumerated while
    2**m <= cap, single flips beyond that, never more than cap maps in total.
    """
    pinned_set = frozenset(pinned)
    anchors = embedded.graph.anchor_set & embedded.located()

    flips: list[tuple] = [
        ("axis", axis) for axis in axes if not pinned_set & set(axis.members)
    ]
    for k in report.mirrors():
        assert report.sides[k] is not None
        side = _flip_side(report.sides[k], anchors, pinned_set)
        if side:
            flips.append(("band", report.bands[k], side))

    base = dict(embedded.locations)
    candidates = [base]
    m = len(flips)
    if 2**m <= cap:
        subsets: Iterable[tuple] = itertools.chain.from_iterable(
            itertools.combinations(flips, r) for r in range(1, m + 1)
        )
    else:
        subsets = ((item,) for item in flips)

    for subset in subsets:
        locs = dict(base)
        for item in subset:
            if item[0] == "axis":
                locs = reflect_branch(locs, item[1])
            else:
                _, band, side = item
                for v in side:
                    locs[v] = reflect_point(band.u, band.w, locs[v])
        candidates.append(locs)
        if len(candidates) >= cap:
            break
    return candidates


def build_components(
    graph: RangeGraph,
    kappa_threshold: float = 4.0,
    noise_bound: float = 0.0,
    half_width: float | None = None,
    order: str = "kappa",
    enumerate_mirrors: bool = True,
    cap: int = CANDIDATE_CAP,
) -> list[Component]:
    """Shared component pipeline behind the robust and baseline algorithms."""
    if half_width is None:
        half_width = max(noise_bound, MIN_HALF_WIDTH)
    pool = set(range(graph.node_count))
    components: list[Component] = []

    while True:
        seed = None
        starters: dict[int, Point2] = {}
        for _, tri in _triangles_by_product(pool, graph):
            v1, v2, v3 = tri
            try:
                p1, p2, p3 = init_local_frame(
                    graph.distance(v1, v2),
                    graph.distance(v1, v3),
                    graph.distance(v2, v3),
                )
            except ValueError:
                continue  # measured lengths too degenerate for a frame
            seed = tri
            starters = {v1: p1, v2: p2, v3: p3}
            break
        if seed is None:
            break

        members = grow_component(seed, pool - set(seed), graph)
        realized = robust_realize(
            members, starters, graph, kappa_threshold, noise_bound, order=order
        )
        pool -= set(realized.members)

        embedded = EmbeddedGraph(graph, dict(realized.locations))
        if enumerate_mirrors:
            bands = generate_bands(embedded, half_width)
            report = detect_mirrors(embedded, bands)
            candidates = tuple(
                _component_candidates(
                    embedded, report, realized.branch_axes, pinned=seed, cap=cap
                )
            )
            mirror_count = report.mirror_count
        else:
            candidates = (dict(realized.locations),)
            mirror_count = 0

        components.append(
            Component(
                id=len(components),
                members=frozenset(realized.members),
                realized=realized,
                candidates=candidates,
                seed_triangle=seed,
                mirror_count=mirror_count,
            )
        )

    return components


def rcgr(
    graph: RangeGraph,
    kappa_threshold: float = 4.0,
    noise_bound: float = 0.0,
    half_width: float | None = None,
    cap: int = CANDIDATE_CAP,
) -> list[Component]:
    """Robust pipeline: condition-gated realization plus flip enumeration.

    ``half_width`` is the mirror band half-width and defaults to the noise
    bound (floored at MIN_HALF_WIDTH).  Every vertex appears in at most one
    component; vertices rejected by the gate stay available for later
    components.
    """
    return build_components(
        graph,
        kappa_threshold=kappa_threshold,
        noise_bound=noise_bound,
        half_width=half_width,
        order="kappa",
        enumerate_mirrors=True,
        cap=cap,
    )


# --- merging ----------------------------------------------------------------

def _rotation(theta: float, reflect: bool) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    if reflect:
        rot = rot @ np.diag([1.0, -1.0])
    return rot


def _procrustes_theta(local: np.ndarray, target: np.ndarray) -> float:
    lc = local - local.mean(axis=0)
    tc = target - target.mean(axis=0)
    num = float(np.sum(lc[:, 0] * tc[:, 1] - lc[:, 1] * tc[:, 0]))
    den = float(np.sum(lc[:, 0] * tc[:, 0] + lc[:, 1] * tc[:, 1]))
    return math.atan2(num, den)


def _fit_cost(
    rot: np.ndarray,
    t: np.ndarray,
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    links: Sequence[tuple[np.ndarray, np.ndarray, float]],
) -> float:
    cost = 0.0
    for local, target in pairs:
        cost += float(np.sum((rot @ local + t - target) ** 2))
    for local, placed, d in links:
        cost += (float(np.linalg.norm(rot @ local + t - placed)) - d) ** 2
    return cost


def _constraint_arrays(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    links: Sequence[tuple[np.ndarray, np.ndarray, float]],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    p_local = np.array([p[0] for p in pairs]) if pairs else np.zeros((0, 2))
    p_target = np.array([p[1] for p in pairs]) if pairs else np.zeros((0, 2))
    l_local = np.array([l[0] for l in links]) if links else np.zeros((0, 2))
    l_placed = np.array([l[1] for l in links]) if links else np.zeros((0, 2))
    l_dist = np.array([l[2] for l in links]) if links else np.zeros(0)
    return p_local, p_target, l_local, l_placed, l_dist


def fit_rigid_map(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    links: Sequence[tuple[np.ndarray, np.ndarray, float]],
    grid: int = 12,
    max_iter: int = 200,
    prune: int = 0,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Orthogonal transform (reflection allowed) fitting point pairs and links.

    ``pairs`` are (local, target) point matches; ``links`` are
    (local, placed, distance) edge constraints.  Returns (rotation,
    translation, cost).  Point-pair fits start from the closed-form
    orthogonal fit; link-only fits start from a ``grid``-point angle grid.
    A nonzero ``prune`` polishes only that many starts (the cheapest by
    initial cost); together with a lower ``max_iter`` this gives a fast fit
    whose cost is still good enough to rank alternatives.
    """
    if not pairs and not links:
        raise ValueError("no constraints to fit")

    starts: list[tuple[float, bool, np.ndarray]] = []
    if len(pairs) >= 2:
        local = np.array([p[0] for p in pairs])
        target = np.array([p[1] for p in pairs])
        for reflect in (False, True):
            loc = local @ np.diag([1.0, -1.0]).T if reflect else local
            theta = _procrustes_theta(loc, target)
            rot = _rotation(theta, reflect)
            t = target.mean(axis=0) - rot @ local.mean(axis=0)
            starts.append((theta, reflect, t))
    else:
        for reflect in (False, True):
            for theta in np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False):
                rot = _rotation(float(theta), reflect)
                if pairs:
                    local, target = pairs[0]
                    t = target - rot @ local
                else:
                    locs = np.array([l[0] for l in links])
                    anchors_over = np.array([l[1] for l in links])
                    t = anchors_over.mean(axis=0) - rot @ locs.mean(axis=0)
                starts.append((float(theta), reflect, t))

    arrays = _constraint_arrays(pairs, links)
    if prune and len(starts) > prune:
        probed = sorted(
            (_polish_transform(th, rf, t0, arrays, 0)[2], i)
            for i, (th, rf, t0) in enumerate(starts)
        )
        starts = [starts[i] for _, i in probed[:prune]]

    best: tuple[np.ndarray, np.ndarray, float] | None = None
    for theta0, reflect, t0 in starts:
        refined = _polish_transform(theta0, reflect, t0, arrays, max_iter)
        if best is None or refined[2] < best[2]:
            best = refined
    assert best is not None
    return best


def _polish_transform(
    theta0: float,
    reflect: bool,
    t0: np.ndarray,
    arrays: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray],
    max_iter: int = 200,
) -> tuple[np.ndarray, np.ndarray, float]:
    sign = -1.0 if reflect else 1.0
    p_local, p_target, l_local, l_placed, l_dist = arrays
    n_pair = p_local.shape[0]

    def fun(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        theta, tx, ty = x
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, -s * sign], [s, c * sign]])
        drot = np.array([[-s, -c * sign], [c, -s * sign]])
        t = np.array([tx, ty])
        residual = np.zeros(2 * n_pair + l_local.shape[0])
        jac = np.zeros((residual.size, 3))
        if n_pair:
            diff = p_local @ rot.T + t - p_target
            residual[: 2 * n_pair] = diff.ravel()
            jac[: 2 * n_pair, 0] = (p_local @ drot.T).ravel()
            jac[0 : 2 * n_pair : 2, 1] = 1.0
            jac[1 : 2 * n_pair : 2, 2] = 1.0
        if l_local.shape[0]:
            diff = l_local @ rot.T + t - l_placed
            norms = np.maximum(np.linalg.norm(diff, axis=1), 1e-12)
            residual[2 * n_pair :] = norms - l_dist
            grad = diff / norms[:, None]
            jac[2 * n_pair :, 0] = np.einsum("ij,ij->i", grad, l_local @ drot.T)
            jac[2 * n_pair :, 1] = grad[:, 0]
            jac[2 * n_pair :, 2] = grad[:, 1]
        return residual, jac

    result = levenberg_marquardt(
        fun, np.array([theta0, t0[0], t0[1]]), gtol=1e-12, max_iter=max_iter
    )
    theta, tx, ty = result.x
    rot = _rotation(float(theta), reflect)
    return rot, np.array([tx, ty]), result.cost


def merge_components(
    components: Sequence[Component],
    graph: RangeGraph,
    anchor_coords: Mapping[int, Point2],
    refine: bool = True,
) -> GlobalSolution:
    """Place components in the global frame and jointly refine the result.

    Components are merged greedily (most member anchors first, then most
    edges into the already placed set); each one tries every flip candidate
    and keeps the transform with the smallest constraint residual.  Because a
    candidate choice made early can only be contradicted by components placed
    later, a re-selection sweep then revisits every choice under the full
    assembly cost and adopts strict improvements.  A component with at most
    one member anchor and fewer than three edges into the placed set is
    under-constrained and left unmerged.
    """
    placed: dict[int, Point2] = {a: p for a, p in anchor_coords.items()}
    transforms: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    candidate_choice: dict[int, int] = {}
    chosen_locations: dict[int, Point2] = {}
    placement_order: list[Component] = []
    remaining = list(components)
    unmerged: list[int] = []

    def member_anchor_count(comp: Component) -> int:
        return sum(1 for v in comp.members if v in anchor_coords)

    def link_count(comp: Component) -> int:
        count = 0
        for i, j in graph.sorted_edges:
            if i in comp.members and j not in comp.members and j in placed:
                count += 1
            elif j in comp.members and i not in comp.members and i in placed:
                count += 1
        return count

    while remaining:
        scored = sorted(
            remaining,
            key=lambda c: (-member_anchor_count(c), -link_count(c), c.id),
        )
        merged_one = False
        for comp in scored:
            n_anchors = member_anchor_count(comp)
            n_links = link_count(comp)
            if n_anchors < 2 and n_links < 3:
                continue

            pairs_idx = [v for v in sorted(comp.members) if v in anchor_coords]
            links_idx = []
            for i, j in graph.sorted_edges:
                if i in comp.members and j not in comp.members and j in placed:
                    links_idx.append((i, j))
                elif j in comp.members and i not in comp.members and i in placed:
                    links_idx.append((j, i))

            best = None
            for c_idx, cand in enumerate(comp.candidates):
                pairs = [
                    (cand[v].as_array(), anchor_coords[v].as_array())
                    for v in pairs_idx
                ]
                links = [
                    (cand[v].as_array(), placed[u].as_array(), graph.distance(v, u))
                    for v, u in links_idx
                ]
                cost = fit_rigid_map(pairs, links, grid=8, max_iter=40, prune=4)[2]
                if best is None or cost < best[0]:
                    best = (cost, c_idx, pairs, links, cand)
            assert best is not None
            _, c_idx, pairs, links, cand = best
            rot, t, _ = fit_rigid_map(pairs, links)
            transforms[comp.id] = (rot, t)
            candidate_choice[comp.id] = c_idx
            for v in comp.members:
                if v in anchor_coords:
                    placed[v] = anchor_coords[v]
                    chosen_locations[v] = anchor_coords[v]
                else:
                    moved = rot @ cand[v].as_array() + t
                    point = Point2(float(moved[0]), float(moved[1]))
                    placed[v] = point
                    chosen_locations[v] = point
            placement_order.append(comp)
            remaining.remove(comp)
            merged_one = True
            break
        if not merged_one:
            unmerged = sorted(c.id for c in remaining)
            break

    def assemble(
        assignment: Mapping[int, int],
        coarse: bool = False,
    ) -> tuple[dict[int, tuple[np.ndarray, np.ndarray]], dict[int, Point2], float]:
        body: dict[int, Point2] = {a: p for a, p in anchor_coords.items()}
        fits: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        total = 0.0
        for comp in placement_order:
            cand = comp.candidates[assignment[comp.id]]
            pairs = [
                (cand[v].as_array(), anchor_coords[v].as_array())
                for v in sorted(comp.members)
                if v in anchor_coords
            ]
            links = []
            for i, j in graph.sorted_edges:
                if i in comp.members and j not in comp.members and j in body:
                    links.append(
                        (cand[i].as_array(), body[j].as_array(), graph.distance(i, j))
                    )
                elif j in comp.members and i not in comp.members and i in body:
                    links.append(
                        (cand[j].as_array(), body[i].as_array(), graph.distance(i, j))
                    )
            if coarse:
                rot, t, cost = fit_rigid_map(pairs, links, grid=8, max_iter=40, prune=4)
            else:
                rot, t, cost = fit_rigid_map(pairs, links)
            fits[comp.id] = (rot, t)
            total += cost
            for v in comp.members:
                if v in anchor_coords:
                    body[v] = anchor_coords[v]
                else:
                    moved = rot @ cand[v].as_array() + t
                    body[v] = Point2(float(moved[0]), float(moved[1]))
        return fits, body, total

    if len(placement_order) > 1 and any(
        len(c.candidates) > 1 for c in placement_order
    ):
        assignment = dict(candidate_choice)
        current_cost = assemble(assignment, coarse=True)[2]
        for _ in range(2):
            changed = False
            for comp in placement_order:
                if len(comp.candidates) < 2:
                    continue
                for idx in range(len(comp.candidates)):
                    if idx == assignment[comp.id]:
                        continue
                    trial = dict(assignment)
                    trial[comp.id] = idx
                    t_cost = assemble(trial, coarse=True)[2]
                    if t_cost < current_cost - 1e-12:
                        assignment = trial
                        current_cost = t_cost
                        changed = True
            if not changed:
                break
        candidate_choice = assignment
        transforms, placed, _ = assemble(assignment)
        chosen_locations = {
            v: placed[v]
            for comp in placement_order
            for v in comp.members
        }

    locations = dict(placed)
    if refine and chosen_locations:
        locations, _ = jointly_refine(
            graph, locations, fixed=sorted(anchor_coords), gtol=1e-10, max_iter=500
        )
        for a, p in anchor_coords.items():
            locations[a] = p

    residual_terms = [
        (euclid(locations[i], locations[j]) - d) ** 2
        for (i, j), d in graph.measured.items()
        if i in locations and j in locations
    ]
    residual = math.sqrt(sum(residual_terms) / len(residual_terms)) if residual_terms else 0.0

    return GlobalSolution(
        locations=locations,
        transforms=transforms,
        candidate_choice=candidate_choice,
        residual=residual,
        unmerged=tuple(unmerged),
    )
