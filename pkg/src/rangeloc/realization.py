"""Sequential realization of graph components from range measurements.

Starting from a realized seed (a local triangle frame or calibrated anchors),
unrealized vertices with at least two realized neighbors are placed one at a
time by circle intersection (two references) or least-squares trilateration
(three or more).  The robust variant orders additions by the condition number
of the growing structure and refuses any addition above a threshold.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .mirrors import reflect_point
from .model import EmbeddedGraph, Point2, RangeGraph, ambiguous_region_check, euclid
from .nls import levenberg_marquardt
from .sensitivity import node_condition_number

#: Reference points closer than this cannot support bilateration.
COINCIDENT_TOL = 1e-9

#: Absolute slack (meters) added to feasibility checks for floating-point headroom.
FEASIBILITY_SLACK = 1e-6

#: Perpendicular spread below this fraction of the span counts as collinear.
COLLINEAR_FRACTION = 1e-9

#: Ceiling on branch assignments explored before settling for best coverage.
BRANCH_SEARCH_CAP = 64


@dataclass(frozen=True)
class LocalFrame:
    """Coordinate frame pinned to a seed triangle.

    The origin vertex sits at (0, 0), the axis vertex on the positive x-axis,
    and the plane vertex in the upper half-plane.
    """

    origin_vertex: int
    axis_vertex: int
    plane_vertex: int
    coordinates: dict[int, Point2]


@dataclass(frozen=True)
class BranchAxis:
    """An unresolved two-reference placement and everything built on it.

    A vertex placed from exactly two references has a twin position mirrored
    across the reference line; until some later measurement ties the choice
    down, the vertex (``root``) and every member subsequently placed through
    it can be reflected across the line through ``refs`` as a block without
    disturbing any realized edge length.
    """

    root: int
    refs: tuple[int, int]
    members: tuple[int, ...]


@dataclass(frozen=True)
class RealizedSet:
    """Outcome of one sequential realization.

    ``members`` lists vertices in realization order (starters first);
    ``kappa`` maps each non-starter member to the condition number recorded
    when it was realized (empty when the gate was not evaluated);
    ``branch_axes`` lists two-reference placements whose mirror twin remained
    consistent with every measurement seen, oldest first.
    """

    members: tuple[int, ...]
    locations: dict[int, Point2]
    kappa: dict[int, float]
    branch_axes: tuple[BranchAxis, ...] = ()


def init_local_frame(d12: float, d13: float, d23: float) -> tuple[Point2, Point2, Point2]:
    """Place a triangle with the given side lengths in its own frame.

    Returns coordinates p1=(0,0), p2=(d12,0), p3=(x,y) with y > 0.  The side
    lengths must satisfy the strict triangle inequality.
    """
    if min(d12, d13, d23) <= 0:
        raise ValueError("degenerate seed triangle: non-positive side length")
    if not (d12 < d13 + d23 and d13 < d12 + d23 and d23 < d12 + d13):
        raise ValueError("degenerate seed triangle: triangle inequality violated")
    x3 = (d12 * d12 + d13 * d13 - d23 * d23) / (2.0 * d12)
    y3_sq = d13 * d13 - x3 * x3
    if y3_sq <= 0:
        raise ValueError("degenerate seed triangle: collinear side lengths")
    return Point2(0.0, 0.0), Point2(d12, 0.0), Point2(x3, math.sqrt(y3_sq))


def bilaterate(
    ref1: Point2,
    ref2: Point2,
    d1: float,
    d2: float,
    noise_bound: float = 0.0,
) -> list[Point2]:
    """Intersect two circles around the reference points.

    Returns two mirror candidates ordered by side sign against the reference
    line (positive first), a single point at tangency, or an empty list when
    the circles are farther apart than twice the noise bound allows.  Within
    that allowance the gap is split evenly and the tangent point returned.
    """
    span = euclid(ref1, ref2)
    if span <= COINCIDENT_TOL:
        raise ValueError("coincident reference points")
    if d1 <= 0 or d2 <= 0:
        raise ValueError("distances must be positive")
    ux, uy = (ref2.x - ref1.x) / span, (ref2.y - ref1.y) / span

    if span > d1 + d2:  # circles apart
        gap = span - (d1 + d2)
        if gap > 2.0 * noise_bound:
            return []
        t = d1 + gap / 2.0
        return [Point2(ref1.x + t * ux, ref1.y + t * uy)]

    if span < abs(d1 - d2):  # one circle inside the other
        gap = abs(d1 - d2) - span
        if gap > 2.0 * noise_bound:
            return []
        if d1 >= d2:
            t = d1 - gap / 2.0
            return [Point2(ref1.x + t * ux, ref1.y + t * uy)]
        t = d2 - gap / 2.0
        return [Point2(ref2.x - t * ux, ref2.y - t * uy)]

    along = (d1 * d1 - d2 * d2 + span * span) / (2.0 * span)
    h_sq = d1 * d1 - along * along
    h = math.sqrt(max(h_sq, 0.0))
    base = Point2(ref1.x + along * ux, ref1.y + along * uy)
    if h <= COINCIDENT_TOL * max(1.0, span):
        return [base]
    # (-uy, ux) is the positive side of the directed reference line
    return [
        Point2(base.x - h * uy, base.y + h * ux),
        Point2(base.x + h * uy, base.y - h * ux),
    ]


def _references_collinear(refs: Sequence[Point2]) -> bool:
    (i, j), span = _farthest_pair(refs)
    if span <= COINCIDENT_TOL:
        return True
    a, b = refs[i], refs[j]
    dx, dy = b.x - a.x, b.y - a.y
    tol = max(span * COLLINEAR_FRACTION, COINCIDENT_TOL)
    return all(
        abs(dx * (p.y - a.y) - dy * (p.x - a.x)) / span <= tol for p in refs
    )


def _farthest_pair(refs: Sequence[Point2]) -> tuple[tuple[int, int], float]:
    best, best_d = (0, 1), -1.0
    for i in range(len(refs)):
        for j in range(i + 1, len(refs)):
            d = euclid(refs[i], refs[j])
            if d > best_d:
                best, best_d = (i, j), d
    return best, best_d


def _residual_sq(p: Point2, refs: Sequence[Point2], dists: Sequence[float]) -> float:
    return sum((euclid(p, r) - d) ** 2 for r, d in zip(refs, dists))


def _bilaterate_permissive(ref1: Point2, ref2: Point2, d1: float, d2: float) -> list[Point2]:
    """Bilateration that always yields at least one point (gap-snapped)."""
    return bilaterate(ref1, ref2, d1, d2, noise_bound=math.inf)


def trilaterate(
    refs: Sequence[Point2],
    dists: Sequence[float],
    gtol: float = 1e-10,
    max_iter: int = 100,
) -> Point2:
    """Least-squares position from three or more reference distances.

    The fit starts from the best bilateration candidate of the farthest
    reference pair and runs damped Gauss-Newton until the gradient norm falls
    below ``gtol`` or ``max_iter`` iterations pass.  Collinear references
    leave a mirror ambiguity; one of the two solutions is returned with a
    warning.
    """
    if len(refs) < 3:
        raise ValueError("trilateration needs at least 3 references")
    if len(refs) != len(dists):
        raise ValueError("refs and dists length mismatch")

    if _references_collinear(refs):
        warnings.warn(
            "collinear references: returning one of two mirror solutions",
            stacklevel=2,
        )
        candidates = _collinear_candidates(refs, dists)
        return min(candidates, key=lambda p: _residual_sq(p, refs, dists))

    (i, j), _ = _farthest_pair(refs)
    seeds = _bilaterate_permissive(refs[i], refs[j], dists[i], dists[j])
    x0 = min(seeds, key=lambda p: _residual_sq(p, refs, dists)).as_array()

    ref_arr = np.array([[r.x, r.y] for r in refs], dtype=float)
    d_arr = np.asarray(dists, dtype=float)

    def fun(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        diff = x[None, :] - ref_arr
        norms = np.linalg.norm(diff, axis=1)
        safe = np.maximum(norms, 1e-12)
        residual = norms - d_arr
        jac = diff / safe[:, None]
        return residual, jac

    result = levenberg_marquardt(fun, x0, gtol=gtol, max_iter=max_iter)
    return Point2(float(result.x[0]), float(result.x[1]))


def _collinear_candidates(refs: Sequence[Point2], dists: Sequence[float]) -> list[Point2]:
    (i, j), _ = _farthest_pair(refs)
    return _bilaterate_permissive(refs[i], refs[j], dists[i], dists[j])


def locate_from_references(
    vertex: int,
    realized: Mapping[int, Point2],
    graph: RangeGraph,
    noise_bound: float = 0.0,
    feasibility: bool = True,
) -> list[Point2]:
    """Candidate locations for a vertex from its realized neighbors.

    Exactly two references give both bilateration candidates; three or more
    give the trilateration fit, except that collinear references fall back to
    the farthest-pair mirror candidates.  With ``feasibility`` enabled,
    candidates outside the noise bound (plus floating-point slack) of any
    realized neighbor are dropped.
    """
    nbrs = [u for u in graph.neighbors(vertex) if u in realized]
    if len(nbrs) < 2:
        return []
    refs = [realized[u] for u in nbrs]
    dists = [graph.distance(vertex, u) for u in nbrs]

    try:
        if len(nbrs) == 2:
            candidates = bilaterate(refs[0], refs[1], dists[0], dists[1], noise_bound)
        elif _references_collinear(refs):
            candidates = _collinear_candidates(refs, dists)
        else:
            candidates = [trilaterate(refs, dists)]
    except ValueError:
        return []

    if not feasibility:
        return candidates
    tolerance = noise_bound + FEASIBILITY_SLACK
    embedded = EmbeddedGraph(graph, dict(realized))
    return [
        c for c in candidates if ambiguous_region_check(c, vertex, embedded, tolerance)
    ]


def reflect_branch(
    locations: Mapping[int, Point2], axis: BranchAxis
) -> dict[int, Point2]:
    """Location map with a branch reflected across its reference line.

    The line runs through the current locations of the axis references, so
    applying nested axes oldest-first keeps inner reference lines consistent
    with outer reflections.
    """
    work = dict(locations)
    u, w = work[axis.refs[0]], work[axis.refs[1]]
    for v in axis.members:
        if v in work:
            work[v] = reflect_point(u, w, work[v])
    return work


def _update_axes(
    axes: list[dict],
    vertex: int,
    refs: Sequence[int],
    location: Point2,
    twin: Point2 | None,
) -> None:
    """Maintain rigidly flippable branch blocks after placing ``vertex``.

    References wholly inside a block pull the new vertex into it: its position
    rides along with any later reflection.  A placement whose references span
    an axis boundary closes that axis — with three or more references the
    feasibility check has pinned the branch down, and with two the new vertex
    hangs between the block and the outside so the block is no longer a rigid
    unit (the decision search, not a rigid flip, owns that ambiguity).  A
    fresh two-reference placement with a genuinely distinct mirror twin opens
    a new axis.
    """
    ref_set = set(refs)
    survivors = []
    for axis in axes:
        inside = ref_set & axis["members"]
        outside = ref_set - axis["members"] - set(axis["refs"])
        if inside and outside:
            continue
        if inside:
            axis["members"].add(vertex)
        survivors.append(axis)
    axes[:] = survivors
    if len(refs) == 2 and twin is not None and euclid(location, twin) > COINCIDENT_TOL:
        axes.append(
            {
                "root": vertex,
                "refs": (min(refs), max(refs)),
                "members": {vertex},
            }
        )


def _realize_pass(
    members: set[int],
    starters: Mapping[int, Point2],
    graph: RangeGraph,
    kappa_threshold: float,
    noise_bound: float,
    frame: tuple[int, ...],
    forced: Sequence[int],
) -> dict:
    """One deterministic realization sweep under a forced branch prefix.

    ``forced`` holds the candidate index for the first placements that
    offered two feasible candidates; placements beyond the prefix take the
    first candidate.  Returns the full sweep state: the branch bits actually
    consumed, whether the sweep ended stuck (frontier nonempty but every
    candidate infeasible — the embedding contradicts a measurement), and the
    culprit bit indices the stuck vertices' reference positions depend on.
    """
    realized: dict[int, Point2] = dict(starters)
    sequence: list[int] = sorted(starters)
    kappa: dict[int, float] = {}
    axes: list[dict] = []
    bits: list[int] = []
    depends: dict[int, frozenset[int]] = {v: frozenset() for v in starters}
    stuck = False
    culprits: set[int] = set()

    while True:
        frontier = [
            v
            for v in members
            if v not in realized
            and sum(1 for u in graph.neighbors(v) if u in realized) >= 2
        ]
        if not frontier:
            break

        well_referenced = [
            v
            for v in frontier
            if sum(1 for u in graph.neighbors(v) if u in realized) >= 3
        ]
        active = well_referenced if well_referenced else frontier

        best_v, best_kappa, best_cands = -1, math.inf, None
        for v in sorted(active):
            candidates = locate_from_references(v, realized, graph, noise_bound)
            if not candidates:
                continue
            tentative = dict(realized)
            tentative[v] = candidates[0]
            score = node_condition_number(graph, tentative, frame, v)
            if score < best_kappa:
                best_v, best_kappa, best_cands = v, score, candidates
        if best_cands is None:
            stuck = True
            for v in active:
                for u in graph.neighbors(v):
                    if u in realized:
                        culprits |= depends[u]
            break
        if best_kappa > kappa_threshold or math.isinf(best_kappa):
            break

        # Mirror twins share every singular value (reflection is an isometry
        # of the reference constellation), so the score above is choice-free.
        choice = 0
        twin = None
        refs = [u for u in graph.neighbors(best_v) if u in realized]
        dep = frozenset().union(*(depends[r] for r in refs))
        if len(best_cands) == 2:
            choice = forced[len(bits)] if len(bits) < len(forced) else 0
            dep |= {len(bits)}
            bits.append(choice)
            twin = best_cands[1 - choice]
        _update_axes(axes, best_v, refs, best_cands[choice], twin)
        realized[best_v] = best_cands[choice]
        depends[best_v] = dep
        sequence.append(best_v)
        kappa[best_v] = best_kappa

    return {
        "realized": realized,
        "sequence": sequence,
        "kappa": kappa,
        "axes": axes,
        "bits": bits,
        "stuck": stuck,
        "culprits": tuple(sorted(culprits)),
    }


def robust_realize(
    component: Sequence[int],
    starters: Mapping[int, Point2],
    graph: RangeGraph,
    kappa_threshold: float = 4.0,
    noise_bound: float = 0.0,
    order: str = "kappa",
) -> RealizedSet:
    """Sequentially realize a component from realized starters.

    With ``order="kappa"`` each step evaluates every candidate (vertices with
    >= 3 realized neighbors, falling back to exactly 2 only when none exist),
    scores it by the condition number of the realized structure including its
    tentative location, and realizes the smallest score; realization stops
    when the smallest score exceeds ``kappa_threshold``.  Every placement
    with two feasible candidates is a recorded branch decision: if a later
    vertex contradicts every candidate position, realization replays with
    some of the decisions its references depend on flipped (fewest flips
    first, capped) and keeps the first contradiction-free sweep, falling back
    to the widest coverage seen.  Branches no later measurement could pin
    down are reported as ``branch_axes`` for downstream flip-candidate
    enumeration.  With ``order="index"`` the lowest-index candidate is
    realized immediately and no gate, feasibility filter, or branch tracking
    is applied (the naive baseline behavior).
    """
    if order not in ("kappa", "index"):
        raise ValueError(f"unknown order {order!r}")
    if len(starters) < 2:
        raise ValueError("need at least 2 realized starters")
    if not kappa_threshold > 1.0:
        raise ValueError("kappa threshold must exceed 1")

    members = set(component) | set(starters)
    frame = tuple(sorted(starters))

    if order == "index":
        realized: dict[int, Point2] = dict(starters)
        sequence: list[int] = sorted(starters)
        while True:
            frontier = [
                v
                for v in members
                if v not in realized
                and sum(1 for u in graph.neighbors(v) if u in realized) >= 2
            ]
            placed = False
            for v in sorted(frontier):
                candidates = locate_from_references(
                    v, realized, graph, noise_bound, feasibility=False
                )
                if candidates:
                    realized[v] = candidates[0]
                    sequence.append(v)
                    placed = True
                    break
            if not placed:
                break
        return RealizedSet(
            members=tuple(sequence), locations=realized, kappa={}, branch_axes=()
        )

    queue: list[tuple[int, ...]] = [()]
    seen: set[tuple[int, ...]] = {()}
    best: dict | None = None
    passes = 0
    while queue and passes < BRANCH_SEARCH_CAP:
        forced = queue.pop(0)
        state = _realize_pass(
            members, starters, graph, kappa_threshold, noise_bound, frame, forced
        )
        passes += 1
        if not state["stuck"]:
            best = state
            break
        if best is None or len(state["sequence"]) > len(best["sequence"]):
            best = state
        bits = state["bits"]
        for size in (1, 2, 3):
            for combo in itertools.combinations(state["culprits"], size):
                child = list(bits)
                for b in combo:
                    child[b] ^= 1
                key = tuple(child)
                if key not in seen:
                    seen.add(key)
                    queue.append(key)
    assert best is not None

    open_axes = tuple(
        BranchAxis(root=a["root"], refs=a["refs"], members=tuple(sorted(a["members"])))
        for a in best["axes"]
    )
    return RealizedSet(
        members=tuple(best["sequence"]),
        locations=best["realized"],
        kappa=best["kappa"],
        branch_axes=open_axes,
    )


def jointly_refine(
    graph: RangeGraph,
    locations: Mapping[int, Point2],
    fixed: Sequence[int],
    gtol: float = 1e-10,
    max_iter: int = 500,
) -> tuple[dict[int, Point2], "object"]:
    """Refine located vertices against every located edge, holding ``fixed`` still.

    Returns the refined location map and the solver result (whose cost trace
    is non-increasing over accepted steps).  Vertices absent from
    ``locations`` are left untouched; fixed vertices keep their coordinates
    exactly.
    """
    fixed_set = set(fixed)
    free = sorted(v for v in locations if v not in fixed_set)
    if not free:
        return dict(locations), None
    col = {v: (2 * k, 2 * k + 1) for k, v in enumerate(free)}
    anchored = {v: locations[v].as_array() for v in locations if v in fixed_set}

    edges = [
        (i, j, graph.measured[(i, j)])
        for i, j in graph.sorted_edges
        if i in locations and j in locations and not (i in fixed_set and j in fixed_set)
    ]
    if not edges:
        return dict(locations), None

    x0 = np.concatenate([locations[v].as_array() for v in free])

    def fun(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        residual = np.zeros(len(edges))
        jac = np.zeros((len(edges), len(x)))
        for r, (i, j, d) in enumerate(edges):
            pi = x[list(col[i])] if i in col else anchored[i]
            pj = x[list(col[j])] if j in col else anchored[j]
            diff = pi - pj
            norm = max(float(np.linalg.norm(diff)), 1e-12)
            residual[r] = norm - d
            grad = diff / norm
            if i in col:
                jac[r, col[i][0]] = grad[0]
                jac[r, col[i][1]] = grad[1]
            if j in col:
                jac[r, col[j][0]] = -grad[0]
                jac[r, col[j][1]] = -grad[1]
        return residual, jac

    result = levenberg_marquardt(fun, x0, gtol=gtol, max_iter=max_iter)
    refined = dict(locations)
    for v in free:
        cx, cy = col[v]
        refined[v] = Point2(float(result.x[cx]), float(result.x[cy]))
    return refined, result
