"""Monte-Carlo experiment harness and baseline algorithms.

Runs the robust pipeline, the ungated baseline, and a centralized joint
least-squares oracle over generated scenarios, and aggregates error
statistics, CDFs, and summary tables for sweeps over node count and
radius/degree.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .model import (
    NONE,
    MULTIPLICATIVE,
    NoiseModel,
    Point2,
    RangeGraph,
    Scenario,
    euclid,
    generate_scenario,
)
from .nls import levenberg_marquardt
from .rcgr import Component, GlobalSolution, build_components, merge_components, rcgr
from .realization import jointly_refine, locate_from_references

ALGORITHMS = ("rcgr", "call", "lsq")

#: Number of evenly spaced levels in every error CDF.
CDF_LEVELS = 100


@dataclass(frozen=True)
class ErrorReport:
    """Per-vertex localization errors and their summary statistics."""

    errors: dict[int, float]
    localized_fraction: float
    mean: float
    median: float
    max: float
    p90: float
    cdf_levels: tuple[float, ...]
    cdf_fractions: tuple[float, ...]


@dataclass(frozen=True)
class AlgoRun:
    """One algorithm's output on one scenario."""

    estimates: dict[int, Point2 | None]
    report: ErrorReport
    component_of: dict[int, int]
    component_count: int
    realization_index: dict[int, int]
    wall_time: float


@dataclass(frozen=True)
class TrialResult:
    """All algorithm runs on one scenario."""

    seed: int
    node_count: int
    radius: float
    runs: dict[str, AlgoRun]


@dataclass(frozen=True)
class SweepSpec:
    """Sweep configuration: trials x node counts x radii (or target degrees)."""

    trials: int = 10
    node_counts: tuple[int, ...] = (30,)
    radii: tuple[float, ...] | None = (30.0,)
    degrees: tuple[float, ...] | None = None
    noise_scale: float = 0.1
    noise_kind: str = MULTIPLICATIVE
    kappa_threshold: float = 4.0
    seed_base: int = 0
    area: tuple[float, float] = (100.0, 100.0)
    anchor_count: int = 3
    algorithms: tuple[str, ...] = ALGORITHMS
    workers: int = 1

    def __post_init__(self) -> None:
        if (self.radii is None) == (self.degrees is None):
            raise ValueError("specify exactly one of radii or degrees")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")


def evaluate_errors(
    truth: Mapping[int, Point2], estimates: Mapping[int, Point2 | None]
) -> ErrorReport:
    """Compare an estimate map against ground truth.

    Vertices mapped to None (or missing) count as unlocalized and are
    excluded from the error statistics; the CDF is sampled at CDF_LEVELS
    evenly spaced levels from zero to the maximum error.
    """
    errors = {
        v: euclid(truth[v], est)
        for v, est in estimates.items()
        if est is not None
    }
    total = len(truth)
    fraction = len(errors) / total if total else 0.0
    values = np.array(sorted(errors.values()), dtype=float)
    if values.size:
        mean = float(values.mean())
        median = float(np.median(values))
        worst = float(values.max())
        p90 = float(np.percentile(values, 90))
        levels = np.linspace(0.0, worst, CDF_LEVELS)
        fractions = np.array([float(np.mean(values <= lv)) for lv in levels])
    else:
        mean = median = worst = p90 = math.nan
        levels = np.zeros(CDF_LEVELS)
        fractions = np.ones(CDF_LEVELS)
    return ErrorReport(
        errors=errors,
        localized_fraction=fraction,
        mean=mean,
        median=median,
        max=worst,
        p90=p90,
        cdf_levels=tuple(levels),
        cdf_fractions=tuple(fractions),
    )


def _solution_estimates(
    solution: GlobalSolution, node_count: int
) -> dict[int, Point2 | None]:
    return {v: solution.locations.get(v) for v in range(node_count)}


def _component_map(components: Sequence[Component]) -> tuple[dict[int, int], dict[int, int]]:
    component_of: dict[int, int] = {}
    realization_index: dict[int, int] = {}
    for comp in components:
        for rank, v in enumerate(comp.realized.members):
            component_of[v] = comp.id
            realization_index[v] = rank
    return component_of, realization_index


def run_call_baseline(
    graph: RangeGraph,
    anchors: Mapping[int, Point2],
    noise_bound: float = 0.0,
) -> dict[int, Point2]:
    """Ungated baseline: first-found realization order, no gate, no flips.

    Components are grown and realized exactly like the robust pipeline but
    with an infinite condition threshold, ascending-index realization order,
    and a single realization candidate; merging is shared.  Returns the
    merged location map.
    """
    solution, _ = _call_solution(graph, anchors, noise_bound)
    return solution.locations


def _call_solution(
    graph: RangeGraph, anchors: Mapping[int, Point2], noise_bound: float
) -> tuple[GlobalSolution, list[Component]]:
    components = build_components(
        graph,
        kappa_threshold=math.inf,
        noise_bound=noise_bound,
        order="index",
        enumerate_mirrors=False,
    )
    return merge_components(components, graph, anchors), components


def refine_lsq(
    graph: RangeGraph,
    initial: Mapping[int, Point2],
    anchors: Mapping[int, Point2],
) -> dict[int, Point2]:
    """Joint nonlinear least squares over all edges with anchors fixed.

    Every vertex needs an initial location.  Runs until the gradient norm
    falls below 1e-10 or 500 iterations; if progress stalls the best iterate
    found is returned.
    """
    missing = [v for v in range(graph.node_count) if v not in initial]
    if missing:
        raise ValueError(f"initial locations missing for vertices {missing}")
    locations = dict(initial)
    for a, p in anchors.items():
        locations[a] = p
    refined, _ = jointly_refine(
        graph, locations, fixed=sorted(anchors), gtol=1e-10, max_iter=500
    )
    return refined


def _edge_objective(graph: RangeGraph, locations: Mapping[int, Point2]) -> float:
    return sum(
        (euclid(locations[i], locations[j]) - d) ** 2
        for (i, j), d in graph.measured.items()
    )


def _nonedge_violations(
    graph: RangeGraph, locations: Mapping[int, Point2], radius: float
) -> int:
    """Count vertex pairs without a measured edge placed closer than radius.

    The generator only omits an edge when the true separation exceeds the
    ranging radius, so such pairs betray a folded layout.
    """
    count = 0
    for i in range(graph.node_count):
        for j in range(i + 1, graph.node_count):
            if not graph.has_edge(i, j) and euclid(
                locations[i], locations[j]
            ) < radius:
                count += 1
    return count


def _unfold_refine(
    graph: RangeGraph,
    initial: Mapping[int, Point2],
    anchors: Mapping[int, Point2],
    radius: float,
    weight: float = 1.0,
    gtol: float = 1e-8,
    max_iter: int = 300,
) -> dict[int, Point2]:
    """Joint least squares with a hinge penalty on close non-edges.

    Adds ``weight * (radius - separation)`` residuals for vertex pairs that
    have no measured edge yet sit closer than the ranging radius, which pulls
    folded layouts apart; measured edges contribute their usual length
    residuals.  Anchors stay fixed.
    """
    n = graph.node_count
    free = [v for v in range(n) if v not in anchors]
    index = np.full(n, -1)
    for k, v in enumerate(free):
        index[v] = k
    coords = np.zeros((n, 2))
    for v in range(n):
        coords[v] = (anchors[v] if v in anchors else initial[v]).as_array()
    edges = sorted(graph.measured)
    e_i = np.array([i for i, _ in edges], dtype=int)
    e_j = np.array([j for _, j in edges], dtype=int)
    e_d = np.array([graph.measured[e] for e in edges])
    pairs = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if not graph.has_edge(i, j) and (index[i] >= 0 or index[j] >= 0)
    ]
    p_i = np.array([i for i, _ in pairs], dtype=int)
    p_j = np.array([j for _, j in pairs], dtype=int)
    rows = len(edges) + len(pairs)

    def scatter(jac, row0, count, verts, grad):
        cols = index[verts]
        ok = cols >= 0
        r = row0 + np.arange(count)[ok]
        jac[r, 2 * cols[ok]] = grad[ok, 0]
        jac[r, 2 * cols[ok] + 1] = grad[ok, 1]

    def fun(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pts = coords.copy()
        pts[free] = x.reshape(-1, 2)
        residual = np.zeros(rows)
        jac = np.zeros((rows, x.size))
        diff = pts[e_i] - pts[e_j]
        norms = np.maximum(np.linalg.norm(diff, axis=1), 1e-12)
        residual[: len(edges)] = norms - e_d
        grad = diff / norms[:, None]
        scatter(jac, 0, len(edges), e_i, grad)
        scatter(jac, 0, len(edges), e_j, -grad)
        if len(pairs):
            diff = pts[p_i] - pts[p_j]
            norms = np.maximum(np.linalg.norm(diff, axis=1), 1e-12)
            active = norms < radius
            residual[len(edges) :] = np.where(
                active, weight * (radius - norms), 0.0
            )
            grad = np.where(
                active[:, None], -weight * diff / norms[:, None], 0.0
            )
            scatter(jac, len(edges), len(pairs), p_i, grad)
            scatter(jac, len(edges), len(pairs), p_j, -grad)
        return residual, jac

    x0 = coords[free].ravel()
    result = levenberg_marquardt(fun, x0, gtol=gtol, max_iter=max_iter)
    out = dict(anchors)
    placed = result.x.reshape(-1, 2)
    for k, v in enumerate(free):
        out[v] = Point2(float(placed[k, 0]), float(placed[k, 1]))
    return out


def _spring_initial(
    graph: RangeGraph,
    anchors: Mapping[int, Point2],
    area: tuple[float, float],
    seed: int,
    sweeps: int = 100,
) -> dict[int, Point2]:
    """Anchor-seeded deterministic starting layout for the joint solver."""
    rng = np.random.default_rng(seed ^ 0x5EED_CAFE)
    positions = {
        v: anchors[v].as_array()
        if v in anchors
        else rng.random(2) * np.array(area)
        for v in range(graph.node_count)
    }
    for _ in range(sweeps):
        for v in range(graph.node_count):
            if v in anchors:
                continue
            pulls = []
            for u in graph.neighbors(v):
                diff = positions[v] - positions[u]
                norm = float(np.linalg.norm(diff))
                direction = diff / norm if norm > 1e-12 else np.array([1.0, 0.0])
                pulls.append(positions[u] + graph.distance(v, u) * direction)
            if pulls:
                positions[v] = np.mean(pulls, axis=0)
    return {v: Point2(float(p[0]), float(p[1])) for v, p in positions.items()}


def _fill_missing(
    partial: Mapping[int, Point2 | None], fallback: Mapping[int, Point2]
) -> dict[int, Point2]:
    return {
        v: (partial.get(v) or fallback[v]) for v in fallback
    }


def _mds_initial(
    graph: RangeGraph, anchors: Mapping[int, Point2]
) -> dict[int, Point2]:
    """Anchor-aligned classical-MDS layout over shortest-path distances.

    Approximates every pairwise distance by the measured shortest path
    (disconnected pairs fall back to the longest finite path), embeds the
    distance matrix by double-centered eigendecomposition, and maps the
    embedding onto the anchors with the best-fitting orthogonal transform
    (reflection allowed).  A much better-basin start than random layouts
    when the graph is sparse.
    """
    n = graph.node_count
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for (i, j), d in graph.measured.items():
        dist[i, j] = dist[j, i] = d
    for k in range(n):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    finite = dist[np.isfinite(dist)]
    cap = float(finite.max()) if finite.size else 1.0
    dist[~np.isfinite(dist)] = cap

    sq = dist**2
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    gram = -0.5 * centering @ sq @ centering
    eigvals, eigvecs = np.linalg.eigh(gram)
    top = np.argsort(eigvals)[-2:]
    coords = eigvecs[:, top] * np.sqrt(np.maximum(eigvals[top], 0.0))

    anchor_ids = sorted(anchors)
    if len(anchor_ids) >= 2:
        local = coords[anchor_ids]
        target = np.array([anchors[a].as_array() for a in anchor_ids])
        lc, tc = local.mean(axis=0), target.mean(axis=0)
        u, _, vt = np.linalg.svd((local - lc).T @ (target - tc))
        rot = (u @ vt).T
        coords = (coords - lc) @ rot.T + tc
    return {v: Point2(float(coords[v, 0]), float(coords[v, 1])) for v in range(n)}


def _multilateration_fill(
    graph: RangeGraph,
    seeded: Mapping[int, Point2],
    fallback: Mapping[int, Point2],
    noise_bound: float,
) -> dict[int, Point2]:
    """Complete a partial location map by breadth-first multilateration.

    Unplaced vertices are located one at a time, always the one with the most
    placed neighbors next, via trilateration (or bilateration, breaking the
    tie toward the fallback coordinate).  Vertices that never gain two placed
    neighbors take their fallback coordinate verbatim.
    """
    placed = dict(seeded)
    pending = set(range(graph.node_count)) - set(placed)
    while pending:
        best: tuple[int, int] | None = None
        for v in sorted(pending):
            count = sum(1 for u in graph.neighbors(v) if u in placed)
            if count >= 2 and (best is None or count > best[1]):
                best = (v, count)
        if best is None:
            break
        v = best[0]
        candidates = locate_from_references(
            v, placed, graph, noise_bound=noise_bound, feasibility=False
        )
        if candidates:
            placed[v] = min(candidates, key=lambda p: euclid(p, fallback[v]))
        else:
            placed[v] = fallback[v]
        pending.discard(v)
    for v in pending:
        placed[v] = fallback[v]
    return placed


def run_trial(
    scenario: Scenario,
    algorithms: Sequence[str] = ALGORITHMS,
    kappa_threshold: float = 4.0,
) -> TrialResult:
    """Run the requested algorithms on one scenario.

    All algorithms consume the same scenario object, so they see identical
    measurements.  The joint least-squares oracle is multistarted from the
    shortest-path MDS layout, the spring layout, an anchors-only
    multilateration sweep, and each pipeline estimate completed by
    multilateration; every start is first unfolded against the non-edge
    lower bounds, then polished on the pure edge objective, and the solution
    with the fewest non-edge violations (ties by objective) is kept.
    """
    graph = scenario.graph
    truth = {v: p for v, p in enumerate(scenario.true_positions)}
    anchors = scenario.anchor_coordinates()
    noise_bound = scenario.noise.resolved_bound(scenario.radius)
    runs: dict[str, AlgoRun] = {}
    pipeline_estimates: dict[str, dict[int, Point2 | None]] = {}

    for algo in algorithms:
        if algo == "lsq":
            continue  # needs the other runs as starting points
        start = time.perf_counter()
        if algo == "rcgr":
            components = rcgr(graph, kappa_threshold, noise_bound=noise_bound)
            solution = merge_components(components, graph, anchors)
        elif algo == "call":
            solution, components = _call_solution(graph, anchors, noise_bound)
        else:
            raise ValueError(f"unknown algorithm {algo!r}")
        elapsed = time.perf_counter() - start
        estimates = _solution_estimates(solution, graph.node_count)
        component_of, realization_index = _component_map(components)
        pipeline_estimates[algo] = estimates
        runs[algo] = AlgoRun(
            estimates=estimates,
            report=evaluate_errors(truth, estimates),
            component_of=component_of,
            component_count=len(components),
            realization_index=realization_index,
            wall_time=elapsed,
        )

    if "lsq" in algorithms:
        start = time.perf_counter()
        mds = _mds_initial(graph, anchors)
        spring = _spring_initial(graph, anchors, scenario.area, scenario.seed)
        starts = [
            mds,
            spring,
            _multilateration_fill(graph, anchors, mds, noise_bound),
        ]
        for estimates in pipeline_estimates.values():
            seeded = dict(anchors)
            seeded.update(
                {v: p for v, p in estimates.items() if p is not None}
            )
            starts.append(
                _multilateration_fill(graph, seeded, mds, noise_bound)
            )
        best_locations: dict[int, Point2] | None = None
        best_key: tuple[int, float] | None = None
        for initial in starts:
            unfolded = _unfold_refine(graph, initial, anchors, scenario.radius)
            refined = refine_lsq(graph, unfolded, anchors)
            key = (
                _nonedge_violations(graph, refined, scenario.radius),
                _edge_objective(graph, refined),
            )
            if best_key is None or key < best_key:
                best_locations, best_key = refined, key
        assert best_locations is not None
        elapsed = time.perf_counter() - start
        estimates = {v: best_locations[v] for v in range(graph.node_count)}
        runs["lsq"] = AlgoRun(
            estimates=estimates,
            report=evaluate_errors(truth, estimates),
            component_of={},
            component_count=0,
            realization_index={},
            wall_time=elapsed,
        )

    return TrialResult(
        seed=scenario.seed,
        node_count=graph.node_count,
        radius=scenario.radius,
        runs=runs,
    )


def radius_for_degree(
    n: int,
    area: tuple[float, float],
    target_degree: float,
    seed: int,
) -> float:
    """Radius putting the scenario's mean degree within 0.5 of the target.

    Positions depend only on (n, area, seed), so the radius can be read off
    the order statistics of the pairwise distances.
    """
    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2)) * np.array(area, dtype=float)
    dists = sorted(
        float(np.hypot(*(coords[i] - coords[j])))
        for i in range(n)
        for j in range(i + 1, n)
    )
    wanted_edges = target_degree * n / 2.0
    k = min(max(int(round(wanted_edges)), 1), len(dists))
    radius = dists[k - 1] * (1.0 + 1e-12) + 1e-12
    return radius


@dataclass(frozen=True)
class SweepConfig:
    node_count: int
    radius: float | None
    degree: float | None

    @property
    def label(self) -> str:
        if self.degree is not None:
            return f"n{self.node_count}_deg{self.degree:g}"
        return f"n{self.node_count}_r{self.radius:g}"


@dataclass
class SweepResult:
    spec: SweepSpec
    configs: list[SweepConfig]
    trials: dict[str, list[TrialResult]] = field(default_factory=dict)
    scenarios: dict[str, list[Scenario]] = field(default_factory=dict)


def _sweep_one(
    args: tuple[SweepSpec, SweepConfig, int]
) -> tuple[str, int, Scenario, TrialResult]:
    spec, config, trial = args
    seed = spec.seed_base + trial
    radius = config.radius
    if radius is None:
        assert config.degree is not None
        radius = radius_for_degree(config.node_count, spec.area, config.degree, seed)
    noise = NoiseModel(kind=spec.noise_kind, scale=spec.noise_scale) \
        if spec.noise_scale > 0 else NoiseModel(kind=NONE)
    scenario = generate_scenario(
        n=config.node_count,
        area=spec.area,
        radius=radius,
        anchor_count=spec.anchor_count,
        noise=noise,
        seed=seed,
    )
    result = run_trial(scenario, spec.algorithms, spec.kappa_threshold)
    return config.label, trial, scenario, result


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run every (node count x radius/degree x trial) cell of the sweep.

    Trial t of every configuration uses seed seed_base + t, so re-running the
    same spec reproduces every scenario exactly.  Workers > 1 runs trials in
    a process pool; results are keyed by trial index either way.
    """
    configs = [
        SweepConfig(
            node_count=n,
            radius=r if spec.radii is not None else None,
            degree=d if spec.degrees is not None else None,
        )
        for n in spec.node_counts
        for r, d in (
            [(r, None) for r in spec.radii]
            if spec.radii is not None
            else [(None, d) for d in spec.degrees]
        )
    ]
    result = SweepResult(spec=spec, configs=configs)
    jobs = [
        (spec, config, trial) for config in configs for trial in range(spec.trials)
    ]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            outputs = list(pool.map(_sweep_one, jobs))
    else:
        outputs = [_sweep_one(job) for job in jobs]
    for label, trial, scenario, trial_result in sorted(
        outputs, key=lambda item: (item[0], item[1])
    ):
        result.trials.setdefault(label, []).append(trial_result)
        result.scenarios.setdefault(label, []).append(scenario)
    return result


# --- sweep spec / results serialization -------------------------------------

def sweep_spec_from_dict(data: Mapping) -> SweepSpec:
    return SweepSpec(
        trials=int(data.get("trials", 10)),
        node_counts=tuple(int(n) for n in data.get("node_counts", [30])),
        radii=tuple(float(r) for r in data["radii"]) if "radii" in data else None,
        degrees=tuple(float(d) for d in data["degrees"]) if "degrees" in data else None,
        noise_scale=float(data.get("noise_scale", 0.1)),
        noise_kind=str(data.get("noise_kind", MULTIPLICATIVE)),
        kappa_threshold=float(data.get("kappa_threshold", 4.0)),
        seed_base=int(data.get("seed_base", 0)),
        area=tuple(float(a) for a in data.get("area", (100.0, 100.0))),  # type: ignore[arg-type]
        anchor_count=int(data.get("anchor_count", 3)),
        algorithms=tuple(data.get("algorithms", ALGORITHMS)),
        workers=int(data.get("workers", 1)),
    )


def load_sweep_spec(path: str | Path) -> SweepSpec:
    return sweep_spec_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_results_csv(
    path: str | Path,
    scenarios: Sequence[Scenario],
    trials: Sequence[TrialResult],
) -> None:
    """Per-vertex rows: trial, algo, vertex, truth, estimate, error, component."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "trial", "algo", "vertex", "true_x", "true_y",
                "est_x", "est_y", "error", "component_id",
            ]
        )
        for trial_idx, (scenario, trial) in enumerate(zip(scenarios, trials)):
            for algo in sorted(trial.runs):
                run = trial.runs[algo]
                for v in range(scenario.graph.node_count):
                    truth = scenario.true_positions[v]
                    est = run.estimates.get(v)
                    comp = run.component_of.get(v, "")
                    if est is None:
                        writer.writerow(
                            [trial_idx, algo, v, repr(truth.x), repr(truth.y),
                             "", "", "", comp]
                        )
                    else:
                        writer.writerow(
                            [trial_idx, algo, v, repr(truth.x), repr(truth.y),
                             repr(est.x), repr(est.y),
                             repr(euclid(truth, est)), comp]
                        )


def write_summary_csv(path: str | Path, sweep: SweepResult) -> None:
    """One row per configuration per algorithm: mean, median, p90, coverage."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["config", "algo", "trials", "mean_error", "median_error",
             "p90_error", "localized_fraction"]
        )
        for config in sweep.configs:
            trials = sweep.trials[config.label]
            for algo in sweep.spec.algorithms:
                errors = [
                    e
                    for trial in trials
                    for e in trial.runs[algo].report.errors.values()
                ]
                located = sum(
                    len(trial.runs[algo].report.errors) for trial in trials
                )
                total = sum(trial.node_count for trial in trials)
                if errors:
                    arr = np.array(errors)
                    row = [
                        config.label, algo, len(trials),
                        repr(float(arr.mean())),
                        repr(float(np.median(arr))),
                        repr(float(np.percentile(arr, 90))),
                        repr(located / total if total else 0.0),
                    ]
                else:
                    row = [config.label, algo, len(trials), "", "", "",
                           repr(0.0)]
                writer.writerow(row)


def aggregate_cdf(
    trials: Sequence[TrialResult], algo: str
) -> tuple[np.ndarray, np.ndarray]:
    """Pooled error CDF for one algorithm over a list of trials."""
    errors = np.array(
        sorted(
            e for trial in trials for e in trial.runs[algo].report.errors.values()
        )
    )
    if errors.size == 0:
        return np.zeros(CDF_LEVELS), np.ones(CDF_LEVELS)
    levels = np.linspace(0.0, float(errors.max()), CDF_LEVELS)
    fractions = np.array([float(np.mean(errors <= lv)) for lv in levels])
    return levels, fractions


def write_cdf_csv(path: str | Path, trials: Sequence[TrialResult], algo: str) -> None:
    levels, fractions = aggregate_cdf(trials, algo)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["error_level", "fraction"])
        for level, fraction in zip(levels, fractions):
            writer.writerow([repr(float(level)), repr(float(fraction))])
