"""Robust anchor-based 2D network localization from noisy range measurements."""

from .harness import (
    ALGORITHMS,
    ErrorReport,
    SweepSpec,
    TrialResult,
    evaluate_errors,
    refine_lsq,
    run_call_baseline,
    run_sweep,
    run_trial,
)
from .mirrors import (
    Band,
    MirrorReport,
    detect_mirrors,
    enumerate_flip_candidates,
    find_min_dis,
    generate_bands,
    point_band_distance,
    point_line_side,
    reflect_across_mirror,
)
from .model import (
    EmbeddedGraph,
    NoiseModel,
    Point2,
    RangeGraph,
    Scenario,
    ambiguous_region_check,
    apply_noise,
    generate_scenario,
    load_scenario,
    save_scenario,
)
from .rcgr import (
    Component,
    GlobalSolution,
    grow_component,
    merge_components,
    rcgr,
    select_robust_triangle,
)
from .realization import (
    BranchAxis,
    LocalFrame,
    RealizedSet,
    bilaterate,
    init_local_frame,
    reflect_branch,
    robust_realize,
    trilaterate,
)
from .sensitivity import (
    SensitivityMatrix,
    SpectrumResult,
    build_rsm,
    condition_number,
    predict_perturbation,
    rank_check,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "Band",
    "Component",
    "EmbeddedGraph",
    "ErrorReport",
    "GlobalSolution",
    "LocalFrame",
    "MirrorReport",
    "NoiseModel",
    "Point2",
    "RangeGraph",
    "BranchAxis",
    "RealizedSet",
    "Scenario",
    "SensitivityMatrix",
    "SpectrumResult",
    "SweepSpec",
    "TrialResult",
    "ambiguous_region_check",
    "apply_noise",
    "bilaterate",
    "build_rsm",
    "condition_number",
    "detect_mirrors",
    "enumerate_flip_candidates",
    "evaluate_errors",
    "find_min_dis",
    "generate_bands",
    "generate_scenario",
    "grow_component",
    "init_local_frame",
    "load_scenario",
    "merge_components",
    "point_band_distance",
    "point_line_side",
    "predict_perturbation",
    "rank_check",
    "rcgr",
    "refine_lsq",
    "reflect_across_mirror",
    "reflect_branch",
    "robust_realize",
    "run_call_baseline",
    "run_sweep",
    "run_trial",
    "save_scenario",
    "select_robust_triangle",
    "trilaterate",
]
