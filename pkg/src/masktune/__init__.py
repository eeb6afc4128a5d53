"""Mask-profile tuning for text removal.

Parameterizes removal masks two ways (box-profile superellipses and
color-threshold stroke maps), scores them through a pluggable
evaluator, and searches the parameter space with Gaussian-process
Bayesian optimization.
"""

from .geometry import (
    CHARACTER,
    PARAGRAPH,
    WORD,
    BaseBox,
    Type1Params,
    apply_mask,
    load_boxes,
    load_mask,
    mask_area,
    rasterize_type1,
    save_boxes,
    save_mask,
)
from .gp import GaussianProcess, expected_improvement, fit_gp
from .harness import (
    BenchmarkError,
    BenchmarkItem,
    OracleEvaluator,
    OracleWeights,
    dependency_report,
    load_benchmark,
    render_item_mask,
    score_point,
    synthetic_oracle,
)
from .protocol import EvaluatorError, SocketEvaluator, SubprocessEvaluator
from .space import (
    TYPE1,
    TYPE2,
    ParamSpace,
    grid_init,
    space_for,
    type1_space,
    type2_space,
)
from .stroke import ImagePair, Type2Params, morphology, threshold_mask, type2_mask
from .study import Study, Trial, TrialStore, run_study, suggest
from .synthetic import generate_benchmark

__version__ = "0.1.0"

__all__ = [
    "BaseBox",
    "BenchmarkError",
    "BenchmarkItem",
    "CHARACTER",
    "EvaluatorError",
    "GaussianProcess",
    "ImagePair",
    "OracleEvaluator",
    "OracleWeights",
    "PARAGRAPH",
    "ParamSpace",
    "SocketEvaluator",
    "Study",
    "SubprocessEvaluator",
    "TYPE1",
    "TYPE2",
    "Trial",
    "TrialStore",
    "Type1Params",
    "Type2Params",
    "WORD",
    "apply_mask",
    "dependency_report",
    "expected_improvement",
    "fit_gp",
    "generate_benchmark",
    "grid_init",
    "load_benchmark",
    "load_boxes",
    "load_mask",
    "mask_area",
    "morphology",
    "rasterize_type1",
    "render_item_mask",
    "run_study",
    "save_boxes",
    "save_mask",
    "score_point",
    "space_for",
    "suggest",
    "synthetic_oracle",
    "threshold_mask",
    "type1_space",
    "type2_mask",
    "type2_space",
]
