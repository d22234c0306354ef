"""Simulated prosthetic vision toolkit.

Renders head-orientation-driven phosphene views of equirectangular
panoramas, runs deterministic recognition-trial sessions over a scene
corpus, and analyzes the resulting logs (condition summaries, log-linear
regressions, two-way ANOVA). A CLI and a local frame service expose the
same pipeline to scripts and to the browser viewer.
"""

from .analysis import (
    AnovaTable,
    ConditionSummary,
    LogLinearFit,
    StepResult,
    angular_resolution,
    f_statistic,
    fit_log_regression,
    normalize_recognition,
    p_band,
    read_session_logs,
    summarize_conditions,
    two_way_anova,
    write_regression_report,
    write_summary_csv,
)
from .corpus import OBJECT_CLASSES, Corpus, Scene, frame_to_u8, make_demo_corpus, read_image, write_image_u8
from .errors import (
    AnalysisError,
    ConfigurationError,
    ContractViolationError,
    InvalidOrientationError,
    InvalidRayError,
    PlanningError,
    SchemaError,
    SingularFitError,
    SpvError,
)
from .experiment import (
    DEFAULT_CONDITION_GRID,
    Agent,
    AgentAction,
    Condition,
    NullAgent,
    OracleAgent,
    SessionLog,
    StimulusEngine,
    SweepAgent,
    TrialPlan,
    TrialStep,
    azimuth_coverage,
    build_trial_plan,
    emit_fixation_frame,
    run_headless_session,
)
from .geometry import (
    CameraModel,
    PanoramaMapping,
    compute_ray,
    default_camera,
    head_to_world_rotation,
    normalize_quaternion,
    quat_to_rotation,
    quaternion_from_axis_angle,
    quaternion_from_euler,
    ray_to_spherical,
    sample_panorama,
    spherical_to_pixel,
    spherical_to_ray,
)
from .phosphene import PhospheneConfig, PhospheneLayout, build_layout, luminance, quantize
from .renderer import PhospheneRenderer, RayTable, StimulusFrame, benchmark_render, precompute_ray_table

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "AgentAction",
    "AnalysisError",
    "AnovaTable",
    "CameraModel",
    "Condition",
    "ConditionSummary",
    "ConfigurationError",
    "ContractViolationError",
    "Corpus",
    "DEFAULT_CONDITION_GRID",
    "InvalidOrientationError",
    "InvalidRayError",
    "LogLinearFit",
    "NullAgent",
    "OBJECT_CLASSES",
    "OracleAgent",
    "PanoramaMapping",
    "PhospheneConfig",
    "PhospheneLayout",
    "PhospheneRenderer",
    "PlanningError",
    "RayTable",
    "Scene",
    "SchemaError",
    "SessionLog",
    "SingularFitError",
    "SpvError",
    "StepResult",
    "StimulusEngine",
    "StimulusFrame",
    "SweepAgent",
    "TrialPlan",
    "TrialStep",
    "angular_resolution",
    "azimuth_coverage",
    "benchmark_render",
    "build_layout",
    "build_trial_plan",
    "compute_ray",
    "default_camera",
    "emit_fixation_frame",
    "f_statistic",
    "fit_log_regression",
    "frame_to_u8",
    "head_to_world_rotation",
    "luminance",
    "make_demo_corpus",
    "normalize_quaternion",
    "normalize_recognition",
    "p_band",
    "precompute_ray_table",
    "quantize",
    "quat_to_rotation",
    "quaternion_from_axis_angle",
    "quaternion_from_euler",
    "ray_to_spherical",
    "read_image",
    "read_session_logs",
    "run_headless_session",
    "sample_panorama",
    "spherical_to_pixel",
    "spherical_to_ray",
    "summarize_conditions",
    "two_way_anova",
    "write_image_u8",
    "write_regression_report",
    "write_summary_csv",
]
