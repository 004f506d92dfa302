"""Left-invariant EKF on SE_2(3) fusing IMU propagation with GPS position
fixes and course-over-ground heading references."""

__version__ = "0.1.0"

from .config import FilterConfig, HeadingConfig, InitialBelief, NoiseParams, Scenario
from .correction import GpsFix, Measurement, apply_correction, stack_pose_measurement
from .evaluation import ErrorReport, align_and_score, compare_runs, inter_track_rmse
from .filter import EnuFix, InvariantFilter, run_filter
from .propagation import ImuSample, left_invariant_A, propagate
from .sim import Trajectory, generate_truth, simulate
from .state import RobotState, initial_state

__all__ = [
    "EnuFix", "ErrorReport", "FilterConfig", "GpsFix", "HeadingConfig", "ImuSample",
    "InitialBelief", "InvariantFilter", "Measurement", "NoiseParams", "RobotState",
    "Scenario", "Trajectory", "align_and_score", "apply_correction", "compare_runs",
    "generate_truth", "initial_state", "inter_track_rmse", "left_invariant_A",
    "propagate", "run_filter", "simulate", "stack_pose_measurement",
]
