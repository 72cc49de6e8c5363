"""Joint BS/relay precoding for a multiuser amplify-and-forward two-way relay."""

from .bs_solver import BsSolveResult, SingularChannelError, bs_iterate
from .channel import ChannelSet, CorrelationSpec, draw_channels, trial_rng
from .harness import ExperimentSpec, TrialRecord, run_sweep, run_trial
from .model import SystemConfig, build_rs_quadforms, effective_matrices, sinr_direct
from .oracle import OracleReport, grid_search_scalar, random_search_rs
from .rs_solver import LmParams, RsSolveResult, bisection_solve, minimax_bound

__version__ = "0.1.0"

__all__ = [
    "BsSolveResult",
    "ChannelSet",
    "CorrelationSpec",
    "ExperimentSpec",
    "LmParams",
    "OracleReport",
    "RsSolveResult",
    "SingularChannelError",
    "SystemConfig",
    "TrialRecord",
    "bisection_solve",
    "bs_iterate",
    "build_rs_quadforms",
    "draw_channels",
    "effective_matrices",
    "grid_search_scalar",
    "minimax_bound",
    "random_search_rs",
    "run_sweep",
    "run_trial",
    "sinr_direct",
    "trial_rng",
]
