"""Monte Carlo oracle: Euler paths of the regulated and the free diffusion."""
from ._accel import configure_threads, numba_enabled
from .api import (
    McEstimate,
    PathBatch,
    PathResult,
    SimConfig,
    estimate_exit,
    estimate_value,
    exit_samples,
    simulate_path,
    simulate_paths,
)

__all__ = [
    "McEstimate",
    "PathBatch",
    "PathResult",
    "SimConfig",
    "configure_threads",
    "estimate_exit",
    "estimate_value",
    "exit_samples",
    "numba_enabled",
    "simulate_path",
    "simulate_paths",
]
