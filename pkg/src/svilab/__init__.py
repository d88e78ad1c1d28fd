"""Path-wise numerical laboratory for a stochastic obstacle problem with
multiplicative Brownian noise, its Signorini boundary variant, and the
one-phase Stefan application."""

__version__ = "0.1.0"

from .errors import ConfigError, NewtonError, NumericalFailure, StabilityError
from .grid import DIRICHLET, NEUMANN, Grid, build_grid
from .noise import BrownianPathSet, CoeffSpec, TimeGrid, sample_paths
from .pathsolver import (
    ForcingSpec,
    InitialData,
    PathSolution,
    ProblemSpec,
    SolveConfig,
    direct_em_solve,
    solve_path,
)
from .signorini import solve_signorini_path
from .stefan import StefanData, similarity_oracle, solve_stefan_svi
from .transform import ReactionSpec

__all__ = [
    "__version__",
    "ConfigError",
    "NewtonError",
    "NumericalFailure",
    "StabilityError",
    "DIRICHLET",
    "NEUMANN",
    "Grid",
    "build_grid",
    "BrownianPathSet",
    "CoeffSpec",
    "TimeGrid",
    "sample_paths",
    "ForcingSpec",
    "InitialData",
    "PathSolution",
    "ProblemSpec",
    "SolveConfig",
    "direct_em_solve",
    "solve_path",
    "solve_signorini_path",
    "StefanData",
    "similarity_oracle",
    "solve_stefan_svi",
    "ReactionSpec",
]
