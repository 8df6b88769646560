"""Speed of the simple random walk on percolated Galton-Watson trees.

Analytic pipeline: offspring law -> percolated extinction probability ->
backbone/bush decomposition -> walk speed, with Monte Carlo simulation
of the lazily grown cluster as independent validation.
"""

from .offspring import (
    Binomial,
    FinitePmf,
    Geometric,
    LawError,
    OffspringLaw,
    Poisson,
    parse_law,
    pgf_derivative,
)
from .percolation import (
    ConvergenceError,
    ModelError,
    PercolatedModel,
    backbone_pmf,
    bush_mean_size,
    bush_pmf,
    mean_excursions,
    rho_derivative,
    solve_rho,
    thinned_pmf,
)
from .simulate import (
    Cluster,
    SimulationError,
    WalkEstimate,
    estimate_speed,
    run_walk,
    simulate_pipes,
)
from .speed import (
    SpeedCurvePoint,
    backbone_speed,
    check_condition,
    cluster_speed,
    cluster_speed_at,
    eq1_speed,
    mean_delay,
    pipes_speed,
    sweep,
)

__all__ = [
    "Binomial",
    "Cluster",
    "ConvergenceError",
    "FinitePmf",
    "Geometric",
    "LawError",
    "ModelError",
    "OffspringLaw",
    "PercolatedModel",
    "Poisson",
    "SimulationError",
    "SpeedCurvePoint",
    "WalkEstimate",
    "backbone_pmf",
    "backbone_speed",
    "bush_mean_size",
    "bush_pmf",
    "check_condition",
    "cluster_speed",
    "cluster_speed_at",
    "eq1_speed",
    "estimate_speed",
    "mean_delay",
    "mean_excursions",
    "parse_law",
    "pgf_derivative",
    "pipes_speed",
    "rho_derivative",
    "run_walk",
    "simulate_pipes",
    "solve_rho",
    "sweep",
    "thinned_pmf",
]

__version__ = "0.1.0"
