"""Excitation transport on lossy lattices with dephasing.

Solvers and analytic bounds for the transfer efficiency of a single
excitation hopping on a 1D/2D lattice with a local extraction site (sink),
uniform background loss and local dephasing — the regime where moderate
noise can assist transport.
"""

from .bounds import BoundReport, eta_abs, eta_coh, eta_incoh, find_gamma0, min_estimate
from .gf import (
    Method,
    NonDecayingSubspaceError,
    SpectrumCensus,
    TransportResult,
    dark_census,
    transport_gf,
)
from .lattice import (
    Boundary,
    Dims,
    HoppingModel,
    InvalidSpecError,
    LatticeSpec,
    build_hopping,
)
from .mcwf import StepSizeError, TrajectoryConfig, TrajectoryOutcome, estimate_transport
from .oned import eta_coh_1d, eta_incoh_1d, gamma0_asymptote, gamma0_equation
from .superop import RateSet, Superoperator, build_generator, devectorize, vectorize
from .sweep import ConfigError, ExperimentConfig, load_config, parse_config, run_experiment

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "Boundary",
    "ConfigError",
    "Dims",
    "ExperimentConfig",
    "HoppingModel",
    "InvalidSpecError",
    "LatticeSpec",
    "Method",
    "NonDecayingSubspaceError",
    "RateSet",
    "SpectrumCensus",
    "StepSizeError",
    "Superoperator",
    "TrajectoryConfig",
    "TrajectoryOutcome",
    "TransportResult",
    "build_generator",
    "build_hopping",
    "dark_census",
    "devectorize",
    "estimate_transport",
    "eta_abs",
    "eta_coh",
    "eta_coh_1d",
    "eta_incoh",
    "eta_incoh_1d",
    "find_gamma0",
    "gamma0_asymptote",
    "gamma0_equation",
    "load_config",
    "min_estimate",
    "parse_config",
    "run_experiment",
    "transport_gf",
    "vectorize",
    "__version__",
]
