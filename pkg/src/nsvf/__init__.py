"""Planar Filippov (nonsmooth) vector fields.

Switching-curve classification, sliding dynamics, non-unique global
trajectories, and limit-set classification.
"""
from .expr import ParseError, EvaluationError, differentiate, evaluate, parse, to_string
from .filippov import FilippovSystem, Kind, PlanarField, SystemError_, Visibility
from .flow import (
    Deterministic, EnumerateAll, GlobalTrajectory, IntegrationOptions, Regime, Scripted, continue_from,
    enumerate_branches, integrate_global,
)
from .limits import (
    REGIONS, LimitSetReport, RegionSpec, check_invariance, classify_omega, crossing_sequence,
    minimality_evidence, non_dense_witness, omega_of_point,
)
from .systems import BUILTINS, builtin, load_system, parse_system

__version__ = "0.1.0"
