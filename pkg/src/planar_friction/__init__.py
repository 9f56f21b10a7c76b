"""Planar friction for rigid bodies in sliding contact.

A distributed LuGre / Elasto-Plastic bristle model over a discretised
pressure patch, a three-state reduced model corrected by a pre-computed
limit surface, and rigid-body scenarios built on both.

Public names are imported lazily so that the command-line tool can cap
library thread pools before numpy and numba load.
"""
from __future__ import annotations

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "contact_geometry": (
        "SurfaceSpec", "PressureGrid", "EmptyContactError", "discretize", "circle", "square",
        "line", "gradient_line", "hertzian", "non_convex", "custom", "load_pressure_csv",
        "hertzian_radius",
    ),
    "distributed": (
        "FrictionParams", "P0", "P1", "PRESETS", "VelocityTwist", "FrictionWrench",
        "DistributedModel", "g_curve", "cell_velocity", "elasto_plastic_beta", "bristle_rate",
        "wrench", "steady_state_wrench", "steady_state_bilinear",
    ),
    "limit_surface": (
        "LimitSurfaceTable", "precompute", "lookup", "find_zero_tangential_cor",
        "skew_variables", "skew_scale", "check_positive_definite", "SkewIterationError",
    ),
    "reduced": ("ScalingMatrices", "ReducedModel", "ellipsoid_wrench"),
    "integrators": ("FixedStep", "Adaptive", "IntegrationError", "integrate"),
    "simulation": (
        "VelocityProfile", "canonical_profile", "Trace", "RigidBody2D", "LoadProfile",
        "make_friction", "simulate_kinematic", "simulate_dynamic", "drift_tangential",
        "drift_normal", "gripper_scenario", "breakaway",
    ),
    "metrics": ("nrmse", "box_stats", "abs_error_stats", "BoxStats"),
    "compare": ("run_comparison", "ComparisonReport"),
    "bench": ("run_bench", "BenchRow"),
    "config": ("RunConfig", "ConfigError"),
}
_LOOKUP = {name: mod for mod, names in _EXPORTS.items() for name in names}

__all__ = sorted(_LOOKUP)


def __getattr__(name):
    mod = _LOOKUP.get(name)
    if mod is None:
        raise AttributeError(f"module 'planar_friction' has no attribute {name!r}")
    value = getattr(importlib.import_module(f".{mod}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(__all__))
