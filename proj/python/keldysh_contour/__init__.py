"""Closed-time-contour Green's functions for non-interacting bosons and fermions."""

from ._core import (
    Error,
    FreeGreenFunction,
    contour_component,
    discrete_green,
    discrete_partition_function,
    fix_constants,
    gf_component,
    initial_boundary_ratio,
    normalization_prefactor,
    oracle_suite,
    rho_from_nbar,
    structure_suite,
    thermal_nbar,
)

__all__ = [
    "Error",
    "FreeGreenFunction",
    "contour_component",
    "discrete_green",
    "discrete_partition_function",
    "fix_constants",
    "gf_component",
    "initial_boundary_ratio",
    "normalization_prefactor",
    "oracle_suite",
    "rho_from_nbar",
    "structure_suite",
    "thermal_nbar",
]
