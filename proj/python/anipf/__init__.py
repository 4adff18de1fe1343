"""Anisotropic Allen-Cahn and Cahn-Hilliard solvers with an obstacle potential."""

from ._core import (
    AnisotropyDensity,
    SchemeState,
    implicit_step_bound,
    initial_profile,
    Mesh,
    SchemeConfig,
    TimeStepper,
    assemble_anisotropic_stiffness,
    assemble_stiffness,
    check_inequalities,
    discrete_energy,
    lumped_mass,
    parse_anisotropy,
    parse_config,
    regularized_l1,
    run_config,
    solve_obstacle,
    wulff_shape_distance,
    zero_level_set,
)

__all__ = [
    "AnisotropyDensity",
    "SchemeState",
    "implicit_step_bound",
    "initial_profile",
    "Mesh",
    "SchemeConfig",
    "TimeStepper",
    "assemble_anisotropic_stiffness",
    "assemble_stiffness",
    "check_inequalities",
    "discrete_energy",
    "lumped_mass",
    "parse_anisotropy",
    "parse_config",
    "regularized_l1",
    "run_config",
    "solve_obstacle",
    "wulff_shape_distance",
    "zero_level_set",
]
