"""Hybrid hysteresis-switched stabilization: simulator and verifier.

The package models planar nonlinear plants whose cascade structure is
perturbed by input-dependent terms, pairs a linear local feedback with a
damped backstepping-style global feedback through a two-mode hysteresis
supervisor, integrates the resulting hybrid closed loop, and checks the
sampled hypotheses behind the switching design.
"""

from .controllers import (
    GlobalControllerParams,
    HybridController,
    LocalController,
    compare_global_forms,
    example_hybrid_controller,
    hybrid_step_logic,
    phi_global,
    phi_global_generic,
    phi_local,
)
from .errors import (
    DegenerateRegion,
    F2Zero,
    HybstabError,
    NoBracket,
    NonFiniteOutput,
    ThetaOutOfRange,
)
from .lyapunov import (
    BacksteppingData,
    LocalLyapunov,
    SetA,
    c_local,
    example_backstepping_data,
    max_v_on_A,
    theta1,
    v_local,
)
from .plant import ExampleSystem, PlantModel, example_plant
from .sim import (
    SimOptions,
    SolutionTrace,
    Termination,
    run_ball_of_initial_conditions,
    simulate,
    trace_to_csv,
)
from .verify import (
    check_h1,
    check_h2,
    check_h3,
    find_theta_star,
    hypothesis_report,
)

__version__ = "0.1.0"

__all__ = [
    "BacksteppingData",
    "DegenerateRegion",
    "ExampleSystem",
    "F2Zero",
    "GlobalControllerParams",
    "HybridController",
    "HybstabError",
    "LocalController",
    "LocalLyapunov",
    "NoBracket",
    "NonFiniteOutput",
    "PlantModel",
    "SetA",
    "SimOptions",
    "SolutionTrace",
    "Termination",
    "ThetaOutOfRange",
    "c_local",
    "check_h1",
    "check_h2",
    "check_h3",
    "compare_global_forms",
    "example_backstepping_data",
    "example_hybrid_controller",
    "example_plant",
    "find_theta_star",
    "hybrid_step_logic",
    "hypothesis_report",
    "max_v_on_A",
    "phi_global",
    "phi_global_generic",
    "phi_local",
    "run_ball_of_initial_conditions",
    "simulate",
    "theta1",
    "trace_to_csv",
    "v_local",
]
