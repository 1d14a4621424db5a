"""Simulation and threshold analysis for a discrete predator-prey model
with an infectious disease in the prey.

The discretisation follows the nonstandard finite-difference recipe:
implicit sampling of loss terms keeps all compartments nonnegative for any
step size, and the persistence/extinction threshold quotients of the
discrete system are computed on attractors of auxiliary comparison
systems.
"""

from .coefficients import (
    COEFF_NAMES,
    CoefficientSequence,
    CoefficientSpec,
    ContinuousModelSpec,
    DiscreteCoefficients,
    H4Certificate,
    ValidationReport,
    check_h4,
    discretize_continuous,
    validate_h1_h2,
)
from .dynamics import (
    FunctionalResponse,
    Scenario,
    Trajectory,
    check_monotonicity,
    h3_requirements_met,
    make_response,
    register_response,
    simulate,
    solve_implicit_s,
    step_explicit,
    step_general,
)
from .auxiliary import (
    AuxiliarySystem,
    ReferenceSolution,
    autonomous_fixed_point,
    find_attractor,
    pair_system,
    predator_system,
    prey_system,
)
from .thresholds import (
    ReferenceSet,
    ThresholdReport,
    build_references,
    lambda_scan,
    r_autonomous,
    r_no_predation,
    r_periodic,
    r_threshold,
    threshold_factor,
)
from .analysis import (
    AttractivityReport,
    BoundReport,
    ExtinctionVerdict,
    PersistenceVerdict,
    check_attractivity,
    detect_extinction,
    detect_persistence,
    eventual_bound,
    verdict_json_dict,
    verify_bound_L,
)
from .scenario_io import (
    PRESET_NAMES,
    PRESETS,
    LoadedScenario,
    Preset,
    RunSettings,
    get_preset,
    parse_scenario,
    preset_scenario,
    reference_summary,
    serialize_scenario,
    write_json,
    write_reference_csv,
    write_threshold_csv,
    write_trajectory_csv,
)
from .errors import (
    AperiodicInput,
    EcoepiError,
    NoConvergence,
    PositivityViolation,
    ReferenceWindowExhausted,
    ScenarioParseError,
    ScenarioValidationError,
)

__version__ = "0.1.0"
