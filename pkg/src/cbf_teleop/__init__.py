"""Safe shared-autonomy teleoperation workbench for a planar vehicle.

A simulated double-integrator vehicle flies through obstacle fields under
four interaction conditions that blend operator intent with a barrier
based safety filter, with optional haptic-style force cues.  Everything
is deterministic: same config and seed, same bytes in the log.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .cbf import (
    BarrierEval,
    EcbfGains,
    LinearConstraint,
    Obstacle,
    barrier,
    build_constraints,
    lie_derivatives,
    validate_gains,
)
from .config import ConfigError, SessionConfig, config_from_dict, config_to_dict, load_config
from .dynamics import (
    ControlInput,
    DynamicsParams,
    InputMap,
    OperatorCommand,
    StateVec,
    compute_u_ref,
    make_command,
    map_stylus_to_desired_velocity,
    step,
)
from .metrics_log import (
    LogFormatError,
    Metrics,
    StepRecord,
    TrialSummary,
    read_log,
    write_log,
    write_summary,
)
from .operators import (
    ForceFollowingOperator,
    OperatorObservation,
    OperatorParams,
    ReplayOperator,
    WaypointOperator,
    make_operator,
)
from .paradigm import Condition, ParadigmConfig, apply_condition, compute_force
from .qp import (
    InfeasibleAtResolution,
    QpSolution,
    QpStatus,
    check_kkt,
    oracle_solve,
    solve_projection,
    solve_relaxed,
)
from .session import (
    ReplayReport,
    RunResult,
    TrialEngine,
    replay_log,
    run_batch,
    run_headless,
)
from .world import (
    ContactReport,
    Environment,
    EnvironmentParams,
    OvercrowdedError,
    Phase,
    Target,
    TrialParams,
    TrialState,
    attempt_inspection,
    contact_query,
    generate_environment,
    update_trial,
    validate_environment,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    # cbf
    "BarrierEval", "EcbfGains", "LinearConstraint", "Obstacle",
    "barrier", "build_constraints", "lie_derivatives", "validate_gains",
    # config
    "ConfigError", "SessionConfig", "config_from_dict", "config_to_dict", "load_config",
    # dynamics
    "ControlInput", "DynamicsParams", "InputMap", "OperatorCommand", "StateVec",
    "compute_u_ref", "make_command", "map_stylus_to_desired_velocity", "step",
    # metrics / logs
    "LogFormatError", "Metrics", "StepRecord", "TrialSummary",
    "read_log", "write_log", "write_summary",
    # operators
    "ForceFollowingOperator", "OperatorObservation", "OperatorParams",
    "ReplayOperator", "WaypointOperator", "make_operator",
    # paradigm
    "Condition", "ParadigmConfig", "apply_condition", "compute_force",
    # qp
    "InfeasibleAtResolution", "QpSolution", "QpStatus",
    "check_kkt", "oracle_solve", "solve_projection", "solve_relaxed",
    # session
    "ReplayReport", "RunResult", "TrialEngine",
    "replay_log", "run_batch", "run_headless",
    # world
    "ContactReport", "Environment", "EnvironmentParams", "OvercrowdedError",
    "Phase", "Target", "TrialParams", "TrialState",
    "attempt_inspection", "contact_query", "generate_environment",
    "update_trial", "validate_environment",
]
