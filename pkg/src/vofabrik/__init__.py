"""Deterministic inverse kinematics and collision-aware path planning
for hyper-redundant serial arms.

The package layers up from geometric primitives (capsule and segment
distances) through a pitch/yaw chain model, FABRIK solving, velocity
obstacle cones, an obstacle-aware planner, and a scenario harness that
runs, validates, and reports on full trajectories.
"""

from .chain import (
    AngleOutOfLimits,
    ChainModel,
    ChainState,
    GimbalSingularity,
    InconsistentPositions,
    JointAngles,
    JointLimits,
    LinkSpec,
    angles_from_positions,
    fk,
    link_capsules,
    state_from_angles,
)
from .fabrik import (
    FabrikConfig,
    Phase,
    SolveOutcome,
    SolveStatus,
    backward_step,
    clamp_to_limits,
    forward_step,
    solve,
)
from .geometry import (
    Capsule3,
    DegenerateSegment,
    Segment3,
    capsule_capsule_distance,
    capsule_sphere_distance,
    closest_point_on_segment,
    segment_segment_distance,
)
from .harness import (
    ParseError,
    RunReport,
    Scenario,
    TrajectoryRecord,
    ValidationError,
    Violation,
    config_with_overrides,
    load_scenario,
    make_report,
    record_from_outcome,
    run_and_report,
    scenario_from_dict,
    scenario_path,
    validate_trajectory,
)
from .planner import (
    AngularRegion,
    InitialStateInCollision,
    PlanOutcome,
    PlanStatus,
    PlannerConfig,
    SafeSetEmpty,
    StepMetrics,
    compute_safe,
    cone_to_angular_constraints,
    ik_phase,
    min_clearance,
    plan,
    virtual_obstacles,
)
from .velocity_obstacles import (
    AlreadyInCollision,
    CollisionCone,
    NoAdmissibleVelocity,
    SphereObstacle,
    VOConfig,
    admissible_velocity,
    collision_cone,
    first_contact_time,
    in_cone,
)

__all__ = [
    "AlreadyInCollision",
    "AngleOutOfLimits",
    "AngularRegion",
    "Capsule3",
    "ChainModel",
    "ChainState",
    "CollisionCone",
    "DegenerateSegment",
    "FabrikConfig",
    "GimbalSingularity",
    "InconsistentPositions",
    "InitialStateInCollision",
    "JointAngles",
    "JointLimits",
    "LinkSpec",
    "NoAdmissibleVelocity",
    "ParseError",
    "Phase",
    "PlanOutcome",
    "PlanStatus",
    "PlannerConfig",
    "RunReport",
    "SafeSetEmpty",
    "Scenario",
    "Segment3",
    "SolveOutcome",
    "SolveStatus",
    "SphereObstacle",
    "StepMetrics",
    "TrajectoryRecord",
    "VOConfig",
    "ValidationError",
    "Violation",
    "admissible_velocity",
    "angles_from_positions",
    "backward_step",
    "capsule_capsule_distance",
    "capsule_sphere_distance",
    "clamp_to_limits",
    "closest_point_on_segment",
    "collision_cone",
    "compute_safe",
    "cone_to_angular_constraints",
    "config_with_overrides",
    "fk",
    "first_contact_time",
    "forward_step",
    "ik_phase",
    "in_cone",
    "link_capsules",
    "load_scenario",
    "make_report",
    "min_clearance",
    "plan",
    "record_from_outcome",
    "run_and_report",
    "scenario_from_dict",
    "scenario_path",
    "segment_segment_distance",
    "solve",
    "state_from_angles",
    "validate_trajectory",
]

__version__ = "0.1.0"
