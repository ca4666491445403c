"""Event-triggered flocking of Lagrangian multi-agent systems.

Agents with Euler-Lagrange dynamics flock under a distributed control law
that combines an artificial-potential gradient over continuously measured
relative positions with a velocity-consensus term over event-triggered
broadcasts. The package provides the communication topology, two plant
models (point mass and SE(3) underwater vehicle), the trigger rule, a
deterministic fixed-step simulator, runtime monitors, and a CLI.
"""

from .controller import ControlGains, ForceField, MissingBroadcast, flocking_force, full_control
from .dynamics import AgentState, DoubleIntegrator, DynamicsDescriptor
from .graph import (
    CommGraph,
    DisconnectedGraph,
    EdgeSpec,
    InvalidEdge,
    build_graph,
    edge_specs,
    neighbors,
    random_connected_graph,
    relative_positions,
)
from .metrics import (
    EventStatistics,
    avg_min_neighbor_distance,
    avg_velocity_difference,
    event_statistics,
    lyapunov,
)
from .potential import (
    PotentialParams,
    PropertyViolation,
    ZeroSeparation,
    check_properties,
    gradient,
    value,
)
from .recording import SimulationRecord, load_record, write_record
from .scenario import Scenario, ScenarioError, load_scenario, preset, save_scenario
from .simulator import SimulationConfig, World, run, run_world, step
from .trigger import (
    BroadcastMessage,
    NonmonotoneTime,
    TriggerState,
    deliver,
    error,
    fire,
    should_fire,
    threshold,
)
from .underwater import RigidBodyParams, UnderwaterVehicle, underwater_paper_params

__version__ = "0.1.0"

__all__ = [
    "AgentState",
    "BroadcastMessage",
    "CommGraph",
    "ControlGains",
    "DisconnectedGraph",
    "DoubleIntegrator",
    "DynamicsDescriptor",
    "EdgeSpec",
    "EventStatistics",
    "ForceField",
    "InvalidEdge",
    "MissingBroadcast",
    "NonmonotoneTime",
    "PotentialParams",
    "PropertyViolation",
    "RigidBodyParams",
    "Scenario",
    "ScenarioError",
    "SimulationConfig",
    "SimulationRecord",
    "TriggerState",
    "UnderwaterVehicle",
    "World",
    "ZeroSeparation",
    "avg_min_neighbor_distance",
    "avg_velocity_difference",
    "build_graph",
    "check_properties",
    "deliver",
    "edge_specs",
    "error",
    "event_statistics",
    "fire",
    "flocking_force",
    "full_control",
    "gradient",
    "load_record",
    "load_scenario",
    "lyapunov",
    "neighbors",
    "preset",
    "random_connected_graph",
    "relative_positions",
    "run",
    "run_world",
    "save_scenario",
    "should_fire",
    "step",
    "threshold",
    "underwater_paper_params",
    "value",
    "write_record",
]
