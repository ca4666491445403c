"""Distributed flocking control law.

Each agent's force combines a gradient term over continuously measured
relative positions and a velocity-consensus term over broadcast velocities
only (its own last broadcast included; the true instantaneous velocity of a
neighbor is never read):

    F_i = - alpha_i * sum_j grad V(q_i - q_j)
          - beta_i  * sum_j (vhat_i - vhat_j)

The full actuation adds the model's conservative-force cancellation and maps
the inertial force into the model's input coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import potential as pot
from .graph import CommGraph, edge_specs, neighbors
from .potential import PotentialParams, ZeroSeparation
from .trigger import TriggerState


class MissingBroadcast(KeyError):
    """A neighbor has never been heard from (impossible after initialization)."""


def _gain(value, i: int) -> float:
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else float(arr[i])


@dataclass(frozen=True)
class ControlGains:
    """Cohesion/separation gain alpha and alignment gain beta.

    Either gain may be a scalar or a per-agent array; both must be positive.
    """

    alpha: float | np.ndarray
    beta: float | np.ndarray

    def __post_init__(self):
        for name in ("alpha", "beta"):
            if np.any(np.asarray(getattr(self, name), dtype=float) <= 0.0):
                raise ValueError(f"{name} must be positive")


def flocking_force(
    gains: ControlGains,
    graph: CommGraph,
    params: PotentialParams,
    i: int,
    positions: np.ndarray,
    trigger_state: TriggerState,
) -> np.ndarray:
    """Flocking force on agent i from local measurements and broadcasts."""
    positions = np.asarray(positions, dtype=float)
    grad = np.zeros(positions.shape[1])
    consensus = np.zeros_like(trigger_state.last_broadcast_velocity)
    for j in neighbors(graph, i):
        if j not in trigger_state.neighbor_broadcasts:
            raise MissingBroadcast(f"agent {i} never heard from neighbor {j}")
        grad += pot.gradient(params, positions[i] - positions[j])
        consensus += trigger_state.last_broadcast_velocity - trigger_state.neighbor_broadcasts[j]
    return -_gain(gains.alpha, i) * grad - _gain(gains.beta, i) * consensus


def full_control(
    model,
    gains: ControlGains,
    graph: CommGraph,
    params: PotentialParams,
    i: int,
    positions: np.ndarray,
    agent_state,
    trigger_state: TriggerState,
) -> np.ndarray:
    """Actuation for agent i: flocking force plus the model's feedforward."""
    f = flocking_force(gains, graph, params, i, positions, trigger_state)
    return model.actuation_single(agent_state, f)


class ForceField:
    """Batched evaluation of the flocking force for all agents at once.

    Matches :func:`flocking_force` agent by agent; the simulator uses this
    path inside integrator stages. Construction resolves per-edge desired
    distances and per-agent gains into arrays.
    """

    def __init__(self, graph: CommGraph, desired_distances, cutoff_radius,
                 inner_gain, mid_gain, alpha, beta):
        self.graph = graph
        n, m = graph.node_count, graph.edge_count
        self.edge_specs = edge_specs(graph, desired_distances)
        self.d_edges = np.array([s.desired_distance for s in self.edge_specs])
        if m and not np.all(self.d_edges < cutoff_radius):
            raise ValueError("desired distances must lie in (0, cutoff_radius)")
        self.cutoff = float(cutoff_radius)
        self.inner_gain = float(inner_gain)
        self.mid_gain = float(mid_gain)
        self.alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (n,)).copy()
        self.beta = np.broadcast_to(np.asarray(beta, dtype=float), (n,)).copy()

    def edge_radii(self, positions: np.ndarray) -> np.ndarray:
        z = positions[self.graph.tails] - positions[self.graph.heads]
        return np.sqrt(np.einsum("ed,ed->e", z, z))

    def forces(self, positions: np.ndarray, broadcast_velocities: np.ndarray) -> np.ndarray:
        z = positions[self.graph.tails] - positions[self.graph.heads]
        r = np.sqrt(np.einsum("ed,ed->e", z, z))
        if r.size and float(np.min(r)) < pot.COLLISION_EPS:
            k = int(np.argmin(r))
            raise ZeroSeparation(
                f"edge ({self.graph.tails[k]}, {self.graph.heads[k]}) separation "
                f"{float(r[k]):.3e} m below {pot.COLLISION_EPS:.0e} m"
            )
        slope = pot._slope(r, self.d_edges, self.cutoff, self.inner_gain, self.mid_gain)
        z *= (slope / r)[:, None]
        out = self.graph.incidence @ z
        out *= -self.alpha[:, None]
        out -= self.beta[:, None] * (self.graph.laplacian @ broadcast_velocities)
        return out

    def potential_values(self, positions: np.ndarray) -> np.ndarray:
        r = self.edge_radii(positions)
        if r.size and float(np.min(r)) < pot.COLLISION_EPS:
            raise ZeroSeparation(f"separation {float(np.min(r)):.3e} m at a connected pair")
        return pot._value(r, self.d_edges, self.cutoff, self.inner_gain, self.mid_gain)
