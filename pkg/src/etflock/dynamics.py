"""Plant models with the Lagrangian-mechanics surface shared by the simulator.

Every model exposes two views of the same dynamics:

* single-agent operations on :class:`AgentState` (mass matrix, Coriolis
  matrix, conservative term, full state derivative), used by tests and the
  per-agent control API;
* a batched world interface (state containers with a leading agent axis,
  local-chart hooks for the integrator), used by the simulator hot loop.

The point-mass model here is the simplest concrete plant: unit mass matrix,
no Coriolis coupling, no conservative forces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DynamicsDescriptor:
    """Bound metadata certifying the standard mechanical-matrix properties.

    ``mass_lower_bound``/``mass_upper_bound`` bracket the mass-matrix spectrum
    for every reachable state; ``coriolis_gain`` bounds the Coriolis matrix
    norm linearly in the generalized velocity.
    """

    config_dim: int
    mass_lower_bound: float
    mass_upper_bound: float
    coriolis_gain: float

    def __post_init__(self):
        if not 0.0 < self.mass_lower_bound <= self.mass_upper_bound:
            raise ValueError(
                "mass bounds must satisfy 0 < lower <= upper, got "
                f"[{self.mass_lower_bound}, {self.mass_upper_bound}]"
            )
        if self.coriolis_gain < 0.0:
            raise ValueError("coriolis_gain must be nonnegative")


@dataclass
class AgentState:
    """Generalized configuration and velocity of a single agent.

    The layout of ``q`` and ``qdot`` is model-specific; models provide packing
    helpers where the configuration is not a plain vector.
    """

    q: np.ndarray
    qdot: np.ndarray


@dataclass
class PointState:
    """Batched state of point-mass agents: positions and velocities, (n, d)."""

    q: np.ndarray
    v: np.ndarray

    def copy(self) -> "PointState":
        return PointState(self.q.copy(), self.v.copy())


class DoubleIntegrator:
    """Fully actuated point-mass agents with unit mass."""

    name = "double_integrator"

    def __init__(self, dim: int = 3):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim

    # dimensions ---------------------------------------------------------
    @property
    def config_dim(self) -> int:
        return self.dim

    @property
    def position_dim(self) -> int:
        """Dimension of the translational coordinates coupled by flocking."""
        return self.dim

    @property
    def actuation_dim(self) -> int:
        return self.dim

    @property
    def chart_dim(self) -> int:
        return 2 * self.dim

    # single-agent operations -------------------------------------------
    def descriptor(self) -> DynamicsDescriptor:
        return DynamicsDescriptor(self.dim, 1.0, 1.0, 0.0)

    def mass_matrix(self, q=None) -> np.ndarray:
        return np.eye(self.dim)

    def coriolis_matrix(self, q=None, qdot=None) -> np.ndarray:
        return np.zeros((self.dim, self.dim))

    def gravity_term(self, q=None) -> np.ndarray:
        """Conservative generalized force; identically zero for a free mass."""
        return np.zeros(self.dim)

    def plant_derivative(self, state: AgentState, control) -> AgentState:
        """Time derivative (q̇, M⁻¹(F - C q̇ + g)); reduces to (q̇, F) here."""
        control = np.asarray(control, dtype=float)
        if control.shape != (self.dim,):
            raise ValueError(f"control must have shape ({self.dim},), got {control.shape}")
        return AgentState(q=np.array(state.qdot, dtype=float), qdot=control.copy())

    def random_agent_state(self, rng) -> AgentState:
        return AgentState(q=rng.normal(size=self.dim), qdot=rng.normal(size=self.dim))

    # batched world interface --------------------------------------------
    def new_state(self, q, v) -> PointState:
        q = np.array(q, dtype=float)
        v = np.array(v, dtype=float)
        if q.shape != v.shape or q.ndim != 2 or q.shape[1] != self.dim:
            raise ValueError("q and v must both have shape (n, dim)")
        return PointState(q, v)

    def sample_initial_state(self, n, rng, position_box, velocity_range) -> PointState:
        # draw order (positions, then velocities) is part of the seed contract
        q = rng.uniform(-position_box / 2.0, position_box / 2.0, size=(n, self.dim))
        v = rng.uniform(-velocity_range, velocity_range, size=(n, self.dim))
        return PointState(q, v)

    def agent_count(self, state: PointState) -> int:
        return state.q.shape[0]

    def positions(self, state: PointState) -> np.ndarray:
        return state.q

    def inertial_velocities(self, state: PointState) -> np.ndarray:
        return state.v

    def kinetic_energy(self, state: PointState) -> np.ndarray:
        return 0.5 * np.einsum("nd,nd->n", state.v, state.v)

    def actuation(self, state: PointState, flocking_force: np.ndarray) -> np.ndarray:
        """No feedforward needed: the flocking force is the actuation."""
        return flocking_force

    def actuation_single(self, state: AgentState, flocking_force: np.ndarray) -> np.ndarray:
        return np.asarray(flocking_force, dtype=float).copy()

    def chart_apply(self, base: PointState, xi: np.ndarray) -> PointState:
        d = self.dim
        return PointState(base.q + xi[:, :d], base.v + xi[:, d:])

    def chart_rhs(self, base: PointState, xi: np.ndarray | None, control_fn) -> np.ndarray:
        state = base if xi is None else self.chart_apply(base, xi)
        u = control_fn(state)
        return np.concatenate([state.v, u], axis=1)

    def semi_implicit_step(self, state: PointState, h: float, control_fn) -> PointState:
        u = control_fn(state)
        v_new = state.v + h * u
        return PointState(state.q + h * v_new, v_new)

    def renormalize(self, state: PointState) -> PointState:
        return state

    # serialization -------------------------------------------------------
    def state_columns(self) -> list[str]:
        return [f"q{k}" for k in range(self.dim)] + [f"qdot{k}" for k in range(self.dim)]

    def control_columns(self) -> list[str]:
        return [f"u{k}" for k in range(self.dim)]

    def state_rows(self, state: PointState) -> np.ndarray:
        return np.concatenate([state.q, state.v], axis=1)

    def state_from_rows(self, rows: np.ndarray) -> PointState:
        d = self.dim
        return PointState(rows[:, :d].copy(), rows[:, d : 2 * d].copy())
