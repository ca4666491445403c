"""Fully actuated rigid-body underwater vehicle on SE(3).

State per agent: orientation R in SO(3), inertial position b, body angular
velocity Omega, body linear velocity nu. Kinematics and dynamics:

    Ṙ = R hat(Ω)
    ḃ = R ν
    M ν̇ = (M ν) × Ω - (W - B) Rᵀe₃ + u
    J Ω̇ = (J Ω) × Ω + (M ν) × ν - B r̄ × (Rᵀe₃) + ū

with W the weight, B the buoyancy force, and r̄ the body-frame offset from
the center of gravity to the center of buoyancy. The translational mass
matrix M includes added masses, so it is generally not a scalar multiple of
the identity and the gyroscopic terms exchange energy between the rotational
and translational channels (their total power is zero).

The conservative terms derive from the configuration energy

    U(R, b) = B <r̄, Rᵀe₃> + (W - B) b_z

so the plant conserves kinetic plus configuration energy when unforced.

Attitude is not part of the flocking objective; the default actuation cancels
the buoyancy force and the restoring torque and adds rate damping so the
orientation stays bounded while the translational loop does the flocking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import AgentState, DynamicsDescriptor
from .se3 import cross3, dexpinv, exp_so3, hat, orthonormality_defect, project_so3

GRAVITY = 9.81  # m/s^2

E3 = np.array([0.0, 0.0, 1.0])

# ||RᵀR - I||_F above this means the state is no longer a usable rotation
ORTHONORMALITY_TOL = 1e-6
# drift threshold that triggers polar re-projection during integration
REPROJECT_TOL = 1e-9


@dataclass(frozen=True)
class RigidBodyParams:
    """Inertial and hydrostatic parameters of one vehicle.

    mass_matrix: 3x3 translational mass including added masses (kg)
    inertia: 3x3 rotational inertia (kg m^2)
    buoyancy_force: magnitude of the buoyancy force (N)
    weight: gravitational force magnitude m*g (N)
    buoyancy_offset: body-frame vector from center of gravity to center of
        buoyancy (m)
    """

    mass_matrix: np.ndarray
    inertia: np.ndarray
    buoyancy_force: float
    weight: float
    buoyancy_offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mass_matrix", np.array(self.mass_matrix, dtype=float))
        object.__setattr__(self, "inertia", np.array(self.inertia, dtype=float))
        object.__setattr__(
            self, "buoyancy_offset", np.array(self.buoyancy_offset, dtype=float)
        )
        for name in ("mass_matrix", "inertia"):
            m = getattr(self, name)
            if m.shape != (3, 3) or not np.allclose(m, m.T):
                raise ValueError(f"{name} must be a symmetric 3x3 matrix")
            if np.any(np.linalg.eigvalsh(m) <= 0.0):
                raise ValueError(f"{name} must be positive definite")
        if self.buoyancy_offset.shape != (3,):
            raise ValueError("buoyancy_offset must be a 3-vector")


def underwater_paper_params() -> RigidBodyParams:
    """Vehicle parameters of the built-in ``underwater_paper`` preset."""
    mass = 123.8  # kg, including added masses folded into the diagonal below
    return RigidBodyParams(
        mass_matrix=mass * np.eye(3) + np.diag([65.0, 70.0, 75.0]),
        inertia=np.diag([5.46, 5.29, 5.72]),
        buoyancy_force=1215.8,
        weight=mass * GRAVITY,
        buoyancy_offset=np.array([0.0, 0.0, -0.007]),
    )


@dataclass
class RigidBodyState:
    """Batched vehicle state with a leading agent axis."""

    R: np.ndarray   # (n, 3, 3)
    b: np.ndarray   # (n, 3)
    Om: np.ndarray  # (n, 3)
    nu: np.ndarray  # (n, 3)

    def copy(self) -> "RigidBodyState":
        return RigidBodyState(self.R.copy(), self.b.copy(), self.Om.copy(), self.nu.copy())


class UnderwaterVehicle:
    """SE(3) rigid-body plant with buoyancy and added-mass effects."""

    name = "underwater"

    def __init__(self, params: RigidBodyParams | None = None, attitude_gain: float = 5.0):
        self.params = params if params is not None else underwater_paper_params()
        if attitude_gain < 0.0:
            raise ValueError("attitude_gain must be nonnegative")
        self.attitude_gain = attitude_gain
        p = self.params
        self._M = p.mass_matrix
        self._J = p.inertia
        self._Minv = np.linalg.inv(p.mass_matrix)
        self._Jinv = np.linalg.inv(p.inertia)
        self._r = p.buoyancy_offset
        self.net_weight = p.weight - p.buoyancy_force  # (W - B), N
        mass6 = np.zeros((6, 6))
        mass6[:3, :3] = self._J
        mass6[3:, 3:] = self._M
        self._mass6 = mass6

    # dimensions ---------------------------------------------------------
    @property
    def config_dim(self) -> int:
        return 6

    @property
    def position_dim(self) -> int:
        return 3

    @property
    def actuation_dim(self) -> int:
        return 6

    @property
    def chart_dim(self) -> int:
        return 12

    # single-agent operations -------------------------------------------
    def descriptor(self) -> DynamicsDescriptor:
        eigs = np.concatenate(
            [np.linalg.eigvalsh(self._J), np.linalg.eigvalsh(self._M)]
        )
        upper = float(np.max(eigs))
        # block structure of the Coriolis matrix bounds its norm by
        # sqrt(2) * max eigenvalue * ||qdot||
        return DynamicsDescriptor(6, float(np.min(eigs)), upper, float(np.sqrt(2.0) * upper))

    def mass_matrix(self, q=None) -> np.ndarray:
        return self._mass6.copy()

    def coriolis_matrix(self, q, qdot) -> np.ndarray:
        """Coriolis matrix for qdot = (Ω, ν); skew-symmetric by construction."""
        qdot = np.asarray(qdot, dtype=float)
        Om, nu = qdot[:3], qdot[3:]
        C = np.zeros((6, 6))
        C[:3, :3] = -hat(self._J @ Om)
        C[:3, 3:] = -hat(self._M @ nu)
        C[3:, :3] = -hat(self._M @ nu)
        return C

    def gravity_term(self, q) -> np.ndarray:
        """Conservative generalized force (torque, force) in body coordinates.

        Equal to minus the configuration-energy gradient expressed in the same
        coordinates as the generalized velocity (Ω, ν).
        """
        R, _ = self.unpack_configuration(q)
        Re3 = R.T @ E3
        torque = -self.params.buoyancy_force * np.cross(self._r, Re3)
        force = -self.net_weight * Re3
        return np.concatenate([torque, force])

    def potential_energy(self, R, b) -> float | np.ndarray:
        """Configuration energy U(R, b) whose negative gradient drives the plant."""
        R = np.asarray(R, dtype=float)
        b = np.asarray(b, dtype=float)
        Re3 = R[..., 2, :]  # Rᵀ e₃ for each agent
        hydro = self.params.buoyancy_force * (Re3 @ self._r)
        depth = self.net_weight * b[..., 2]
        out = hydro + depth
        return float(out) if out.ndim == 0 else out

    def agent_state(self, R, b, Om, nu) -> AgentState:
        """Pack one agent's (R, b, Ω, ν) into the generic AgentState layout."""
        R = np.asarray(R, dtype=float)
        q = np.concatenate([R.ravel(), np.asarray(b, dtype=float)])
        qdot = np.concatenate([np.asarray(Om, dtype=float), np.asarray(nu, dtype=float)])
        return AgentState(q=q, qdot=qdot)

    def unpack_configuration(self, q) -> tuple[np.ndarray, np.ndarray]:
        q = np.asarray(q, dtype=float)
        if q.shape != (12,):
            raise ValueError(f"configuration must have shape (12,), got {q.shape}")
        return q[:9].reshape(3, 3), q[9:]

    def validate_state(self, state: AgentState) -> None:
        R, _ = self.unpack_configuration(state.q)
        defect = float(orthonormality_defect(R))
        if defect > ORTHONORMALITY_TOL:
            raise ValueError(f"orientation defect {defect:.3e} exceeds {ORTHONORMALITY_TOL:.0e}")

    def plant_derivative(self, state: AgentState, control) -> AgentState:
        """Full state derivative for one agent under the given actuation.

        ``control`` is the 6-vector (torque, body force). The configuration
        derivative stacks Ṙ = R hat(Ω) and ḃ = R ν in the AgentState layout.
        """
        control = np.asarray(control, dtype=float)
        if control.shape != (6,):
            raise ValueError(f"control must have shape (6,), got {control.shape}")
        R, b = self.unpack_configuration(state.q)
        Om, nu = state.qdot[:3].astype(float), state.qdot[3:].astype(float)
        batch = RigidBodyState(R[None], np.asarray(b, float)[None], Om[None], nu[None])
        Om_dot, nu_dot = self._accelerations(batch, control[None])
        R_dot = R @ hat(Om)
        b_dot = R @ nu
        return AgentState(
            q=np.concatenate([R_dot.ravel(), b_dot]),
            qdot=np.concatenate([Om_dot[0], nu_dot[0]]),
        )

    def random_agent_state(self, rng) -> AgentState:
        R = exp_so3(rng.normal(scale=0.8, size=3))
        return self.agent_state(
            R, rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
        )

    # batched world interface --------------------------------------------
    def new_state(self, R, b, Om, nu) -> RigidBodyState:
        return RigidBodyState(
            np.array(R, dtype=float),
            np.array(b, dtype=float),
            np.array(Om, dtype=float),
            np.array(nu, dtype=float),
        )

    def sample_initial_state(self, n, rng, position_box, velocity_range) -> RigidBodyState:
        # upright attitude at rest rotationally; inertial velocity drawn after
        # positions (draw order is part of the seed contract); with R = I the
        # body velocity equals the inertial one
        b = rng.uniform(-position_box / 2.0, position_box / 2.0, size=(n, 3))
        v = rng.uniform(-velocity_range, velocity_range, size=(n, 3))
        R = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
        return RigidBodyState(R, b, np.zeros((n, 3)), v.copy())

    def agent_count(self, state: RigidBodyState) -> int:
        return state.b.shape[0]

    def positions(self, state: RigidBodyState) -> np.ndarray:
        return state.b

    def inertial_velocities(self, state: RigidBodyState) -> np.ndarray:
        return (state.R @ state.nu[:, :, None])[:, :, 0]

    def kinetic_energy(self, state: RigidBodyState) -> np.ndarray:
        rot = np.einsum("nd,nd->n", state.Om, state.Om @ self._J.T)
        tra = np.einsum("nd,nd->n", state.nu, state.nu @ self._M.T)
        return 0.5 * (rot + tra)

    def _accelerations(self, state: RigidBodyState, act: np.ndarray):
        JOm = state.Om @ self._J.T
        Mnu = state.nu @ self._M.T
        Re3 = state.R[:, 2, :]  # Rᵀ e₃ per agent
        torque = cross3(JOm, state.Om)
        torque += cross3(Mnu, state.nu)
        torque -= self.params.buoyancy_force * cross3(self._r, Re3)
        torque += act[:, :3]
        force = cross3(Mnu, state.Om)
        force -= self.net_weight * Re3
        force += act[:, 3:]
        return torque @ self._Jinv.T, force @ self._Minv.T

    def actuation(self, state: RigidBodyState, flocking_force: np.ndarray) -> np.ndarray:
        """Map an inertial flocking force into the (torque, body force) input.

        The translational input cancels the net buoyancy force before adding
        the rotated flocking force; the rotational input cancels the restoring
        torque and damps the body rates.
        """
        Re3 = state.R[:, 2, :]
        out = np.empty((state.Om.shape[0], 6))
        out[:, :3] = self.params.buoyancy_force * cross3(self._r, Re3)
        out[:, :3] -= self.attitude_gain * state.Om
        inertial = self.net_weight * E3 + flocking_force
        out[:, 3:] = (state.R.transpose(0, 2, 1) @ inertial[:, :, None])[:, :, 0]
        return out

    def actuation_single(self, state: AgentState, flocking_force: np.ndarray) -> np.ndarray:
        R, b = self.unpack_configuration(state.q)
        batch = RigidBodyState(
            R[None], np.asarray(b, float)[None],
            state.qdot[:3].astype(float)[None], state.qdot[3:].astype(float)[None],
        )
        return self.actuation(batch, np.asarray(flocking_force, float)[None])[0]

    def chart_apply(self, base: RigidBodyState, xi: np.ndarray) -> RigidBodyState:
        return RigidBodyState(
            base.R @ exp_so3(xi[:, 0:3]),
            base.b + xi[:, 3:6],
            base.Om + xi[:, 6:9],
            base.nu + xi[:, 9:12],
        )

    def chart_rhs(self, base: RigidBodyState, xi: np.ndarray | None, control_fn) -> np.ndarray:
        # xi None means the chart origin (the base state itself); this skips
        # one exponential and one rotation product in the first stage
        if xi is None:
            phi = None
            state = base
        else:
            phi = xi[:, 0:3]
            state = self.chart_apply(base, xi)
        act = control_fn(state)
        Om_dot, nu_dot = self._accelerations(state, act)
        out = np.empty((state.Om.shape[0], 12))
        out[:, 0:3] = state.Om if phi is None else dexpinv(phi, state.Om)
        out[:, 3:6] = (state.R @ state.nu[:, :, None])[:, :, 0]
        out[:, 6:9] = Om_dot
        out[:, 9:12] = nu_dot
        return out

    def semi_implicit_step(self, state: RigidBodyState, h: float, control_fn) -> RigidBodyState:
        act = control_fn(state)
        Om_dot, nu_dot = self._accelerations(state, act)
        Om_new = state.Om + h * Om_dot
        nu_new = state.nu + h * nu_dot
        b_new = state.b + h * (state.R @ nu_new[:, :, None])[:, :, 0]
        R_new = state.R @ exp_so3(h * Om_new)
        return RigidBodyState(R_new, b_new, Om_new, nu_new)

    def renormalize(self, state: RigidBodyState) -> RigidBodyState:
        """Polar-project orientations back onto SO(3) once drift is visible."""
        defect = orthonormality_defect(state.R)
        if float(np.max(defect)) > REPROJECT_TOL:
            state = RigidBodyState(project_so3(state.R), state.b, state.Om, state.nu)
        return state

    # serialization -------------------------------------------------------
    def state_columns(self) -> list[str]:
        cols = ["bx", "by", "bz"]
        cols += [f"r{i}{j}" for i in range(3) for j in range(3)]
        cols += ["omega_x", "omega_y", "omega_z"]
        cols += ["nu_x", "nu_y", "nu_z"]
        cols += ["vx", "vy", "vz"]  # inertial velocity, recorded for inspection
        return cols

    def control_columns(self) -> list[str]:
        return ["tau_x", "tau_y", "tau_z", "fx", "fy", "fz"]

    def state_rows(self, state: RigidBodyState) -> np.ndarray:
        n = state.b.shape[0]
        v = self.inertial_velocities(state)
        return np.concatenate(
            [state.b, state.R.reshape(n, 9), state.Om, state.nu, v], axis=1
        )

    def state_from_rows(self, rows: np.ndarray) -> RigidBodyState:
        n = rows.shape[0]
        return RigidBodyState(
            rows[:, 3:12].reshape(n, 3, 3).copy(),
            rows[:, 0:3].copy(),
            rows[:, 12:15].copy(),
            rows[:, 15:18].copy(),
        )
