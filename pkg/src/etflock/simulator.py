"""Fixed-step closed-loop simulation of the event-triggered flock.

Each step runs a strict pipeline:

1. controls are functions of the frozen broadcast snapshot (and, inside the
   integrator stages, of the continuously measured positions);
2. all agents integrate one step of dt;
3. every trigger is evaluated against the same frozen snapshot;
4. all fired broadcasts are applied atomically;
5. time advances to (step_index + 1) * dt.

Events are therefore resolved at step boundaries, with at most one step of
latency relative to continuous monitoring. Phases 1 and 3 are computed in
fixed-size agent blocks, so dispatching the blocks to worker threads cannot
change any result bit; runs are reproducible for a given scenario and seed
regardless of the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, wait
from dataclasses import dataclass

import numpy as np

from . import metrics as metrics_mod
from . import trigger as trigger_mod
from .controller import ForceField
from .potential import ZeroSeparation
from .recording import SimulationRecord

INTEGRATORS = ("rk4", "semi-implicit-euler")

# agents per work block in the chunked phases; fixed so that the block
# boundaries (and therefore every floating-point reduction) do not depend on
# the worker count
AGENT_BLOCK = 16


@dataclass(frozen=True)
class SimulationConfig:
    """Time grid and execution knobs of one run."""

    dt: float
    duration: float
    seed: int
    integrator: str = "rk4"
    record_stride: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.duration < self.dt:
            raise ValueError("duration must be at least one step")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        steps = round(self.duration / self.dt)
        if abs(steps * self.dt - self.duration) > 1e-9 * max(1.0, self.duration):
            raise ValueError("duration must be an integer number of steps")

    @property
    def n_steps(self) -> int:
        return round(self.duration / self.dt)


class World:
    """Mutable simulation state: plant, topology, broadcasts, event history."""

    def __init__(self, model, graph, desired_distances, cutoff_radius,
                 inner_gain, mid_gain, alpha, beta, sigma, state):
        n = graph.node_count
        self.model = model
        self.graph = graph
        self.force_field = ForceField(
            graph, desired_distances, cutoff_radius, inner_gain, mid_gain, alpha, beta
        )
        self.alpha = self.force_field.alpha
        self.beta = self.force_field.beta
        self.sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n,)).copy()
        if np.any(self.sigma <= 0.0):
            raise ValueError("sigma must be positive")
        self.state = state
        if model.agent_count(state) != n:
            raise ValueError("state agent count does not match the graph")
        self.abs_incidence = np.abs(graph.incidence)
        self.t = 0.0
        self.step_index = 0
        self._renorm_countdown = 0

        # initial broadcast: every agent fires at t = 0 so each neighbor map
        # is populated before the first control evaluation
        self.broadcasts = model.inertial_velocities(state).copy()
        self.last_event_time = np.zeros(n)
        self.event_counts = np.ones(n, dtype=np.int64)
        self.event_times: list[float] = [0.0] * n
        self.event_agents: list[int] = list(range(n))
        self.event_velocities: list[np.ndarray] = [self.broadcasts[i].copy() for i in range(n)]

        radii = self.force_field.edge_radii(model.positions(state))
        self.min_edge_distance = float(np.min(radii)) if radii.size else np.inf

    @property
    def n(self) -> int:
        return self.graph.node_count

    def edge_radii(self) -> np.ndarray:
        return self.force_field.edge_radii(self.model.positions(self.state))

    def control_snapshot(self) -> np.ndarray:
        """Actuation of every agent at the current state and broadcasts."""
        f = self.force_field.forces(self.model.positions(self.state), self.broadcasts)
        return self.model.actuation(self.state, f)

    def trigger_state_view(self, i: int) -> trigger_mod.TriggerState:
        """Per-agent view of the trigger bookkeeping (copies, not aliases)."""
        view = trigger_mod.TriggerState(
            agent_id=i,
            sigma=float(self.sigma[i]),
            beta=float(self.beta[i]),
            last_broadcast_velocity=self.broadcasts[i].copy(),
            last_event_time=float(self.last_event_time[i]),
            neighbor_broadcasts={
                j: self.broadcasts[j].copy() for j in self.graph.neighbor_lists[i]
            },
        )
        view.event_times = [
            t for t, a in zip(self.event_times, self.event_agents) if a == i
        ]
        return view


def _agent_blocks(n: int) -> list[slice]:
    return [slice(k, min(k + AGENT_BLOCK, n)) for k in range(0, n, AGENT_BLOCK)]


def _run_blocks(work, blocks, executor):
    if executor is None:
        for sl in blocks:
            work(sl)
    else:
        wait([executor.submit(work, sl) for sl in blocks])


def _trigger_thresholds(world: World, executor=None) -> np.ndarray:
    vhat = world.broadcasts
    diffs = vhat[world.graph.tails] - vhat[world.graph.heads]
    disagreement_sq = np.einsum("ed,ed->e", diffs, diffs)
    out = np.empty(world.n)

    def work(sl: slice) -> None:
        out[sl] = trigger_mod.threshold_rows(
            world.sigma[sl], world.beta[sl], vhat, disagreement_sq,
            world.abs_incidence[sl], world.graph.laplacian[sl],
        )

    _run_blocks(work, _agent_blocks(world.n), executor)
    return out


def rk4_step(model, state, h: float, control_fn):
    """Classical RK4 in the model's local chart around the current state.

    For rotation components the chart is the exponential map, so orientations
    stay orthonormal to rounding while the step retains fourth order.
    """
    k1 = model.chart_rhs(state, None, control_fn)
    k2 = model.chart_rhs(state, (0.5 * h) * k1, control_fn)
    k3 = model.chart_rhs(state, (0.5 * h) * k2, control_fn)
    k4 = model.chart_rhs(state, h * k3, control_fn)
    return model.chart_apply(state, (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4))


def step(world: World, config: SimulationConfig, executor=None) -> World:
    """Advance the world by one step of the pipeline described above."""
    vhat = world.broadcasts  # frozen snapshot; mutated only in phase 4
    model = world.model
    ff = world.force_field

    def control_fn(state):
        return model.actuation(state, ff.forces(model.positions(state), vhat))

    if config.integrator == "rk4":
        new_state = rk4_step(model, world.state, config.dt, control_fn)
    else:
        new_state = model.semi_implicit_step(world.state, config.dt, control_fn)

    world._renorm_countdown -= 1
    if world._renorm_countdown <= 0:
        new_state = model.renormalize(new_state)
        world._renorm_countdown = 64

    radii = ff.edge_radii(model.positions(new_state))
    if radii.size:
        world.min_edge_distance = min(world.min_edge_distance, float(np.min(radii)))

    velocities = model.inertial_velocities(new_state)
    errors = np.linalg.norm(world.broadcasts - velocities, axis=1)
    thresholds = _trigger_thresholds(world, executor)
    fired = np.nonzero(errors > thresholds)[0]

    t_next = (world.step_index + 1) * config.dt
    if fired.size:
        world.broadcasts[fired] = velocities[fired]
        world.last_event_time[fired] = t_next
        world.event_counts[fired] += 1
        world.event_times.extend([t_next] * fired.size)
        world.event_agents.extend(int(i) for i in fired)
        world.event_velocities.extend(velocities[i].copy() for i in fired)

    world.state = new_state
    world.step_index += 1
    world.t = t_next
    return world


def run(scenario, seed: int | None = None) -> SimulationRecord:
    """Realize a scenario and simulate it to completion (or collision abort).

    Deterministic: identical scenario and seed produce identical records.
    """
    from .scenario import realize  # deferred to keep the import graph acyclic

    world, config = realize(scenario, seed=seed)
    return run_world(world, config)


def run_world(world: World, config: SimulationConfig) -> SimulationRecord:
    model = world.model
    n = world.n
    n_steps = config.n_steps
    sample_steps = list(range(0, n_steps + 1, config.record_stride))
    if sample_steps[-1] != n_steps:
        sample_steps.append(n_steps)

    S = len(sample_steps)
    state_cols = model.state_columns()
    control_cols = model.control_columns()
    times = np.empty(S)
    states = np.empty((S, n, len(state_cols)))
    controls = np.empty((S, n, len(control_cols)))
    lyapunov = np.empty(S)
    avg_min_dist = np.empty(S)
    avg_vel_diff = np.empty(S)
    cum_events = np.empty((S, n), dtype=np.int64)

    def record_sample(idx: int) -> None:
        times[idx] = world.t
        states[idx] = model.state_rows(world.state)
        controls[idx] = world.control_snapshot()
        lyapunov[idx] = metrics_mod.lyapunov(world)
        avg_min_dist[idx] = metrics_mod.avg_min_neighbor_distance(world)
        avg_vel_diff[idx] = metrics_mod.avg_velocity_difference(world)
        cum_events[idx] = world.event_counts

    # the decrease monitor runs at every step, not just at recorded samples,
    # so the reported worst increase is the true per-step one
    lyap_prev = np.nan
    lyap_max_increase = -np.inf

    executor = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    aborted = False
    abort_reason = None
    sample_idx = 0
    try:
        try:
            record_sample(sample_idx)
        except ZeroSeparation as exc:
            # agents already in contact at the initial instant; keep a bare
            # diagnostic sample so the record is not empty
            aborted = True
            abort_reason = f"collision at t={world.t:.6f} s: {exc}"
            times[0] = world.t
            states[0] = model.state_rows(world.state)
            controls[0] = np.nan
            lyapunov[0] = np.nan
            avg_min_dist[0] = metrics_mod.avg_min_neighbor_distance(world)
            avg_vel_diff[0] = metrics_mod.avg_velocity_difference(world)
            cum_events[0] = world.event_counts
        sample_idx += 1
        if not aborted:
            lyap_prev = lyapunov[0]
            for _ in range(n_steps):
                try:
                    step(world, config, executor)
                except ZeroSeparation as exc:
                    aborted = True
                    abort_reason = f"collision at t={world.t:.6f} s: {exc}"
                    break
                lyap_now = metrics_mod.lyapunov(world)
                lyap_max_increase = max(lyap_max_increase, lyap_now - lyap_prev)
                lyap_prev = lyap_now
                if world.step_index == sample_steps[sample_idx]:
                    record_sample(sample_idx)
                    sample_idx += 1
    finally:
        if executor is not None:
            executor.shutdown()

    velocities = model.inertial_velocities(world.state)
    final_consensus = metrics_mod.max_pairwise_difference(velocities)

    return SimulationRecord(
        model_name=model.name,
        n_agents=n,
        dt=config.dt,
        duration=config.duration,
        seed=config.seed,
        integrator=config.integrator,
        record_stride=config.record_stride,
        n_steps=world.step_index,
        state_columns=state_cols,
        control_columns=control_cols,
        times=times[:sample_idx].copy(),
        states=states[:sample_idx].copy(),
        controls=controls[:sample_idx].copy(),
        event_times=np.array(world.event_times),
        event_agents=np.array(world.event_agents, dtype=np.int64),
        event_velocities=np.array(world.event_velocities),
        lyapunov=lyapunov[:sample_idx].copy(),
        avg_min_neighbor_distance=avg_min_dist[:sample_idx].copy(),
        avg_velocity_difference=avg_vel_diff[:sample_idx].copy(),
        cumulative_events=cum_events[:sample_idx].copy(),
        min_edge_distance=world.min_edge_distance,
        final_max_velocity_difference=final_consensus,
        lyapunov_max_step_increase=(
            float(lyap_max_increase) if np.isfinite(lyap_max_increase) else 0.0
        ),
        aborted=aborted,
        abort_reason=abort_reason,
    )
