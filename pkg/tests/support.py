"""Independent oracles and small builders shared by the test modules.

The oracles deliberately avoid the library's vectorized paths: graph checks
walk edges in plain Python, derivatives come from finite differences, and the
dense-sampling reference simulator below integrates per agent with its own
loop and evaluates the trigger at a much finer cadence than the simulator
under test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

import etflock as ef
from etflock.simulator import SimulationConfig, World


def brute_relative_positions(graph, Q):
    """Per-edge subtraction without the incidence matrix."""
    out = np.empty((graph.edge_count, Q.shape[1]))
    for k, (i, j) in enumerate(graph.edges):
        out[k] = Q[i] - Q[j]
    return out


def bfs_reachable(adjacency):
    n = adjacency.shape[0]
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in range(n):
                if adjacency[u, v] > 0 and v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


def numeric_radial_derivative(params, r, h=None):
    """Central finite difference of the potential value along the radius."""
    if h is None:
        h = 1e-7 * max(r, 1e-2)
    vp = ef.value(params, np.array([r + h]))
    vm = ef.value(params, np.array([r - h]))
    return (vp - vm) / (2.0 * h)


def finite_difference_mass_rate(model, state, eps=1e-6):
    """d/dt of the mass matrix along the unforced flow, by central differences."""
    zero = np.zeros(model.actuation_dim)
    deriv = model.plant_derivative(state, zero)
    q_plus = state.q + eps * deriv.q
    q_minus = state.q - eps * deriv.q
    return (model.mass_matrix(q_plus) - model.mass_matrix(q_minus)) / (2.0 * eps)


def build_di_world(positions, velocities, edges, alpha=1.0, beta=2.0, sigma=0.2,
                   desired=0.5, cutoff=1.0):
    positions = np.asarray(positions, dtype=float)
    model = ef.DoubleIntegrator(dim=positions.shape[1])
    graph = ef.build_graph(positions.shape[0], edges)
    state = model.new_state(positions, velocities)
    world = World(model, graph, desired, cutoff, 20.0, 2.0 * np.pi,
                  alpha, beta, sigma, state)
    return world


@dataclass
class DenseOracleResult:
    """Per-agent lists of (crossing time, committed boundary time).

    Also carries any trigger crossings that dipped back below threshold
    before the next boundary, which would make the step-boundary
    implementation miss an event outright.
    """

    events: list[list[tuple[float, float]]]
    missed_crossings: list[tuple[int, float]]
    fine_dt: float


def dense_trigger_oracle(positions, velocities, edges, dt, duration, fine_factor=100,
                         alpha=1.0, beta=2.0, sigma=0.2, desired=0.5, cutoff=1.0):
    """Dense re-monitoring of the trigger along the committed closed loop.

    Pure per-agent Python: RK4 at dt / fine_factor with broadcasts frozen
    inside each coarse step and committed at coarse boundaries, exactly the
    two-phase semantics of the simulator. The trigger condition is evaluated
    at every fine substep, so each committed event gets the true crossing
    time of its condition; the step-boundary implementation is faithful when
    every crossing is committed at the next boundary (latency below one step)
    and no crossing escapes between boundaries.
    """
    q = np.array(positions, dtype=float)
    v = np.array(velocities, dtype=float)
    n, d = q.shape
    params = ef.PotentialParams(desired, cutoff)
    neighbor = {i: [] for i in range(n)}
    for (a, b) in edges:
        neighbor[a].append(b)
        neighbor[b].append(a)

    vhat = v.copy()
    events: list[list[tuple[float, float]]] = [[] for _ in range(n)]
    missed: list[tuple[int, float]] = []
    h = dt / fine_factor
    coarse_steps = round(duration / dt)

    def accel(qs):
        # force depends on positions and the frozen broadcasts only
        out = np.zeros_like(qs)
        for i in range(n):
            grad = np.zeros(d)
            cons = np.zeros(d)
            for j in neighbor[i]:
                grad += ef.gradient(params, qs[i] - qs[j])
                cons += vhat[i] - vhat[j]
            out[i] = -alpha * grad - beta * cons
        return out

    def condition_positive(i):
        err = float(np.linalg.norm(vhat[i] - v[i]))
        num = 0.0
        acc = np.zeros(d)
        for j in neighbor[i]:
            diff = vhat[i] - vhat[j]
            num += float(diff @ diff)
            acc += diff
        den = beta * float(np.linalg.norm(acc))
        th = 1e-9 if den < 1e-12 else sigma * beta * num / (2.0 * den)
        return err > th

    for k in range(coarse_steps):
        crossing = [None] * n
        for s in range(fine_factor):
            k1q, k1v = v, accel(q)
            k2q, k2v = v + 0.5 * h * k1v, accel(q + 0.5 * h * k1q)
            k3q, k3v = v + 0.5 * h * k2v, accel(q + 0.5 * h * k2q)
            k4q, k4v = v + h * k3v, accel(q + h * k3q)
            q = q + (h / 6.0) * (k1q + 2.0 * (k2q + k3q) + k4q)
            v = v + (h / 6.0) * (k1v + 2.0 * (k2v + k3v) + k4v)
            t_fine = k * dt + (s + 1) * h
            for i in range(n):
                if crossing[i] is None and condition_positive(i):
                    crossing[i] = t_fine
        boundary = (k + 1) * dt
        for i in range(n):
            if condition_positive(i):
                events[i].append((crossing[i] if crossing[i] is not None else boundary,
                                  boundary))
                vhat[i] = v[i].copy()
            elif crossing[i] is not None:
                missed.append((i, crossing[i]))
    return DenseOracleResult(events=events, missed_crossings=missed, fine_dt=h)


def reconstruct_broadcasts(record, t_cut):
    """Broadcast snapshot from the event log: last event at time <= t_cut.

    The simulator's trigger evaluation at a step boundary T uses the snapshot
    of events stamped strictly before T, so callers pass t_cut = T - dt/2 to
    reproduce exactly what the run saw.
    """
    n = record.n_agents
    d = record.event_velocities.shape[1]
    out = np.zeros((n, d))
    for i in range(n):
        mask = (record.event_agents == i) & (record.event_times <= t_cut + 1e-12)
        times = record.event_times[mask]
        k = int(np.argmax(times))
        out[i] = record.event_velocities[mask][k]
    return out


def di_config(dt=1e-3, duration=1.0, seed=0, **kw):
    return SimulationConfig(dt=dt, duration=duration, seed=seed, **kw)
