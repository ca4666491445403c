"""Energy-style monitor and flocking-quality metrics.

The monitored function adds each agent's kinetic energy to the pair
potentials counted once per edge, weighted by the mean of the two endpoint
cohesion gains. With that weighting the gradient-force power cancels the
potential rate exactly, so along the closed loop the derivative reduces to
the alignment term and the monitor is non-increasing (up to the one-step
trigger latency). Counting every edge from both endpoints instead would
double the potential rate, and a pair climbing its repulsive wall can then
push the sum upward even with all trigger errors inside their thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# monitor defaults reported in run summaries
LYAPUNOV_TOL_FACTOR = 1e-6     # allowed per-sample increase, relative to V(0)
COLLISION_CLEARANCE = 0.05      # m, minimum healthy edge separation
ZENO_TRANSIENT = 5.0            # s, initial window excluded from the rate check
ZENO_RATIO_LIMIT = 0.01         # events per agent-step after the transient


def lyapunov(world) -> float:
    """Gain-weighted potential plus kinetic energy of the whole flock."""
    values = world.force_field.potential_values(world.model.positions(world.state))
    g = world.graph
    edge_gain = 0.5 * (world.alpha[g.tails] + world.alpha[g.heads])
    potential = float(np.sum(values * edge_gain))
    kinetic = float(np.sum(world.model.kinetic_energy(world.state)))
    return potential + kinetic


def avg_min_neighbor_distance(world) -> float:
    """Mean over agents of the distance to their nearest neighbor (cohesion)."""
    r = world.edge_radii()
    if r.size == 0:
        return float("nan")
    closest = np.full(world.n, np.inf)
    np.minimum.at(closest, world.graph.tails, r)
    np.minimum.at(closest, world.graph.heads, r)
    return float(np.mean(closest[np.isfinite(closest)]))


def avg_velocity_difference(world) -> float:
    """Mean over edges of the inertial velocity difference (alignment)."""
    g = world.graph
    if g.edge_count == 0:
        return 0.0
    v = world.model.inertial_velocities(world.state)
    diffs = v[g.tails] - v[g.heads]
    return float(np.mean(np.linalg.norm(diffs, axis=1)))


def max_pairwise_difference(vectors: np.ndarray) -> float:
    """Largest pairwise norm difference over all agent pairs (not just edges)."""
    n = vectors.shape[0]
    if n < 2:
        return 0.0
    diffs = vectors[:, None, :] - vectors[None, :, :]
    return float(np.max(np.linalg.norm(diffs, axis=2)))


@dataclass(frozen=True)
class EventStatistics:
    """Per-agent and aggregate communication statistics of one run."""

    counts: np.ndarray                 # events per agent, t = 0 included
    min_count: int
    max_count: int
    mean_count: float
    mean_inter_event_interval: float   # pooled over all consecutive gaps, s
    per_agent_mean_interval: np.ndarray  # nan where an agent has < 2 events
    events_per_step_ratio: float       # events / (agents * steps), t = 0 excluded
    post_transient_ratio: float        # same, restricted to t > transient


def event_statistics(record, transient: float = ZENO_TRANSIENT) -> EventStatistics:
    """Summarize the event log of a completed record."""
    n = record.n_agents
    counts = np.bincount(record.event_agents, minlength=n).astype(np.int64)

    per_agent_mean = np.full(n, np.nan)
    gaps_total = 0.0
    gaps_count = 0
    for i in range(n):
        t_i = record.event_times[record.event_agents == i]
        if t_i.size >= 2:
            gaps = np.diff(np.sort(t_i))
            per_agent_mean[i] = float(np.mean(gaps))
            gaps_total += float(np.sum(gaps))
            gaps_count += gaps.size
    pooled = gaps_total / gaps_count if gaps_count else float("nan")

    steps = max(record.n_steps, 1)
    post_init = record.event_times > 0.0
    ratio = float(np.count_nonzero(post_init)) / (n * steps)
    steps_after = steps - round(transient / record.dt)
    if steps_after > 0:
        late = record.event_times > transient
        post_ratio = float(np.count_nonzero(late)) / (n * steps_after)
    else:
        post_ratio = float("nan")

    return EventStatistics(
        counts=counts,
        min_count=int(counts.min()),
        max_count=int(counts.max()),
        mean_count=float(counts.mean()),
        mean_inter_event_interval=pooled,
        per_agent_mean_interval=per_agent_mean,
        events_per_step_ratio=ratio,
        post_transient_ratio=post_ratio,
    )


def lyapunov_monitor(record) -> dict:
    """Check the recorded trace for monotone decrease within tolerance."""
    v = record.lyapunov
    if v.size < 2:
        return {"nonincreasing": True, "max_step_increase": 0.0, "tolerance": 0.0}
    increases = np.diff(v)
    tol = LYAPUNOV_TOL_FACTOR * abs(float(v[0]))
    return {
        "nonincreasing": bool(np.max(increases) <= tol),
        "max_step_increase": float(np.max(increases)),
        "tolerance": tol,
    }
