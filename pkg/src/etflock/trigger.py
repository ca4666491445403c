"""Per-agent event triggering on the broadcast-velocity error.

An agent rebroadcasts its velocity when the norm of the error between its
last broadcast and its current velocity exceeds a threshold built from the
broadcast disagreements with its neighbors:

    threshold = sigma * sum_j beta * ||vhat_i - vhat_j||^2
                ------------------------------------------
                  2 * || sum_j beta * (vhat_i - vhat_j) ||

When the denominator degenerates (broadcasts agree, or the disagreement
vectors cancel) the ratio is undefined; the policy then sets the threshold to
a small floor so the agent fires only on a measurably nonzero error instead
of chattering or dividing by zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# treat the broadcast-disagreement sum as zero below this (velocity units)
DENOMINATOR_EPS = 1e-12
# fallback threshold in the degenerate case (velocity units)
THRESHOLD_FLOOR = 1e-9


class NonmonotoneTime(ValueError):
    """An event was requested at or before the agent's previous event."""


@dataclass(frozen=True)
class BroadcastMessage:
    """Velocity sample sent to every neighbor when an event fires."""

    agent: int
    time: float
    velocity: np.ndarray


@dataclass
class TriggerState:
    """Event-condition bookkeeping for one agent.

    ``neighbor_broadcasts`` maps neighbor id to the latest velocity received
    from it. ``event_times`` is strictly increasing.
    """

    agent_id: int
    sigma: float
    beta: float
    last_broadcast_velocity: np.ndarray
    last_event_time: float = -math.inf
    neighbor_broadcasts: dict[int, np.ndarray] = field(default_factory=dict)
    event_times: list[float] = field(default_factory=list)


def error(state: TriggerState, current_velocity) -> np.ndarray:
    """Broadcast-minus-current velocity error; zero right after an event."""
    return state.last_broadcast_velocity - np.asarray(current_velocity, dtype=float)


def threshold(state: TriggerState) -> float:
    """Event threshold from the current broadcast snapshot.

    Returns THRESHOLD_FLOOR when the agent has no neighbors or the summed
    disagreement vector is numerically zero.
    """
    if not state.neighbor_broadcasts:
        return THRESHOLD_FLOOR
    numerator = 0.0
    summed = np.zeros_like(state.last_broadcast_velocity)
    for j in sorted(state.neighbor_broadcasts):
        diff = state.last_broadcast_velocity - state.neighbor_broadcasts[j]
        numerator += float(diff @ diff)
        summed += diff
    denominator_core = state.beta * float(np.linalg.norm(summed))
    if denominator_core < DENOMINATOR_EPS:
        return THRESHOLD_FLOOR
    return state.sigma * state.beta * numerator / (2.0 * denominator_core)


def should_fire(state: TriggerState, current_velocity) -> bool:
    """Strict comparison: fire only when the error norm exceeds the threshold."""
    return float(np.linalg.norm(error(state, current_velocity))) > threshold(state)


def fire(state: TriggerState, t: float, current_velocity) -> BroadcastMessage:
    """Record an event at time t and produce the message for the neighbors.

    Mutates the state: the broadcast velocity snaps to the current one (so the
    error becomes zero) and t is appended to the event history.
    """
    if t <= state.last_event_time:
        raise NonmonotoneTime(
            f"agent {state.agent_id}: event at {t} not after {state.last_event_time}"
        )
    velocity = np.array(current_velocity, dtype=float)
    state.last_broadcast_velocity = velocity.copy()
    state.last_event_time = t
    state.event_times.append(t)
    return BroadcastMessage(agent=state.agent_id, time=t, velocity=velocity)


def deliver(state: TriggerState, message: BroadcastMessage) -> None:
    """Store a neighbor's broadcast (instantaneous, lossless channel)."""
    state.neighbor_broadcasts[message.agent] = np.array(message.velocity, dtype=float)


def threshold_rows(sigma, beta, vhat, disagreement_sq, abs_incidence_rows, laplacian_rows):
    """Vectorized thresholds for a block of agents.

    ``disagreement_sq`` holds ||vhat_tail - vhat_head||^2 per edge;
    ``abs_incidence_rows`` and ``laplacian_rows`` are the corresponding row
    blocks of |B| and of the Laplacian. Semantics match :func:`threshold`
    agent by agent.
    """
    numerator = sigma * beta * (abs_incidence_rows @ disagreement_sq)
    summed = laplacian_rows @ vhat
    denominator_core = beta * np.sqrt(np.einsum("nd,nd->n", summed, summed))
    out = np.full(numerator.shape, THRESHOLD_FLOOR)
    ok = denominator_core >= DENOMINATOR_EPS
    np.divide(numerator, 2.0 * denominator_core, out=out, where=ok)
    return out
