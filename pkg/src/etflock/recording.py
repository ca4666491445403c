"""Record container and deterministic file output.

A run produces four files in the output directory:

* ``states.csv``   one row per (sample time, agent) with the model's state
  columns;
* ``events.csv``   one row per broadcast event: time, agent, velocity;
* ``metrics.csv``  one row per sample time: monitor value, cohesion and
  alignment metrics, cumulative events per agent;
* ``summary.json`` final metrics, event statistics and monitor verdicts.

Every floating-point value is serialized with 17 significant digits, so a
float64 round-trips exactly and identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

STATES_FILE = "states.csv"
EVENTS_FILE = "events.csv"
METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.json"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class SimulationRecord:
    """Complete time-aligned output of one run."""

    model_name: str
    n_agents: int
    dt: float
    duration: float
    seed: int
    integrator: str
    record_stride: int
    n_steps: int
    state_columns: list[str]
    control_columns: list[str]
    times: np.ndarray                    # (S,)
    states: np.ndarray                   # (S, n, C)
    controls: np.ndarray                 # (S, n, A)
    event_times: np.ndarray              # (K,)
    event_agents: np.ndarray             # (K,)
    event_velocities: np.ndarray         # (K, d)
    lyapunov: np.ndarray                 # (S,)
    avg_min_neighbor_distance: np.ndarray
    avg_velocity_difference: np.ndarray
    cumulative_events: np.ndarray        # (S, n)
    min_edge_distance: float             # over every step, not just samples
    final_max_velocity_difference: float
    lyapunov_max_step_increase: float = 0.0  # worst single-step increase
    aborted: bool = False
    abort_reason: str | None = None


def build_summary(record: SimulationRecord) -> dict:
    from . import metrics as metrics_mod

    stats = metrics_mod.event_statistics(record)
    tol = metrics_mod.LYAPUNOV_TOL_FACTOR * abs(float(record.lyapunov[0]))
    nonincreasing = record.lyapunov_max_step_increase <= tol
    collision_free = record.min_edge_distance > metrics_mod.COLLISION_CLEARANCE
    post_ratio = stats.post_transient_ratio
    zeno_ok = bool(np.isnan(post_ratio)) or post_ratio < metrics_mod.ZENO_RATIO_LIMIT
    return {
        "model": record.model_name,
        "agents": record.n_agents,
        "dt": record.dt,
        "duration": record.duration,
        "seed": record.seed,
        "integrator": record.integrator,
        "record_stride": record.record_stride,
        "completed_steps": record.n_steps,
        "aborted": record.aborted,
        "abort_reason": record.abort_reason,
        "final": {
            "time": float(record.times[-1]),
            "lyapunov": _none_if_nan(float(record.lyapunov[-1])),
            "avg_min_neighbor_distance": _none_if_nan(
                float(record.avg_min_neighbor_distance[-1])
            ),
            "avg_velocity_difference": float(record.avg_velocity_difference[-1]),
            "max_pairwise_velocity_difference": record.final_max_velocity_difference,
        },
        "events": {
            "total": int(record.event_times.size),
            "per_agent_min": stats.min_count,
            "per_agent_max": stats.max_count,
            "per_agent_mean": stats.mean_count,
            "mean_inter_event_interval": _none_if_nan(stats.mean_inter_event_interval),
            "events_per_step_ratio": stats.events_per_step_ratio,
            "post_transient_ratio": _none_if_nan(stats.post_transient_ratio),
        },
        "monitors": {
            "lyapunov_nonincreasing": bool(nonincreasing),
            "lyapunov_max_step_increase": record.lyapunov_max_step_increase,
            "lyapunov_tolerance": _none_if_nan(tol),
            "collision_free": bool(collision_free),
            "min_edge_distance": _none_if_inf(record.min_edge_distance),
            "zeno_ratio_ok": zeno_ok,
        },
    }


def _none_if_nan(x: float):
    return None if isinstance(x, float) and np.isnan(x) else x


def _none_if_inf(x: float):
    return None if isinstance(x, float) and np.isinf(x) else x


def _write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(rows)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def write_record(record: SimulationRecord, out_dir: str) -> None:
    """Serialize the record into the four output files."""
    os.makedirs(out_dir, exist_ok=True)

    rows = []
    for s in range(record.times.shape[0]):
        t = fmt(record.times[s])
        for a in range(record.n_agents):
            cells = [t, str(a)]
            cells.extend(fmt(x) for x in record.states[s, a])
            rows.append(",".join(cells))
    _write_csv(
        os.path.join(out_dir, STATES_FILE),
        ["time", "agent"] + record.state_columns,
        rows,
    )

    d = record.event_velocities.shape[1] if record.event_velocities.size else 0
    rows = []
    for k in range(record.event_times.shape[0]):
        cells = [fmt(record.event_times[k]), str(int(record.event_agents[k]))]
        cells.extend(fmt(x) for x in record.event_velocities[k])
        rows.append(",".join(cells))
    _write_csv(
        os.path.join(out_dir, EVENTS_FILE),
        ["time", "agent"] + [f"v{k}" for k in range(d)],
        rows,
    )

    rows = []
    for s in range(record.times.shape[0]):
        cells = [
            fmt(record.times[s]),
            fmt(record.lyapunov[s]),
            fmt(record.avg_min_neighbor_distance[s]),
            fmt(record.avg_velocity_difference[s]),
        ]
        cells.extend(str(int(c)) for c in record.cumulative_events[s])
        rows.append(",".join(cells))
    _write_csv(
        os.path.join(out_dir, METRICS_FILE),
        ["time", "lyapunov", "avg_min_neighbor_distance", "avg_velocity_difference"]
        + [f"events_{i}" for i in range(record.n_agents)],
        rows,
    )

    with open(os.path.join(out_dir, SUMMARY_FILE), "w", newline="\n") as fh:
        json.dump(build_summary(record), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_record(out_dir: str) -> SimulationRecord:
    """Rebuild a record from serialized outputs (controls are not persisted)."""
    with open(os.path.join(out_dir, SUMMARY_FILE)) as fh:
        summary = json.load(fh)

    states_raw = np.genfromtxt(
        os.path.join(out_dir, STATES_FILE), delimiter=",", names=True
    )
    state_header = _read_header(os.path.join(out_dir, STATES_FILE))
    state_columns = state_header[2:]
    n = summary["agents"]
    flat = np.stack([states_raw[name] for name in states_raw.dtype.names], axis=1)
    S = flat.shape[0] // n
    times = flat[::n, 0].copy()
    states = flat[:, 2:].reshape(S, n, len(state_columns))

    events_path = os.path.join(out_dir, EVENTS_FILE)
    events_header = _read_header(events_path)
    events_flat = np.genfromtxt(events_path, delimiter=",", skip_header=1)
    events_flat = np.atleast_2d(events_flat)
    if events_flat.size == 0:
        events_flat = np.empty((0, len(events_header)))
    event_times = events_flat[:, 0].copy()
    event_agents = events_flat[:, 1].astype(np.int64)
    event_velocities = events_flat[:, 2:].copy()

    metrics_flat = np.atleast_2d(
        np.genfromtxt(os.path.join(out_dir, METRICS_FILE), delimiter=",", skip_header=1)
    )

    return SimulationRecord(
        model_name=summary["model"],
        n_agents=n,
        dt=summary["dt"],
        duration=summary["duration"],
        seed=summary["seed"],
        integrator=summary["integrator"],
        record_stride=summary["record_stride"],
        n_steps=summary["completed_steps"],
        state_columns=list(state_columns),
        control_columns=[],
        times=times,
        states=states,
        controls=np.empty((S, n, 0)),
        event_times=event_times,
        event_agents=event_agents,
        event_velocities=event_velocities,
        lyapunov=metrics_flat[:, 1].copy(),
        avg_min_neighbor_distance=metrics_flat[:, 2].copy(),
        avg_velocity_difference=metrics_flat[:, 3].copy(),
        cumulative_events=metrics_flat[:, 4 : 4 + n].astype(np.int64),
        min_edge_distance=(
            summary["monitors"]["min_edge_distance"]
            if summary["monitors"]["min_edge_distance"] is not None
            else float("inf")
        ),
        final_max_velocity_difference=summary["final"]["max_pairwise_velocity_difference"],
        lyapunov_max_step_increase=summary["monitors"]["lyapunov_max_step_increase"],
        aborted=summary["aborted"],
        abort_reason=summary["abort_reason"],
    )


def _read_header(path: str) -> list[str]:
    with open(path) as fh:
        return fh.readline().strip().split(",")
