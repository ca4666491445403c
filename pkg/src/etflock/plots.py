"""Static vector-graphics plots generated from serialized records.

Plotting never re-simulates: every function reads only what write_record
emitted. Output is SVG.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .recording import SimulationRecord, load_record

PLOT_KINDS = ("trajectory", "velocity", "events", "metrics")


def _position_columns(record: SimulationRecord) -> list[int]:
    cols = record.state_columns
    if "bx" in cols:
        return [cols.index(c) for c in ("bx", "by", "bz")]
    return [k for k, c in enumerate(cols) if c.startswith("q")]


def _velocity_columns(record: SimulationRecord) -> list[int]:
    cols = record.state_columns
    if "vx" in cols:
        return [cols.index(c) for c in ("vx", "vy", "vz")]
    return [k for k, c in enumerate(cols) if c.startswith("qdot")]


def plot_trajectory(record: SimulationRecord, path: str) -> None:
    pos_cols = _position_columns(record)
    fig = plt.figure(figsize=(6.0, 5.0))
    if len(pos_cols) >= 3:
        ax = fig.add_subplot(projection="3d")
        for a in range(record.n_agents):
            xyz = record.states[:, a, pos_cols[:3]]
            ax.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], linewidth=0.6)
            ax.scatter(*xyz[-1], marker="x", s=18)
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_zlabel("z [m]")
    else:
        ax = fig.add_subplot()
        for a in range(record.n_agents):
            xy = record.states[:, a, pos_cols]
            if xy.shape[1] == 1:
                ax.plot(record.times, xy[:, 0], linewidth=0.6)
                ax.scatter(record.times[-1], xy[-1, 0], marker="x", s=18)
            else:
                ax.plot(xy[:, 0], xy[:, 1], linewidth=0.6)
                ax.scatter(xy[-1, 0], xy[-1, 1], marker="x", s=18)
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
    ax.set_title("Agent trajectories (final states marked x)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_velocity(record: SimulationRecord, path: str) -> None:
    vel_cols = _velocity_columns(record)
    labels = ["x", "y", "z"][: len(vel_cols)]
    fig, axes = plt.subplots(len(vel_cols), 1, figsize=(6.0, 6.0), sharex=True)
    axes = np.atleast_1d(axes)
    for k, (col, lab) in enumerate(zip(vel_cols, labels)):
        for a in range(record.n_agents):
            axes[k].plot(record.times, record.states[:, a, col], linewidth=0.5)
        axes[k].set_ylabel(f"v{lab} [m/s]")
    axes[-1].set_xlabel("time [s]")
    axes[0].set_title("Linear velocities per axis")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_events(record: SimulationRecord, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.scatter(record.event_times, record.event_agents, s=3, marker="|")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("agent")
    ax.set_title("Broadcast events")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_metrics(record: SimulationRecord, path: str) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True)
    ax1.plot(record.times, record.avg_min_neighbor_distance, color="purple",
             label="avg min neighbor distance [m]")
    ax1.plot(record.times, record.avg_velocity_difference, color="orange",
             label="avg velocity difference [m/s]")
    ax1.legend()
    ax1.set_title("Flocking metrics")
    ax2.plot(record.times, record.lyapunov, color="tab:blue")
    ax2.set_ylabel("monitor value [J]")
    ax2.set_xlabel("time [s]")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


_PLOTTERS = {
    "trajectory": (plot_trajectory, "trajectory.svg"),
    "velocity": (plot_velocity, "velocities.svg"),
    "events": (plot_events, "events.svg"),
    "metrics": (plot_metrics, "metrics.svg"),
}


def plot_kind(record_dir: str, kind: str, out_dir: str | None = None) -> str:
    """Render one plot kind from a record directory; returns the output path."""
    if kind not in _PLOTTERS:
        raise ValueError(f"unknown plot kind {kind!r}; available: {PLOT_KINDS}")
    record = load_record(record_dir)
    fn, fname = _PLOTTERS[kind]
    target_dir = out_dir or record_dir
    os.makedirs(target_dir, exist_ok=True)
    path = os.path.join(target_dir, fname)
    fn(record, path)
    return path


def plot_all(record_dir: str, out_dir: str | None = None) -> list[str]:
    return [plot_kind(record_dir, kind, out_dir) for kind in PLOT_KINDS]
