"""Scenario files: schema, validation, presets, and world assembly.

A scenario is a JSON document with sections {graph, dynamics, gains,
potential, trigger, simulation, output}. The graph is either an explicit edge
list or a seeded random specification; when the random specification carries
no seed of its own it follows the simulation seed, so a seed sweep varies the
topology together with the initial conditions.

Gain bounds required for stable flocking (positive alpha and beta, sigma
strictly between 0 and 1) are enforced at load time; an explicit override
flag relaxes them for experimentation.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .dynamics import DoubleIntegrator
from .graph import CommGraph, build_graph, random_connected_graph
from .simulator import SimulationConfig, World
from .underwater import RigidBodyParams, UnderwaterVehicle, underwater_paper_params

PRESET_NAMES = ("underwater_paper", "double_integrator_small")

OUTPUT_DIR_ENV = "ETFLOCK_OUT_DIR"


class ScenarioError(ValueError):
    """Scenario failed validation; the message lists every problem found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class Scenario:
    """Validated scenario ready to be realized into a world."""

    graph_nodes: int
    graph_edges: list[tuple[int, int]] | None
    graph_random: dict | None          # {"edge_probability": p, "seed": optional}
    model: str
    model_dim: int
    model_params: RigidBodyParams | None
    attitude_gain: float
    alpha: Any
    beta: Any
    sigma: Any
    desired_distance: Any
    cutoff_radius: float
    inner_gain: float
    mid_gain: float
    config: SimulationConfig
    position_box: float
    velocity_range: float
    output_dir: str | None
    name: str | None = None
    allow_unstable: bool = field(default=False, repr=False)


def _get(d: dict, section: str, key: str, default=None, required=False, problems=None):
    sec = d.get(section)
    if not isinstance(sec, dict):
        if required and problems is not None:
            problems.append(f"missing section '{section}'")
        return default
    if key not in sec:
        if required and problems is not None:
            problems.append(f"missing '{section}.{key}'")
        return default
    return sec[key]


def scenario_from_dict(data: dict, allow_unstable: bool = False) -> Scenario:
    """Parse and validate a scenario document; raises ScenarioError on problems."""
    problems: list[str] = []

    nodes = _get(data, "graph", "nodes", required=True, problems=problems)
    edges = _get(data, "graph", "edges")
    random_spec = _get(data, "graph", "random")
    if nodes is not None and (not isinstance(nodes, int) or nodes < 1):
        problems.append(f"graph.nodes must be a positive integer, got {nodes!r}")
    if edges is None and random_spec is None:
        problems.append("graph needs either 'edges' or 'random'")
    if edges is not None and random_spec is not None:
        problems.append("graph must not define both 'edges' and 'random'")
    if random_spec is not None:
        p = random_spec.get("edge_probability")
        if not isinstance(p, (int, float)) or not 0.0 < p <= 1.0:
            problems.append(f"graph.random.edge_probability must lie in (0, 1], got {p!r}")

    model = _get(data, "dynamics", "model", required=True, problems=problems)
    model_dim = 3
    model_params = None
    attitude_gain = 5.0
    if model == "double_integrator":
        model_dim = _get(data, "dynamics", "dim", default=3)
        if not isinstance(model_dim, int) or model_dim < 1:
            problems.append(f"dynamics.dim must be a positive integer, got {model_dim!r}")
            model_dim = 3
    elif model == "underwater":
        preset_name = _get(data, "dynamics", "preset")
        params_spec = _get(data, "dynamics", "params")
        attitude_gain = float(_get(data, "dynamics", "attitude_gain", default=5.0))
        if preset_name is not None and preset_name != "underwater_paper":
            problems.append(f"unknown dynamics preset {preset_name!r}")
        if params_spec is not None:
            try:
                model_params = RigidBodyParams(
                    mass_matrix=np.array(params_spec["mass_matrix"], dtype=float),
                    inertia=np.array(params_spec["inertia"], dtype=float),
                    buoyancy_force=float(params_spec["buoyancy_force"]),
                    weight=float(params_spec["weight"]),
                    buoyancy_offset=np.array(params_spec["buoyancy_offset"], dtype=float),
                )
            except (KeyError, ValueError, TypeError) as exc:
                problems.append(f"dynamics.params invalid: {exc}")
        else:
            model_params = underwater_paper_params()
    elif model is not None:
        problems.append(f"unknown dynamics.model {model!r}")

    alpha = _get(data, "gains", "alpha", default=1.0)
    beta = _get(data, "gains", "beta", required=True, problems=problems)
    sigma = _get(data, "trigger", "sigma", required=True, problems=problems)
    if not allow_unstable:
        if beta is not None and np.any(np.asarray(beta, dtype=float) <= 0.0):
            problems.append(f"gains.beta must be positive (stable-flocking bound), got {beta!r}")
        if alpha is not None and np.any(np.asarray(alpha, dtype=float) <= 0.0):
            problems.append(f"gains.alpha must be positive, got {alpha!r}")
        if sigma is not None:
            s = np.asarray(sigma, dtype=float)
            if np.any(s <= 0.0) or np.any(s >= 1.0):
                problems.append(
                    f"trigger.sigma must satisfy 0 < sigma < 1 (stable-flocking bound), got {sigma!r}"
                )

    desired = _get(data, "potential", "desired_distance", required=True, problems=problems)
    cutoff = _get(data, "potential", "cutoff_radius", required=True, problems=problems)
    inner_gain = float(_get(data, "potential", "inner_gain", default=20.0))
    mid_gain = float(_get(data, "potential", "mid_gain", default=2.0 * math.pi))
    if desired is not None and cutoff is not None:
        d_arr = np.asarray(desired, dtype=float)
        if np.any(d_arr <= 0.0) or np.any(d_arr >= float(cutoff)):
            problems.append(
                "potential.desired_distance must lie in (0, cutoff_radius), got "
                f"{desired!r} with cutoff {cutoff!r}"
            )
    if inner_gain <= 0.0 or mid_gain <= 0.0:
        problems.append("potential gains must be positive")

    config = None
    dt_raw = _get(data, "simulation", "dt", required=True, problems=problems)
    duration_raw = _get(data, "simulation", "duration", required=True, problems=problems)
    try:
        config = SimulationConfig(
            dt=float(dt_raw if dt_raw is not None else 1e-3),
            duration=float(duration_raw if duration_raw is not None else 1.0),
            seed=int(_get(data, "simulation", "seed", default=0)),
            integrator=str(_get(data, "simulation", "integrator", default="rk4")),
            record_stride=int(_get(data, "simulation", "record_stride", default=1)),
            workers=int(_get(data, "simulation", "workers", default=1)),
        )
    except (TypeError, ValueError) as exc:
        problems.append(f"simulation section invalid: {exc}")

    initial = _get(data, "simulation", "initial", default={}) or {}
    position_box = float(initial.get("position_box", 5.0))
    velocity_range = float(initial.get("velocity_range", 0.5))
    if position_box <= 0.0 or velocity_range < 0.0:
        problems.append("simulation.initial ranges must be positive")

    output_dir = _get(data, "output", "directory")

    if problems:
        raise ScenarioError(problems)

    return Scenario(
        graph_nodes=nodes,
        graph_edges=[(int(a), int(b)) for a, b in edges] if edges is not None else None,
        graph_random=dict(random_spec) if random_spec is not None else None,
        model=model,
        model_dim=model_dim,
        model_params=model_params,
        attitude_gain=attitude_gain,
        alpha=alpha,
        beta=beta,
        sigma=sigma,
        desired_distance=desired,
        cutoff_radius=float(cutoff),
        inner_gain=inner_gain,
        mid_gain=mid_gain,
        config=config,
        position_box=position_box,
        velocity_range=velocity_range,
        output_dir=output_dir,
        name=data.get("name"),
        allow_unstable=allow_unstable,
    )


def scenario_to_dict(s: Scenario) -> dict:
    graph: dict[str, Any] = {"nodes": s.graph_nodes}
    if s.graph_edges is not None:
        graph["edges"] = [list(e) for e in s.graph_edges]
    else:
        graph["random"] = dict(s.graph_random)

    dynamics: dict[str, Any] = {"model": s.model}
    if s.model == "double_integrator":
        dynamics["dim"] = s.model_dim
    else:
        p = s.model_params
        dynamics["params"] = {
            "mass_matrix": p.mass_matrix.tolist(),
            "inertia": p.inertia.tolist(),
            "buoyancy_force": p.buoyancy_force,
            "weight": p.weight,
            "buoyancy_offset": p.buoyancy_offset.tolist(),
        }
        dynamics["attitude_gain"] = s.attitude_gain

    out: dict[str, Any] = {
        "graph": graph,
        "dynamics": dynamics,
        "gains": {"alpha": _plain(s.alpha), "beta": _plain(s.beta)},
        "potential": {
            "desired_distance": _plain(s.desired_distance),
            "cutoff_radius": s.cutoff_radius,
            "inner_gain": s.inner_gain,
            "mid_gain": s.mid_gain,
        },
        "trigger": {"sigma": _plain(s.sigma)},
        "simulation": {
            "dt": s.config.dt,
            "duration": s.config.duration,
            "seed": s.config.seed,
            "integrator": s.config.integrator,
            "record_stride": s.config.record_stride,
            "workers": s.config.workers,
            "initial": {
                "position_box": s.position_box,
                "velocity_range": s.velocity_range,
            },
        },
    }
    if s.name:
        out["name"] = s.name
    if s.output_dir:
        out["output"] = {"directory": s.output_dir}
    return out


def _plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    return x


def load_scenario(path: str, allow_unstable: bool = False) -> Scenario:
    with open(path) as fh:
        data = json.load(fh)
    return scenario_from_dict(data, allow_unstable=allow_unstable)


def save_scenario(s: Scenario, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2, sort_keys=True)
        fh.write("\n")


def preset(name: str) -> Scenario:
    """Built-in scenarios; see PRESET_NAMES."""
    if name == "underwater_paper":
        return scenario_from_dict(
            {
                "name": "underwater_paper",
                "graph": {"nodes": 50, "random": {"edge_probability": 0.12}},
                "dynamics": {"model": "underwater", "preset": "underwater_paper"},
                "gains": {"alpha": 1.0, "beta": 10.0},
                "potential": {
                    "desired_distance": 0.5,
                    "cutoff_radius": 1.0,
                    "inner_gain": 20.0,
                    "mid_gain": 2.0 * math.pi,
                },
                "trigger": {"sigma": 0.01},
                "simulation": {
                    "dt": 1e-3,
                    "duration": 200.0,
                    "seed": 1,
                    "integrator": "rk4",
                    "record_stride": 100,
                    "initial": {"position_box": 5.0, "velocity_range": 0.5},
                },
            }
        )
    if name == "double_integrator_small":
        return scenario_from_dict(
            {
                "name": "double_integrator_small",
                "graph": {"nodes": 10, "random": {"edge_probability": 0.5}},
                "dynamics": {"model": "double_integrator", "dim": 3},
                "gains": {"alpha": 1.0, "beta": 2.0},
                "potential": {"desired_distance": 0.5, "cutoff_radius": 1.0},
                "trigger": {"sigma": 0.2},
                "simulation": {
                    "dt": 1e-3,
                    "duration": 15.0,
                    "seed": 1,
                    "integrator": "rk4",
                    "record_stride": 10,
                    "initial": {"position_box": 3.0, "velocity_range": 0.5},
                },
            }
        )
    raise ValueError(f"unknown preset {name!r}; available: {PRESET_NAMES}")


def build_scenario_graph(s: Scenario, seed: int) -> CommGraph:
    if s.graph_edges is not None:
        return build_graph(s.graph_nodes, s.graph_edges)
    spec = s.graph_random
    graph_seed = spec.get("seed", None)
    if graph_seed is None:
        graph_seed = seed
    return random_connected_graph(s.graph_nodes, float(spec["edge_probability"]), int(graph_seed))


def build_model(s: Scenario):
    if s.model == "double_integrator":
        return DoubleIntegrator(dim=s.model_dim)
    return UnderwaterVehicle(params=s.model_params, attitude_gain=s.attitude_gain)


def realize(s: Scenario, seed: int | None = None) -> tuple[World, SimulationConfig]:
    """Build the world a scenario describes; ``seed`` overrides the scenario's."""
    config = s.config if seed is None else replace(s.config, seed=int(seed))
    graph = build_scenario_graph(s, config.seed)

    desired = np.asarray(s.desired_distance, dtype=float)
    if desired.ndim == 1 and desired.size != graph.edge_count:
        raise ScenarioError(
            [
                f"per-edge desired_distance has {desired.size} entries but the "
                f"graph has {graph.edge_count} edges"
            ]
        )

    model = build_model(s)
    rng = np.random.default_rng(config.seed)
    state = model.sample_initial_state(
        graph.node_count, rng, s.position_box, s.velocity_range
    )
    world = World(
        model=model,
        graph=graph,
        desired_distances=desired,
        cutoff_radius=s.cutoff_radius,
        inner_gain=s.inner_gain,
        mid_gain=s.mid_gain,
        alpha=np.asarray(s.alpha, dtype=float),
        beta=np.asarray(s.beta, dtype=float),
        sigma=np.asarray(s.sigma, dtype=float),
        state=state,
    )
    return world, config


def default_output_dir(s: Scenario, override: str | None = None) -> str:
    if override:
        return override
    if s.output_dir:
        return s.output_dir
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return env
    return "out"
