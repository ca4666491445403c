import json
import math
import os

import pytest

import etflock as ef
from etflock import cli, plots, scenario


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def small_scenario_dict(seed=3, duration=2.0, workers=1):
    return {
        "graph": {"nodes": 6, "random": {"edge_probability": 0.6}},
        "dynamics": {"model": "double_integrator", "dim": 3},
        "gains": {"alpha": 1.0, "beta": 2.0},
        "potential": {"desired_distance": 0.5, "cutoff_radius": 1.0},
        "trigger": {"sigma": 0.2},
        "simulation": {
            "dt": 1e-3,
            "duration": duration,
            "seed": seed,
            "record_stride": 100,
            "workers": workers,
            "initial": {"position_box": 2.5, "velocity_range": 0.5},
        },
    }


def write_scenario(tmp_path, data, name="scn.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


# --- presets and validation ----------------------------------------------


def test_reference_preset_fields():
    scn = ef.preset("underwater_paper")
    assert scn.graph_nodes == 50
    assert scn.model == "underwater"
    assert scn.beta == 10.0
    assert scn.sigma == 0.01
    assert scn.desired_distance == 0.5
    assert scn.cutoff_radius == 1.0
    assert scn.inner_gain == 20.0
    assert abs(scn.mid_gain - 2.0 * math.pi) < 1e-15
    assert scn.config.duration == 200.0
    assert scn.config.dt == 1e-3
    assert scn.model_params.buoyancy_force == 1215.8


def test_preset_round_trips_through_validation(tmp_path):
    for name in scenario.PRESET_NAMES:
        path = tmp_path / f"{name}.json"
        ef.save_scenario(ef.preset(name), str(path))
        loaded = ef.load_scenario(str(path))
        assert loaded.graph_nodes == ef.preset(name).graph_nodes


def test_sigma_bound_enforced(tmp_path):
    data = small_scenario_dict()
    data["trigger"]["sigma"] = 1.5
    with pytest.raises(ef.ScenarioError, match="sigma"):
        scenario.scenario_from_dict(data)
    # override flag admits it for experimentation
    scn = scenario.scenario_from_dict(data, allow_unstable=True)
    assert scn.sigma == 1.5


def test_zero_duration_rejected():
    data = small_scenario_dict()
    data["simulation"]["duration"] = 0.0
    with pytest.raises(ef.ScenarioError, match="duration"):
        scenario.scenario_from_dict(data)


def test_validation_collects_multiple_problems():
    data = small_scenario_dict()
    data["trigger"]["sigma"] = -1.0
    data["gains"]["beta"] = 0.0
    data["dynamics"]["model"] = "hovercraft"
    with pytest.raises(ef.ScenarioError) as exc:
        scenario.scenario_from_dict(data)
    assert len(exc.value.problems) >= 3


def test_graph_seed_follows_simulation_seed():
    data = small_scenario_dict(seed=5)
    scn = scenario.scenario_from_dict(data)
    g5 = scenario.build_scenario_graph(scn, 5)
    g6 = scenario.build_scenario_graph(scn, 6)
    assert g5.edges == scenario.build_scenario_graph(scn, 5).edges
    assert g5.edges != g6.edges
    # explicit graph seed pins the topology
    data["graph"]["random"]["seed"] = 17
    scn = scenario.scenario_from_dict(data)
    assert (
        scenario.build_scenario_graph(scn, 5).edges
        == scenario.build_scenario_graph(scn, 6).edges
    )


def test_per_edge_desired_distance_round_trip(tmp_path):
    data = small_scenario_dict()
    data["graph"] = {"nodes": 3, "edges": [[0, 1], [1, 2]]}
    data["potential"]["desired_distance"] = [0.4, 0.6]
    scn = scenario.scenario_from_dict(data)
    world, _ = scenario.realize(scn)
    assert world.force_field.d_edges.tolist() == [0.4, 0.6]


def test_per_edge_distance_count_mismatch_rejected():
    data = small_scenario_dict()
    data["graph"] = {"nodes": 3, "edges": [[0, 1], [1, 2]]}
    data["potential"]["desired_distance"] = [0.4, 0.6, 0.7]
    scn = scenario.scenario_from_dict(data)
    with pytest.raises(ef.ScenarioError, match="per-edge"):
        scenario.realize(scn)


# --- CLI ------------------------------------------------------------------


def test_cli_validate_ok(tmp_path, capsys):
    path = write_scenario(tmp_path, small_scenario_dict())
    assert cli.main(["validate", "--scenario", path]) == 0
    assert "ok" in capsys.readouterr().out


def test_cli_validate_rejects_bad_sigma(tmp_path, capsys):
    data = small_scenario_dict()
    data["trigger"]["sigma"] = 1.5
    path = write_scenario(tmp_path, data)
    assert cli.main(["validate", "--scenario", path]) == 1
    err = capsys.readouterr().err
    assert "sigma" in err and "0 < sigma < 1" in err


def test_cli_preset_then_validate(tmp_path):
    out = str(tmp_path / "preset.json")
    assert cli.main(["preset", "--name", "underwater_paper", "--out", out]) == 0
    assert cli.main(["validate", "--scenario", out]) == 0


def test_cli_run_writes_outputs_and_is_byte_deterministic(tmp_path):
    path = write_scenario(tmp_path, small_scenario_dict())
    out1 = str(tmp_path / "run1")
    out2 = str(tmp_path / "run2")
    assert cli.main(["run", "--scenario", path, "--out", out1]) == 0
    assert cli.main(["run", "--scenario", path, "--out", out2]) == 0
    for fname in ("states.csv", "events.csv", "metrics.csv", "summary.json"):
        b1 = read_bytes(os.path.join(out1, fname))
        assert b1 == read_bytes(os.path.join(out2, fname))
        assert len(b1) > 0


def test_cli_run_parallel_workers_byte_identical(tmp_path):
    p1 = write_scenario(tmp_path, small_scenario_dict(workers=1), "w1.json")
    p4 = write_scenario(tmp_path, small_scenario_dict(workers=4), "w4.json")
    out1 = str(tmp_path / "serial")
    out4 = str(tmp_path / "threaded")
    assert cli.main(["run", "--scenario", p1, "--out", out1]) == 0
    assert cli.main(["run", "--scenario", p4, "--out", out4]) == 0
    for fname in ("states.csv", "events.csv", "metrics.csv"):
        assert read_bytes(os.path.join(out1, fname)) == read_bytes(
            os.path.join(out4, fname)
        )


def test_cli_seed_override_changes_outputs(tmp_path):
    path = write_scenario(tmp_path, small_scenario_dict())
    out1 = str(tmp_path / "a")
    out2 = str(tmp_path / "b")
    assert cli.main(["run", "--scenario", path, "--out", out1]) == 0
    assert cli.main(["run", "--scenario", path, "--seed", "99", "--out", out2]) == 0
    assert read_bytes(os.path.join(out1, "states.csv")) != read_bytes(
        os.path.join(out2, "states.csv")
    )


def test_cli_run_collision_exit_code(tmp_path):
    data = small_scenario_dict()
    data["graph"] = {"nodes": 2, "edges": [[0, 1]]}
    # overlapping start positions trip the contact guard immediately
    data["simulation"]["initial"] = {"position_box": 1e-15, "velocity_range": 0.0}
    path = write_scenario(tmp_path, data)
    out = str(tmp_path / "crash")
    assert cli.main(["run", "--scenario", path, "--out", out]) == 2
    with open(os.path.join(out, "summary.json")) as fh:
        summary = json.load(fh)
    assert summary["aborted"] is True
    assert "collision" in summary["abort_reason"]


def test_cli_plot_reads_only_records(tmp_path):
    path = write_scenario(tmp_path, small_scenario_dict())
    out = str(tmp_path / "rec")
    assert cli.main(["run", "--scenario", path, "--out", out]) == 0
    os.remove(path)  # plots must not need the scenario file
    for kind in plots.PLOT_KINDS:
        assert cli.main(["plot", "--record", out, "--kind", kind]) == 0
    for fname in ("trajectory.svg", "velocities.svg", "events.svg", "metrics.svg"):
        assert os.path.getsize(os.path.join(out, fname)) > 0


def test_cli_plot_separate_out_dir(tmp_path):
    path = write_scenario(tmp_path, small_scenario_dict())
    rec = str(tmp_path / "rec")
    assert cli.main(["run", "--scenario", path, "--out", rec]) == 0
    figs = str(tmp_path / "figs")
    assert cli.main(["plot", "--record", rec, "--kind", "events", "--out", figs]) == 0
    assert os.path.exists(os.path.join(figs, "events.svg"))


def test_output_dir_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv(scenario.OUTPUT_DIR_ENV, str(tmp_path / "envout"))
    scn = scenario.scenario_from_dict(small_scenario_dict())
    assert scenario.default_output_dir(scn) == str(tmp_path / "envout")
    assert scenario.default_output_dir(scn, override="x") == "x"


def test_summary_reports_monitors(tmp_path):
    path = write_scenario(tmp_path, small_scenario_dict(duration=4.0))
    out = str(tmp_path / "mon")
    assert cli.main(["run", "--scenario", path, "--out", out]) == 0
    with open(os.path.join(out, "summary.json")) as fh:
        summary = json.load(fh)
    mon = summary["monitors"]
    assert mon["lyapunov_nonincreasing"] is True
    assert mon["collision_free"] is True
    assert summary["events"]["total"] >= 6
