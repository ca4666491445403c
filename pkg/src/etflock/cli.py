"""Command-line entry point.

Subcommands:

* ``run --scenario PATH [--seed N] [--out DIR]``  simulate and write outputs
* ``validate --scenario PATH``                    schema and gain-bound check
* ``plot --record DIR --kind KIND [--out DIR]``   render plots from records
* ``preset --name NAME --out PATH``               emit a built-in scenario

Exit codes: 0 success, 1 validation failure, 2 runtime abort (collision).
"""

from __future__ import annotations

import argparse
import sys

from . import plots, recording, scenario, simulator


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etflock",
        description="Event-triggered flocking simulator for Lagrangian agent models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write outputs")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--seed", type=int, default=None, help="override simulation.seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument(
        "--allow-unstable-gains",
        action="store_true",
        help="skip the stable-flocking gain bounds (experimentation only)",
    )

    p_val = sub.add_parser("validate", help="validate a scenario file")
    p_val.add_argument("--scenario", required=True)

    p_plot = sub.add_parser("plot", help="render plots from a record directory")
    p_plot.add_argument("--record", required=True)
    p_plot.add_argument("--kind", required=True, choices=plots.PLOT_KINDS)
    p_plot.add_argument("--out", default=None)

    p_pre = sub.add_parser("preset", help="write a built-in scenario file")
    p_pre.add_argument("--name", required=True, choices=scenario.PRESET_NAMES)
    p_pre.add_argument("--out", required=True)
    return parser


def _cmd_run(args) -> int:
    try:
        scn = scenario.load_scenario(args.scenario, allow_unstable=args.allow_unstable_gains)
    except (scenario.ScenarioError, OSError, ValueError) as exc:
        print(f"scenario invalid: {exc}", file=sys.stderr)
        return 1
    record = simulator.run(scn, seed=args.seed)
    out_dir = scenario.default_output_dir(scn, args.out)
    recording.write_record(record, out_dir)
    summary = recording.build_summary(record)
    if record.aborted:
        print(f"aborted: {record.abort_reason}", file=sys.stderr)
        print(f"partial outputs written to {out_dir}", file=sys.stderr)
        return 2
    ev = summary["events"]
    fin = summary["final"]
    print(
        f"completed {record.n_steps} steps, {ev['total']} events "
        f"(per agent {ev['per_agent_min']}..{ev['per_agent_max']}), "
        f"final velocity spread {fin['max_pairwise_velocity_difference']:.3e} m/s; "
        f"outputs in {out_dir}"
    )
    return 0


def _cmd_validate(args) -> int:
    try:
        scenario.load_scenario(args.scenario)
    except scenario.ScenarioError as exc:
        for problem in exc.problems:
            print(f"invalid: {problem}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print("scenario ok")
    return 0


def _cmd_plot(args) -> int:
    try:
        path = plots.plot_kind(args.record, args.kind, args.out)
    except (OSError, ValueError) as exc:
        print(f"plot failed: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


def _cmd_preset(args) -> int:
    scn = scenario.preset(args.name)
    scenario.save_scenario(scn, args.out)
    print(args.out)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "plot": _cmd_plot,
        "preset": _cmd_preset,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
