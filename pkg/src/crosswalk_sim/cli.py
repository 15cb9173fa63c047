"""Command line front end: solve, run, batch and grid-dump subcommands."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path as FsPath

from . import world
from .harness import (
    derive_model_config,
    export_plot_data,
    export_trace,
    load_model_config,
    load_scenario,
    run_batch,
    run_scenario,
)
from .pomdp import ModelConfig, build_crosswalk_model
from .qmdp import extract_alphas, load_policy, save_policy, value_iteration
from .world import build_grid, grid_to_text, load_scene

log = logging.getLogger("crosswalk_sim")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosswalk-sim",
        description="Closed-loop occluded-crosswalk speed-scaling simulation",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(required=True)

    p_solve = sub.add_parser("solve", help="solve the crosswalk model, save the policy")
    p_solve.add_argument("--model", help="model config YAML (defaults built in)")
    p_solve.add_argument(
        "--scene", help="scene YAML; derives the crosswalk bin and occluded band"
    )
    p_solve.add_argument("--out", required=True, help="policy file destination")
    p_solve.add_argument("--tol", type=float, default=1e-6)
    p_solve.add_argument("--max-iters", type=int, default=10000)
    p_solve.set_defaults(func=_cmd_solve)

    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("--scenario", required=True, help="scenario YAML")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--format", choices=("csv", "json"), default="csv")
    p_run.add_argument("--policy", help="override the policy file for pomdp runs")
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.set_defaults(func=_cmd_run)

    p_batch = sub.add_parser("batch", help="run every scenario YAML in a directory")
    p_batch.add_argument("--dir", required=True, help="directory of scenario YAMLs")
    p_batch.add_argument("--out", required=True, help="output directory")
    p_batch.add_argument("--format", choices=("csv", "json"), default="csv")
    p_batch.set_defaults(func=_cmd_batch)

    p_grid = sub.add_parser("grid-dump", help="rasterize the occupancy grid for a pose")
    p_grid.add_argument("--scene", required=True, help="scene YAML")
    p_grid.add_argument(
        "--at",
        type=float,
        default=0.0,
        help="ego position as along-road distance in meters (default 0)",
    )
    p_grid.add_argument("--offset", type=float, default=0.0, help="lateral offset, +left")
    p_grid.add_argument("--out", default="-", help="output file, '-' for stdout")
    p_grid.set_defaults(func=_cmd_grid_dump)
    return parser


def _cmd_solve(args) -> int:
    cfg = load_model_config(args.model) if args.model else ModelConfig()
    if args.scene:
        scene = load_scene(args.scene)
        cfg = derive_model_config(scene, cfg)
        log.info(
            "scene geometry: crosswalk bin %d, occluded bins %s",
            cfg.crosswalk_bin,
            cfg.occluded_bins,
        )
    started = time.perf_counter()
    model = build_crosswalk_model(cfg)
    q = value_iteration(model, tol=args.tol, max_iters=args.max_iters)
    elapsed = time.perf_counter() - started
    policy = extract_alphas(q, list(_action_scales(model)))
    save_policy(policy, args.out)
    log.info(
        "solved %d states x %d actions in %.2f s -> %s",
        model.num_states,
        model.num_actions,
        elapsed,
        args.out,
    )
    return 0


def _action_scales(model):
    from .pomdp import ACTION_SCALES

    return ACTION_SCALES if model.num_actions == len(ACTION_SCALES) else [
        k / (model.num_actions - 1) for k in range(model.num_actions)
    ]


def _cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    if args.policy:
        config.policy_file = args.policy
    if args.seed is not None:
        config.seed = args.seed
    trace = run_scenario(config)
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dest = out / f"trace.{args.format}"
    export_trace(trace, args.format, dest)
    export_plot_data(trace, out, scene=config.scene)
    log.info(
        "%s: terminated by %s after %d steps -> %s",
        config.name,
        trace.termination,
        len(trace),
        dest,
    )
    return 0


def _cmd_batch(args) -> int:
    written = run_batch(args.dir, args.out, args.format)
    log.info("wrote %d traces under %s", len(written), args.out)
    return 0


def _cmd_grid_dump(args) -> int:
    scene = load_scene(args.scene)
    north, east = scene.road.to_inertial(args.at, args.offset)
    pose = (float(north), float(east), scene.road.heading)
    grid = build_grid(scene, pose)
    text = grid_to_text(grid)
    count = world.count_unobservable(grid)
    if args.out == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    log.info("unobservable cells: %d (bin %d)", count, world.bin_observation(count))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
