"""Command-line front end.

Three subcommands:

* ``run``   -- execute a sweep and emit the per-realization CSV.
* ``graph`` -- print the reachability graph and the feasible paths.
* ``brt``   -- train the tables for one realization and dump them as text.

Scenarios come from ``--preset``, a scene file (``--scene``) or a full
experiment file (``--config``); diagnostics go to stderr, data to stdout
or ``--out``.
"""

import argparse
import logging
import sys
from dataclasses import replace

from .channels import synthesize_channels
from .codebooks import build_codebooks
from .experiment import (
    ExperimentConfig,
    format_summary,
    load_experiment_config,
    rows_to_csv,
    run_experiment,
    summarize,
    write_csv,
)
from .geometry import build_los_graph, load_scene
from .presets import PRESET_NAMES, preset_scenario
from .routing import enumerate_paths
from .training import run_distributed_training, dump_brts

log = logging.getLogger("irsnet")


def _add_scenario_args(parser: argparse.ArgumentParser, with_config: bool) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=PRESET_NAMES, help="built-in scenario")
    group.add_argument("--scene", metavar="FILE", help="scene description file")
    if with_config:
        group.add_argument("--config", metavar="FILE", help="experiment file")


def _scenario_from_args(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        return load_experiment_config(args.config)
    if args.preset:
        _, config = preset_scenario(args.preset)
        return config
    scene = load_scene(args.scene)
    m0 = scene.irs_list[0].m1 if scene.irs_list else 1
    return ExperimentConfig(scene=scene, sweep_values=(m0,))


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    kwargs = {}
    if getattr(args, "seed", None) is not None:
        kwargs["master_seed"] = args.seed
    if getattr(args, "realizations", None) is not None:
        kwargs["realizations"] = args.realizations
    if getattr(args, "schemes", None):
        kwargs["schemes"] = tuple(args.schemes.split(","))
    if getattr(args, "user", None) is not None:
        kwargs["user_index"] = args.user
    if getattr(args, "max_hops", None) is not None:
        kwargs["max_hops"] = args.max_hops
    if getattr(args, "sweep", None):
        name, _, raw = args.sweep.partition("=")
        if not raw:
            raise SystemExit(f"--sweep needs NAME=V1,V2,... (got {args.sweep!r})")
        values = []
        for token in raw.split(","):
            try:
                values.append(int(token))
            except ValueError:
                values.append(float(token))
        kwargs["sweep_variable"] = name
        kwargs["sweep_values"] = tuple(values)
    return replace(config, **kwargs) if kwargs else config


def _cmd_run(args) -> int:
    config = _apply_overrides(_scenario_from_args(args), args)
    rows = run_experiment(config)
    out = args.out or config.output_path
    if out:
        write_csv(rows, out)
        log.info("wrote %d rows to %s", len(rows), out)
    else:
        sys.stdout.write(rows_to_csv(rows))
    print(format_summary(summarize(rows)), file=sys.stderr)
    return 0


def _cmd_graph(args) -> int:
    config = _apply_overrides(_scenario_from_args(args), args)
    graph = build_los_graph(config.scene, config.user_index)
    user = graph.user_node
    print(f"nodes: bs=0 irs=1..{graph.irs_count} user={user}")
    print("edges:")
    for i, j in sorted(graph.edges):
        print(f"  {i} -> {j}")
    paths = enumerate_paths(graph, config.max_hops)
    print(f"paths to user ({len(paths)}):")
    for path in paths:
        chain = " -> ".join(str(n) for n in path.nodes(user))
        print(f"  {chain}")
    return 0


def _cmd_brt(args) -> int:
    config = _apply_overrides(_scenario_from_args(args), args)
    scene = config.scene
    graph = build_los_graph(scene, config.user_index)
    channel = replace(config.channel, rng_seed=config.master_seed)
    channels = synthesize_channels(scene, graph, channel, args.realization)
    codebooks = build_codebooks(
        scene, config.bs_codebook_size, config.irs_h_codebook_size, config.irs_v_codebook_size
    )
    training = run_distributed_training(channels, codebooks)
    text = dump_brts(training.bs_brt, training.irs_brts)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        log.info("wrote tables to %s", args.out)
    else:
        sys.stdout.write(text)
    counts = training.counter.as_dict()
    print(
        "measurements: "
        + " ".join(f"{k}={v}" for k, v in counts.items() if v),
        file=sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsnet",
        description="Multi-hop reflecting-surface link simulator and beam optimizer.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="chatty progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep and emit CSV rows")
    _add_scenario_args(p_run, with_config=True)
    p_run.add_argument("--out", metavar="FILE", help="CSV destination (default stdout)")
    p_run.add_argument("--seed", type=int, help="master seed override")
    p_run.add_argument("--realizations", type=int, help="fading realizations per sweep value")
    p_run.add_argument("--schemes", help="comma list: distributed,sequential,exhaustive")
    p_run.add_argument("--sweep", metavar="NAME=V1,V2", help="sweep override, e.g. m0=8,12,16")
    p_run.add_argument("--user", type=int, help="user location index")
    p_run.add_argument("--max-hops", type=int, dest="max_hops", help="cap on reflections per path")
    p_run.set_defaults(func=_cmd_run)

    p_graph = sub.add_parser("graph", help="show reachability and feasible paths")
    _add_scenario_args(p_graph, with_config=True)
    p_graph.add_argument("--user", type=int, help="user location index")
    p_graph.add_argument("--max-hops", type=int, dest="max_hops", help="cap on reflections per path")
    p_graph.set_defaults(func=_cmd_graph)

    p_brt = sub.add_parser("brt", help="train and print the beam tables")
    _add_scenario_args(p_brt, with_config=True)
    p_brt.add_argument("--out", metavar="FILE", help="table destination (default stdout)")
    p_brt.add_argument("--seed", type=int, help="channel seed override")
    p_brt.add_argument("--realization", type=int, default=0, help="fading realization index")
    p_brt.add_argument("--user", type=int, help="user location index")
    p_brt.set_defaults(func=_cmd_brt)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, LookupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
