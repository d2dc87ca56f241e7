"""Command-line interface.

Subcommands: run (train and log), plot (render summary curves), plan
(one-shot planner inspection under a ledger), validate (map + knowledge
cross-checks). Exit codes: 0 ok, 2 validation failure, 3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

from ..errors import EvaluatorError, ParseError, PlanRLError, ValidationError, VariantError
from ..hddl.compiler import compile_tree
from ..knowledge import load_knowledge, path_to_root
from ..planner import RewardLedger, solve
from ..symbolic import build_abstraction
from .config import ABLATIONS, ExperimentConfig, parse_config_file
from .metrics import Summary, emit
from .runner import run_experiment

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planrl")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a training experiment")
    run_p.add_argument("--env", choices=("findtreasure", "movebox"))
    run_p.add_argument("--task", type=int, choices=(0, 1, 2, 3))
    run_p.add_argument("--map", dest="map_path")
    run_p.add_argument("--knowledge", dest="knowledge_path")
    run_p.add_argument("--episodes", type=int)
    run_p.add_argument("--max-steps", dest="max_steps", type=int)
    run_p.add_argument("--seeds", help="comma-separated, e.g. 1,2,3")
    run_p.add_argument("--ablation", choices=ABLATIONS)
    run_p.add_argument("--learner", choices=("tabular", "actor-critic"))
    run_p.add_argument("--window", type=int)
    run_p.add_argument("--tie-break", dest="tie_break", choices=("lex", "seeded"))
    run_p.add_argument("--match-mode", dest="match_mode", choices=("subset", "exact"))
    run_p.add_argument("--initial-ledger", dest="initial_ledger")
    run_p.add_argument("--out", dest="out_dir")
    run_p.add_argument("--config", help="key = value config file; flags override")

    plot_p = sub.add_parser("plot", help="render reward/success plots")
    plot_p.add_argument("--in", dest="in_dir", required=True)

    plan_p = sub.add_parser("plan", help="solve once and print the plan")
    plan_p.add_argument("--knowledge", required=True)
    plan_p.add_argument("--ledger", help="JSON {option_id: cumulative reward}")

    val_p = sub.add_parser("validate", help="check a map and knowledge file pair")
    val_p.add_argument("--map", dest="map_path", required=True)
    val_p.add_argument("--knowledge", dest="knowledge_path", required=True)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    overrides = {}
    if args.config:
        overrides.update(parse_config_file(Path(args.config).read_text()))
    names = {f.name for f in fields(ExperimentConfig)}
    for key in names:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if args.seeds is not None:
        overrides["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    return replace(ExperimentConfig(), **overrides)


def cmd_run(args) -> int:
    cfg = _config_from_args(args).resolved()
    cfg.validate()
    logs = run_experiment(cfg)
    for log in logs:
        print(
            f"seed {log.seed}: final rolling success {log.final_rolling_success():.3f}, "
            f"final rolling return {log.final_rolling_return():.2f}"
        )
    if cfg.out_dir:
        print(f"run logs under {cfg.out_dir}")
    return EXIT_OK


def cmd_plot(args) -> int:
    in_dir = Path(args.in_dir)
    summary_path = in_dir / "summary.csv"
    if not summary_path.exists():
        raise ValidationError(f"no summary.csv under {in_dir}")
    summary = _read_summary(summary_path)
    paths = emit(summary, "plot", in_dir)
    for p in paths:
        print(p)
    return EXIT_OK


def _read_summary(path: Path) -> Summary:
    import numpy as np

    rows = path.read_text().splitlines()
    data = [tuple(float(v) for v in line.split(",")) for line in rows[1:]]
    arr = np.asarray(data)
    return Summary(
        episodes=len(arr),
        window=0,
        reward_mean=arr[:, 1],
        reward_std=arr[:, 2],
        success_mean=arr[:, 3],
        success_std=arr[:, 4],
    )


def cmd_plan(args) -> int:
    text = Path(args.knowledge).read_text()
    tree = load_knowledge(text, name=Path(args.knowledge).stem)
    problem = compile_tree(tree)
    ledger = RewardLedger.zeros(sorted(tree.edges))
    if args.ledger:
        for oid, value in json.loads(Path(args.ledger).read_text()).items():
            ledger.add(oid, float(value))
    plan = solve(problem, ledger, tie_break="lex")
    print(f"# cost {plan.total_cost:g} sequence {'|'.join(plan.execution_sequence)}")
    print(plan.dump())
    return EXIT_OK


def cmd_validate(args) -> int:
    from ..grid.env import GridEnv
    from ..grid.gridmap import load_map

    grid_map = load_map(Path(args.map_path).read_text())
    tree = load_knowledge(
        Path(args.knowledge_path).read_text(), name=Path(args.knowledge_path).stem
    )
    env = GridEnv(grid_map)
    fn = build_abstraction(env, tree.vocabulary, tree.objects, vocab_id=tree.name)
    state, _ = env.reset()
    current = fn.abstract(state)
    for leaf in tree.leaf_ids():
        subgoal = tree.nodes[leaf].subgoal
        if not subgoal.atoms <= current.atoms:
            print(f"note: leaf {leaf!r} does not hold in the initial state")
    initial = tree.initial_leaf_ids[0]
    if not tree.nodes[initial].subgoal.atoms <= current.atoms:
        raise ValidationError(f"initial leaf {initial!r} does not hold at reset")
    path = path_to_root(tree, initial)
    compile_tree(tree)
    print(
        f"ok: map {grid_map.width}x{grid_map.height}, "
        f"{len(tree.nodes)} nodes, {len(tree.edges)} edges, "
        f"initial path {'|'.join(e.edge_id for e in path)}"
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": cmd_run,
        "plot": cmd_plot,
        "plan": cmd_plan,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ParseError, ValidationError, EvaluatorError, VariantError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PlanRLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
