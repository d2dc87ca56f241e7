"""End-to-end planning-and-learning driver.

Per episode: reset the environment, solve the compiled problem under the
current reward ledger, then walk the plan's options; inside an option the
low-level learner acts, the environment steps, the intrinsic reward is
computed (zero until the option's target subgoal holds), the learner trains
on it, and the option's ledger entry accumulates it. The planner only ever
sees the ledger as it stood when the episode started.

Ablations: "no-intrinsic" keeps the planner/option machinery but trains
learners on raw external reward and freezes the ledger at zero;
"flat" drops planner and options entirely and trains one learner on external
reward (the baseline that trap environments defeat).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from ..errors import NoApplicableOptionError
from ..grid.env import Cause, GridEnv
from ..grid.gridmap import load_map
from ..hddl.compiler import compile_tree
from ..knowledge import load_knowledge
from ..learners import EpsilonSchedule, make_learner
from ..options import (
    IntrinsicRewardConfig,
    MetaController,
    OptionExecutionRecord,
    build_options,
    intrinsic_reward,
    termination,
    update_ledger,
)
from ..planner import HEURISTICS, RewardLedger, solve
from ..symbolic import build_abstraction
from .config import (
    ABLATION_FLAT,
    ABLATION_FULL,
    ABLATION_NO_INTRINSIC,
    ExperimentConfig,
)
from .metrics import MetricsLog, aggregate, emit


@dataclass
class World:
    env: GridEnv
    tree: object
    abstraction: object
    problem: object


def build_world(cfg: ExperimentConfig) -> World:
    cfg = cfg.resolved()
    grid_map = load_map(Path(cfg.map_path).read_text())
    env = GridEnv(grid_map, task=cfg.task, max_steps=cfg.max_steps)
    tree = load_knowledge(
        Path(cfg.knowledge_path).read_text(), name=Path(cfg.knowledge_path).stem
    )
    fn = build_abstraction(env, tree.vocabulary, tree.objects, vocab_id=tree.name)
    problem = compile_tree(tree)
    return World(env=env, tree=tree, abstraction=fn, problem=problem)


@dataclass
class SeedResult:
    log: MetricsLog
    option_rows: List[Tuple[int, int, str, str, float]]
    plan_changes: List[str]
    ledger: Optional[RewardLedger]

    def options_csv(self) -> str:
        lines = ["episode,step,option_id,event,r_i"]
        for ep, step, oid, event, r_i in self.option_rows:
            lines.append(f"{ep},{step},{oid},{event},{r_i!r}")
        return "\n".join(lines) + "\n"

    def plans_txt(self) -> str:
        return "\n".join(self.plan_changes) + ("\n" if self.plan_changes else "")


def run_seed(cfg: ExperimentConfig, seed: int) -> SeedResult:
    cfg = cfg.resolved()
    cfg.validate()
    rng = np.random.default_rng(seed)
    world = build_world(cfg)
    env, tree, fn, problem = world.env, world.tree, world.abstraction, world.problem
    eps = EpsilonSchedule(cfg.eps_start, cfg.eps_end, cfg.eps_decay_frac)
    ircfg = IntrinsicRewardConfig(phi=cfg.phi, c=cfg.c, n_mode=cfg.n_mode)
    exact = cfg.match_mode == "exact"
    h_f = HEURISTICS[cfg.h_f]
    flat = cfg.ablation == ABLATION_FLAT

    edge_ids = sorted(tree.edges)
    if flat:
        flat_learner = make_learner(cfg.learner, rng, cfg.alpha, cfg.gamma, eps)
        options = {}
        ledger = None
        zero_ledger = None
    else:
        policies = {
            eid: make_learner(cfg.learner, rng, cfg.alpha, cfg.gamma, eps)
            for eid in edge_ids
        }
        options = build_options(tree, policies)
        ledger = RewardLedger.zeros(edge_ids)
        zero_ledger = RewardLedger.zeros(edge_ids)
        if cfg.initial_ledger:
            seeded = json.loads(Path(cfg.initial_ledger).read_text())
            for oid, value in seeded.items():
                ledger.add(oid, float(value))

    log = MetricsLog(env=cfg.env, task=cfg.task, ablation=cfg.ablation, seed=seed,
                     window=cfg.window)
    option_rows: List[Tuple[int, int, str, str, float]] = []
    plan_changes: List[str] = []
    last_plan: Optional[str] = None

    for ep in range(cfg.episodes):
        frac = ep / cfg.episodes
        state, obs = env.reset()
        ep_return = 0.0
        plan_str = ""

        if flat:
            flat_learner.set_progress(frac)
            while not state.terminated:
                a = flat_learner.act(obs, explore=True)
                state, out = env.step(state, a)
                ep_return += out.external_reward
                flat_learner.update(
                    (obs, a, out.external_reward, out.next_observation, out.terminated)
                )
                obs = out.next_observation
        else:
            for eid in edge_ids:
                options[eid].policy.set_progress(frac)
            if cfg.ledger_decay < 1.0:
                for key in ledger.values:
                    ledger.values[key] *= cfg.ledger_decay
            solve_ledger = ledger if cfg.ablation == ABLATION_FULL else zero_ledger
            plan = solve(problem, solve_ledger, h_f=h_f, tie_break=cfg.tie_break, rng=rng)
            plan_str = "|".join(plan.execution_sequence)
            if plan_str != last_plan:
                plan_changes.append(f"# episode {ep} cost {plan.total_cost:g}")
                plan_changes.extend(s.dump_line() for s in plan.steps)
                last_plan = plan_str
            mc = MetaController(plan, options, fn, exact=exact)
            episode_over = False
            while not state.terminated and not episode_over:
                try:
                    option, skipped = mc.select(state)
                except NoApplicableOptionError:
                    oid = plan.execution_sequence[mc.cursor]
                    option_rows.append((ep, state.step_count, oid, "abandon", 0.0))
                    break
                for oid in skipped:
                    option_rows.append((ep, state.step_count, oid, "start", 0.0))
                    option_rows.append((ep, state.step_count, oid, "terminate", 0.0))
                if option is None:
                    break
                option_rows.append((ep, state.step_count, option.id, "start", 0.0))
                learner = option.policy
                budget = cfg.option_step_budget or env.max_steps
                record = OptionExecutionRecord(option_id=option.id)
                while True:
                    a = learner.act(obs, explore=True)
                    state, out = env.step(state, a)
                    ep_return += out.external_reward
                    record.steps += 1
                    record.negative_steps += out.n_step
                    record.final_external = out.external_reward
                    term_opt = termination(option, fn, state, exact=exact)
                    n_val = record.negative_steps if cfg.n_mode == "cumulative" else out.n_step
                    r_i = intrinsic_reward(record.final_external, n_val, ircfg, term_opt)
                    train_r = (
                        out.external_reward
                        if cfg.ablation == ABLATION_NO_INTRINSIC
                        else r_i
                    )
                    done = out.terminated or term_opt
                    learner.update((obs, a, train_r, out.next_observation, done))
                    obs = out.next_observation
                    if cfg.ablation == ABLATION_FULL and r_i != 0.0:
                        update_ledger(ledger, option.id, r_i)
                    if term_opt:
                        record.terminated_by = "target_reached"
                        mc.advance(option)
                        option_rows.append((ep, state.step_count, option.id, "terminate", r_i))
                        break
                    if out.terminated:
                        record.terminated_by = "env_terminal"
                        option_rows.append((ep, state.step_count, option.id, "abandon", 0.0))
                        break
                    if record.steps >= budget:
                        # Give up on a livelocked option; the episode ends as a
                        # failure rather than retrying the same option forever.
                        record.terminated_by = "step_limit"
                        option_rows.append((ep, state.step_count, option.id, "abandon", 0.0))
                        episode_over = True
                        break

        log.record(
            ret=ep_return,
            success=state.cause == Cause.GOAL,
            steps=state.step_count,
            cause=state.cause.value,
            plan=plan_str,
            ledger_total=ledger.total() if ledger is not None else 0.0,
        )
        if ledger is not None:
            ledger.episode += 1

    return SeedResult(log=log, option_rows=option_rows, plan_changes=plan_changes,
                      ledger=ledger)


def run_dir_for(cfg: ExperimentConfig, seed: int) -> Path:
    return Path(cfg.out_dir) / cfg.env / f"task{cfg.task}" / cfg.ablation / str(seed)


def run_experiment(cfg: ExperimentConfig) -> List[MetricsLog]:
    """Run every configured seed; write run logs when out_dir is set."""
    cfg = cfg.resolved()
    cfg.validate()
    logs = []
    for seed in cfg.seeds:
        result = run_seed(cfg, seed)
        logs.append(result.log)
        if cfg.out_dir:
            rdir = run_dir_for(cfg, seed)
            rdir.mkdir(parents=True, exist_ok=True)
            (rdir / "config.json").write_text(cfg.to_json())
            (rdir / "episodes.csv").write_text(result.log.episodes_csv())
            (rdir / "options.csv").write_text(result.options_csv())
            (rdir / "plans.txt").write_text(result.plans_txt())
            if result.ledger is not None:
                (rdir / "ledger.json").write_text(
                    json.dumps(result.ledger.values, indent=2, sort_keys=True) + "\n"
                )
    if cfg.out_dir:
        summary = aggregate(logs)
        emit(summary, "csv", Path(cfg.out_dir) / cfg.env / f"task{cfg.task}" / cfg.ablation)
    return logs
