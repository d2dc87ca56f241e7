"""Acceptance suite: the exit criteria, one test each, with a printed verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The end-to-end criteria train real runs and take a couple of minutes.
"""
import json
import time

import numpy as np
import pytest

from conftest import BLUE_FT, BLUE_MB, make_random_tree, oracle_min_cost
from planrl.hddl import compile_tree, parse_hddl, print_hddl, problems_equal
from planrl.harness.config import ExperimentConfig
from planrl.harness.runner import run_dir_for, run_experiment, run_seed
from planrl.knowledge import load_knowledge
from planrl.options import IntrinsicRewardConfig, build_options, intrinsic_reward
from planrl.planner import RewardLedger, h_madd, solve

SEEDS = (1, 2, 3, 4, 5)


def _trailing(xs, window):
    xs = np.asarray(xs, dtype=float)
    if len(xs) < window:
        return np.array([])
    c = np.cumsum(np.insert(xs, 0, 0.0))
    return (c[window:] - c[:-window]) / window


def _report(num, name, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} {name}: {verdict} ({detail})")
    assert ok, f"criterion {num} {name}: {detail}"


# ---------------------------------------------------------------------------
# training fixtures shared between criteria
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def ft_full_runs():
    cfg = ExperimentConfig(env="findtreasure", episodes=5000, window=100)
    out = {}
    for seed in SEEDS:
        t0 = time.perf_counter()
        out[seed] = (run_seed(cfg, seed).log, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="module")
def ft_noint_runs():
    cfg = ExperimentConfig(
        env="findtreasure", episodes=5000, window=100, ablation="no-intrinsic"
    )
    return {seed: run_seed(cfg, seed).log for seed in SEEDS}


@pytest.fixture(scope="module")
def mb_full_runs():
    cfg = ExperimentConfig(env="movebox", task=3, episodes=10000, window=100)
    out = {}
    for seed in SEEDS:
        t0 = time.perf_counter()
        out[seed] = (run_seed(cfg, seed).log, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="module")
def mb_flat_runs():
    cfg = ExperimentConfig(
        env="movebox", task=3, episodes=10000, window=100, ablation="flat"
    )
    out = {}
    for seed in SEEDS:
        t0 = time.perf_counter()
        out[seed] = (run_seed(cfg, seed).log, time.perf_counter() - t0)
    return out


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_1_planner_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    exact = 0
    for _ in range(200):
        tree = make_random_tree(rng, max_nodes=12)
        problem = compile_tree(tree)
        ledger = RewardLedger.zeros(sorted(tree.edges))
        for eid in ledger.values:
            ledger.values[eid] = float(rng.uniform(0, 10))
        plan = solve(problem, ledger, tie_break="lex")
        if plan.total_cost == oracle_min_cost(tree, ledger.values):
            exact += 1
    elapsed = time.perf_counter() - t0
    _report(
        1,
        "planner-oracle-equivalence",
        exact == 200 and elapsed < 10.0,
        f"{exact}/200 exact matches in {elapsed:.2f}s",
    )


def test_criterion_2_intrinsic_reward_unit_suite():
    cfg = IntrinsicRewardConfig(phi=5.0, c=0.01)
    checks = [
        intrinsic_reward(100.0, 0, cfg, True) == 100.0 + 5 - 0 * 0.01 == 105.0,
        intrinsic_reward(-0.1, 1, cfg, False) == 0.0,
        intrinsic_reward(-0.1, 1, cfg, True) == -0.1 + 5 - 1 * 0.01,
        abs(intrinsic_reward(-0.1, 1, cfg, True) - 4.89) < 1e-12,
        intrinsic_reward(3.0, 0, cfg, True) == 3.0 + 5 - 0 * 0.01 == 8.0,
    ]
    _report(
        2,
        "intrinsic-reward-unit-suite",
        all(checks),
        "substitutions (105.0, 0, 4.89) and trap 8.0 reproduce the formula bit-exactly",
    )


def test_criterion_3_heuristic_monotonicity():
    rng = np.random.default_rng(7)
    violations = 0
    trials = 0
    while trials < 1000:
        tree = make_random_tree(rng, max_nodes=10)
        problem = compile_tree(tree)
        if not problem.domain.methods:
            continue
        mids = sorted(problem.domain.methods)
        mid = mids[int(rng.integers(len(mids)))]
        method = problem.domain.methods[mid]
        base = RewardLedger.zeros(sorted(tree.edges))
        for eid in base.values:
            base.values[eid] = float(rng.uniform(0, 10))
        higher = base.copy()
        higher.add(mid, float(rng.uniform(0.01, 10)))
        if not h_madd(method, problem, higher) < h_madd(method, problem, base):
            violations += 1
        trials += 1
    _report(
        3,
        "heuristic-reward-monotonicity",
        violations == 0,
        f"h_madd strictly decreased in {trials - violations}/{trials} random instances",
    )


def test_criterion_4_bijection_and_roundtrip(ft_knowledge_text, mb_knowledge_text):
    ok = True
    details = []
    for name, text in (("findtreasure", ft_knowledge_text), ("movebox", mb_knowledge_text)):
        tree = load_knowledge(text, name=name)
        problem = compile_tree(tree)
        dom = problem.domain
        edge_ids = set(tree.edges)
        compiled_ids = set(dom.methods) | set(dom.primitives)
        option_ids = set(build_options(tree))
        bijection = edge_ids == compiled_ids == option_ids and not (
            set(dom.methods) & set(dom.primitives)
        )
        roundtrip = problems_equal(problem, parse_hddl(print_hddl(problem)))
        ok = ok and bijection and roundtrip
        details.append(f"{name}: ids={'=' if bijection else '!'} roundtrip={roundtrip}")
    _report(4, "bijection-and-roundtrip", ok, "; ".join(details))


def test_criterion_5_findtreasure_end_to_end(ft_full_runs):
    good = 0
    worst = 0.0
    slowest = 0.0
    for seed, (log, elapsed) in ft_full_runs.items():
        rolled = _trailing(log.successes, 100)
        peak = float(rolled.max())
        worst = max(worst, elapsed)
        slowest = max(slowest, elapsed)
        if peak >= 0.9:
            good += 1
    finals = [float(_trailing(log.successes, 100)[-1]) for log, _ in ft_full_runs.values()]
    _report(
        5,
        "findtreasure-end-to-end",
        good >= 4 and slowest < 300.0,
        f"{good}/5 seeds reached rolling success >= 0.9 within 5000 episodes; "
        f"final rates {['%.2f' % f for f in finals]}; slowest seed {slowest:.1f}s (< 300s)",
    )


def test_criterion_6_trap_avoidance_contrast(mb_full_runs, mb_flat_runs):
    full_good = 0
    slowest = 0.0
    for seed, (log, elapsed) in mb_full_runs.items():
        slowest = max(slowest, elapsed)
        if float(_trailing(log.successes, 100)[-1]) >= 0.8:
            full_good += 1
    flat_ok = True
    flat_finals = []
    for seed, (log, elapsed) in mb_flat_runs.items():
        slowest = max(slowest, elapsed)
        final = float(_trailing(log.successes, 100)[-1])
        flat_finals.append(final)
        trap_rate = np.mean([c == "trap" for c in log.causes[-100:]])
        flat_ok = flat_ok and final <= 0.05 and trap_rate > 0.9
    _report(
        6,
        "trap-avoidance-contrast",
        full_good >= 4 and flat_ok and slowest < 900.0,
        f"full success >= 0.8 on {full_good}/5 seeds; flat final success "
        f"{['%.2f' % f for f in flat_finals]} (all <= 0.05, trap-bound); "
        f"slowest seed {slowest:.1f}s (< 900s)",
    )


def test_criterion_7_ablation_ordering(ft_full_runs, ft_noint_runs):
    gaps = {}
    ok = True
    for seed in SEEDS:
        full_final = float(_trailing(ft_full_runs[seed][0].returns, 100)[-1])
        noint_final = float(_trailing(ft_noint_runs[seed].returns, 100)[-1])
        gaps[seed] = (full_final, noint_final)
        ok = ok and full_final > noint_final
    detail = ", ".join(f"seed {s}: {a:.1f} > {b:.1f}" for s, (a, b) in gaps.items())
    _report(7, "ablation-ordering", ok, detail)


def test_criterion_8_interpretability_traces(tmp_path):
    ok = True
    details = []
    for env, task, methods, blue in (
        ("findtreasure", 0, ("so_4", "so_8", "so_10", "so_12"), BLUE_FT),
        ("movebox", 3, ("so_4", "so_7", "so_10"), BLUE_MB),
    ):
        ledger_path = tmp_path / f"{env}.json"
        ledger_path.write_text(json.dumps({m: 10.0 for m in methods}))
        cfg = ExperimentConfig(
            env=env, task=task, episodes=3, window=1,
            initial_ledger=str(ledger_path),
        )
        log = run_seed(cfg, 1).log
        hit = "|".join(blue) in log.plans
        ok = ok and hit
        details.append(f"{env}: {'logged' if hit else 'missing'} {'|'.join(blue)}")
    _report(8, "interpretability-traces", ok, "; ".join(details))


def test_criterion_9_determinism(tmp_path):
    blobs = []
    for name in ("first", "second"):
        cfg = ExperimentConfig(
            env="findtreasure", episodes=150, window=50, seeds=(9,),
            out_dir=str(tmp_path / name),
        )
        run_experiment(cfg)
        rdir = run_dir_for(cfg, 9)
        blobs.append(
            (rdir / "episodes.csv").read_bytes()
            + (rdir / "options.csv").read_bytes()
            + (rdir.parent / "summary.csv").read_bytes()
        )
    _report(
        9,
        "determinism",
        blobs[0] == blobs[1],
        f"repeated (config, seed) run produced byte-identical CSVs ({len(blobs[0])} bytes)",
    )
