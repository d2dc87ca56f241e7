"""Plan-space solver over compiled tree-shaped problems.

The method heuristic extends the additive method heuristic with an accumulated
per-method reward credit::

    h_madd(m) = h_f(m) + max over subtasks of h_add_max(subtask) - R[m]

where R[m] is the cumulative intrinsic reward earned by the option paired
with method m. Reward credits make costs signed, so best-first expansion with
an admissibility assumption is unsound here; solve instead enumerates every
decomposition of the initial task completely, pruning with the exact
cost-to-finish (branch and bound), and returns the cheapest plan. A plan's
total cost sums h_f over applied methods, primitive costs, and -R[m] per
applied method; primitive reward credits are tracked in the ledger but do not
enter costs.

Ties are broken lexicographically over the execution sequence, or uniformly
at random among the tied plans when tie_break="seeded" and an RNG is given.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from .errors import (
    NoSolutionError,
    UnknownMethodError,
    UnknownOptionError,
    UnreachableTaskError,
    UnsupportedFeatureError,
)
from .hddl.model import HtnDomain, HtnProblem, Method


@dataclass
class RewardLedger:
    """Cumulative intrinsic reward per method/option id."""

    values: Dict[str, float]
    episode: int = 0

    @classmethod
    def zeros(cls, ids: Iterable[str]) -> "RewardLedger":
        return cls(values={i: 0.0 for i in sorted(ids)})

    def get(self, method_id: str) -> float:
        if method_id not in self.values:
            raise UnknownMethodError(method_id)
        return self.values[method_id]

    def add(self, option_id: str, r_i: float) -> "RewardLedger":
        if option_id not in self.values:
            raise UnknownOptionError(option_id)
        self.values[option_id] += r_i
        return self

    def copy(self) -> "RewardLedger":
        return RewardLedger(values=dict(self.values), episode=self.episode)

    def total(self) -> float:
        return sum(self.values.values())


HeuristicFn = Callable[[Method, HtnDomain], float]


def h_f_unit(method: Method, domain: HtnDomain) -> float:
    return 1.0


def h_f_primitive_count(method: Method, domain: HtnDomain) -> float:
    """Number of primitive tasks reachable beneath the method's subtasks."""
    count = 0
    seen = set()
    stack = list(method.subnetwork.task_names())
    while stack:
        name = stack.pop()
        if name in seen:
            continue
        seen.add(name)
        if name in domain.primitives:
            count += 1
            continue
        for kind, ref in domain.refinements(name):
            if kind == "primitive":
                count += 1
            else:
                stack.extend(ref.subnetwork.task_names())
    return float(count)


def h_f_critical_path(method: Method, domain: HtnDomain) -> float:
    """Longest refinement chain beneath the method's subtasks."""

    def depth(name: str, guard) -> float:
        if name in domain.primitives:
            return 1.0
        if name in guard:
            return float("inf")
        best = 0.0
        for kind, ref in domain.refinements(name):
            if kind == "primitive":
                best = max(best, 1.0)
            else:
                best = max(
                    best,
                    1.0 + max(depth(n, guard | {name}) for n in ref.subnetwork.task_names()),
                )
        return best

    return max(depth(n, frozenset()) for n in method.subnetwork.task_names())


HEURISTICS: Dict[str, HeuristicFn] = {
    "unit": h_f_unit,
    "primitive_count": h_f_primitive_count,
    "critical_path": h_f_critical_path,
}


@dataclass
class PlanStep:
    depth: int
    edge_id: str
    kind: str  # "method" | "primitive"
    task: str
    cost: float
    reward_credit: float

    def dump_line(self) -> str:
        return f"{self.depth} {self.edge_id} {self.task} {self.cost:g} {self.reward_credit:g}"


@dataclass
class Plan:
    steps: List[PlanStep]
    execution_sequence: List[str]
    total_cost: float

    def dump(self) -> str:
        return "\n".join(s.dump_line() for s in self.steps)


@dataclass
class SearchNode:
    """One partial decomposition during enumeration.

    The pending task is the single unrefined flaw; a node with none is a
    solution candidate. h_value caches the cost-to-finish bound used for
    pruning.
    """

    pending_task: Optional[str]
    applied: Tuple[Tuple[str, str, str], ...] = ()  # (kind, edge id, task)
    step_costs: Tuple[float, ...] = ()
    h_value: Optional[float] = None

    @property
    def is_complete(self) -> bool:
        return self.pending_task is None

    @property
    def g_cost(self) -> float:
        # fsum makes the total independent of summation order, so plan costs
        # compare exactly against an oracle that sums the same addends.
        return math.fsum(self.step_costs)


def h_add_max(
    task: str,
    problem: HtnProblem,
    ledger: RewardLedger,
    h_f: HeuristicFn = h_f_unit,
    _memo: Optional[Dict[str, float]] = None,
    _guard: frozenset = frozenset(),
) -> float:
    """Exact minimum cost-to-finish of one task on tree-shaped domains.

    Primitive tasks cost their declared cost; abstract tasks take the minimum
    over their refinements, recursing through h_madd for methods.
    """
    domain = problem.domain
    if _memo is None:
        _memo = {}
    if task in _memo:
        return _memo[task]
    if task in _guard:
        raise UnreachableTaskError(f"task {task!r} refines into itself")
    if task in domain.primitives:
        value = domain.primitives[task].cost
        _memo[task] = value
        return value
    if task not in domain.abstracts:
        raise UnreachableTaskError(f"task {task!r} is not declared")
    refs = domain.refinements(task)
    if not refs:
        raise UnreachableTaskError(f"no method chain grounds {task!r}")
    best = None
    for kind, ref in refs:
        if kind == "primitive":
            value = ref.cost
        else:
            value = h_madd(ref, problem, ledger, h_f, _memo=_memo, _guard=_guard | {task})
        if best is None or value < best:
            best = value
    _memo[task] = best
    return best


def h_madd(
    method: Method,
    problem: HtnProblem,
    ledger: RewardLedger,
    h_f: HeuristicFn = h_f_unit,
    _memo: Optional[Dict[str, float]] = None,
    _guard: frozenset = frozenset(),
) -> float:
    """Reward-adjusted additive method heuristic."""
    reward = ledger.get(method.id)
    children = method.subnetwork.task_names()
    if not children:
        return h_f(method, problem.domain) - reward
    child_max = max(
        h_add_max(t, problem, ledger, h_f, _memo=_memo, _guard=_guard) for t in children
    )
    return h_f(method, problem.domain) + child_max - reward


def solve(
    problem: HtnProblem,
    ledger: RewardLedger,
    h_f: HeuristicFn = h_f_unit,
    tie_break: str = "lex",
    rng: Optional[np.random.Generator] = None,
) -> Plan:
    """Minimum-total-cost decomposition of the initial task network."""
    domain = problem.domain
    root = problem.initial_task
    memo: Dict[str, float] = {}
    candidates: List[SearchNode] = []
    best_cost: List[Optional[float]] = [None]

    def expand(node: SearchNode, depth: int) -> None:
        if depth > len(domain.abstracts) + 1:
            raise UnreachableTaskError("decomposition depth exceeds task count; cyclic domain")
        task = node.pending_task
        if task in domain.primitives:
            prim = domain.primitives[task]
            done = SearchNode(
                pending_task=None,
                applied=node.applied + (("primitive", task, task),),
                step_costs=node.step_costs + (prim.cost,),
            )
            if best_cost[0] is None or done.g_cost < best_cost[0]:
                best_cost[0] = done.g_cost
            candidates.append(done)
            return
        refs = domain.refinements(task)
        if not refs:
            raise UnreachableTaskError(f"no method chain grounds {task!r}")
        for kind, ref in refs:
            if kind == "primitive":
                step_cost = ref.cost
                child = None
                edge = ref.name
            else:
                names = ref.subnetwork.task_names()
                if len(names) != 1:
                    raise UnsupportedFeatureError(
                        f"method {ref.id!r} has {len(names)} subtasks; solve handles"
                        " tree-compiled (single-subtask) methods"
                    )
                step_cost = h_f(ref, domain) - ledger.get(ref.id)
                child = names[0]
                edge = ref.id
            if child is None:
                done = SearchNode(
                    pending_task=None,
                    applied=node.applied + (("primitive", edge, task),),
                    step_costs=node.step_costs + (step_cost,),
                )
                if best_cost[0] is None or done.g_cost < best_cost[0]:
                    best_cost[0] = done.g_cost
                candidates.append(done)
                continue
            # Exact-to-rounding bound on tree domains; the slack keeps
            # floating-point near-ties alive for deterministic tie-breaking.
            h_child = h_add_max(child, problem, ledger, h_f, _memo=memo)
            if best_cost[0] is not None:
                g = math.fsum(node.step_costs + (step_cost,))
                if g + h_child > best_cost[0] + 1e-9:
                    continue
            expand(
                SearchNode(
                    pending_task=child,
                    applied=node.applied + (("method", edge, task),),
                    step_costs=node.step_costs + (step_cost,),
                    h_value=h_child,
                ),
                depth + 1,
            )

    if root not in domain.primitives and (
        root not in domain.abstracts or not domain.refinements(root)
    ):
        raise NoSolutionError(f"initial task {root!r} cannot be refined")
    expand(SearchNode(pending_task=root), 0)
    if not candidates:
        raise NoSolutionError(f"initial task {root!r} has no complete decomposition")

    minimum = min(node.g_cost for node in candidates)
    tied = [n for n in candidates if n.g_cost == minimum]
    tied.sort(key=lambda n: tuple(reversed([edge for _, edge, _ in n.applied])))
    if tie_break == "seeded":
        if rng is None:
            raise ValueError("tie_break='seeded' needs an rng")
        choice = tied[int(rng.integers(len(tied)))]
    elif tie_break == "lex":
        choice = tied[0]
    else:
        raise ValueError(f"unknown tie_break {tie_break!r}")

    steps = []
    for depth, (kind, edge, task) in enumerate(choice.applied):
        if kind == "method":
            cost = h_f(domain.methods[edge], domain)
        else:
            cost = domain.primitives[edge].cost
        steps.append(
            PlanStep(
                depth=depth,
                edge_id=edge,
                kind=kind,
                task=task,
                cost=cost,
                reward_credit=ledger.values.get(edge, 0.0),
            )
        )
    execution = [edge for _, edge, _ in reversed(choice.applied)]
    return Plan(steps=steps, execution_sequence=execution, total_cost=choice.g_cost)
