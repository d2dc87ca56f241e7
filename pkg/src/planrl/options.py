"""Symbolic options and the plan-driven meta-controller.

One option per knowledge-tree edge: its source subgoal is the child node, its
target subgoal the parent node, and its policy a dedicated low-level learner.
Initiation and termination test the subgoals against the abstraction of the
current environment state.

The intrinsic reward of a step is zero unless the step terminates the option,
in which case it is ``r_e + phi - n*c`` with r_e the terminal step's external
reward and n a count of negative-reward steps (cumulative since option start
by default, or just the terminal step's flag in per-step mode).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import NoApplicableOptionError, ValidationError
from .grid.env import EnvState
from .knowledge import KnowledgeTree
from .planner import Plan, RewardLedger
from .symbolic import AbstractionFn, SymbolicState, matches

N_MODE_CUMULATIVE = "cumulative"
N_MODE_PER_STEP = "per_step"


@dataclass(frozen=True, eq=False)
class SymbolicOption:
    id: str
    source: SymbolicState
    target: SymbolicState
    policy: object = None

    def __post_init__(self):
        if self.source == self.target:
            raise ValidationError(f"option {self.id}: source equals target")


@dataclass(frozen=True)
class IntrinsicRewardConfig:
    phi: float = 5.0
    c: float = 0.01
    n_mode: str = N_MODE_CUMULATIVE

    def __post_init__(self):
        if not self.phi > 0:
            raise ValidationError("phi must be positive")
        if self.c < 0:
            raise ValidationError("c must be non-negative")
        if self.n_mode not in (N_MODE_CUMULATIVE, N_MODE_PER_STEP):
            raise ValidationError(f"unknown n_mode {self.n_mode!r}")


@dataclass
class OptionExecutionRecord:
    option_id: str
    steps: int = 0
    negative_steps: int = 0
    final_external: float = 0.0
    terminated_by: Optional[str] = None  # target_reached | env_terminal | step_limit


def build_options(tree: KnowledgeTree, policies: Optional[Dict[str, object]] = None) -> Dict[str, SymbolicOption]:
    """One option per edge; source = child subgoal, target = parent subgoal."""
    options = {}
    for eid in sorted(tree.edges):
        edge = tree.edges[eid]
        options[eid] = SymbolicOption(
            id=eid,
            source=tree.nodes[edge.child].subgoal,
            target=tree.nodes[edge.parent].subgoal,
            policy=(policies or {}).get(eid),
        )
    return options


def initiation(option: SymbolicOption, fn: AbstractionFn, state: EnvState, exact: bool = False) -> bool:
    if exact:
        return matches(option.source, fn.abstract(state), exact=True)
    return fn.satisfies(state, option.source)


def termination(option: SymbolicOption, fn: AbstractionFn, state: EnvState, exact: bool = False) -> bool:
    if exact:
        return matches(option.target, fn.abstract(state), exact=True)
    return fn.satisfies(state, option.target)


def intrinsic_reward(r_e: float, n: int, cfg: IntrinsicRewardConfig, terminated: bool) -> float:
    """Option-terminal shaped reward; zero on non-terminating steps."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    if not terminated:
        return 0.0
    return r_e + cfg.phi - n * cfg.c


def update_ledger(ledger: RewardLedger, option_id: str, r_i: float) -> RewardLedger:
    """Accumulate one option's intrinsic reward into the ledger."""
    return ledger.add(option_id, r_i)


@dataclass
class MetaController:
    """Walks a plan's execution sequence, handing out one option at a time.

    The cursor advances when the current option's termination fires; options
    whose target already holds are skipped without reward. A cursor option
    whose initiation fails is a plan/state desync and raises.
    """

    plan: Plan
    options: Dict[str, SymbolicOption]
    fn: AbstractionFn
    exact: bool = False
    cursor: int = 0
    completed: List[str] = field(default_factory=list)

    def __post_init__(self):
        missing = [i for i in self.plan.execution_sequence if i not in self.options]
        if missing:
            raise ValidationError(f"plan uses options not in the option set: {missing}")

    @property
    def exhausted(self) -> bool:
        return self.cursor >= len(self.plan.execution_sequence)

    def select(self, state: EnvState) -> Tuple[Optional[SymbolicOption], List[str]]:
        """Next pending option whose initiation holds, plus skipped-option ids.

        Returns (None, skipped) when the plan is exhausted. Raises
        NoApplicableOptionError when the cursor option can neither start nor
        be skipped.
        """
        skipped: List[str] = []
        while not self.exhausted:
            oid = self.plan.execution_sequence[self.cursor]
            option = self.options[oid]
            if termination(option, self.fn, state, exact=self.exact):
                skipped.append(oid)
                self.completed.append(oid)
                self.cursor += 1
                continue
            if not initiation(option, self.fn, state, exact=self.exact):
                raise NoApplicableOptionError(
                    f"option {oid}: source subgoal does not hold in the current state"
                )
            return option, skipped
        return None, skipped

    def advance(self, option: SymbolicOption) -> None:
        """Record the current option's termination and move the cursor."""
        if self.exhausted or self.plan.execution_sequence[self.cursor] != option.id:
            raise ValidationError(f"advance called for {option.id}, cursor elsewhere")
        self.completed.append(option.id)
        self.cursor += 1
