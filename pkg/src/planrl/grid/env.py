"""Deterministic two-agent gridworld engine.

Implements the FindTreasure and MoveBox families behind one functional step
interface: ``step(state, joint_action) -> (next_state, outcome)``. The engine
object holds only static data (map, task variant, step limit); all mutable
episode state lives in the immutable EnvState passed in and out, so instances
are trivially safe to share across sequential episodes and to run in parallel
across seeds.

Reward schedule (shared scalar, identical for both agents):

* goal event (agent on treasure / box into goal region): +100, terminate
* FindTreasure trap (one agent on lever while the other stands on the trap):
  +3, terminate
* MoveBox trap (box pushed onto a trap cell): +10, terminate
* box pushed onto the active key spot: +5, key collected, channel gates open
* each agent blocked by a wall, closed gate, or the box: -0.1

All events of one step are summed; ``n_step`` is 1 exactly when the summed
reward is negative.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Optional, Tuple

from ..errors import SteppedTerminatedEnv, ValidationError, VariantError
from .gridmap import GridMap

Cell = Tuple[int, int]
JointAction = Tuple[int, int]

UP, DOWN, LEFT, RIGHT, WAIT = range(5)
ACTION_NAMES = ("up", "down", "left", "right", "wait")
DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0), (0, 0))

FINDTREASURE = "findtreasure"
MOVEBOX = "movebox"

GATE_GROUP = "channel"

REWARD_GOAL = 100.0
REWARD_TRAP_FINDTREASURE = 3.0
REWARD_TRAP_MOVEBOX = 10.0
REWARD_KEY = 5.0
REWARD_BLOCKED = -0.1

DEFAULT_MAX_STEPS = {FINDTREASURE: 100, MOVEBOX: 300}


class Cause(str, Enum):
    RUNNING = "running"
    GOAL = "goal"
    TRAP = "trap"
    STEP_LIMIT = "step_limit"


@dataclass(frozen=True)
class EnvState:
    agents: Tuple[Cell, Cell]
    box: Optional[Cell]
    carrying: bool
    keys: FrozenSet[str]
    gates_open: FrozenSet[str]
    step_count: int
    terminated: bool
    cause: Cause


@dataclass(frozen=True)
class JointObservation:
    """Deterministic view of an EnvState.

    FindTreasure observations are the position coordinates of both agents;
    MoveBox adds box coordinates, the carrying flag, and a key bitmask.
    """

    agents: Tuple[Cell, Cell]
    box: Optional[Cell]
    carrying: bool
    key_mask: int

    def joint(self) -> Tuple[int, ...]:
        (x0, y0), (x1, y1) = self.agents
        if self.box is None:
            return (x0, y0, x1, y1)
        bx, by = self.box
        return (x0, y0, x1, y1, bx, by, int(self.carrying), self.key_mask)

    def per_agent(self, i: int) -> Tuple[int, ...]:
        own = self.agents[i]
        other = self.agents[1 - i]
        if self.box is None:
            return own + other
        return own + other + self.box + (int(self.carrying), self.key_mask)


@dataclass(frozen=True)
class StepOutcome:
    next_observation: JointObservation
    external_reward: float
    n_step: int
    terminated: bool
    info: Cause


class GridEnv:
    """One environment family instance bound to a map and task variant."""

    def __init__(self, grid_map: GridMap, task: int = 0, max_steps: Optional[int] = None):
        self.grid_map = grid_map
        self.family = MOVEBOX if grid_map.box_start is not None else FINDTREASURE
        if self.family == FINDTREASURE:
            if not grid_map.treasures or not grid_map.levers:
                raise ValidationError("findtreasure map needs a treasure and a lever")
            if task not in (0, None):
                raise VariantError(f"findtreasure has no task variant {task}")
            self.task = 0
        else:
            if not grid_map.goals:
                raise ValidationError("movebox map needs a goal region")
            if task not in (0, 1, 2, 3):
                raise VariantError(f"movebox task must be 0..3, got {task}")
            if task != 0 and str(task) not in grid_map.key_spots:
                raise VariantError(f"map has no key spot for task {task}")
            self.task = task
        self.max_steps = max_steps if max_steps is not None else DEFAULT_MAX_STEPS[self.family]
        self._active_keys: FrozenSet[Cell] = (
            grid_map.key_spots.get(str(self.task), frozenset()) if self.family == MOVEBOX else frozenset()
        )

    # -- episode interface ---------------------------------------------------

    def reset(self, seed: Optional[int] = None) -> Tuple[EnvState, JointObservation]:
        # Spawns are fixed by the map; the seed argument is accepted for
        # interface uniformity with stochastic environments.
        del seed
        gates: FrozenSet[str] = frozenset()
        if self.family == MOVEBOX and self.task == 0:
            gates = frozenset({GATE_GROUP})
        state = EnvState(
            agents=self.grid_map.agent_starts,
            box=self.grid_map.box_start,
            carrying=False,
            keys=frozenset(),
            gates_open=gates,
            step_count=0,
            terminated=False,
            cause=Cause.RUNNING,
        )
        return state, self.observe(state)

    def observe(self, state: EnvState) -> JointObservation:
        mask = 0
        for k in state.keys:
            mask |= 1 << (int(k) - 1)
        return JointObservation(
            agents=state.agents, box=state.box, carrying=state.carrying, key_mask=mask
        )

    def step(self, state: EnvState, action: JointAction) -> Tuple[EnvState, StepOutcome]:
        if state.terminated:
            raise SteppedTerminatedEnv(f"episode already ended ({state.cause.value})")
        reward = 0.0
        gm = self.grid_map

        # Gate passability for this step. FindTreasure gates follow current
        # lever occupancy; MoveBox gates are a persistent latch.
        if self.family == FINDTREASURE:
            open_now = any(a in gm.levers for a in state.agents)
        else:
            open_now = GATE_GROUP in state.gates_open

        agents = state.agents
        box = state.box
        carrying = state.carrying
        keys = state.keys

        if carrying:
            a0, a1 = action
            if a0 == a1 and a0 != WAIT:
                dx, dy = DELTAS[a0]
                nb = (box[0] + dx, box[1] + dy)
                n0 = (agents[0][0] + dx, agents[0][1] + dy)
                n1 = (agents[1][0] + dx, agents[1][1] + dy)
                if all(self._passable(c, open_now) for c in (nb, n0, n1)):
                    box, agents = nb, (n0, n1)
                else:
                    reward += 2 * REWARD_BLOCKED
            # Mismatched choices while attached move nothing and hit nothing.
        else:
            dests = []
            for i in (0, 1):
                a = action[i]
                if a == WAIT:
                    dests.append(agents[i])
                    continue
                dx, dy = DELTAS[a]
                t = (agents[i][0] + dx, agents[i][1] + dy)
                if not self._passable(t, open_now) or (box is not None and t == box):
                    reward += REWARD_BLOCKED
                    t = agents[i]
                dests.append(t)
            dests = self._resolve_agent_conflicts(agents, dests)
            agents = (dests[0], dests[1])
            if box is not None and not carrying:
                left = (box[0] - 1, box[1])
                right = (box[0] + 1, box[1])
                if {agents[0], agents[1]} == {left, right}:
                    carrying = True

        terminated = False
        cause = Cause.RUNNING
        gates = state.gates_open

        if self.family == FINDTREASURE:
            gates = frozenset({GATE_GROUP}) if any(a in gm.levers for a in agents) else frozenset()
            if any(a in gm.treasures for a in agents):
                reward += REWARD_GOAL
                terminated, cause = True, Cause.GOAL
            elif (agents[0] in gm.levers and agents[1] in gm.traps) or (
                agents[1] in gm.levers and agents[0] in gm.traps
            ):
                reward += REWARD_TRAP_FINDTREASURE
                terminated, cause = True, Cause.TRAP
        else:
            if box != state.box:
                if box in gm.goals:
                    reward += REWARD_GOAL
                    terminated, cause = True, Cause.GOAL
                elif box in gm.traps:
                    reward += REWARD_TRAP_MOVEBOX
                    terminated, cause = True, Cause.TRAP
                elif box in self._active_keys and str(self.task) not in keys:
                    reward += REWARD_KEY
                    keys = keys | {str(self.task)}
                    gates = gates | {GATE_GROUP}

        step_count = state.step_count + 1
        if not terminated and step_count >= self.max_steps:
            terminated, cause = True, Cause.STEP_LIMIT

        new_state = EnvState(
            agents=agents,
            box=box,
            carrying=carrying,
            keys=keys,
            gates_open=gates,
            step_count=step_count,
            terminated=terminated,
            cause=cause,
        )
        outcome = StepOutcome(
            next_observation=self.observe(new_state),
            external_reward=reward,
            n_step=1 if reward < 0 else 0,
            terminated=terminated,
            info=cause,
        )
        return new_state, outcome

    # -- helpers ---------------------------------------------------------------

    def _passable(self, cell: Cell, gates_open: bool) -> bool:
        gm = self.grid_map
        if gm.is_wall(cell):
            return False
        if cell in gm.gates and not gates_open:
            return False
        return True

    @staticmethod
    def _resolve_agent_conflicts(old, dests):
        # Agent-agent conflicts block silently (no obstacle was hit): same
        # destination, position swaps, and moves onto a non-vacating agent all
        # revert. Iterate because a revert can invalidate the other move.
        dests = list(dests)
        for _ in range(3):
            changed = False
            if dests[0] == dests[1]:
                if dests[0] != old[0] or dests[1] != old[1]:
                    dests = list(old)
                    changed = True
            if dests[0] == old[1] and dests[1] == old[0] and dests[0] != old[0]:
                dests = list(old)
                changed = True
            for i in (0, 1):
                j = 1 - i
                if dests[i] == old[j] and dests[j] == old[j] and dests[i] != old[i]:
                    dests[i] = old[i]
                    changed = True
            if not changed:
                break
        return dests


def goal_atoms_hold(env: GridEnv, state: EnvState) -> bool:
    """True in exactly the states the environment counts as goal states."""
    if env.family == FINDTREASURE:
        return any(a in env.grid_map.treasures for a in state.agents)
    return state.box in env.grid_map.goals
