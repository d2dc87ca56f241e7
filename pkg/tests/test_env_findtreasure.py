import numpy as np
import pytest

from planrl.errors import SteppedTerminatedEnv, VariantError
from planrl.grid.env import DOWN, LEFT, RIGHT, UP, WAIT, Cause, GridEnv

GO_TO_LEVER = [(WAIT, UP), (WAIT, LEFT)]  # b: (5,6) -> (5,5) -> (4,5)
R_TO_TREASURE = [(RIGHT, WAIT), (RIGHT, WAIT)] + [(UP, WAIT)] * 5


def rollout(env, state, actions):
    outs = []
    for a in actions:
        state, out = env.step(state, a)
        outs.append(out)
    return state, outs


def test_reset_positions(ft_env, ft_map):
    state, obs = ft_env.reset(seed=7)
    lower = ft_map.named_regions["lower"]
    upper = ft_map.named_regions["upper"]
    assert state.agents[0] in lower and state.agents[1] in lower
    assert all(t in upper for t in ft_map.treasures)
    assert obs.joint() == (1, 6, 5, 6)


def test_reset_deterministic(ft_env):
    s1, _ = ft_env.reset(seed=3)
    s2, _ = ft_env.reset(seed=3)
    assert s1 == s2


def test_scripted_goal_run(ft_env):
    state, _ = ft_env.reset()
    state, outs = rollout(ft_env, state, GO_TO_LEVER + R_TO_TREASURE)
    assert outs[-1].external_reward == 100.0
    assert outs[-1].info is Cause.GOAL
    assert state.terminated
    assert sum(o.external_reward for o in outs) == 100.0


def test_wait_is_a_no_event_step(ft_env):
    state, _ = ft_env.reset()
    _, out = ft_env.step(state, (WAIT, WAIT))
    assert out.external_reward == 0.0
    assert out.n_step == 0
    assert not out.terminated


def test_wall_bump_penalty(ft_env):
    state, _ = ft_env.reset()
    _, out = ft_env.step(state, (LEFT, WAIT))  # r1 at (1,6) walks into the wall
    assert out.external_reward == pytest.approx(-0.1)
    assert out.n_step == 1


def test_both_bump_doubles_penalty(ft_env):
    state, _ = ft_env.reset()
    _, out = ft_env.step(state, (LEFT, RIGHT))
    assert out.external_reward == pytest.approx(-0.2)
    assert out.n_step == 1


def test_trap_requires_lever_conjunction(ft_env):
    # r1 standing on the trap alone is harmless
    state, _ = ft_env.reset()
    state, outs = rollout(ft_env, state, [(UP, WAIT), (RIGHT, WAIT)])  # r1 -> (2,5) trap
    assert not state.terminated
    # now b reaches the lever while r1 sits on the trap
    state, outs = rollout(ft_env, state, GO_TO_LEVER)
    assert state.terminated
    assert state.cause is Cause.TRAP
    assert outs[-1].external_reward == 3.0


def test_gate_toggles_with_lever_occupancy(ft_env):
    state, _ = ft_env.reset()
    # without the lever held, the channel (3,3) is impassable
    state, outs = rollout(ft_env, state, [(RIGHT, WAIT), (RIGHT, WAIT), (UP, WAIT), (UP, WAIT)])
    assert state.agents[0] == (3, 4)
    state_blocked, out = ft_env.step(state, (UP, WAIT))
    assert state_blocked.agents[0] == (3, 4)
    assert out.external_reward == pytest.approx(-0.1)
    # hold the lever and the same move passes
    state_held, _ = rollout(ft_env, state, GO_TO_LEVER)
    state_in, out = ft_env.step(state_held, (UP, WAIT))
    assert state_in.agents[0] == (3, 3)
    assert out.external_reward == 0.0
    # lever released: the agent inside the channel can still leave
    state_rel, _ = ft_env.step(state_in, (WAIT, RIGHT))
    assert "channel" not in {g for g in state_rel.gates_open}
    state_out, out = ft_env.step(state_rel, (UP, WAIT))
    assert state_out.agents[0] == (3, 2)
    assert out.external_reward == 0.0


def test_step_limit_termination(ft_map):
    env = GridEnv(ft_map, max_steps=3)
    state, _ = env.reset()
    for _ in range(3):
        state, out = env.step(state, (WAIT, WAIT))
    assert state.terminated
    assert state.cause is Cause.STEP_LIMIT
    assert out.external_reward == 0.0


def test_step_after_termination_raises(ft_map):
    env = GridEnv(ft_map, max_steps=1)
    state, _ = env.reset()
    state, _ = env.step(state, (WAIT, WAIT))
    with pytest.raises(SteppedTerminatedEnv):
        env.step(state, (WAIT, WAIT))


def test_agents_cannot_share_a_cell(ft_env):
    state, _ = ft_env.reset()
    # drive both agents toward the same middle cell (3,6)
    state, _ = rollout(ft_env, state, [(RIGHT, LEFT)])
    assert state.agents[0] != state.agents[1]
    state, _ = rollout(ft_env, state, [(RIGHT, LEFT)])
    assert state.agents[0] != state.agents[1]


def test_findtreasure_rejects_task_variant(ft_map):
    with pytest.raises(VariantError):
        GridEnv(ft_map, task=2)


def test_determinism_same_state_same_action(ft_env):
    state, _ = ft_env.reset()
    s1, o1 = ft_env.step(state, (UP, LEFT))
    s2, o2 = ft_env.step(state, (UP, LEFT))
    assert s1 == s2
    assert o1.external_reward == o2.external_reward


ALLOWED_FT = {
    round(base + pen, 10)
    for base in (0.0, 3.0, 100.0)
    for pen in (0.0, -0.1, -0.2)
}


def test_random_walk_fuzz(ft_env, ft_map):
    rng = np.random.default_rng(0)
    state, _ = ft_env.reset()
    walls = ft_map.walls
    for _ in range(100_000):
        if state.terminated:
            state, _ = ft_env.reset()
        a = (int(rng.integers(5)), int(rng.integers(5)))
        state, out = ft_env.step(state, a)
        assert state.agents[0] not in walls
        assert state.agents[1] not in walls
        assert out.n_step == (1 if out.external_reward < 0 else 0)
        assert round(out.external_reward, 10) in ALLOWED_FT
