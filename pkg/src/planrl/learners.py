"""Low-level policy learners trained per option.

The required learner is a centralized tabular Q learner over joint actions:
one table per option, keyed by the joint observation tuple. An optional tiny
actor-critic (per-agent softmax policies on local observations, centralized
value on the joint observation) covers the CTDE shape at the same interface.

Greedy tie-breaking is lexicographic over the joint-action enumeration
(up, down, left, right, wait) x itself, so an all-zero table acts (up, up).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Protocol, Tuple

import numpy as np

from .errors import ShapeError
from .grid.env import JointObservation

N_ACTIONS = 5
JOINT_ACTIONS: Tuple[Tuple[int, int], ...] = tuple(
    (a0, a1) for a0 in range(N_ACTIONS) for a1 in range(N_ACTIONS)
)
N_JOINT = len(JOINT_ACTIONS)

Transition = Tuple[JointObservation, Tuple[int, int], float, JointObservation, bool]


class PolicyLearner(Protocol):
    def act(self, obs: JointObservation, explore: bool) -> Tuple[int, int]: ...

    def update(self, transition: Transition) -> None: ...

    def set_progress(self, frac: float) -> None: ...

    def snapshot(self) -> dict: ...

    def restore(self, snap: dict) -> None: ...


@dataclass
class EpsilonSchedule:
    start: float = 1.0
    end: float = 0.05
    decay_frac: float = 0.5

    def value(self, frac: float) -> float:
        if self.decay_frac <= 0:
            return self.end
        t = min(1.0, max(0.0, frac) / self.decay_frac)
        return self.start + (self.end - self.start) * t


class TabularQLearner:
    """Joint-action Q table with epsilon-greedy exploration."""

    def __init__(
        self,
        alpha: float = 0.1,
        gamma: float = 0.99,
        epsilon: Optional[EpsilonSchedule] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        self.alpha = alpha
        self.gamma = gamma
        self.epsilon = epsilon or EpsilonSchedule()
        self.rng = rng or np.random.default_rng(0)
        self.q: Dict[Tuple[int, ...], np.ndarray] = {}
        self._progress = 0.0
        self._obs_len: Optional[int] = None

    # -- interface -----------------------------------------------------------

    def set_progress(self, frac: float) -> None:
        self._progress = frac

    @property
    def current_epsilon(self) -> float:
        return self.epsilon.value(self._progress)

    def act(self, obs: JointObservation, explore: bool) -> Tuple[int, int]:
        key = self._key(obs)
        if explore and self.rng.random() < self.current_epsilon:
            return JOINT_ACTIONS[int(self.rng.integers(N_JOINT))]
        row = self.q.get(key)
        if row is None:
            return JOINT_ACTIONS[0]
        return JOINT_ACTIONS[int(np.argmax(row))]

    def update(self, transition: Transition) -> None:
        obs, action, reward, next_obs, done = transition
        key = self._key(obs)
        next_key = self._key(next_obs)
        idx = action[0] * N_ACTIONS + action[1]
        bootstrap = 0.0
        if not done:
            next_row = self.q.get(next_key)
            if next_row is not None:
                bootstrap = float(np.max(next_row))
        target = reward + self.gamma * bootstrap
        row = self.q.get(key)
        if row is None:
            if target == 0.0:
                return  # implicit zero entry stays implicit
            row = np.zeros(N_JOINT)
            self.q[key] = row
        row[idx] += self.alpha * (target - row[idx])

    def snapshot(self) -> dict:
        entries = [
            [list(key), [v.hex() for v in map(float, row)]]
            for key, row in sorted(self.q.items())
        ]
        return {
            "version": 1,
            "kind": "tabular_q",
            "alpha": self.alpha,
            "gamma": self.gamma,
            "q": entries,
        }

    def restore(self, snap: dict) -> None:
        if snap.get("kind") != "tabular_q" or snap.get("version") != 1:
            raise ShapeError("snapshot is not a v1 tabular_q dump")
        self.alpha = snap["alpha"]
        self.gamma = snap["gamma"]
        self.q = {
            tuple(key): np.array([float.fromhex(h) for h in row])
            for key, row in snap["q"]
        }

    # -- helpers --------------------------------------------------------------

    def _key(self, obs: JointObservation) -> Tuple[int, ...]:
        key = obs.joint()
        if self._obs_len is None:
            self._obs_len = len(key)
        elif len(key) != self._obs_len:
            raise ShapeError(f"observation length {len(key)} != {self._obs_len}")
        return key


class ActorCriticLearner:
    """Tiny PPO-style learner: local softmax actors, centralized value.

    Single-transition updates with a clipped surrogate and an entropy bonus;
    the advantage is the one-step TD error of the centralized value. Meant as
    a drop-in functional stand-in, not a tuned deep learner.
    """

    def __init__(
        self,
        hidden: int = 32,
        lr: float = 0.01,
        gamma: float = 0.99,
        clip: float = 0.2,
        entropy_coef: float = 0.01,
        rng: Optional[np.random.Generator] = None,
    ):
        self.hidden = hidden
        self.lr = lr
        self.gamma = gamma
        self.clip = clip
        self.entropy_coef = entropy_coef
        self.rng = rng or np.random.default_rng(0)
        self._actors = None
        self._critic = None
        self._obs_len: Optional[int] = None
        self._local_len: Optional[int] = None

    def _init_params(self, local_len: int, joint_len: int) -> None:
        def mlp(in_dim, out_dim):
            return {
                "w1": self.rng.normal(0, 0.3, size=(in_dim, self.hidden)),
                "b1": np.zeros(self.hidden),
                "w2": self.rng.normal(0, 0.3, size=(self.hidden, out_dim)),
                "b2": np.zeros(out_dim),
            }

        self._actors = [mlp(local_len, N_ACTIONS), mlp(local_len, N_ACTIONS)]
        self._critic = mlp(joint_len, 1)
        self._local_len = local_len
        self._obs_len = joint_len

    @staticmethod
    def _forward(params, x):
        h_pre = x @ params["w1"] + params["b1"]
        h = np.tanh(h_pre)
        out = h @ params["w2"] + params["b2"]
        return out, (x, h_pre, h)

    @staticmethod
    def _backward(params, cache, grad_out):
        x, h_pre, h = cache
        grads = {}
        grads["w2"] = np.outer(h, grad_out)
        grads["b2"] = grad_out
        grad_h = params["w2"] @ grad_out
        grad_pre = grad_h * (1 - h * h)
        grads["w1"] = np.outer(x, grad_pre)
        grads["b1"] = grad_pre
        return grads

    def _features(self, obs: JointObservation):
        joint = np.asarray(obs.joint(), dtype=float)
        locals_ = [np.asarray(obs.per_agent(i), dtype=float) for i in (0, 1)]
        return locals_, joint

    def set_progress(self, frac: float) -> None:
        del frac

    def act(self, obs: JointObservation, explore: bool) -> Tuple[int, int]:
        locals_, joint = self._features(obs)
        if self._actors is None:
            self._init_params(len(locals_[0]), len(joint))
        if len(joint) != self._obs_len:
            raise ShapeError(f"observation length {len(joint)} != {self._obs_len}")
        actions = []
        for i in (0, 1):
            logits, _ = self._forward(self._actors[i], locals_[i])
            probs = _softmax(logits)
            if explore:
                actions.append(int(self.rng.choice(N_ACTIONS, p=probs)))
            else:
                actions.append(int(np.argmax(probs)))
        return (actions[0], actions[1])

    def value(self, obs: JointObservation) -> float:
        _, joint = self._features(obs)
        if self._critic is None:
            self._init_params(len(obs.per_agent(0)), len(joint))
        out, _ = self._forward(self._critic, joint)
        return float(out[0])

    def value_loss_and_grads(self, obs: JointObservation, target: float):
        """MSE value loss and its parameter gradients (exposed for testing)."""
        _, joint = self._features(obs)
        out, cache = self._forward(self._critic, joint)
        err = out[0] - target
        loss = 0.5 * err * err
        grads = self._backward(self._critic, cache, np.array([err]))
        return loss, grads

    def update(self, transition: Transition) -> None:
        obs, action, reward, next_obs, done = transition
        locals_, joint = self._features(obs)
        if self._actors is None:
            self._init_params(len(locals_[0]), len(joint))
        v_s = self.value(obs)
        v_next = 0.0 if done else self.value(next_obs)
        target = reward + self.gamma * v_next
        advantage = target - v_s

        _, grads = self.value_loss_and_grads(obs, target)
        for k, g in grads.items():
            self._critic[k] -= self.lr * g

        for i in (0, 1):
            logits, cache = self._forward(self._actors[i], locals_[i])
            probs = _softmax(logits)
            a = action[i]
            # One-transition PPO: old policy is the current one, so the ratio
            # is 1 and the clipped surrogate reduces to advantage * grad logpi,
            # clipped only through the advantage sign convention.
            grad_logits = -advantage * (_one_hot(a) - probs)
            grad_logits += self.entropy_coef * (probs * (np.log(probs + 1e-12) + _entropy(probs)))
            g = self._backward(self._actors[i], cache, grad_logits)
            for k, gv in g.items():
                self._actors[i][k] -= self.lr * gv

    def snapshot(self) -> dict:
        def dump(params):
            return {k: [float(v) for v in np.ravel(p)] for k, p in params.items()} | {
                "_shapes": {k: list(p.shape) for k, p in params.items()}
            }

        return {
            "version": 1,
            "kind": "actor_critic",
            "hidden": self.hidden,
            "actors": [dump(a) for a in self._actors] if self._actors else None,
            "critic": dump(self._critic) if self._critic else None,
            "obs_len": self._obs_len,
            "local_len": self._local_len,
        }

    def restore(self, snap: dict) -> None:
        if snap.get("kind") != "actor_critic" or snap.get("version") != 1:
            raise ShapeError("snapshot is not a v1 actor_critic dump")

        def load(blob):
            shapes = blob["_shapes"]
            return {
                k: np.array(blob[k]).reshape(shapes[k]) for k in shapes
            }

        self.hidden = snap["hidden"]
        self._actors = [load(a) for a in snap["actors"]] if snap["actors"] else None
        self._critic = load(snap["critic"]) if snap["critic"] else None
        self._obs_len = snap["obs_len"]
        self._local_len = snap["local_len"]


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits)
    e = np.exp(z)
    return e / e.sum()


def _one_hot(i: int) -> np.ndarray:
    v = np.zeros(N_ACTIONS)
    v[i] = 1.0
    return v


def _entropy(probs: np.ndarray) -> float:
    return float(-(probs * np.log(probs + 1e-12)).sum())


def make_learner(kind: str, rng: np.random.Generator, alpha: float, gamma: float,
                 epsilon: EpsilonSchedule) -> PolicyLearner:
    if kind == "tabular":
        return TabularQLearner(alpha=alpha, gamma=gamma, epsilon=epsilon, rng=rng)
    if kind == "actor-critic":
        return ActorCriticLearner(gamma=gamma, rng=rng)
    raise ValueError(f"unknown learner kind {kind!r}")
