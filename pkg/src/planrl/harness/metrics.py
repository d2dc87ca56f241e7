"""Per-episode metrics, cross-seed aggregation, and CSV/plot emission.

Curves are rolling means over a configurable episode window, averaged across
seeds per episode index. CSV output is byte-deterministic for a fixed run
(floats via repr).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from ..errors import IoError, LengthMismatchError


@dataclass
class MetricsLog:
    env: str
    task: int
    ablation: str
    seed: int
    window: int
    returns: List[float] = field(default_factory=list)
    successes: List[int] = field(default_factory=list)
    steps: List[int] = field(default_factory=list)
    causes: List[str] = field(default_factory=list)
    plans: List[str] = field(default_factory=list)
    ledger_totals: List[float] = field(default_factory=list)

    def record(self, ret: float, success: bool, steps: int, cause: str, plan: str,
               ledger_total: float) -> None:
        self.returns.append(ret)
        self.successes.append(int(success))
        self.steps.append(steps)
        self.causes.append(cause)
        self.plans.append(plan)
        self.ledger_totals.append(ledger_total)

    def __len__(self) -> int:
        return len(self.returns)

    def rolling_success(self) -> np.ndarray:
        return rolling_mean(np.asarray(self.successes, dtype=float), self.window)

    def rolling_return(self) -> np.ndarray:
        return rolling_mean(np.asarray(self.returns, dtype=float), self.window)

    def final_rolling_success(self) -> float:
        return float(np.mean(self.successes[-self.window:]))

    def final_rolling_return(self) -> float:
        return float(np.mean(self.returns[-self.window:]))

    def episodes_csv(self) -> str:
        lines = ["episode,steps,cum_steps,return,success,cause,plan,ledger_total"]
        cum = 0
        for i in range(len(self)):
            cum += self.steps[i]
            lines.append(
                f"{i},{self.steps[i]},{cum},{self.returns[i]!r},{self.successes[i]},"
                f"{self.causes[i]},{self.plans[i]},{self.ledger_totals[i]!r}"
            )
        return "\n".join(lines) + "\n"


def rolling_mean(x: np.ndarray, window: int) -> np.ndarray:
    """Mean over the trailing window (shorter prefix windows included)."""
    if len(x) == 0:
        return x
    c = np.cumsum(np.insert(x, 0, 0.0))
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(0, idx - window)
    return (c[idx] - c[lo]) / (idx - lo)


@dataclass
class Summary:
    episodes: int
    window: int
    reward_mean: np.ndarray
    reward_std: np.ndarray
    success_mean: np.ndarray
    success_std: np.ndarray

    def final_row(self) -> Dict[str, float]:
        return {
            "reward_mean": float(self.reward_mean[-1]),
            "reward_std": float(self.reward_std[-1]),
            "success_mean": float(self.success_mean[-1]),
            "success_std": float(self.success_std[-1]),
        }

    def csv(self) -> str:
        lines = ["episode,reward_mean,reward_std,success_mean,success_std"]
        for i in range(self.episodes):
            lines.append(
                f"{i},{float(self.reward_mean[i])!r},{float(self.reward_std[i])!r},"
                f"{float(self.success_mean[i])!r},{float(self.success_std[i])!r}"
            )
        return "\n".join(lines) + "\n"


def aggregate(logs: Sequence[MetricsLog]) -> Summary:
    """Cross-seed mean and std of the rolling curves, per episode index."""
    if not logs:
        raise LengthMismatchError("no logs to aggregate")
    lengths = {len(log) for log in logs}
    if len(lengths) != 1:
        raise LengthMismatchError(f"logs have unequal lengths {sorted(lengths)}")
    rewards = np.stack([log.rolling_return() for log in logs])
    successes = np.stack([log.rolling_success() for log in logs])
    return Summary(
        episodes=lengths.pop(),
        window=logs[0].window,
        reward_mean=rewards.mean(axis=0),
        reward_std=rewards.std(axis=0),
        success_mean=successes.mean(axis=0),
        success_std=successes.std(axis=0),
    )


def emit(summary: Summary, fmt: str, out_dir) -> List[Path]:
    """Write summary.csv or the reward/success plot images; returns paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            path = out / "summary.csv"
            path.write_text(summary.csv())
            return [path]
        if fmt == "plot":
            return _plot(summary, out)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    raise IoError(f"unknown emission format {fmt!r}")


def _plot(summary: Summary, out: Path) -> List[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = np.arange(summary.episodes)
    paths = []
    for name, mean, std, label in (
        ("reward", summary.reward_mean, summary.reward_std, "rolling mean return"),
        ("success", summary.success_mean, summary.success_std, "rolling success rate"),
    ):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(x, mean, lw=1.5)
        ax.fill_between(x, mean - std, mean + std, alpha=0.25)
        ax.set_xlabel("episode")
        ax.set_ylabel(f"{label} (window {summary.window})")
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = out / f"{name}.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        paths.append(path)
    return paths
