"""Plan-guided multi-agent reinforcement learning on trap-laden gridworlds.

Subgoal knowledge is authored as a rooted tree, compiled into a hierarchical
planning domain and a matching set of symbolic options; a plan-space solver
biased by accumulated option rewards picks a subgoal chain each episode, and
per-option low-level learners train on an option-terminal intrinsic reward.
"""

__version__ = "0.1.0"
