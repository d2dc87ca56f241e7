from .model import (
    CLOSURE_PREFIX,
    AbstractTask,
    HtnDomain,
    HtnProblem,
    Method,
    PrimitiveTask,
    TaskNetwork,
)
from .compiler import compile_tree, task_name
from .textio import parse_hddl, print_hddl, problems_equal

__all__ = [
    "CLOSURE_PREFIX",
    "AbstractTask",
    "HtnDomain",
    "HtnProblem",
    "Method",
    "PrimitiveTask",
    "TaskNetwork",
    "compile_tree",
    "task_name",
    "parse_hddl",
    "print_hddl",
    "problems_equal",
]
