"""HDDL-subset planning model.

The subset covers typed predicates, ground primitive tasks with positive and
negative preconditions/effects, abstract tasks, totally ordered decomposition
methods, and a problem with an initial symbolic state and a single-task
initial network. Methods compiled from knowledge trees always carry exactly
one subtask and empty ordering/variable constraints; parsed documents may use
multiple ordered subtasks.

An abstract task may also be refined directly by a primitive ("closure"
refinement); in printed documents these appear as wrapper methods whose names
start with ``close_`` so the text stays plain HDDL.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Tuple

from ..errors import ValidationError
from ..symbolic import GroundAtom, Predicate

CLOSURE_PREFIX = "close_"


@dataclass(frozen=True)
class PrimitiveTask:
    name: str
    parameters: Tuple[Tuple[str, str], ...] = ()
    pre_pos: FrozenSet[GroundAtom] = frozenset()
    pre_neg: FrozenSet[GroundAtom] = frozenset()
    eff_pos: FrozenSet[GroundAtom] = frozenset()
    eff_neg: FrozenSet[GroundAtom] = frozenset()
    cost: float = 1.0

    def __post_init__(self):
        overlap = self.eff_pos & self.eff_neg
        if overlap:
            raise ValidationError(f"action {self.name}: eff+ and eff- overlap on {sorted(map(str, overlap))}")


@dataclass(frozen=True)
class AbstractTask:
    name: str
    parameter_types: Tuple[str, ...] = ()


@dataclass(frozen=True)
class TaskNetwork:
    """Tuple (I, prec, alpha, VC); ordering is the total order of task_ids."""

    task_ids: Tuple[str, ...]
    alpha: Tuple[Tuple[str, str], ...]  # task id -> task name
    ordering: Tuple[Tuple[str, str], ...] = ()
    variable_constraints: Tuple[str, ...] = ()

    @classmethod
    def ordered(cls, task_names: Tuple[str, ...]) -> "TaskNetwork":
        ids = tuple(f"i{k}" for k in range(len(task_names)))
        prec = tuple((ids[k], ids[k + 1]) for k in range(len(ids) - 1))
        return cls(task_ids=ids, alpha=tuple(zip(ids, task_names)), ordering=prec)

    def task_names(self) -> Tuple[str, ...]:
        alpha = dict(self.alpha)
        return tuple(alpha[i] for i in self.task_ids)


@dataclass(frozen=True)
class Method:
    id: str
    abstract_task: str
    subnetwork: TaskNetwork
    variable_constraints: Tuple[str, ...] = ()


@dataclass
class HtnDomain:
    name: str
    types: Tuple[str, ...]
    predicates: Dict[str, Predicate]
    primitives: Dict[str, PrimitiveTask]
    abstracts: Dict[str, AbstractTask]
    methods: Dict[str, Method]
    closures: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def validate(self) -> None:
        for m in self.methods.values():
            if m.abstract_task not in self.abstracts:
                raise ValidationError(f"method {m.id}: undeclared task {m.abstract_task!r}")
            for name in m.subnetwork.task_names():
                if name not in self.abstracts and name not in self.primitives:
                    raise ValidationError(f"method {m.id}: undeclared subtask {name!r}")
        for task, prims in self.closures.items():
            if task not in self.abstracts:
                raise ValidationError(f"closure on undeclared task {task!r}")
            for p in prims:
                if p not in self.primitives:
                    raise ValidationError(f"closure of {task!r} names unknown action {p!r}")

    def refinements(self, task_name: str):
        """Deterministic (sorted) refinements of an abstract task.

        Yields ('method', Method) and ('primitive', PrimitiveTask) entries.
        """
        out = []
        for mid in sorted(self.methods):
            m = self.methods[mid]
            if m.abstract_task == task_name:
                out.append(("method", m))
        for pid in sorted(self.closures.get(task_name, ())):
            out.append(("primitive", self.primitives[pid]))
        return out


@dataclass
class HtnProblem:
    name: str
    domain: HtnDomain
    objects: Dict[str, str]
    init: FrozenSet[GroundAtom]
    tn_init: TaskNetwork

    def validate(self) -> None:
        self.domain.validate()
        names = self.tn_init.task_names()
        if len(names) != 1:
            raise ValidationError(f"initial network must hold a single task, got {len(names)}")
        name = names[0]
        if name not in self.domain.abstracts and name not in self.domain.primitives:
            raise ValidationError(f"initial task {name!r} undeclared")

    @property
    def initial_task(self) -> str:
        return self.tn_init.task_names()[0]
