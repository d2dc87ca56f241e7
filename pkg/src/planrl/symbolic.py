"""Ground-atom symbolic states and the state-abstraction function.

A symbolic state is a closed-world set of ground atoms over a declared
vocabulary. The abstraction function maps concrete environment states to
symbolic states; option initiation and termination are subset matches of a
subgoal against the abstraction of the current state (exact-equality matching
is available as a configuration switch).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from .errors import EvaluatorError, ParseError, ValidationError, VocabularyMismatch
from .grid.env import FINDTREASURE, GridEnv, EnvState

_ATOM_RE = re.compile(r"^([A-Za-z_][\w]*)\((.*)\)$")


@dataclass(frozen=True)
class Predicate:
    name: str
    arity: int
    argument_types: Tuple[str, ...]

    def __post_init__(self):
        if len(self.argument_types) != self.arity:
            raise ValidationError(
                f"predicate {self.name}: arity {self.arity} != {len(self.argument_types)} types"
            )


@dataclass(frozen=True, order=True)
class GroundAtom:
    predicate: str
    args: Tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(self.args)})"

    @classmethod
    def parse(cls, text: str, line: Optional[int] = None) -> "GroundAtom":
        m = _ATOM_RE.match(text.strip())
        if not m:
            raise ParseError(f"bad atom {text!r}", line=line)
        name, argtext = m.groups()
        args = tuple(a.strip() for a in argtext.split(",")) if argtext.strip() else ()
        if any(not a for a in args):
            raise ParseError(f"bad atom arguments in {text!r}", line=line)
        return cls(name, args)


class SymbolicState:
    """Immutable set of ground atoms, optionally tagged with a vocabulary id."""

    __slots__ = ("atoms", "vocabulary")

    def __init__(self, atoms: Iterable[GroundAtom], vocabulary: Optional[str] = None):
        self.atoms: FrozenSet[GroundAtom] = frozenset(atoms)
        self.vocabulary = vocabulary

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolicState) and self.atoms == other.atoms

    def __hash__(self) -> int:
        return hash(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        return "{" + ", ".join(str(a) for a in self.sorted_atoms()) + "}"

    def sorted_atoms(self) -> Tuple[GroundAtom, ...]:
        return tuple(sorted(self.atoms))


def matches(target: SymbolicState, current: SymbolicState, exact: bool = False) -> bool:
    """True when the subgoal `target` holds in `current` (subset semantics)."""
    if (
        target.vocabulary is not None
        and current.vocabulary is not None
        and target.vocabulary != current.vocabulary
    ):
        raise VocabularyMismatch(f"{target.vocabulary!r} vs {current.vocabulary!r}")
    if exact:
        return target.atoms == current.atoms
    return target.atoms <= current.atoms


Evaluator = Callable[[EnvState, Tuple[str, ...]], bool]


class AbstractionFn:
    """Total, deterministic map from environment states to symbolic states."""

    def __init__(
        self,
        vocabulary: Mapping[str, Predicate],
        objects: Mapping[str, str],
        evaluators: Mapping[str, Evaluator],
        vocab_id: str,
    ):
        self.vocabulary = dict(vocabulary)
        self.objects = dict(objects)
        self.evaluators = dict(evaluators)
        self.vocab_id = vocab_id
        missing = sorted(set(self.vocabulary) - set(self.evaluators))
        if missing:
            raise EvaluatorError(f"no evaluator for predicates: {', '.join(missing)}")
        self._by_type: Dict[str, Tuple[str, ...]] = {}
        for name, typ in self.objects.items():
            self._by_type.setdefault(typ, ())
            self._by_type[typ] += (name,)

    def holds(self, atom: GroundAtom, state: EnvState) -> bool:
        pred = self.vocabulary.get(atom.predicate)
        if pred is None:
            raise EvaluatorError(f"unknown predicate {atom.predicate!r}")
        if len(atom.args) != pred.arity:
            raise EvaluatorError(f"{atom} has wrong arity for {pred.name}/{pred.arity}")
        for arg in atom.args:
            if arg not in self.objects:
                raise EvaluatorError(f"unknown object {arg!r} in {atom}")
        return self.evaluators[atom.predicate](state, atom.args)

    def satisfies(self, state: EnvState, target: SymbolicState) -> bool:
        return all(self.holds(atom, state) for atom in target.atoms)

    def abstract(self, state: EnvState) -> SymbolicState:
        atoms = []
        for name in sorted(self.vocabulary):
            pred = self.vocabulary[name]
            pools = [self._by_type.get(t, ()) for t in pred.argument_types]
            for args in product(*pools):
                atom = GroundAtom(name, tuple(args))
                if self.evaluators[name](state, atom.args):
                    atoms.append(atom)
        return SymbolicState(atoms, vocabulary=self.vocab_id)


def build_abstraction(env: GridEnv, vocabulary, objects, vocab_id: str) -> AbstractionFn:
    """Bind the standard predicate semantics to one environment instance.

    Agent objects bind to map starts in declaration order (first 'r', then
    'b'); every region-argument object must name a map region.
    """
    gm = env.grid_map
    agent_names = [n for n, t in objects.items() if t == "agent"]
    if len(agent_names) != 2:
        raise ValidationError(f"need exactly 2 agent objects, got {agent_names}")
    agent_idx = {name: i for i, name in enumerate(agent_names)}

    region_types = set()
    for pred in vocabulary.values():
        if pred.name in ("at", "in_room", "box_in"):
            region_types.update(pred.argument_types[-1:])
    region_objs = [n for n, t in objects.items() if t in region_types]
    missing = sorted(n for n in region_objs if n not in gm.named_regions)
    if missing:
        raise EvaluatorError(f"objects name no map region: {', '.join(missing)}")

    def _agent_in(state: EnvState, agent: str, region: str) -> bool:
        cells = gm.named_regions.get(region)
        if cells is None:
            raise EvaluatorError(f"unknown region {region!r}")
        return state.agents[agent_idx[agent]] in cells

    evaluators: Dict[str, Evaluator] = {}
    if "at" in vocabulary:
        evaluators["at"] = lambda s, a: _agent_in(s, a[0], a[1])
    if "in_room" in vocabulary:
        evaluators["in_room"] = lambda s, a: _agent_in(s, a[0], a[1])
    if "box_in" in vocabulary:
        def _box_in(s: EnvState, a) -> bool:
            cells = gm.named_regions.get(a[0])
            if cells is None:
                raise EvaluatorError(f"unknown region {a[0]!r}")
            return s.box is not None and s.box in cells

        evaluators["box_in"] = _box_in
    if "carrying" in vocabulary:
        evaluators["carrying"] = lambda s, a: s.carrying
    if "has_key" in vocabulary:
        evaluators["has_key"] = lambda s, a: bool(s.keys)
    if "at_goal" in vocabulary:
        if env.family == FINDTREASURE:
            evaluators["at_goal"] = lambda s, a: any(p in gm.treasures for p in s.agents)
        else:
            evaluators["at_goal"] = lambda s, a: s.box is not None and s.box in gm.goals

    unknown = sorted(set(vocabulary) - set(evaluators))
    if unknown:
        raise EvaluatorError(f"no semantics for predicates: {', '.join(unknown)}")
    return AbstractionFn(vocabulary, objects, evaluators, vocab_id)
