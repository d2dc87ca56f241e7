"""Subgoal trees: the hand-authored task knowledge for one environment.

A knowledge file declares a predicate vocabulary, a typed object universe, and
a rooted tree of subgoal nodes. The root is the goal state, the leaves include
the initial state, and every edge carries an identifier that later doubles as
both a planning-method id and a symbolic-option id.

Line-oriented grammar (``#`` starts a comment)::

    predicate at/2 agent region
    object r1 : agent
    node both_lower { in_room(r1,lower) in_room(r2,lower) } initial
    node treasure_found { at_goal() } root
    edge treasure_found -> r1_near_treasure : so_12

Atoms are written without internal whitespace.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import (
    BindingTypeError,
    CycleError,
    MultipleRootsError,
    NotALeafError,
    ParseError,
    UnknownNodeError,
    UnknownPredicateError,
    ValidationError,
)
from .symbolic import GroundAtom, Predicate, SymbolicState

_PRED_RE = re.compile(r"^predicate\s+([A-Za-z_]\w*)/(\d+)\s*(.*)$")
_OBJ_RE = re.compile(r"^object\s+([A-Za-z_]\w*)\s*:\s*([A-Za-z_]\w*)$")
_NODE_RE = re.compile(r"^node\s+([A-Za-z_]\w*)\s*\{(.*)\}\s*(root|initial|root initial)?\s*$")
_EDGE_RE = re.compile(r"^edge\s+([A-Za-z_]\w*)\s*->\s*([A-Za-z_]\w*)\s*:\s*([A-Za-z_]\w*)$")


@dataclass(frozen=True)
class TreeNode:
    id: str
    subgoal: SymbolicState
    is_root: bool = False
    is_initial_leaf: bool = False


@dataclass(frozen=True)
class TreeEdge:
    parent: str
    child: str
    edge_id: str


@dataclass
class KnowledgeTree:
    nodes: Dict[str, TreeNode]
    edges: Dict[str, TreeEdge]
    vocabulary: Dict[str, Predicate]
    objects: Dict[str, str]
    name: str = "knowledge"
    _children: Dict[str, List[str]] = field(default_factory=dict, repr=False)
    _parent_edge: Dict[str, TreeEdge] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._reindex()

    def _reindex(self) -> None:
        self._children = {nid: [] for nid in self.nodes}
        self._parent_edge = {}
        for edge in self.edges.values():
            self._children[edge.parent].append(edge.child)
            self._parent_edge[edge.child] = edge

    @property
    def root_id(self) -> str:
        return next(nid for nid, n in self.nodes.items() if n.is_root)

    @property
    def initial_leaf_ids(self) -> Tuple[str, ...]:
        return tuple(nid for nid, n in self.nodes.items() if n.is_initial_leaf)

    def children(self, node_id: str) -> Tuple[str, ...]:
        if node_id not in self.nodes:
            raise UnknownNodeError(node_id)
        return tuple(self._children[node_id])

    def parent_edge(self, node_id: str) -> Optional[TreeEdge]:
        if node_id not in self.nodes:
            raise UnknownNodeError(node_id)
        return self._parent_edge.get(node_id)

    def is_leaf(self, node_id: str) -> bool:
        return not self.children(node_id)

    def leaf_ids(self) -> Tuple[str, ...]:
        return tuple(nid for nid in self.nodes if self.is_leaf(nid))

    def validate(self) -> None:
        roots = [nid for nid, n in self.nodes.items() if n.is_root]
        if len(roots) > 1:
            raise MultipleRootsError(f"root flags on {roots}")
        if not roots:
            raise ValidationError("no node is flagged root")
        parentless = [nid for nid in self.nodes if nid not in self._parent_edge]
        if len(parentless) > 1:
            raise MultipleRootsError(f"nodes without a parent: {sorted(parentless)}")
        if parentless != roots:
            raise CycleError(
                f"root flag on {roots[0]!r} but parentless node is {parentless}"
            )
        if len(self.edges) != len(self.nodes) - 1:
            raise CycleError(
                f"|edges| = {len(self.edges)} but |nodes| - 1 = {len(self.nodes) - 1}"
            )
        seen = {roots[0]}
        stack = [roots[0]]
        while stack:
            for child in self._children[stack.pop()]:
                if child in seen:
                    raise CycleError(f"node {child!r} reached twice")
                seen.add(child)
                stack.append(child)
        if seen != set(self.nodes):
            raise CycleError(f"unreachable nodes: {sorted(set(self.nodes) - seen)}")
        initials = self.initial_leaf_ids
        if not initials:
            raise ValidationError("no leaf is flagged initial")
        for nid in initials:
            if not self.is_leaf(nid):
                raise ValidationError(f"initial node {nid!r} is not a leaf")
        self._validate_atoms()
        subgoals = {}
        for nid, node in self.nodes.items():
            key = node.subgoal.atoms
            if key in subgoals:
                raise ValidationError(
                    f"nodes {subgoals[key]!r} and {nid!r} share the same subgoal"
                )
            subgoals[key] = nid

    def _validate_atoms(self) -> None:
        for nid, node in self.nodes.items():
            for atom in node.subgoal.atoms:
                pred = self.vocabulary.get(atom.predicate)
                if pred is None:
                    raise UnknownPredicateError(f"node {nid!r}: unknown predicate in {atom}")
                if len(atom.args) != pred.arity:
                    raise UnknownPredicateError(f"node {nid!r}: wrong arity in {atom}")
                for arg, typ in zip(atom.args, pred.argument_types):
                    actual = self.objects.get(arg)
                    if actual is None:
                        raise UnknownPredicateError(f"node {nid!r}: unknown object {arg!r} in {atom}")
                    if actual != typ:
                        raise UnknownPredicateError(
                            f"node {nid!r}: {arg!r} is {actual}, {atom.predicate} wants {typ}"
                        )


def load_knowledge(text: str, name: str = "knowledge") -> KnowledgeTree:
    """Parse and validate a knowledge file."""
    vocabulary: Dict[str, Predicate] = {}
    objects: Dict[str, str] = {}
    nodes: Dict[str, TreeNode] = {}
    edges: Dict[str, TreeEdge] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("predicate"):
            m = _PRED_RE.match(line)
            if not m:
                raise ParseError(f"bad predicate line {line!r}", line=lineno)
            pname, arity, types = m.group(1), int(m.group(2)), tuple(m.group(3).split())
            if pname in vocabulary:
                raise ParseError(f"predicate {pname!r} redeclared", line=lineno)
            if len(types) != arity:
                raise ParseError(f"predicate {pname}/{arity} lists {len(types)} types", line=lineno)
            vocabulary[pname] = Predicate(pname, arity, types)
        elif line.startswith("object"):
            m = _OBJ_RE.match(line)
            if not m:
                raise ParseError(f"bad object line {line!r}", line=lineno)
            oname, otype = m.groups()
            if oname in objects:
                raise ParseError(f"object {oname!r} redeclared", line=lineno)
            objects[oname] = otype
        elif line.startswith("node"):
            m = _NODE_RE.match(line)
            if not m:
                raise ParseError(f"bad node line {line!r}", line=lineno)
            nid, atom_text, flags = m.group(1), m.group(2), m.group(3) or ""
            if nid in nodes:
                raise ParseError(f"node {nid!r} redeclared", line=lineno)
            atoms = [GroundAtom.parse(tok, line=lineno) for tok in atom_text.split()]
            nodes[nid] = TreeNode(
                id=nid,
                subgoal=SymbolicState(atoms, vocabulary=name),
                is_root="root" in flags,
                is_initial_leaf="initial" in flags,
            )
        elif line.startswith("edge"):
            m = _EDGE_RE.match(line)
            if not m:
                raise ParseError(f"bad edge line {line!r}", line=lineno)
            parent, child, eid = m.groups()
            if eid in edges:
                raise ParseError(f"edge id {eid!r} reused", line=lineno)
            for endpoint in (parent, child):
                if endpoint not in nodes:
                    raise ParseError(f"edge references unknown node {endpoint!r}", line=lineno)
            edges[eid] = TreeEdge(parent=parent, child=child, edge_id=eid)
        else:
            raise ParseError(f"unrecognized line {line!r}", line=lineno)
    tree = KnowledgeTree(nodes=nodes, edges=edges, vocabulary=vocabulary, objects=objects, name=name)
    tree.validate()
    return tree


def path_to_root(tree: KnowledgeTree, leaf: str) -> List[TreeEdge]:
    """Edge sequence from a leaf up to the root, leaf-side first."""
    if leaf not in tree.nodes:
        raise UnknownNodeError(leaf)
    if not tree.is_leaf(leaf):
        raise NotALeafError(leaf)
    path = []
    cursor = leaf
    while True:
        edge = tree.parent_edge(cursor)
        if edge is None:
            return path
        path.append(edge)
        cursor = edge.parent


Binding = Mapping[str, Union[str, Sequence[str]]]


def instantiate_subgoal(tree: KnowledgeTree, node_id: str, binding: Binding) -> List[TreeNode]:
    """Horizontal expansion: sibling nodes for each distinct grounding.

    The binding maps objects appearing in the node's subgoal to one or more
    replacement objects of the same type. Groundings that duplicate an
    existing node's subgoal return that node instead of creating a new one;
    new nodes attach to the same parent with fresh edge ids. Returns one node
    per distinct grounding.
    """
    if node_id not in tree.nodes:
        raise UnknownNodeError(node_id)
    node = tree.nodes[node_id]
    parent = tree.parent_edge(node_id)
    if parent is None:
        raise BindingTypeError("cannot instantiate the root node")
    mentioned = {a for atom in node.subgoal.atoms for a in atom.args}
    pools: List[Tuple[str, Tuple[str, ...]]] = []
    for var, repl in binding.items():
        if var not in tree.objects:
            raise BindingTypeError(f"unknown object {var!r} in binding")
        if var not in mentioned:
            raise BindingTypeError(f"object {var!r} does not occur in node {node_id!r}")
        candidates = (repl,) if isinstance(repl, str) else tuple(repl)
        for cand in candidates:
            if cand not in tree.objects:
                raise BindingTypeError(f"unknown object {cand!r} in binding")
            if tree.objects[cand] != tree.objects[var]:
                raise BindingTypeError(
                    f"{cand!r} is {tree.objects[cand]}, expected {tree.objects[var]}"
                )
        pools.append((var, candidates))

    by_subgoal = {n.subgoal.atoms: n for n in tree.nodes.values()}
    results: List[TreeNode] = []
    seen_subgoals = set()
    counter = 0
    for combo in _product(pools):
        if len(set(combo.values())) != len(combo):
            continue  # degenerate grounding mapping two roles to one object
        atoms = frozenset(
            GroundAtom(a.predicate, tuple(combo.get(arg, arg) for arg in a.args))
            for a in node.subgoal.atoms
        )
        if atoms in seen_subgoals:
            continue
        seen_subgoals.add(atoms)
        existing = by_subgoal.get(atoms)
        if existing is not None:
            results.append(existing)
            continue
        counter += 1
        new_id = f"{node_id}__{counter}"
        while new_id in tree.nodes:
            counter += 1
            new_id = f"{node_id}__{counter}"
        new_node = TreeNode(
            id=new_id,
            subgoal=SymbolicState(atoms, vocabulary=node.subgoal.vocabulary),
        )
        new_edge_id = f"{parent.edge_id}__{counter}"
        while new_edge_id in tree.edges:
            counter += 1
            new_edge_id = f"{parent.edge_id}__{counter}"
        tree.nodes[new_id] = new_node
        tree.edges[new_edge_id] = TreeEdge(parent=parent.parent, child=new_id, edge_id=new_edge_id)
        tree._reindex()
        by_subgoal[atoms] = new_node
        results.append(new_node)
    tree.validate()
    return results


def _product(pools):
    if not pools:
        yield {}
        return
    (var, candidates), rest = pools[0], pools[1:]
    for cand in candidates:
        for tail in _product(rest):
            yield {var: cand, **tail}
