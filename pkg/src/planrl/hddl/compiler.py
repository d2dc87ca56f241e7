"""Compile a knowledge tree into an HDDL-subset planning problem.

Mapping: every internal node becomes an abstract task named ``t_<node id>``;
every edge whose child is internal becomes a method (id = edge id) rewriting
the parent's task into the single child task; every edge whose child is a
leaf becomes a primitive task (name = edge id) registered as a direct closure
refinement of the parent's task. Leaf-edge actions carry the child subgoal as
positive precondition, the parent subgoal as positive effect, and the child's
exclusive atoms as negative effect. The initial state is the initial leaf's
subgoal; the initial network is the root's task.
"""
from __future__ import annotations

from ..errors import CompileError, UnknownPredicateError, ValidationError
from ..knowledge import KnowledgeTree
from .model import AbstractTask, HtnDomain, HtnProblem, Method, PrimitiveTask, TaskNetwork


def task_name(node_id: str) -> str:
    return f"t_{node_id}"


def compile_tree(tree: KnowledgeTree) -> HtnProblem:
    try:
        tree.validate()
    except (ValidationError, UnknownPredicateError) as exc:
        raise CompileError(f"invalid knowledge tree: {exc}") from exc

    abstracts = {}
    primitives = {}
    methods = {}
    closures = {}
    for nid in tree.nodes:
        if not tree.is_leaf(nid):
            abstracts[task_name(nid)] = AbstractTask(name=task_name(nid))
    for eid in sorted(tree.edges):
        edge = tree.edges[eid]
        parent = tree.nodes[edge.parent]
        child = tree.nodes[edge.child]
        if tree.is_leaf(edge.child):
            primitives[eid] = PrimitiveTask(
                name=eid,
                pre_pos=child.subgoal.atoms,
                eff_pos=parent.subgoal.atoms,
                eff_neg=child.subgoal.atoms - parent.subgoal.atoms,
            )
            pname = task_name(edge.parent)
            closures[pname] = closures.get(pname, ()) + (eid,)
        else:
            methods[eid] = Method(
                id=eid,
                abstract_task=task_name(edge.parent),
                subnetwork=TaskNetwork.ordered((task_name(edge.child),)),
            )

    initials = tree.initial_leaf_ids
    init = tree.nodes[initials[0]].subgoal.atoms

    types = tuple(sorted(set(tree.objects.values())))
    domain = HtnDomain(
        name=tree.name,
        types=types,
        predicates=dict(tree.vocabulary),
        primitives=primitives,
        abstracts=abstracts,
        methods=methods,
        closures=closures,
    )
    root = tree.root_id
    if tree.is_leaf(root):
        raise CompileError("single-node tree compiles to an empty domain")
    problem = HtnProblem(
        name=tree.name,
        domain=domain,
        objects=dict(tree.objects),
        init=init,
        tn_init=TaskNetwork.ordered((task_name(root),)),
    )
    problem.validate()
    return problem
