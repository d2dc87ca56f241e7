"""Shared fixtures and test-side oracles.

The brute-force plan oracle here works directly on the knowledge-tree graph
(leaf enumeration plus edge arithmetic) and never touches the planner, so
planner results are checked against an independent route.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from planrl.grid.env import GridEnv
from planrl.grid.gridmap import load_map
from planrl.harness.config import ExperimentConfig, default_knowledge_path, default_map_path
from planrl.knowledge import KnowledgeTree, TreeEdge, TreeNode, load_knowledge
from planrl.symbolic import GroundAtom, Predicate, SymbolicState


# ---------------------------------------------------------------------------
# shipped data
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def ft_map_text() -> str:
    return Path(default_map_path("findtreasure")).read_text()


@pytest.fixture(scope="session")
def mb_map_text() -> str:
    return Path(default_map_path("movebox")).read_text()


@pytest.fixture(scope="session")
def ft_knowledge_text() -> str:
    return Path(default_knowledge_path("findtreasure", 0)).read_text()


@pytest.fixture(scope="session")
def mb_knowledge_text() -> str:
    return Path(default_knowledge_path("movebox", 3)).read_text()


@pytest.fixture()
def ft_map(ft_map_text):
    return load_map(ft_map_text)


@pytest.fixture()
def mb_map(mb_map_text):
    return load_map(mb_map_text)


@pytest.fixture()
def ft_env(ft_map):
    return GridEnv(ft_map)


@pytest.fixture()
def mb_env(mb_map):
    return GridEnv(mb_map, task=3)


@pytest.fixture()
def ft_tree(ft_knowledge_text):
    return load_knowledge(ft_knowledge_text, name="findtreasure")


@pytest.fixture()
def mb_tree(mb_knowledge_text):
    return load_knowledge(mb_knowledge_text, name="movebox")


BLUE_FT = ["so_0", "so_4", "so_8", "so_10", "so_12"]
BLUE_MB = ["so_1", "so_4", "so_7", "so_10"]


# ---------------------------------------------------------------------------
# random trees and the independent plan-cost oracle
# ---------------------------------------------------------------------------

def make_random_tree(rng: np.random.Generator, max_nodes: int = 12) -> KnowledgeTree:
    """Random valid knowledge tree with distinct one-atom subgoals."""
    n = int(rng.integers(2, max_nodes + 1))
    vocabulary = {"p": Predicate("p", 1, ("thing",))}
    objects = {f"o{i}": "thing" for i in range(n)}
    nodes = {}
    edges = {}
    id_styles = ["so_{}", "e{}", "m_{}", "so_1{}"]
    for i in range(n):
        nodes[f"n{i}"] = TreeNode(
            id=f"n{i}",
            subgoal=SymbolicState([GroundAtom("p", (f"o{i}",))], vocabulary="rand"),
            is_root=i == 0,
        )
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        style = id_styles[int(rng.integers(len(id_styles)))]
        eid = style.format(i)
        if eid in edges:
            eid = f"x{i}"
        edges[eid] = TreeEdge(parent=f"n{parent}", child=f"n{i}", edge_id=eid)
    # pick an initial leaf
    children = {nid: [] for nid in nodes}
    for e in edges.values():
        children[e.parent].append(e.child)
    leaves = [nid for nid in nodes if not children[nid]]
    initial = leaves[int(rng.integers(len(leaves)))]
    nodes[initial] = TreeNode(
        id=initial, subgoal=nodes[initial].subgoal, is_initial_leaf=True
    )
    tree = KnowledgeTree(nodes=nodes, edges=edges, vocabulary=vocabulary, objects=objects,
                         name="rand")
    tree.validate()
    return tree


def tree_paths(tree: KnowledgeTree):
    """All root-to-leaf paths as edge-id lists in leaf-first order."""
    children = {nid: [] for nid in tree.nodes}
    parent_edge = {}
    for e in tree.edges.values():
        children[e.parent].append(e.child)
        parent_edge[e.child] = e
    paths = []
    for nid in tree.nodes:
        if children[nid]:
            continue
        path = []
        cursor = nid
        while cursor in parent_edge:
            path.append(parent_edge[cursor].edge_id)
            cursor = parent_edge[cursor].parent
        paths.append(path)
    return paths


def oracle_path_cost(tree: KnowledgeTree, path, ledger_values) -> float:
    """Unit costs; methods (edges with internal children) earn -R credit."""
    import math

    children = {nid: [] for nid in tree.nodes}
    for e in tree.edges.values():
        children[e.parent].append(e.child)
    terms = []
    for eid in path:
        edge = tree.edges[eid]
        if children[edge.child]:
            terms.append(1.0 - ledger_values[eid])
        else:
            terms.append(1.0)
    return math.fsum(terms)


def oracle_min_cost(tree: KnowledgeTree, ledger_values) -> float:
    return min(oracle_path_cost(tree, p, ledger_values) for p in tree_paths(tree))
