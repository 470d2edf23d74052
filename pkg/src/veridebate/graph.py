"""Fixed debate-graph construction.

Every turn is a node; edges are predefined from the debate structure:
a self-loop per node, both directions of each sequential adjacency, and
both directions of each explicit turn reference. Edges are kept as a
directed list with multiplicity (a reference that coincides with a
sequential link appears twice), which keeps the edge count at the
closed form ``n + 2(n-1) + 2*total_targets``; neighbor queries
deduplicate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .domain import DebateLog, DebateRole, DebateStage, Stance


@dataclass(frozen=True)
class DebateGraph:
    node_features: np.ndarray  # (num_turns, feature_dim)
    edges: tuple[tuple[int, int], ...]  # directed (src, dst), with multiplicity
    node_meta: tuple[tuple[Stance, DebateRole, DebateStage], ...]

    @property
    def num_nodes(self) -> int:
        return int(self.node_features.shape[0])


def edges_for_log(log: DebateLog) -> tuple[tuple[int, int], ...]:
    n = len(log.turns)
    edges: list[tuple[int, int]] = [(i, i) for i in range(n)]
    for i in range(n - 1):
        edges.append((i, i + 1))
        edges.append((i + 1, i))
    for turn in log.turns:
        for target in turn.targets:
            edges.append((turn.turn_index, target))
            edges.append((target, turn.turn_index))
    return tuple(edges)


def build_graph(log: DebateLog, nodes) -> DebateGraph:
    """Assemble the graph for a log from its per-turn node vectors."""
    features = np.asarray(nodes, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("nodes must form a 2-D matrix (num_turns x feature_dim)")
    if features.shape[0] != len(log.turns):
        raise ValueError(
            f"got {features.shape[0]} node vectors for {len(log.turns)} turns"
        )
    meta = tuple((t.stance, t.role, t.stage) for t in log.turns)
    return DebateGraph(node_features=features, edges=edges_for_log(log), node_meta=meta)


def neighbors(graph: DebateGraph, i: int) -> set[int]:
    """In-neighbors of node i (nodes j with an edge j -> i), always
    including i itself via its self-loop."""
    if not 0 <= i < graph.num_nodes:
        raise IndexError(f"node {i} out of range for {graph.num_nodes} nodes")
    return {src for src, dst in graph.edges if dst == i}


def neighbor_lists(edges, num_nodes: int) -> list[np.ndarray]:
    """Sorted, deduplicated in-neighbor index arrays for every node."""
    sets: list[set[int]] = [set() for _ in range(num_nodes)]
    for src, dst in edges:
        sets[dst].add(src)
    return [np.array(sorted(s), dtype=np.intp) for s in sets]


def graph_to_json(graph: DebateGraph) -> str:
    return json.dumps(
        {"num_nodes": graph.num_nodes, "edges": [list(e) for e in graph.edges]},
        sort_keys=True,
    )
