"""Proximity graph over the annotations of one image."""

from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np

from src.core import Annotation
from src.geometry import min_distance


@dataclass(frozen=True)
class ObjectGraph:
    """
    Undirected weighted graph with one node per annotation (in the given order).

    `graph` is the NetworkX view; `weights` its dense adjacency matrix W.
    """

    graph: nx.Graph
    node_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        w = self.weights
        if not np.all(np.isfinite(w)):
            raise ValueError("Adjacency weights must be finite")
        if np.any(w < 0):
            raise ValueError("Adjacency weights must be non-negative")
        if not np.allclose(w, w.T, rtol=0.0, atol=1e-12):
            raise ValueError("Adjacency matrix must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("Adjacency matrix must have a zero diagonal")

    @classmethod
    def from_weights(cls, weights: np.ndarray, node_ids: Sequence[int] | None = None) -> "ObjectGraph":
        weights = np.asarray(weights, dtype=float)
        n = weights.shape[0]
        if weights.shape != (n, n):
            raise ValueError(f"Adjacency matrix must be square, got {weights.shape}")
        ids = tuple(node_ids) if node_ids is not None else tuple(range(n))
        if len(ids) != n:
            raise ValueError(f"{len(ids)} node ids for a {n}x{n} matrix")
        graph = nx.Graph()
        graph.add_nodes_from(ids)
        for i in range(n):
            for j in range(i + 1, n):
                if weights[i, j] != 0 or weights[j, i] != 0:
                    graph.add_edge(ids[i], ids[j], weight=float(weights[i, j]))
        obj = cls(graph=graph, node_ids=ids)
        if not np.allclose(obj.weights, weights, rtol=0.0, atol=1e-12):
            raise ValueError("Adjacency matrix must be symmetric with a zero diagonal")
        return obj

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def weights(self) -> np.ndarray:
        return nx.to_numpy_array(self.graph, nodelist=list(self.node_ids), weight="weight")

    def laplacian(self) -> np.ndarray:
        """Combinatorial Laplacian L = Deg - W."""
        if self.n == 0:
            return np.zeros((0, 0))
        return nx.laplacian_matrix(self.graph, nodelist=list(self.node_ids), weight="weight").toarray()

    def is_connected(self) -> bool:
        return self.n > 0 and nx.is_connected(self.graph)


def build_graph(anns: Sequence[Annotation]) -> ObjectGraph:
    """W_ij = 1 / max(d(b_i, b_j), 1) for i != j, d the minimum box distance in pixels."""
    graph = nx.Graph()
    ids = tuple(a.id for a in anns)
    graph.add_nodes_from(ids)
    for i, a in enumerate(anns):
        for b in anns[i + 1 :]:
            graph.add_edge(a.id, b.id, weight=1.0 / max(min_distance(a.bbox, b.bbox), 1.0))
    return ObjectGraph(graph=graph, node_ids=ids)
