"""Graph representation shared by generators, oracles, tokenizers and constructions."""
import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

Edge = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Simple (optionally self-looped) graph with a dense 0/1 adjacency and a sorted edge list.

    Undirected edges are stored once as (u, v) with u <= v; the adjacency is symmetric.
    Use graph_from_edges to build instances, which validates the invariants.
    """
    n: int
    directed: bool
    adj: np.ndarray
    edges: Tuple[Edge, ...]
    allow_self_loops: bool = False
    graph_id: Optional[str] = field(default=None, compare=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n, self.directed, self.edges, self.allow_self_loops) == \
            (other.n, other.directed, other.edges, other.allow_self_loops)

    def __hash__(self) -> int:
        return hash((self.n, self.directed, self.edges, self.allow_self_loops))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        """Out-degrees (row sums); equal to degrees for undirected graphs."""
        return self.adj.sum(axis=1)

    def neighbors(self, u: int) -> List[int]:
        return [int(v) for v in np.flatnonzero(self.adj[u])]

    def relabel(self, perm: Iterable[int]) -> 'Graph':
        """
        Return the graph with node u renamed to perm[u].

        Args:
            perm: Permutation of range(n)

        Returns:
            Relabeled Graph with the same directedness and self-loop flag
        """
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self.n)):
            raise ValueError(f"Not a permutation of {self.n} nodes: {perm}")
        new_edges = [(perm[u], perm[v]) for u, v in self.edges]
        return graph_from_edges(self.n, new_edges, self.directed,
                                allow_self_loops=self.allow_self_loops, graph_id=self.graph_id)

    def with_id(self, graph_id: str) -> 'Graph':
        return Graph(self.n, self.directed, self.adj, self.edges, self.allow_self_loops, graph_id)

    def to_networkx(self) -> nx.Graph:
        g = nx.DiGraph() if self.directed else nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def to_dict(self) -> Dict:
        data = {'n': self.n, 'directed': self.directed, 'edges': [[u, v] for u, v in self.edges]}
        if self.allow_self_loops:
            data['allow_self_loops'] = True
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def graph_from_edges(
    n: int,
    edges: Iterable[Edge],
    directed: bool,
    allow_self_loops: bool = False,
    graph_id: Optional[str] = None
) -> Graph:
    """
    Build a Graph from an edge list.

    Args:
        n: Node count
        edges: Iterable of (u, v) index pairs
        directed: Whether (u, v) and (v, u) are distinct edges
        allow_self_loops: Whether (u, u) is permitted
        graph_id: Optional identifier carried into datasets and reports

    Returns:
        Graph with consistent adjacency and sorted edge list
    """
    if n < 0:
        raise ValueError(f"Node count must be non-negative, got {n}")

    adj = np.zeros((n, n), dtype=np.int64)
    seen = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"Edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v and not allow_self_loops:
            raise ValueError(f"Self-loop at node {u} is not allowed")
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"Duplicate edge {key}")
        seen.add(key)
        adj[key[0], key[1]] = 1
        if not directed:
            adj[key[1], key[0]] = 1

    return Graph(n=n, directed=directed, adj=adj, edges=tuple(sorted(seen)),
                 allow_self_loops=allow_self_loops, graph_id=graph_id)


def graph_from_adjacency(adj: np.ndarray, directed: bool, allow_self_loops: bool = False) -> Graph:
    """Build a Graph from a 0/1 adjacency matrix (upper triangle read for undirected graphs)."""
    adj = np.asarray(adj)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError(f"Adjacency must be square, got shape {adj.shape}")
    if not directed and not np.array_equal(adj, adj.T):
        raise ValueError("Undirected adjacency must be symmetric")
    if directed:
        us, vs = np.nonzero(adj)
    else:
        us, vs = np.nonzero(np.triu(adj))
    return graph_from_edges(adj.shape[0], zip(us.tolist(), vs.tolist()), directed,
                            allow_self_loops=allow_self_loops)


def graph_from_dict(data: Dict) -> Graph:
    return graph_from_edges(int(data['n']), [tuple(e) for e in data['edges']], bool(data['directed']),
                            allow_self_loops=bool(data.get('allow_self_loops', False)))


def graph_from_json(text: str) -> Graph:
    return graph_from_dict(json.loads(text))


def disjoint_union(graphs: List[Graph]) -> Graph:
    """Place graphs side by side, offsetting node indices in list order."""
    if not graphs:
        return graph_from_edges(0, [], directed=False)
    directed = graphs[0].directed
    if any(g.directed != directed for g in graphs):
        raise ValueError("Cannot mix directed and undirected graphs in a union")
    edges = []
    offset = 0
    for g in graphs:
        edges.extend((u + offset, v + offset) for u, v in g.edges)
        offset += g.n
    return graph_from_edges(offset, edges, directed,
                            allow_self_loops=any(g.allow_self_loops for g in graphs))
