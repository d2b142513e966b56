"""
Eulerian cycle verification on labeled multigraphs with path fragments, and the reduction
that turns a 1-vs-2 cycle instance into such a multigraph.
"""
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

from graphs.graph_core import Graph
from graphs.union_find import UnionFind

logger = logging.getLogger(__name__)

LabeledEdge = Tuple[int, int, int]
Fragment = Tuple[int, int]


@dataclass
class EulerianInstance:
    """
    Directed multigraph with labeled edges and a list of path fragments.

    Attributes:
        n: Multigraph node count
        edges: (from, to, label) triples; labels are distinct, self-loops allowed
        fragments: (label, label) pairs of successive edges
    """
    n: int
    edges: List[LabeledEdge] = field(default_factory=list)
    fragments: List[Fragment] = field(default_factory=list)

    def edge_map(self) -> Dict[int, Tuple[int, int]]:
        return {label: (u, v) for u, v, label in self.edges}

    def validate(self):
        """Raise ValueError on duplicate labels, dangling labels or non-successive fragments."""
        labels = [label for _, _, label in self.edges]
        duplicates = [label for label, count in Counter(labels).items() if count > 1]
        if duplicates:
            raise ValueError(f"Duplicate edge labels {sorted(duplicates)}")
        for u, v, label in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"Edge {label} = ({u}, {v}) has an endpoint outside [0, {self.n})")
        edges = self.edge_map()
        for first, second in self.fragments:
            for label in (first, second):
                if label not in edges:
                    raise ValueError(f"Fragment ({first}, {second}) references unknown edge {label}")
            if edges[first][1] != edges[second][0]:
                raise ValueError(f"Fragment ({first}, {second}) is not successive: edge {first} ends at "
                                 f"{edges[first][1]}, edge {second} starts at {edges[second][0]}")

    def to_dict(self) -> Dict:
        return {'n': self.n,
                'edges': [[u, v, label] for u, v, label in self.edges],
                'fragments': [[a, b] for a, b in self.fragments]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def instance_from_dict(data: Dict) -> EulerianInstance:
    inst = EulerianInstance(n=int(data['n']),
                            edges=[(int(u), int(v), int(label)) for u, v, label in data['edges']],
                            fragments=[(int(a), int(b)) for a, b in data['fragments']])
    inst.validate()
    return inst


def instance_from_json(text: str) -> EulerianInstance:
    return instance_from_dict(json.loads(text))


def _each_edge_twice(inst: EulerianInstance) -> bool:
    slots = Counter(label for fragment in inst.fragments for label in fragment)
    return all(slots.get(label, 0) == 2 for _, _, label in inst.edges) and \
        sum(slots.values()) == 2 * len(inst.edges)


def _fragment_successors(inst: EulerianInstance) -> List[int]:
    """Index of the fragment starting with each fragment's second edge."""
    heads: Dict[int, int] = {}
    for idx, (first, _) in enumerate(inst.fragments):
        if first in heads:
            raise ValueError(f"Edge {first} heads two fragments; chaining is ambiguous")
        heads[first] = idx
    successors = []
    for first, second in inst.fragments:
        if second not in heads:
            raise ValueError(f"No fragment starts with edge {second}; fragments do not chain")
        successors.append(heads[second])
    return successors


def fragment_cycle_census(inst: EulerianInstance) -> List[int]:
    """
    Lengths of the disjoint cycles formed by following fragment successors, largest first.

    Args:
        inst: Instance whose edges each appear in exactly two fragment slots

    Returns:
        Cycle lengths summing to the fragment count
    """
    inst.validate()
    if not _each_edge_twice(inst):
        raise ValueError("Census needs every edge in exactly two fragment slots")
    successors = _fragment_successors(inst)
    if len(set(successors)) != len(successors):
        raise ValueError("Fragment successors are not a perfect matching")

    seen = [False] * len(successors)
    lengths = []
    for start in range(len(successors)):
        if seen[start]:
            continue
        length = 0
        current = start
        while not seen[current]:
            seen[current] = True
            current = successors[current]
            length += 1
        lengths.append(length)
    return sorted(lengths, reverse=True)


def verify_eulerian(inst: EulerianInstance) -> bool:
    """
    Whether the fragments verify an Eulerian cycle.

    Every edge must sit in exactly two fragment slots, and following fragment successors
    (a fragment's second edge is the next fragment's first edge) must give one cycle
    through all fragments.

    Args:
        inst: EulerianInstance

    Returns:
        True iff both conditions hold
    """
    inst.validate()
    if not _each_edge_twice(inst):
        logger.debug("edge multiplicity check failed")
        return False
    heads = Counter(first for first, _ in inst.fragments)
    repeated = [label for label, count in heads.items() if count > 1]
    if repeated:
        raise ValueError(f"Edge {repeated[0]} heads two fragments; chaining is ambiguous")
    try:
        census = fragment_cycle_census(inst)
    except ValueError as e:
        logger.debug("fragments do not chain: %s", e)
        return False
    return census == [len(inst.fragments)]


def eulerian_node_count(cycle_nodes: int) -> int:
    """n with n^2 / 2 = cycle_nodes, n even and at least 4."""
    n = math.isqrt(2 * cycle_nodes)
    if n * n != 2 * cycle_nodes or n % 2 or n < 4:
        raise ValueError(f"Cycle node count {cycle_nodes} is not n^2/2 for an even n >= 4")
    return n


def _auto_turnaround(cycle_graph: Graph) -> int:
    uf = UnionFind(cycle_graph.n)
    for u, v in cycle_graph.edges:
        uf.union(u, v)
    for idx, (u, _) in enumerate(cycle_graph.edges):
        if uf.connected(u, 0):
            return idx
    raise ValueError("Node 0 has no incident edge")


def reduce_cycles_to_eulerian(cycle_graph: Graph, turnaround: Union[int, str] = 'auto') -> EulerianInstance:
    """
    Multigraph and fragments that verify an Eulerian cycle iff cycle_graph is one cycle.

    Edge i of the sorted edge list (u < v) becomes arcs e_{i+1} = (u -> v) and
    e_{-(i+1)} = (v -> u) between projected nodes u mod n/2 and v mod n/2. The turnaround
    edge's arcs become self-loops at their heads. Each arc a forms the fragment
    (a, successor of a), the successor being the arc of the other edge at a's head that
    leaves that node; at the turnaround the walk reverses direction.

    Args:
        cycle_graph: Undirected 2-regular graph on N = n^2/2 nodes
        turnaround: Index into the sorted edge list, or auto for the smallest edge in node 0's component

    Returns:
        EulerianInstance on n nodes with 2N edges and 2N fragments
    """
    if cycle_graph.directed:
        raise ValueError("The reduction takes an undirected cycle graph")
    N = cycle_graph.n
    n = eulerian_node_count(N)
    degrees = cycle_graph.degrees()
    bad = [int(v) for v in range(N) if degrees[v] != 2]
    if bad:
        raise ValueError(f"Node {bad[0]} has degree {int(degrees[bad[0]])}; cycle graphs need degree 2")

    edges = list(cycle_graph.edges)
    star = _auto_turnaround(cycle_graph) if turnaround == 'auto' else int(turnaround)
    if not 0 <= star < len(edges):
        raise ValueError(f"Turnaround index {star} is outside [0, {len(edges)})")

    half = n // 2
    incident: Dict[int, List[int]] = {v: [] for v in range(N)}
    for idx, (u, v) in enumerate(edges):
        incident[u].append(idx)
        incident[v].append(idx)

    def arc_label(idx: int, tail: int) -> int:
        # +label runs u -> v along (u, v), -label runs back; turnaround loops keep that sign
        return idx + 1 if edges[idx][0] == tail else -(idx + 1)

    def head_of(label: int) -> int:
        u, v = edges[abs(label) - 1]
        return v if label > 0 else u

    multigraph = []
    fragments = []
    for idx, (u, v) in enumerate(edges):
        for label in (idx + 1, -(idx + 1)):
            tail, head = (u, v) if label > 0 else (v, u)
            if idx == star:
                tail = head
            multigraph.append((tail % half, head % half, label))

    for idx in range(len(edges)):
        for label in (idx + 1, -(idx + 1)):
            h = head_of(label)
            other = next(e for e in incident[h] if e != idx)
            if other == star:
                # loops sit at their heads: +label at v, -label at u
                nxt = other + 1 if edges[other][1] == h else -(other + 1)
            else:
                nxt = arc_label(other, h)
            fragments.append((label, nxt))

    inst = EulerianInstance(n=n, edges=multigraph, fragments=fragments)
    inst.validate()
    logger.debug("reduced %d-node cycle graph to %d-node multigraph (turnaround %d)", N, n, star)
    return inst
