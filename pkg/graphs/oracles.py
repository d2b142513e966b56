"""Brute-force ground truth for every task a construction claims to solve."""
import itertools
import logging
from collections import deque
from typing import Dict, List

import numpy as np

import config
from graphs.graph_core import Graph

logger = logging.getLogger(__name__)


def oracle_connected(g: Graph) -> bool:
    """
    Breadth-first search from node 0 over the underlying undirected graph.

    Args:
        g: Graph with at least one node

    Returns:
        True when every node is reachable from node 0
    """
    if g.n < 1:
        raise ValueError("Connectivity is undefined for the empty graph")

    undirected = (g.adj + g.adj.T) > 0
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(undirected[u] & ~seen):
            seen[v] = True
            queue.append(int(v))
    return bool(seen.all())


def oracle_matrix_power(g: Graph, L: int) -> np.ndarray:
    """
    Exact integer power A^L by repeated multiplication.

    Entry (i, j) is the number of length-L walks from i to j.

    Args:
        g: Input graph
        L: Walk length, at least 1

    Returns:
        int64 matrix A^L
    """
    if L < 1:
        raise ValueError(f"Walk length must be at least 1, got {L}")
    if g.n > 1 and g.n ** L >= config.EXACT_INT_LIMIT:
        raise OverflowError(f"n^L = {g.n}^{L} does not fit exact 53-bit integers")

    result = g.adj.astype(np.int64)
    for _ in range(L - 1):
        result = result @ g.adj
    return result


def oracle_two_cycle_indicator(g: Graph) -> np.ndarray:
    """
    Bit i is 1 when some j != i has both (i, j) and (j, i) as edges.

    Args:
        g: Directed graph without self-loops

    Returns:
        int64 vector of length n
    """
    if not g.directed:
        raise ValueError("Two-cycle detection needs a directed graph")
    if np.any(np.diag(g.adj)):
        raise ValueError("Two-cycle detection is undefined with self-loops")
    mutual = (g.adj > 0) & (g.adj.T > 0)
    return mutual.any(axis=1).astype(np.int64)


def _pattern_order(pattern: Graph) -> List[int]:
    # Grow the match along pattern edges so partial maps are pruned early.
    undirected = (pattern.adj + pattern.adj.T) > 0
    order: List[int] = []
    remaining = set(range(pattern.n))
    while remaining:
        start = max(remaining, key=lambda v: (int(undirected[v].sum()), -v))
        frontier = [start]
        while frontier:
            v = frontier.pop(0)
            if v not in remaining:
                continue
            remaining.discard(v)
            order.append(v)
            frontier.extend(int(w) for w in np.flatnonzero(undirected[v]) if int(w) in remaining)
    return order


def count_injective_maps(pattern: Graph, host: Graph) -> int:
    """
    Number of injective maps f with (u, v) in pattern => (f(u), f(v)) in host.

    Args:
        pattern: Graph on k nodes
        host: Graph with the same directedness

    Returns:
        Count of edge-preserving injections
    """
    if pattern.directed != host.directed:
        raise ValueError("Pattern and host must agree on directedness")
    if pattern.n > host.n:
        return 0

    order = _pattern_order(pattern)
    position = {v: idx for idx, v in enumerate(order)}
    # For each pattern node, the constraints against already-placed nodes
    constraints: List[List[tuple]] = []
    for idx, v in enumerate(order):
        checks = []
        for w in order[:idx]:
            if pattern.adj[v, w]:
                checks.append((position[w], True))
            if pattern.adj[w, v]:
                checks.append((position[w], False))
        constraints.append(checks)
    needs_loop = [bool(pattern.adj[v, v]) for v in order]

    host_adj = host.adj > 0
    image = [-1] * pattern.n
    used = np.zeros(host.n, dtype=bool)
    count = 0

    def extend(idx: int):
        nonlocal count
        if idx == pattern.n:
            count += 1
            return
        candidates = ~used
        if needs_loop[idx]:
            candidates = candidates & np.diag(host_adj)
        for placed, outgoing in constraints[idx]:
            if outgoing:
                candidates = candidates & host_adj[:, image[placed]]
            else:
                candidates = candidates & host_adj[image[placed], :]
        for x in np.flatnonzero(candidates):
            image[idx] = int(x)
            used[x] = True
            extend(idx + 1)
            used[x] = False
        image[idx] = -1

    extend(0)
    return count


def automorphism_count(pattern: Graph) -> int:
    """|Aut(pattern)| by checking all k! permutations."""
    edges = set(pattern.edges)
    total = 0
    for perm in itertools.permutations(range(pattern.n)):
        if pattern.directed:
            mapped = {(perm[u], perm[v]) for u, v in pattern.edges}
        else:
            mapped = {(min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in pattern.edges}
        if mapped == edges:
            total += 1
    return total


def oracle_subgraph_count(g: Graph, pattern: Graph) -> int:
    """
    Number of (non-induced) copies of pattern in g, counted up to pattern automorphism.

    Args:
        g: Host graph
        pattern: Graph on k <= ORACLE_MAX_PATTERN nodes

    Returns:
        Injective edge-preserving maps divided by |Aut(pattern)|
    """
    if pattern.n > config.ORACLE_MAX_PATTERN:
        raise ValueError(f"Pattern has {pattern.n} nodes; brute force is capped at "
                         f"{config.ORACLE_MAX_PATTERN}")
    if pattern.n == 0:
        raise ValueError("Pattern must have at least one node")

    maps = count_injective_maps(pattern, g)
    aut = automorphism_count(pattern)
    if maps % aut:
        raise ArithmeticError(f"Map count {maps} is not divisible by |Aut| = {aut}")
    logger.debug("subgraph oracle: %d maps, |Aut| = %d", maps, aut)
    return maps // aut


def oracle_report(g: Graph) -> Dict:
    """Summary of the cheap oracles for one graph, used by the smoke script and reports."""
    summary = {'n': g.n, 'edges': g.edge_count, 'directed': g.directed}
    if g.n:
        summary['connected'] = oracle_connected(g)
    if g.directed and not np.any(np.diag(g.adj)):
        summary['two_cycle_nodes'] = int(oracle_two_cycle_indicator(g).sum())
    return summary
