"""
Three-layer transformer counting occurrences of a k-node pattern.

Nodes are split into set_count contiguous sets. Every k-combination of sets is assigned
to one token, which gathers all edges incident to its sets and counts the occurrences
whose canonical combination it is.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from networkx.algorithms.isomorphism import GraphMatcher
import networkx as nx

import config
from graphs.graph_core import Graph
from network.exact_maps import register_exact_map
from network.gadgets import indicator_pieces
from network.transformer import AttentionHead, ExactMap, ReluStack, TransformerLayer, TransformerSpec

logger = logging.getLogger(__name__)

MAX_SETS = 52  # packed row integers must stay exact in float64


def integer_root_ceil(value: int, k: int) -> int:
    """Smallest integer r with r^k >= value."""
    if value <= 1:
        return max(value, 0)
    r = int(round(value ** (1.0 / k)))
    while r ** k < value:
        r += 1
    while r > 1 and (r - 1) ** k >= value:
        r -= 1
    return r


def width_bound(n: int, k: int) -> int:
    """ceil(n^{2-1/k}) + 2 ceil(n^{1/k}) + 4."""
    return integer_root_ceil(n ** (2 * k - 1), k) + 2 * integer_root_ceil(n, k) + 4


def emitted_width(n: int, set_count: int) -> int:
    set_size = -(-n // set_count)
    return n * set_size + 2 * set_count + 1


@dataclass(frozen=True)
class PartitionPlan:
    """
    Balanced contiguous partition of n nodes into set_count sets and its k-combinations.

    Attributes:
        n: Node count
        k: Pattern size
        set_count: Number of sets
        set_size: Largest set size (T)
        sizes: Size of each set
        offsets: First node of each set
        node_set: Set index of every node
        combinations_: Lexicographically ordered k-combinations of set indices
    """
    n: int
    k: int
    set_count: int
    set_size: int
    sizes: Tuple[int, ...]
    offsets: Tuple[int, ...]
    node_set: Tuple[int, ...]
    combinations_: Tuple[Tuple[int, ...], ...]

    @property
    def combination_count(self) -> int:
        return len(self.combinations_)

    @property
    def packed_dim(self) -> int:
        return self.n * self.set_size

    def comb_masks(self) -> np.ndarray:
        masks = np.zeros((self.combination_count, self.set_count))
        for idx, combo in enumerate(self.combinations_):
            masks[idx, list(combo)] = 1.0
        return masks

    def combination_index(self) -> Dict[Tuple[int, ...], int]:
        return {combo: idx for idx, combo in enumerate(self.combinations_)}

    def canonical_combination(self, support: Iterable[int]) -> Tuple[int, ...]:
        """Support sets padded with the smallest-index sets outside it, sorted."""
        chosen = set(support)
        if len(chosen) > self.k:
            raise ValueError(f"Support {sorted(chosen)} touches more than k={self.k} sets")
        for candidate in range(self.set_count):
            if len(chosen) == self.k:
                break
            chosen.add(candidate)
        return tuple(sorted(chosen))

    def members(self, set_index: int) -> range:
        start = self.offsets[set_index]
        return range(start, start + self.sizes[set_index])


def plan_partition(n: int, k: int, set_count: Optional[int] = None) -> PartitionPlan:
    """
    Choose the set count and build the partition.

    Default set count: the smallest s >= max(ceil(n^{1/k}), k) with C(s, k) <= n whose emitted
    width fits width_bound(n, k).

    Args:
        n: Node count
        k: Pattern size
        set_count: Explicit override, must be at least k

    Returns:
        PartitionPlan
    """
    if not 2 <= k <= config.SUBGRAPH_MAX_K:
        raise ValueError(f"Pattern size k must be in [2, {config.SUBGRAPH_MAX_K}], got {k}")
    if n < k:
        raise ValueError(f"Need at least k={k} nodes, got n={n}")

    if set_count is not None:
        if set_count < k:
            raise ValueError(f"set_count={set_count} is smaller than k={k}")
        candidates = [set_count]
    else:
        start = max(integer_root_ceil(n, k), k)
        candidates = [s for s in range(start, min(n, MAX_SETS) + 1)
                      if math.comb(s, k) <= n and emitted_width(n, s) <= width_bound(n, k)]
        if not candidates:
            raise ValueError(f"No set count fits n={n}, k={k}")

    s = candidates[0]
    if s > min(n, MAX_SETS):
        raise ValueError(f"set_count={s} exceeds min(n, {MAX_SETS})")
    if math.comb(s, k) > n:
        raise ValueError(f"C({s}, {k}) = {math.comb(s, k)} combinations do not fit {n} tokens")

    sizes = tuple(n // s + (1 if a < n % s else 0) for a in range(s))
    offsets = tuple(int(v) for v in np.concatenate([[0], np.cumsum(sizes)[:-1]]))
    node_set = tuple(a for a in range(s) for _ in range(sizes[a]))
    return PartitionPlan(n=n, k=k, set_count=s, set_size=max(sizes), sizes=sizes, offsets=offsets,
                         node_set=node_set, combinations_=tuple(combinations(range(s), k)))


def subgraph_tokens(g: Graph) -> np.ndarray:
    """Columns (x_i; i) with x_i the adjacency row of node i."""
    return np.vstack([g.adj.T.astype(np.float64), np.arange(g.n, dtype=np.float64)[None, :]])


@lru_cache(maxsize=64)
def _cached_plan(n: int, k: int, set_count: int) -> PartitionPlan:
    return plan_partition(n, k, set_count)


def _packed_layer_net(plan: PartitionPlan) -> ReluStack:
    """
    Explicit ReLU net (x_i; i) -> [x~_i; w_i; z_i; i].

    x~_i[r T + c] = sum_b 2^b x_i[o_b + c] for node i at local row r of its set, built from
    position indicators I_v(i) (four-ReLU f_{v,v}) and gates relu(x_u + I_v(i) - 1).
    w_i is the one-hot of i's set, z_i the one-hot of i when i < set_count.
    """
    n, S, T = plan.n, plan.set_count, plan.set_size
    dim_in = n + 1

    # hidden 1: 4 position pieces per v, relu(x_u) per u, relu(i)
    W1 = np.zeros((4 * n + n + 1, dim_in))
    b1 = np.zeros(4 * n + n + 1)
    coefficients = None
    for v in range(n):
        pieces, coefficients = indicator_pieces(v, v)
        W1[4 * v:4 * v + 4, n] = 1.0
        b1[4 * v:4 * v + 4] = pieces
    W1[4 * n:5 * n, :n] = np.eye(n)
    W1[5 * n, n] = 1.0
    hidden1 = W1.shape[0]

    def position_row(v: int) -> np.ndarray:
        row = np.zeros(hidden1)
        row[4 * v:4 * v + 4] = coefficients
        return row

    # hidden 2: gates g(v, u) = relu(x_u + I_v - 1), then relu(I_v), then relu(i)
    W2 = np.zeros((n * n + n + 1, hidden1))
    b2 = np.zeros(n * n + n + 1)
    for v in range(n):
        indicator = position_row(v)
        for u in range(n):
            unit = v * n + u
            W2[unit] = indicator
            W2[unit, 4 * n + u] += 1.0
            b2[unit] = -1.0
        W2[n * n + v] = indicator
    W2[n * n + n, 5 * n] = 1.0

    # output: [x~ (T^2); w (S); z (S); i]
    out_dim = T * T + 2 * S + 1
    W3 = np.zeros((out_dim, W2.shape[0]))
    for a in range(S):
        for r in range(plan.sizes[a]):
            v = plan.offsets[a] + r
            for b in range(S):
                for c in range(plan.sizes[b]):
                    W3[r * T + c, v * n + plan.offsets[b] + c] = float(2 ** b)
            W3[T * T + a, n * n + v] = 1.0
    for t in range(S):
        W3[T * T + S + t, n * n + t] = 1.0
    W3[out_dim - 1, n * n + n] = 1.0
    return ReluStack(((W1, b1), (W2, b2), (W3, np.zeros(out_dim))))


@register_exact_map('set-block-slot')
def _set_block_slot(token: np.ndarray, index: int, n: int, k: int, set_count: int) -> np.ndarray:
    # token holds the set's averaged local block; rescale, round and slot it globally
    plan = _cached_plan(n, k, set_count)
    S, T = plan.set_count, plan.set_size
    out = np.zeros(plan.packed_dim + 2 * S + 1)
    if index < S:
        local = np.rint(plan.sizes[index] * token[:T * T]).reshape(T, T)[:plan.sizes[index]]
        start = plan.offsets[index] * T
        out[start:start + local.size] = local.reshape(-1)
        out[plan.packed_dim + S + index] = 1.0
    if index < plan.combination_count:
        out[plan.packed_dim + np.array(plan.combinations_[index])] = 1.0
    out[-1] = index
    return out


def _to_networkx(n_nodes: int, edges: Iterable[Tuple[int, int]]) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(n_nodes))
    g.add_edges_from(edges)
    return g


@lru_cache(maxsize=32)
def _pattern_automorphisms(pattern_n: int, pattern_edges: Tuple[Tuple[int, int], ...]) -> int:
    pattern = _to_networkx(pattern_n, pattern_edges)
    return sum(1 for _ in GraphMatcher(pattern, pattern).isomorphisms_iter())


def decode_combination_edges(plan: PartitionPlan, token: np.ndarray, combo: Tuple[int, ...]):
    """Edges among the nodes of the sets in combo, read from the packed rows."""
    T = plan.set_size
    chosen = set(combo)
    edges = set()
    for a in combo:
        for r in range(plan.sizes[a]):
            u = plan.offsets[a] + r
            for c in range(T):
                packed = int(round(token[u * T + c]))
                for b in chosen:
                    if c < plan.sizes[b] and (packed >> b) & 1:
                        v = plan.offsets[b] + c
                        edges.add((min(u, v), max(u, v)))
    return edges


@register_exact_map('subgraph-count-readout')
def _subgraph_count_readout(token: np.ndarray, index: int, n: int, k: int, set_count: int,
                            pattern_n: int, pattern_edges) -> np.ndarray:
    plan = _cached_plan(n, k, set_count)
    if index >= plan.combination_count:
        return np.zeros(1)
    combo = plan.combinations_[index]
    nodes = [u for a in combo for u in plan.members(a)]
    host = nx.Graph()
    host.add_nodes_from(nodes)
    host.add_edges_from(decode_combination_edges(plan, token, combo))
    pattern_edges = tuple(tuple(e) for e in pattern_edges)
    pattern = _to_networkx(pattern_n, pattern_edges)

    hits = 0
    for mapping in GraphMatcher(host, pattern).subgraph_monomorphisms_iter():
        support = {plan.node_set[u] for u in mapping}
        if plan.canonical_combination(support) == combo:
            hits += 1
    aut = _pattern_automorphisms(pattern_n, pattern_edges)
    return np.array([hits / aut])


def subgraph_temperature(plan: PartitionPlan) -> float:
    """Leakage n * 2^S * n * e^{-c} after the exact rescale stays below SUBGRAPH_TAIL."""
    return math.log(plan.n * plan.n * 2.0 ** (plan.set_count + 1) / config.SUBGRAPH_TAIL)


def build_subgraph_counter(
    n: int,
    k: int,
    pattern: Graph,
    set_count: Optional[int] = None,
    temperature: Optional[float] = None
) -> TransformerSpec:
    """
    Transformer whose token outputs sum to the number of occurrences of pattern.

    Layer 1 (V = 0, residual) keeps (x_i; i); its explicit ReLU MLP packs node i's edges into
    the local row layout and adds the set one-hot w_i and set-token selector z_i.
    Layer 2: set token t attends to the members of set t (query z, key w); the MLP undoes the
    averaging by the set size, rounds, slots the block into the n*T layout and writes comb_mask.
    Layer 3: combination token i attends to the k set tokens of B_i (query comb_mask, key z)
    with value scale k. The readout decodes the edges among B_i and counts the occurrences
    whose canonical combination is B_i.

    Args:
        n: Node count
        k: Pattern size (2..SUBGRAPH_MAX_K)
        pattern: Undirected pattern on k nodes
        set_count: Optional override of the number of sets
        temperature: Optional override of both attention temperatures

    Returns:
        TransformerSpec over (x_i; i) tokens of dimension n + 1
    """
    if pattern.n != k:
        raise ValueError(f"Pattern has {pattern.n} nodes but k={k}")
    if pattern.directed:
        raise ValueError("Subgraph counting supports undirected patterns")
    if any(u == v for u, v in pattern.edges):
        raise ValueError("Pattern must be simple")

    plan = plan_partition(n, k, set_count)
    S, T, D = plan.set_count, plan.set_size, plan.packed_dim
    c = subgraph_temperature(plan) if temperature is None else float(temperature)
    if c > config.MAX_LOGIT:
        raise ValueError(f"Temperature {c:.1f} exceeds the overflow cap {config.MAX_LOGIT}")

    dim_in = n + 1
    keep = AttentionHead(K=np.zeros((1, dim_in)), Q=np.zeros((1, dim_in)), V=np.zeros((dim_in, dim_in)))
    layer1_mlp = _packed_layer_net(plan)

    dim1 = T * T + 2 * S + 1
    K2 = np.zeros((S, dim1))
    K2[:, T * T:T * T + S] = np.eye(S)
    Q2 = np.zeros((S, dim1))
    Q2[:, T * T + S:T * T + 2 * S] = np.eye(S)
    V2 = np.zeros((T * T, dim1))
    V2[:, :T * T] = np.eye(T * T)
    gather_sets = AttentionHead(K=K2, Q=Q2, V=V2, temperature=c)
    slot = ExactMap.create('set-block-slot', D + 2 * S + 1, n=n, k=k, set_count=S)

    dim2 = D + 2 * S + 1
    K3 = np.zeros((S, dim2))
    K3[:, D + S:D + 2 * S] = np.eye(S)
    Q3 = np.zeros((S, dim2))
    Q3[:, D:D + S] = np.eye(S)
    V3 = np.zeros((D, dim2))
    V3[:, :D] = k * np.eye(D)
    gather_combinations = AttentionHead(K=K3, Q=Q3, V=V3, temperature=c)
    readout = ExactMap.create('subgraph-count-readout', 1, n=n, k=k, set_count=S,
                              pattern_n=pattern.n, pattern_edges=pattern.edges)

    logger.debug("built subgraph counter n=%d k=%d sets=%d size=%d width=%d", n, k, S, T, D + 2 * S + 1)
    return TransformerSpec(
        layers=(TransformerLayer(heads=(keep,), residual=True, mlp=layer1_mlp),
                TransformerLayer(heads=(gather_sets,), residual=False, mlp=slot),
                TransformerLayer(heads=(gather_combinations,), residual=False, mlp=readout)),
        input_dim=dim_in,
        output_description='sum over tokens: number of pattern occurrences',
        name=f'subgraph_counter(n={n}, k={k}, sets={S})')
