"""Two-layer transformer deciding one n-cycle versus two n/2-cycles."""
import logging
from itertools import combinations
from typing import List

import numpy as np

import config
from graphs.union_find import UnionFind
from network.exact_maps import register_exact_map
from network.gadgets import indicator_pieces
from network.transformer import AttentionHead, ExactMap, ReluStack, TransformerLayer, TransformerSpec

logger = logging.getLogger(__name__)

MODES = ('exact_map', 'explicit_net')


def pair_key(a: int, b: int, n: int) -> int:
    """Integer key 2n(a^2 + b^2) + (a + b); (a + b, a^2 + b^2) determines the pair."""
    return 2 * n * (a * a + b * b) + (a + b)


@register_exact_map('cycle-neighbor-pair')
def _neighbor_pair(token: np.ndarray, index: int, n: int) -> np.ndarray:
    # token = (x_i; i); emit (a, b, i) into block i of a 3n vector
    neighbors = np.flatnonzero(token[:n] > 0.5)
    if neighbors.size != 2:
        raise ValueError(f"Node {index} has degree {neighbors.size}; cycle graphs need degree 2")
    out = np.zeros(3 * n)
    node = int(round(token[n]))
    out[3 * node:3 * node + 3] = [neighbors[0], neighbors[1], node]
    return out


@register_exact_map('connectivity-of-edge-list')
def _connectivity_of_edge_list(token: np.ndarray, index: int, n: int) -> np.ndarray:
    """1 when the edges (i, a), (i, b) read from every block (a, b, i) form one component."""
    blocks = np.rint(token[:3 * n]).astype(np.int64).reshape(n, 3)
    uf = UnionFind(n)
    for a, b, node in blocks:
        for other in (a, b):
            if not (0 <= other < n and 0 <= node < n):
                raise ValueError(f"Decoded edge ({node}, {other}) is out of range for n={n}")
            uf.union(int(node), int(other))
    return np.array([1.0 if uf.components == 1 else 0.0])


def _neighbor_pair_net(n: int) -> ReluStack:
    """
    Explicit ReLU net (x; i) -> 3n vector with block i = (a, b, i) for neighbors a < b.

    Hidden layer 1 turns each x_j into relu(x_j) - relu(x_j - 1) and passes i.
    Hidden layer 2 evaluates the integer key of the pair and one four-ReLU interval indicator
    f_{r,r} per candidate pair key r and per index value.
    Hidden layer 3 gates every candidate output into its block with relu(v + n*J_k - n).
    """
    dim_in = n + 1
    weights = np.array([pair_key(j, 0, n) for j in range(n)], dtype=np.float64)  # key contribution of x_j

    # layer 1: 2n indicator halves + relu(i)
    W1 = np.zeros((2 * n + 1, dim_in))
    b1 = np.zeros(2 * n + 1)
    for j in range(n):
        W1[2 * j, j] = 1.0
        W1[2 * j + 1, j] = 1.0
        b1[2 * j + 1] = -1.0
    W1[2 * n, n] = 1.0
    # key = sum_j weights_j (h[2j] - h[2j+1]); index = h[2n]
    key_row = np.zeros(2 * n + 1)
    key_row[0:2 * n:2] = weights
    key_row[1:2 * n:2] = -weights
    index_row = np.zeros(2 * n + 1)
    index_row[2 * n] = 1.0

    pairs = list(combinations(range(n), 2))
    rows: List[np.ndarray] = []
    biases: List[np.ndarray] = []
    for a, b in pairs:
        pieces, _ = indicator_pieces(pair_key(a, b, n), pair_key(a, b, n))
        rows.extend([key_row] * 4)
        biases.append(pieces)
    for k in range(n):
        pieces, _ = indicator_pieces(k, k)
        rows.extend([index_row] * 4)
        biases.append(pieces)
    rows.append(index_row)
    biases.append(np.zeros(1))
    W2 = np.vstack(rows)
    b2 = np.concatenate(biases)
    width2 = W2.shape[0]
    _, coefficients = indicator_pieces(0, 0)

    # linear read-outs over hidden layer 2
    value_a = np.zeros(width2)
    value_b = np.zeros(width2)
    for p, (a, b) in enumerate(pairs):
        value_a[4 * p:4 * p + 4] = a * coefficients
        value_b[4 * p:4 * p + 4] = b * coefficients
    offset = 4 * len(pairs)
    value_i = np.zeros(width2)
    value_i[-1] = 1.0

    W3 = np.zeros((3 * n, width2))
    b3 = np.full(3 * n, -float(n))
    for k in range(n):
        gate = np.zeros(width2)
        gate[offset + 4 * k:offset + 4 * k + 4] = n * coefficients
        W3[3 * k] = value_a + gate
        W3[3 * k + 1] = value_b + gate
        W3[3 * k + 2] = value_i + gate

    return ReluStack(((W1, b1), (W2, b2), (W3, b3), (np.eye(3 * n), np.zeros(3 * n))))


def build_one_vs_two(n: int, mode: str = 'exact_map') -> TransformerSpec:
    """
    Transformer whose output tokens all read 1 for a single n-cycle and 0 for two n/2-cycles.

    Layer 1 keeps the tokens (V = 0, residual) and its MLP writes each node's neighbor pair
    into the node's own block of a 3n vector. Layer 2 (K = Q = 0, V = nI, no residual)
    sums all blocks into every token; the readout runs union-find on the recovered edges.

    Args:
        n: Even node count, at least 6
        mode: exact_map, or explicit_net for the ReLU decode net (n <= EXPLICIT_NET_MAX_N)

    Returns:
        TransformerSpec over (x_i; i) tokens of dimension n + 1
    """
    if n < 6 or n % 2:
        raise ValueError(f"1-vs-2 cycle construction needs an even n >= 6, got {n}")
    if mode not in MODES:
        raise ValueError(f"Unknown mode '{mode}'. Choose from {MODES}")
    if mode == 'explicit_net' and n > config.EXPLICIT_NET_MAX_N:
        raise ValueError(f"explicit_net mode is capped at n <= {config.EXPLICIT_NET_MAX_N}, got {n}")

    dim_in = n + 1
    width = 3 * n
    keep = AttentionHead(K=np.zeros((1, dim_in)), Q=np.zeros((1, dim_in)), V=np.zeros((dim_in, dim_in)))
    if mode == 'explicit_net':
        decode = _neighbor_pair_net(n)
    else:
        decode = ExactMap.create('cycle-neighbor-pair', width, n=n)

    gather = AttentionHead(K=np.zeros((1, width)), Q=np.zeros((1, width)), V=n * np.eye(width))
    readout = ExactMap.create('connectivity-of-edge-list', 1, n=n)

    logger.debug("built one_vs_two n=%d mode=%s", n, mode)
    return TransformerSpec(
        layers=(TransformerLayer(heads=(keep,), residual=True, mlp=decode),
                TransformerLayer(heads=(gather,), residual=False, mlp=readout)),
        input_dim=dim_in,
        output_description='every token: 1 if the graph is a single cycle, else 0',
        name=f'one_vs_two(n={n}, mode={mode})')

