"""L-layer transformer whose i-th output token carries row i of A^L."""
import logging
import math
from functools import lru_cache
from typing import List, Optional

import numpy as np

import config
from graphs.graph_core import Graph
from network.exact_maps import register_exact_map
from network.gadgets import build_bump_memorizer, evaluate_scalar
from network.transformer import AttentionHead, ExactMap, ReluStack, TransformerLayer, TransformerSpec

logger = logging.getLogger(__name__)

MODES = ('exact_map', 'explicit_net')


def power_temperature(n: int, L: int, eps: float) -> float:
    """c = ln(2n * n^L / eps): softmax leakage then moves each scaled workspace entry by < eps."""
    return math.log(2 * n * float(n) ** L / eps)


def power_tokens(g: Graph) -> np.ndarray:
    """Column i = [row i of A; e_i; e_i], the last block being row i of A^0."""
    zero = np.flatnonzero(g.adj.sum(axis=1) == 0)
    if zero.size:
        raise ValueError(f"zero-degree node {int(zero[0])}: the power construction needs out-degree >= 1")
    eye = np.eye(g.n)
    return np.vstack([g.adj.T.astype(np.float64), eye, eye])


@lru_cache(maxsize=16)
def degree_memorizer(n: int) -> ReluStack:
    """Bump memorizer sending 1/k to k for k = 1..n."""
    return build_bump_memorizer([(1.0 / k, float(k)) for k in range(1, n + 1)])


@register_exact_map('power-rescale')
def _power_rescale(token: np.ndarray, index: int, n: int, explicit: bool = False) -> np.ndarray:
    # attention left [0; a_i / deg; (A^{l+1})_i / deg]; restore integers
    inverse_block = token[n:2 * n]
    peak = float(inverse_block.max())
    if explicit:
        degree = float(evaluate_scalar(degree_memorizer(n), peak)[0])
    else:
        degree = 1.0 / peak
    degree = float(np.rint(degree))

    row = np.rint(degree * inverse_block)
    if row.sum() != degree:
        raise ValueError(f"Node {index}: recovered degree {degree:g} disagrees with its row sum {row.sum():g}")
    out = np.zeros(3 * n)
    out[:n] = row
    out[n + index] = 1.0
    out[2 * n:] = np.rint(degree * token[2 * n:3 * n])
    return out


def build_power_transformer(
    n: int,
    L: int,
    eps: Optional[float] = None,
    mode: str = 'exact_map',
    temperature: Optional[float] = None
) -> TransformerSpec:
    """
    L attention layers computing A^L row by row.

    Each layer attends from token i to its out-neighbors (K x_j = e_j, Q x_i = a_i), so the
    softmax approximates the uniform distribution over row i of A. V = diag(0, I, I) carries
    the identity block (giving a_i / deg_i) and the workspace (giving row i of A^{l+1} / deg_i).
    The position-aware MLP recovers deg_i, rescales and rounds.

    Args:
        n: Node count
        L: Number of layers / walk length
        eps: Softmax leakage tolerance (config.POWER_EPS by default)
        mode: exact_map, or explicit_net to recover the degree with the bump memorizer
        temperature: Override for the default ln(2n n^L / eps)

    Returns:
        TransformerSpec over 3n-dim tokens built by power_tokens
    """
    if L < 1:
        raise ValueError(f"L must be at least 1, got {L}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if mode not in MODES:
        raise ValueError(f"Unknown mode '{mode}'. Choose from {MODES}")
    if float(n) ** L >= config.EXACT_INT_LIMIT:
        raise OverflowError(f"n^L = {n}^{L} does not fit exact 53-bit integers")
    eps = config.POWER_EPS if eps is None else eps
    c = power_temperature(n, L, eps) if temperature is None else temperature
    if c > config.MAX_LOGIT:
        raise ValueError(f"Temperature {c:.1f} exceeds the overflow cap {config.MAX_LOGIT}")

    zero = np.zeros((n, n))
    eye = np.eye(n)
    K = np.hstack([zero, eye, zero])
    Q = np.hstack([eye, zero, zero])
    V = np.block([[zero, zero, zero], [zero, eye, zero], [zero, zero, eye]])
    head = AttentionHead(K=K, Q=Q, V=V, temperature=c)
    rescale = ExactMap.create('power-rescale', 3 * n, n=n, explicit=(mode == 'explicit_net'))

    layers = tuple(TransformerLayer(heads=(head,), residual=False, mlp=rescale) for _ in range(L))
    logger.debug("built power transformer n=%d L=%d c=%.2f", n, L, c)
    return TransformerSpec(layers=layers, input_dim=3 * n,
                           output_description='token i rows [2n:3n]: row i of A^L',
                           name=f'power(n={n}, L={L}, mode={mode})')


def workspace_errors(g: Graph, trace: List[dict], L: int) -> List[float]:
    """
    Per layer, max |attention workspace - A^{l+1}_i / deg_i| before any rounding.

    Args:
        g: Input graph
        trace: Trace filled by transformer_forward
        L: Number of layers

    Returns:
        One max-abs error per layer
    """
    n = g.n
    degrees = g.adj.sum(axis=1).astype(np.float64)
    exact = np.eye(n, dtype=np.int64)
    errors = []
    for layer in range(L):
        exact = g.adj @ exact
        workspace = trace[layer]['attention'][2 * n:3 * n, :].T
        errors.append(float(np.max(np.abs(workspace - exact / degrees[:, None]))))
    return errors
