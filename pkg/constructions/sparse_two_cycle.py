"""Single-layer transformer detecting directed 2-cycles in degree-bounded graphs."""
import logging
import math
from typing import Optional, Tuple

import numpy as np

import config
from graphs.graph_core import Graph
from network.exact_maps import register_exact_map
from network.rip_embedding import RipSystem, cached_rip_system, compute_phi, rip_dimension
from network.transformer import AttentionHead, ExactMap, TransformerLayer, TransformerSpec

logger = logging.getLogger(__name__)


def default_sparse_temperature(n: int) -> float:
    return 4.0 * math.log(n / config.SPARSE_TAIL)


def sparse_tokens(g: Graph) -> np.ndarray:
    """Columns (x_i; i) for every node plus the dummy token (0; n)."""
    X = np.zeros((g.n + 1, g.n + 1))
    X[:g.n, :g.n] = g.adj.T
    X[g.n, :] = np.arange(g.n + 1)
    return X


@register_exact_map('rip-embed')
def _rip_embed(token: np.ndarray, index: int, n: int, d: int, alpha: float, seed: int) -> np.ndarray:
    system = cached_rip_system(n, d, alpha, seed)
    p = system.rip_dim
    out = np.zeros(2 * p + 2)
    if index == n:
        out[2 * p + 1] = 1.0
        return out
    support = np.flatnonzero(token[:n] > 0.5)
    out[:p] = compute_phi(system, support).phi
    out[p:2 * p] = system.Y[:, index]
    out[2 * p] = 1.0
    return out


@register_exact_map('dummy-mass-threshold')
def _dummy_mass_threshold(token: np.ndarray, index: int) -> np.ndarray:
    # little mass on the dummy means some partner outscored it
    return np.array([1.0 if token[-1] < 0.5 else 0.0])


def build_sparse_two_cycle(
    n: int,
    d: int,
    alpha: Optional[float] = None,
    c: Optional[float] = None,
    seed: int = 0
) -> TransformerSpec:
    """
    One attention layer over RIP-embedded rows plus a constant dummy token.

    The input stage maps (x_i; i) to [phi(x_i); y_i; 1; 0] and the dummy to [0; 0; 0; 1].
    With K x_j = [y_j; phi_j; dummy_j; 0] and Q x_i = [phi_i; y_i; 7/4 real_i; 0] the logit of
    j for query i is c (<phi_i, y_j> + <phi_j, y_i>): 2c for a mutual pair, 7c/4 for the dummy.
    V copies the dummy flag, so the last coordinate of token i is its attention mass on the dummy.

    Args:
        n: Node count
        d: Bound on every out- and in-degree
        alpha: RIP oversampling constant (config.RIP_ALPHA by default)
        c: Temperature (4 ln(n / SPARSE_TAIL) by default)
        seed: Seed of the RIP embedding

    Returns:
        TransformerSpec over n + 1 tokens of dimension n + 1 built by sparse_tokens
    """
    alpha = config.RIP_ALPHA if alpha is None else float(alpha)
    if n < 2:
        raise ValueError(f"Sparse 2-cycle construction needs n >= 2, got {n}")
    if not 1 <= d <= n:
        raise ValueError(f"Degree bound must satisfy 1 <= d <= n, got d={d}")
    c = default_sparse_temperature(n) if c is None else float(c)

    p = rip_dimension(n, d, alpha)
    width = 2 * p + 2
    embed = ExactMap.create('rip-embed', width, n=n, d=d, alpha=alpha, seed=int(seed))

    K = np.zeros((width, width))
    K[:p, p:2 * p] = np.eye(p)
    K[p:2 * p, :p] = np.eye(p)
    K[2 * p, 2 * p + 1] = 1.0
    Q = np.zeros((width, width))
    Q[:2 * p, :2 * p] = np.eye(2 * p)
    Q[2 * p, 2 * p] = config.DUMMY_QUERY_WEIGHT
    V = np.zeros((width, width))
    V[2 * p + 1, 2 * p + 1] = 1.0
    head = AttentionHead(K=K, Q=Q, V=V, temperature=c)

    readout = ExactMap.create('dummy-mass-threshold', 1)
    return TransformerSpec(
        layers=(TransformerLayer(heads=(head,), residual=False, mlp=readout),),
        input_dim=n + 1,
        output_description='token i < n: 1 if node i lies on a directed 2-cycle',
        name=f'sparse_two_cycle(n={n}, d={d}, alpha={alpha:g}, seed={seed})',
        input_mlp=embed)


def check_degree_bound(g: Graph, d: int):
    if not g.directed:
        raise ValueError("Sparse 2-cycle detection needs a directed graph")
    if np.any(np.diag(g.adj)):
        raise ValueError("Sparse 2-cycle detection is undefined with self-loops")
    out_max = int(g.adj.sum(axis=1).max()) if g.n else 0
    in_max = int(g.adj.sum(axis=0).max()) if g.n else 0
    if max(out_max, in_max) > d:
        raise ValueError(f"Degree bound d={d} violated: max out-degree {out_max}, max in-degree {in_max}")


def pair_scores(g: Graph, system: RipSystem) -> np.ndarray:
    """S[i, j] = <phi(x_i), y_j> + <phi(x_j), y_i>, the logit of key j for query i in units of c."""
    products = np.vstack([compute_phi(system, np.flatnonzero(g.adj[i])).margins for i in range(g.n)])
    return products + products.T


def embedding_certificate(g: Graph, system: RipSystem) -> Tuple[bool, float]:
    """
    Whether every non-mutual pair scores at most 1 + SPARSE_OFF_SUPPORT_LIMIT.

    Mutual pairs score exactly 2 and the dummy 7/4, so a passing embedding leaves a gap of at
    least (3/4 - limit) c between the dummy and every other key of a node outside 2-cycles.

    Returns:
        (passed, largest non-mutual score)
    """
    if g.n == 0:
        return True, 0.0
    scores = pair_scores(g, system)
    mutual = (g.adj > 0) & (g.adj.T > 0)
    worst = float(scores[~mutual].max()) if (~mutual).any() else 0.0
    return worst <= 1.0 + config.SPARSE_OFF_SUPPORT_LIMIT, worst


def select_embedding_seed(g: Graph, d: int, alpha: Optional[float] = None, seed: int = 0) -> int:
    """
    First seed in seed, seed+1, ... whose embedding passes the certificate on g.

    Raises ValueError after RIP_MAX_RESAMPLES failures or repeated singular Gram matrices.
    """
    alpha = config.RIP_ALPHA if alpha is None else float(alpha)
    for attempt in range(config.RIP_MAX_RESAMPLES):
        candidate = int(seed) + attempt
        system = cached_rip_system(g.n, d, alpha, candidate)
        try:
            passed, worst = embedding_certificate(g, system)
        except ValueError as e:
            logger.warning("embedding seed %d rejected: %s", candidate, e)
            continue
        if passed:
            return candidate
        logger.warning("embedding seed %d rejected: off-support product %.3f", candidate, worst)
    raise ValueError(f"RIP margin failure after {config.RIP_MAX_RESAMPLES} resamples (n={g.n}, d={d})")
