"""
Graph-to-token encodings.

Token matrices hold one token per column:
    adjacency  - token i is row i of A, zero padded to pad_n, optionally followed by i
    edge_list  - one token per edge, one_hot(u) stacked on one_hot(v)
    laplacian  - spectral coordinates of each node from the Laplacian eigenvectors
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from graphs.graph_core import Graph, graph_from_adjacency
from tokenization.spectral import laplacian_eigenpairs

logger = logging.getLogger(__name__)

SCHEMES = ('adjacency', 'edge_list', 'laplacian')
LAPLACIAN_LAYOUTS = ('spectral_coordinates', 'eigenpair_tokens')


@dataclass(frozen=True, eq=False)
class TokenizedGraph:
    """
    Token matrix of one graph plus the metadata datasets carry.

    Attributes:
        tokens: dim x token-count matrix
        scheme: adjacency, edge_list or laplacian
        pad_n: Padded node count
        n: Real node count
        label: Optional scalar target
        graph_id: Optional identifier
    """
    tokens: np.ndarray
    scheme: str
    pad_n: int
    n: int
    label: Optional[float] = None
    graph_id: Optional[str] = None

    @property
    def token_count(self) -> int:
        return self.tokens.shape[1]

    def with_label(self, label: Optional[float]) -> 'TokenizedGraph':
        return TokenizedGraph(self.tokens, self.scheme, self.pad_n, self.n, label, self.graph_id)


def _check_pad(g: Graph, pad_n: Optional[int]) -> int:
    pad_n = g.n if pad_n is None else int(pad_n)
    if pad_n < g.n:
        raise ValueError(f"pad_n={pad_n} is smaller than the node count {g.n}")
    return pad_n


def tokenize_adjacency(g: Graph, pad_n: Optional[int] = None, with_index: bool = False,
                       label: Optional[float] = None) -> TokenizedGraph:
    """
    Node-adjacency tokens.

    Args:
        g: Graph
        pad_n: Padded node count (g.n by default)
        with_index: Append the node index as a last coordinate
        label: Optional target carried into exports

    Returns:
        TokenizedGraph with pad_n tokens of dimension pad_n (+1 with the index)
    """
    pad_n = _check_pad(g, pad_n)
    X = np.zeros((pad_n + (1 if with_index else 0), pad_n))
    X[:g.n, :g.n] = g.adj.T
    if with_index:
        X[pad_n, :g.n] = np.arange(g.n)
    return TokenizedGraph(X, 'adjacency', pad_n, g.n, label, g.graph_id)


def detokenize_adjacency(tokenized: TokenizedGraph, directed: bool) -> Graph:
    """Rebuild the graph from adjacency tokens, dropping padding and the index row."""
    if tokenized.scheme != 'adjacency':
        raise ValueError(f"Expected adjacency tokens, got {tokenized.scheme}")
    n = tokenized.n
    adj = np.rint(tokenized.tokens[:n, :n].T).astype(np.int64)
    return graph_from_adjacency(adj, directed, allow_self_loops=bool(np.any(np.diag(adj))))


def tokenize_edgelist(g: Graph, pad_n: Optional[int] = None, label: Optional[float] = None) -> TokenizedGraph:
    """One token per edge in lexicographic (u, v) order; undirected edges have u <= v."""
    pad_n = _check_pad(g, pad_n)
    X = np.zeros((2 * pad_n, g.edge_count))
    for col, (u, v) in enumerate(g.edges):
        X[u, col] = 1.0
        X[pad_n + v, col] = 1.0
    return TokenizedGraph(X, 'edge_list', pad_n, g.n, label, g.graph_id)


def tokenize_laplacian(
    g: Graph,
    m: int,
    layout: str = 'spectral_coordinates',
    solver: Optional[str] = None,
    pad_n: Optional[int] = None,
    label: Optional[float] = None
) -> TokenizedGraph:
    """
    Laplacian eigenvector tokens from the m smallest eigenpairs of L = D - A.

    spectral_coordinates: token 0 holds the eigenvalues (lambda_1..lambda_m) and token i + 1
    holds node i's coordinates (v_1[i], ..., v_m[i]); pad_n + 1 tokens of dimension m.
    eigenpair_tokens: token j holds eigenvector j padded to pad_n followed by lambda_j;
    m tokens of dimension pad_n + 1.

    Args:
        g: Undirected graph
        m: Number of eigenpairs, 1 <= m <= n
        layout: spectral_coordinates or eigenpair_tokens
        solver: lapack or jacobi (config.LAPLACIAN_SOLVER by default)
        pad_n: Padded node count (g.n by default)
        label: Optional target carried into exports

    Returns:
        TokenizedGraph
    """
    if g.directed:
        raise ValueError("Laplacian tokens need an undirected graph")
    if not 1 <= m <= g.n:
        raise ValueError(f"m must satisfy 1 <= m <= n={g.n}, got {m}")
    if layout not in LAPLACIAN_LAYOUTS:
        raise ValueError(f"Unknown Laplacian layout '{layout}'. Choose from {LAPLACIAN_LAYOUTS}")
    pad_n = _check_pad(g, pad_n)

    values, vectors = laplacian_eigenpairs(g, solver)
    values, vectors = values[:m], vectors[:, :m]
    if layout == 'spectral_coordinates':
        X = np.zeros((m, pad_n + 1))
        X[:, 0] = values
        X[:, 1:g.n + 1] = vectors.T
    else:
        X = np.zeros((pad_n + 1, m))
        X[:g.n, :] = vectors
        X[pad_n, :] = values
    logger.debug("laplacian tokens for %s: layout=%s m=%d", g.graph_id, layout, m)
    return TokenizedGraph(X, 'laplacian', pad_n, g.n, label, g.graph_id)


def tokenize(g: Graph, scheme: str, pad_n: Optional[int] = None, m: Optional[int] = None,
             label: Optional[float] = None, **options) -> TokenizedGraph:
    """Dispatch to the tokenizer named by scheme."""
    if scheme == 'adjacency':
        return tokenize_adjacency(g, pad_n, with_index=options.get('with_index', False), label=label)
    if scheme == 'edge_list':
        return tokenize_edgelist(g, pad_n, label=label)
    if scheme == 'laplacian':
        if m is None:
            raise ValueError("The Laplacian tokenizer needs m")
        return tokenize_laplacian(g, m, layout=options.get('layout', 'spectral_coordinates'),
                                  solver=options.get('solver'), pad_n=pad_n, label=label)
    raise ValueError(f"Unknown tokenization scheme '{scheme}'. Choose from {SCHEMES}")
