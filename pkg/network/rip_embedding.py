"""Random sign embeddings with least-norm dual witnesses for sparse supports."""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np
from scipy import linalg

import config

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RipSystem:
    """
    Embedding vectors y_1..y_n in R^p (columns of Y) for supports of size at most d.

    Attributes:
        n: Universe size
        d: Maximum support size
        rip_dim: p = max(ceil(alpha * d * ln n), d)
        Y: p x n matrix with entries +-1/sqrt(p)
        alpha: Oversampling constant
        seed: Seed the matrix was drawn from
    """
    n: int
    d: int
    rip_dim: int
    Y: np.ndarray
    alpha: float
    seed: Optional[int]


@dataclass(frozen=True, eq=False)
class PhiResult:
    phi: np.ndarray
    margins: np.ndarray
    success: bool

    def off_support_max(self, support: Iterable[int]) -> float:
        mask = np.ones(self.margins.shape[0], dtype=bool)
        mask[list(support)] = False
        return float(self.margins[mask].max()) if mask.any() else 0.0


def rip_dimension(n: int, d: int, alpha: float) -> int:
    return max(int(math.ceil(alpha * d * math.log(n))), d)


def sample_rip_vectors(n: int, d: int, alpha: Optional[float] = None, seed=None) -> RipSystem:
    """
    Draw i.i.d. Rademacher embedding vectors scaled to unit norm.

    Args:
        n: Universe size, at least 2
        d: Maximum support size, at most n
        alpha: Oversampling constant (config.RIP_ALPHA by default)
        seed: Seed for numpy's default_rng

    Returns:
        RipSystem
    """
    alpha = config.RIP_ALPHA if alpha is None else alpha
    if n < 2:
        raise ValueError(f"RIP universe needs n >= 2, got {n}")
    if d > n:
        raise ValueError(f"Support bound d={d} exceeds universe size n={n}")
    if d < 1:
        raise ValueError(f"Support bound must be at least 1, got {d}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")

    p = rip_dimension(n, d, alpha)
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(p, n)) * 2 - 1
    return RipSystem(n=n, d=d, rip_dim=p, Y=signs / math.sqrt(p), alpha=alpha, seed=seed)


@lru_cache(maxsize=32)
def cached_rip_system(n: int, d: int, alpha: float, seed: int) -> RipSystem:
    """Read-only shared RipSystem for ExactMaps that rebuild Y from their parameters."""
    return sample_rip_vectors(n, d, alpha, seed)


def compute_phi(system: RipSystem, support: Iterable[int]) -> PhiResult:
    """
    Least-norm phi with <phi, y_i> = 1 on the support.

    phi = Y_S (Y_S^T Y_S)^{-1} 1, so phi lies in the span of the support columns.

    Args:
        system: RipSystem
        support: Indices with x_i = 1, at most d of them

    Returns:
        PhiResult with all n inner products and whether every off-support one is within RIP_MARGIN
    """
    support = sorted(set(int(i) for i in support))
    if len(support) > system.d:
        raise ValueError(f"Support of size {len(support)} exceeds d={system.d}")
    if support and (support[0] < 0 or support[-1] >= system.n):
        raise ValueError(f"Support {support} out of range for n={system.n}")
    if not support:
        return PhiResult(phi=np.zeros(system.rip_dim), margins=np.zeros(system.n), success=True)

    Y_S = system.Y[:, support]
    gram = Y_S.T @ Y_S
    if np.linalg.cond(gram) > config.RIP_GRAM_COND_LIMIT:
        raise ValueError(f"Gram matrix of support {support} is singular; resample the embedding")
    coefficients = linalg.solve(gram, np.ones(len(support)), assume_a='pos')
    phi = Y_S @ coefficients
    margins = system.Y.T @ phi

    off = np.ones(system.n, dtype=bool)
    off[support] = False
    success = bool(np.all(np.abs(margins[off]) <= config.RIP_MARGIN))
    return PhiResult(phi=phi, margins=margins, success=success)


def margin_success_rate(n: int, d: int, alpha: float, trials: int, seed=None) -> float:
    """Fraction of uniformly random size-d supports whose off-support margins all stay within 1/2."""
    rng = np.random.default_rng(seed)
    system = sample_rip_vectors(n, d, alpha, int(rng.integers(0, 2 ** 31 - 1)))
    hits = 0
    for _ in range(trials):
        support = rng.choice(n, size=d, replace=False)
        try:
            hits += compute_phi(system, support).success
        except ValueError:
            logger.debug("singular support %s skipped as a failure", support)
    return hits / trials
