"""Registry of named per-token functions standing in for the arbitrary-MLP assumption."""
import logging
from typing import Callable, Dict, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

ExactMapFn = Callable[..., np.ndarray]

_REGISTRY: Dict[str, ExactMapFn] = {}


def register_exact_map(map_id: str, fn: Optional[ExactMapFn] = None):
    """
    Register fn(token, index, **params) -> token under map_id.

    Usable directly or as a decorator. Ids are write-once.

    Args:
        map_id: Unique name
        fn: Deterministic, side-effect free per-token function

    Returns:
        fn (so the decorator form leaves the function usable)
    """
    def _register(func: ExactMapFn) -> ExactMapFn:
        if map_id in _REGISTRY:
            raise ValueError(f"ExactMap id '{map_id}' is already registered")
        _REGISTRY[map_id] = func
        logger.debug("registered exact map %s", map_id)
        return func

    if fn is None:
        return _register
    return _register(fn)


def get_exact_map(map_id: str) -> ExactMapFn:
    try:
        return _REGISTRY[map_id]
    except KeyError:
        raise KeyError(f"ExactMap id '{map_id}' is not registered") from None


def is_registered(map_id: str) -> bool:
    return map_id in _REGISTRY


def registered_ids() -> List[str]:
    return sorted(_REGISTRY)


def exact_map_apply(map_id: str, token: np.ndarray, index: int, params: Optional[Dict] = None) -> np.ndarray:
    """Look up map_id and apply it to one token."""
    fn = get_exact_map(map_id)
    out = fn(np.asarray(token, dtype=np.float64), int(index), **(params or {}))
    return np.asarray(out, dtype=np.float64).reshape(-1)


@register_exact_map('identity')
def _identity(token: np.ndarray, index: int) -> np.ndarray:
    return token.copy()


@register_exact_map('round-to-int')
def _round_to_int(token: np.ndarray, index: int) -> np.ndarray:
    return np.rint(token)
