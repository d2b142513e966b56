"""Explicit ReLU gadget networks: identity, interval indicator, bump memorizer."""
from typing import List, Sequence, Tuple

import numpy as np

from network.transformer import ReluStack, mlp_forward


def relu(x):
    return np.maximum(x, 0.0)


def build_identity_net(dim: int) -> ReluStack:
    """z -> relu(z) - relu(-z), coordinate-wise."""
    eye = np.eye(dim)
    return ReluStack(((np.vstack([eye, -eye]), np.zeros(2 * dim)),
                      (np.hstack([eye, -eye]), np.zeros(dim))))


def indicator_pieces(r: int, s: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Biases and output coefficients of the four-ReLU interval indicator.

    f(z) = relu(z-(r-1)) - relu(z-r) + relu(z-(s+1)) - relu(z-s) is 1 on integers in [r, s]
    and 0 on every other integer.

    Returns:
        (biases, coefficients), each of length 4, for hidden units relu(z + bias)
    """
    if r > s:
        raise ValueError(f"Indicator interval is empty: r={r} > s={s}")
    biases = np.array([-(r - 1), -r, -(s + 1), -s], dtype=np.float64)
    coefficients = np.array([1.0, -1.0, 1.0, -1.0])
    return biases, coefficients


def build_indicator_net(r: int, s: int) -> ReluStack:
    """Scalar-in, scalar-out indicator of the integer interval [r, s]."""
    biases, coefficients = indicator_pieces(r, s)
    return ReluStack(((np.ones((4, 1)), biases), (coefficients.reshape(1, 4), np.zeros(1))))


def bump_delta(anchors: Sequence[float]) -> float:
    """Half the minimum anchor gap: each bump then vanishes at every other anchor."""
    anchors = np.sort(np.asarray(anchors, dtype=np.float64))
    if anchors.size < 2:
        return 1.0
    gaps = np.diff(anchors)
    if np.any(gaps <= 0):
        raise ValueError("Memorizer anchors must be pairwise distinct")
    return float(gaps.min()) / 2.0


def build_bump_memorizer(pairs: Sequence[Tuple[float, float]]) -> ReluStack:
    """
    Two-layer ReLU net N with N(a_i) = b_i for every pair.

    Each anchor gets the trapezoid bump
    (1/delta) [relu(x-a+2delta) - relu(x-a+delta) - relu(x-a-delta) + relu(x-a-2delta)],
    which is 1 on [a-delta, a+delta] and 0 outside (a-2delta, a+2delta). The commonly quoted
    form with reflected last two terms equals 2 at the anchor and tends to 1 far away, so it
    cannot be summed.

    Args:
        pairs: (a_i, b_i) with pairwise distinct a_i

    Returns:
        ReluStack with hidden width 4k
    """
    if not pairs:
        raise ValueError("Memorizer needs at least one (a, b) pair")
    anchors = [float(a) for a, _ in pairs]
    if len(set(anchors)) != len(anchors):
        raise ValueError(f"Duplicate memorizer anchors in {anchors}")
    delta = bump_delta(anchors)

    biases: List[float] = []
    weights: List[float] = []
    for a, b in pairs:
        a, b = float(a), float(b)
        biases.extend([-a + 2 * delta, -a + delta, -a - delta, -a - 2 * delta])
        weights.extend([b / delta, -b / delta, -b / delta, b / delta])

    width = len(biases)
    return ReluStack(((np.ones((width, 1)), np.array(biases)),
                      (np.array(weights).reshape(1, width), np.zeros(1))))


def evaluate_scalar(stage: ReluStack, values) -> np.ndarray:
    """Run a scalar-input ReluStack on each value."""
    values = np.atleast_1d(np.asarray(values, dtype=np.float64))
    return mlp_forward(stage, values.reshape(1, -1))[0]
