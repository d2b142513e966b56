"""
Forward pass of the attention-plus-MLP transformer used by every construction.

Tokens are the columns of a TokenMatrix (embedding dim x token count). For a head with
key K, query Q and temperature c the logits are S = c * X^T K^T Q X, so S[j, i] scores
source token j for query token i, and the softmax normalises each column of S.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import softmax

import config
from network.exact_maps import exact_map_apply, get_exact_map

logger = logging.getLogger(__name__)


def as_token_matrix(X) -> np.ndarray:
    """Validate and convert to a finite float64 TokenMatrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"TokenMatrix must be 2-D (dim x tokens), got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("TokenMatrix contains non-finite entries")
    return X


@dataclass(frozen=True, eq=False)
class AttentionHead:
    """One self-attention head; K and Q map tokens into a shared score space."""
    K: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    temperature: float = 1.0

    def __post_init__(self):
        for name in ('K', 'Q', 'V'):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=np.float64)))
        if self.K.shape != self.Q.shape:
            raise ValueError(f"K {self.K.shape} and Q {self.Q.shape} must have the same shape")
        if self.V.shape[1] != self.K.shape[1]:
            raise ValueError(f"V takes {self.V.shape[1]} inputs but K takes {self.K.shape[1]}")
        if not self.temperature > 0:
            raise ValueError(f"Temperature must be positive, got {self.temperature}")

    @property
    def input_dim(self) -> int:
        return self.K.shape[1]

    @property
    def output_dim(self) -> int:
        return self.V.shape[0]

    def to_dict(self) -> Dict:
        return {'K': self.K.tolist(), 'Q': self.Q.tolist(), 'V': self.V.tolist(),
                'temperature': self.temperature}


@dataclass(frozen=True, eq=False)
class ReluStack:
    """
    Affine layers with ReLU between them; the last layer is linear.

    position_aware stacks see the token with its index appended as one extra input row.
    """
    layers: Tuple[Tuple[np.ndarray, np.ndarray], ...]
    position_aware: bool = False

    def __post_init__(self):
        layers = tuple((np.atleast_2d(np.asarray(W, dtype=np.float64)),
                        np.asarray(b, dtype=np.float64).reshape(-1)) for W, b in self.layers)
        if not layers:
            raise ValueError("ReluStack needs at least one affine layer")
        for idx, (W, b) in enumerate(layers):
            if W.shape[0] != b.shape[0]:
                raise ValueError(f"Layer {idx}: W has {W.shape[0]} rows but b has {b.shape[0]} entries")
            if idx and W.shape[1] != layers[idx - 1][0].shape[0]:
                raise ValueError(f"Layer {idx} expects {W.shape[1]} inputs, previous layer emits "
                                 f"{layers[idx - 1][0].shape[0]}")
        object.__setattr__(self, 'layers', layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[1] - (1 if self.position_aware else 0)

    @property
    def output_dim(self) -> int:
        return self.layers[-1][0].shape[0]

    @property
    def hidden_widths(self) -> List[int]:
        return [W.shape[0] for W, _ in self.layers[:-1]]

    def to_dict(self) -> Dict:
        return {'kind': 'relu_stack', 'position_aware': self.position_aware,
                'layers': [{'W': W.tolist(), 'b': b.tolist()} for W, b in self.layers]}


def _freeze(value: Any) -> Any:
    if isinstance(value, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in value.items()))
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    if isinstance(value, np.ndarray):
        return _freeze(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def _thaw_json(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_thaw_json(v) for v in value]
    return value


@dataclass(frozen=True)
class ExactMap:
    """Registered per-token function with immutable parameters; always receives (token, index)."""
    map_id: str
    params: Tuple[Tuple[str, Any], ...] = ()
    output_dim: int = 0
    position_aware: bool = True

    @classmethod
    def create(cls, map_id: str, output_dim: int, **params) -> 'ExactMap':
        get_exact_map(map_id)
        return cls(map_id=map_id, params=tuple(sorted((k, _freeze(v)) for k, v in params.items())),
                   output_dim=output_dim)

    @property
    def kwargs(self) -> Dict[str, Any]:
        return dict(self.params)

    def to_dict(self) -> Dict:
        return {'kind': 'exact_map', 'id': self.map_id, 'output_dim': self.output_dim,
                'params': {k: _thaw_json(v) for k, v in self.params}}


MlpStage = Union[ReluStack, ExactMap]


@dataclass(frozen=True)
class TransformerLayer:
    heads: Tuple[AttentionHead, ...]
    residual: bool = False
    mlp: Optional[MlpStage] = None


@dataclass(frozen=True)
class TransformerSpec:
    """
    A constructed transformer.

    input_mlp, when present, is the per-token input encoding applied before the first
    attention layer; embedding widths are measured from its output onward.
    """
    layers: Tuple[TransformerLayer, ...]
    input_dim: int
    output_description: str = ''
    name: str = ''
    input_mlp: Optional[MlpStage] = None

    def layer_dims(self) -> List[Tuple[int, int]]:
        """(attention output dim, MLP output dim) for each layer."""
        dims = []
        current = _stage_output_dim(self.input_mlp, self.input_dim)
        for layer in self.layers:
            attn = layer.heads[0].output_dim if layer.heads else current
            current = _stage_output_dim(layer.mlp, attn)
            dims.append((attn, current))
        return dims

    def embedding_width(self) -> int:
        widths = [_stage_output_dim(self.input_mlp, self.input_dim)]
        for attn, out in self.layer_dims():
            widths.extend([attn, out])
        return max(widths)

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'input_dim': self.input_dim,
            'output_description': self.output_description,
            'input_mlp': self.input_mlp.to_dict() if self.input_mlp is not None else None,
            'layers': [{'heads': [h.to_dict() for h in layer.heads],
                        'residual': layer.residual,
                        'mlp': layer.mlp.to_dict() if layer.mlp is not None else None}
                       for layer in self.layers],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _stage_output_dim(stage: Optional[MlpStage], input_dim: int) -> int:
    if stage is None:
        return input_dim
    return stage.output_dim


def _stage_from_dict(data: Optional[Dict]) -> Optional[MlpStage]:
    if data is None:
        return None
    if data['kind'] == 'relu_stack':
        return ReluStack(tuple((np.array(l['W']), np.array(l['b'])) for l in data['layers']),
                         position_aware=bool(data['position_aware']))
    if data['kind'] == 'exact_map':
        return ExactMap.create(data['id'], int(data['output_dim']), **data['params'])
    raise ValueError(f"Unknown MLP stage kind '{data['kind']}'")


def spec_from_dict(data: Dict) -> TransformerSpec:
    layers = tuple(
        TransformerLayer(
            heads=tuple(AttentionHead(np.array(h['K']), np.array(h['Q']), np.array(h['V']), h['temperature'])
                        for h in layer['heads']),
            residual=bool(layer['residual']),
            mlp=_stage_from_dict(layer['mlp']))
        for layer in data['layers'])
    return TransformerSpec(layers=layers, input_dim=int(data['input_dim']),
                           output_description=data.get('output_description', ''),
                           name=data.get('name', ''),
                           input_mlp=_stage_from_dict(data.get('input_mlp')))


def spec_from_json(text: str) -> TransformerSpec:
    return spec_from_dict(json.loads(text))


def attention_weights(head: AttentionHead, X: np.ndarray) -> np.ndarray:
    """
    Softmax weights of one head; column i holds query token i's distribution over sources.

    Args:
        head: Attention head
        X: TokenMatrix

    Returns:
        N x N matrix whose columns sum to 1
    """
    if X.shape[0] != head.input_dim:
        raise ValueError(f"Head expects {head.input_dim}-dim tokens, got {X.shape[0]}")
    logits = head.temperature * ((head.K @ X).T @ (head.Q @ X))
    if not np.all(np.isfinite(logits)):
        raise ValueError("Attention logits are not finite")
    peak = float(np.max(np.abs(logits))) if logits.size else 0.0
    if peak > config.MAX_LOGIT:
        raise ValueError(f"Max |logit| {peak:.1f} exceeds the overflow cap {config.MAX_LOGIT}")
    weights = softmax(logits, axis=0)
    drift = np.abs(weights.sum(axis=0) - 1.0)
    if drift.size and drift.max() > config.SOFTMAX_SUM_TOL:
        raise ArithmeticError(f"Softmax columns drift from 1 by {drift.max():.2e}")
    return weights


def attention_forward(
    heads: Sequence[AttentionHead],
    X: np.ndarray,
    residual: bool,
    weights_out: Optional[List[np.ndarray]] = None
) -> np.ndarray:
    """
    Z = sum_h V_h X softmax(c_h X^T K_h^T Q_h X), plus X when residual is set.

    Args:
        heads: Attention heads (empty means Z = 0)
        X: TokenMatrix
        residual: Add the input tokens to the attention output
        weights_out: Optional list receiving each head's weight matrix

    Returns:
        TokenMatrix
    """
    X = as_token_matrix(X)
    if not heads:
        return X.copy() if residual else np.zeros_like(X)

    out_dim = heads[0].output_dim
    Z = np.zeros((out_dim, X.shape[1]))
    for head in heads:
        if head.output_dim != out_dim:
            raise ValueError(f"Heads disagree on output dim: {head.output_dim} vs {out_dim}")
        weights = attention_weights(head, X)
        if weights_out is not None:
            weights_out.append(weights)
        Z += (head.V @ X) @ weights

    if residual:
        if out_dim != X.shape[0]:
            raise ValueError(f"Residual needs matching dims, attention emits {out_dim} for {X.shape[0]}-dim input")
        Z = Z + X
    return Z


def mlp_forward(stage: Optional[MlpStage], X: np.ndarray, indices: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    Apply an MLP stage to every token (column) separately.

    Args:
        stage: ReluStack, ExactMap, or None for the identity
        X: TokenMatrix
        indices: Token indices handed to position-aware stages (default 0..N-1)

    Returns:
        TokenMatrix of the stage's output dim
    """
    X = as_token_matrix(X)
    if stage is None:
        return X.copy()
    n_tokens = X.shape[1]
    indices = np.arange(n_tokens) if indices is None else np.asarray(indices)
    if indices.shape[0] != n_tokens:
        raise ValueError(f"Got {indices.shape[0]} indices for {n_tokens} tokens")

    if isinstance(stage, ReluStack):
        H = np.vstack([X, indices.reshape(1, -1).astype(np.float64)]) if stage.position_aware else X
        if H.shape[0] != stage.layers[0][0].shape[1]:
            raise ValueError(f"ReluStack expects {stage.layers[0][0].shape[1]} inputs, got {H.shape[0]}")
        last = len(stage.layers) - 1
        for idx, (W, b) in enumerate(stage.layers):
            H = W @ H + b[:, None]
            if idx < last:
                H = np.maximum(H, 0.0)
        return H

    params = stage.kwargs
    columns = [exact_map_apply(stage.map_id, X[:, i], int(indices[i]), params) for i in range(n_tokens)]
    if not columns:
        return np.zeros((stage.output_dim, 0))
    out = np.column_stack(columns)
    if stage.output_dim and out.shape[0] != stage.output_dim:
        raise ValueError(f"ExactMap '{stage.map_id}' emitted {out.shape[0]} dims, declared {stage.output_dim}")
    return out


def transformer_forward(
    spec: TransformerSpec,
    X0: np.ndarray,
    trace: Optional[List[Dict]] = None
) -> np.ndarray:
    """
    Run the input stage and every layer in order.

    Args:
        spec: Constructed transformer
        X0: Input TokenMatrix with spec.input_dim rows
        trace: Optional list receiving one dict per layer with keys
            'weights' (per head), 'attention' and 'output'

    Returns:
        Output TokenMatrix of the last layer
    """
    X = as_token_matrix(X0)
    if X.shape[0] != spec.input_dim:
        raise ValueError(f"Spec expects {spec.input_dim}-dim input tokens, got {X.shape[0]}")
    X = mlp_forward(spec.input_mlp, X)

    for number, layer in enumerate(spec.layers):
        weights: List[np.ndarray] = []
        Z = attention_forward(layer.heads, X, layer.residual, weights_out=weights)
        X = mlp_forward(layer.mlp, Z)
        logger.debug("%s layer %d: attention %s -> mlp %s", spec.name, number, Z.shape, X.shape)
        if trace is not None:
            trace.append({'weights': weights, 'attention': Z, 'output': X})
    return X
