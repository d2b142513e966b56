"""Tests for the transformer forward pass, the exact-map registry and the ReLU gadgets."""
import numpy as np
import pytest

from network.exact_maps import exact_map_apply, get_exact_map, is_registered, register_exact_map, registered_ids
from network.gadgets import (build_bump_memorizer, build_identity_net, build_indicator_net, bump_delta,
                             evaluate_scalar, relu)
from network.transformer import (AttentionHead, ExactMap, ReluStack, TransformerLayer, TransformerSpec,
                                 attention_forward, attention_weights, mlp_forward, spec_from_json,
                                 transformer_forward)


def _toy_spec() -> TransformerSpec:
    head = AttentionHead(K=np.eye(3), Q=2 * np.eye(3), V=np.eye(3), temperature=0.5)
    stack = ReluStack(((np.ones((2, 3)), np.array([0.0, -1.0])), (np.array([[1.0, -1.0]]), np.zeros(1))))
    return TransformerSpec(
        layers=(TransformerLayer(heads=(head,), residual=True, mlp=ExactMap.create('round-to-int', 3)),
                TransformerLayer(heads=(), residual=True, mlp=stack)),
        input_dim=3, name='toy')


def test_logits_score_source_rows_against_query_columns():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(3, 4))
    K = rng.normal(size=(2, 3))
    Q = rng.normal(size=(2, 3))
    head = AttentionHead(K=K, Q=Q, V=np.eye(3), temperature=0.7)
    weights = attention_weights(head, X)

    logits = np.array([[0.7 * (K @ X[:, j]) @ (Q @ X[:, i]) for i in range(4)] for j in range(4)])
    expected = np.exp(logits - logits.max(axis=0))
    expected /= expected.sum(axis=0)
    assert np.allclose(weights, expected)
    assert np.allclose(weights.sum(axis=0), 1.0)


def test_attention_output_mixes_value_columns():
    X = np.eye(2)
    head = AttentionHead(K=np.eye(2), Q=np.eye(2), V=np.eye(2), temperature=50.0)
    Z = attention_forward([head], X, residual=False)
    assert np.allclose(Z, X, atol=1e-12)
    with_residual = attention_forward([head], X, residual=True)
    assert np.allclose(with_residual, 2 * X, atol=1e-12)


def test_heads_sum_and_empty_heads():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    head = AttentionHead(K=np.zeros((2, 2)), Q=np.zeros((2, 2)), V=np.eye(2))
    Z = attention_forward([head, head], X, residual=False)
    assert np.allclose(Z, np.full((2, 2), 1.0))
    assert np.array_equal(attention_forward([], X, residual=False), np.zeros((2, 2)))
    assert np.array_equal(attention_forward([], X, residual=True), X)


def test_logit_cap_raises():
    head = AttentionHead(K=np.eye(1), Q=np.eye(1), V=np.eye(1), temperature=1000.0)
    with pytest.raises(ValueError, match="overflow cap"):
        attention_weights(head, np.ones((1, 2)))


def test_head_shape_validation():
    with pytest.raises(ValueError):
        AttentionHead(K=np.eye(2), Q=np.eye(3), V=np.eye(2))
    with pytest.raises(ValueError):
        AttentionHead(K=np.eye(2), Q=np.eye(2), V=np.eye(3))
    with pytest.raises(ValueError):
        AttentionHead(K=np.eye(2), Q=np.eye(2), V=np.eye(2), temperature=0.0)
    head = AttentionHead(K=np.eye(2), Q=np.eye(2), V=np.eye(2))
    with pytest.raises(ValueError):
        attention_weights(head, np.ones((3, 2)))


def test_residual_dimension_mismatch():
    head = AttentionHead(K=np.eye(2), Q=np.eye(2), V=np.ones((3, 2)))
    with pytest.raises(ValueError, match="Residual"):
        attention_forward([head], np.eye(2), residual=True)


def test_relu_stack_and_position_aware_input():
    stack = ReluStack(((np.array([[1.0, 1.0]]), np.zeros(1)),), position_aware=True)
    out = mlp_forward(stack, np.array([[5.0, 5.0, 5.0]]))
    assert out.tolist() == [[5.0, 6.0, 7.0]]
    assert stack.input_dim == 1
    with pytest.raises(ValueError):
        ReluStack(((np.ones((2, 2)), np.zeros(3)),))
    with pytest.raises(ValueError):
        ReluStack(((np.ones((2, 2)), np.zeros(2)), (np.ones((1, 3)), np.zeros(1))))


def test_registry_write_once_and_lookup():
    assert is_registered('identity') and 'round-to-int' in registered_ids()
    with pytest.raises(ValueError):
        register_exact_map('identity', lambda token, index: token)
    with pytest.raises(KeyError):
        get_exact_map('no-such-map')
    with pytest.raises(KeyError):
        ExactMap.create('no-such-map', 1)
    assert exact_map_apply('round-to-int', np.array([0.4, 1.6]), 0).tolist() == [0.0, 2.0]


def test_exact_map_output_dim_is_checked():
    stage = ExactMap.create('identity', 5)
    with pytest.raises(ValueError, match="declared"):
        mlp_forward(stage, np.ones((2, 3)))


def test_spec_json_round_trip_preserves_forward():
    spec = _toy_spec()
    X = np.array([[0.2, 1.0], [0.9, 0.0], [0.1, 0.3]])
    back = spec_from_json(spec.to_json())
    assert back.to_dict() == spec.to_dict()
    assert np.array_equal(transformer_forward(back, X), transformer_forward(spec, X))


def test_trace_and_layer_dims():
    spec = _toy_spec()
    trace = []
    out = transformer_forward(spec, np.eye(3), trace=trace)
    assert len(trace) == 2
    assert len(trace[0]['weights']) == 1 and trace[1]['weights'] == []
    assert np.array_equal(trace[-1]['output'], out)
    assert spec.layer_dims() == [(3, 3), (3, 1)]
    assert spec.embedding_width() == 3
    with pytest.raises(ValueError):
        transformer_forward(spec, np.eye(2))


def test_non_finite_tokens_rejected():
    with pytest.raises(ValueError):
        transformer_forward(_toy_spec(), np.array([[np.nan], [0.0], [0.0]]))


def test_identity_net():
    z = np.array([[-2.5, 0.0, 3.0], [1.0, -1.0, 7.5]])
    assert np.allclose(mlp_forward(build_identity_net(2), z), z)


def test_indicator_net_on_integers():
    values = np.arange(-3, 10)
    out = evaluate_scalar(build_indicator_net(2, 5), values)
    assert np.allclose(out, ((values >= 2) & (values <= 5)).astype(float))
    with pytest.raises(ValueError):
        build_indicator_net(4, 3)


def test_bump_memorizer_hits_every_anchor():
    pairs = [(0.0, 3.0), (1.0, -2.0), (2.5, 7.0), (4.0, 0.5)]
    net = build_bump_memorizer(pairs)
    assert np.allclose(evaluate_scalar(net, [a for a, _ in pairs]), [b for _, b in pairs])
    assert net.hidden_widths == [16]
    assert bump_delta([0.0, 1.0, 2.5, 4.0]) == 0.5
    with pytest.raises(ValueError):
        build_bump_memorizer([(1.0, 2.0), (1.0, 3.0)])


def test_reflected_bump_form_cannot_be_summed():
    a, delta = 0.0, 0.5

    def reflected(x):
        return (relu(x - a + 2 * delta) - relu(x - a + delta)
                + relu(a - x + 2 * delta) - relu(a - x + delta)) / delta

    assert reflected(a) == pytest.approx(2.0)
    assert reflected(100.0) == pytest.approx(1.0)
    single = build_bump_memorizer([(a, 1.0)])
    assert evaluate_scalar(single, [a, 100.0]).tolist() == pytest.approx([1.0, 0.0])


def test_indicator_net_random_intervals():
    rng = np.random.default_rng(7)
    for _ in range(100):
        r = int(rng.integers(-50, 50))
        s = r + int(rng.integers(0, 20))
        values = np.arange(r - 3, s + 4)
        out = evaluate_scalar(build_indicator_net(r, s), values)
        assert np.array_equal(out, ((values >= r) & (values <= s)).astype(float))


def test_bump_memorizer_random_tables():
    rng = np.random.default_rng(11)
    for _ in range(100):
        size = int(rng.integers(1, 65))
        anchors = rng.choice(200, size=size, replace=False).astype(float)
        targets = rng.uniform(-10, 10, size=size)
        net = build_bump_memorizer(list(zip(anchors, targets)))
        assert np.max(np.abs(evaluate_scalar(net, anchors) - targets)) <= 1e-12


def test_zero_scores_with_scaled_identity_value_give_column_sums():
    X = np.array([[1.0, 2.0, 3.0], [0.5, -1.0, 4.0]])
    n = X.shape[1]
    head = AttentionHead(K=np.zeros((1, 2)), Q=np.zeros((1, 2)), V=n * np.eye(2))
    Z = attention_forward([head], X, residual=False)
    assert np.allclose(Z, np.repeat(X.sum(axis=1, keepdims=True), n, axis=1), atol=1e-12)


def test_shifting_one_query_logits_leaves_output_unchanged():
    rng = np.random.default_rng(4)
    base = rng.normal(size=(3, 5))
    target, shift = 2, 3.7
    # extra rows: a constant 1 for every token, and the shift on the target token only
    X = np.vstack([base, np.ones(5), np.where(np.arange(5) == target, shift, 0.0)])
    K0 = rng.normal(size=(2, 3))
    Q0 = rng.normal(size=(2, 3))
    V = np.hstack([np.eye(3), np.zeros((3, 2))])
    plain = AttentionHead(K=np.hstack([K0, np.zeros((2, 2))]), Q=np.hstack([Q0, np.zeros((2, 2))]), V=V)
    shifted = AttentionHead(
        K=np.vstack([np.hstack([K0, np.zeros((2, 2))]), [0, 0, 0, 1, 0]]),
        Q=np.vstack([np.hstack([Q0, np.zeros((2, 2))]), [0, 0, 0, 0, 1]]),
        V=V)

    logits_gap = np.log(attention_weights(shifted, X)) - np.log(attention_weights(plain, X))
    assert np.allclose(logits_gap, 0.0, atol=1e-12)
    assert np.max(np.abs(attention_forward([shifted], X, False) - attention_forward([plain], X, False))) <= 1e-12
