"""Tests for the constructed transformers, the verifier harness and the sweeps."""
import math

import numpy as np
import pytest

from constructions.one_vs_two import build_one_vs_two, pair_key
from constructions.power import (build_power_transformer, degree_memorizer, power_temperature, power_tokens,
                                 workspace_errors)
from constructions.sparse_two_cycle import (build_sparse_two_cycle, check_degree_bound, embedding_certificate,
                                            select_embedding_seed, sparse_tokens)
from constructions.subgraph_counter import (build_subgraph_counter, emitted_width, integer_root_ceil,
                                            plan_partition, subgraph_tokens, width_bound)
from constructions.sweeps import (construction_width, sweep_rip_alpha, sweep_temperature,
                                  sweep_width_accounting)
from constructions.verifier import canonical_construction, summarize_reports, verify_construction
from graphs.generators import (gen_bounded_degree_digraph, gen_cycles, gen_disjointness_gadget, gen_erdos_renyi,
                               gen_min_out_degree_digraph, named_pattern)
from graphs.graph_core import graph_from_edges
from graphs.oracles import oracle_matrix_power, oracle_subgraph_count, oracle_two_cycle_indicator
from network.gadgets import evaluate_scalar
from network.rip_embedding import cached_rip_system
from network.transformer import transformer_forward
from tokenization.tokenizers import tokenize_adjacency


def _one_vs_two_verdict(g, mode='exact_map'):
    spec = build_one_vs_two(g.n, mode=mode)
    out = transformer_forward(spec, tokenize_adjacency(g, with_index=True).tokens)
    return np.rint(out[0]).astype(int)


def _power_rows(g, L, **kwargs):
    spec = build_power_transformer(g.n, L, **kwargs)
    trace = []
    out = transformer_forward(spec, power_tokens(g), trace=trace)
    return np.rint(out[2 * g.n:, :].T).astype(np.int64), trace


# one_vs_two

def test_one_vs_two_small_examples():
    assert set(_one_vs_two_verdict(gen_cycles(6, 1, seed=0))) == {1}
    assert set(_one_vs_two_verdict(gen_cycles(6, 2, seed=0))) == {0}


@pytest.mark.parametrize("n", range(6, 66, 2))
def test_one_vs_two_agrees_with_oracle(n):
    rng = np.random.default_rng(n)
    for parts in (1, 2):
        for _ in range(10):
            verdict = _one_vs_two_verdict(gen_cycles(n, parts, seed=rng))
            assert set(verdict) == {1 if parts == 1 else 0}


@pytest.mark.parametrize("n", [6, 8, 12])
def test_one_vs_two_explicit_net_matches(n):
    for parts in (1, 2):
        g = gen_cycles(n, parts, seed=n + parts)
        assert np.array_equal(_one_vs_two_verdict(g, 'explicit_net'), _one_vs_two_verdict(g))


def test_one_vs_two_verdict_survives_relabeling():
    rng = np.random.default_rng(4)
    for parts in (1, 2):
        g = gen_cycles(14, parts, seed=0)
        expected = _one_vs_two_verdict(g)
        for _ in range(10):
            assert np.array_equal(_one_vs_two_verdict(g.relabel(rng.permutation(14))), expected)


def test_one_vs_two_preconditions():
    with pytest.raises(ValueError):
        build_one_vs_two(7)
    with pytest.raises(ValueError):
        build_one_vs_two(4)
    with pytest.raises(ValueError):
        build_one_vs_two(34, mode='explicit_net')
    with pytest.raises(ValueError):
        build_one_vs_two(8, mode='lookup')


def test_pair_key_separates_pairs():
    n = 12
    keys = {pair_key(a, b, n) for a in range(n) for b in range(a + 1, n)}
    assert len(keys) == math.comb(n, 2)


# power

def test_power_directed_two_cycle_squares_to_identity():
    g = graph_from_edges(2, [(0, 1), (1, 0)], directed=True)
    rows, _ = _power_rows(g, 2)
    assert np.array_equal(rows, np.eye(2, dtype=np.int64))


def test_power_path_with_return_edge():
    g = graph_from_edges(3, [(0, 1), (1, 2), (2, 0)], directed=True)
    rows, _ = _power_rows(g, 2)
    assert np.array_equal(rows, oracle_matrix_power(g, 2))


def test_power_token_i_is_row_i():
    g = graph_from_edges(3, [(0, 1), (1, 2), (2, 0), (0, 2)], directed=True)
    rows, _ = _power_rows(g, 1)
    assert rows.tolist() == [[0, 1, 1], [0, 0, 1], [1, 0, 0]]


def test_power_workspace_stays_within_eps():
    for seed in range(5):
        g = gen_min_out_degree_digraph(8, 0.3, seed=seed)
        rows, trace = _power_rows(g, 3, eps=1e-6)
        assert np.array_equal(rows, oracle_matrix_power(g, 3))
        assert max(workspace_errors(g, trace, 3)) < 1e-6


def test_power_explicit_net_mode():
    g = gen_min_out_degree_digraph(8, 0.25, seed=11)
    rows, _ = _power_rows(g, 3, mode='explicit_net')
    assert np.array_equal(rows, oracle_matrix_power(g, 3))


@pytest.mark.slow
@pytest.mark.parametrize("L", [2, 3, 4])
def test_power_random_digraphs_n64(L):
    rng = np.random.default_rng(100 + L)
    spec = build_power_transformer(64, L)
    for _ in range(50):
        g = gen_min_out_degree_digraph(64, 0.05, rng)
        trace = []
        out = transformer_forward(spec, power_tokens(g), trace=trace)
        assert np.array_equal(np.rint(out[128:, :].T).astype(np.int64), oracle_matrix_power(g, L))
        assert max(workspace_errors(g, trace, L)) < 1e-6


def test_degree_memorizer_inverts_reciprocals():
    values = evaluate_scalar(degree_memorizer(10), [1.0 / k for k in range(1, 11)])
    assert np.allclose(values, np.arange(1, 11))


def test_power_preconditions():
    with pytest.raises(ValueError):
        build_power_transformer(4, 0)
    with pytest.raises(OverflowError):
        build_power_transformer(64, 9)
    with pytest.raises(ValueError, match="overflow cap"):
        build_power_transformer(4, 2, temperature=800.0)
    assert power_temperature(4, 2, 1e-9) == pytest.approx(math.log(2 * 4 * 16 / 1e-9))


def test_power_tokens_reject_zero_degree_node():
    g = graph_from_edges(3, [(0, 1), (1, 0), (0, 2)], directed=True)
    with pytest.raises(ValueError, match="zero-degree node 2"):
        power_tokens(g)
    with pytest.raises(ValueError, match="zero-degree"):
        _power_rows(g, 1)


# sparse two-cycle

def test_sparse_two_cycle_small_example():
    g = graph_from_edges(3, [(0, 1), (1, 0)], directed=True)
    seed = select_embedding_seed(g, 1)
    out = transformer_forward(build_sparse_two_cycle(3, 1, seed=seed), sparse_tokens(g))
    assert np.rint(out[0, :3]).astype(int).tolist() == [1, 1, 0]


def test_sparse_two_cycle_acyclic_gadget():
    g = gen_disjointness_gadget([1] * 16, [0] * 16, 8, 2)
    report = verify_construction('sparse2cycle', g, {'d': 2})
    assert report.passed
    assert report.transformer_value == 0


def test_sparse_dummy_mass_separates_nodes():
    for seed in range(5):
        g = gen_bounded_degree_digraph(64, 4, seed=seed)
        chosen = select_embedding_seed(g, 4, seed=seed)
        trace = []
        out = transformer_forward(build_sparse_two_cycle(64, 4, seed=chosen), sparse_tokens(g), trace=trace)
        oracle = oracle_two_cycle_indicator(g)
        mass = trace[0]['attention'][-1, :64]
        assert np.all(mass[oracle == 0] >= 1 - 1e-4)
        assert np.all(mass[oracle == 1] <= 1e-4)
        assert np.array_equal(np.rint(out[0, :64]).astype(int), oracle)


def test_sparse_certificate_accepts_selected_seed():
    g = gen_bounded_degree_digraph(64, 4, seed=3)
    chosen = select_embedding_seed(g, 4)
    passed, worst = embedding_certificate(g, cached_rip_system(64, 4, 4.0, chosen))
    assert passed and worst <= 1.6


def test_sparse_preconditions():
    with pytest.raises(ValueError):
        build_sparse_two_cycle(1, 1)
    with pytest.raises(ValueError):
        build_sparse_two_cycle(8, 9)
    with pytest.raises(ValueError, match="directed"):
        check_degree_bound(gen_cycles(6, 1, seed=0), 2)
    star = graph_from_edges(4, [(0, 1), (0, 2), (0, 3)], directed=True)
    with pytest.raises(ValueError, match="violated"):
        check_degree_bound(star, 2)


def test_sparse_width_matches_embedding_dimension():
    spec = build_sparse_two_cycle(64, 4, alpha=4.0)
    p = math.ceil(4.0 * 4 * math.log(64))
    assert spec.embedding_width() == 2 * p + 2


@pytest.mark.slow
def test_sparse_two_cycle_large_random_digraphs():
    rng = np.random.default_rng(2024)
    graphs = [gen_bounded_degree_digraph(256, 8, rng).with_id(f"sparse-{i}") for i in range(100)]
    reports = verify_construction('sparse_two_cycle', graphs, {'d': 8}, workers=4)
    assert sum(r.passed for r in reports) >= 99


# subgraph counting

def test_partition_plan_sizes():
    plan = plan_partition(64, 3)
    assert (plan.set_count, plan.set_size, plan.combination_count) == (4, 16, 4)
    assert emitted_width(64, 4) == 1033 <= width_bound(64, 3) == 1036
    assert sum(plan.sizes) == 64
    assert sorted(plan.node_set) == list(plan.node_set)
    masks = plan.comb_masks()
    assert np.all(masks.sum(axis=1) == 3)


def test_partition_plan_overrides_and_errors():
    plan = plan_partition(16, 3, set_count=5)
    assert plan.sizes == (4, 3, 3, 3, 3)
    assert plan.canonical_combination({4}) == (0, 1, 4)
    assert plan.canonical_combination({1, 3}) == (0, 1, 3)
    assert list(plan.members(1)) == [4, 5, 6]
    with pytest.raises(ValueError):
        plan.canonical_combination({0, 1, 2, 3})
    with pytest.raises(ValueError):
        plan_partition(16, 6)
    with pytest.raises(ValueError):
        plan_partition(2, 3)
    with pytest.raises(ValueError):
        plan_partition(16, 3, set_count=2)
    with pytest.raises(ValueError):
        plan_partition(8, 3, set_count=5)


def test_integer_root_ceil():
    assert integer_root_ceil(64, 3) == 4
    assert integer_root_ceil(65, 3) == 5
    assert integer_root_ceil(2 ** 30, 3) == 1024
    assert integer_root_ceil(1, 4) == 1


def _count(g, pattern, **kwargs):
    spec = build_subgraph_counter(g.n, pattern.n, pattern, **kwargs)
    return float(transformer_forward(spec, subgraph_tokens(g)).sum())


def test_subgraph_counter_k4_triangles():
    k4 = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    g = graph_from_edges(16, k4, directed=False)
    assert round(_count(g, named_pattern('triangle'))) == 4


def test_subgraph_counter_empty_graph():
    g = graph_from_edges(20, [], directed=False)
    for name in ('triangle', '4-cycle', '3-star'):
        assert _count(g, named_pattern(name)) == pytest.approx(0.0)


def test_subgraph_counter_matches_oracle_on_er_corpus():
    rng = np.random.default_rng(5)
    for idx in range(30):
        n = int(rng.integers(30, 61))
        g = gen_erdos_renyi(n, 0.1, rng)
        for name in ('triangle', '4-cycle'):
            pattern = named_pattern(name)
            assert round(_count(g, pattern)) == oracle_subgraph_count(g, pattern)


def test_subgraph_canonical_assignment_never_double_counts():
    graphs = [gen_erdos_renyi(16, 0.3, seed=s).with_id(f"er-{s}") for s in range(50)]
    reports = verify_construction('subgraph', graphs, {'pattern': 'triangle', 'set_count': 5})
    assert all(r.passed for r in reports)
    assert all(r.max_abs_error < 1e-3 for r in reports)


def test_subgraph_counter_path_pattern_with_many_sets():
    g = gen_erdos_renyi(20, 0.25, seed=7)
    pattern = named_pattern('3-path')
    assert round(_count(g, pattern, set_count=6)) == oracle_subgraph_count(g, pattern)


def test_subgraph_counter_preconditions():
    with pytest.raises(ValueError):
        build_subgraph_counter(16, 4, named_pattern('triangle'))
    with pytest.raises(ValueError):
        build_subgraph_counter(16, 2, graph_from_edges(2, [(0, 1)], directed=True))
    with pytest.raises(ValueError, match="overflow cap"):
        build_subgraph_counter(16, 3, named_pattern('triangle'), temperature=900.0)


# verifier

def test_verify_power_on_six_cycle():
    report = verify_construction('power', gen_cycles(6, 1, seed=0), {'L': 3})
    assert report.passed
    assert report.max_abs_error < 1e-6
    assert report.oracle_value == report.transformer_value == 6 * 8


def test_verify_one_vs_two_two_cycles():
    report = verify_construction('one_vs_two', gen_cycles(10, 2, seed=0))
    assert report.passed
    assert report.transformer_value == 0
    assert 'millis' not in report.to_dict()
    assert 'millis' in report.to_dict(include_timing=True)


def test_verify_unknown_construction():
    with pytest.raises(ValueError):
        verify_construction('sketch', gen_cycles(6, 1, seed=0))
    assert canonical_construction('one-vs-two') == 'one_vs_two'


def test_verify_records_precondition_failures():
    sink = graph_from_edges(3, [(0, 1), (1, 2)], directed=True)
    report = verify_construction('power', sink, {'L': 2})
    assert not report.passed
    assert 'zero-degree' in report.error
    missing = verify_construction('power', gen_cycles(6, 1, seed=0))
    assert 'walk length' in missing.error


def test_verify_corpus_order_is_worker_independent():
    graphs = [gen_cycles(8, 1 + i % 2, seed=i).with_id(f"c-{i}") for i in range(8)]
    serial = verify_construction('one_vs_two', graphs, workers=1)
    threaded = verify_construction('one_vs_two', graphs, workers=4)
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in threaded]
    summary = summarize_reports(serial)
    assert summary == {'instances': 8, 'passed': 8, 'failed': 0, 'rejected': 0, 'worst_error': 0.0}


# sweeps

def test_width_accounting_within_bounds():
    assert construction_width('one_vs_two', 10, {})['embedding_width'] == 30
    assert construction_width('power', 10, {'L': 2})['within_bound']
    assert construction_width('sparse2cycle', 64, {'d': 4})['within_bound']
    frame = sweep_width_accounting('subgraph', [16, 30, 64], {'pattern': 'triangle'})
    assert frame['within_bound'].all()
    assert frame.loc[frame['n'] == 64, 'set_count'].item() == 4


def test_temperature_sweep_shows_threshold():
    frame = sweep_temperature([1.0, 40.0], construction='power', n=8, trials=3, seed=1, L=2, p=0.3)
    assert list(frame.columns) == ['construction', 'n', 'temperature', 'trials', 'passed', 'pass_rate',
                                   'max_abs_error']
    assert frame.loc[frame['temperature'] == 40.0, 'pass_rate'].item() == 1.0
    assert frame.loc[frame['temperature'] == 1.0, 'pass_rate'].item() < 1.0


def test_rip_alpha_sweep_columns():
    frame = sweep_rip_alpha([2.0, 12.0], n=64, d=4, trials=50, seed=0)
    assert frame['rip_dim'].tolist() == [math.ceil(2.0 * 4 * math.log(64)), math.ceil(12.0 * 4 * math.log(64))]
    assert (frame['width'] == 2 * frame['rip_dim'] + 2).all()
    assert frame['success_rate'].iloc[1] >= frame['success_rate'].iloc[0]
