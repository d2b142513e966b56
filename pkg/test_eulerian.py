"""Tests for Eulerian cycle verification and the cycle-graph reduction."""
import numpy as np
import pytest

from eulerian.eulerian import (EulerianInstance, eulerian_node_count, fragment_cycle_census, instance_from_json,
                               reduce_cycles_to_eulerian, verify_eulerian)
from graphs.generators import gen_cycles
from graphs.graph_core import graph_from_edges
from graphs.oracles import oracle_connected


def _two_disjoint_two_cycles() -> EulerianInstance:
    return EulerianInstance(n=4,
                            edges=[(0, 1, 1), (1, 0, 2), (2, 3, 3), (3, 2, 4)],
                            fragments=[(1, 2), (2, 1), (3, 4), (4, 3)])


def test_single_self_loop_verifies():
    inst = EulerianInstance(n=1, edges=[(0, 0, 7)], fragments=[(7, 7)])
    assert verify_eulerian(inst)
    assert fragment_cycle_census(inst) == [1]


def test_condition_one_alone_is_not_enough():
    inst = _two_disjoint_two_cycles()
    assert not verify_eulerian(inst)
    assert fragment_cycle_census(inst) == [2, 2]


def test_edge_multiplicity_failure():
    inst = EulerianInstance(n=2, edges=[(0, 1, 1), (1, 0, 2)], fragments=[(1, 2)])
    assert not verify_eulerian(inst)
    with pytest.raises(ValueError):
        fragment_cycle_census(inst)


def test_reduction_single_cycle_small():
    inst = reduce_cycles_to_eulerian(gen_cycles(8, 1, seed=0))
    assert inst.n == 4
    assert len(inst.edges) == 16 and len(inst.fragments) == 16
    assert verify_eulerian(inst)
    assert fragment_cycle_census(inst) == [16]


def test_reduction_two_cycles_gives_three_fragment_cycles():
    inst = reduce_cycles_to_eulerian(gen_cycles(8, 2, seed=0))
    assert not verify_eulerian(inst)
    assert fragment_cycle_census(inst) == [8, 4, 4]


def test_reduction_eighteen_nodes():
    assert verify_eulerian(reduce_cycles_to_eulerian(gen_cycles(18, 1, seed=3)))


def test_every_turnaround_on_a_single_cycle_verifies():
    g = gen_cycles(8, 1, seed=5)
    for idx in range(g.edge_count):
        assert verify_eulerian(reduce_cycles_to_eulerian(g, turnaround=idx))


def test_turnaround_loops_sit_at_arc_heads():
    g = gen_cycles(8, 1, seed=1)
    inst = reduce_cycles_to_eulerian(g, turnaround=0)
    u, v = g.edges[0]
    loops = {label: (a, b) for a, b, label in inst.edges if label in (1, -1)}
    assert loops[1] == (v % 2, v % 2)
    assert loops[-1] == (u % 2, u % 2)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_reduction_equivalence(n):
    N = n * n // 2
    rng = np.random.default_rng(n)
    for parts in (1, 2):
        for trial in range(20):
            g = gen_cycles(N, parts, seed=rng)
            inst = reduce_cycles_to_eulerian(g, turnaround='auto' if trial % 2 else 0)
            assert verify_eulerian(inst) == oracle_connected(g)
            census = fragment_cycle_census(inst)
            assert sum(census) == 2 * N
            assert len(census) == (1 if parts == 1 else 3)


def test_verdict_ignores_labels_and_fragment_order():
    rng = np.random.default_rng(0)
    for parts in (1, 2):
        inst = reduce_cycles_to_eulerian(gen_cycles(18, parts, seed=parts))
        labels = [label for _, _, label in inst.edges]
        renamed = dict(zip(labels, (rng.permutation(len(labels)) + 100).tolist()))
        order = rng.permutation(len(inst.fragments))
        shuffled = EulerianInstance(
            n=inst.n,
            edges=[(u, v, renamed[label]) for u, v, label in inst.edges],
            fragments=[(renamed[inst.fragments[i][0]], renamed[inst.fragments[i][1]]) for i in order])
        assert verify_eulerian(shuffled) == verify_eulerian(inst) == (parts == 1)


def test_json_round_trip():
    inst = reduce_cycles_to_eulerian(gen_cycles(8, 2, seed=4))
    back = instance_from_json(inst.to_json())
    assert back.to_dict() == inst.to_dict()
    assert verify_eulerian(back) == verify_eulerian(inst)


def test_malformed_instances():
    with pytest.raises(ValueError, match="Duplicate"):
        EulerianInstance(n=2, edges=[(0, 1, 1), (1, 0, 1)], fragments=[]).validate()
    with pytest.raises(ValueError, match="unknown edge"):
        EulerianInstance(n=2, edges=[(0, 1, 1)], fragments=[(1, 5)]).validate()
    with pytest.raises(ValueError, match="not successive"):
        EulerianInstance(n=3, edges=[(0, 1, 1), (2, 0, 2)], fragments=[(1, 2)]).validate()
    with pytest.raises(ValueError, match="outside"):
        EulerianInstance(n=2, edges=[(0, 2, 1)], fragments=[]).validate()


def test_edge_heading_two_fragments_is_rejected():
    inst = EulerianInstance(n=1, edges=[(0, 0, 1), (0, 0, 2)], fragments=[(1, 2), (1, 2)])
    with pytest.raises(ValueError, match="heads two fragments"):
        verify_eulerian(inst)


def test_reduction_preconditions():
    with pytest.raises(ValueError):
        eulerian_node_count(10)
    with pytest.raises(ValueError):
        eulerian_node_count(2)
    assert eulerian_node_count(50) == 10
    path = graph_from_edges(8, [(i, i + 1) for i in range(7)], directed=False)
    with pytest.raises(ValueError, match="degree"):
        reduce_cycles_to_eulerian(path)
    with pytest.raises(ValueError):
        reduce_cycles_to_eulerian(gen_cycles(8, 1, seed=0), turnaround=8)
    with pytest.raises(ValueError):
        reduce_cycles_to_eulerian(gen_cycles(10, 1, seed=0))
