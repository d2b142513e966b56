"""Run constructed transformers on graphs and compare their readouts with the oracles."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from constructions.one_vs_two import build_one_vs_two
from constructions.power import build_power_transformer, power_tokens, workspace_errors
from constructions.sparse_two_cycle import (build_sparse_two_cycle, check_degree_bound,
                                            select_embedding_seed, sparse_tokens)
from constructions.subgraph_counter import build_subgraph_counter, subgraph_tokens
from graphs.generators import named_pattern
from graphs.graph_core import Graph
from graphs.oracles import (oracle_connected, oracle_matrix_power, oracle_subgraph_count,
                            oracle_two_cycle_indicator)
from network.transformer import TransformerSpec, transformer_forward
from tokenization.tokenizers import tokenize_adjacency

logger = logging.getLogger(__name__)

CONSTRUCTION_ALIASES = {
    'one_vs_two': 'one_vs_two', 'one-vs-two': 'one_vs_two',
    'power': 'power',
    'sparse_two_cycle': 'sparse_two_cycle', 'sparse2cycle': 'sparse_two_cycle',
    'subgraph': 'subgraph',
}


@dataclass
class ConstructionReport:
    """
    Outcome of one forward pass checked against its oracle.

    Attributes:
        construction: Canonical construction id
        graph_id: Graph identifier
        n: Node count
        params: Builder parameters actually used
        passed: Exactness criterion met
        max_abs_error: Largest deviation of the pre-rounding values from the exact ones
        oracle_value: Oracle summary (verdict, count or total)
        transformer_value: Same summary read from the transformer output
        temperature: Largest attention temperature in the spec
        millis: Wall time of build plus forward pass
        error: Message of the precondition failure, if any
    """
    construction: str
    graph_id: str
    n: int
    params: Dict[str, Any] = field(default_factory=dict)
    passed: bool = False
    max_abs_error: Optional[float] = None
    oracle_value: Any = None
    transformer_value: Any = None
    temperature: Optional[float] = None
    millis: float = 0.0
    error: Optional[str] = None

    def to_dict(self, include_timing: bool = False) -> Dict:
        row = asdict(self)
        if not include_timing:
            row.pop('millis')
        return row


def canonical_construction(builder_id: str) -> str:
    if builder_id not in CONSTRUCTION_ALIASES:
        raise ValueError(f"Unknown construction '{builder_id}'. Choose from {sorted(CONSTRUCTION_ALIASES)}")
    return CONSTRUCTION_ALIASES[builder_id]


def _freeze_params(params: Dict) -> Tuple:
    return tuple(sorted(params.items()))


def spec_temperature(spec: TransformerSpec) -> Optional[float]:
    temperatures = [head.temperature for layer in spec.layers for head in layer.heads]
    return max(temperatures) if temperatures else None


@lru_cache(maxsize=128)
def _cached_spec(construction: str, n: int, frozen: Tuple) -> TransformerSpec:
    params = dict(frozen)
    if construction == 'one_vs_two':
        return build_one_vs_two(n, mode=params.get('mode', 'exact_map'))
    if construction == 'power':
        return build_power_transformer(n, int(params['L']), eps=params.get('eps'),
                                       mode=params.get('mode', 'exact_map'),
                                       temperature=params.get('temperature'))
    if construction == 'sparse_two_cycle':
        return build_sparse_two_cycle(n, int(params['d']), alpha=params.get('alpha'),
                                      c=params.get('c'), seed=int(params.get('seed', 0)))
    pattern = params['pattern']
    return build_subgraph_counter(n, pattern.n, pattern, set_count=params.get('set_count'),
                                  temperature=params.get('temperature'))


def _check_one_vs_two(g: Graph, params: Dict):
    spec = _cached_spec('one_vs_two', g.n, _freeze_params(params))
    out = transformer_forward(spec, tokenize_adjacency(g, g.n, with_index=True).tokens)
    oracle = int(oracle_connected(g))
    verdicts = np.rint(out[0]).astype(np.int64)
    if np.unique(verdicts).size != 1:
        raise ValueError(f"Output tokens disagree on the verdict: {sorted(set(verdicts.tolist()))}")
    value = int(verdicts[0])
    error = float(np.max(np.abs(out[0] - oracle)))
    return spec, value == oracle, error, oracle, value, params


def _check_power(g: Graph, params: Dict):
    if 'L' not in params:
        raise ValueError("power verification needs the walk length L")
    L = int(params['L'])
    spec = _cached_spec('power', g.n, _freeze_params(params))
    trace: List[dict] = []
    out = transformer_forward(spec, power_tokens(g), trace=trace)
    rows = out[2 * g.n:3 * g.n, :].T
    oracle = oracle_matrix_power(g, L)
    error = max(workspace_errors(g, trace, L))
    passed = bool(np.array_equal(np.rint(rows).astype(np.int64), oracle))
    # totals summarise the n x n walk counts
    return spec, passed, error, int(oracle.sum()), int(np.rint(rows).sum()), params


def _check_sparse_two_cycle(g: Graph, params: Dict):
    if 'd' not in params:
        raise ValueError("sparse_two_cycle verification needs the degree bound d")
    d = int(params['d'])
    check_degree_bound(g, d)
    chosen = dict(params)
    chosen['seed'] = select_embedding_seed(g, d, params.get('alpha'), int(params.get('seed', 0)))
    spec = _cached_spec('sparse_two_cycle', g.n, _freeze_params(chosen))
    trace: List[dict] = []
    out = transformer_forward(spec, sparse_tokens(g), trace=trace)
    indicator = np.rint(out[0, :g.n]).astype(np.int64)
    oracle = oracle_two_cycle_indicator(g).astype(np.int64)
    dummy_mass = trace[0]['attention'][-1, :g.n]
    error = float(np.max(np.abs(dummy_mass - (1 - oracle)))) if g.n else 0.0
    return spec, bool(np.array_equal(indicator, oracle)), error, int(oracle.sum()), int(indicator.sum()), chosen


def _check_subgraph(g: Graph, params: Dict):
    if g.directed:
        raise ValueError("Subgraph counting needs an undirected host graph")
    pattern = params.get('pattern', 'triangle')
    if isinstance(pattern, str):
        pattern = named_pattern(pattern)
    chosen = dict(params)
    chosen['pattern'] = pattern
    spec = _cached_spec('subgraph', g.n, _freeze_params(chosen))
    out = transformer_forward(spec, subgraph_tokens(g))
    total = float(out.sum())
    oracle = oracle_subgraph_count(g, pattern)
    chosen['pattern'] = pattern.graph_id or pattern.to_dict()
    return spec, int(round(total)) == oracle, abs(total - oracle), oracle, int(round(total)), chosen


CHECKS = {
    'one_vs_two': _check_one_vs_two,
    'power': _check_power,
    'sparse_two_cycle': _check_sparse_two_cycle,
    'subgraph': _check_subgraph,
}


def _verify_one(construction: str, g: Graph, params: Dict, position: int) -> ConstructionReport:
    graph_id = g.graph_id or f"graph-{position}"
    report = ConstructionReport(construction=construction, graph_id=graph_id, n=g.n, params=dict(params))
    start = time.perf_counter()
    try:
        spec, passed, error, oracle, value, used = CHECKS[construction](g, dict(params))
        report.passed = bool(passed)
        report.max_abs_error = float(error)
        report.oracle_value = oracle
        report.transformer_value = value
        report.temperature = spec_temperature(spec)
        report.params = {k: v for k, v in used.items() if not isinstance(v, Graph)}
    except (ValueError, ArithmeticError) as e:
        logger.warning("%s on %s rejected: %s", construction, graph_id, e)
        report.error = str(e)
    report.millis = (time.perf_counter() - start) * 1000.0
    if report.error is None and not report.passed:
        logger.warning("%s on %s disagrees with the oracle (%s vs %s)",
                       construction, graph_id, report.transformer_value, report.oracle_value)
    return report


def verify_construction(
    builder_id: str,
    graphs: Union[Graph, Sequence[Graph]],
    params: Optional[Dict] = None,
    workers: Optional[int] = None
) -> Union[ConstructionReport, List[ConstructionReport]]:
    """
    Build the construction for each graph, run it and check the readout against the oracle.

    Exactness: one_vs_two and subgraph compare integers, power compares A^L entrywise after
    rounding, sparse_two_cycle compares the thresholded indicator per node. Precondition
    failures are recorded in the report instead of aborting the corpus.

    Args:
        builder_id: one_vs_two, power, sparse_two_cycle or subgraph (aliases one-vs-two, sparse2cycle)
        graphs: A single Graph or a corpus
        params: Builder parameters (L, eps, mode, d, alpha, seed, pattern, set_count, temperature)
        workers: Thread count for corpus runs (config.WORKERS by default)

    Returns:
        One report for a single graph, otherwise reports in input order
    """
    construction = canonical_construction(builder_id)
    params = dict(params or {})
    single = isinstance(graphs, Graph)
    corpus = [graphs] if single else list(graphs)
    workers = config.WORKERS if workers is None else int(workers)
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")

    jobs = range(len(corpus))
    if workers == 1 or len(corpus) < 2:
        reports = [_verify_one(construction, corpus[i], params, i) for i in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda i: _verify_one(construction, corpus[i], params, i), jobs))

    failed = sum(not r.passed for r in reports)
    logger.info("%s: %d/%d instances passed", construction, len(reports) - failed, len(reports))
    return reports[0] if single else reports


def summarize_reports(reports: Sequence[ConstructionReport]) -> Dict:
    """Pass count, failure count and worst error over a batch of reports."""
    errors = [r.max_abs_error for r in reports if r.max_abs_error is not None]
    return {
        'instances': len(reports),
        'passed': sum(r.passed for r in reports),
        'failed': sum(not r.passed for r in reports),
        'rejected': sum(r.error is not None for r in reports),
        'worst_error': max(errors) if errors else None,
    }


if __name__ == "__main__":
    from graphs.generators import gen_cycles

    logging.basicConfig(level=logging.INFO)
    for parts in (1, 2):
        result = verify_construction('one_vs_two', gen_cycles(10, parts, seed=parts))
        print(f"10 nodes, {parts} cycle(s): transformer={result.transformer_value} "
              f"oracle={result.oracle_value} passed={result.passed}")
