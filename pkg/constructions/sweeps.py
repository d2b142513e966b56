"""
Parameter sweeps: exactness against temperature, margin success against RIP oversampling,
and emitted embedding widths against their asymptotic bounds.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

import config
from constructions.one_vs_two import build_one_vs_two
from constructions.power import build_power_transformer
from constructions.sparse_two_cycle import build_sparse_two_cycle
from constructions.subgraph_counter import build_subgraph_counter, integer_root_ceil, plan_partition, width_bound
from constructions.verifier import canonical_construction, summarize_reports, verify_construction
from graphs.generators import gen_bounded_degree_digraph, gen_min_out_degree_digraph, named_pattern
from network.rip_embedding import margin_success_rate, rip_dimension

logger = logging.getLogger(__name__)

SWEEP_KINDS = ('temperature', 'rip-alpha', 'width-accounting')


def sweep_temperature(
    temperatures: Sequence[float],
    construction: str = 'power',
    n: int = 16,
    trials: int = 10,
    seed: int = 0,
    L: int = 2,
    d: int = 3,
    p: float = 0.2,
    workers: Optional[int] = None
) -> pd.DataFrame:
    """
    Pass rate and worst pre-rounding error of a construction as its temperature varies.

    The same seeded corpus is reused for every temperature.

    Args:
        temperatures: Temperatures to try
        construction: power or sparse_two_cycle
        n: Node count
        trials: Graphs per temperature
        seed: Corpus seed
        L: Walk length for power
        d: Degree bound for sparse_two_cycle
        p: Edge probability of the power corpus
        workers: Threads for each verification batch

    Returns:
        DataFrame with one row per temperature
    """
    construction = canonical_construction(construction)
    if construction not in ('power', 'sparse_two_cycle'):
        raise ValueError(f"Temperature sweeps support power and sparse_two_cycle, got {construction}")
    rng = np.random.default_rng(seed)
    if construction == 'power':
        graphs = [gen_min_out_degree_digraph(n, p, rng).with_id(f"power-{i}") for i in range(trials)]
    else:
        graphs = [gen_bounded_degree_digraph(n, d, rng).with_id(f"sparse-{i}") for i in range(trials)]

    rows = []
    for c in temperatures:
        params = {'L': L, 'temperature': float(c)} if construction == 'power' else {'d': d, 'c': float(c)}
        summary = summarize_reports(verify_construction(construction, graphs, params, workers=workers))
        rows.append({'construction': construction, 'n': n, 'temperature': float(c),
                     'trials': trials, 'passed': summary['passed'],
                     'pass_rate': summary['passed'] / trials,
                     'max_abs_error': summary['worst_error']})
        logger.info("temperature %.2f: %d/%d passed", c, summary['passed'], trials)
    return pd.DataFrame(rows)


def sweep_rip_alpha(
    alphas: Sequence[float],
    n: int = 256,
    d: int = 8,
    trials: int = 200,
    seed: int = 0
) -> pd.DataFrame:
    """Margin success rate, embedding size and emitted width for each oversampling constant."""
    rows = []
    for idx, alpha in enumerate(alphas):
        p = rip_dimension(n, d, alpha)
        rate = margin_success_rate(n, d, alpha, trials, seed=seed + idx)
        rows.append({'alpha': float(alpha), 'n': n, 'd': d, 'rip_dim': p, 'width': 2 * p + 2,
                     'trials': trials, 'success_rate': rate})
    return pd.DataFrame(rows)


def construction_width(construction: str, n: int, params: Dict) -> Dict:
    """Emitted embedding width of one construction and the bound it is held to."""
    construction = canonical_construction(construction)
    if construction == 'one_vs_two':
        spec = build_one_vs_two(n, mode=params.get('mode', 'exact_map'))
        bound = 3 * n + 1
    elif construction == 'power':
        spec = build_power_transformer(n, int(params.get('L', 2)))
        bound = 3 * n
    elif construction == 'sparse_two_cycle':
        d = int(params.get('d', 2))
        alpha = float(params.get('alpha', config.RIP_ALPHA))
        spec = build_sparse_two_cycle(n, d, alpha=alpha)
        bound = 2 * int(math.ceil(alpha * d * math.log(n))) + 2
    else:
        pattern = named_pattern(params.get('pattern', 'triangle'))
        spec = build_subgraph_counter(n, pattern.n, pattern)
        bound = width_bound(n, pattern.n)
    return {'construction': construction, 'n': n, 'embedding_width': spec.embedding_width(),
            'bound': bound, 'within_bound': spec.embedding_width() <= bound}


def sweep_width_accounting(construction: str, sizes: Sequence[int], params: Optional[Dict] = None) -> pd.DataFrame:
    """Emitted width against the bound for every n in sizes."""
    params = dict(params or {})
    rows: List[Dict] = []
    for n in sizes:
        row = construction_width(construction, n, params)
        if row['construction'] == 'subgraph':
            plan = plan_partition(n, named_pattern(params.get('pattern', 'triangle')).n)
            row.update({'set_count': plan.set_count, 'set_size': plan.set_size,
                        'root': integer_root_ceil(n, plan.k)})
        rows.append(row)
    return pd.DataFrame(rows)
