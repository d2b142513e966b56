"""Seeded graph families, labeled corpora and hard-instance gadgets."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

import config
from graphs.graph_core import Graph, disjoint_union, graph_from_edges
from graphs.oracles import oracle_connected, oracle_subgraph_count

logger = logging.getLogger(__name__)

FAMILIES = ('erdos_renyi', 'random_geometric', 'barabasi_albert', 'stochastic_block', 'cycles')
FAMILY_ALIASES = {
    'er': 'erdos_renyi', 'rgg': 'random_geometric', 'ba': 'barabasi_albert',
    'sbm': 'stochastic_block',
}
LABELS = ('connected', 'disconnected', 'none')


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _sub_seed(rng: np.random.Generator) -> int:
    # networkx generators take plain int seeds
    return int(rng.integers(0, 2 ** 31 - 1))


def _from_networkx(nx_graph: nx.Graph, n: int) -> Graph:
    index = {v: i for i, v in enumerate(sorted(nx_graph.nodes()))}
    return graph_from_edges(n, [(index[u], index[v]) for u, v in nx_graph.edges()], directed=False)


def canonical_family(family: str) -> str:
    family = FAMILY_ALIASES.get(family, family)
    if family not in FAMILIES:
        raise ValueError(f"Unknown graph family '{family}'. Choose from {FAMILIES}")
    return family


def gen_cycles(n: int, parts: int, seed=None) -> Graph:
    """
    One n-cycle (parts=1) or two n/2-cycles (parts=2) with randomly permuted node labels.

    Args:
        n: Even node count
        parts: 1 or 2
        seed: Seed or numpy Generator for the label permutation

    Returns:
        Undirected 2-regular Graph
    """
    if n % 2:
        raise ValueError(f"Cycle graphs need an even node count, got {n}")
    if parts not in (1, 2):
        raise ValueError(f"parts must be 1 or 2, got {parts}")
    if parts == 2 and n < 6:
        raise ValueError(f"Two cycles need n >= 6 so each has length >= 3, got {n}")
    if parts == 1 and n < 3:
        raise ValueError(f"A simple cycle needs at least 3 nodes, got {n}")

    length = n // parts
    edges = []
    for part in range(parts):
        base = part * length
        edges.extend((base + i, base + (i + 1) % length) for i in range(length))

    labels = _rng(seed).permutation(n)
    return graph_from_edges(n, [(labels[u], labels[v]) for u, v in edges], directed=False)


def gen_erdos_renyi(n: int, p: float, seed=None) -> Graph:
    """Each unordered pair is an edge independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Edge probability must be in [0, 1], got {p}")
    rng = _rng(seed)
    draws = rng.random((n, n))
    mask = np.triu(draws < p, k=1)
    us, vs = np.nonzero(mask)
    return graph_from_edges(n, zip(us.tolist(), vs.tolist()), directed=False)


def gen_random_geometric(n: int, radius: float, seed=None) -> Graph:
    """Unit-square random geometric graph: nodes within Euclidean distance radius are joined."""
    if radius <= 0:
        raise ValueError(f"Radius must be positive, got {radius}")
    rng = _rng(seed)
    return _from_networkx(nx.random_geometric_graph(n, radius, seed=_sub_seed(rng)), n)


def gen_barabasi_albert(n: int, m: int, seed=None, components: int = 1) -> Graph:
    """
    Preferential attachment graph; components > 1 gives a disjoint union of BA graphs.

    Args:
        n: Total node count
        m: Edges attached from each new node
        seed: Seed or numpy Generator
        components: Number of independent BA components (sizes differ by at most one)

    Returns:
        Undirected Graph
    """
    if components < 1:
        raise ValueError(f"components must be at least 1, got {components}")
    sizes = [n // components + (1 if i < n % components else 0) for i in range(components)]
    if m < 1 or any(m >= size for size in sizes):
        raise ValueError(f"Attachment count m={m} must satisfy 1 <= m < component size {min(sizes)}")
    rng = _rng(seed)
    parts = [_from_networkx(nx.barabasi_albert_graph(size, m, seed=_sub_seed(rng)), size)
             for size in sizes]
    return disjoint_union(parts)


def gen_stochastic_block(n: int, blocks: int, p_intra: float, p_inter: float, seed=None) -> Graph:
    """Stochastic block model with near-equal block sizes."""
    for name, value in (('p_intra', p_intra), ('p_inter', p_inter)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    if not 1 <= blocks <= n:
        raise ValueError(f"Block count must be in [1, {n}], got {blocks}")
    sizes = [n // blocks + (1 if i < n % blocks else 0) for i in range(blocks)]
    probs = [[p_intra if a == b else p_inter for b in range(blocks)] for a in range(blocks)]
    rng = _rng(seed)
    return _from_networkx(nx.stochastic_block_model(sizes, probs, seed=_sub_seed(rng)), n)


def gen_disjoint_paths(n: int, seed=None) -> Graph:
    """floor(n/3) disjoint 3-node paths plus n mod 3 isolated nodes, labels permuted."""
    edges = []
    for base in range(0, 3 * (n // 3), 3):
        edges.extend([(base, base + 1), (base + 1, base + 2)])
    labels = _rng(seed).permutation(n)
    return graph_from_edges(n, [(labels[u], labels[v]) for u, v in edges], directed=False)


def gen_disjointness_gadget(a: Sequence[int], b: Sequence[int], n: int, d: int) -> Graph:
    """
    Directed bipartite graph with a 2-cycle iff a_s = b_s = 1 for some s.

    Slot s = i*d + t pairs node i of V1 = {0..n-1} with node n + (i + t) mod n of V2.
    a_s switches on the V1 -> V2 edge of slot s and b_s the V2 -> V1 edge.

    Args:
        a: Bit vector of length n*d
        b: Bit vector of length n*d
        n: Side size
        d: Template degree, at most n

    Returns:
        Directed Graph on 2n nodes
    """
    if not 1 <= d <= n:
        raise ValueError(f"Template degree must satisfy 1 <= d <= n, got d={d}, n={n}")
    if len(a) != n * d or len(b) != n * d:
        raise ValueError(f"Bit vectors must have length n*d = {n * d}, got {len(a)} and {len(b)}")

    edges = []
    for i in range(n):
        for t in range(d):
            s = i * d + t
            j = n + (i + t) % n
            if a[s]:
                edges.append((i, j))
            if b[s]:
                edges.append((j, i))
    return graph_from_edges(2 * n, edges, directed=True)


def gen_bounded_degree_digraph(
    n: int,
    d: int,
    seed=None,
    keep_prob: float = 0.5,
    mutual_prob: float = 0.1
) -> Graph:
    """
    Random digraph with every out- and in-degree at most d.

    Arcs come from d random permutations (each arc kept with keep_prob, self-loops dropped);
    each kept arc's reverse is then added with mutual_prob when both degree budgets allow.

    Args:
        n: Node count
        d: Degree bound
        seed: Seed or numpy Generator
        keep_prob: Probability of keeping a permutation arc
        mutual_prob: Probability of adding the reverse of a kept arc

    Returns:
        Directed Graph without self-loops
    """
    if d < 0:
        raise ValueError(f"Degree bound must be non-negative, got {d}")
    rng = _rng(seed)
    arcs = set()
    for _ in range(d):
        perm = rng.permutation(n)
        keep = rng.random(n) < keep_prob
        arcs.update((u, int(perm[u])) for u in range(n) if keep[u] and perm[u] != u)

    out_deg = np.zeros(n, dtype=np.int64)
    in_deg = np.zeros(n, dtype=np.int64)
    for u, v in arcs:
        out_deg[u] += 1
        in_deg[v] += 1
    for u, v in sorted(arcs):
        if (v, u) in arcs or rng.random() >= mutual_prob:
            continue
        if out_deg[v] < d and in_deg[u] < d:
            arcs.add((v, u))
            out_deg[v] += 1
            in_deg[u] += 1
    return graph_from_edges(n, arcs, directed=True)


def gen_min_out_degree_digraph(n: int, p: float, seed=None) -> Graph:
    """Directed G(n, p) without self-loops; nodes left without out-edges get one random out-edge."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Edge probability must be in [0, 1], got {p}")
    if n < 2:
        raise ValueError(f"Need at least 2 nodes for a self-loop-free min-degree digraph, got {n}")
    rng = _rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    for u in np.flatnonzero(~mask.any(axis=1)):
        target = int(rng.integers(0, n - 1))
        mask[u, target if target < u else target + 1] = True
    us, vs = np.nonzero(mask)
    return graph_from_edges(n, zip(us.tolist(), vs.tolist()), directed=True)


def named_pattern(name: str) -> Graph:
    """Small undirected patterns used by the counting corpora."""
    patterns = {
        'triangle': (3, [(0, 1), (1, 2), (0, 2)]),
        '4-cycle': (4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
        '3-path': (3, [(0, 1), (1, 2)]),
        '3-star': (4, [(0, 1), (0, 2), (0, 3)]),
        '4-clique': (4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    }
    if name not in patterns:
        raise ValueError(f"Unknown pattern '{name}'. Choose from {sorted(patterns)}")
    n, edges = patterns[name]
    return graph_from_edges(n, edges, directed=False, graph_id=name)


@dataclass
class CorpusSpec:
    """
    What to generate: one family (or a list mixed in equal proportions), size, parameters, count, seed.

    params is either a flat dict applied to every family or a dict keyed by family name.
    Missing parameters fall back to the config regime for the requested label.
    """
    family: Union[str, Sequence[str]]
    n: int
    params: Dict = field(default_factory=dict)
    count: int = 1
    seed: Optional[int] = None

    def families(self) -> List[str]:
        names = [self.family] if isinstance(self.family, str) else list(self.family)
        if not names:
            raise ValueError("CorpusSpec needs at least one family")
        return [canonical_family(name) for name in names]

    def validate(self):
        if self.count < 1:
            raise ValueError(f"Corpus count must be at least 1, got {self.count}")
        if self.n < 1:
            raise ValueError(f"Node count must be at least 1, got {self.n}")
        for family in self.families():
            params = self.params_for(family)
            for key in ('p', 'p_intra', 'p_inter'):
                if key in params and not 0.0 <= params[key] <= 1.0:
                    raise ValueError(f"{family}: {key} must be in [0, 1], got {params[key]}")
            if 'radius' in params and params['radius'] <= 0:
                raise ValueError(f"{family}: radius must be positive, got {params['radius']}")
            if 'm' in params and params['m'] < 1:
                raise ValueError(f"{family}: m must be at least 1, got {params['m']}")

    def params_for(self, family: str) -> Dict:
        if family in self.params and isinstance(self.params[family], dict):
            return dict(self.params[family])
        if any(isinstance(v, dict) for v in self.params.values()):
            return {}
        return dict(self.params)


def default_regime(family: str, n: int, label: str) -> Dict:
    """
    Parameter regime that makes the requested connectivity label likely.

    Args:
        family: Canonical family name
        n: Node count
        label: connected, disconnected or none

    Returns:
        Parameter dict for sample_family
    """
    family = canonical_family(family)
    disconnected = label == 'disconnected'
    log_ratio = math.log(max(n, 2)) / max(n, 2)
    if family == 'erdos_renyi':
        factor = config.ER_DISCONNECTED_FACTOR if disconnected else config.ER_CONNECTED_FACTOR
        return {'p': min(1.0, factor * log_ratio)}
    if family == 'random_geometric':
        factor = config.RGG_DISCONNECTED_FACTOR if disconnected else config.RGG_CONNECTED_FACTOR
        return {'radius': factor * math.sqrt(log_ratio / math.pi)}
    if family == 'barabasi_albert':
        components = config.BA_DISCONNECTED_COMPONENTS if disconnected else 1
        return {'m': config.BA_ATTACHMENTS, 'components': components}
    if family == 'stochastic_block':
        return {'blocks': config.SBM_BLOCKS, 'p_intra': config.SBM_P_INTRA,
                'p_inter': 0.0 if disconnected else config.SBM_P_INTER}
    return {'parts': 2 if disconnected else 1}


def sample_family(family: str, n: int, params: Dict, rng: np.random.Generator) -> Graph:
    """Draw one graph from a family with fully specified parameters."""
    family = canonical_family(family)
    if family == 'erdos_renyi':
        return gen_erdos_renyi(n, params['p'], rng)
    if family == 'random_geometric':
        return gen_random_geometric(n, params['radius'], rng)
    if family == 'barabasi_albert':
        return gen_barabasi_albert(n, int(params['m']), rng, components=int(params.get('components', 1)))
    if family == 'stochastic_block':
        return gen_stochastic_block(n, int(params['blocks']), params['p_intra'], params['p_inter'], rng)
    return gen_cycles(n, int(params['parts']), rng)


def gen_corpus(spec: CorpusSpec, target_label: str = 'none') -> List[Tuple[Graph, Optional[bool]]]:
    """
    Generate spec.count graphs, each matching target_label under the connectivity oracle.

    Instances that miss the label are redrawn up to CORPUS_MAX_RESAMPLES times.

    Args:
        spec: Corpus description
        target_label: connected, disconnected or none

    Returns:
        List of (Graph, connected flag); the flag is the oracle value even when target_label is none
    """
    if target_label not in LABELS:
        raise ValueError(f"Unknown label '{target_label}'. Choose from {LABELS}")
    spec.validate()
    families = spec.families()
    rng = np.random.default_rng(spec.seed)

    corpus = []
    for idx in range(spec.count):
        family = families[idx % len(families)]
        params = default_regime(family, spec.n, target_label)
        params.update(spec.params_for(family))
        for attempt in range(config.CORPUS_MAX_RESAMPLES + 1):
            g = sample_family(family, spec.n, params, rng)
            connected = oracle_connected(g) if g.n else False
            if target_label == 'none' or connected == (target_label == 'connected'):
                break
            logger.debug("%s instance %d missed label %s (attempt %d)", family, idx, target_label, attempt)
        else:
            raise ValueError(f"{family} with params {params} produced no {target_label} graph "
                             f"after {config.CORPUS_MAX_RESAMPLES} resamples")
        corpus.append((g.with_id(f"{family}-{spec.n}-{idx}"), connected))

    order = rng.permutation(len(corpus))
    return [corpus[i] for i in order]


def gen_connectivity_dataset(
    n: int,
    count: int,
    seed=None,
    families: Sequence[str] = ('erdos_renyi', 'random_geometric', 'barabasi_albert', 'stochastic_block')
) -> List[Tuple[Graph, bool]]:
    """Class-balanced connectivity corpus: half connected, half disconnected, families interleaved."""
    rng = _rng(seed)
    merged = []
    for label, size in (('connected', (count + 1) // 2), ('disconnected', count // 2)):
        sub_seed = _sub_seed(rng)
        if size:
            merged.extend(gen_corpus(CorpusSpec(tuple(families), n, count=size, seed=sub_seed), label))
    order = rng.permutation(len(merged))
    return [merged[i] for i in order]


def gen_counting_corpus(
    n: int,
    count: int,
    seed=None,
    p: Optional[float] = None,
    patterns: Sequence[str] = ('triangle', '4-cycle')
) -> List[Tuple[Graph, Dict[str, int]]]:
    """ER graphs labeled with oracle occurrence counts for each named pattern."""
    p = config.COUNTING_EDGE_PROB if p is None else p
    rng = _rng(seed)
    shapes = {name: named_pattern(name) for name in patterns}
    corpus = []
    for idx in range(count):
        g = gen_erdos_renyi(n, p, rng).with_id(f"count-{n}-{idx}")
        corpus.append((g, {name: oracle_subgraph_count(g, shape) for name, shape in shapes.items()}))
    return corpus


def split_corpus(items: Sequence, fractions: Sequence[float] = None, seed=None) -> Tuple[List, List, List]:
    """
    Stratified train/val/test split keeping each label's share in every split.

    Args:
        items: Sequence of (graph, label) pairs; labels must be hashable
        fractions: Train/val/test fractions summing to 1
        seed: Seed or numpy Generator

    Returns:
        (train, val, test) lists
    """
    fractions = tuple(config.SPLIT_FRACTIONS if fractions is None else fractions)
    if len(fractions) != 3 or any(f < 0 for f in fractions) or not math.isclose(sum(fractions), 1.0):
        raise ValueError(f"Split fractions must be three non-negative numbers summing to 1, got {fractions}")
    rng = _rng(seed)

    by_label: Dict = {}
    for item in items:
        label = item[1]
        key = tuple(sorted(label.items())) if isinstance(label, dict) else label
        by_label.setdefault(key, []).append(item)

    splits: Tuple[List, List, List] = ([], [], [])
    for key in sorted(by_label, key=repr):
        group = by_label[key]
        order = rng.permutation(len(group))
        n_train = int(round(fractions[0] * len(group)))
        n_val = int(round(fractions[1] * len(group)))
        n_val = min(n_val, len(group) - n_train)
        for rank, i in enumerate(order):
            target = 0 if rank < n_train else 1 if rank < n_train + n_val else 2
            splits[target].append(group[i])
    return splits
