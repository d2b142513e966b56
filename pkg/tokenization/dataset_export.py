"""JSONL and CSV export/import of tokenized graph datasets."""
import json
import logging
import math
import os
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from tokenization.tokenizers import TokenizedGraph
from utils.report_writer import atomic_write_text

logger = logging.getLogger(__name__)

FORMATS = ('jsonl', 'csv')
META_COLUMNS = ['graph_id', 'n', 'scheme', 'pad_n', 'label', 'rows', 'cols']


def format_for_path(path: str, fmt: Optional[str] = None) -> str:
    """Explicit format, otherwise the file extension."""
    if fmt is None:
        fmt = os.path.splitext(path)[1].lstrip('.').lower()
    if fmt not in FORMATS:
        raise ValueError(f"Unknown dataset format '{fmt}'. Choose from {FORMATS}")
    return fmt


def _check_homogeneous(items: Sequence[TokenizedGraph]):
    if not items:
        return
    schemes = {item.scheme for item in items}
    pads = {item.pad_n for item in items}
    if len(schemes) > 1:
        raise ValueError(f"Heterogeneous batch: schemes {sorted(schemes)}")
    if len(pads) > 1:
        raise ValueError(f"Heterogeneous batch: pad_n values {sorted(pads)}")


def _label_value(label):
    return None if label is None else float(label)


def export_dataset(items: Sequence[TokenizedGraph], path: str, fmt: Optional[str] = None) -> int:
    """
    Write tokenized graphs to a JSONL or CSV file.

    JSONL lines hold graph_id, n, scheme, pad_n, label and the token matrix as nested rows.
    CSV rows hold the same metadata plus rows/cols and the matrix flattened row-major into
    t0, t1, ... (shorter matrices leave the trailing cells empty).

    Args:
        items: Graphs tokenized with one scheme and one pad_n
        path: Destination file
        fmt: jsonl or csv (taken from the extension by default)

    Returns:
        Number of graphs written
    """
    fmt = format_for_path(path, fmt)
    items = list(items)
    _check_homogeneous(items)

    if fmt == 'jsonl':
        lines = [json.dumps({'graph_id': item.graph_id, 'n': item.n, 'scheme': item.scheme,
                             'pad_n': item.pad_n, 'label': _label_value(item.label),
                             'tokens': item.tokens.tolist()})
                 for item in items]
        atomic_write_text(path, ''.join(line + '\n' for line in lines))
    elif not items:
        atomic_write_text(path, '')
    else:
        width = max(item.tokens.size for item in items)
        records = []
        for item in items:
            record = {'graph_id': item.graph_id, 'n': item.n, 'scheme': item.scheme, 'pad_n': item.pad_n,
                      'label': _label_value(item.label), 'rows': item.tokens.shape[0],
                      'cols': item.tokens.shape[1]}
            record.update({f"t{i}": v for i, v in enumerate(item.tokens.reshape(-1).tolist())})
            records.append(record)
        frame = pd.DataFrame(records, columns=META_COLUMNS + [f"t{i}" for i in range(width)])
        atomic_write_text(path, frame.to_csv(index=False, lineterminator='\n'))

    logger.info("exported %d %s graphs to %s", len(items), fmt, path)
    return len(items)


def _from_record(graph_id, n, scheme, pad_n, label, tokens: np.ndarray) -> TokenizedGraph:
    return TokenizedGraph(tokens=tokens, scheme=str(scheme), pad_n=int(pad_n), n=int(n),
                          label=label, graph_id=graph_id)


def _missing(value) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))


def import_dataset(path: str, fmt: Optional[str] = None) -> List[TokenizedGraph]:
    """Read a dataset written by export_dataset back into TokenizedGraphs."""
    fmt = format_for_path(path, fmt)
    if os.path.getsize(path) == 0:
        return []

    items = []
    if fmt == 'jsonl':
        with open(path, 'r', encoding='utf-8') as f:
            for line in f:
                if not line.strip():
                    continue
                record = json.loads(line)
                tokens = np.array(record['tokens'], dtype=np.float64)
                if tokens.ndim != 2:
                    # zero-token matrices serialise as rows of empty lists
                    tokens = tokens.reshape(len(record['tokens']), 0)
                items.append(_from_record(record['graph_id'], record['n'], record['scheme'],
                                          record['pad_n'], record['label'], tokens))
        return items

    frame = pd.read_csv(path, float_precision='round_trip', dtype={'graph_id': object, 'scheme': object})
    value_columns = [c for c in frame.columns if c not in META_COLUMNS]
    values = frame[value_columns].to_numpy(dtype=np.float64)
    for idx, row in enumerate(frame.itertuples(index=False)):
        rows, cols = int(row.rows), int(row.cols)
        tokens = values[idx, :rows * cols].reshape(rows, cols).copy()
        graph_id = None if _missing(row.graph_id) else str(row.graph_id)
        label = None if _missing(row.label) else float(row.label)
        items.append(_from_record(graph_id, row.n, row.scheme, row.pad_n, label, tokens))
    return items
