"""Writers for JSON/CSV reports and SVG charts; every file lands via a temp file and os.replace."""
import io
import json
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence, Union

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

import config  # noqa: E402

logger = logging.getLogger(__name__)

CHART_KINDS = ('bar', 'line')


def atomic_write_text(path: str, text: str) -> str:
    """
    Write text to path through a sibling temp file so readers never see a partial file.

    Args:
        path: Destination
        text: UTF-8 content

    Returns:
        The destination path
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    os.replace(tmp_path, path)
    logger.debug("wrote %s (%d bytes)", path, len(text))
    return path


def report_frame(rows: Union[pd.DataFrame, Sequence[Dict]]) -> pd.DataFrame:
    """Flatten report rows (nested params become params.<name> columns)."""
    if isinstance(rows, pd.DataFrame):
        return rows
    rows = list(rows)
    if not rows:
        return pd.DataFrame()
    return pd.json_normalize(rows)


def write_json_report(payload: Union[Dict, List], path: str) -> str:
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_csv_report(rows: Union[pd.DataFrame, Sequence[Dict]], path: str) -> str:
    return atomic_write_text(path, report_frame(rows).to_csv(index=False, lineterminator="\n"))


def _report_rows(payload) -> List[Dict]:
    if isinstance(payload, list):
        return payload
    if isinstance(payload, dict) and 'rows' in payload:
        return payload['rows']
    raise ValueError("Report JSON must be a list of rows or an object with a 'rows' list")


def merge_reports(paths: Iterable[str]) -> pd.DataFrame:
    """
    Concatenate the rows of several JSON reports into one table.

    Args:
        paths: JSON report files written by the CLI

    Returns:
        DataFrame with a leading 'source' column naming the report each row came from
    """
    frames = []
    for path in paths:
        with open(path, 'r', encoding='utf-8') as f:
            payload = json.load(f)
        frame = report_frame(_report_rows(payload))
        frame.insert(0, 'source', os.path.basename(path))
        if isinstance(payload, dict) and 'command' in payload:
            frame.insert(1, 'command', payload['command'])
        frames.append(frame)
    if not frames:
        raise ValueError("No reports to merge")
    return pd.concat(frames, ignore_index=True, sort=False)


def render_svg_chart(
    frame: pd.DataFrame,
    x: str,
    y: str,
    kind: str = 'bar',
    title: Optional[str] = None
) -> str:
    """
    Static SVG chart of y against x, returned as text.

    The SVG carries no date and uses a fixed hash salt, so identical data gives identical bytes.

    Args:
        frame: Table holding columns x and y
        x: Column for the horizontal axis
        y: Column for the vertical axis
        kind: bar or line
        title: Optional chart title

    Returns:
        SVG document
    """
    if kind not in CHART_KINDS:
        raise ValueError(f"Unknown chart kind '{kind}'. Choose from {CHART_KINDS}")
    for column in (x, y):
        if column not in frame.columns:
            raise ValueError(f"Column '{column}' not in report (have {list(frame.columns)})")

    plt.rcParams['svg.hashsalt'] = 'graph-transformer-lab'
    fig, ax = plt.subplots(figsize=(config.CHART_WIDTH_INCHES, config.CHART_HEIGHT_INCHES))
    labels = frame[x].astype(str).tolist()
    values = pd.to_numeric(frame[y], errors='coerce').fillna(0.0).tolist()
    if kind == 'bar':
        ax.bar(range(len(values)), values)
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels(labels, rotation=45, ha='right')
    else:
        ax.plot(pd.to_numeric(frame[x], errors='coerce'), values, marker='o')
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if title:
        ax.set_title(title)
    fig.tight_layout()

    buffer = io.StringIO()
    fig.savefig(buffer, format='svg', metadata={'Date': None})
    plt.close(fig)
    return buffer.getvalue()
