"""
Command-line entry point.

Usage:
    python cli.py verify --construction power --n 32 --L 3 --trials 20 --seed 7 --out power.json
    python cli.py sweep --parameter temperature --values 2,5,10,20 --n 16 --seed 1 --out sweep.csv
    python cli.py gen --family er --n 50 --p 0.1 --count 10 --tokenizer laplacian --m 8 --seed 3 --out ds.jsonl
    python cli.py reduce --n 18 --parts 2 --seed 1 --out inst.json
    python cli.py report --inputs power.json sparse.json --out merged.csv --chart merged.svg

Exit codes: 0 all checks passed, 1 some check failed, 2 usage or configuration error.
"""
import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

import config
from constructions.sweeps import SWEEP_KINDS, sweep_rip_alpha, sweep_temperature, sweep_width_accounting
from constructions.verifier import canonical_construction, summarize_reports, verify_construction
from eulerian.eulerian import instance_from_json, reduce_cycles_to_eulerian, verify_eulerian
from graphs.generators import (CorpusSpec, canonical_family, gen_bounded_degree_digraph, gen_connectivity_dataset,
                               gen_corpus, gen_cycles, gen_erdos_renyi, gen_min_out_degree_digraph, named_pattern,
                               split_corpus)
from graphs.oracles import oracle_connected
from tokenization.dataset_export import export_dataset, format_for_path
from tokenization.tokenizers import LAPLACIAN_LAYOUTS, SCHEMES, tokenize
from utils.report_writer import (atomic_write_text, merge_reports, render_svg_chart, report_frame,
                                 write_csv_report, write_json_report)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
VERIFY_CHOICES = ('one-vs-two', 'one_vs_two', 'power', 'sparse2cycle', 'sparse_two_cycle', 'subgraph', 'eulerian')
REPORT_COLUMNS_HELP = ("CSV columns: construction, graph_id, n, params.<name>, passed, max_abs_error, "
                       "oracle_value, transformer_value, temperature, error (millis with --timings)")


class UsageError(ValueError):
    """Invalid arguments or configuration; maps to exit code 2."""


def _seed(args) -> int:
    seed = args.seed if args.seed is not None else config.DEFAULT_SEED
    if seed is None:
        raise UsageError("This command is randomized: pass --seed or set GRTL_SEED")
    return int(seed)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise UsageError(f"Expected comma-separated numbers, got '{text}'")


def _write_rows(rows: List[Dict], path: Optional[str], payload: Dict):
    """JSON report (payload with rows) or CSV rows, chosen by the extension; stdout without a path."""
    if path is None:
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif path.lower().endswith('.csv'):
        write_csv_report(rows, path)
    else:
        write_json_report(payload, path)


# --- verify ---

def _verify_corpus(construction: str, args, rng: np.random.Generator):
    n, trials = args.n, args.trials
    if construction == 'one_vs_two':
        return [gen_cycles(n, 1 + idx % 2, rng).with_id(f"cycles-{n}-{idx}") for idx in range(trials)]
    if construction == 'power':
        p = 0.1 if args.p is None else args.p
        return [gen_min_out_degree_digraph(n, p, rng).with_id(f"digraph-{n}-{idx}") for idx in range(trials)]
    if construction == 'sparse_two_cycle':
        return [gen_bounded_degree_digraph(n, args.d, rng).with_id(f"bounded-{n}-{idx}") for idx in range(trials)]
    p = config.COUNTING_EDGE_PROB if args.p is None else args.p
    return [gen_erdos_renyi(n, p, rng).with_id(f"er-{n}-{idx}") for idx in range(trials)]


def _verify_params(construction: str, args) -> Dict:
    params: Dict = {}
    if construction in ('one_vs_two', 'power'):
        params['mode'] = args.mode
    if construction == 'power':
        if args.L is None:
            raise UsageError("power needs --L")
        params['L'] = args.L
        if args.eps is not None:
            params['eps'] = args.eps
        if args.temperature is not None:
            params['temperature'] = args.temperature
    if construction == 'sparse_two_cycle':
        if args.d is None:
            raise UsageError("sparse2cycle needs --d")
        params.update({'d': args.d, 'alpha': args.alpha if args.alpha is not None else config.RIP_ALPHA,
                       'seed': 0})
        if args.temperature is not None:
            params['c'] = args.temperature
    if construction == 'subgraph':
        try:
            named_pattern(args.pattern)
        except ValueError as e:
            raise UsageError(str(e))
        params['pattern'] = args.pattern
        if args.set_count is not None:
            params['set_count'] = args.set_count
        if args.temperature is not None:
            params['temperature'] = args.temperature
    return params


def _verify_eulerian(args) -> int:
    if args.input:
        with open(args.input, 'r', encoding='utf-8') as f:
            inst = instance_from_json(f.read())
        verdict = verify_eulerian(inst)
        rows = [{'construction': 'eulerian', 'graph_id': os.path.basename(args.input), 'n': inst.n,
                 'passed': verdict, 'fragments': len(inst.fragments)}]
    else:
        if args.n is None:
            raise UsageError("eulerian verification needs --in or --n (cycle node count)")
        rng = np.random.default_rng(_seed(args))
        rows = []
        for idx in range(args.trials):
            g = gen_cycles(args.n, 1 + idx % 2, rng)
            expected = oracle_connected(g)
            verdict = verify_eulerian(reduce_cycles_to_eulerian(g))
            rows.append({'construction': 'eulerian', 'graph_id': f"cycles-{args.n}-{idx}", 'n': args.n,
                         'passed': verdict == expected, 'oracle_value': int(expected),
                         'transformer_value': int(verdict)})
    passed = sum(r['passed'] for r in rows)
    payload = {'command': 'verify', 'construction': 'eulerian', 'rows': rows,
               'summary': {'instances': len(rows), 'passed': passed, 'failed': len(rows) - passed}}
    _write_rows(rows, args.out, payload)
    print(f"eulerian: {passed}/{len(rows)} passed", file=sys.stderr)
    return EXIT_OK if passed == len(rows) else EXIT_FAILED


def _cmd_verify(args) -> int:
    if args.construction == 'eulerian':
        return _verify_eulerian(args)
    construction = canonical_construction(args.construction)
    if args.n is None:
        raise UsageError("verify needs --n")
    params = _verify_params(construction, args)
    graphs = _verify_corpus(construction, args, np.random.default_rng(_seed(args)))
    reports = verify_construction(construction, graphs, params, workers=args.workers)

    rows = [r.to_dict(include_timing=args.timings) for r in reports]
    summary = summarize_reports(reports)
    payload = {'command': 'verify', 'construction': construction, 'params': params,
               'rows': rows, 'summary': summary}
    _write_rows(rows, args.out, payload)
    print(f"{construction}: {summary['passed']}/{summary['instances']} passed", file=sys.stderr)
    return EXIT_OK if summary['failed'] == 0 else EXIT_FAILED


# --- sweep ---

def _cmd_sweep(args) -> int:
    if args.parameter == 'width-accounting':
        sizes = [int(v) for v in _floats(args.values)] if args.values else [args.n or 16]
        params = {'L': args.L or 2, 'd': args.d or 2, 'pattern': args.pattern}
        if args.alpha is not None:
            params['alpha'] = args.alpha
        frame = sweep_width_accounting(args.construction or 'subgraph', sizes, params)
        ok = bool(frame['within_bound'].all())
    elif args.parameter == 'temperature':
        if not args.values:
            raise UsageError("temperature sweeps need --values")
        frame = sweep_temperature(_floats(args.values), construction=args.construction or 'power',
                                  n=args.n or 16, trials=args.trials, seed=_seed(args), L=args.L or 2,
                                  d=args.d or 3, p=0.2 if args.p is None else args.p, workers=args.workers)
        ok = True
    else:
        alphas = _floats(args.values) if args.values else [2.0, 4.0, 6.0, 8.0, 12.0]
        frame = sweep_rip_alpha(alphas, n=args.n or 256, d=args.d or 8, trials=args.trials, seed=_seed(args))
        ok = True

    if args.out:
        write_csv_report(frame, args.out)
    else:
        sys.stdout.write(frame.to_csv(index=False, lineterminator='\n'))
    return EXIT_OK if ok else EXIT_FAILED


# --- gen ---

def _family_params(args) -> Dict:
    params = {}
    if args.p is not None:
        params['p'] = args.p
    if args.radius is not None:
        params['radius'] = args.radius
    if args.attachments is not None:
        params['m'] = args.attachments
    return params


def _cmd_gen(args) -> int:
    if args.out is None:
        raise UsageError("gen needs --out")
    fmt = format_for_path(args.out, args.format)
    seed = _seed(args)
    families = [canonical_family(f) for f in args.family.split(',')]
    if args.label == 'balanced':
        corpus = gen_connectivity_dataset(args.n, args.count, seed, families)
    else:
        spec = CorpusSpec(tuple(families), args.n, _family_params(args), args.count, seed)
        corpus = gen_corpus(spec, args.label)

    options = {'with_index': args.with_index, 'layout': args.layout, 'solver': args.solver}
    items = [tokenize(g, args.tokenizer, pad_n=args.pad_n, m=args.m,
                      label=None if connected is None else float(connected), **options)
             for g, connected in corpus]

    if args.split:
        root, ext = os.path.splitext(args.out)
        for name, part in zip(('train', 'val', 'test'), split_corpus(list(zip(items, [i.label for i in items])),
                                                                      seed=seed)):
            export_dataset([item for item, _ in part], f"{root}.{name}{ext}", fmt)
    else:
        export_dataset(items, args.out, fmt)
    print(f"wrote {len(items)} {args.tokenizer} graphs", file=sys.stderr)
    return EXIT_OK


# --- reduce ---

def _cmd_reduce(args) -> int:
    if args.n is None:
        raise UsageError("reduce needs --n (cycle node count)")
    g = gen_cycles(args.n, args.parts, np.random.default_rng(_seed(args)))
    turnaround = args.turnaround if args.turnaround == 'auto' else int(args.turnaround)
    inst = reduce_cycles_to_eulerian(g, turnaround)
    text = json.dumps(inst.to_dict(), sort_keys=True) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- report ---

def _cmd_report(args) -> int:
    frame = merge_reports(args.inputs)
    svg = render_svg_chart(frame, args.x, args.y, kind=args.kind, title=args.title) if args.chart else None
    if args.out:
        write_csv_report(frame, args.out)
    else:
        sys.stdout.write(report_frame(frame).to_csv(index=False, lineterminator='\n'))
    if svg is not None:
        atomic_write_text(args.chart, svg)
    failed = 'passed' in frame.columns and not frame['passed'].fillna(False).astype(bool).all()
    return EXIT_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Verification lab for constructed graph transformers",
                                     epilog=REPORT_COLUMNS_HELP)
    parser.add_argument('--log-level', default=config.LOG_LEVEL)
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p, randomized: bool = True):
        if randomized:
            p.add_argument('--seed', type=int, default=None, help='Seed (falls back to GRTL_SEED)')
        p.add_argument('--out', type=str, default=None)
        p.add_argument('--workers', type=int, default=config.WORKERS)

    p_verify = sub.add_parser('verify', help='Check a construction against its oracle', epilog=REPORT_COLUMNS_HELP)
    common(p_verify)
    p_verify.add_argument('--construction', required=True, choices=VERIFY_CHOICES)
    p_verify.add_argument('--n', type=int)
    p_verify.add_argument('--L', type=int)
    p_verify.add_argument('--d', type=int)
    p_verify.add_argument('--p', type=float)
    p_verify.add_argument('--alpha', type=float)
    p_verify.add_argument('--eps', type=float)
    p_verify.add_argument('--temperature', type=float)
    p_verify.add_argument('--mode', choices=('exact_map', 'explicit_net'), default='exact_map')
    p_verify.add_argument('--pattern', default='triangle')
    p_verify.add_argument('--set-count', type=int)
    p_verify.add_argument('--trials', type=int, default=10)
    p_verify.add_argument('--in', dest='input', type=str, help='Eulerian instance JSON')
    p_verify.add_argument('--timings', action='store_true', help='Include wall time (not byte-reproducible)')
    p_verify.set_defaults(func=_cmd_verify)

    p_sweep = sub.add_parser('sweep', help='Exactness or width against a parameter (CSV)')
    common(p_sweep)
    p_sweep.add_argument('--parameter', required=True, choices=SWEEP_KINDS)
    p_sweep.add_argument('--values', type=str, help='Comma-separated temperatures, alphas or sizes')
    p_sweep.add_argument('--construction', type=str)
    p_sweep.add_argument('--n', type=int)
    p_sweep.add_argument('--L', type=int)
    p_sweep.add_argument('--d', type=int)
    p_sweep.add_argument('--p', type=float)
    p_sweep.add_argument('--alpha', type=float)
    p_sweep.add_argument('--pattern', default='triangle')
    p_sweep.add_argument('--trials', type=int, default=10)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_gen = sub.add_parser('gen', help='Generate, tokenize and export a corpus')
    common(p_gen)
    p_gen.add_argument('--family', required=True, help='Family name or comma-separated list (er, rgg, ba, sbm, cycles)')
    p_gen.add_argument('--n', type=int, required=True)
    p_gen.add_argument('--count', type=int, default=1)
    p_gen.add_argument('--p', type=float)
    p_gen.add_argument('--radius', type=float)
    p_gen.add_argument('--attachments', type=int, help='Barabasi-Albert edges per new node')
    p_gen.add_argument('--label', choices=('none', 'connected', 'disconnected', 'balanced'), default='none')
    p_gen.add_argument('--tokenizer', choices=SCHEMES, default='adjacency')
    p_gen.add_argument('--pad-n', type=int)
    p_gen.add_argument('--m', type=int, help='Laplacian eigenpair count')
    p_gen.add_argument('--layout', choices=LAPLACIAN_LAYOUTS, default='spectral_coordinates')
    p_gen.add_argument('--solver', choices=('lapack', 'jacobi'))
    p_gen.add_argument('--with-index', action='store_true')
    p_gen.add_argument('--format', choices=('jsonl', 'csv'))
    p_gen.add_argument('--split', action='store_true', help='Write stratified train/val/test files')
    p_gen.set_defaults(func=_cmd_gen)

    p_reduce = sub.add_parser('reduce', help='Reduce a 1-vs-2 cycle instance to Eulerian verification')
    common(p_reduce)
    p_reduce.add_argument('--n', type=int, help='Cycle graph node count N = n^2/2')
    p_reduce.add_argument('--parts', type=int, choices=(1, 2), default=1)
    p_reduce.add_argument('--turnaround', default='auto', help="Edge index or 'auto'")
    p_reduce.set_defaults(func=_cmd_reduce)

    p_report = sub.add_parser('report', help='Merge JSON reports into CSV and an optional SVG chart')
    common(p_report, randomized=False)
    p_report.add_argument('--inputs', nargs='+', required=True)
    p_report.add_argument('--chart', type=str)
    p_report.add_argument('--x', default='graph_id')
    p_report.add_argument('--y', default='max_abs_error')
    p_report.add_argument('--kind', choices=('bar', 'line'), default='bar')
    p_report.add_argument('--title', type=str)
    p_report.set_defaults(func=_cmd_report)
    return parser


def run_command(argv: Sequence[str]) -> int:
    """
    Parse argv, run the command and map the outcome to an exit code.

    Args:
        argv: Arguments without the program name

    Returns:
        0 when every check passed, 1 when some check failed, 2 on usage or configuration errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logging.basicConfig(level=str(args.log_level).upper(), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if getattr(args, 'workers', 1) < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, KeyError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
