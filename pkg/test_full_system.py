"""End-to-end smoke run of the verification lab: every construction, the reduction and the exports."""
import os
import sys
import tempfile

import config
from constructions.sweeps import sweep_width_accounting
from constructions.verifier import summarize_reports, verify_construction
from eulerian.eulerian import fragment_cycle_census, reduce_cycles_to_eulerian, verify_eulerian
from graphs.generators import (gen_bounded_degree_digraph, gen_connectivity_dataset, gen_cycles, gen_erdos_renyi,
                               gen_min_out_degree_digraph)
from graphs.oracles import oracle_report
from tokenization.dataset_export import export_dataset, import_dataset
from tokenization.tokenizers import tokenize


def print_header(title: str):
    """Print a formatted header."""
    print("\n" + "=" * 80)
    print(f"  {title}")
    print("=" * 80)


def _print_summary(name: str, reports) -> bool:
    summary = summarize_reports(reports)
    ok = summary['failed'] == 0
    print(f"   {'✓' if ok else '✗'} {name}: {summary['passed']}/{summary['instances']} passed, "
          f"worst error {summary['worst_error']}")
    return ok


def check_generators():
    """Generate a few graphs and print their oracle summaries."""
    print_header("Checking Generators and Oracles")

    for label, g in (('one 12-cycle', gen_cycles(12, 1, seed=1)),
                     ('two 6-cycles', gen_cycles(12, 2, seed=1)),
                     ('ER(30, 0.1)', gen_erdos_renyi(30, 0.1, seed=1)),
                     ('bounded digraph', gen_bounded_degree_digraph(30, 3, seed=1))):
        print(f"   - {label}: {oracle_report(g)}")


def check_constructions() -> bool:
    """Run every construction on a small seeded corpus."""
    print_header("Checking Constructions")

    ok = True
    cycles = [gen_cycles(10, 1 + i % 2, seed=i).with_id(f"cycles-{i}") for i in range(6)]
    ok &= _print_summary('one_vs_two', verify_construction('one_vs_two', cycles))

    digraphs = [gen_min_out_degree_digraph(10, 0.2, seed=i).with_id(f"digraph-{i}") for i in range(4)]
    ok &= _print_summary('power (L=3)', verify_construction('power', digraphs, {'L': 3}))

    bounded = [gen_bounded_degree_digraph(64, 4, seed=i).with_id(f"bounded-{i}") for i in range(4)]
    ok &= _print_summary('sparse_two_cycle (d=4)', verify_construction('sparse_two_cycle', bounded, {'d': 4}))

    hosts = [gen_erdos_renyi(30, 0.1, seed=i).with_id(f"er-{i}") for i in range(4)]
    for pattern in ('triangle', '4-cycle'):
        ok &= _print_summary(f"subgraph ({pattern})",
                             verify_construction('subgraph', hosts, {'pattern': pattern}))
    return ok


def check_width_accounting() -> bool:
    """Print emitted widths against their bounds."""
    print_header("Checking Embedding Widths")

    frame = sweep_width_accounting('subgraph', [16, 30, 64], {'pattern': 'triangle'})
    print(frame.to_string(index=False))
    return bool(frame['within_bound'].all())


def check_reduction() -> bool:
    """Reduce both cycle classes and verify the Eulerian instances."""
    print_header("Checking Eulerian Reduction")

    ok = True
    for parts in (1, 2):
        inst = reduce_cycles_to_eulerian(gen_cycles(18, parts, seed=parts))
        verdict = verify_eulerian(inst)
        census = fragment_cycle_census(inst)
        expected = parts == 1
        ok &= verdict == expected
        print(f"   {'✓' if verdict == expected else '✗'} {parts} cycle(s): verify={verdict}, census={census}")
    return ok


def check_export() -> bool:
    """Tokenize a balanced corpus and round-trip it through JSONL and CSV."""
    print_header("Checking Dataset Export")

    corpus = gen_connectivity_dataset(20, 10, seed=2)
    items = [tokenize(g, 'laplacian', m=4, label=float(connected)) for g, connected in corpus]
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for fmt in ('jsonl', 'csv'):
            path = os.path.join(tmp, f"corpus.{fmt}")
            export_dataset(items, path)
            back = import_dataset(path)
            same = all((a.tokens == b.tokens).all() for a, b in zip(items, back)) and len(back) == len(items)
            ok &= same
            print(f"   {'✓' if same else '✗'} {fmt}: {len(back)} graphs round-tripped")
    return ok


def main():
    """Run all checks."""
    print("\n")
    print("╔" + "═" * 78 + "╗")
    print("║" + " " * 21 + "GRAPH TRANSFORMER VERIFICATION SMOKE RUN" + " " * 17 + "║")
    print("╚" + "═" * 78 + "╝")
    print(f"\nRIP alpha: {config.RIP_ALPHA}, Laplacian solver: {config.LAPLACIAN_SOLVER}")

    try:
        check_generators()
        results = [check_constructions(), check_width_accounting(), check_reduction(), check_export()]

        print("\n" + "=" * 80)
        print("ALL CHECKS PASSED" if all(results) else "SOME CHECKS FAILED")
        print("=" * 80)
        print("\nFull suite:")
        print("  pytest            (add -m slow for the large acceptance grids)")
        print("\n")
        if not all(results):
            sys.exit(1)

    except Exception as e:
        print(f"\n✗ Smoke run failed with error: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
