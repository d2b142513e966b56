"""Importing the package registers every construction's ExactMaps."""
from constructions import one_vs_two, power, sparse_two_cycle, subgraph_counter  # noqa: F401
