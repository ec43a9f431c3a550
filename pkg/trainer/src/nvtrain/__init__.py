"""Representation-learning harness for the novel-class retrieval benchmark.

Trains each supported algorithm on class-disjoint split files produced by
the evaluator, with unlabeled pools routed through label-blind adapters,
and exports frozen 512-d backbone embeddings in the NVEB interchange
format.
"""

__version__ = "0.1.0"
