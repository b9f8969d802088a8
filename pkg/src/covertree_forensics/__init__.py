"""Exact cover trees, adversarial metric datasets and instrumented neighbor search."""

from .dataset import Dataset, read_dataset, write_dataset
from .experiments import (ExperimentResult, run_correctness_suite, run_dualtree_counterexamples,
                          run_insert_counterexample, run_nn_counterexample, run_scaling_sweep)
from .graph import (AdversarialDataset, GraphMetric, MetricMultigraph, RegimeError,
                    generate_bichromatic, generate_tall_imbalanced, shortest_path_distance)
from .metric import (EuclideanMetric, FiniteMetric, LineMetric, MetricSpace, audit_metric,
                     brute_force_knn, expansion_constant)
from .numeric import Dyadic, ceil_log2, pow2
from .search import (DualTreeBlocks, DuplicatePointError, TraceCounters, build_tree, find_all_nn,
                     insert, nn_search)
from .tree import CoverTree, explicit_depth, explicit_nodes, verify_invariants

__version__ = "0.1.0"
