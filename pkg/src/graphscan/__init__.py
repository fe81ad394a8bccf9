"""Graph scan statistics: exact GSS by enumeration and LESS via parametric min cuts."""
from .electrical import (ThresholdReport, WilsonSampler, effective_resistance, gss_threshold,
                         less_threshold, r_class_bound, resistance_table, wilson_ust)
from .flow import BACKEND, CutSolver, FlowNetwork, available_backends, g_dual, max_flow, mrf_map
from .graph import (Cluster, DirectedGraph, GraphError, build_graph, from_undirected, lovasz_out,
                    out_weight, read_edgelist, write_edgelist)
from .harness import ExperimentConfig, RocCurve, empirical_risk, fig1_experiment, roc, simulate
from .models import (ball_cluster, complete_graph, cycle_graph, epsilon_graph, knn_graph,
                     make_signal, observe, sample_points, torus_graph)
from .scan import DetectionResult, LessOptions, gss_bruteforce, less, max_test, sum_test

__version__ = "0.1.0"
