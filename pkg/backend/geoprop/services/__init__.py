"""
Services package for GEOPROP.

This package contains the pipeline stages split into focused modules:
- geodesy: WGS-84 Vincenty / haversine distances
- robust_stats: l1 median (medoid) and MAD dispersion
- social_graph: reciprocated mention graph, ground-truth labels, profile links
- propagation: dispersion-constrained parallel coordinate descent
- doc_geotag: document geotagging from sharer locations
- toponyms: gazetteer and unambiguous toponyms
- evaluation: cross validation and curve data
- synthetic: seeded planted-home graphs
"""

from .doc_geotag import (
    canonicalize_url,
    filter_by_pattern,
    geotag_documents,
    geotag_toponym_mentions,
    join_references,
)
from .evaluation import (
    coverage_curve,
    cross_validate,
    default_grid,
    discrepancy_cdf,
    discrepancy_summary,
    dispersion_scatter,
    error_characteristic,
    make_record,
)
from .geodesy import (
    distances_to,
    haversine_distance,
    pairwise_distances,
    vincenty_distance,
    vincenty_inverse,
)
from .propagation import ParallelCoordinateSolver, objective, objective_breakdown, solve
from .robust_stats import l1_median, mad_dispersion, summarize, summarize_groups, weighted_objective
from .social_graph import (
    build_graph,
    extract_profile_links,
    gps_ground_truth,
    graph_from_edges,
    label_agreement,
    merge_labels,
    partition,
    self_report_ground_truth,
    transfer_locations,
)
from .toponyms import Gazetteer, ToponymMatcher, build_unambiguous, geotag_by_toponym, toponym_references

__all__ = [
    # Geodesy
    'vincenty_inverse',
    'vincenty_distance',
    'haversine_distance',
    'distances_to',
    'pairwise_distances',
    # Robust statistics
    'l1_median',
    'mad_dispersion',
    'summarize',
    'summarize_groups',
    'weighted_objective',
    # Social graph
    'build_graph',
    'graph_from_edges',
    'partition',
    'gps_ground_truth',
    'self_report_ground_truth',
    'merge_labels',
    'label_agreement',
    'extract_profile_links',
    'transfer_locations',
    # Propagation
    'ParallelCoordinateSolver',
    'solve',
    'objective',
    'objective_breakdown',
    # Document geotagging
    'canonicalize_url',
    'filter_by_pattern',
    'geotag_documents',
    'geotag_toponym_mentions',
    'join_references',
    # Toponyms
    'Gazetteer',
    'ToponymMatcher',
    'build_unambiguous',
    'geotag_by_toponym',
    'toponym_references',
    # Evaluation
    'make_record',
    'cross_validate',
    'discrepancy_cdf',
    'coverage_curve',
    'error_characteristic',
    'dispersion_scatter',
    'discrepancy_summary',
    'default_grid',
]
