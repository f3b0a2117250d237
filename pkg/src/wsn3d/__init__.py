"""Probabilistic sensor-network coverage on synthetic 3D terrain.

Terrain is reduced to the plane with locally linear embedding, a gated
exponential sensing model builds a detection map, an immersion watershed
extracts its contours, and the cheapest edge-to-edge contour path gives
the optimal breach probability.
"""

from .breach import (
    BreachResult, Branch, ContourGraph, Direction, PathRecord,
    build_contour_graph, dijkstra_min_sum, optimal_breach, penetrate,
)
from .errors import (
    EigenFailure, EmptyContour, EmptyPeakSet, InvalidRange, KTooLarge,
    SingularGram, TooManyNodes, Wsn3dError,
)
from .harness import ExperimentConfig, SweepResult, emit, run_trial, sweep
from .manifold import (
    CostParams, Embedding2D, NeighborTable, WeightMatrix,
    cost_value, embed, embed_terrain, knn, reconstruction_weights,
)
from .sensing import (
    Deployment, SensingMap, SensingModel, coverage_ratio, deploy_uniform,
    fuse, missed_map, perceived_probability, sensing_map,
)
from .terrain import PeakSpec, TerrainGrid, compose_terrain, generate_peaks, peak_height, std_normal_cdf
from .watershed import CONTOUR, GrayImage, WatershedResult, contours_of, quantize, watershed

__version__ = "0.1.0"
