"""Exact finite-scale constructions for Wasserstein mean dimension of induced systems."""

from .spaces import (
    DepthError,
    EmptySystemError,
    IePair,
    MetricSpace,
    SystemSpec,
    apply_map,
    bowen_distance,
    bowen_metric,
    build_space,
    gamma_m,
)
from .measures import DiscreteMeasure, pushforward
from .transport import w1, w1_circle, w1_cost, w_bowen, wnm
from .independence import IndependenceWindow, block_summary, standard_anchors, verify_independence
from .cubes import Box, BoxCover, FaceId, Interval, cover_order, is_separating, search_min_separating_order
from .entropy import PowerLawRegressor, entropy_estimate, rate_fit

__version__ = "0.1.0"
