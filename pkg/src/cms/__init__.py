"""Certified computations on presented compact metric spaces.

Exact dyadic arithmetic, presented spaces and names of points/sets/functions,
certified Frechet distances for curves and loops, convex-body geometry with
an isoperimetric demonstration, and an interval branch-and-bound optimizer.
"""

from .dyadic import Dyadic, DyadicInterval, dy, round_to, sqrt_enclosure, interval_max_metric
from .spaces import (
    unit_interval,
    circle,
    cantor,
    product,
    cube,
    covering_check,
    entropy_upper,
    parse_space_id,
)

__all__ = [
    "Dyadic",
    "DyadicInterval",
    "dy",
    "round_to",
    "sqrt_enclosure",
    "interval_max_metric",
    "unit_interval",
    "circle",
    "cantor",
    "product",
    "cube",
    "covering_check",
    "entropy_upper",
    "parse_space_id",
]
