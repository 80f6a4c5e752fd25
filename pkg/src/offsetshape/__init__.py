"""Which singular points keep their shape under rotated-normal offsets."""

from .offset import OffsetParams, curvature_data, offset_points, offset_series
from .places import places_at
from .poly import parse_poly
from .predictor import classical_reference, comparison_table, predict
from .series import TruncSeries
from .shape import LocalShape, Place, Signature, local_shape, place_from_terms, signature

__all__ = [
    "LocalShape",
    "OffsetParams",
    "Place",
    "Signature",
    "TruncSeries",
    "classical_reference",
    "comparison_table",
    "curvature_data",
    "local_shape",
    "offset_points",
    "offset_series",
    "parse_poly",
    "place_from_terms",
    "places_at",
    "predict",
    "signature",
]
__version__ = "0.1.0"
