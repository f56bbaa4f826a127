"""webcurv: exact curvature computation for calibrated ordinary webs.

Decides whether a d-web given by explicit first integrals has maximal
rank, by building its tautological connection and evaluating the
curvature exactly at generic rational points.
"""

from .analysis import AnalysisResult, PointAnalysis, analyze, analyze_point
from .engine import WebDims, c, k0_of, pi_prime
from .errors import (
    DivisionByNonUnit,
    ExprSyntaxError,
    OrderExhausted,
    SingularAtPoint,
    WebCurvError,
    WebFileError,
)
from .expr import Binding, WebSpec, expr_to_str, parse_expr, parse_webfile
from .jets import Jet, JetContext, NilPoly, SamplePoint, jet_eval, sample_point

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "Binding",
    "DivisionByNonUnit",
    "ExprSyntaxError",
    "Jet",
    "JetContext",
    "NilPoly",
    "OrderExhausted",
    "PointAnalysis",
    "SamplePoint",
    "SingularAtPoint",
    "WebCurvError",
    "WebDims",
    "WebFileError",
    "WebSpec",
    "analyze",
    "analyze_point",
    "c",
    "expr_to_str",
    "jet_eval",
    "k0_of",
    "parse_expr",
    "parse_webfile",
    "pi_prime",
    "sample_point",
]
