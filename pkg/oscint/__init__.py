"""
Trilinear oscillatory integrals of convolution type on the plane.
~~~~~~~~~~~~
"""

from .poly import BivarPoly, Rect, parse_poly, convolution_hessian, is_degenerate
from .newton import newton_polyhedron, predicted_decay
from .trilinear import CutoffSpec, assemble_grid, operator_norm, decay_sweep
from .algebraic import AlgebraicDomain, decompose_domain
from .sublevel import sublevel_norm, sublevel_sweep
from .config import ExperimentConfig
from .report import RunReport, emit, load_report
from .runner import run
from .utils import DotSon, get_logger, set_logger, set_level

from fractions import Fraction

__version__ = '1.0.0'
