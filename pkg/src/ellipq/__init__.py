"""Elliptic dynamical R-matrices from theta-function weight bases, with Bethe ansatz and qKZB tools."""
from .elliptic import EllipticParams, PhaseEvaluator, ThetaEngine
from .errors import *  # noqa: F401,F403
from .model import ModelConfig, enumerate_compositions
from .omega import OmegaEvaluator
from .residues import ContourSpec, pairing_matrix
from .rmatrix import RProvider, WeightBlockMatrix, fundamental_r, rblock
from .diffop import ShiftOperator, build_H, build_K, build_T
from .bethe import BetheSolution, CompletenessTask, bethe_psi, bethe_solve, bethe_verify, completeness_det
from .aba import LOperator, b_product_state, build_L
from .qkzb import JacksonIntegrand

__version__ = "0.1.0"
