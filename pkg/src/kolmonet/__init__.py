"""Explicit deep ReLU networks approximating solutions of Kolmogorov PDEs.

The networks are assembled weight by weight from Euler-Maruyama paths of the
associated SDE and averaged Monte Carlo style; see ``constructor``.
"""

from .calculus import compose, relu_identity, residual_step, weighted_sum
from .constructor import (
    ConstructionReport,
    RateConstants,
    build_mc_network,
    build_sample_network,
    calibrate,
    paper_constants,
    param_certificate,
    select_realization,
)
from .exceptions import ArchitectureError, CalibrationError, KolmonetError, NumericError, ShapeError
from .network import NeuralNetwork, architecture, param_count, realize, scale_shift_output
from .oracle import ErrorReport, ReferenceSolution, feynman_kac, lp_error, moment_of_measure
from .problems import PROBLEMS, make_problem
from .sde import (
    EulerConfig,
    KolmogorovProblem,
    Measure,
    NoiseRealization,
    brownian_moment,
    coupled_strong_error,
    diffusion_factor,
    euler_path,
    grid_projection,
)

__version__ = "0.1.0"
