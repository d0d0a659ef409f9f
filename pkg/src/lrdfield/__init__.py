"""Long-range dependent Gaussian random fields and their weighted Hermite functionals."""
from .covariance import CovarianceModel, SlowlyVarying, bessel, cauchy, power_law, triangular
from .errors import ApproximationWarning, LrdError
from .experiments import ExperimentPlan, McSummary, fit_rates, msd_experiment, qq_data, \
    reference_distance_experiment
from .fieldsim import FieldRealization, GridSpec, simulate
from .functionals import WeightFunction, additive_functional, discrepancy, normalize, riemann_functional
from .hermite import HermiteExpansion, expansion_coefficients, hermite_eval, hermite_rank
from .windows import lattice, make_window

__version__ = "0.1.0"
