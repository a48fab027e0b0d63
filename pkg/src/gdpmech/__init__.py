"""Gaussian differential privacy for multivariate releases.

Noise calibration for Gaussian and Laplace mechanisms, James-Stein
post-processing, analytic and simulated utility costs, and private
bootstrap chi-square tests for contingency tables.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .calibrate import (
    Method,
    NoiseCalibration,
    gaussian_sigma,
    laplace_b_freq,
    laplace_b_l1,
    laplace_b_universal,
    mu_from_laplace_b,
)
from .cost import (
    CostQuery,
    l2_cost_analytic,
    lr_cost_gaussian,
    lr_cost_laplace,
    monte_carlo_cost,
    re_crossover,
    relative_efficiency,
)
from .errors import (
    CalibrationError,
    ConfigurationError,
    ConvergenceError,
    DataError,
    DomainError,
    GDPMechError,
    SingularityError,
)
from .mechanisms import Mechanism, MechanismConfig, ReleaseRecord, release, truncate
from .private_tests import ContingencyTable, Decision, TestReport, gof_test, hom_test
from .sensitivity import (
    SensitivitySpec,
    bounded_mean_spec,
    centering_projection,
    custom_spec,
    frequency_table_spec,
    helmert_basis,
)
from .special import SeriesControl, lambert_w0, noncentral_chisq_inv_moment
from .tradeoff import (
    BiLaplace,
    Empirical,
    EpsDeltaDP,
    EpsDP,
    FreqLaplace,
    GaussianGDP,
    UniLaplace,
    dominates,
    empirical_tradeoff,
    eps_from_mu,
    mu_from_eps,
)
