"""Homogeneous Poisson process laboratory: exact laws, simulators and their checks."""

from .dist_core import (
    BinomialParams,
    MultinomialParams,
    Pmf,
    PoissonParams,
    binomial_pmf,
    binomial_pmf_table,
    conditional_subcount_law,
    multinomial_pmf,
    point_mass,
    poisson_limit_sweep,
    poisson_pmf,
    poisson_pmf_table,
    tv_distance,
)
from .process_sim import EventSequence, ProcessConfig, Subdivision, count_in, empirical_pmf, generate, simulate
from .simplex_geom import (
    OrthantSpec,
    VolumeEstimate,
    conditional_event_density,
    orthant_volume_exact,
    orthant_volume_mc,
    orthant_volume_recursive,
)
from .stat_tests import CountHistogram, GofResult, chi_square_gof, empirical_moments, regularized_gamma_q

__version__ = "0.1.0"
