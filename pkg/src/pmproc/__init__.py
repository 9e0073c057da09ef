"""Procrustes problem for projective measurements: optimisation, frame
reductions and numerical checks of the supporting inequalities."""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateRetraction, DomainError, InvalidDimension,  # noqa: F401
                     InvalidPermutation, ParseError, PMProcError, ResultsIOError, ShapeError,
                     SpectralDegeneracy, UnknownSelector)
from .frames import (ParsevalFrame, PartitionSearchResult, WeightList, build_weights,  # noqa: F401
                     canonical_frame, decomposition_residual, estimate_Fk, moment_bound_reference,
                     operator_norm, project_frame, search_partition, variance_matrix)
from .inequalities import (IneqVerdict, SeparableOperator, cauchy_integral_representation,  # noqa: F401
                           interpolation_bound, lieb_convexity, quadrature_inequality)
from .manifold import (KEstimate, OptConfig, OptTrace, ascend, estimate_K, retract,  # noqa: F401
                       riemannian_gradient)
from .quantum import (OutcomeDistribution, Subspace, apply_pm, biweighted_objective,  # noqa: F401
                      embed_pm, haar_unitary, objective, outcome_distribution, random_density,
                      stationarity_residual, weighted_objective)
from .randomization import (GaussianWeightSample, MCReport, TailReport, empirical_tail,  # noqa: F401
                            estimate_fourth_moment, sample_Lhat, variance_statistic, verify_factor3)
from .rng import make_rng  # noqa: F401
