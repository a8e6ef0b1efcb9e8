"""Statistical tests for influence in dyadic action sequences.

Given joint binary action sequences for pairs of linked actors, this
package decides whether the observed distribution can be explained by
hidden static traits alone (arbitrary homophily, no influence) and, when
it cannot, produces an algebraic certificate lower-bounding the influence
strength.  See the README for the full pipeline.
"""

from .equalities import Observable, c1, c2, expectation, null_space
from .exchangeability import ModelVariant, jpe_equalities, jpe_test, pe_classes
from .handelman import (
    Certificate,
    enumerate_basis,
    find_witness,
    gamma_by_degree,
    sequence_probability_bound,
    validate_certificate,
)
from .models import ModelClass, OutcomeIndex, marginal_poly, transition_counts
from .poly import Polynomial, VarSet
from .simulate import (
    EmpiricalDistribution,
    InfluenceModel,
    NetworkSimConfig,
    exact_distribution,
    simulate_copying,
    simulate_latent_homophily,
)
from .stats import binomial_sign_test, distance_verdict, sampling_threshold

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "EmpiricalDistribution",
    "InfluenceModel",
    "ModelClass",
    "ModelVariant",
    "NetworkSimConfig",
    "Observable",
    "OutcomeIndex",
    "Polynomial",
    "VarSet",
    "binomial_sign_test",
    "c1",
    "c2",
    "distance_verdict",
    "enumerate_basis",
    "exact_distribution",
    "expectation",
    "find_witness",
    "gamma_by_degree",
    "jpe_equalities",
    "jpe_test",
    "marginal_poly",
    "null_space",
    "pe_classes",
    "sampling_threshold",
    "sequence_probability_bound",
    "simulate_copying",
    "simulate_latent_homophily",
    "transition_counts",
    "validate_certificate",
]
