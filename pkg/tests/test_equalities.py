"""Kernel computations and the two ready-made observables."""

import hashlib
from fractions import Fraction

import numpy as np
import pytest

from contagion.equalities import (
    C2_TABLE,
    Observable,
    c1,
    c2,
    coefficient_matrix,
    expectation,
    kernel_residual,
    null_space,
)
from contagion.models import ModelClass, outcome_index, point_mass_distribution
from contagion.simulate import InfluenceModel, exact_distribution


def test_kernel_dimensions_exact():
    assert null_space(ModelClass.non_causal(3)).dim == 0
    space60 = null_space(ModelClass.non_causal(4))
    assert space60.dim == 60 and space60.rank == 196
    shared = null_space(ModelClass.bounded_influence(4, -1, 1))
    assert shared.dim == 28 and shared.rank == 228


def test_kernel_dimensions_float_mode():
    assert null_space(ModelClass.non_causal(3), mode="float").dim == 0
    assert null_space(ModelClass.non_causal(4), mode="float").dim == 60
    assert null_space(ModelClass.bounded_influence(4, -1, 1), mode="float").dim == 28


def test_exact_basis_is_certified():
    """Every exact basis vector annihilates M over the integers."""
    mc = ModelClass.non_causal(4)
    space = null_space(mc)
    M, _ = coefficient_matrix(mc)
    Mo = M.astype(object)
    for v in space.basis:
        assert not any(Mo @ v.astype(object))
    # basis vectors have coprime integer entries
    from math import gcd

    for v in space.basis:
        g = 0
        for x in v:
            g = gcd(g, int(x))
        assert g == 1


def test_shared_kernel_inside_independent_kernel():
    nc = ModelClass.non_causal(4)
    M, _ = coefficient_matrix(nc)
    Mo = M.astype(object)
    for v in null_space(ModelClass.bounded_influence(4, -1, 1)).basis:
        assert not any(Mo @ v.astype(object))


def test_kernel_vectors_kill_expectations_by_sampling():
    mc = ModelClass.non_causal(4)
    space = null_space(mc)
    rng = np.random.default_rng(8)
    pts = rng.uniform(size=(100, 6))
    dists = np.array([point_mass_distribution(mc, x) for x in pts])
    for obs in space.basis_observables()[:10]:
        vals = dists @ obs.values
        assert np.abs(vals).max() < 1e-10


def test_row_space_vectors_do_not_vanish():
    mc = ModelClass.non_causal(4)
    M, _ = coefficient_matrix(mc)
    basis = np.array([v.astype(float) for v in null_space(mc).basis])
    rng = np.random.default_rng(9)
    for _ in range(5):
        v = rng.normal(size=256)
        v -= basis.T @ np.linalg.lstsq(basis.T, v, rcond=None)[0]  # kernel part out
        assert np.abs(M.astype(float) @ v).max() > 1e-6


# ---------------------------------------------------------------------------
# c1


def test_c1_values():
    obs = c1()
    assert obs[(0, 0, 1, 0), (0, 0, 1, 0)] == 1
    assert obs[(0, 0, 0, 0), (0, 0, 0, 0)] == 0
    assert obs[(0, 0, 1, 0), (0, 1, 0, 0)] == -1
    assert set(np.unique(obs.values)) <= {-1.0, 0.0, 1.0}
    assert int(np.abs(obs.values).sum()) == 48


def test_c1_in_kernel_exactly():
    assert kernel_residual(ModelClass.non_causal(4), c1()) == 0


def test_c1_vanishes_within_symmetry_classes():
    """Kernel membership is equivalent to summing to zero on every group of
    outcomes sharing a probability polynomial; singleton groups pin zeros."""
    from contagion.exchangeability import ModelVariant, jpe_classes

    obs = c1()
    for group in jpe_classes(ModelVariant.INDEPENDENT, 4):
        assert abs(sum(obs.values[i] for i in group)) < 1e-12
        if len(group) == 1:
            assert obs.values[group[0]] == 0


# ---------------------------------------------------------------------------
# c2


def test_c2_table_checksum():
    blob = ",".join(str(v) for row in C2_TABLE for v in row).encode()
    assert hashlib.sha256(blob).hexdigest() == (
        "0e5acb76fda24900b00757ce1127cde9c38342838ae3f892db5b383f3ef3d54c"
    )
    assert len(C2_TABLE) == 16 and all(len(r) == 16 for r in C2_TABLE)
    total = sum(abs(v) for row in C2_TABLE for v in row)
    assert total == 112


def test_c2_orientation():
    obs = c2()
    # row/column rule: sequences read with the first symbol least significant
    assert obs[(1, 0, 0, 0), (0, 0, 0, 0)] == C2_TABLE[1][0]
    assert obs[(0, 0, 0, 1), (1, 1, 0, 0)] == C2_TABLE[8][3]
    assert obs[(0, 0, 1, 1), (1, 0, 0, 0)] == C2_TABLE[12][1]


def test_c2_in_kernel_exactly():
    assert kernel_residual(ModelClass.non_causal(4), c2()) == 0


def test_c1_c2_annihilated_by_random_members():
    mc = ModelClass.non_causal(4)
    rng = np.random.default_rng(21)
    pts = rng.uniform(size=(1000, 6))
    dists = np.array([point_mass_distribution(mc, x) for x in pts])
    for obs in (c1(), c2()):
        vals = dists @ obs.values
        assert np.abs(vals).max() < 1e-10


# ---------------------------------------------------------------------------
# expectations under the influence models


@pytest.mark.parametrize("delta", [0, Fraction(1, 10), Fraction(1, 2), 1])
def test_exact_expectations(delta):
    delayed = exact_distribution(InfluenceModel("delayed", delta), exact=True)
    instant = exact_distribution(InfluenceModel("instant", delta), exact=True)
    assert expectation(c1(), delayed) == Fraction(-3, 16) * delta
    assert expectation(c2(), delayed) == Fraction(7, 16) * delta
    assert expectation(c1(), instant) == delta * (3 - delta**2) / 8


def test_expectation_is_dot_product():
    p = exact_distribution(InfluenceModel("delayed", 0.5))
    obs = c1()
    assert expectation(obs, p) == pytest.approx(float(obs.values @ p))


def test_observable_bounds_enforced():
    with pytest.raises(ValueError):
        Observable(4, np.full(256, 1.5))
    with pytest.raises(ValueError):
        Observable(4, np.zeros(17))


def test_observable_json_round_trip():
    obs = c2()
    again = Observable.from_json(obs.to_json())
    assert np.array_equal(again.values, obs.values) and again.T == 4
