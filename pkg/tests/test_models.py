"""Model classes: marginal polynomials, joint extreme points, generators."""

from fractions import Fraction

import numpy as np
import pytest

from _oracles import chain_pair_distribution
from contagion.models import (
    ModelClass,
    OutcomeIndex,
    marginal_poly,
    outcome_bits,
    outcome_index,
    transition_counts,
)
from contagion.poly import VarSet


def test_transition_counts():
    tc = transition_counts((0, 0, 1, 0))
    assert tc.initial == 0 and tc.f == ((1, 1), (1, 0))
    # partially exchangeable partner has identical counts
    assert transition_counts((0, 1, 0, 0)) == tc
    assert transition_counts((1, 1, 1, 1)).f == ((0, 0), (0, 3))
    assert transition_counts((1, 1, 1, 1)).initial == 1
    with pytest.raises(ValueError):
        transition_counts(())


def test_outcome_indexing_round_trip():
    for idx in range(256):
        a, b = outcome_bits(idx, 4)
        assert outcome_index(a, b) == idx
        o = OutcomeIndex.from_index(idx, 4)
        assert o.index == idx


def test_marginal_poly_examples():
    vs = ModelClass.non_causal(3).varset
    p = marginal_poly((0, 0, 1), vs, "a")
    a0, ap = vs.var("a0"), vs.var("ap")
    assert p == a0 * (1 - ap) * ap
    assert marginal_poly((0, 0, 0), vs, "a") == a0 * (1 - ap) ** 2
    assert marginal_poly((1,), vs, "a") == 1 - a0
    assert p.eval([Fraction(2, 3), Fraction(1, 2), 0, 0, 0, 0]) == Fraction(1, 6)


def test_partial_exchangeability_of_marginals():
    vs = ModelClass.non_causal(4).varset
    assert marginal_poly((0, 0, 1, 0), vs, "a") == marginal_poly((0, 1, 0, 0), vs, "a")


def test_joint_extreme_product_form():
    mc = ModelClass.non_causal(2)
    vs = mc.varset
    f = mc.joint_extreme_poly(OutcomeIndex((0, 0), (0, 0)))
    expected = vs.var("a0") * (1 - vs.var("ap")) * vs.var("b0") * (1 - vs.var("bp"))
    assert f == expected


@pytest.mark.parametrize("T", [2, 3, 4])
@pytest.mark.parametrize("delta", [None, (0.0, 0.0), (-0.3, 0.5)])
def test_normalization_identity(T, delta):
    mc = ModelClass(T, delta)
    total = mc.varset.zero()
    for f in mc.f_vector():
        total = total + f
    assert total == mc.varset.one()


def test_generator_counts_and_order():
    mc = ModelClass.non_causal(4)
    gens = mc.generators()
    assert len(gens) == 12
    vs = mc.varset
    assert gens[0] == vs.var("a0") and gens[1] == 1 - vs.var("a0")
    assert gens[10] == vs.var("bm") and gens[11] == 1 - vs.var("bm")
    assert all(g.degree() <= 1 for g in gens)

    mcd = ModelClass.bounded_influence(4, -0.25, 0.25)
    assert len(mcd.generators()) == 20
    assert all(g.degree() <= 1 for g in mcd.generators())


def test_zero_interval_forces_equal_rates():
    mc = ModelClass.bounded_influence(3, 0.0, 0.0)
    gens = mc.generators()
    vs = mc.varset
    effect0 = vs.var("b01") - vs.var("b00")
    assert gens[16] == effect0 and gens[17] == -effect0


def test_wide_interval_still_emits_treatment_rows():
    assert len(ModelClass.bounded_influence(3, -1, 1).generators()) == 20


def test_invalid_delta_interval():
    with pytest.raises(ValueError):
        ModelClass.bounded_influence(3, 0.5, 0.2)
    with pytest.raises(ValueError):
        ModelClass.bounded_influence(3, -2.0, 0.0)


def test_degenerate_interval_matches_non_causal():
    """Identifying b<prev>1 with b<prev>0 recovers the independent form."""
    mc = ModelClass.bounded_influence(3, 0.0, 0.0)
    nc = ModelClass.non_causal(3)
    rng = np.random.default_rng(5)
    for _ in range(20):
        a0, ap, am, b0, bp, bm = rng.uniform(size=6)
        x_delta = [a0, ap, am, b0, bp, bp, 1 - bm, 1 - bm]  # b00=b01=bp, b10=b11=1-bm
        x_nc = [a0, ap, am, b0, bp, bm]
        for fd, fn in zip(mc.f_vector_float(), nc.f_vector_float()):
            assert abs(fd.eval(x_delta) - fn.eval(x_nc)) < 1e-12


def test_nonnegative_on_box():
    rng = np.random.default_rng(1)
    for mc in (ModelClass.non_causal(3), ModelClass.bounded_influence(3, -0.5, 0.5)):
        pts = mc.sample_points(1000, rng)
        fv = mc.f_vector_float()
        for f in fv:
            vals = np.array([f.eval(x) for x in pts[:50]])
            assert (vals >= -1e-12).all() and (vals <= 1 + 1e-12).all()


def test_sample_points_satisfy_generators():
    mc = ModelClass.bounded_influence(4, -0.1, 0.3)
    pts = mc.sample_points(500, np.random.default_rng(2))
    for g in mc.generators():
        g = g.as_float()
        vals = np.array([g.eval(x) for x in pts[:100]])
        assert vals.min() >= -1e-12


@pytest.mark.parametrize("influenced", [False, True])
def test_brute_force_chain_oracle(influenced):
    """f-vector evaluation agrees with direct chain enumeration (T=3)."""
    T = 3
    mc = ModelClass.bounded_influence(T, -1, 1) if influenced else ModelClass.non_causal(T)
    rng = np.random.default_rng(42)
    for _ in range(50):
        point = rng.uniform(size=mc.varset.arity)
        params = dict(zip(mc.varset.names, point))
        oracle = chain_pair_distribution(T, params, influenced)
        fv = mc.f_vector_float()
        for f, want in zip(fv, oracle):
            assert abs(f.eval(point) - want) < 1e-12


def test_descriptor_round_trip():
    for mc in (ModelClass.non_causal(3), ModelClass.bounded_influence(4, -0.5, 0.25)):
        again = ModelClass.from_descriptor(mc.descriptor())
        assert again.T == mc.T and again.delta == (
            mc.delta if mc.delta is None else tuple(float(d) for d in mc.delta)
        )
