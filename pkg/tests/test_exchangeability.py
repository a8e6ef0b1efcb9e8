"""Sequence symmetries, the four model variants, and the symmetry test."""

import numpy as np
import pytest

from contagion.exchangeability import (
    ModelVariant,
    implies_equality,
    jpe_classes,
    jpe_equalities,
    jpe_test,
    pe_classes,
)
from contagion.models import ModelClass, outcome_index, point_mass_distribution
from contagion.simulate import EmpiricalDistribution, InfluenceModel, exact_distribution

W, X, Y, Z = (1, 0, 0, 0), (0, 0, 1, 0), (0, 1, 0, 0), (0, 0, 0, 1)


def test_pe_classes_partition():
    for T in (1, 2, 3, 4, 5):
        classes = pe_classes(T)
        assert sum(len(c.members) for c in classes) == 2**T
        seen = set()
        for c in classes:
            seen.update(c.members)
        assert len(seen) == 2**T


def test_pe_classes_t4():
    classes = pe_classes(4)
    assert len(classes) == 14
    sizes = sorted(len(c.members) for c in classes)
    assert sizes == [1] * 12 + [2, 2]
    by_member = {m: c.members for c in classes for m in c.members}
    assert set(by_member[X]) == {X, Y}
    assert by_member[W] == (W,)  # alone among the four example sequences
    assert by_member[Z] == (Z,)


def test_pe_classes_t2_all_singletons():
    assert all(len(c.members) == 1 for c in pe_classes(2))


def test_variant_equality_table():
    """The four sequence pairs separate the four coupling structures."""
    cases = [
        ((X, X), (Y, Y), {1, 2, 3, 4}),
        ((W, X), (W, Y), {1, 4}),
        ((X, X), (X, Y), {1}),
        ((Z, X), (Z, Y), {1, 2}),
    ]
    for left, right, expect in cases:
        got = {
            int(v)
            for v in ModelVariant
            if implies_equality(v, outcome_index(*left), outcome_index(*right), 4)
        }
        assert got == expect, (left, right, got, expect)


def test_variant1_spans_the_full_kernel():
    """Pairwise symmetries of the independent variant span all 60 kernel
    dimensions at T=4 (an experiment, reported rather than assumed)."""
    groups = jpe_classes(ModelVariant.INDEPENDENT, 4)
    spanned = 256 - len(groups)
    assert spanned == 60
    assert len(jpe_equalities(ModelVariant.INDEPENDENT, 4)) == 72


def test_variant_class_counts():
    assert len(jpe_classes(ModelVariant.A_INFLUENCES_B, 4)) == 236
    assert len(jpe_classes(ModelVariant.B_INFLUENCES_A, 4)) == 236
    assert len(jpe_classes(ModelVariant.JOINT_CHAIN, 4)) == 244


def test_variant1_equalities_hold_for_random_members():
    mc = ModelClass.non_causal(4)
    rng = np.random.default_rng(4)
    pairs = jpe_equalities(ModelVariant.INDEPENDENT, 4)
    for _ in range(50):
        p = point_mass_distribution(mc, rng.uniform(size=6))
        for i, j in pairs:
            assert abs(p[i] - p[j]) < 1e-12


def test_variant3_equalities_hold_for_joint_chains():
    """Every joint-chain equality holds for explicitly enumerated four-state
    chain mixtures (two random components)."""
    rng = np.random.default_rng(6)
    T = 4
    pairs = jpe_equalities(ModelVariant.JOINT_CHAIN, T)

    def joint_chain_distribution():
        init = rng.dirichlet(np.ones(4))
        trans = rng.dirichlet(np.ones(4), size=4)
        p = np.zeros(1 << (2 * T))
        for idx in range(1 << (2 * T)):
            a = [(idx >> (2 * T - 1 - t)) & 1 for t in range(T)]
            b = [(idx >> (T - 1 - t)) & 1 for t in range(T)]
            states = [2 * ai + bi for ai, bi in zip(a, b)]
            v = init[states[0]]
            for s0, s1 in zip(states, states[1:]):
                v *= trans[s0][s1]
            p[idx] = v
        return p

    mix = 0.3 * joint_chain_distribution() + 0.7 * joint_chain_distribution()
    for i, j in pairs:
        assert abs(mix[i] - mix[j]) < 1e-12


def test_variant3_is_coarser_than_variant1_on_diagonal_pairs():
    # joint-chain symmetries are a subset of the independent ones
    pairs3 = set(jpe_equalities(ModelVariant.JOINT_CHAIN, 4))
    pairs1 = set(jpe_equalities(ModelVariant.INDEPENDENT, 4))
    assert pairs3 <= pairs1


# ---------------------------------------------------------------------------
# the empirical symmetry test


def test_jpe_test_on_null_samples_is_calibrated():
    """Type-I control: counts from a true member rarely reject."""
    mc = ModelClass.non_causal(4)
    rng = np.random.default_rng(30)
    rejections = 0
    trials = 40
    for _ in range(trials):
        p = point_mass_distribution(mc, rng.uniform(size=6))
        counts = rng.multinomial(10_000, p)
        emp = EmpiricalDistribution(4, counts)
        report = jpe_test(emp, ModelVariant.INDEPENDENT, alpha=0.05)
        rejections += report.decision == "reject"
    assert rejections <= 2  # expect ~zero given conservative aggregation


def test_jpe_test_detects_delayed_influence():
    p = exact_distribution(InfluenceModel("delayed", 0.5))
    counts = np.rint(np.asarray(p) * 400_000).astype(np.int64)
    emp = EmpiricalDistribution(4, counts)
    report = jpe_test(emp, ModelVariant.INDEPENDENT)
    assert report.decision == "reject"
    assert report.min_adjusted_p < 1e-10
    # a specific broken symmetry: same A = w, partner sequence reordered
    i, j = outcome_index(W, X), outcome_index(W, Y)
    rec = next(r for r in report.pairs if r["indices"] == sorted([i, j]))
    assert rec["adjusted_p"] < 1e-6


def test_jpe_vacuous_pair_passes():
    counts = np.zeros(256, dtype=np.int64)
    counts[0] = 50  # all mass on one self-symmetric outcome
    emp = EmpiricalDistribution(4, counts)
    report = jpe_test(emp, ModelVariant.INDEPENDENT)
    assert report.decision == "fail-to-reject"
    assert all(r["p_value"] == 1.0 for r in report.pairs if sum(r["counts"]) == 0)


def test_jpe_report_json():
    counts = np.zeros(256, dtype=np.int64)
    counts[1] = 10
    counts[2] = 12
    emp = EmpiricalDistribution(4, counts)
    doc = jpe_test(emp, ModelVariant.INDEPENDENT).to_json()
    assert doc["variant"] == 1 and doc["n_pairs"] == 72
    assert {"indices", "counts", "p_value"} <= set(doc["pairs"][0])
