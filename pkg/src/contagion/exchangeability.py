"""Sequence symmetries of trait-mixture models and tests built on them.

A mixture of stationary two-state Markov chains assigns equal probability
to any two sequences sharing the initial symbol and the per-pair transition
counts (partial exchangeability).  Which JOINT sequence probabilities must
coincide then depends on how the two actors are coupled, and the pattern of
satisfied equalities distinguishes four model structures:

1. independent      -- each actor mixes its own chains; P(A,B) is invariant
                       under reordering A and B within their classes
                       independently;
2. a-influences-b   -- B's transitions may read A's previous action;
3. joint-chain      -- the PAIR (A_t, B_t) is a mixture of four-state
                       chains, so only joint reorderings are allowed;
4. b-influences-a   -- mirror of 2: A reacts to B while B's own sequence
                       remains a plain chain mixture.

Variants 2 and 4 get their equality sets from the factorization itself:
two outcomes are equivalent exactly when their extreme-point probability
polynomials are identical, which is decided by exact coefficient
comparison rather than hand-derived rules.

The empirical check conditions each implied equality P(o) = P(o') on the
total count of the pair and applies the exact fair-coin test; the report
aggregates with a Bonferroni correction (conservative, suited to scanning
many equalities for a rejection).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from itertools import combinations

from .models import (
    ModelClass,
    enumerate_sequences,
    marginal_poly,
    outcome_bits,
    outcome_index,
    transition_counts,
)
from .poly import VarSet
from .stats import binomial_log_p


class ModelVariant(IntEnum):
    INDEPENDENT = 1
    A_INFLUENCES_B = 2
    JOINT_CHAIN = 3
    B_INFLUENCES_A = 4


@dataclass(frozen=True)
class PEClass:
    """Sequences sharing an initial symbol and transition counts."""

    key: tuple  # (initial, flattened transition counts)
    members: tuple  # sequences, in integer order


def pe_classes(T: int) -> list:
    """Partition of all 2^T sequences into partial-exchangeability classes."""
    if T < 1:
        raise ValueError("T must be at least 1")
    groups: dict = {}
    for seq in enumerate_sequences(T):
        tc = transition_counts(seq)
        key = (tc.initial, tc.f)
        groups.setdefault(key, []).append(seq)
    out = [PEClass(key, tuple(members)) for key, members in groups.items()]
    out.sort(key=lambda c: c.members[0])
    return out


def _classes_from_keys(keys: list) -> list:
    groups: dict = {}
    for idx, key in enumerate(keys):
        groups.setdefault(key, []).append(idx)
    return sorted(groups.values(), key=lambda g: g[0])


def _mirror_poly_keys(T: int) -> list:
    """Equality keys for the b-influences-a factorization (variant 4)."""
    names = ("b0", "bp", "bm", "a0", "a00", "a01", "a10", "a11")
    varset = VarSet(names)
    keys = []
    for idx in range(1 << (2 * T)):
        a, b = outcome_bits(idx, T)
        p = marginal_poly(b, varset, "b")
        x0 = varset.var("a0")
        p = p * (x0 if a[0] == 0 else (1 - x0))
        for t in range(1, T):
            rate = varset.var(f"a{a[t - 1]}{b[t - 1]}")
            p = p * (rate if a[t] == 1 else (1 - rate))
        keys.append(frozenset(p.terms.items()))
    return keys


def jpe_classes(variant: ModelVariant, T: int) -> list:
    """Groups of outcome indices with identical probability in the variant."""
    variant = ModelVariant(variant)
    n = 1 << (2 * T)
    if variant is ModelVariant.INDEPENDENT:
        side = {}
        for cls in pe_classes(T):
            for i, seq in enumerate(cls.members):
                side[seq] = (cls.key,)
        keys = []
        for idx in range(n):
            a, b = outcome_bits(idx, T)
            keys.append((side[a], side[b]))
        return _classes_from_keys(keys)
    if variant is ModelVariant.JOINT_CHAIN:
        keys = []
        for idx in range(n):
            a, b = outcome_bits(idx, T)
            pair = tuple(zip(a, b))
            counts: dict = {}
            for prev, nxt in zip(pair, pair[1:]):
                counts[(prev, nxt)] = counts.get((prev, nxt), 0) + 1
            keys.append((pair[0], tuple(sorted(counts.items()))))
        return _classes_from_keys(keys)
    if variant is ModelVariant.A_INFLUENCES_B:
        fv = ModelClass.bounded_influence(T, -1, 1).f_vector()
        keys = [frozenset(f.terms.items()) for f in fv]
        return _classes_from_keys(keys)
    return _classes_from_keys(_mirror_poly_keys(T))


def jpe_equalities(variant: ModelVariant, T: int) -> list:
    """All implied pairwise equalities P(o) = P(o'), as index pairs."""
    if T < 2:
        raise ValueError("joint equalities need T >= 2")
    pairs = []
    for group in jpe_classes(variant, T):
        pairs.extend(combinations(group, 2))
    pairs.sort()
    return pairs


def implies_equality(variant: ModelVariant, outcome_a: int, outcome_b: int, T: int) -> bool:
    """Whether the variant forces P(outcome_a) = P(outcome_b)."""
    for group in jpe_classes(variant, T):
        if outcome_a in group:
            return outcome_b in group
    return False


@dataclass
class JPEReport:
    variant: int
    T: int
    n_pairs: int
    pairs: list  # dicts: indices, counts, p_value, deviation
    min_adjusted_p: float
    alpha: float
    decision: str
    details: dict = field(default_factory=dict)

    def violated(self, threshold: float | None = None) -> list:
        cut = self.alpha if threshold is None else threshold
        return [
            rec
            for rec in self.pairs
            if rec["adjusted_p"] is not None and rec["adjusted_p"] < cut
        ]

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "T": self.T,
            "n_pairs": self.n_pairs,
            "pairs": self.pairs,
            "min_adjusted_p": self.min_adjusted_p,
            "alpha": self.alpha,
            "decision": self.decision,
            **self.details,
        }


def jpe_test(emp, variant: ModelVariant, alpha: float = 0.05) -> JPEReport:
    """Exact per-equality fair-coin tests with a Bonferroni aggregate.

    Each implied equality is tested on the two cells' counts alone; a pair
    with no observations passes vacuously with p = 1.
    """
    variant = ModelVariant(variant)
    pairs = jpe_equalities(variant, emp.T)
    n_tests = len(pairs)
    records = []
    min_adj = 1.0
    for i, j in pairs:
        ni, nj = int(emp.counts[i]), int(emp.counts[j])
        log_p = binomial_log_p(ni, nj, "two-sided")
        p = math.exp(log_p) if log_p > -700 else 0.0
        adj = min(1.0, p * n_tests)
        min_adj = min(min_adj, adj)
        records.append(
            {
                "indices": [i, j],
                "counts": [ni, nj],
                "deviation": (ni - nj) / emp.M if emp.M else 0.0,
                "p_value": p,
                "log10_p": log_p / math.log(10),
                "adjusted_p": adj,
            }
        )
    decision = "reject" if min_adj < alpha else "fail-to-reject"
    return JPEReport(
        variant=int(variant),
        T=emp.T,
        n_pairs=n_tests,
        pairs=records,
        min_adjusted_p=min_adj,
        alpha=alpha,
        decision=decision,
        details={"M": emp.M},
    )
