"""Statistical decision layer: exact sign tests and distance verdicts.

Two decision rules are used downstream, matching how the witnesses were
obtained:

* for a PRE-REGISTERED observable with values in {-1, 0, +1}, an exact
  binomial test on the +1/-1 cell counts (computed in log space, so
  p-values like 1e-3000 come out finite);
* for an observable OPTIMIZED on the data itself, no classical bound
  applies, so the rule compares the certified distance lower bound
  gamma / ||c||_2 against the expected sampling noise 1/sqrt(M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

LOG_HALF = math.log(0.5)


@dataclass
class TestVerdict:
    test: str
    statistic: float
    p_value: float | None
    log10_p: float | None
    decision: str  # "reject" | "fail-to-reject"
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "p_value_log10": self.log10_p,
            "decision": self.decision,
            "config": self.details,
        }


def log_binom_tail(n: int, k: int) -> float:
    """log P(X >= k) for X ~ Binomial(n, 1/2), exact in log space."""
    if k <= 0:
        return 0.0
    if k > n:
        return -math.inf
    js = np.arange(k, n + 1, dtype=float)
    log_terms = gammaln(n + 1) - gammaln(js + 1) - gammaln(n - js + 1) + n * LOG_HALF
    return float(logsumexp(log_terms))


def binomial_log_p(n_plus: int, n_minus: int, alternative: str = "two-sided") -> float:
    """log p-value of the fair-coin test on (n_plus, n_minus) counts.

    alternative "greater"/"less" test for an excess of +1 / of -1;
    "two-sided" doubles the larger-count tail (capped at p = 1).
    """
    n = n_plus + n_minus
    if n == 0:
        return 0.0
    if alternative == "greater":
        return log_binom_tail(n, n_plus)
    if alternative == "less":
        return log_binom_tail(n, n_minus)
    if alternative != "two-sided":
        raise ValueError("alternative must be 'two-sided', 'greater' or 'less'")
    return min(0.0, math.log(2) + log_binom_tail(n, max(n_plus, n_minus)))


def binomial_sign_test(
    emp,
    obs,
    alternative: str = "two-sided",
    alpha: float = 0.05,
) -> TestVerdict:
    """Exact fair-coin test of a {-1, 0, +1}-valued observable's mean.

    Counts falling in +1 cells are heads, counts in -1 cells tails; zero
    cells are ignored.  The p-value is exact (no normal approximation) and
    reported in log10 so extreme imbalances do not underflow.
    """
    values = obs.values
    rounded = np.rint(values)
    if not np.array_equal(rounded, values) or np.abs(rounded).max(initial=0) > 1:
        raise ValueError("sign test needs an observable with values in {-1, 0, +1}")
    counts = np.asarray(emp.counts)
    n_plus = int(counts[rounded == 1].sum())
    n_minus = int(counts[rounded == -1].sum())
    log_p = binomial_log_p(n_plus, n_minus, alternative)
    p = math.exp(log_p) if log_p > -700 else 0.0
    degenerate = n_plus + n_minus == 0
    statistic = (n_plus - n_minus) / emp.M if emp.M else 0.0
    return TestVerdict(
        test=f"binomial-sign[{obs.name or 'observable'}]",
        statistic=statistic,
        p_value=p,
        log10_p=log_p / math.log(10),
        decision="fail-to-reject" if (degenerate or p >= alpha) else "reject",
        details={
            "n_plus": n_plus,
            "n_minus": n_minus,
            "alternative": alternative,
            "alpha": alpha,
            "degenerate": degenerate,
        },
    )


def sampling_threshold(
    M: int,
    outcome_count: int | None = None,
    *,
    calibrate: bool = False,
    reference=None,
    reps: int = 50,
    seed=None,
) -> float:
    """Expected Euclidean distance between true and M-sample frequencies.

    The baseline estimate is 1/sqrt(M).  With calibrate=True the threshold
    is measured by Monte Carlo instead: `reps` multinomial draws of size M
    from `reference` (uniform over `outcome_count` cells when omitted),
    averaging ||phat - p||_2.
    """
    if M < 1:
        raise ValueError("M must be positive")
    if not calibrate:
        return 1.0 / math.sqrt(M)
    if reference is None:
        if outcome_count is None:
            raise ValueError("calibration needs a reference or an outcome count")
        reference = np.full(outcome_count, 1.0 / outcome_count)
    reference = np.asarray(reference, dtype=float)
    rng = np.random.default_rng(seed)
    dists = [
        np.linalg.norm(rng.multinomial(M, reference) / M - reference)
        for _ in range(reps)
    ]
    return float(np.mean(dists))


def distance_verdict(cert, emp, multiple: float = 3.0, threshold: float | None = None) -> TestVerdict:
    """Compare the certified distance bound gamma/||c|| with sampling noise.

    Rejects class membership when the bound exceeds `multiple` times the
    sampling threshold; gamma = 0 therefore never rejects.  The raw ratio
    is always reported alongside the decision.
    """
    norm = cert.c_norm()
    ratio = float(cert.gamma) / norm if norm > 0 else 0.0
    if threshold is None:
        threshold = sampling_threshold(emp.M)
    reject = ratio > multiple * threshold
    return TestVerdict(
        test="certified-distance",
        statistic=ratio,
        p_value=None,
        log10_p=None,
        decision="reject" if reject else "fail-to-reject",
        details={
            "gamma": float(cert.gamma),
            "c_norm": norm,
            "threshold": threshold,
            "multiple": multiple,
            "M": emp.M,
        },
    )
