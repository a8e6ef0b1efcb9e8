"""Model classes for dyadic binary action sequences with hidden static traits.

Two actors emit one bit per time step for T steps.  Conditioned on hidden
traits (and on the presence of a directed tie), each admissible joint
distribution is a mixture over "extreme points": parameter settings where
both actors follow fixed stationary transition rules.  An extreme point's
probability of a given joint outcome is a polynomial in the parameters, and
those polynomials (together with the affine constraints cutting out the
parameter box) are everything the optimization layers need.

Parameter layouts
-----------------
non-causal (6 variables):
    a0 = P(first A symbol is 0)        b0 = P(first B symbol is 0)
    ap = P(A flips 0 -> 1 per step)    bp = P(B flips 0 -> 1)
    am = P(A flips 1 -> 0 per step)    bm = P(B flips 1 -> 0)

bounded-influence (8 variables):
    a0, ap, am, b0 as above, plus for prev in {0,1} and partner in {0,1}:
    b<prev><partner> = P(B_t = 1 | B_{t-1} = prev, A_{t-1} = partner)
    The per-stratum treatment effect b<prev>1 - b<prev>0 is constrained to
    [delta_lower, delta_upper] for both prev values.

Outcome indexing: the pair (A_1..A_T, B_1..B_T) maps to the integer whose
binary digits are A_1 ... A_T B_1 ... B_T (A_1 most significant), giving a
linear index in [0, 2^(2T)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .poly import Polynomial, VarSet

NONCAUSAL_NAMES = ("a0", "ap", "am", "b0", "bp", "bm")
DELTA_NAMES = ("a0", "ap", "am", "b0", "b00", "b01", "b10", "b11")


# ---------------------------------------------------------------------------
# sequences and outcome indexing


def seq_to_int(bits) -> int:
    """Bit sequence (first symbol most significant) -> integer."""
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def int_to_seq(v: int, T: int) -> tuple:
    return tuple((v >> (T - 1 - t)) & 1 for t in range(T))


def outcome_index(a_bits, b_bits) -> int:
    T = len(a_bits)
    if len(b_bits) != T:
        raise ValueError("A and B sequences must have equal length")
    return (seq_to_int(a_bits) << T) | seq_to_int(b_bits)


def outcome_bits(index: int, T: int) -> tuple:
    return int_to_seq(index >> T, T), int_to_seq(index & ((1 << T) - 1), T)


@dataclass(frozen=True)
class OutcomeIndex:
    """A joint outcome: one length-T bit sequence per actor."""

    a: tuple
    b: tuple

    @property
    def index(self) -> int:
        return outcome_index(self.a, self.b)

    @classmethod
    def from_index(cls, index: int, T: int) -> "OutcomeIndex":
        a, b = outcome_bits(index, T)
        return cls(a, b)


@dataclass(frozen=True)
class TransitionCounts:
    """Initial symbol and the 2x2 transition count matrix of a bit sequence."""

    initial: int
    f: tuple  # ((f00, f01), (f10, f11))

    @property
    def total(self) -> int:
        return sum(self.f[0]) + sum(self.f[1])


def transition_counts(seq) -> TransitionCounts:
    seq = tuple(int(b) for b in seq)
    if not seq:
        raise ValueError("empty sequence has no transition counts")
    f = [[0, 0], [0, 0]]
    for prev, nxt in zip(seq, seq[1:]):
        f[prev][nxt] += 1
    return TransitionCounts(seq[0], (tuple(f[0]), tuple(f[1])))


# ---------------------------------------------------------------------------
# extreme-point polynomials


def marginal_poly(seq, varset: VarSet, side: str = "a") -> Polynomial:
    """Probability of one actor's sequence under fixed transition rules.

    For side "a" this is
        a0^(1-s1) (1-a0)^s1 * ap^F01 * am^F10 * (1-ap)^F00 * (1-am)^F11,
    and side "b" uses (b0, bp, bm); side "b" is meaningful only for the
    non-causal layout, where B ignores A.
    """
    if side not in ("a", "b"):
        raise ValueError("side must be 'a' or 'b'")
    init, up, down = (("a0", "ap", "am") if side == "a" else ("b0", "bp", "bm"))
    counts = transition_counts(seq)
    x0 = varset.var(init)
    p = x0 if counts.initial == 0 else (1 - x0)
    fmat = counts.f
    xu, xd = varset.var(up), varset.var(down)
    p = p * (1 - xu) ** fmat[0][0] * xu ** fmat[0][1]
    p = p * xd ** fmat[1][0] * (1 - xd) ** fmat[1][1]
    return p


def _influenced_side_poly(b_seq, a_seq, varset: VarSet) -> Polynomial:
    """B-side factor when B's transitions may depend on A's previous action."""
    b0 = varset.var("b0")
    p = b0 if b_seq[0] == 0 else (1 - b0)
    for t in range(1, len(b_seq)):
        rate = varset.var(f"b{b_seq[t - 1]}{a_seq[t - 1]}")
        p = p * (rate if b_seq[t] == 1 else (1 - rate))
    return p


# ---------------------------------------------------------------------------
# model classes


class ModelClass:
    """A family of joint-sequence distributions closed under trait mixing.

    Instances are immutable; the generator list and extreme-point
    polynomial vector are computed once and cached.
    """

    def __init__(self, T: int, delta=None):
        if T < 1:
            raise ValueError("T must be at least 1")
        if delta is not None:
            dl, du = delta
            if dl > du:
                raise ValueError("delta_lower must not exceed delta_upper")
            if dl < -1 or du > 1:
                raise ValueError("treatment-effect bounds must lie in [-1, 1]")
            delta = (dl, du)
        self.T = T
        self.delta = delta
        self.varset = VarSet(NONCAUSAL_NAMES if delta is None else DELTA_NAMES)
        self._generators = None
        self._f_vector = None
        self._f_vector_float = None

    @classmethod
    def non_causal(cls, T: int) -> "ModelClass":
        """Both actors evolve independently given their own traits."""
        return cls(T)

    @classmethod
    def bounded_influence(cls, T: int, delta_lower, delta_upper) -> "ModelClass":
        """B's per-stratum response to A's previous action lies in an interval."""
        return cls(T, (delta_lower, delta_upper))

    @property
    def kind(self) -> str:
        return "non-causal" if self.delta is None else "bounded-influence"

    @property
    def n_outcomes(self) -> int:
        return 1 << (2 * self.T)

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "T": self.T,
            "delta": None if self.delta is None else [float(d) for d in self.delta],
            "varset": list(self.varset.names),
        }

    @classmethod
    def from_descriptor(cls, d: dict) -> "ModelClass":
        if d["delta"] is None:
            return cls.non_causal(d["T"])
        return cls.bounded_influence(d["T"], d["delta"][0], d["delta"][1])

    # -- constraint generators ------------------------------------------

    def generators(self) -> list:
        """Affine polynomials g_i with the parameter set K = {x : g_i(x) >= 0}.

        Non-causal: 12 box constraints (x and 1-x per variable).  With
        treatment bounds: 16 box constraints plus the 4 affine constraints
        keeping each per-stratum effect inside [delta_lower, delta_upper].
        """
        if self._generators is None:
            gens = []
            for name in self.varset.names:
                x = self.varset.var(name)
                gens.append(x)
                gens.append(1 - x)
            if self.delta is not None:
                dl, du = self.delta
                for prev in (0, 1):
                    effect = self.varset.var(f"b{prev}1") - self.varset.var(f"b{prev}0")
                    gens.append(effect - dl)
                    gens.append(du - effect)
            self._generators = gens
        return list(self._generators)

    # -- extreme-point probability polynomials ---------------------------

    def joint_extreme_poly(self, outcome: OutcomeIndex) -> Polynomial:
        """Probability polynomial f for one joint outcome (exact coefficients)."""
        if len(outcome.a) != self.T or len(outcome.b) != self.T:
            raise ValueError(f"outcome sequences must have length T={self.T}")
        pa = marginal_poly(outcome.a, self.varset, "a")
        if self.delta is None:
            return pa * marginal_poly(outcome.b, self.varset, "b")
        return pa * _influenced_side_poly(outcome.b, outcome.a, self.varset)

    def f_vector(self) -> list:
        """joint_extreme_poly for every outcome, in linear index order."""
        if self._f_vector is None:
            self._f_vector = [
                self.joint_extreme_poly(OutcomeIndex.from_index(i, self.T))
                for i in range(self.n_outcomes)
            ]
        return list(self._f_vector)

    def f_vector_float(self) -> list:
        if self._f_vector_float is None:
            self._f_vector_float = [p.as_float() for p in self.f_vector()]
        return list(self._f_vector_float)

    # -- sampling the parameter set --------------------------------------

    def sample_points(self, n: int, rng=None) -> np.ndarray:
        """n random parameter points inside K, one row per point.

        Box variables are uniform on [0, 1]; under treatment bounds, each
        b<prev>1 is drawn uniformly from the interval allowed by the drawn
        b<prev>0, so every returned point satisfies all generators.
        """
        rng = np.random.default_rng(rng)
        pts = rng.uniform(size=(n, self.varset.arity))
        if self.delta is not None:
            dl, du = float(self.delta[0]), float(self.delta[1])
            for prev in (0, 1):
                j0 = self.varset.index[f"b{prev}0"]
                j1 = self.varset.index[f"b{prev}1"]
                lo = np.maximum(0.0, pts[:, j0] + dl)
                hi = np.minimum(1.0, pts[:, j0] + du)
                ok = lo <= hi
                if not ok.all():
                    # Empty stratum interval: redraw base rate where needed.
                    bad = ~ok
                    lo_b = np.maximum(0.0, -du)
                    hi_b = np.minimum(1.0, 1.0 - dl)
                    pts[bad, j0] = rng.uniform(lo_b, hi_b, size=bad.sum())
                    lo = np.maximum(0.0, pts[:, j0] + dl)
                    hi = np.minimum(1.0, pts[:, j0] + du)
                pts[:, j1] = rng.uniform(lo, hi)
        return pts

    def __repr__(self):
        if self.delta is None:
            return f"ModelClass.non_causal(T={self.T})"
        return f"ModelClass.bounded_influence(T={self.T}, delta={self.delta})"


def enumerate_sequences(T: int):
    """All 2^T bit sequences of length T in integer order."""
    return [int_to_seq(v, T) for v in range(1 << T)]


def point_mass_distribution(mc: ModelClass, point) -> np.ndarray:
    """The distribution of a single extreme point: f evaluated at `point`."""
    return np.array([p.eval(point) for p in mc.f_vector_float()])


def exact_point_distribution(mc: ModelClass, point) -> list:
    """Same as point_mass_distribution but with Fraction arithmetic."""
    point = [Fraction(x) if not isinstance(x, Fraction) else x for x in point]
    return [p.eval(point) for p in mc.f_vector()]
