"""Linear equalities satisfied by every distribution in a model class.

An observable c over joint outcomes has <c>_P = 0 for every P in the class
exactly when sum_o c_o f_o(x) vanishes identically, i.e. when c lies in the
kernel of the matrix M whose (monomial, outcome) entry is the coefficient
of that monomial in the outcome's extreme-point polynomial.  All entries of
M are integers, so the kernel can be pinned down exactly:

* a Gaussian elimination of M modulo a large prime certifies
  rank(M) >= rank_p(M), hence an upper bound on the kernel dimension;
* the mod-p reduced row echelon form is lifted entrywise back to small
  rationals, cleared to integer vectors, and each candidate is verified by
  an exact integer matrix-vector product.

When the verified vectors match the upper bound the kernel dimension is
exact, not a floating-point rank guess.  A float path (SVD) is provided
for larger instances.

Two observables are shipped ready-made for T = 4 horizons: ``c1`` built
from an alternation-synchrony indicator and ``c2`` tabulated as a 16 x 16
integer array.  Both lie in the non-causal kernel, take values in
{-1, 0, +1}, and respond with opposite strengths to delayed and instant
copying dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np
import scipy.linalg

from .models import ModelClass, int_to_seq
from .poly import grlex_key

_PRIMES = (2_147_483_647, 2_147_483_629, 2_147_483_587)


@dataclass
class Observable:
    """A bounded function of the joint outcome, as a vector of length 2^(2T)."""

    T: int
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != 1 << (2 * self.T):
            raise ValueError("observable length must be 2^(2T)")
        if np.abs(self.values).max(initial=0.0) > 1.0 + 1e-12:
            raise ValueError("observable entries must lie in [-1, 1]")

    def __getitem__(self, outcome) -> float:
        if isinstance(outcome, tuple) and len(outcome) == 2:
            from .models import outcome_index

            return float(self.values[outcome_index(*outcome)])
        return float(self.values[outcome])

    def to_json(self) -> dict:
        return {"T": self.T, "name": self.name, "values": [float(v) for v in self.values]}

    @classmethod
    def from_json(cls, d: dict) -> "Observable":
        return cls(d["T"], np.asarray(d["values"]), d.get("name", ""))


def expectation(obs: Observable, p):
    """<c>_p as a dot product; exact when both sides are exact."""
    values = obs.values
    if isinstance(p, np.ndarray):
        return float(values @ np.asarray(p, dtype=float))
    total = 0
    for v, pi in zip(values, p):
        if v:
            total += (Fraction(v) if isinstance(pi, Fraction) else v) * pi
    return total


# ---------------------------------------------------------------------------
# the coefficient matrix and its kernel


def coefficient_matrix(mc: ModelClass):
    """Integer matrix M with M[monomial, outcome] = coefficient, plus rows.

    Rows are the graded-lex-sorted monomials appearing in any outcome
    polynomial of the class.
    """
    fv = mc.f_vector()
    monomials = sorted({m for f in fv for m in f.terms}, key=grlex_key)
    index = {m: i for i, m in enumerate(monomials)}
    M = np.zeros((len(monomials), len(fv)), dtype=np.int64)
    for j, f in enumerate(fv):
        for m, c in f.terms.items():
            M[index[m], j] = int(c)
    return M, monomials


def _rref_mod_p(M: np.ndarray, p: int):
    """Reduced row echelon form of M over Z/p; returns (R, pivot columns)."""
    A = (M.astype(np.int64) % p).copy()
    m, n = A.shape
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.flatnonzero(A[row:, col])
        if len(nz) == 0:
            continue
        piv = row + nz[0]
        if piv != row:
            A[[row, piv]] = A[[piv, row]]
        A[row] = (A[row] * pow(int(A[row, col]), p - 2, p)) % p
        other = np.flatnonzero(A[:, col])
        other = other[other != row]
        if len(other):
            A[other] = (A[other] - np.outer(A[other, col], A[row])) % p
        pivots.append(col)
        row += 1
    return A[: len(pivots)], pivots


def _rational_lift(a: int, p: int):
    """Smallest rational n/d with n/d = a (mod p), via extended Euclid."""
    bound = isqrt(p // 2)
    r0, r1 = p, a % p
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if abs(t1) > bound or t1 == 0:
        raise ArithmeticError("rational reconstruction failed")
    return Fraction(r1, t1)


def _kernel_basis_exact(M: np.ndarray):
    """Certified integer kernel basis of an integer matrix.

    Raises ArithmeticError if the mod-p structure cannot be verified
    exactly (retry with the next prime handles unlucky primes).
    """
    last_err = None
    for p in _PRIMES:
        try:
            R, pivots = _rref_mod_p(M, p)
            rank_lower = len(pivots)
            free = [j for j in range(M.shape[1]) if j not in set(pivots)]
            basis = []
            Mo = M.astype(object)
            for f in free:
                entries = {f: Fraction(1)}
                for i, pc in enumerate(pivots):
                    v = int(R[i, f])
                    if v:
                        entries[pc] = -_rational_lift(v, p)
                den = 1
                for q in entries.values():
                    den = den * q.denominator // gcd(den, q.denominator)
                vec = np.zeros(M.shape[1], dtype=object)
                for j, q in entries.items():
                    vec[j] = int(q * den)
                g = 0
                for v in vec:
                    g = gcd(g, int(v))
                if g > 1:
                    vec = vec // g
                if any(Mo @ vec):
                    raise ArithmeticError("lifted kernel vector failed exact check")
                basis.append(vec.astype(np.int64))
            if len(basis) != M.shape[1] - rank_lower:
                raise ArithmeticError("kernel dimension mismatch")
            return basis, rank_lower
        except ArithmeticError as err:  # unlucky prime; try the next
            last_err = err
    raise ArithmeticError(f"exact kernel computation failed: {last_err}")


@dataclass
class EqualitySpace:
    """A basis of observables with <c>_P identically zero over the class."""

    model: dict
    dim: int
    basis: list  # integer vectors (exact mode) or float rows (float mode)
    exact: bool
    rank: int
    messages: list = field(default_factory=list)

    def basis_observables(self) -> list:
        out = []
        for i, v in enumerate(self.basis):
            scale = np.abs(v).max(initial=1)
            out.append(
                Observable(
                    int(self.model["T"]),
                    np.asarray(v, dtype=float) / float(scale),
                    name=f"kernel[{i}]",
                )
            )
        return out


def null_space(mc: ModelClass, mode: str = "exact") -> EqualitySpace:
    """Kernel of the class's coefficient matrix.

    mode "exact": certified integer basis (dimension is exact).
    mode "float": orthonormal SVD basis with relative cutoff 1e-9.
    """
    M, _ = coefficient_matrix(mc)
    if mode == "exact":
        basis, rank = _kernel_basis_exact(M)
        return EqualitySpace(mc.descriptor(), len(basis), basis, True, rank)
    if mode != "float":
        raise ValueError("mode must be 'exact' or 'float'")
    ns = scipy.linalg.null_space(M.astype(float), rcond=1e-9)
    basis = [ns[:, i] for i in range(ns.shape[1])]
    return EqualitySpace(mc.descriptor(), len(basis), basis, False, M.shape[1] - len(basis))


def kernel_residual(mc: ModelClass, obs: Observable):
    """max |M c| over monomial rows; exact 0 certifies membership.

    Exact for integer-valued observables, float otherwise.
    """
    M, _ = coefficient_matrix(mc)
    v = obs.values
    iv = np.rint(v).astype(np.int64)
    if np.array_equal(iv.astype(float), v):
        prod = M.astype(object) @ iv.astype(object)
        return max((abs(int(x)) for x in prod), default=0)
    return float(np.abs(M.astype(float) @ v).max(initial=0.0))


# ---------------------------------------------------------------------------
# ready-made observables (T = 4)


def c1() -> Observable:
    """Alternation-synchrony contrast (values in {-1, 0, +1}, T = 4).

    +1 when the middle two steps flip in lockstep (A2=B2 != A3=B3), -1 when
    they flip crosswise (A2=B3 != A3=B2), gated to 0 when both endpoints
    moved (A1 != A4 and B1 != B4).  Its mean vanishes for every
    independent-chains mixture, responds at -3 delta/16 to delayed copying
    and at +delta(3 - delta^2)/8 to instant copying.
    """
    values = np.zeros(256)
    for idx in range(256):
        a = int_to_seq(idx >> 4, 4)
        b = int_to_seq(idx & 15, 4)
        sync = a[1] == b[1] and a[2] == b[2] and a[1] != a[2]
        cross = a[1] == b[2] and a[2] == b[1] and a[1] != a[2]
        gate = 0 if (a[0] != a[3] and b[0] != b[3]) else 1
        values[idx] = (int(sync) - int(cross)) * gate
    return Observable(4, values, "c1")


# 16 x 16 integer table defining c2.  Rows index the A sequence and columns
# the B sequence, each read as a binary number with the FIRST symbol as the
# least significant bit (so A=(1,0,0,0) -> row 1, A=(0,0,0,1) -> row 8).
# This orientation is pinned by <c2> = 7 delta / 16 under delayed copying.
C2_TABLE = (
    (0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0),
    (0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0),
    (1, 1, -1, -1, 1, 1, 1, 1, -1, -1, -1, -1, 1, 1, 1, -1),
    (0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0),
    (-1, -1, 1, 1, -1, -1, -1, -1, 1, 1, 1, 1, -1, -1, -1, 1),
    (0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0),
    (0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 1, 0, 0),
    (0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0),
    (0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0, -1, 0, 1, 0, 0),
    (0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0),
    (0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 1, 0, 0),
    (-1, 1, 1, 1, -1, 1, 1, 1, -1, -1, -1, 1, 1, -1, -1, 1),
    (0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0),
    (1, -1, 1, -1, -1, -1, -1, -1, 1, 1, 1, 1, -1, -1, 1, -1),
    (0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 1, 0, 0),
    (0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0),
)


def _lsb_first(v: int, T: int = 4) -> int:
    return int(format(v, f"0{T}b")[::-1], 2)


def c2() -> Observable:
    """Tabulated contrast tuned against delayed copying (T = 4).

    Values come from C2_TABLE; like c1 its mean vanishes on every
    independent-chains mixture, but it responds at +7 delta/16 to delayed
    copying.
    """
    values = np.zeros(256)
    for idx in range(256):
        row = _lsb_first(idx >> 4)
        col = _lsb_first(idx & 15)
        values[idx] = C2_TABLE[row][col]
    return Observable(4, values, "c2")


CANNED_OBSERVABLES = {"c1": c1, "c2": c2}
