"""Sparse multivariate polynomials over a fixed, ordered variable set.

Monomials are exponent tuples indexed against a :class:`VarSet`, and a
polynomial is a dict mapping exponent tuples to coefficients.  Coefficients
may be exact (``int`` / ``fractions.Fraction``) or double precision floats;
exactness is inferred from the coefficient types and preserved through
arithmetic until a float enters, after which the result is float.

Polynomials are immutable after construction and safe to share between
threads.  Term order for iteration and printing is graded lexicographic, so
any downstream matrix built from ``sorted_terms`` is deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

# Relative magnitude below which float-mode coefficients are dropped during
# canonicalization.  Exact-mode polynomials drop only true zeros.
DROP_TOL = 1e-13

_EXACT_TYPES = (int, Fraction)


def grlex_key(mono: tuple) -> tuple:
    """Graded lexicographic sort key for an exponent tuple."""
    return (sum(mono), mono)


class VarSet:
    """An ordered, immutable collection of variable names.

    The order fixed here defines the meaning of every exponent tuple, so
    polynomials interoperate only when built over equal VarSets.
    """

    __slots__ = ("names", "index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names!r}")
        self.names = names
        self.index = {n: i for i, n in enumerate(names)}

    @property
    def arity(self) -> int:
        return len(self.names)

    def var(self, name: str) -> "Polynomial":
        """The variable `name` as a degree-1 polynomial with coefficient 1."""
        e = [0] * self.arity
        e[self.index[name]] = 1
        return Polynomial(self, {tuple(e): 1})

    def const(self, value) -> "Polynomial":
        return Polynomial(self, {(0,) * self.arity: value})

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.const(1)

    def __eq__(self, other):
        return isinstance(other, VarSet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VarSet({', '.join(self.names)})"


class Polynomial:
    """A canonical-form sparse polynomial: no stored zero coefficients."""

    __slots__ = ("varset", "terms", "exact")

    def __init__(self, varset: VarSet, terms: Mapping[tuple, object]):
        self.varset = varset
        canon, exact = _canonicalize(terms, varset.arity)
        self.terms = canon
        self.exact = exact

    # -- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def coeff(self, mono: tuple):
        return self.terms.get(tuple(mono), 0)

    def constant(self):
        return self.terms.get((0,) * self.varset.arity, 0)

    def sorted_terms(self):
        """(monomial, coefficient) pairs in graded lexicographic order."""
        return [(m, self.terms[m]) for m in sorted(self.terms, key=grlex_key)]

    # -- arithmetic ----------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.varset != self.varset:
                raise ValueError("polynomials built over different VarSets")
            return other
        if isinstance(other, (*_EXACT_TYPES, float)):
            return self.varset.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        merged = dict(self.terms)
        for m, c in other.terms.items():
            merged[m] = merged.get(m, 0) + c
        return Polynomial(self.varset, merged)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.varset, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        prod: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(e1 + e2 for e1, e2 in zip(m1, m2))
                prod[m] = prod.get(m, 0) + c1 * c2
        return Polynomial(self.varset, prod)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial exponent must be a nonnegative int")
        out = self.varset.one()
        for _ in range(n):
            out = out * self
        return out

    # -- evaluation ----------------------------------------------------

    def eval(self, point) -> object:
        """Evaluate at a point given as a sequence in varset order.

        Exact coefficients with Fraction/int coordinates give an exact
        result; any float makes the result float.
        """
        point = tuple(point)
        if len(point) != self.varset.arity:
            raise ValueError(
                f"point has {len(point)} coordinates, expected {self.varset.arity}"
            )
        total = 0
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e:
                    v = v * x**e
            total += v
        return total

    # -- conversions ---------------------------------------------------

    def as_float(self) -> "Polynomial":
        return Polynomial(self.varset, {m: float(c) for m, c in self.terms.items()})

    def as_exact(self) -> "Polynomial":
        return Polynomial(self.varset, {m: Fraction(c) for m, c in self.terms.items()})

    def to_pairs(self) -> list:
        """JSON-friendly form: [[exponents], coefficient] pairs, grlex order."""
        return [[list(m), float(c)] for m, c in self.sorted_terms()]

    @classmethod
    def from_pairs(cls, varset: VarSet, pairs) -> "Polynomial":
        return cls(varset, {tuple(m): c for m, c in pairs})

    # -- comparison / display -------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            other = self._coerce(other)
            if other is NotImplemented:
                return NotImplemented
        return self.varset == other.varset and self.terms == other.terms

    def __hash__(self):
        return hash((self.varset, frozenset(self.terms.items())))

    def max_abs_diff(self, other: "Polynomial"):
        """Largest coefficient magnitude of self - other."""
        diff = self - other
        return max((abs(c) for c in diff.terms.values()), default=0)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [
                f"{n}^{e}" if e > 1 else n
                for n, e in zip(self.varset.names, m)
                if e
            ]
            body = "*".join(factors)
            if not body:
                parts.append(f"{c}")
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")


def _canonicalize(terms: Mapping[tuple, object], arity: int):
    exact = True
    merged: dict = {}
    for m, c in terms.items():
        m = tuple(m)
        if len(m) != arity or any(e < 0 or not isinstance(e, int) for e in m):
            raise ValueError(f"bad exponent tuple {m!r} for arity {arity}")
        if isinstance(c, float):
            exact = False
        merged[m] = merged.get(m, 0) + c
    if exact:
        canon = {m: c for m, c in merged.items() if c != 0}
    else:
        scale = max((abs(c) for c in merged.values()), default=0.0)
        cutoff = DROP_TOL * scale
        canon = {m: c for m, c in merged.items() if abs(c) > cutoff}
    return canon, exact
