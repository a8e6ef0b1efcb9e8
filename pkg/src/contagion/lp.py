"""Linear programming backends.

All problems are stated as

    minimize    obj . x
    subject to  A x = b          (A given as COO triplets)
                lower <= x <= upper   (entries may be None for unbounded)

Float solves go through HiGHS dual simplex (deterministic vertex solutions,
feasibility and optimality tolerances 1e-9).  The exact solver is a dense
bounded-variable tableau simplex over ``fractions.Fraction`` with Bland's
rule, intended for small certificate problems where bit-exact optima are
wanted; it also serves as an independent cross-check of the float path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

FEASIBILITY_TOL = 1e-9


class SolverError(RuntimeError):
    """The backend failed to return a clean optimal/infeasible/unbounded status."""


@dataclass
class LinearProgram:
    n_cols: int
    n_rows: int
    obj: list
    rows: list
    cols: list
    vals: list
    b: list
    lower: list  # None means -inf
    upper: list  # None means +inf

    def add_entry(self, row: int, col: int, val) -> None:
        self.rows.append(row)
        self.cols.append(col)
        self.vals.append(val)

    @classmethod
    def empty(cls, n_cols: int, n_rows: int) -> "LinearProgram":
        return cls(
            n_cols=n_cols,
            n_rows=n_rows,
            obj=[0] * n_cols,
            rows=[],
            cols=[],
            vals=[],
            b=[0] * n_rows,
            lower=[0] * n_cols,
            upper=[None] * n_cols,
        )


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: object = None
    x: object = None
    message: str = ""


def solve_lp(lp: LinearProgram, exact: bool = False) -> LPSolution:
    return _solve_exact(lp) if exact else _solve_float(lp)


# ---------------------------------------------------------------------------
# float backend


def _solve_float(lp: LinearProgram) -> LPSolution:
    a_eq = sp.csc_matrix(
        (np.asarray(lp.vals, dtype=float), (lp.rows, lp.cols)),
        shape=(lp.n_rows, lp.n_cols),
    )
    bounds = [
        (None if lo is None else float(lo), None if hi is None else float(hi))
        for lo, hi in zip(lp.lower, lp.upper)
    ]
    res = linprog(
        np.asarray(lp.obj, dtype=float),
        A_eq=a_eq,
        b_eq=np.asarray(lp.b, dtype=float),
        bounds=bounds,
        method="highs-ds",
        options={
            "primal_feasibility_tolerance": FEASIBILITY_TOL,
            "dual_feasibility_tolerance": FEASIBILITY_TOL,
        },
    )
    if res.status == 0:
        return LPSolution("optimal", float(res.fun), np.asarray(res.x), res.message)
    if res.status == 2:
        return LPSolution("infeasible", message=res.message)
    if res.status == 3:
        return LPSolution("unbounded", message=res.message)
    raise SolverError(f"LP solve failed (status {res.status}): {res.message}")


# ---------------------------------------------------------------------------
# exact backend


class _Unbounded(Exception):
    pass


class _ExactSimplex:
    """Dense two-phase bounded-variable simplex over Fractions.

    Variables are shifted so every lower bound is 0 ('range' form); the
    tableau rows hold B^-1 A for all columns, with basic variable values
    kept in a separate vector.  Bland's rule (smallest eligible index for
    both entering and leaving) guarantees termination.
    """

    def __init__(self, lp: LinearProgram):
        if any(lo is None for lo in lp.lower):
            raise ValueError("exact solver requires finite lower bounds")
        self.n = lp.n_cols
        self.m = lp.n_rows
        self.lower = [Fraction(lo) for lo in lp.lower]
        self.rng = [
            None if hi is None else Fraction(hi) - lo
            for lo, hi in zip(self.lower, lp.upper)
        ]
        a = [[Fraction(0)] * self.n for _ in range(self.m)]
        for r, c, v in zip(lp.rows, lp.cols, lp.vals):
            a[r][c] += Fraction(v)
        b = [Fraction(v) for v in lp.b]
        for j, lo in enumerate(self.lower):
            if lo:
                for i in range(self.m):
                    if a[i][j]:
                        b[i] -= a[i][j] * lo
        for i in range(self.m):
            if b[i] < 0:
                b[i] = -b[i]
                a[i] = [-v for v in a[i]]
        # Append one artificial column per row.
        self.tot = self.n + self.m
        zero = Fraction(0)
        one = Fraction(1)
        self.table = [
            a[i] + [one if k == i else zero for k in range(self.m)]
            for i in range(self.m)
        ]
        self.rng += [None] * self.m
        self.basis = list(range(self.n, self.tot))
        self.in_basis = [False] * self.tot
        for j in self.basis:
            self.in_basis[j] = True
        self.at_upper = [False] * self.tot
        self.values = b[:]  # basic variable values, aligned with rows
        self.obj = [Fraction(v) for v in lp.obj]

    def solve(self) -> LPSolution:
        phase1 = [Fraction(0)] * self.n + [Fraction(1)] * self.m
        self._optimize(phase1)
        if any(self.values[i] != 0 for i in range(self.m) if self.basis[i] >= self.n):
            return LPSolution("infeasible", message="phase 1 optimum positive")
        # Freeze artificials at zero so they can never re-enter.
        for j in range(self.n, self.tot):
            self.rng[j] = Fraction(0)
        cost = self.obj + [Fraction(0)] * self.m
        try:
            self._optimize(cost)
        except _Unbounded:
            return LPSolution("unbounded", message="phase 2 unbounded")
        x = self._extract()
        objective = sum(c * v for c, v in zip(self.obj, x))
        return LPSolution("optimal", objective, x)

    # -- mechanics -------------------------------------------------------

    def _reduced_cost(self, cost, j):
        red = cost[j]
        for i in range(self.m):
            cb = cost[self.basis[i]]
            if cb:
                red -= cb * self.table[i][j]
        return red

    def _optimize(self, cost):
        while True:
            entering = -1
            direction = 0
            for j in range(self.tot):
                if self.in_basis[j] or (self.rng[j] is not None and self.rng[j] == 0):
                    continue
                red = self._reduced_cost(cost, j)
                if not self.at_upper[j] and red < 0:
                    entering, direction = j, 1
                    break
                if self.at_upper[j] and red > 0:
                    entering, direction = j, -1
                    break
            if entering < 0:
                return
            self._pivot(entering, direction)

    def _pivot(self, entering, direction):
        m, tot = self.m, self.tot
        limit = self.rng[entering]
        leave = -1
        leave_to_upper = False
        for i in range(m):
            coef = direction * self.table[i][entering]
            if coef > 0:
                t = self.values[i] / coef
            elif coef < 0 and self.rng[self.basis[i]] is not None:
                t = (self.rng[self.basis[i]] - self.values[i]) / (-coef)
            else:
                continue
            to_upper = coef < 0
            if limit is None or t < limit:
                limit, leave, leave_to_upper = t, i, to_upper
            elif t == limit and leave >= 0 and self.basis[i] < self.basis[leave]:
                leave, leave_to_upper = i, to_upper
        if limit is None:
            raise _Unbounded
        # Move the entering variable by `limit` in `direction`.
        if limit != 0:
            col = [self.table[i][entering] for i in range(m)]
            for i in range(m):
                if col[i]:
                    self.values[i] -= direction * limit * col[i]
        if leave < 0:
            # Pure bound flip, basis unchanged.
            self.at_upper[entering] = not self.at_upper[entering]
            return
        out = self.basis[leave]
        entering_value = (
            (self.rng[entering] if self.at_upper[entering] else Fraction(0))
            + direction * limit
        )
        piv = self.table[leave][entering]
        inv = 1 / piv
        row = self.table[leave]
        if inv != 1:
            for k in range(tot):
                if row[k]:
                    row[k] *= inv
        for i in range(m):
            if i == leave:
                continue
            f = self.table[i][entering]
            if f:
                ri = self.table[i]
                for k in range(tot):
                    if row[k]:
                        ri[k] -= f * row[k]
        self.basis[leave] = entering
        self.in_basis[out] = False
        self.in_basis[entering] = True
        self.at_upper[entering] = False
        self.at_upper[out] = leave_to_upper
        self.values[leave] = entering_value

    def _extract(self):
        x = [Fraction(0)] * self.n
        for j in range(self.n):
            if self.in_basis[j]:
                continue
            y = self.rng[j] if (self.at_upper[j] and self.rng[j] is not None) else Fraction(0)
            x[j] = self.lower[j] + y
        for i in range(self.m):
            j = self.basis[i]
            if j < self.n:
                x[j] = self.lower[j] + self.values[i]
        return x


def _solve_exact(lp: LinearProgram) -> LPSolution:
    return _ExactSimplex(lp).solve()
