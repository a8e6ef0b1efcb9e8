"""Witness optimization over polytope-constrained model classes.

Given an empirical distribution p over joint outcomes and a model class
whose extreme points have probability polynomials f_i(x) on a polytope
K = {x : g_1(x) >= 0, ..., g_s(x) >= 0} with affine g_i, we search for a
bounded observable c and the largest margin gamma such that

    -gamma + c . p - sum_i c_i f_i(x)  =  sum_k lambda_k prod_i g_i(x)^{k_i}

holds identically in x with all lambda_k >= 0 and multiset degrees
sum_i k_i <= d_max.  The right side is manifestly nonnegative on K, so any
feasible (gamma, c, lambda) proves that every distribution in the class
satisfies  <c>_P <= <c>_p - gamma: the lambda weights are an algebraic
proof, and gamma > 0 certifies that p lies outside the class.  Matching
polynomial coefficients on both sides makes this a linear program; the
margin tightens monotonically as d_max grows.

The same machinery bounds the maximum of a single probability polynomial
on K (fix c to an indicator), which is how sequence probability bounds are
produced.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .lp import LinearProgram, LPSolution, SolverError, solve_lp
from .models import ModelClass, marginal_poly
from .poly import Polynomial, VarSet, grlex_key

MEMORY_BUDGET_ENV = "CONTAGION_MEMORY_BUDGET_GB"
DEFAULT_MEMORY_GB = 8.0

# One decade above the LP solver feasibility tolerance.
RESIDUAL_TOL = 1e-8
POINTWISE_TOL = 1e-8

_BYTES_PER_TERM = 24  # row index + value + container overhead, amortized


class ResourceLimitError(RuntimeError):
    """Estimated basis storage exceeds the configured memory budget."""


def memory_budget_bytes() -> int:
    gb = float(os.environ.get(MEMORY_BUDGET_ENV, DEFAULT_MEMORY_GB))
    return int(gb * 2**30)


def basis_size(n_generators: int, d_max: int) -> int:
    """Number of generator multisets with total degree at most d_max."""
    return comb(n_generators + d_max, d_max)


@dataclass
class HandelmanBasis:
    """All products prod_i g_i^{k_i} with sum k_i <= d_max, expanded.

    Products are enumerated depth-first over nondecreasing generator
    indices (the empty product first), so the order is deterministic.
    Expansions are stored as sparse columns over `monomials`, which are
    sorted graded-lexicographically.
    """

    generators: list
    d_max: int
    exponents: list  # multiset exponent tuple (len = #generators) per product
    monomials: list  # exponent tuples, graded-lex order
    mono_index: dict
    columns: list  # per product: (row indices ndarray, values ndarray)

    def __len__(self):
        return len(self.exponents)

    def product_poly(self, k, exact: bool = False) -> Polynomial:
        """Re-expand one product from its multiset exponents."""
        gens = self.generators
        out = gens[0].varset.one()
        if exact:
            out = out.as_exact()
        for i, e in enumerate(k):
            g = gens[i].as_exact() if exact else gens[i].as_float()
            for _ in range(e):
                out = out * g
        return out


def enumerate_basis(generators, d_max: int, max_bytes: int | None = None) -> HandelmanBasis:
    if d_max < 0:
        raise ValueError("d_max must be nonnegative")
    for g in generators:
        if g.degree() > 1:
            raise ValueError("generators must be affine")
    if max_bytes is None:
        max_bytes = memory_budget_bytes()
    s = len(generators)
    count = basis_size(s, d_max)
    if count * _BYTES_PER_TERM > max_bytes:
        raise ResourceLimitError(
            f"basis of {count} products exceeds the memory budget "
            f"({max_bytes / 2**30:.1f} GiB); lower d_max or raise "
            f"{MEMORY_BUDGET_ENV}"
        )

    gens_f = [g.as_float() for g in generators]
    varset = gens_f[0].varset
    mono_index: dict = {}
    exponents: list = []
    columns: list = []
    used = 0

    def add(poly: Polynomial, k: list) -> None:
        nonlocal used
        terms = poly.terms
        ridx = np.empty(len(terms), dtype=np.int64)
        vals = np.empty(len(terms), dtype=np.float64)
        for t, (m, cf) in enumerate(terms.items()):
            i = mono_index.get(m)
            if i is None:
                i = len(mono_index)
                mono_index[m] = i
            ridx[t] = i
            vals[t] = cf
        exponents.append(tuple(k))
        columns.append((ridx, vals))
        used += len(terms) * _BYTES_PER_TERM
        if used > max_bytes:
            raise ResourceLimitError(
                f"basis expansion for {count} products exceeded the memory "
                f"budget after {len(exponents)} products"
            )

    k = [0] * s

    def rec(poly: Polynomial, start: int, depth: int) -> None:
        add(poly, k)
        if depth == d_max:
            return
        for i in range(start, s):
            k[i] += 1
            rec(poly * gens_f[i], i, depth + 1)
            k[i] -= 1

    rec(varset.one().as_float(), 0, 0)

    # Renumber rows into graded-lex order for reproducible LP layouts.
    monomials = sorted(mono_index, key=grlex_key)
    remap = np.empty(len(mono_index), dtype=np.int64)
    for new, mono in enumerate(monomials):
        remap[mono_index[mono]] = new
    mono_index = {mono: i for i, mono in enumerate(monomials)}
    columns = [(remap[ridx], vals) for ridx, vals in columns]
    return HandelmanBasis(list(generators), d_max, exponents, monomials, mono_index, columns)


_BASIS_CACHE: dict = {}


def _cached_basis(mc: ModelClass, d_max: int) -> HandelmanBasis:
    key = (mc.kind, mc.T, mc.delta, d_max)
    basis = _BASIS_CACHE.get(key)
    if basis is None:
        basis = enumerate_basis(mc.generators(), d_max)
        _BASIS_CACHE[key] = basis
    return basis


# ---------------------------------------------------------------------------
# problem assembly


@dataclass
class WitnessProblem:
    """Inputs of one witness LP.

    `f_polys` holds one probability polynomial per cell of `p_hat`;
    `fixed_c` pins the observable instead of optimizing it.
    """

    f_polys: list
    p_hat: object
    basis: HandelmanBasis
    c_bounds: tuple = (-1.0, 1.0)
    fixed_c: object = None

    def __post_init__(self):
        p = np.asarray([float(v) for v in self.p_hat], dtype=float)
        if len(p) != len(self.f_polys):
            raise ValueError("p_hat length must match the number of cells")
        if p.min() < -1e-12:
            raise ValueError("p_hat has negative entries")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"p_hat sums to {p.sum()!r}, expected 1")


@dataclass
class AssembledLP:
    lp: LinearProgram
    monomials: list
    n_cells: int
    lambda_offset: int  # column of the first lambda variable


def assemble_lp(wp: WitnessProblem) -> AssembledLP:
    """Write the coefficient-matching equalities as a linear program.

    One equality row per monomial appearing in any cell polynomial or any
    basis product.  Columns are gamma, then the observable entries (unless
    fixed), then one lambda per basis product.  The objective maximizes
    gamma (stored as minimize -gamma).
    """
    basis = wp.basis
    n_cells = len(wp.f_polys)
    f_float = [p.as_float() for p in wp.f_polys]

    mono_index = dict(basis.mono_index)
    for p in f_float:
        for m in p.terms:
            if m not in mono_index:
                mono_index[m] = len(mono_index)
    monomials = sorted(mono_index, key=grlex_key)
    mono_index = {m: i for i, m in enumerate(monomials)}
    arity = wp.f_polys[0].varset.arity
    const_row = mono_index[(0,) * arity]
    n_rows = len(monomials)

    free_c = wp.fixed_c is None
    n_c = n_cells if free_c else 0
    lambda_offset = 1 + n_c
    lp = LinearProgram.empty(lambda_offset + len(basis), n_rows)
    lp.obj[0] = -1.0
    lp.lower[0] = 0.0
    lp.add_entry(const_row, 0, -1.0)

    p_hat = [float(v) for v in wp.p_hat]
    if free_c:
        lo, hi = wp.c_bounds
        for j in range(n_cells):
            col = 1 + j
            lp.lower[col] = lo
            lp.upper[col] = hi
            entries = {const_row: p_hat[j]}
            for m, cf in f_float[j].terms.items():
                r = mono_index[m]
                entries[r] = entries.get(r, 0.0) - cf
            for r, v in entries.items():
                if v:
                    lp.add_entry(r, col, v)
    else:
        c = [float(v) for v in wp.fixed_c]
        if len(c) != n_cells:
            raise ValueError("fixed_c length must match the number of cells")
        rhs = [0.0] * n_rows
        rhs[const_row] -= float(np.dot(c, p_hat))
        for j, cj in enumerate(c):
            if cj == 0.0:
                continue
            for m, cf in f_float[j].terms.items():
                rhs[mono_index[m]] += cj * cf
        lp.b = rhs

    basis_remap = np.empty(len(basis.monomials), dtype=np.int64)
    for i, m in enumerate(basis.monomials):
        basis_remap[i] = mono_index[m]
    for t, (ridx, vals) in enumerate(basis.columns):
        col = lambda_offset + t
        lp.lower[col] = 0.0
        rows = basis_remap[ridx]
        for r, v in zip(rows.tolist(), vals.tolist()):
            lp.add_entry(r, col, -v)
    return AssembledLP(lp, monomials, n_cells, lambda_offset)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    """An algebraic proof that  max_{x in K} c . f(x) <= bound.

    For kind "witness" the headline number is the margin
    gamma = c . p_hat - bound; for kind "upper-bound" gamma equals the
    bound itself.  `lambdas` maps generator-multiset exponents to their
    nonnegative weights.
    """

    kind: str
    gamma: object
    bound: object
    c: object
    lambdas: dict
    model: dict
    d_max: int
    tolerances: dict = field(default_factory=lambda: {
        "solver_feasibility": 1e-9,
        "residual": RESIDUAL_TOL,
        "pointwise": POINTWISE_TOL,
    })
    target: object = None  # poly pairs, upper-bound kind only

    def c_norm(self) -> float:
        return float(np.linalg.norm(np.asarray([float(v) for v in self.c])))

    def to_json(self) -> dict:
        lambdas = [
            {"exponents": list(k), "value": float(v)}
            for k, v in sorted(self.lambdas.items())
        ]
        out = {
            "kind": self.kind,
            "gamma": float(self.gamma),
            "bound": float(self.bound),
            "c": [float(v) for v in self.c],
            "lambdas": lambdas,
            "model": self.model,
            "d_max": self.d_max,
            "tolerances": self.tolerances,
        }
        if self.target is not None:
            out["target"] = self.target
        if isinstance(self.gamma, Fraction):
            out["gamma_exact"] = str(self.gamma)
            out["lambdas_exact"] = [
                {"exponents": list(k), "value": str(v)}
                for k, v in sorted(self.lambdas.items())
            ]
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Certificate":
        lambdas = {tuple(e["exponents"]): e["value"] for e in d["lambdas"]}
        return cls(
            kind=d["kind"],
            gamma=d["gamma"],
            bound=d["bound"],
            c=d["c"],
            lambdas=lambdas,
            model=d["model"],
            d_max=d["d_max"],
            tolerances=d.get("tolerances", {}),
            target=d.get("target"),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "Certificate":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _extract_lambdas(basis: HandelmanBasis, x, lambda_offset: int) -> dict:
    out = {}
    for t, k in enumerate(basis.exponents):
        v = x[lambda_offset + t]
        if isinstance(v, Fraction):
            if v != 0:
                out[k] = v
        elif v > 0.0:
            out[k] = float(v)
    return out


def find_witness(
    p_hat,
    mc: ModelClass,
    d_max: int,
    *,
    fixed_c=None,
    exact: bool = False,
    c_bounds: tuple = (-1.0, 1.0),
    basis: HandelmanBasis | None = None,
) -> Certificate:
    """Solve the witness program for an empirical distribution.

    Returns the certificate with the largest margin achievable at the given
    degree budget.  The margin never decreases as d_max grows.
    """
    if basis is None:
        basis = _cached_basis(mc, d_max)
    wp = WitnessProblem(mc.f_vector(), p_hat, basis, c_bounds, fixed_c)
    assembled = assemble_lp(wp)
    sol = solve_lp(assembled.lp, exact=exact)
    if sol.status != "optimal":
        raise SolverError(f"witness LP terminated as {sol.status}: {sol.message}")
    gamma = -sol.objective if exact else -float(sol.objective)
    if not exact:
        gamma = max(gamma, 0.0) + 0.0  # also normalizes -0.0
    if fixed_c is None:
        c = [sol.x[1 + j] for j in range(assembled.n_cells)]
    else:
        c = list(fixed_c)
    p = [float(v) for v in p_hat]
    bound = sum(ci * pi for ci, pi in zip(c, p)) - gamma
    return Certificate(
        kind="witness",
        gamma=gamma,
        bound=bound,
        c=c,
        lambdas=_extract_lambdas(basis, sol.x, assembled.lambda_offset),
        model=mc.descriptor(),
        d_max=d_max,
    )


def gamma_by_degree(p_hat, mc: ModelClass, d_maxes, **kwargs) -> list:
    """Witness margins for several degree budgets, as (d_max, gamma) pairs."""
    return [(d, find_witness(p_hat, mc, d, **kwargs).gamma) for d in d_maxes]


def sequence_probability_bound(seq, d_max: int = 3, *, exact: bool = True) -> Certificate:
    """Least provable upper bound on P(single observed sequence) for
    independent-chain mixtures, at the given degree budget.

    The domain is the box over only those transition parameters that occur
    in the sequence's probability polynomial; exact mode yields Fraction
    weights and a bit-exact certificate identity.
    """
    full = marginal_poly(seq, VarSet(("a0", "ap", "am")), "a")
    used = sorted(
        {i for m in full.terms for i, e in enumerate(m) if e},
    )
    names = [("a0", "ap", "am")[i] for i in used]
    varset = VarSet(names)
    h = Polynomial(
        varset,
        {tuple(m[i] for i in used): cf for m, cf in full.terms.items()},
    )
    generators = []
    for name in names:
        x = varset.var(name)
        generators.append(x)
        generators.append(1 - x)
    basis = enumerate_basis(generators, d_max)
    wp = WitnessProblem([h], [1], basis, fixed_c=[1])
    assembled = assemble_lp(wp)
    sol = solve_lp(assembled.lp, exact=exact)
    if sol.status != "optimal":
        raise SolverError(f"bound LP terminated as {sol.status}: {sol.message}")
    gamma_wit = -sol.objective
    one = Fraction(1) if exact else 1.0
    bound = one - gamma_wit
    return Certificate(
        kind="upper-bound",
        gamma=bound,
        bound=bound,
        c=[one],
        lambdas=_extract_lambdas(basis, sol.x, assembled.lambda_offset),
        model={"kind": "box", "T": len(seq), "delta": None, "varset": names},
        d_max=d_max,
        target=h.to_pairs(),
    )


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    valid: bool
    residual_max: float
    worst_point_slack: float
    n_points: int
    signs_ok: bool
    bad_monomials: list
    messages: list

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "residual_max": self.residual_max,
            "worst_point_slack": self.worst_point_slack,
            "n_points": self.n_points,
            "signs_ok": self.signs_ok,
            "bad_monomials": [list(m) for m in self.bad_monomials],
            "messages": self.messages,
        }


def _certificate_cells(cert: Certificate, mc: ModelClass | None):
    """(f polynomials, generators, model class or None) for a certificate."""
    if cert.kind == "upper-bound":
        varset = VarSet(tuple(cert.model["varset"]))
        h = Polynomial.from_pairs(varset, cert.target)
        gens = []
        for name in varset.names:
            x = varset.var(name)
            gens.append(x)
            gens.append(1 - x)
        return [h], gens, None
    if mc is None:
        mc = ModelClass.from_descriptor(cert.model)
    return mc.f_vector(), mc.generators(), mc


def validate_certificate(
    cert: Certificate,
    mc: ModelClass | None = None,
    p_hat=None,
    *,
    n_points: int = 1000,
    seed: int = 0,
    residual_tol: float = RESIDUAL_TOL,
    point_tol: float = POINTWISE_TOL,
) -> ValidationReport:
    """Check a certificate symbolically, numerically, and by sign.

    (a) the coefficient-wise residual of the certificate identity must stay
    below `residual_tol` (exactly zero when the certificate carries exact
    weights); (b) at `n_points` random points of the constraint polytope the
    certified bound must dominate c . f(x) up to `point_tol`; (c) all lambda
    weights and the margin must be nonnegative.
    """
    messages = []
    exact = isinstance(cert.gamma, Fraction) and all(
        isinstance(v, Fraction) for v in cert.lambdas.values()
    )
    f_polys, generators, model = _certificate_cells(cert, mc)

    signs_ok = True
    if any(v < 0 for v in cert.lambdas.values()):
        signs_ok = False
        messages.append("negative lambda weight")
    if cert.gamma < 0:
        signs_ok = False
        messages.append("negative gamma")

    if cert.kind == "witness":
        if p_hat is None:
            raise ValueError("witness certificates need p_hat for validation")
        c_dot_p = sum(ci * float(pi) for ci, pi in zip(cert.c, [float(v) for v in p_hat]))
        bound = c_dot_p - (float(cert.gamma) if not exact else cert.gamma)
    else:
        bound = cert.bound

    varset = f_polys[0].varset
    lhs = varset.const(bound)
    for ci, f in zip(cert.c, f_polys):
        if ci:
            lhs = lhs - (ci if exact else float(ci)) * (f if exact else f.as_float())
    rhs = varset.zero()
    gens = [g.as_exact() if exact else g.as_float() for g in generators]
    for k, v in cert.lambdas.items():
        prod = varset.one() if not exact else varset.one().as_exact()
        for i, e in enumerate(k):
            for _ in range(e):
                prod = prod * gens[i]
        rhs = rhs + v * prod
    residual = lhs - rhs
    residual_max = max((abs(float(cf)) for cf in residual.terms.values()), default=0.0)
    bad_monomials = [
        m for m, cf in residual.sorted_terms() if abs(float(cf)) >= residual_tol
    ][:10]
    if bad_monomials:
        messages.append(f"{len(bad_monomials)}+ residual coefficients above tolerance")

    # Pointwise spot check on the polytope.
    rng = np.random.default_rng(seed)
    if model is not None:
        pts = model.sample_points(n_points, rng)
    else:
        pts = rng.uniform(size=(n_points, varset.arity))
    cf_poly = lhs.as_float()  # bound - c . f, must be >= 0 on K
    vals = eval_poly_batch(cf_poly, pts)
    worst = float(vals.min()) if len(vals) else 0.0
    if worst < -point_tol:
        messages.append(f"separation violated by {-worst:.3g} at a sampled point")

    valid = signs_ok and not bad_monomials and worst >= -point_tol
    return ValidationReport(
        valid=valid,
        residual_max=float(residual_max),
        worst_point_slack=worst,
        n_points=n_points,
        signs_ok=signs_ok,
        bad_monomials=bad_monomials,
        messages=messages,
    )


def eval_poly_batch(poly: Polynomial, points: np.ndarray) -> np.ndarray:
    """Evaluate one polynomial at many points (rows of `points`)."""
    if poly.is_zero():
        return np.zeros(len(points))
    monos = np.array(list(poly.terms), dtype=np.int64)
    coeffs = np.array([float(c) for c in poly.terms.values()])
    vals = np.prod(points[:, None, :] ** monos[None, :, :], axis=2)
    return vals @ coeffs
