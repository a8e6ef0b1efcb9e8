"""Synthetic data generators and the empirical-distribution container.

Three sources of joint-sequence data:

* closed-form influence models (delayed and instant copying of a uniform
  coin-flipping partner), available as exact distributions;
* a latent-trait network where tie formation depends on hidden traits but
  each node's dynamics depend only on its own trait and previous state --
  correlations without influence;
* a copying process on a two-type network where states genuinely propagate
  along edges -- influence that superficially looks like a trait effect.

Counts accumulate over independent graph realizations (fresh graph, traits,
and trajectories each time) until the requested sample size is reached, so
seeded runs are reproducible and no single graph dominates.

File format: a CSV with columns (a_bits, b_bits, count) listing nonzero
cells, plus a JSON sidecar ``<name>.meta.json`` carrying at least
{T, M, generator, seed}.  Exact distributions are written as a single JSON
document with the full frequency vector.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .models import int_to_seq, outcome_index, seq_to_int


class GenerationError(RuntimeError):
    """The simulation configuration cannot produce data (e.g. no edges)."""


# ---------------------------------------------------------------------------
# empirical distributions


@dataclass
class EmpiricalDistribution:
    """Outcome counts over all 2^(2T) joint sequences."""

    T: int
    counts: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.counts) != 1 << (2 * self.T):
            raise ValueError("counts length must be 2^(2T)")
        if (self.counts < 0).any():
            raise ValueError("counts must be nonnegative")

    @property
    def M(self) -> int:
        return int(self.counts.sum())

    def frequencies(self) -> np.ndarray:
        if self.M == 0:
            raise ValueError("empty distribution has no frequencies")
        return self.counts / self.M

    @classmethod
    def from_pairs(cls, pairs, T: int, meta: dict | None = None) -> "EmpiricalDistribution":
        """Accumulate (a_bits, b_bits) samples into counts."""
        counts = np.zeros(1 << (2 * T), dtype=np.int64)
        for a, b in pairs:
            counts[outcome_index(a, b)] += 1
        return cls(T, counts, meta or {})

    # -- file I/O --------------------------------------------------------

    def write_csv(self, path) -> None:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["a_bits", "b_bits", "count"])
            for idx in np.flatnonzero(self.counts):
                a = format(int(idx) >> self.T, f"0{self.T}b")
                b = format(int(idx) & ((1 << self.T) - 1), f"0{self.T}b")
                writer.writerow([a, b, int(self.counts[idx])])
        sidecar = {"T": self.T, "M": self.M, **self.meta}
        with open(path.with_suffix(path.suffix + ".meta.json"), "w") as fh:
            json.dump(sidecar, fh, indent=1)

    @classmethod
    def read_csv(cls, path) -> "EmpiricalDistribution":
        path = Path(path)
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append((rec["a_bits"], rec["b_bits"], int(rec["count"])))
        if not rows:
            raise ValueError(f"{path} contains no data rows")
        T = len(rows[0][0])
        counts = np.zeros(1 << (2 * T), dtype=np.int64)
        for a, b, n in rows:
            if len(a) != T or len(b) != T:
                raise ValueError("inconsistent sequence lengths in CSV")
            idx = (int(a, 2) << T) | int(b, 2)
            counts[idx] += n
        meta = {}
        sidecar = path.with_suffix(path.suffix + ".meta.json")
        if sidecar.exists():
            with open(sidecar) as fh:
                meta = json.load(fh)
        return cls(T, counts, meta)


# ---------------------------------------------------------------------------
# exact influence models


@dataclass(frozen=True)
class InfluenceModel:
    """Closed-form copying of a uniform random partner.

    kind "delayed": A is i.i.d. uniform; B_1 is uniform; for t >= 2,
    B_t equals A_{t-1} with probability delta, otherwise a fresh coin flip.
    kind "instant": for every t (including t=1), B_t equals A_t with
    probability delta, otherwise a fresh coin flip.
    """

    kind: str
    delta: object
    T: int = 4

    def __post_init__(self):
        if self.kind not in ("delayed", "instant"):
            raise ValueError("kind must be 'delayed' or 'instant'")
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")


def exact_distribution(model: InfluenceModel, exact: bool = False):
    """Frequency vector of the influence model over all joint outcomes.

    With exact=True (or a Fraction delta) the result is a list of Fractions
    summing to exactly 1; otherwise a float ndarray.
    """
    delta = model.delta
    if exact and not isinstance(delta, Fraction):
        delta = Fraction(str(delta))
    exact = isinstance(delta, Fraction)
    T = model.T
    half = Fraction(1, 2) if exact else 0.5
    match_p = delta + (1 - delta) * half
    miss_p = (1 - delta) * half
    n = 1 << (2 * T)
    out = []
    for idx in range(n):
        a = int_to_seq(idx >> T, T)
        b = int_to_seq(idx & ((1 << T) - 1), T)
        p = half**T  # the A side
        if model.kind == "delayed":
            p = p * half  # B_1 uniform
            for t in range(1, T):
                p = p * (match_p if b[t] == a[t - 1] else miss_p)
        else:
            for t in range(T):
                p = p * (match_p if b[t] == a[t] else miss_p)
        out.append(p)
    return out if exact else np.array(out, dtype=float)


def sample_influence_model(model: InfluenceModel, M: int, seed=None) -> EmpiricalDistribution:
    """Monte Carlo counts from an influence model (for calibration tests)."""
    rng = np.random.default_rng(seed)
    p = exact_distribution(model)
    counts = rng.multinomial(M, p)
    return EmpiricalDistribution(
        model.T, counts, {"generator": f"{model.kind}-influence", "delta": float(model.delta)}
    )


# ---------------------------------------------------------------------------
# network simulations


@dataclass
class NetworkSimConfig:
    """Configuration shared by the two network generators.

    kind "latent-homophily" (no influence): every node carries a static
    trait r ~ Uniform[0,1].  A directed tie i->j forms with probability
    edge_scale * exp(-homophily*|r_i - r_j|) * exp(-median_pref*|r_j - 1/2|),
    i.e. ties prefer similar partners and partners near the trait median
    (the median preference acts on the target node).  States are binary
    and evolve independently per node with flip rates linear in the trait:
    P(0->1) = 0.2 + 0.3 r and P(1->0) = 0.5 - 0.3 r, started from the
    node's stationary distribution.

    kind "copying" (influence): nodes carry one of two static types with a
    60/40 split; undirected ties form with probability p_within inside a
    type and p_cross across types.  States start uniform at random; one
    sweep performs |E| copy events (pick a random edge, copy one randomly
    chosen endpoint onto the other), and the state of every node is
    recorded after each sweep.

    Both generators observe T consecutive epochs per node, emit one sample
    per ordered adjacent pair, and accumulate counts over independent
    realizations until M samples are reached.
    """

    kind: str
    M: int
    seed: int = 0
    T: int = 4
    nodes: int = 100
    # latent-homophily parameters
    homophily: float = 4.0
    median_pref: float = 2.0
    edge_scale: float = 0.5
    flip_up: tuple = (0.2, 0.3)  # P(0->1) = flip_up[0] + flip_up[1] * r
    flip_down: tuple = (0.5, -0.3)  # P(1->0) = flip_down[0] + flip_down[1] * r
    # At most this many directed pairs are sampled per realization, and at
    # most one direction per unordered pair; dyads sharing a node are
    # dependent, and the cap keeps that dependence from inflating the
    # variance of count statistics beyond the binomial model.
    max_pairs_per_graph: int = 30
    # copying parameters
    type_split: float = 0.6
    p_within: float = 0.1
    p_cross: float = 0.02
    sweeps_per_epoch: int = 2

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["flip_up"] = list(self.flip_up)
        d["flip_down"] = list(self.flip_down)
        return d


def simulate_latent_homophily(cfg: NetworkSimConfig) -> EmpiricalDistribution:
    if cfg.kind != "latent-homophily":
        raise ValueError("config kind must be 'latent-homophily'")
    rng = np.random.default_rng(cfg.seed)
    n, T = cfg.nodes, cfg.T
    counts = np.zeros(1 << (2 * T), dtype=np.int64)
    collected = 0
    empty_rounds = 0
    while collected < cfg.M:
        r = rng.uniform(size=n)
        # Directed tie probabilities; the median preference weights the target.
        prob = (
            cfg.edge_scale
            * np.exp(-cfg.homophily * np.abs(r[:, None] - r[None, :]))
            * np.exp(-cfg.median_pref * np.abs(r[None, :] - 0.5))
        )
        np.fill_diagonal(prob, 0.0)
        edges = np.argwhere(rng.uniform(size=(n, n)) < prob)
        if len(edges) > 1:
            # Keep one direction per unordered pair (reciprocal samples
            # reuse the same two trajectories).
            key = np.minimum(edges[:, 0], edges[:, 1]) * n + np.maximum(edges[:, 0], edges[:, 1])
            _, first = np.unique(key, return_index=True)
            edges = edges[np.sort(first)]
        if len(edges) == 0:
            empty_rounds += 1
            if empty_rounds >= 50:
                raise GenerationError(
                    "latent-homophily config produced no directed ties in 50 rounds"
                )
            continue
        p_up = cfg.flip_up[0] + cfg.flip_up[1] * r
        p_down = cfg.flip_down[0] + cfg.flip_down[1] * r
        stationary_one = p_up / (p_up + p_down)
        states = np.empty((T, n), dtype=np.int8)
        states[0] = rng.uniform(size=n) < stationary_one
        for t in range(1, T):
            prev = states[t - 1]
            flip = np.where(prev == 0, p_up, p_down)
            flipped = rng.uniform(size=n) < flip
            states[t] = np.where(flipped, 1 - prev, prev)
        seq_int = np.zeros(n, dtype=np.int64)
        for t in range(T):
            seq_int = (seq_int << 1) | states[t]
        cap = min(cfg.max_pairs_per_graph, cfg.M - collected)
        if len(edges) > cap:
            edges = edges[rng.choice(len(edges), size=cap, replace=False)]
        idx = (seq_int[edges[:, 0]] << T) | seq_int[edges[:, 1]]
        np.add.at(counts, idx, 1)
        collected += len(edges)
    return EmpiricalDistribution(
        T, counts, {"generator": "latent-homophily", "seed": cfg.seed, "config": cfg.to_json()}
    )


def simulate_copying(cfg: NetworkSimConfig) -> EmpiricalDistribution:
    if cfg.kind != "copying":
        raise ValueError("config kind must be 'copying'")
    rng = np.random.default_rng(cfg.seed)
    n, T = cfg.nodes, cfg.T
    n_first = int(round(cfg.type_split * n))
    counts = np.zeros(1 << (2 * T), dtype=np.int64)
    collected = 0
    empty_rounds = 0
    while collected < cfg.M:
        same = np.zeros((n, n), dtype=bool)
        same[:n_first, :n_first] = True
        same[n_first:, n_first:] = True
        prob = np.where(same, cfg.p_within, cfg.p_cross)
        upper = np.triu(rng.uniform(size=(n, n)) < prob, k=1)
        edges = np.argwhere(upper)
        if len(edges) == 0:
            empty_rounds += 1
            if empty_rounds >= 50:
                raise GenerationError("copying config produced no ties in 50 rounds")
            continue
        state = rng.integers(0, 2, size=n).astype(np.int8)
        states = np.empty((T, n), dtype=np.int8)
        n_events = len(edges) * cfg.sweeps_per_epoch
        for t in range(T):
            picks = rng.integers(0, len(edges), size=n_events)
            direction = rng.integers(0, 2, size=n_events)
            for e, d in zip(picks, direction):
                u, v = edges[e]
                if d:
                    state[v] = state[u]
                else:
                    state[u] = state[v]
            states[t] = state
        seq_int = np.zeros(n, dtype=np.int64)
        for t in range(T):
            seq_int = (seq_int << 1) | states[t]
        ordered = np.vstack([edges, edges[:, ::-1]])
        take = ordered[: cfg.M - collected]
        idx = (seq_int[take[:, 0]] << T) | seq_int[take[:, 1]]
        np.add.at(counts, idx, 1)
        collected += len(take)
    return EmpiricalDistribution(
        T, counts, {"generator": "copying", "seed": cfg.seed, "config": cfg.to_json()}
    )


def simulate(cfg: NetworkSimConfig) -> EmpiricalDistribution:
    if cfg.kind == "latent-homophily":
        return simulate_latent_homophily(cfg)
    if cfg.kind == "copying":
        return simulate_copying(cfg)
    raise ValueError(f"unknown simulation kind {cfg.kind!r}")


# ---------------------------------------------------------------------------
# exact-distribution files


def write_exact_json(path, model: InfluenceModel, extra: dict | None = None) -> None:
    p = exact_distribution(model)
    doc = {
        "T": model.T,
        "kind": model.kind,
        "delta": float(model.delta),
        "p": [float(v) for v in p],
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def read_distribution(path):
    """Read either a counts CSV or an exact-frequency JSON.

    Returns (frequencies ndarray, M or None, T, metadata).
    """
    path = Path(path)
    if path.suffix == ".json":
        with open(path) as fh:
            doc = json.load(fh)
        p = np.asarray(doc["p"], dtype=float)
        return p, None, doc["T"], doc
    emp = EmpiricalDistribution.read_csv(path)
    return emp.frequencies(), emp.M, emp.T, emp.meta
