"""Gibbs sampling oracles.

Three implementations share one contract: given weights ``p`` return ``k``
i.i.d. indices drawn from a law within total variation ``eps_G`` of
``softmax(p)``.

* ``ExactOracle`` -- inverse-CDF sampling of the softmax.
* ``NoisyOracle`` -- a deterministic perturbation at TV distance ``eps_G``.
* ``QuantumSimOracle`` -- the multi-Gibbs pipeline (consistent estimation,
  k-maximum finding, guess state, polynomial correction, post-selection)
  carried out with exact classical arithmetic.  Rejection sampling stands in
  for amplitude amplification, and every quantum subroutine charges its
  query count to a ``QueryLedger``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import logsumexp

from .polyapprox import ExpApproximant, cached_exp_approximant

ORACLE_KINDS = ("exact", "noisy", "quantum-sim")
UNDERFLOW = 1e-300


class OracleError(RuntimeError):
    pass


def gibbs_distribution(p) -> np.ndarray:
    """``exp(p_l) / sum_i exp(p_i)`` via log-sum-exp."""
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise OracleError("Gibbs weights must be finite")
    w = np.exp(p - p.max())
    return w / w.sum()


def tv_distance(p, q) -> float:
    p = p.dense() if hasattr(p, "dense") else np.asarray(p, dtype=float)
    q = q.dense() if hasattr(q, "dense") else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


@dataclass
class GibbsRequest:
    p: np.ndarray
    k: int
    eps_G: float = 0.0
    beta: float | None = None

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        bound = float(np.abs(self.p).max())
        if self.beta is None:
            self.beta = bound
        elif self.beta < bound - 1e-12:
            raise OracleError(f"beta={self.beta} is below max|p|={bound}")
        if self.k < 1:
            raise OracleError("k must be >= 1")
        if not 0.0 <= self.eps_G < 1.0:
            raise OracleError("eps_G must lie in [0, 1)")

    @property
    def n(self) -> int:
        return self.p.size


def _inverse_cdf(probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, uniforms * cdf[-1], side="right")
    return np.minimum(idx, probs.size - 1)


def exact_sample(req: GibbsRequest, rng: np.random.Generator) -> np.ndarray:
    return _inverse_cdf(gibbs_distribution(req.p), rng.random(req.k))


def perturbed_distribution(p, eps_G: float, mode: str = "extreme",
                           rng: np.random.Generator | None = None) -> np.ndarray:
    """Move ``eps_G`` of mass between two coordinates of ``softmax(p)``.

    ``extreme`` moves it from the argmax to the argmin (lowest index on ties,
    the two always distinct); ``random`` picks the pair with ``rng``.  The
    amount is capped by the donor's mass.
    """
    q = gibbs_distribution(p)
    n = q.size
    if n == 1 or eps_G == 0.0:
        return q
    if mode == "extreme":
        donor = int(np.argmax(q))
        rest = np.delete(np.arange(n), donor)
        recipient = int(rest[np.argmin(q[rest])])
    elif mode == "random":
        if rng is None:
            raise OracleError("random perturbation needs an rng")
        donor, recipient = (int(i) for i in rng.choice(n, size=2, replace=False))
    else:
        raise OracleError(f"unknown perturbation mode {mode!r}")
    amount = min(eps_G, q[donor])
    q = q.copy()
    q[donor] -= amount
    q[recipient] += amount
    return q


def noisy_sample(req: GibbsRequest, rng: np.random.Generator, mode: str = "extreme") -> np.ndarray:
    q = perturbed_distribution(req.p, req.eps_G, mode, rng)
    return _inverse_cdf(q, rng.random(req.k))


# --------------------------------------------------------------------------
# query accounting


@dataclass
class CostModel:
    """Constants of the abstract cost model; one unit = one query to the
    amplitude encoding ``V``."""

    kmax_constant: float = 1.0
    amplification_constant: float = 1.0
    degree_step_cost: int = 2
    log_factor: bool = True

    def estimation_cost(self, beta: float, n: int) -> int:
        r = max(1.0, math.log2(n)) if self.log_factor else 1.0
        return max(1, math.ceil(2.0 * beta * r))


@dataclass
class QueryLedger:
    estimation: int = 0
    kmax: int = 0
    amplification: int = 0
    synthesis: int = 0
    poly_degree: int = 0
    calls: int = 0
    samples: int = 0
    wall_clock: float = 0.0

    @property
    def total_queries(self) -> int:
        return self.estimation + self.kmax + self.amplification

    def merge(self, other: "QueryLedger") -> "QueryLedger":
        return QueryLedger(**{f: getattr(self, f) + getattr(other, f) for f in _LEDGER_FIELDS})

    __add__ = merge

    def absorb(self, other: "QueryLedger"):
        for f in _LEDGER_FIELDS:
            setattr(self, f, getattr(self, f) + getattr(other, f))

    def to_json(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("wall_clock")
        d["total_queries"] = self.total_queries
        return d


_LEDGER_FIELDS = tuple(QueryLedger.__dataclass_fields__)


# --------------------------------------------------------------------------
# consistent estimation and k-maximum finding


def consistent_estimate(u, beta: float, seed: int = 0, grid_offset: float | None = None):
    """Seeded, input-consistent over-estimate with ``u <= result <= u + 1``.

    ``u / beta`` is snapped to the centre of its cell in a grid of pitch
    ``2 delta`` (``delta = 1 / (2 beta)``) whose offset is drawn from
    ``seed``; the half-width ``beta delta`` is then added.  ``grid_offset``,
    in units of ``u``, overrides the seeded offset.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u < -1e-12) or np.any(u > beta * (1 + 1e-12)):
        raise OracleError("consistent estimation needs u / beta in [0, 1]")
    delta = 1.0 / (2.0 * beta)
    pitch = 2.0 * delta
    if grid_offset is None:
        offset = np.random.default_rng(seed).uniform(0.0, pitch)
    else:
        offset = (grid_offset / beta) % pitch
    frac = u / beta
    f = offset + (np.floor((frac - offset) / pitch) + 0.5) * pitch
    est = beta * f + beta * delta
    return np.clip(est, u, u + 1.0)


class ConsistentEstimator:
    """Oracle access to the consistent estimates of a fixed vector."""

    def __init__(self, u, beta: float, seed: int = 0, grid_offset: float | None = None,
                 cost: CostModel | None = None, ledger: QueryLedger | None = None):
        self.u = np.asarray(u, dtype=float)
        self.beta = beta
        self.cost = cost or CostModel()
        self.ledger = ledger if ledger is not None else QueryLedger()
        self._values = consistent_estimate(self.u, beta, seed, grid_offset)
        self.cost_per_call = self.cost.estimation_cost(beta, self.u.size)

    @property
    def n(self) -> int:
        return self.u.size

    def values(self, idx=None) -> np.ndarray:
        """Uncharged access, used inside subroutines that charge themselves."""
        return self._values if idx is None else self._values[idx]

    def query(self, idx) -> np.ndarray:
        idx = np.atleast_1d(idx)
        self.ledger.estimation += idx.size * self.cost_per_call
        return self._values[idx]


def top_k(values, k: int) -> np.ndarray:
    """Indices of the k largest values, lower index first on ties."""
    values = np.asarray(values)
    order = np.lexsort((np.arange(values.size), -values))
    return np.sort(order[:k])


def k_max_find(estimator: ConsistentEstimator, n: int, k: int,
               constant: float | None = None) -> np.ndarray:
    if not 1 <= k <= n:
        raise OracleError(f"need 1 <= k <= n, got k={k}, n={n}")
    c = estimator.cost.kmax_constant if constant is None else constant
    estimator.ledger.kmax += math.ceil(c * math.sqrt(n * k)) * estimator.cost_per_call
    return top_k(estimator.values(), k)


# --------------------------------------------------------------------------
# multi-Gibbs sampling


def multi_gibbs_eps_p(k: int, n: int, eps_G: float) -> float:
    return k * eps_G ** 2 / (300.0 * n)


@dataclass
class MultiGibbsPlan:
    """Everything fixed before the per-sample loop, plus closed-form outputs."""

    u: np.ndarray
    beta: float
    k: int
    eps_G: float
    eps_P: float
    delta: float
    head: np.ndarray
    u_tilde_head: np.ndarray
    u_star: float
    log_W: float
    log_E: float
    approximant: ExpApproximant
    post_amplitudes: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def W(self) -> float:
        return math.exp(self.log_W)

    @property
    def E(self) -> float:
        return math.exp(self.log_E)

    @property
    def E_over_W(self) -> float:
        return math.exp(self.log_E - self.log_W)

    @property
    def post_norm_sq(self) -> float:
        return float(np.sum(self.post_amplitudes ** 2))

    @property
    def guess_levels(self) -> np.ndarray:
        """``max(u~_i, u~*)`` for every index."""
        lv = np.full(self.n, self.u_star)
        lv[self.head] = self.u_tilde_head
        return lv

    def guess_distribution(self) -> np.ndarray:
        return np.exp(self.guess_levels - self.log_W)

    def output_distribution(self) -> np.ndarray:
        a2 = self.post_amplitudes ** 2
        return a2 / a2.sum()

    def acceptance(self) -> np.ndarray:
        """Post-selection probabilities, ``16 P^2`` scaled to stay <= 1."""
        a = 16.0 * self.post_amplitudes ** 2 / self.guess_distribution()
        return a / max(1.0, float(a.max()))

    def sandwich(self) -> tuple[float, float, float]:
        ew = self.E_over_W
        return ew / 16 - 2 * self.eps_P, self.post_norm_sq, ew / 16 + 3 * self.eps_P

    def tv_bound(self) -> float:
        return math.sqrt(88 * self.n * self.eps_P / (self.k * math.exp(-2 * self.beta * self.delta)))


def build_multi_gibbs_plan(u, beta: float, k: int, eps_G: float, seed: int = 0,
                           grid_offset: float | None = None, cost: CostModel | None = None,
                           ledger: QueryLedger | None = None) -> MultiGibbsPlan:
    u = np.asarray(u, dtype=float)
    n = u.size
    if beta < 1.0:
        raise OracleError("multi-Gibbs sampling needs beta >= 1")
    if not 0.0 < eps_G < 1.0:
        raise OracleError("multi-Gibbs sampling needs 0 < eps_G < 1")
    if not 1 <= k <= n:
        raise OracleError(f"need 1 <= k <= n, got k={k}, n={n}")
    cost = cost or CostModel()
    ledger = ledger if ledger is not None else QueryLedger()

    est = ConsistentEstimator(u, beta, seed, grid_offset, cost, ledger)
    head = k_max_find(est, n, k)
    u_tilde_head = est.query(head)
    u_star = float(u_tilde_head.min())
    log_W = float(logsumexp(np.append(u_tilde_head, u_star), b=np.append(np.ones(k), n - k))
                  if k < n else logsumexp(u_tilde_head))
    log_E = float(logsumexp(u))

    eps_P = multi_gibbs_eps_p(k, n, eps_G)
    approx = cached_exp_approximant(2.0 * beta, eps_P)

    levels = np.full(n, u_star)
    levels[head] = u_tilde_head
    x = (u - levels) / (4.0 * beta)
    if np.any(x > 1e-12) or np.any(x < -1.0):
        raise OracleError("polynomial argument left [-1, 0]; estimates are inconsistent")
    amps = approx(np.clip(x, -1.0, 0.0)) * np.exp(0.5 * (levels - log_W))
    return MultiGibbsPlan(u, beta, k, eps_G, eps_P, 1.0 / (2.0 * beta), head, u_tilde_head,
                          u_star, log_W, log_E, approx, amps)


def amplification_cost(plan: MultiGibbsPlan, cost: CostModel) -> int:
    """Queries for one amplified post-selection."""
    reps = math.ceil(cost.amplification_constant * math.sqrt(1.0 / plan.post_norm_sq))
    return reps * plan.approximant.degree * cost.degree_step_cost


def multi_gibbs_sample(req: GibbsRequest, u, rng: np.random.Generator, seed: int = 0,
                       cost: CostModel | None = None, grid_offset: float | None = None):
    """Returns ``(indices, ledger, plan)`` for ``k`` samples targeting ``softmax(u)``."""
    start = time.perf_counter()
    cost = cost or CostModel()
    ledger = QueryLedger()
    plan = build_multi_gibbs_plan(u, req.beta, req.k, req.eps_G, seed, grid_offset, cost, ledger)
    if plan.post_norm_sq < UNDERFLOW:
        raise OracleError(f"post-selection probability underflow ({plan.post_norm_sq:.3e})")
    indices = _rejection_sample(plan, req.k, rng)
    ledger.amplification += req.k * amplification_cost(plan, cost)
    ledger.poly_degree += plan.approximant.degree
    ledger.calls += 1
    ledger.samples += req.k
    ledger.wall_clock += time.perf_counter() - start
    return indices, ledger, plan


def _rejection_sample(plan: MultiGibbsPlan, k: int, rng: np.random.Generator) -> np.ndarray:
    guess = plan.guess_distribution()
    accept = plan.acceptance()
    rate = float(guess @ accept)
    out = []
    need = k
    while need > 0:
        batch = max(16, int(1.5 * need / rate) + 1)
        prop = _inverse_cdf(guess, rng.random(batch))
        ok = prop[rng.random(batch) < accept[prop]]
        out.append(ok[:need])
        need -= min(need, ok.size)
    return np.concatenate(out)


def naive_multi_gibbs_ledger(u, beta: float, k: int, eps_G: float, seed: int = 0,
                             cost: CostModel | None = None) -> QueryLedger:
    """Cost of k independent single-sample runs of the pipeline."""
    cost = cost or CostModel()
    total = QueryLedger()
    for j in range(k):
        led = QueryLedger()
        plan = build_multi_gibbs_plan(u, beta, 1, eps_G, seed + j, cost=cost, ledger=led)
        led.amplification += amplification_cost(plan, cost)
        led.poly_degree += plan.approximant.degree
        led.calls += 1
        led.samples += 1
        total.absorb(led)
    return total


# --------------------------------------------------------------------------
# oracle objects used by the solver


def _round_up_pow2(x: float) -> float:
    return float(2.0 ** math.ceil(math.log2(max(x, 1.0))))


class GibbsOracle:
    kind = "abstract"

    def __init__(self, eps_G: float = 0.0):
        self.eps_G = eps_G
        self.ledger = QueryLedger()

    def distribution(self, p, k: int = 1, seed: int = 0) -> np.ndarray:
        raise NotImplementedError

    def sample(self, p, k: int, rng: np.random.Generator, seed: int = 0,
               beta: float | None = None) -> np.ndarray:
        raise NotImplementedError


class ExactOracle(GibbsOracle):
    kind = "exact"

    def __init__(self, eps_G: float = 0.0):
        super().__init__(0.0)

    def distribution(self, p, k=1, seed=0):
        return gibbs_distribution(p)

    def sample(self, p, k, rng, seed=0, beta=None):
        return exact_sample(GibbsRequest(p, k, 0.0, beta), rng)


class NoisyOracle(GibbsOracle):
    kind = "noisy"

    def __init__(self, eps_G: float, mode: str = "extreme"):
        super().__init__(eps_G)
        if mode not in ("extreme", "random"):
            raise OracleError(f"unknown perturbation mode {mode!r}")
        self.mode = mode

    def distribution(self, p, k=1, seed=0):
        rng = np.random.default_rng(seed) if self.mode == "random" else None
        return perturbed_distribution(p, self.eps_G, self.mode, rng)

    def sample(self, p, k, rng, seed=0, beta=None):
        q = self.distribution(p, k, seed)
        return _inverse_cdf(q, rng.random(k))


class QuantumSimOracle(GibbsOracle):
    """Multi-Gibbs pipeline.  Inputs are shifted to ``u = p - min(p) >= 0``
    and ``beta`` is rounded up to a power of two (>= 1) so polynomial
    approximants can be reused across calls."""

    kind = "quantum-sim"

    def __init__(self, eps_G: float, cost: CostModel | None = None):
        if not 0.0 < eps_G < 1.0:
            raise OracleError("the quantum-sim oracle needs 0 < eps_G < 1")
        super().__init__(eps_G)
        self.cost = cost or CostModel()
        self._synthesised: set[tuple[float, float]] = set()

    def _prepare(self, p, beta):
        p = np.asarray(p, dtype=float)
        u = p - p.min()
        bound = float(u.max())
        if beta is not None:
            bound = max(bound, float(beta))
        return u, _round_up_pow2(bound)

    def plan(self, p, k, seed=0, beta=None) -> MultiGibbsPlan:
        u, b = self._prepare(p, beta)
        return build_multi_gibbs_plan(u, b, k, self.eps_G, seed, cost=self.cost)

    def distribution(self, p, k=1, seed=0):
        return self.plan(p, k, seed).output_distribution()

    def sample(self, p, k, rng, seed=0, beta=None):
        u, b = self._prepare(p, beta)
        start = time.perf_counter()
        # the head set holds at most n indices; beyond that the one plan is
        # reused and only the per-sample post-selection is repeated
        led = QueryLedger()
        plan = build_multi_gibbs_plan(u, b, min(k, u.size), self.eps_G, seed, cost=self.cost,
                                      ledger=led)
        if plan.post_norm_sq < UNDERFLOW:
            raise OracleError(f"post-selection probability underflow ({plan.post_norm_sq:.3e})")
        idx = _rejection_sample(plan, k, rng)
        led.amplification += k * amplification_cost(plan, self.cost)
        led.poly_degree += plan.approximant.degree
        led.calls += 1
        led.samples += k
        key = (2.0 * b, plan.eps_P)
        if key not in self._synthesised:
            self._synthesised.add(key)
            led.synthesis += plan.approximant.degree ** 3
        led.wall_clock += time.perf_counter() - start
        self.ledger.absorb(led)
        return idx


def make_oracle(kind: str, eps_G: float = 0.0, **kwargs) -> GibbsOracle:
    if kind == "exact":
        return ExactOracle()
    if kind == "noisy":
        return NoisyOracle(eps_G, **kwargs)
    if kind == "quantum-sim":
        return QuantumSimOracle(eps_G, **kwargs)
    raise OracleError(f"unknown oracle kind {kind!r}; expected one of {ORACLE_KINDS}")
