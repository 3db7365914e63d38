"""Sample-based optimistic multiplicative weights for matrix games.

Each round the row player draws ``samples_per_round`` indices from the Gibbs
distribution of ``-A h_t`` and plays their empirical mean ``zeta_t``; the
column player does the same with ``A^T g_t``.  The iterates ``x, y`` are the
running sums of played strategies scaled by ``lam`` and ``g, h`` add the last
play once more (the optimistic prediction).
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .game import GameMatrix, SimplexVector, TraceRecorder
from .oracles import GibbsOracle, QueryLedger, gibbs_distribution, make_oracle

logger = logging.getLogger(__name__)

LAMBDA_MAX = math.sqrt(3.0) / 6.0
ROW, COL = 0, 1


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    T: int
    lam: float
    eps_G: float = 0.0
    seed: int = 0
    samples_per_round: int | None = None
    oracle: str = "exact"
    eps: float | None = None
    # sample the column player from the already-updated g (g_{t+1})
    column_uses_updated_g: bool = False
    record_residuals: bool = True

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if not 0.0 < self.lam < LAMBDA_MAX:
            raise ValueError(f"learning rate must lie in (0, sqrt(3)/6), got {self.lam}")
        if self.eps_G < 0:
            raise ValueError("eps_G must be >= 0")
        if self.samples_per_round is not None and self.samples_per_round < 1:
            raise ValueError("samples_per_round must be >= 1")

    @property
    def samples(self) -> int:
        return self.T if self.samples_per_round is None else self.samples_per_round

    @classmethod
    def for_target_gap(cls, eps: float, m: int, n: int, lam: float = 0.25, **kw) -> "SolverConfig":
        """Smallest T whose high-probability bound ``regret / T`` is below eps,
        with ``eps_G = 1/T``."""
        bound = 144 * lam + 3 * math.log(m * n) / lam + 12
        T = max(1, math.ceil(bound / eps))
        kw.setdefault("eps_G", 1.0 / T)
        return cls(T=T, lam=lam, eps=eps, **kw)

    def to_json(self) -> dict:
        return {"T": self.T, "lambda": self.lam, "eps_G": self.eps_G, "seed": self.seed,
                "samples_per_round": self.samples, "oracle": self.oracle, "eps": self.eps,
                "column_uses_updated_g": self.column_uses_updated_g}


@dataclass
class SolverState:
    x: np.ndarray
    g: np.ndarray
    y: np.ndarray
    h: np.ndarray
    u_counts: np.ndarray
    v_counts: np.ndarray
    t: int = 1
    recorder: TraceRecorder | None = field(default=None, repr=False)
    last_zeta: np.ndarray | None = None
    last_eta: np.ndarray | None = None

    @classmethod
    def initial(cls, m: int, n: int, residuals: bool = True) -> "SolverState":
        return cls(np.zeros(m), np.zeros(m), np.zeros(n), np.zeros(n),
                   np.zeros(m, dtype=np.int64), np.zeros(n, dtype=np.int64),
                   recorder=TraceRecorder(m, n, residuals))


def stream(seed: int, t: int, player: int) -> np.random.Generator:
    """Counter-based generator for one (round, player) pair.  Draw ``s`` of
    the sample block is the s-th output of this stream."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(t, player))))


def estimation_seed(seed: int, t: int, player: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(t, player, 1)).generate_state(1)[0])


def _draw(oracle, p, beta, s, seed, t, player):
    try:
        return oracle.sample(p, s, stream(seed, t, player), estimation_seed(seed, t, player), beta)
    except Exception as exc:
        who = "row" if player == ROW else "column"
        raise SolverError(f"Gibbs oracle failed in round {t} ({who} player): {exc}") from exc


def pomwu_round(state: SolverState, game: GameMatrix, oracle: GibbsOracle,
                cfg: SolverConfig) -> SolverState:
    a = game.entries
    lam = cfg.lam
    s = cfg.samples
    t = state.t

    # (1 - A) h differs from -A h by a constant, so the Gibbs law is the same
    h_mass = float(state.h.sum())
    p_row = h_mass - a @ state.h
    idx = _draw(oracle, p_row, h_mass, s, cfg.seed, t, ROW)
    counts = np.bincount(idx, minlength=game.m)
    zeta = counts / s
    state.x = state.x + lam * zeta
    g_prev = state.g
    state.g = state.x + lam * zeta
    state.u_counts += counts

    g_used = state.g if cfg.column_uses_updated_g else g_prev
    p_col = a.T @ g_used
    idx = _draw(oracle, p_col, float(g_used.sum()), s, cfg.seed, t, COL)
    counts = np.bincount(idx, minlength=game.n)
    eta = counts / s
    state.y = state.y + lam * eta
    h_prev = state.h
    state.h = state.y + lam * eta
    state.v_counts += counts

    if state.recorder is not None:
        if cfg.record_residuals:
            u_t = gibbs_distribution(-(a @ h_prev))
            v_t = gibbs_distribution(a.T @ g_used)
            state.recorder.record(a, zeta, eta, np.abs(zeta - u_t).sum() ** 2,
                                  np.abs(eta - v_t).sum() ** 2)
        else:
            state.recorder.record(a, zeta, eta)
    state.last_zeta, state.last_eta = zeta, eta
    state.t = t + 1
    return state


@functools.lru_cache(maxsize=64)
def _warn_long_horizon(T: int, size: int):
    logger.warning("T=%d exceeds m+n=%d; the per-round cost analysis assumes T = O~(m+n)",
                   T, size)


def pomwu_solve(game: GameMatrix, cfg: SolverConfig, oracle_factory=None):
    """Run ``cfg.T`` rounds.  Returns ``(u_hat, v_hat, trace, ledger)``."""
    game.require_rescaled()
    if cfg.T > game.m + game.n:
        _warn_long_horizon(cfg.T, game.m + game.n)
    if oracle_factory is None:
        oracle = make_oracle(cfg.oracle, cfg.eps_G)
    else:
        oracle = oracle_factory(cfg)
    state = SolverState.initial(game.m, game.n, cfg.record_residuals)
    for _ in range(cfg.T):
        pomwu_round(state, game, oracle, cfg)
    total = cfg.samples * cfg.T
    u_hat = SimplexVector.from_dense(state.u_counts / total)
    v_hat = SimplexVector.from_dense(state.v_counts / total)
    ledger = oracle.ledger if oracle.ledger is not None else QueryLedger()
    return u_hat, v_hat, state.recorder.finish(), ledger


def regret_bound_exact(lam: float, m: int, n: int) -> float:
    """High-probability total-regret bound for ``eps_G = 1/T``."""
    return 144 * lam + 3 * math.log(m * n) / lam + 12


def regret_bound_noisy(lam: float, m: int, n: int, T: int, eps_G: float) -> float:
    """High-probability total-regret bound for a sampler with TV error eps_G."""
    return 72 * lam + 3 * math.log(m * n) / lam + 72 * T * lam * eps_G ** 2 + 12 * T * eps_G
