"""Entropy-regularised optimistic FTRL: the deterministic full-gradient baseline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import GameMatrix, SimplexVector, TraceRecorder, GameError
from .oracles import gibbs_distribution

RVU_SLACK = 1e-9


def negative_entropy(p) -> float:
    """``sum_i p_i log p_i`` with ``0 log 0 = 0``."""
    w = p.weights if isinstance(p, SimplexVector) else np.asarray(p, dtype=float)
    w = w[w > 0]
    return float(np.sum(w * np.log(w)))


def _check_step(lam):
    if not 0.0 < lam <= 0.5:
        raise ValueError(f"step size must lie in (0, 1/2], got {lam}")


@dataclass
class FtrlState:
    """Cumulative loss ``L_{t-1}`` and prediction ``m_t`` for one player."""

    dim: int
    lam: float
    cum_loss: np.ndarray = None
    prediction: np.ndarray = None
    t: int = 1

    def __post_init__(self):
        _check_step(self.lam)
        if self.cum_loss is None:
            self.cum_loss = np.zeros(self.dim)
        if self.prediction is None:
            # m_1 = l_0 = 0
            self.prediction = np.zeros(self.dim)

    def observe(self, loss):
        loss = np.asarray(loss, dtype=float)
        if loss.shape != (self.dim,):
            raise GameError(f"loss has shape {loss.shape}, expected ({self.dim},)")
        self.cum_loss = self.cum_loss + loss
        self.prediction = loss
        self.t += 1


def ftrl_weights(state: FtrlState) -> np.ndarray:
    return gibbs_distribution(-state.lam * (state.cum_loss + state.prediction))


def ftrl_step(state: FtrlState) -> SimplexVector:
    """``argmin_x lam <L_{t-1} + m_t, x> + psi(x)`` in closed form."""
    return SimplexVector.from_dense(ftrl_weights(state))


@dataclass
class RvuReport:
    lhs: float
    rhs: float
    alpha: float
    beta: float
    gamma: float
    loss_variation: float
    decision_variation: float
    passed: bool = field(default=False)

    def as_verdict(self) -> dict:
        return {"name": "RVU (Opt-FTRL, l1/linf)", "lhs": self.lhs, "rhs": self.rhs,
                "passed": self.passed}


def rvu_check(loss_seq, decision_seq, lam: float) -> RvuReport:
    """Evaluate both sides of the RVU inequality with ``alpha = log n / lam``,
    ``beta = lam``, ``gamma = 1 / (4 lam)``; decisions in l1, losses in linf."""
    losses = np.asarray([np.asarray(l, dtype=float) for l in loss_seq])
    xs = np.asarray([d.dense() if isinstance(d, SimplexVector) else np.asarray(d, dtype=float)
                     for d in decision_seq])
    if losses.ndim != 2 or xs.shape != losses.shape:
        raise GameError(f"loss sequence {losses.shape} and decision sequence {xs.shape} differ")
    if losses.shape[0] < 2:
        raise GameError("need at least two rounds")
    n = losses.shape[1]
    realised = float(np.sum(losses * xs))
    best_fixed = float(losses.sum(axis=0).min())
    lhs = realised - best_fixed
    loss_var = float(np.sum(np.abs(np.diff(losses, axis=0)).max(axis=1) ** 2))
    dec_var = float(np.sum(np.abs(np.diff(xs, axis=0)).sum(axis=1) ** 2))
    alpha, beta, gamma = np.log(n) / lam, lam, 1.0 / (4.0 * lam)
    rhs = alpha + beta * loss_var - gamma * dec_var
    return RvuReport(lhs, rhs, alpha, beta, gamma, loss_var, dec_var, lhs <= rhs + RVU_SLACK)


@dataclass
class OptFtrlPlay:
    """Full sequences of a coupled Opt-FTRL run."""

    row_decisions: np.ndarray
    col_decisions: np.ndarray
    row_losses: np.ndarray
    col_losses: np.ndarray


def opt_ftrl_play(game: GameMatrix, T: int, lam: float) -> OptFtrlPlay:
    """Both players run Opt-FTRL with ``m_t = l_{t-1}`` against each other."""
    _check_step(lam)
    if T < 1:
        raise ValueError("T must be >= 1")
    a = game.entries
    row = FtrlState(game.m, lam)
    col = FtrlState(game.n, lam)
    xs, ys, lx, ly = [], [], [], []
    for _ in range(T):
        x = ftrl_weights(row)
        y = ftrl_weights(col)
        row_loss = a @ y
        col_loss = -(a.T @ x)
        row.observe(row_loss)
        col.observe(col_loss)
        xs.append(x)
        ys.append(y)
        lx.append(row_loss)
        ly.append(col_loss)
    return OptFtrlPlay(np.array(xs), np.array(ys), np.array(lx), np.array(ly))


def opt_ftrl_solve(game: GameMatrix, T: int, lam: float):
    """Returns ``(u_hat, v_hat, trace)`` with the averaged strategies."""
    game.require_rescaled()
    play = opt_ftrl_play(game, T, lam)
    rec = TraceRecorder(game.m, game.n)
    for x, y in zip(play.row_decisions, play.col_decisions):
        rec.record(game.entries, x, y)
    u_hat = SimplexVector.from_dense(_renormalise(play.row_decisions.mean(axis=0)))
    v_hat = SimplexVector.from_dense(_renormalise(play.col_decisions.mean(axis=0)))
    return u_hat, v_hat, rec.finish()


def _renormalise(p):
    p = np.clip(p, 0.0, None)
    return p / p.sum()
