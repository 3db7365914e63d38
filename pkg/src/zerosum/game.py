"""Matrix games: data model, preprocessing and equilibrium evaluation.

Convention: the row player picks ``u`` and *minimises* ``u^T A v``; the
column player picks ``v`` and maximises it.  Row losses are ``A v`` and
column losses are ``-A^T u``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

SIMPLEX_TOL = 1e-9


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class SimplexVector:
    """Probability vector stored as a sparse support list (0-based indices)."""

    dimension: int
    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)
        if self.dimension < 1:
            raise GameError("dimension must be positive")
        if idx.shape != w.shape or idx.ndim != 1:
            raise GameError("indices and weights must be 1-d arrays of equal length")
        if idx.size and (idx[0] < 0 or idx[-1] >= self.dimension or np.any(np.diff(idx) <= 0)):
            raise GameError("indices must be strictly increasing and within range")
        if np.any(w < 0):
            raise GameError("negative weight in simplex vector")
        if abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise GameError(f"weights sum to {w.sum()!r}, not 1")

    @classmethod
    def from_dense(cls, p) -> "SimplexVector":
        p = np.asarray(p, dtype=float)
        (idx,) = np.nonzero(p)
        return cls(p.size, idx, p[idx])

    @classmethod
    def uniform(cls, n: int) -> "SimplexVector":
        return cls(n, np.arange(n), np.full(n, 1.0 / n))

    @classmethod
    def vertex(cls, n: int, i: int) -> "SimplexVector":
        return cls(n, np.array([i]), np.array([1.0]))

    def dense(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        out[self.indices] = self.weights
        return out

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "support": [[int(i), float(w)] for i, w in zip(self.indices, self.weights)],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SimplexVector":
        support = d["support"]
        idx = [s[0] for s in support]
        w = [s[1] for s in support]
        return cls(int(d["dimension"]), np.array(idx, dtype=np.int64), np.array(w, dtype=float))


def _as_dense(p) -> np.ndarray:
    if isinstance(p, SimplexVector):
        return p.dense()
    return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class GameMatrix:
    """Payoff matrix with the affine map that produced it.

    ``entries = (raw + shift) * scale``; ``norm_bound`` is an upper bound on
    the operator 2-norm of ``entries``.
    """

    entries: np.ndarray
    norm_bound: float = field(default=None)
    shift: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.size == 0:
            raise GameError("payoff matrix must be a nonempty 2-d array")
        if not np.all(np.isfinite(a)):
            bad = np.argwhere(~np.isfinite(a))[0]
            raise GameError(f"non-finite payoff at row {bad[0]}, column {bad[1]}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.norm_bound is None:
            object.__setattr__(self, "norm_bound", operator_norm(a))

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def is_rescaled(self) -> bool:
        a = self.entries
        return bool(a.min() >= 0.0 and a.max() <= 1.0 and self.norm_bound <= 1.0 + 1e-12)

    def require_rescaled(self):
        if not self.is_rescaled:
            raise GameError("game must be rescaled (entries in [0,1], operator norm <= 1); "
                            "call rescale_game first")


DENSE_SVD_LIMIT = 512


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value.  Big matrices use Lanczos, padded by a relative
    1e-10 so the result stays an upper bound."""
    if min(a.shape) <= DENSE_SVD_LIMIT:
        return float(np.linalg.norm(a, 2))
    from scipy.sparse.linalg import svds
    s = svds(a, k=1, tol=0, return_singular_vectors=False, random_state=0)
    return float(s[0]) * (1.0 + 1e-10)


def rescale_game(a) -> GameMatrix:
    """Map ``A`` to ``(A + c) / 2`` with ``c = max|A_ij|``, then divide by
    ``max(||.||_2, 1)``.  Best-response sets are unchanged."""
    raw = np.array(a, dtype=float)
    if raw.ndim != 2 or raw.size == 0:
        raise GameError("payoff matrix must be a nonempty 2-d array")
    if not np.all(np.isfinite(raw)):
        bad = np.argwhere(~np.isfinite(raw))[0]
        raise GameError(f"non-finite payoff at row {bad[0]}, column {bad[1]}")
    c = float(np.abs(raw).max())
    shifted = (raw + c) / 2.0
    norm = operator_norm(shifted)
    div = max(norm, 1.0)
    out = shifted / div
    np.clip(out, 0.0, 1.0, out=out)
    return GameMatrix(out, norm_bound=min(norm / div, 1.0), shift=c, scale=0.5 / div)


def pad_to_square(game: GameMatrix) -> GameMatrix:
    """Zero-pad to an (m+n) x (m+n) matrix; a square game is returned as is."""
    m, n = game.m, game.n
    if m == n:
        return game
    out = np.zeros((m + n, m + n))
    out[:m, :n] = game.entries
    return GameMatrix(out, norm_bound=game.norm_bound, shift=game.shift, scale=game.scale)


def best_response_value(game: GameMatrix, u, v) -> tuple[float, float]:
    """``(max_j (A^T u)_j, min_i (A v)_i)``."""
    a = game.entries
    u, v = _as_dense(u), _as_dense(v)
    if u.shape != (game.m,) or v.shape != (game.n,):
        raise GameError(f"strategy shapes {u.shape}, {v.shape} do not match game {a.shape}")
    return float((a.T @ u).max()), float((a @ v).min())


def nash_gap(game: GameMatrix, u, v) -> float:
    hi, lo = best_response_value(game, u, v)
    return hi - lo


@dataclass
class RegretDiagnostics:
    """Trace of a T-round coupled play.

    ``row_losses[t] = <x_t, A y_t>`` with ``x_t, y_t`` the strategies played
    in round t; the column player's loss is its negative.  The cumulative
    vectors hold ``sum_t A y_t`` and ``sum_t A^T x_t`` so the best fixed
    action in hindsight can be evaluated without replaying the game.
    """

    row_losses: np.ndarray
    cum_row_loss_vec: np.ndarray
    cum_col_payoff_vec: np.ndarray
    regret_curve: np.ndarray | None = None
    row_residual_sq: np.ndarray | None = None
    col_residual_sq: np.ndarray | None = None

    @property
    def T(self) -> int:
        return int(len(self.row_losses))

    @property
    def col_losses(self) -> np.ndarray:
        return -self.row_losses

    @property
    def row_regret(self) -> float:
        return float(self.row_losses.sum() - self.cum_row_loss_vec.min())

    @property
    def col_regret(self) -> float:
        return float(self.col_losses.sum() + self.cum_col_payoff_vec.max())


class TraceRecorder:
    """Accumulates a RegretDiagnostics trace round by round."""

    def __init__(self, m: int, n: int, residuals: bool = False):
        self._losses = []
        self._curve = []
        self._rres = [] if residuals else None
        self._cres = [] if residuals else None
        self._row_vec = np.zeros(m)
        self._col_vec = np.zeros(n)
        self._played = 0.0

    def record(self, a: np.ndarray, x: np.ndarray, y: np.ndarray, row_res=None, col_res=None):
        ay = a @ y
        atx = a.T @ x
        loss = float(x @ ay)
        self._losses.append(loss)
        self._row_vec += ay
        self._col_vec += atx
        # R(t) + R'(t) = max_j (sum A^T x)_j - min_i (sum A y)_i
        self._curve.append(float(self._col_vec.max() - self._row_vec.min()))
        if self._rres is not None:
            self._rres.append(row_res)
            self._cres.append(col_res)

    def finish(self) -> RegretDiagnostics:
        return RegretDiagnostics(
            row_losses=np.array(self._losses),
            cum_row_loss_vec=self._row_vec.copy(),
            cum_col_payoff_vec=self._col_vec.copy(),
            regret_curve=np.array(self._curve),
            row_residual_sq=None if self._rres is None else np.array(self._rres),
            col_residual_sq=None if self._cres is None else np.array(self._cres),
        )


def total_regret(trace: RegretDiagnostics) -> float:
    if trace.T == 0:
        raise GameError("empty trace")
    return trace.row_regret + trace.col_regret


def load_matrix_csv(path) -> np.ndarray:
    """Read the ``m,n`` header + row-major CSV matrix format."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise GameError(f"{path}: empty matrix file")
    try:
        m, n = (int(c) for c in rows[0])
    except ValueError as exc:
        raise GameError(f"{path}: first line must be 'm,n'") from exc
    body = rows[1:]
    if len(body) != m or any(len(r) != n for r in body):
        raise GameError(f"{path}: expected {m} rows of {n} values")
    return np.array([[float(c) for c in r] for r in body])


def save_matrix_csv(path, a):
    a = np.asarray(a, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(a.shape)
        for row in a:
            w.writerow([repr(float(x)) for x in row])
