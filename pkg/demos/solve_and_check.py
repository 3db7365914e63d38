"""Solve a random 12x9 game with the sample-based optimistic solver and
compare the result against scipy's LP solution of the same game."""
import logging

import numpy as np
from scipy.optimize import linprog

from zerosum import SolverConfig, nash_gap, pomwu_solve, total_regret
from zerosum.harness import generate_game

logging.getLogger("zerosum").setLevel(logging.ERROR)


def lp_value(a):
    # min z s.t. A^T u <= z, sum u = 1, u >= 0
    m, n = a.shape
    c = np.append(np.zeros(m), 1.0)
    res = linprog(c, A_ub=np.hstack([a.T, -np.ones((n, 1))]), b_ub=np.zeros(n),
                  A_eq=np.append(np.ones(m), 0.0)[None], b_eq=[1.0],
                  bounds=[(0, None)] * m + [(None, None)])
    return res.x[-1]


game = generate_game(12, 9, "uniform", seed=3)
value = lp_value(game.entries)
print(f"LP value {value:.5f}")
for T in (64, 256, 1024):
    u, v, trace, _ = pomwu_solve(game, SolverConfig(T=T, lam=0.25, seed=1))
    est = float(u.dense() @ game.entries @ v.dense())
    print(f"T={T:5d}  u^T A v={est:.5f}  gap={nash_gap(game, u, v):.5f}  "
          f"regret={total_regret(trace):.3f}")
