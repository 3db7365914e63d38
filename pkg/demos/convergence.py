"""Median Nash gap against horizon on a 16-action cyclic game, exact sampler."""
import logging

import numpy as np

from zerosum import GameMatrix
from zerosum.harness import ExperimentSpec, convergence_report

logging.getLogger("zerosum").setLevel(logging.ERROR)
c = (np.eye(16) + np.roll(np.eye(16), 1, axis=1)) / 2
spec = ExperimentSpec(m=16, n=16, lam=0.25, trials=15, workers=2, sweep="convergence",
                      Ts=(32, 64, 128, 256, 512))
rep = convergence_report(spec, game=GameMatrix(c))
for T, g in zip(spec.Ts, rep.aggregate["median_gap"]):
    print(f"T={T:4d}  median gap {g:.5f}")
print(f"log-log slope {rep.fits['gap_slope']:.3f}")
