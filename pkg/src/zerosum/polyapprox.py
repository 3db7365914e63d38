"""Bounded polynomial approximation of the quarter exponential.

``build_exp_approximant(beta, eps)`` returns a Chebyshev series ``P`` with
``|P(x) - exp(beta x) / 4| <= eps`` on ``[-1, 0]`` and ``|P(x)| <= 1`` on
``[-1, 1]``.

Interpolating ``exp(beta x) / 4`` alone would blow up to ``exp(beta) / 4`` at
``x = 1``, so the interpolated function carries a smooth cut-off::

    g(x) = exp(beta x) / 4 * erfc(gamma (x - x0)) / 2,   x0 = ln 2 / beta

``gamma`` is chosen so the cut-off costs at most ``eps / 4`` on ``[-1, 0]``;
``g`` is entire and stays below ~1/2 on ``[-1, 1]``, and its Chebyshev
coefficients decay after ``O(gamma sqrt(log 1/eps)) = O(beta log 1/eps)``
terms.  The truncation point is certified by the coefficient tail sum.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.fft import dct
from scipy.special import erfc, erfcinv

DEFAULT_DEGREE_CONSTANT = 8.0
MAX_DEGREE = 10**6
BOUND_TOL = 1e-9
_VERIFY_POINTS = 10_001


class ApproximationError(ValueError):
    pass


@dataclass(frozen=True)
class ExpApproximant:
    beta: float
    eps: float
    coefficients: np.ndarray
    degree_constant: float = DEFAULT_DEGREE_CONSTANT

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def l1_norm(self) -> float:
        """``sum |c_j|``; at most 1 certifies ``|P| <= 1`` on ``[-1, 1]``."""
        return float(np.abs(self.coefficients).sum())

    @property
    def degree_envelope(self) -> float:
        return self.degree_constant * self.beta * np.log(1.0 / self.eps) + 16

    def __call__(self, x):
        return evaluate(self, x)

    def to_json(self) -> str:
        return json.dumps({"beta": self.beta, "eps": self.eps, "degree": self.degree,
                           "degree_constant": self.degree_constant,
                           "coefficients": [float(c) for c in self.coefficients]})

    @classmethod
    def from_json(cls, s: str) -> "ExpApproximant":
        d = json.loads(s)
        return cls(d["beta"], d["eps"], np.array(d["coefficients"]),
                   d.get("degree_constant", DEFAULT_DEGREE_CONSTANT))


def evaluate(approx: ExpApproximant, x):
    """Clenshaw evaluation; ``x`` must lie in ``[-1, 1]``."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + 1e-12):
        raise ApproximationError("approximant is only defined on [-1, 1]")
    out = cheb.chebval(np.clip(xa, -1.0, 1.0), approx.coefficients)
    return float(out) if np.ndim(out) == 0 else out


def _cheb_coefficients(f, npts: int) -> np.ndarray:
    k = np.arange(npts)
    nodes = np.cos(np.pi * (k + 0.5) / npts)
    c = dct(f(nodes), type=2) / npts
    c[0] /= 2.0
    return c


def _verify(coef, beta, eps) -> tuple[float, float]:
    neg = np.linspace(-1.0, 0.0, _VERIFY_POINTS)
    full = np.linspace(-1.0, 1.0, _VERIFY_POINTS)
    err = np.abs(cheb.chebval(neg, coef) - 0.25 * np.exp(beta * neg)).max()
    peak = np.abs(cheb.chebval(full, coef)).max()
    return float(err), float(peak)


def build_exp_approximant(beta: float, eps: float,
                          degree_constant: float = DEFAULT_DEGREE_CONSTANT) -> ExpApproximant:
    if not beta >= 1.0:
        raise ApproximationError(f"beta must be >= 1, got {beta}")
    if not 0.0 < eps < 0.5:
        raise ApproximationError(f"eps must lie in (0, 1/2), got {eps}")

    x0 = np.log(2.0) / beta
    gamma = erfcinv(2.0 * eps) / x0

    def g(x):
        return 0.25 * np.exp(beta * x) * 0.5 * erfc(gamma * (x - x0))

    # the cut-off has width ~1/gamma, so coarser grids alias and can look converged
    npts = 1 << int(np.ceil(np.log2(max(64.0, 4.0 * gamma))))
    c = _cheb_coefficients(g, npts)
    while True:
        finer = _cheb_coefficients(g, 2 * npts)
        if (np.abs(finer[-8:]).max() < 1e-3 * eps
                and np.abs(finer[:npts] - c).sum() < 1e-3 * eps):
            c = finer[:npts]
            break
        npts *= 2
        c = finer
        if npts > 2 * MAX_DEGREE:
            raise ApproximationError(f"degree would exceed {MAX_DEGREE} for beta={beta}, eps={eps}")

    # tail[d] = sum_{j > d} |c_j|
    tail = np.concatenate([np.cumsum(np.abs(c)[::-1])[::-1][1:], [0.0]])
    d = int(np.argmax(tail <= eps / 4))
    damp = 1.0 - eps / 2
    while True:
        coef = c[: d + 1] * damp
        err, peak = _verify(coef, beta, eps)
        if err <= eps and peak <= 1.0 + BOUND_TOL:
            break
        d += max(1, d // 8)
        if d >= npts:
            raise ApproximationError("verification failed at every available degree")
    return ExpApproximant(float(beta), float(eps), coef, degree_constant)


@functools.lru_cache(maxsize=256)
def cached_exp_approximant(beta: float, eps: float) -> ExpApproximant:
    return build_exp_approximant(beta, eps)
