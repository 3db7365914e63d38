"""Experiment driver: run descriptors, game generation, multi-seed trials and reports.

A report is plain JSON.  Everything except the ``timestamp`` field is a pure
function of the run descriptor, so two runs of the same descriptor give byte-identical
files once that field is dropped.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .ftrl import opt_ftrl_play, rvu_check
from .game import (GameMatrix, SimplexVector, TraceRecorder, load_matrix_csv, nash_gap,
                   rescale_game, total_regret)
from .oracles import (ORACLE_KINDS, GibbsRequest, QueryLedger, build_multi_gibbs_plan,
                      gibbs_distribution, multi_gibbs_sample, naive_multi_gibbs_ledger,
                      tv_distance)
from .polyapprox import build_exp_approximant
from .solver import LAMBDA_MAX, SolverConfig, pomwu_solve, regret_bound_exact, regret_bound_noisy

DISTRIBUTIONS = ("uniform", "bernoulli", "diagonal")
SOLVERS = ("pomwu", "opt-ftrl")
SWEEPS = ("convergence", "ledger")
INPUT_FAMILIES = ("uniform", "zipf", "heavy")
OUT_ENV = "ZEROSUM_OUT"

QUANTUM_NOTE = ("Absolute quantum running times are not reproducible on classical hardware; "
                "exponents fitted to the charged-query ledger stand in for them.")


class SpecError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid experiment spec:\n  - " + "\n  - ".join(self.problems))


# --------------------------------------------------------------------------
# games


def generate_game(m: int, n: int, dist: str = "uniform", seed: int = 0) -> GameMatrix:
    """Seeded random game, always passed through ``rescale_game``.

    ``uniform`` draws entries from U[-1, 1], ``bernoulli`` from {-1, +1} and
    ``diagonal`` puts +1 on the diagonal and -1 elsewhere (no randomness), which
    rescales to the m x n identity.
    """
    if m < 1 or n < 1:
        raise ValueError(f"game dimensions must be positive, got {m}x{n}")
    rng = np.random.default_rng(seed)
    if dist == "uniform":
        raw = rng.uniform(-1.0, 1.0, size=(m, n))
    elif dist == "bernoulli":
        raw = np.where(rng.random((m, n)) < 0.5, -1.0, 1.0)
    elif dist == "diagonal":
        raw = 2.0 * np.eye(m, n) - 1.0
    else:
        raise ValueError(f"unknown distribution {dist!r}; expected one of {DISTRIBUTIONS}")
    return rescale_game(raw)


def game_digest(game: GameMatrix) -> str:
    return hashlib.sha256(np.ascontiguousarray(game.entries).tobytes()).hexdigest()[:16]


# --------------------------------------------------------------------------
# spec


@dataclass
class ExperimentSpec:
    game: str | None = None          # CSV path; random generation otherwise
    m: int = 8
    n: int = 8
    dist: str = "uniform"
    game_seed: int = 0
    solver: str = "pomwu"
    oracle: str = "exact"
    T: int | None = 128
    lam: float = 0.2
    eps_G: float | None = None       # None: 1/T for the sampling oracles, 0 for exact
    eps: float | None = None         # target gap; picks T when T is None
    samples_per_round: int | None = None
    seed: int = 0
    trials: int = 1
    workers: int = 1
    out: str | None = None
    sweep: str | None = None
    Ts: tuple = (32, 64, 128, 256, 512)

    def problems(self) -> list[str]:
        """Every invalid field, in one pass."""
        bad = []
        if self.game is not None:
            if not Path(self.game).is_file():
                bad.append(f"game file {self.game!r} does not exist")
        else:
            if not (isinstance(self.m, int) and self.m >= 1):
                bad.append(f"m must be a positive integer, got {self.m!r}")
            if not (isinstance(self.n, int) and self.n >= 1):
                bad.append(f"n must be a positive integer, got {self.n!r}")
            if self.dist not in DISTRIBUTIONS:
                bad.append(f"dist must be one of {DISTRIBUTIONS}, got {self.dist!r}")
        if self.solver not in SOLVERS:
            bad.append(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.oracle not in ORACLE_KINDS:
            bad.append(f"oracle must be one of {ORACLE_KINDS}, got {self.oracle!r}")
        if self.solver == "opt-ftrl" and self.oracle != "exact":
            bad.append("opt-ftrl uses full gradients; oracle must be 'exact'")
        if self.T is None and self.eps is None:
            bad.append("give T or a target gap eps")
        if self.T is not None and not (isinstance(self.T, int) and self.T >= 1):
            bad.append(f"T must be a positive integer, got {self.T!r}")
        if self.eps is not None and not self.eps > 0:
            bad.append(f"eps must be positive, got {self.eps!r}")
        lam_ok = isinstance(self.lam, (int, float)) and (
            0 < self.lam <= 0.5 if self.solver == "opt-ftrl" else 0 < self.lam < LAMBDA_MAX)
        if not lam_ok:
            rng = "(0, 1/2]" if self.solver == "opt-ftrl" else "(0, sqrt(3)/6)"
            bad.append(f"lambda must lie in {rng} for {self.solver}, got {self.lam!r}")
        if self.eps_G is not None and not 0 <= self.eps_G < 1:
            bad.append(f"eps_G must lie in [0, 1), got {self.eps_G!r}")
        if self.oracle == "quantum-sim" and self.eps_G == 0:
            bad.append("the quantum-sim oracle needs eps_G > 0")
        if self.samples_per_round is not None and not self.samples_per_round >= 1:
            bad.append(f"samples_per_round must be >= 1, got {self.samples_per_round!r}")
        if not (isinstance(self.trials, int) and self.trials >= 1):
            bad.append(f"trials must be >= 1, got {self.trials!r}")
        if not (isinstance(self.workers, int) and self.workers >= 1):
            bad.append(f"workers must be >= 1, got {self.workers!r}")
        if self.sweep is not None and self.sweep not in SWEEPS:
            bad.append(f"sweep must be one of {SWEEPS}, got {self.sweep!r}")
        if self.sweep == "convergence" and (len(self.Ts) < 2 or min(self.Ts) < 1):
            bad.append("a convergence sweep needs at least two positive horizons")
        return bad

    def validate(self) -> "ExperimentSpec":
        bad = self.problems()
        if bad:
            raise SpecError(bad)
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        names = {f.name for f in fields(cls)}
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        unknown = sorted(set(d) - names)
        if unknown:
            raise SpecError([f"unknown field {k!r}" for k in unknown])
        if "Ts" in d:
            d["Ts"] = tuple(d["Ts"])
        return cls(**d)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_json(self) -> dict:
        d = asdict(self)
        d["Ts"] = list(self.Ts)
        return d

    def horizon(self, m: int, n: int) -> int:
        if self.T is not None:
            return self.T
        return SolverConfig.for_target_gap(self.eps, m, n, self.lam).T

    def oracle_eps(self, T: int) -> float:
        if self.eps_G is not None:
            return self.eps_G
        return 0.0 if self.oracle == "exact" else 1.0 / T

    def load_game(self) -> GameMatrix:
        if self.game is not None:
            return rescale_game(load_matrix_csv(self.game))
        return generate_game(self.m, self.n, self.dist, self.game_seed)


def trial_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


# --------------------------------------------------------------------------
# reports


@dataclass
class Verdict:
    name: str
    inequality: str
    lhs: float
    rhs: float
    passed: bool

    @classmethod
    def le(cls, name: str, inequality: str, lhs: float, rhs: float, slack: float = 0.0):
        return cls(name, inequality, float(lhs), float(rhs), bool(lhs <= rhs + slack))

    def to_json(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}: {self.inequality}  [{self.lhs:.6g} vs {self.rhs:.6g}]"


@dataclass
class ExperimentReport:
    spec: dict
    game: dict = field(default_factory=dict)
    trials: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    timestamp: str = ""
    curves: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_json(self) -> dict:
        return {"spec": self.spec, "game": self.game, "trials": self.trials,
                "aggregate": self.aggregate, "verdicts": [v.to_json() for v in self.verdicts],
                "fits": self.fits, "notes": self.notes, "passed": self.passed,
                "timestamp": self.timestamp}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def write(self, out) -> Path:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.dumps() + "\n")
        if self.curves:
            tdir = out / "traces"
            tdir.mkdir(exist_ok=True)
            for i, rows in enumerate(self.curves):
                with open(tdir / f"trial_{i:03d}.csv", "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["t", "row_loss", "regret", "row_residual_sq", "col_residual_sq"])
                    w.writerows([[r[0]] + ["" if x is None else repr(x) for x in r[1:]]
                                 for r in rows])
            _write_curve_dat(out / "regret_curve.dat", self.curves)
        return out / "report.json"


def _write_curve_dat(path, curves):
    regrets = np.array([[r[2] for r in rows] for rows in curves])
    lo, med, hi = np.quantile(regrets, [0.25, 0.5, 0.75], axis=0)
    with open(path, "w") as fh:
        fh.write("# t median_regret q25 q75\n")
        for t in range(regrets.shape[1]):
            fh.write(f"{t + 1} {med[t]:.12g} {lo[t]:.12g} {hi[t]:.12g}\n")


def _quantiles(x) -> dict:
    x = np.asarray(x, dtype=float)
    q25, med, q75 = np.quantile(x, [0.25, 0.5, 0.75])
    return {"median": float(med), "q25": float(q25), "q75": float(q75),
            "min": float(x.min()), "max": float(x.max())}


# --------------------------------------------------------------------------
# trials


def _trace_rows(trace) -> list:
    rr = trace.row_residual_sq
    cr = trace.col_residual_sq
    rows = []
    for t in range(trace.T):
        rows.append([t + 1, float(trace.row_losses[t]), float(trace.regret_curve[t]),
                     None if rr is None else float(rr[t]), None if cr is None else float(cr[t])])
    return rows


def run_trial(spec: ExperimentSpec, game: GameMatrix, index: int, T: int | None = None) -> dict:
    """One seeded trial; top-level so worker processes can import it."""
    T = T or spec.horizon(game.m, game.n)
    seed = trial_seed(spec.seed, index)
    result = {"index": index, "seed": seed, "T": T}
    if spec.solver == "opt-ftrl":
        play = opt_ftrl_play(game, T, spec.lam)
        rec = TraceRecorder(game.m, game.n)
        for x, y in zip(play.row_decisions, play.col_decisions):
            rec.record(game.entries, x, y)
        trace = rec.finish()
        u = play.row_decisions.mean(axis=0)
        v = play.col_decisions.mean(axis=0)
        ledger = QueryLedger()
        if T >= 2:
            r1 = rvu_check(play.row_losses, play.row_decisions, spec.lam)
            r2 = rvu_check(play.col_losses, play.col_decisions, spec.lam)
            result["rvu"] = {"row": [r1.lhs, r1.rhs], "col": [r2.lhs, r2.rhs]}
        # classical proxy: two full matrix-vector products per round
        cost = 2 * game.m * game.n * T
    else:
        cfg = SolverConfig(T=T, lam=spec.lam, eps_G=spec.oracle_eps(T), seed=seed,
                           samples_per_round=spec.samples_per_round, oracle=spec.oracle)
        u, v, trace, ledger = pomwu_solve(game, cfg)
        # classical proxy for the sampled update: s columns or rows read per player per round
        cost = (ledger.total_queries if spec.oracle == "quantum-sim"
                else cfg.samples * (game.m + game.n) * T)
    result.update(gap=nash_gap(game, u, v), regret=total_regret(trace),
                  row_regret=trace.row_regret, col_regret=trace.col_regret,
                  cost=int(cost), ledger=ledger.to_json(timing=False))
    result["_rows"] = _trace_rows(trace)
    return result


def _run_trials(spec: ExperimentSpec, game: GameMatrix, T: int | None = None) -> list[dict]:
    idx = range(spec.trials)
    if spec.workers > 1 and spec.trials > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            out = list(pool.map(run_trial, [spec] * spec.trials,
                                [game] * spec.trials, idx,
                                [T] * spec.trials))
    else:
        out = [run_trial(spec, game, i, T) for i in idx]
    return sorted(out, key=lambda r: r["index"])


def _bound_verdicts(spec: ExperimentSpec, game: GameMatrix, T: int, trials: list) -> tuple:
    m, n = game.m, game.n
    regrets = np.array([r["regret"] for r in trials])
    med = float(np.median(regrets))
    lam = spec.lam
    verdicts = []
    if spec.solver == "opt-ftrl":
        bound = 12 * lam + math.log(m * n) / lam
        verdicts.append(Verdict.le("deterministic regret bound", "max total regret <= "
                                   "12*lam + log(m*n)/lam", regrets.max(), bound, 1e-9))
        if T >= 2:
            worst = max(max(r["rvu"]["row"][0] - r["rvu"]["row"][1],
                            r["rvu"]["col"][0] - r["rvu"]["col"][1]) for r in trials)
            verdicts.append(Verdict.le("RVU (Opt-FTRL, l1/linf)", "max over players and trials "
                                       "of regret - (alpha + beta*loss_var - gamma*dec_var) <= 0",
                                       worst, 0.0, 1e-9))
        return verdicts, bound
    eps_G = spec.oracle_eps(T)
    if spec.oracle == "exact":
        bound = regret_bound_exact(lam, m, n)
        text = "144*lam + 3*log(m*n)/lam + 12"
        name = "regret bound, exact sampler"
    else:
        bound = regret_bound_noisy(lam, m, n, T, eps_G)
        text = "72*lam + 3*log(m*n)/lam + 72*T*lam*eps_G^2 + 12*T*eps_G"
        name = f"regret bound, sampler with TV error {eps_G:.4g}"
    frac = float(np.mean(regrets <= bound))
    verdicts.append(Verdict.le(name, f"median total regret <= {text}", med, bound))
    verdicts.append(Verdict(f"{name} (pass fraction)",
                            f"fraction of trials with total regret <= {text} >= 2/3",
                            frac, 2.0 / 3.0, frac >= 2.0 / 3.0))
    return verdicts, bound


def run_experiment(spec: ExperimentSpec, write: bool = True) -> ExperimentReport:
    spec.validate()
    if spec.sweep == "ledger":
        report = ledger_scaling_report(seed=spec.seed)
        report.spec = spec.to_json()
    elif spec.sweep == "convergence":
        report = convergence_report(spec)
    else:
        game = spec.load_game()
        T = spec.horizon(game.m, game.n)
        trials = _run_trials(spec, game, T)
        curves = [r.pop("_rows") for r in trials]
        verdicts, bound = _bound_verdicts(spec, game, T, trials)
        aggregate = {"gap": _quantiles([r["gap"] for r in trials]),
                     "regret": _quantiles([r["regret"] for r in trials]),
                     "cost": _quantiles([r["cost"] for r in trials]),
                     "bound": bound, "T": T}
        report = ExperimentReport(spec=spec.to_json(), game=_game_info(game), trials=trials,
                                  aggregate=aggregate, verdicts=verdicts, curves=curves)
    report.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    out = spec.out or os.environ.get(OUT_ENV)
    if write and out:
        report.write(out)
    return report


def _game_info(game: GameMatrix) -> dict:
    return {"m": game.m, "n": game.n, "shift": game.shift, "scale": game.scale,
            "norm_bound": game.norm_bound, "digest": game_digest(game)}


# --------------------------------------------------------------------------
# sweeps and fits


def loglog_fit(x, y) -> float:
    """Least-squares slope of log y on log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def convergence_report(spec: ExperimentSpec, game: GameMatrix | None = None,
                       slope_limit: float = -0.85) -> ExperimentReport:
    """Median gap over ``spec.trials`` seeds at each horizon in ``spec.Ts``."""
    game = spec.load_game() if game is None else game
    medians, rows = [], []
    for T in spec.Ts:
        trials = _run_trials(spec, game, T)
        gaps = [r["gap"] for r in trials]
        medians.append(float(np.median(gaps)))
        rows.append({"T": T, "median_gap": medians[-1], "gaps": gaps,
                     "median_regret": float(np.median([r["regret"] for r in trials]))})
    if min(medians) <= 0:
        slope = -math.inf
    else:
        slope = loglog_fit(spec.Ts, medians)
    v = Verdict.le("convergence rate", "log-log slope of median gap vs T <= "
                   f"{slope_limit}", slope, slope_limit)
    return ExperimentReport(spec=spec.to_json(), game=_game_info(game), trials=rows,
                            aggregate={"median_gap": medians}, verdicts=[v],
                            fits={"gap_slope": slope})


def input_family(name: str, n: int, k: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """Inputs in ``[0, beta]`` for the ledger sweep.

    ``zipf`` puts Gibbs mass ~1/i on the i-th index (shuffled), so the top-k
    head keeps a fraction ~log k / log n and the post-selection probability
    shrinks with n.  ``uniform`` is the easy case where that probability is
    Theta(1).  ``heavy`` plants k entries at beta.
    """
    if name == "uniform":
        return rng.uniform(0.0, beta, n)
    if name == "zipf":
        u = np.clip(beta - np.log(np.arange(1, n + 1)), 0.0, beta)
        return u[rng.permutation(n)]
    if name == "heavy":
        u = np.zeros(n)
        u[rng.choice(n, min(k, n), replace=False)] = beta
        return u
    raise ValueError(f"unknown input family {name!r}; expected one of {INPUT_FAMILIES}")


def _fit_nk(rows) -> tuple[float, float]:
    r = np.asarray(rows, dtype=float)
    X = np.column_stack([np.ones(len(r)), np.log(r[:, 0]), np.log(r[:, 1])])
    coef = np.linalg.lstsq(X, np.log(r[:, 2]), rcond=None)[0]
    return float(coef[1]), float(coef[2])


def ledger_scaling_sweep(ns=(64, 128, 256, 512, 1024, 2048, 4096), ks=(1, 2, 4, 8, 16, 32, 64),
                         beta: float = 16.0, eps_G: float = 0.1, family: str = "zipf",
                         seed: int = 0, naive: bool = True) -> dict:
    """Charged queries of one multi-Gibbs call (and of k single-sample calls)
    over an (n, k) grid, with least-squares exponents of log Q on log n, log k."""
    multi, base = [], []
    for n in ns:
        for k in ks:
            rng = np.random.default_rng([seed, n, k])
            u = input_family(family, n, k, beta, rng)
            _, led, _ = multi_gibbs_sample(GibbsRequest(u, k, eps_G, beta), u,
                                           np.random.default_rng([seed, n, k, 1]), seed=seed)
            multi.append((n, k, led.total_queries))
            if naive:
                base.append((n, k, naive_multi_gibbs_ledger(u, beta, k, eps_G,
                                                            seed=seed).total_queries))
    out = {"family": family, "beta": beta, "eps_G": eps_G,
           "multi": {"rows": multi, "exponents": dict(zip(("n", "k"), _fit_nk(multi)))}}
    if naive:
        out["naive"] = {"rows": base, "exponents": dict(zip(("n", "k"), _fit_nk(base)))}
    return out


def ledger_scaling_report(seed: int = 0, tol: float = 0.1, **kw) -> ExperimentReport:
    res = ledger_scaling_sweep(seed=seed, **kw)
    en, ek = res["multi"]["exponents"]["n"], res["multi"]["exponents"]["k"]
    verdicts = [
        Verdict("multi-Gibbs n-exponent", "|fitted n-exponent - 0.5| <= 0.1",
                abs(en - 0.5), tol, abs(en - 0.5) <= tol),
        Verdict("multi-Gibbs k-exponent", "|fitted k-exponent - 0.5| <= 0.1",
                abs(ek - 0.5), tol, abs(ek - 0.5) <= tol),
    ]
    if "naive" in res:
        nk = res["naive"]["exponents"]["k"]
        verdicts.append(Verdict("naive baseline k-exponent", "|fitted k-exponent - 1.0| <= 0.1",
                                abs(nk - 1.0), tol, abs(nk - 1.0) <= tol))
    fits = {"multi": res["multi"]["exponents"]}
    if "naive" in res:
        fits["naive"] = res["naive"]["exponents"]
    return ExperimentReport(spec={}, trials=[res], verdicts=verdicts, fits=fits,
                            notes=[QUANTUM_NOTE])


def verify_gibbs(ns=(16, 64, 256), ks=(2, 8), betas=(1.0, 4.0), eps_Gs=(0.1, 0.02),
                 seed: int = 0) -> ExperimentReport:
    """Closed-form check of the multi-Gibbs output law on random inputs in
    ``[0, beta]``: TV against the softmax and the post-selection sandwich."""
    verdicts, rows = [], []
    for n in ns:
        for k in ks:
            for beta in betas:
                for eps_G in eps_Gs:
                    rng = np.random.default_rng([seed, n, k, int(beta * 1000), int(eps_G * 1e6)])
                    u = rng.uniform(0.0, beta, n)
                    plan = build_multi_gibbs_plan(u, beta, k, eps_G, seed=seed)
                    tv = tv_distance(plan.output_distribution(), gibbs_distribution(u))
                    lo, val, hi = plan.sandwich()
                    tag = f"n={n} k={k} beta={beta:g} eps_G={eps_G:g}"
                    verdicts += [
                        Verdict.le(f"TV vs eps_G ({tag})", "d_TV(output, softmax) <= eps_G",
                                   tv, eps_G),
                        Verdict.le(f"TV vs post-selection bound ({tag})",
                                   "d_TV <= sqrt(88 n eps_P / (k exp(-2 beta delta)))",
                                   tv, plan.tv_bound()),
                        Verdict.le(f"sandwich lower ({tag})",
                                   "E/(16W) - 2 eps_P <= |u_post|^2", lo, val),
                        Verdict.le(f"sandwich upper ({tag})",
                                   "|u_post|^2 <= E/(16W) + 3 eps_P", val, hi),
                    ]
                    rows.append({"n": n, "k": k, "beta": beta, "eps_G": eps_G, "tv": tv,
                                 "tv_bound": plan.tv_bound(), "post_norm_sq": val,
                                 "sandwich": [lo, hi]})
    return ExperimentReport(spec={}, trials=rows, verdicts=verdicts)


def verify_poly(betas=(1, 2, 4, 8, 16), eps_list=(1e-1, 1e-2, 1e-3, 1e-4),
                points: int = 200_003) -> ExperimentReport:
    """Evaluate each approximant on a grid finer than (and offset from) the
    one used during construction, plus the Chebyshev extrema."""
    verdicts, rows = [], []
    for beta in betas:
        for eps in eps_list:
            ap = build_exp_approximant(float(beta), float(eps))
            neg = np.concatenate([np.linspace(-1.0, 0.0, points), [0.0, -1.0]])
            ext = np.cos(np.pi * np.arange(4 * ap.degree + 1) / (4 * ap.degree or 1))
            full = np.concatenate([np.linspace(-1.0, 1.0, points), ext])
            err = float(np.abs(ap(neg) - 0.25 * np.exp(beta * neg)).max())
            peak = float(np.abs(ap(full)).max())
            tag = f"beta={beta:g} eps={eps:g}"
            verdicts += [
                Verdict.le(f"sup error ({tag})", "max |P(x) - exp(beta x)/4| on [-1,0] <= eps",
                           err, eps),
                Verdict.le(f"boundedness ({tag})", "max |P(x)| on [-1,1] <= 1", peak, 1.0, 1e-9),
                Verdict.le(f"degree ({tag})", "degree <= 8 beta ln(1/eps) + 16",
                           ap.degree, ap.degree_envelope),
            ]
            rows.append({"beta": beta, "eps": eps, "degree": ap.degree, "sup_error": err,
                         "peak": peak, "l1_norm": ap.l1_norm})
    return ExperimentReport(spec={}, trials=rows, verdicts=verdicts)


# --------------------------------------------------------------------------
# paired comparison


@dataclass
class Comparison:
    a: ExperimentReport
    b: ExperimentReport
    table: list

    @property
    def median_gap_difference(self) -> float:
        return float(np.median([abs(r["gap_a"] - r["gap_b"]) for r in self.table]))

    def to_json(self) -> dict:
        return {"a": self.a.to_json(), "b": self.b.to_json(), "table": self.table,
                "median_gap_difference": self.median_gap_difference}


def compare_solvers(spec_a: ExperimentSpec, spec_b: ExperimentSpec) -> Comparison:
    """Run two specs on the same game with paired trial seeds."""
    ga, gb = spec_a.validate().load_game(), spec_b.validate().load_game()
    if ga.entries.shape != gb.entries.shape:
        raise ValueError(f"games differ in shape: {ga.entries.shape} vs {gb.entries.shape}")
    Ta, Tb = spec_a.horizon(ga.m, ga.n), spec_b.horizon(gb.m, gb.n)
    if Ta != Tb:
        raise ValueError(f"horizons differ: {Ta} vs {Tb}")
    if spec_a.trials != spec_b.trials or spec_a.seed != spec_b.seed:
        raise ValueError("paired comparison needs equal trial counts and master seeds")
    ra, rb = run_experiment(spec_a, write=False), run_experiment(spec_b, write=False)
    table = []
    for x, y in zip(ra.trials, rb.trials):
        table.append({"seed": x["seed"], "gap_a": x["gap"], "gap_b": y["gap"],
                      "regret_a": x["regret"], "regret_b": y["regret"],
                      "cost_a": x["cost"], "cost_b": y["cost"]})
    return Comparison(ra, rb, table)
