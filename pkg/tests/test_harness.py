import csv
import json
import math

import numpy as np
import pytest

from oracles_ref import power_iteration_norm
from zerosum import save_matrix_csv
from zerosum.harness import (ExperimentSpec, SpecError, compare_solvers, convergence_report,
                             generate_game, input_family, ledger_scaling_sweep, loglog_fit,
                             run_experiment, trial_seed, verify_gibbs, verify_poly)
from zerosum.solver import regret_bound_exact


def test_generate_game_examples():
    assert np.array_equal(generate_game(2, 2, "diagonal").entries, np.eye(2))
    a = generate_game(6, 5, "bernoulli", 3)
    assert np.array_equal(a.entries, generate_game(6, 5, "bernoulli", 3).entries)
    assert not np.array_equal(a.entries, generate_game(6, 5, "bernoulli", 4).entries)
    g = generate_game(8, 8, "uniform", 1)
    assert g.entries.min() >= 0 and g.entries.max() <= 1
    assert power_iteration_norm(g.entries) <= 1 + 1e-9
    with pytest.raises(ValueError, match="unknown distribution"):
        generate_game(2, 2, "cauchy")
    with pytest.raises(ValueError):
        generate_game(0, 2)


def test_spec_validation_lists_every_problem(tmp_path):
    spec = ExperimentSpec(game=str(tmp_path / "missing.csv"), solver="pomwu", oracle="magic",
                          lam=0.4, trials=0, workers=0, eps_G=1.5)
    with pytest.raises(SpecError) as info:
        spec.validate()
    msgs = info.value.problems
    assert len(msgs) == 6
    assert any("missing.csv" in m for m in msgs)
    assert any("trials" in m for m in msgs)
    with pytest.raises(SpecError, match="unknown field"):
        ExperimentSpec.from_dict({"colour": "red"})
    assert ExperimentSpec.from_dict({"lambda": 0.1}).lam == 0.1
    assert ExperimentSpec(solver="opt-ftrl", lam=0.5).problems() == []


def test_trivial_experiment():
    rep = run_experiment(ExperimentSpec(m=1, n=1, trials=1, T=4), write=False)
    assert rep.trials[0]["gap"] == 0.0
    assert rep.passed
    for v in rep.verdicts:
        assert v.inequality and np.isfinite(v.lhs) and np.isfinite(v.rhs)


def test_sixteen_by_sixteen_median_regret():
    rep = run_experiment(ExperimentSpec(m=16, n=16, trials=31, T=128, lam=0.2, workers=2),
                         write=False)
    med = np.median([t["regret"] for t in rep.trials])
    assert med <= 144 * 0.2 + 3 * math.log(256) / 0.2 + 12
    assert rep.passed


def test_opt_ftrl_experiment_verdicts():
    rep = run_experiment(ExperimentSpec(m=5, n=7, solver="opt-ftrl", lam=0.5, T=80, trials=2),
                         write=False)
    names = [v.name for v in rep.verdicts]
    assert "RVU (Opt-FTRL, l1/linf)" in names
    assert rep.passed


def test_target_gap_picks_T():
    rep = run_experiment(ExperimentSpec(m=4, n=4, T=None, eps=1.0, lam=0.25), write=False)
    assert rep.aggregate["T"] == math.ceil(regret_bound_exact(0.25, 4, 4) / 1.0)


def test_report_files_and_reproducibility(tmp_path):
    spec = dict(m=6, n=5, T=40, trials=3, oracle="noisy", seed=11)
    a = run_experiment(ExperimentSpec(out=str(tmp_path / "a"), **spec))
    first = (tmp_path / "a" / "report.json").read_text()
    b = run_experiment(ExperimentSpec(workers=2, **spec), write=False)
    ja, jb = a.to_json(), b.to_json()
    for j in (ja, jb):
        j.pop("timestamp")
        j["spec"].pop("workers")
        j["spec"].pop("out")
    assert json.dumps(ja, sort_keys=True) == json.dumps(jb, sort_keys=True)

    run_experiment(ExperimentSpec(out=str(tmp_path / "a"), **spec))
    second = (tmp_path / "a" / "report.json").read_text()
    strip = lambda s: [l for l in s.splitlines() if '"timestamp"' not in l]  # noqa: E731
    assert strip(first) == strip(second)

    assert sorted(p.name for p in (tmp_path / "a" / "traces").iterdir()) == [
        "trial_000.csv", "trial_001.csv", "trial_002.csv"]
    dat = (tmp_path / "a" / "regret_curve.dat").read_text().splitlines()
    assert dat[0].startswith("#") and len(dat) == 41


def test_verdicts_recomputable_from_traces(tmp_path):
    spec = ExperimentSpec(m=7, n=7, T=50, trials=5, lam=0.15, out=str(tmp_path))
    rep = run_experiment(spec)
    finals = []
    for i in range(5):
        with open(tmp_path / "traces" / f"trial_{i:03d}.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 50
        finals.append(float(rows[-1]["regret"]))
    med = rep.verdicts[0]
    assert med.lhs == pytest.approx(np.median(finals), rel=1e-12)
    assert med.rhs == pytest.approx(regret_bound_exact(0.15, 7, 7))
    frac = rep.verdicts[1]
    assert frac.lhs == np.mean(np.array(finals) <= med.rhs)


def test_trial_seeds_are_distinct():
    seeds = {trial_seed(0, i) for i in range(100)}
    assert len(seeds) == 100
    assert trial_seed(5, 3) == trial_seed(5, 3)


def test_compare_identity_two_by_two():
    a = ExperimentSpec(m=2, n=2, dist="diagonal", solver="opt-ftrl", lam=0.1, T=512)
    b = ExperimentSpec(m=2, n=2, dist="diagonal", solver="pomwu", lam=0.2, T=512)
    cmp = compare_solvers(a, b)
    row = cmp.table[0]
    assert row["gap_a"] <= 0.05 and row["gap_b"] <= 0.05
    assert row["cost_a"] == 2 * 2 * 2 * 512


def test_compare_exact_vs_quantum_sim():
    T = 32
    a = ExperimentSpec(m=8, n=8, T=T, trials=31, workers=2)
    b = ExperimentSpec(m=8, n=8, T=T, trials=31, workers=2, oracle="quantum-sim")
    cmp = compare_solvers(a, b)
    ga = np.median([r["gap_a"] for r in cmp.table])
    gb = np.median([r["gap_b"] for r in cmp.table])
    assert abs(ga - gb) <= 24 / T
    assert all(r["cost_b"] > 0 for r in cmp.table)


def test_compare_rejects_mismatch():
    with pytest.raises(ValueError, match="shape"):
        compare_solvers(ExperimentSpec(m=2, n=2), ExperimentSpec(m=3, n=2))
    with pytest.raises(ValueError, match="horizons"):
        compare_solvers(ExperimentSpec(T=10), ExperimentSpec(T=20))


@pytest.mark.xfail(strict=True, reason="on rescaled random games the post-selection "
                   "probability is Theta(1), so the ledger is dominated by the n-free "
                   "amplification term; see the decisions ledger")
def test_quantum_sim_cost_grows_like_sqrt_size():
    ns = [64, 128, 256, 512, 1024, 2048, 4096]
    costs = []
    for n in ns:
        rep = run_experiment(ExperimentSpec(m=n, n=n, T=4, oracle="quantum-sim"), write=False)
        costs.append(rep.trials[0]["cost"])
    assert abs(loglog_fit([2 * n for n in ns], costs) - 0.5) <= 0.1


def test_quantum_sim_kmax_term_grows_like_sqrt_size():
    # the k-max part of the ledger carries the sqrt(m + n) factor
    ns = [64, 256, 1024]
    kmax = []
    for n in ns:
        rep = run_experiment(ExperimentSpec(m=n, n=n, T=4, oracle="quantum-sim"), write=False)
        led = rep.trials[0]["ledger"]
        kmax.append(led["kmax"] / max(1.0, math.log2(n)))
    assert abs(loglog_fit(ns, kmax) - 0.5) <= 0.1


def test_ledger_sweep_spec():
    rep = run_experiment(ExperimentSpec(sweep="ledger"), write=False)
    assert abs(rep.fits["multi"]["k"] - 0.5) <= 0.1
    assert any("not reproducible" in n for n in rep.notes)


def test_ledger_sweep_small_grid_shape():
    res = ledger_scaling_sweep(ns=(64, 128), ks=(1, 2), family="uniform", naive=False)
    assert len(res["multi"]["rows"]) == 4 and "naive" not in res


def test_input_families():
    rng = np.random.default_rng(0)
    for fam in ("uniform", "zipf", "heavy"):
        u = input_family(fam, 100, 5, 8.0, rng)
        assert u.min() >= 0 and u.max() <= 8.0
    assert (input_family("heavy", 100, 5, 8.0, rng) == 8.0).sum() == 5
    with pytest.raises(ValueError):
        input_family("pareto", 10, 1, 1.0, rng)


def test_convergence_report_on_csv_game(tmp_path):
    c = (np.eye(8) + np.roll(np.eye(8), 1, axis=1)) / 2
    path = tmp_path / "cyc.csv"
    save_matrix_csv(path, 2 * c - 1)
    spec = ExperimentSpec(game=str(path), trials=5, Ts=(32, 64, 128), sweep="convergence")
    rep = run_experiment(spec, write=False)
    assert np.allclose(spec.load_game().entries, c)
    assert len(rep.aggregate["median_gap"]) == 3
    assert rep.fits["gap_slope"] < 0


def test_verify_reports():
    g = verify_gibbs(ns=(16,), ks=(2,), betas=(1.0,), eps_Gs=(0.1,))
    assert len(g.verdicts) == 4 and g.passed
    p = verify_poly(betas=(1,), eps_list=(1e-2,))
    assert len(p.verdicts) == 3 and p.passed
