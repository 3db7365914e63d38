import math

import numpy as np
import pytest
from scipy import stats

from oracles_ref import softmax_loop
from zerosum.oracles import (ConsistentEstimator, CostModel, ExactOracle, GibbsRequest,
                             NoisyOracle, OracleError, QuantumSimOracle, QueryLedger,
                             amplification_cost, build_multi_gibbs_plan, consistent_estimate,
                             exact_sample, gibbs_distribution, k_max_find, make_oracle,
                             multi_gibbs_sample, naive_multi_gibbs_ledger, noisy_sample,
                             perturbed_distribution, top_k, tv_distance, _rejection_sample)
from zerosum import SimplexVector


# ---- distributions and TV


def test_gibbs_distribution_examples():
    assert np.allclose(gibbs_distribution(np.zeros(5)), 0.2)
    assert np.allclose(gibbs_distribution([np.log(2), 0.0]), [2 / 3, 1 / 3])
    p = np.random.default_rng(0).normal(size=9)
    # p + 1e3 is itself rounded at the 1e-13 level
    assert np.abs(gibbs_distribution(p + 1e3) - gibbs_distribution(p)).max() <= 1e-12
    assert np.allclose(gibbs_distribution(p), softmax_loop(p), atol=1e-15)
    with pytest.raises(OracleError):
        gibbs_distribution([0.0, np.inf])


def test_tv_examples():
    p = SimplexVector.from_dense([0.6, 0.4])
    assert tv_distance(p, p) == 0.0
    assert tv_distance(SimplexVector.vertex(2, 0), SimplexVector.vertex(2, 1)) == 1.0
    assert tv_distance([0.6, 0.4], [0.5, 0.5]) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        tv_distance([1.0], [0.5, 0.5])


def test_request_validation():
    with pytest.raises(OracleError):
        GibbsRequest([0.0, 3.0], 2, 0.1, beta=1.0)
    with pytest.raises(OracleError):
        GibbsRequest([0.0], 0)
    with pytest.raises(OracleError):
        GibbsRequest([0.0], 1, 1.0)
    assert GibbsRequest([-2.0, 1.0], 1).beta == 2.0


# ---- exact and noisy sampling


def test_exact_sample_single_index():
    assert np.all(exact_sample(GibbsRequest([0.3], 50), np.random.default_rng(0)) == 0)


def test_exact_sample_binomial():
    draws = exact_sample(GibbsRequest([np.log(2), 0.0], 100_000), np.random.default_rng(1))
    assert abs(np.mean(draws == 0) - 2 / 3) <= 0.01


def test_exact_sample_chi_square():
    rng = np.random.default_rng(2)
    p = rng.normal(size=16)
    draws = exact_sample(GibbsRequest(p, 100_000), rng)
    obs = np.bincount(draws, minlength=16)
    exp = softmax_loop(p) * draws.size
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_noisy_zero_error_is_exact():
    p = np.random.default_rng(3).normal(size=6)
    a = noisy_sample(GibbsRequest(p, 1000, 0.0), np.random.default_rng(7))
    b = exact_sample(GibbsRequest(p, 1000, 0.0), np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_noisy_tie_break():
    q = perturbed_distribution([0.0, 0.0], 0.1)
    assert np.allclose(q, [0.4, 0.6])


def test_noisy_tv_is_exact():
    rng = np.random.default_rng(4)
    for _ in range(20):
        p = rng.normal(size=8)
        q = perturbed_distribution(p, 0.05)
        assert abs(tv_distance(q, softmax_loop(p)) - 0.05) <= 1e-12
        # a random donor may hold less than eps_G
        q = perturbed_distribution(p, 0.05, "random", rng)
        assert tv_distance(q, softmax_loop(p)) <= 0.05 + 1e-12


def test_noisy_mass_capped_by_donor():
    q = perturbed_distribution([0.0, 0.0], 0.9)
    assert np.allclose(q, [0.0, 1.0])
    with pytest.raises(OracleError):
        perturbed_distribution([0.0, 1.0], 0.1, "sideways")


# ---- consistent estimation and k-max


def test_consistent_estimate_grid_example():
    assert consistent_estimate([0.3], 1.0, grid_offset=0.0)[0] == pytest.approx(1.0)


def test_consistent_estimate_equal_inputs_equal_outputs():
    u = np.array([0.7, 2.1, 0.7, 2.1, 3.9])
    for seed in range(20):
        e = consistent_estimate(u, 4.0, seed)
        assert e[0] == e[2] and e[1] == e[3]
        assert np.array_equal(e, consistent_estimate(u, 4.0, seed))


def test_consistent_estimate_sandwich_sweep():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        beta = float(rng.choice([1.0, 2.0, 8.0, 32.0]))
        u = rng.uniform(0, beta, 4)
        e = consistent_estimate(u, beta, int(rng.integers(1 << 30)))
        assert np.all(u <= e) and np.all(e <= u + 1)


def test_consistent_estimate_rejects_out_of_range():
    with pytest.raises(OracleError):
        consistent_estimate([2.0], 1.0)


def test_top_k_tie_break_and_sort_oracle():
    assert top_k(np.ones(6), 3).tolist() == [0, 1, 2]
    v = np.random.default_rng(6).normal(size=64)
    assert set(top_k(v, 8)) == set(np.argsort(-v)[:8])


def test_k_max_charges():
    u = np.random.default_rng(7).uniform(0, 4, 16)
    est = ConsistentEstimator(u, 4.0)
    s = k_max_find(est, 16, 16)
    assert s.tolist() == list(range(16))
    assert est.ledger.kmax == 16 * est.cost_per_call
    assert est.cost_per_call == math.ceil(2 * 4.0 * 4)
    with pytest.raises(OracleError):
        k_max_find(est, 16, 0)
    est2 = ConsistentEstimator(np.ones(10), 1.0)
    assert k_max_find(est2, 10, 4).tolist() == [0, 1, 2, 3]


def test_ledger_arithmetic():
    a = QueryLedger(estimation=1, kmax=2, amplification=3, synthesis=4)
    b = QueryLedger(estimation=10, kmax=20, amplification=30, calls=1)
    c = a + b
    assert (c.estimation, c.kmax, c.amplification, c.synthesis, c.calls) == (11, 22, 33, 4, 1)
    assert c.total_queries == 66
    assert "wall_clock" not in c.to_json(timing=False)
    a.absorb(b)
    assert a.total_queries == 66


# ---- multi-Gibbs


def test_constant_input_gives_uniform_output():
    plan = build_multi_gibbs_plan(np.full(12, 1.5), 2.0, 3, 0.1)
    out = plan.output_distribution()
    assert np.allclose(out, 1 / 12, atol=1e-15)
    acc = plan.acceptance()
    assert np.allclose(acc, acc[0])


def test_closed_form_example():
    u = np.random.default_rng(8).uniform(0, 2, 16)
    plan = build_multi_gibbs_plan(u, 2.0, 4, 0.05, seed=3)
    tv = tv_distance(plan.output_distribution(), softmax_loop(u))
    assert tv <= 0.05
    assert tv <= math.sqrt(88 * 16 * plan.eps_P / (4 * math.exp(-2 * 2.0 * plan.delta)))
    assert plan.eps_P == pytest.approx(4 * 0.05 ** 2 / (300 * 16))
    assert plan.delta == 0.25


def test_plan_invariants_random():
    rng = np.random.default_rng(9)
    for _ in range(100):
        n = int(rng.integers(2, 80))
        k = int(rng.integers(1, n + 1))
        beta = float(rng.choice([1.0, 2.0, 4.0, 8.0]))
        u = rng.uniform(0, beta, n)
        plan = build_multi_gibbs_plan(u, beta, k, float(rng.choice([0.1, 0.02])),
                                      seed=int(rng.integers(1000)))
        lo, val, hi = plan.sandwich()
        assert lo <= val <= hi
        assert plan.E_over_W >= (k / n) * math.exp(-2 * beta * plan.delta)
        assert np.all(u[plan.head] <= plan.u_tilde_head)
        assert np.all(plan.u_tilde_head <= u[plan.head] + 1)
        rest = np.setdiff1d(np.arange(n), plan.head)
        if rest.size:
            assert plan.u_tilde_head.min() >= plan.u_star
        acc = plan.acceptance()
        assert np.all((0 <= acc) & (acc <= 1))


def test_head_dominates_rest_under_estimator():
    rng = np.random.default_rng(10)
    u = rng.uniform(0, 8, 50)
    plan = build_multi_gibbs_plan(u, 8.0, 7, 0.1, seed=4)
    est = consistent_estimate(u, 8.0, 4)
    rest = np.setdiff1d(np.arange(50), plan.head)
    assert est[plan.head].min() >= est[rest].max()


def test_plan_determinism():
    u = np.random.default_rng(11).uniform(0, 4, 30)
    a = build_multi_gibbs_plan(u, 4.0, 5, 0.1, seed=9)
    b = build_multi_gibbs_plan(u, 4.0, 5, 0.1, seed=9)
    assert np.array_equal(a.head, b.head)
    assert np.array_equal(a.u_tilde_head, b.u_tilde_head)
    assert a.log_W == b.log_W


def test_shift_invariance():
    rng = np.random.default_rng(12)
    u = rng.uniform(0, 4, 20)
    c = 2.7
    a = build_multi_gibbs_plan(u, 8.0, 4, 0.1, grid_offset=0.3)
    b = build_multi_gibbs_plan(u + c, 8.0, 4, 0.1, grid_offset=0.3 + c)
    assert tv_distance(a.output_distribution(), b.output_distribution()) <= 1e-9


def test_rejection_sampling_matches_closed_form():
    rng = np.random.default_rng(13)
    u = rng.uniform(0, 4, 10)
    plan = build_multi_gibbs_plan(u, 4.0, 3, 0.1)
    draws = _rejection_sample(plan, 200_000, rng)
    obs = np.bincount(draws, minlength=10)
    assert stats.chisquare(obs, plan.output_distribution() * draws.size).pvalue > 0.001


def test_multi_gibbs_sample_ledger():
    u = np.random.default_rng(14).uniform(0, 4, 64)
    cost = CostModel()
    idx, led, plan = multi_gibbs_sample(GibbsRequest(u, 8, 0.1, 4.0), u,
                                        np.random.default_rng(0), cost=cost)
    assert idx.shape == (8,) and idx.max() < 64
    e = cost.estimation_cost(4.0, 64)
    assert led.kmax == math.ceil(math.sqrt(64 * 8)) * e
    assert led.estimation == 8 * e
    assert led.amplification == 8 * amplification_cost(plan, cost)
    assert led.samples == 8 and led.calls == 1


def test_multi_gibbs_errors():
    with pytest.raises(OracleError):
        build_multi_gibbs_plan(np.zeros(4), 0.5, 2, 0.1)
    with pytest.raises(OracleError):
        build_multi_gibbs_plan(np.zeros(4), 1.0, 5, 0.1)
    with pytest.raises(OracleError):
        build_multi_gibbs_plan(np.zeros(4), 1.0, 2, 0.0)


def test_naive_baseline_is_k_single_runs():
    u = np.random.default_rng(15).uniform(0, 4, 32)
    led = naive_multi_gibbs_ledger(u, 4.0, 5, 0.1)
    assert led.calls == 5 and led.samples == 5
    one = naive_multi_gibbs_ledger(u, 4.0, 1, 0.1)
    assert led.kmax == 5 * one.kmax


# ---- oracle objects


@pytest.mark.parametrize("kind", ["exact", "noisy", "quantum-sim"])
def test_oracle_contract_by_enumeration(kind):
    rng = np.random.default_rng(16)
    eps_G = 0.05
    oracle = make_oracle(kind, eps_G)
    for n in (2, 16, 256):
        p = rng.uniform(-3, 3, n)
        q = oracle.distribution(p, k=min(4, n), seed=1)
        assert tv_distance(q, softmax_loop(p)) <= eps_G + 1e-12


def test_quantum_oracle_ledger_and_synthesis_once():
    orc = QuantumSimOracle(0.1)
    p = np.random.default_rng(17).uniform(0, 3, 32)
    orc.sample(p, 4, np.random.default_rng(0), seed=1)
    first = orc.ledger.synthesis
    assert first > 0
    orc.sample(p, 4, np.random.default_rng(1), seed=2)
    assert orc.ledger.synthesis == first
    assert orc.ledger.samples == 8 and orc.ledger.calls == 2
    # more samples than indices reuse the plan
    idx = orc.sample(p[:3], 10, np.random.default_rng(2))
    assert idx.shape == (10,)


def test_make_oracle_errors():
    with pytest.raises(OracleError):
        make_oracle("psychic")
    with pytest.raises(OracleError):
        QuantumSimOracle(0.0)
    with pytest.raises(OracleError):
        NoisyOracle(0.1, mode="sideways")
    assert isinstance(make_oracle("exact"), ExactOracle)
