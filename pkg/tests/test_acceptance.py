"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[PASS]`` / ``[FAIL]`` line with the measured
quantity and the schedule it used, then asserts. Run with ``-s`` or ``-v``;
the lines are printed with capture disabled either way.
"""

import math
import time

import numpy as np
import pytest

from sibm.cli import main
from sibm.experiments import ExperimentConfig, run_experiment
from sibm.ising import config_index, configs_from_indices, enumerate_gibbs, exact_sample, local_field
from sibm.model import SibmParams
from sibm.recover import exact_posterior, indistinguishable_pairs, learn_sibm
from sibm.ssbm import random_balanced_partition, sample_sbm_graph
from sibm.theory import (
    beta_prime,
    beta_star,
    beta_star_bisect,
    g,
    m_star,
    recovery_condition,
)

pytestmark = pytest.mark.slow

# Distance scaling leaves alpha free. The local field at X carries an extra
# alpha ln n / n * (A_i - B_i), which inflates the effective coupling at small n
# and steepens the log-log slope; alpha just above b*beta keeps that shift small
# while staying in the alpha > b*beta regime.
C6_ALPHA = 0.2


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail
    return emit


def test_c1_sampler_exactness(report):
    start = time.perf_counter()
    params = SibmParams(8, 9, 1, 2, 0.3)
    cfg = ExperimentConfig("sampler_validation", params, trials=20, seed=1, draws=10**6,
                           thinning=10)
    res = run_experiment(cfg)
    worst_tv = max(row["tv_mcmc"] for row in res.summary)

    rng = np.random.default_rng(2)
    graph = sample_sbm_graph(random_balanced_partition(6, rng), 1.0, math.log(6) / 6, rng)
    pi = enumerate_gibbs(graph, 2, 0.3).probs
    worst_db = 0.0
    for idx in range(64):
        sigma = configs_from_indices(idx, 6)
        for i in range(6):
            tau = sigma.copy()
            tau[i] = -tau[i]
            fwd = 1 / 6 / (1 + math.exp(2 * local_field(graph, 2, 0.3, sigma, i) * sigma[i]))
            bwd = 1 / 6 / (1 + math.exp(2 * local_field(graph, 2, 0.3, tau, i) * tau[i]))
            worst_db = max(worst_db, abs(pi[idx] * fwd - pi[config_index(tau)] * bwd))
    elapsed = time.perf_counter() - start
    ok = worst_tv <= 0.02 and worst_db < 1e-10 and elapsed <= 300
    report("C1 sampler exactness", ok,
           f"max TV over 20 graphs {worst_tv:.4f} (<= 0.02), detailed balance {worst_db:.1e} "
           f"(< 1e-10), {elapsed:.0f}s; {res.meta['schedule']}, {res.meta['edge_rates']}")


def test_c2_threshold_algebra(report):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    b = rng.uniform(0.05, 20, 1000)
    a = (np.sqrt(b) + math.sqrt(2) + 0.01 + rng.uniform(0, 6, 1000)) ** 2
    worst_g = worst_bisect = 0.0
    ordered = True
    for ai, bi in zip(a, b):
        bs = beta_star(ai, bi)
        worst_g = max(worst_g, abs(g(ai, bi, bs)))
        worst_bisect = max(worst_bisect, abs(bs - beta_star_bisect(ai, bi)))
        ordered &= bs < 0.25 * math.log(ai / bi) < beta_prime(ai, bi)
    mismatches, betas = 0, 0
    for ai, bi in zip(a[:10], b[:10]):
        bs = beta_star(ai, bi)
        tested = 0
        while tested < 100:
            beta = rng.uniform(bs / 30, 2 * bs)
            ratio = bs / beta
            if abs(ratio - round(ratio)) < 1e-9:
                continue
            ms = m_star(ai, bi, beta)
            mismatches += sum((m >= ms) != recovery_condition(ai, bi, beta, m) for m in range(1, 51))
            tested += 1
        betas += tested
    elapsed = time.perf_counter() - start
    ok = worst_g < 1e-10 and worst_bisect < 1e-10 and ordered and mismatches == 0 and elapsed <= 60
    report("C2 threshold algebra", ok,
           f"max |g(beta*)| {worst_g:.1e}, max |closed - bisect| {worst_bisect:.1e}, "
           f"ordering {'holds' if ordered else 'violated'}, {mismatches} m* mismatches over "
           f"{betas} betas x 50 m, {elapsed:.1f}s")


def test_c3_flip_symmetry(report):
    rng = np.random.default_rng(3)
    worst = 0.0
    for n in (4, 6, 8, 10):
        for _ in range(5):
            graph = sample_sbm_graph(random_balanced_partition(n, rng), 0.7, 0.3, rng)
            probs = enumerate_gibbs(graph, rng.uniform(0, 3), rng.uniform(0, 1)).probs
            mirror = probs[(1 << n) - 1 - np.arange(1 << n)]
            worst = max(worst, float(np.max(np.abs(probs - mirror) / probs)))
    broken = 0
    for k in range(100):
        m, n = int(rng.integers(1, 8)), int(rng.integers(2, 40))
        samples = rng.choice(np.array([-1, 1], dtype=np.int8), size=(m, n))
        flipped = samples.copy()
        flipped[0] = -flipped[0]
        broken += not np.array_equal(learn_sibm(flipped, k), -learn_sibm(samples, k))
    ok = worst <= 4 * np.finfo(float).eps and broken == 0
    report("C3 flip symmetry", ok,
           f"max relative |P(s) - P(-s)| {worst:.1e} over n <= 10; "
           f"equivariance broken on {broken}/100 sample sets")


def test_c4_ordered_regime(report):
    start = time.perf_counter()
    params = SibmParams(1000, 25, 4, 2, 0.2, m=1)
    res = run_experiment(ExperimentConfig("success_curve", params, trials=200, seed=4))
    exact = np.mean([r.dist_pm[0] == 0 for r in res.records])
    elapsed = time.perf_counter() - start
    ok = exact >= 0.9 and elapsed <= 600
    report("C4 sigma = +-X above beta*", ok,
           f"fraction exactly +-X {exact:.3f} (>= 0.9), beta*={beta_star(25, 4):.5f}, "
           f"{elapsed:.0f}s; {res.meta['schedule']}")


def test_c5_sample_complexity(report):
    start = time.perf_counter()
    params = SibmParams(2000, 25, 4, 2, 0.03, m=1)
    assert m_star(25, 4, 0.03) == 3
    res = run_experiment(ExperimentConfig("success_curve", params, values=(1, 3, 5),
                                          trials=200, seed=5))
    rate = {int(row["value"]): row["rate"] for row in res.summary}
    elapsed = time.perf_counter() - start
    ok = rate[3] - rate[1] >= 0.5 and rate[5] >= rate[3] - 0.05 and elapsed <= 1800
    report("C5 sample complexity", ok,
           f"rate(1)={rate[1]:.3f} rate(3)={rate[3]:.3f} rate(5)={rate[5]:.3f} "
           f"(gap {rate[3] - rate[1]:.3f} >= 0.5), {elapsed:.0f}s; {res.meta['schedule']}")


def test_c6_distance_scaling(report):
    start = time.perf_counter()
    params = SibmParams(500, 25, 4, C6_ALPHA, 0.03, m=3)
    res = run_experiment(ExperimentConfig("distance_scaling", params, sweep="n",
                                          values=(500, 1000, 2000, 4000), trials=40, seed=6))
    target = g(25, 4, 0.03)
    slope = res.meta["slope"]
    elapsed = time.perf_counter() - start
    means = ", ".join(f"{row['n']}:{row['mean_dist_pm']:.2f}" for row in res.summary)
    ok = abs(slope - target) <= 0.15 and elapsed <= 1800
    report("C6 distance scaling", ok,
           f"slope {slope:.3f} vs g(0.03)={target:.4f} (|diff| {abs(slope - target):.3f} <= 0.15), "
           f"alpha={C6_ALPHA}, m=3, 40 graphs per n, means {means}, {elapsed:.0f}s; "
           f"{res.meta['schedule']}")


def test_c7_concentration(report):
    params = SibmParams(4000, 25, 4, 2, 0.03)
    res = run_experiment(ExperimentConfig("concentration", params, trials=100, seed=7))
    row = res.summary[0]
    ok = row["frac_in_band"] >= 0.9
    report("C7 concentration", ok,
           f"{row['frac_in_band']:.2f} of 100 ratios in [0.5, 2] (>= 0.9), "
           f"range [{row['min_ratio']:.3f}, {row['max_ratio']:.3f}]")


def test_c8_ones_regime(report):
    # m = 3 so that the majority vote has something to aggregate
    params = SibmParams(1000, 9, 1, 0.05, 0.2, m=3)
    res = run_experiment(ExperimentConfig("ones_regime", params, trials=100, seed=8))
    row = res.summary[0]
    ok = row["mean_dist_ones"] <= 0.1 and row["success_rate"] <= 0.1
    report("C8 alpha < b*beta", ok,
           f"mean dist(sigma, +-1)/n {row['mean_dist_ones']:.4f} (<= 0.1), "
           f"success rate {row['success_rate']:.2f} (<= 0.1), m=3; {res.meta['schedule']}")


def test_c9_posterior_converse(report):
    rng = np.random.default_rng(9)
    params = SibmParams(6, 2.0, 1.0, 1.0, 0.5, m=3)
    p, q = 0.8, 0.25
    worst_tie, worst_norm = 0.0, 0.0
    ties = 0
    for _ in range(50):
        x = random_balanced_partition(6, rng)
        graph = sample_sbm_graph(x, p, q, rng)
        samples = exact_sample(enumerate_gibbs(graph, params.alpha, params.beta), rng, size=3)
        i = int(rng.choice(np.flatnonzero(x == 1)))
        j = int(rng.choice(np.flatnonzero(x == -1)))
        samples[:, j] = samples[:, i]
        assert (min(i, j), max(i, j)) in indistinguishable_pairs(samples, x)
        post = exact_posterior(samples, params, p=p, q=q)
        swapped = x.copy()
        swapped[[i, j]] = swapped[[j, i]]
        worst_tie = max(worst_tie, abs(post.prob(x) - post.prob(swapped)))
        worst_norm = max(worst_norm, abs(post.probs.sum() - 1))
        ties += 1
    ok = worst_tie <= 1e-12 and worst_norm <= 1e-10
    report("C9 posterior converse", ok,
           f"max |P(X) - P(X swapped)| {worst_tie:.1e} over {ties} engineered pairs (<= 1e-12), "
           f"max |sum - 1| {worst_norm:.1e} (<= 1e-10)")


def test_c10_determinism_and_speed(report, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("n = 300\na = 25\nb = 4\nalpha = 2\nbeta = 0.03\nvalues = 1, 3\ntrials = 4\n")
    outs = []
    for tag in ("a", "b"):
        summary, trials = tmp_path / f"{tag}.csv", tmp_path / f"{tag}_trials.csv"
        assert main(["experiment", "--config", str(cfg), "--seed", "10", "--out", str(summary),
                     "--trials-out", str(trials)]) == 0
        outs.append((summary.read_bytes(), trials.read_bytes()))
    identical = outs[0] == outs[1]

    rng = np.random.default_rng(10)
    samples = rng.choice(np.array([-1, 1], dtype=np.int8), size=(5, 10**6))
    learn_sibm(samples, 0)
    times = []
    for _ in range(5):
        t0 = time.perf_counter()
        learn_sibm(samples, 0)
        times.append(time.perf_counter() - t0)
    ok = identical and max(times) <= 1.0
    report("C10 determinism and speed", ok,
           f"CSVs {'byte-identical' if identical else 'differ'}; learn_sibm n=1e6 m=5 "
           f"worst {max(times) * 1000:.0f} ms of 5 runs (<= 1000 ms)")
