"""Acceptance suite: every criterion at its stated scale and tolerance, one
pass/fail line per criterion (run with -s to see the lines as they pass)."""

import time

import numpy as np
import pytest

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover - single-threaded timing becomes best effort
    from contextlib import nullcontext

    def threadpool_limits(limits=None):
        return nullcontext()

from graphon_games.core import (
    GridSpec,
    SeparablePowerGraphon,
    StepGraphon,
    StepProfile,
    iterated_kernel,
    resolvent,
)
from graphon_games.games import embed_network, embed_strategy, epsilon_star, regret_profile
from graphon_games.lab import (
    ExperimentPlan,
    run_coarsened_equilibrium_experiment,
    run_limit_equilibrium_experiment,
)
from graphon_games.lq import (
    LQParams,
    SourceFunction,
    equilibrium_from_source,
    injection_check,
    lq_game,
    verify_equilibrium,
)
from graphon_games.solver import profile_distance
from test_games import eps_star_oracle, random_network

REFERENCE_KERNEL = SeparablePowerGraphon(0.5)
REFERENCE_PARAMS = LQParams(lam=0.5, cap=4.0)


def check(num: int, name: str, condition: bool, detail: str = ""):
    status = "PASS" if condition else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"acceptance {num:02d} {name}: {status}{suffix}")
    assert condition, f"criterion {num} ({name}) failed{suffix}"


def random_admissible_setup(rng, n=32):
    W = StepGraphon(rng.random((n, n)))
    lam = rng.uniform(0.1, 0.9) / W.sup_norm()
    params = LQParams(lam, LQParams(lam, 1.0).min_admissible_cap(W.sup_norm())
                      + rng.uniform(0.5, 2.0))
    return W, params


def test_criterion_01_closed_form_equilibrium():
    grid = GridSpec(1024)
    g = SourceFunction.constant(1.0, grid)
    with threadpool_limits(limits=1):
        start = time.perf_counter()
        s = equilibrium_from_source(REFERENCE_KERNEL, REFERENCE_PARAMS, g, tol=1e-8)
        elapsed = time.perf_counter() - start
    expected = 1.0 + (4.0 / 9.0) * np.sqrt(grid.midpoints())
    err = float(np.abs(s.values - expected).max())
    check(1, "closed-form equilibrium reproduction",
          err <= 5e-3 and elapsed <= 5.0,
          f"max abs err {err:.2e}, {elapsed:.2f}s single-threaded")


def test_criterion_02_iterated_kernel_law():
    # midpoint sampling (m=1) isolates the composition law; see the third-kernel
    # halving of the separable-power family
    grid = GridSpec(512)
    k3 = iterated_kernel(REFERENCE_KERNEL, 3, grid, m=1)
    mids = grid.midpoints()
    expected = 0.25 * np.sqrt(mids[:, None] * mids[None, :])
    rel = float((np.abs(k3.values - expected) / expected).max())
    check(2, "iterated-kernel law", rel <= 1e-2, f"max rel err {rel:.2e}")


def test_criterion_03_resolvent_kernel_value():
    grid = GridSpec(512)
    kernel = resolvent(REFERENCE_KERNEL, 0.5, grid, tol=1e-8)
    t = grid.midpoints()[-1]  # midpoint nearest 1
    expected = (4.0 / 3.0) * t
    rel = abs(kernel.gamma[-1, -1] - expected) / expected
    check(3, "resolvent-kernel value", rel <= 1e-2, f"rel err {rel:.2e}")


def test_criterion_04_resolvent_identity():
    rng = np.random.default_rng(100)
    tol = 1e-8
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = 64
        W = StepGraphon(rng.random((n, n)))
        lam = rng.uniform(0.1, 0.9) / W.sup_norm()
        g = rng.random(n)
        kernel = resolvent(W, lam, GridSpec(n), tol=tol)
        s = g + lam * kernel.apply(g).values
        residual = float(np.abs(s - lam * (W.values @ s / n) - g).max())
        worst = max(worst, residual)
    elapsed = time.perf_counter() - start
    check(4, "resolvent identity", worst <= 2 * tol and elapsed <= 30.0,
          f"worst residual {worst:.2e}, {elapsed:.1f}s")


def test_criterion_05_equilibrium_certification():
    rng = np.random.default_rng(101)
    all_certified = True
    worst_eps = 0.0
    for trial in range(25):
        W, params = random_admissible_setup(rng)
        g = SourceFunction(StepProfile(GridSpec(32), rng.random(32)))
        s = equilibrium_from_source(W, params, g)
        cert = verify_equilibrium(W, params, s, tol=1e-6)
        all_certified = all_certified and cert.certified
        worst_eps = max(worst_eps, cert.report.epsilon_star)
    # the reference construction must certify as well
    grid = GridSpec(1024)
    s = equilibrium_from_source(REFERENCE_KERNEL, REFERENCE_PARAMS,
                                SourceFunction.constant(1.0, grid))
    cert = verify_equilibrium(REFERENCE_KERNEL, REFERENCE_PARAMS, s, tol=1e-6)
    all_certified = all_certified and cert.certified
    worst_eps = max(worst_eps, cert.report.epsilon_star)
    check(5, "equilibrium certification", all_certified and worst_eps <= 1e-6,
          f"worst epsilon* {worst_eps:.2e}")


def test_criterion_06_epsilon_star_oracle_equivalence():
    rng = np.random.default_rng(102)
    worst_gap = 0.0
    for _ in range(1000):
        r = rng.random(int(rng.integers(1, 17)))
        fast = epsilon_star(r)
        slow = eps_star_oracle(r, step=1e-4)
        assert fast <= slow + 1e-12  # the formula is the exact infimum
        worst_gap = max(worst_gap, slow - fast)
    check(6, "epsilon* oracle equivalence", worst_gap <= 1e-4 + 1e-12,
          f"worst grid gap {worst_gap:.2e}")


def test_criterion_07_embedding_exactness():
    rng = np.random.default_rng(103)
    exact = True
    for trial in range(50):
        family = "plateau_lq" if trial % 2 else "quadratic"
        net = random_network(rng, family=family)
        s = rng.uniform(0, net.cap, net.n_players)
        rep_net = regret_profile(net, s)
        rep_emb = regret_profile(embed_network(net), embed_strategy(s))
        exact = exact and np.array_equal(rep_net.regrets.values, rep_emb.regrets.values)
        exact = exact and rep_net.epsilon_star == rep_emb.epsilon_star
    check(7, "embedding exactness", exact, "50 games bit-for-bit")


@pytest.fixture(scope="module")
def reference_plan():
    return ExperimentPlan(
        lq_game(REFERENCE_KERNEL, REFERENCE_PARAMS, GridSpec(1024)),
        n_list=(8, 16, 32, 64, 128, 256),
    )


def test_criterion_08_coarsened_equilibria_trend(reference_plan):
    start = time.perf_counter()
    result = run_coarsened_equilibrium_experiment(reference_plan)
    elapsed = time.perf_counter() - start
    eps_first = result.rows[0].epsilon_n
    eps_last = result.rows[-1].epsilon_n
    check(8, "coarsened-equilibrium trend",
          eps_first >= eps_last and eps_last <= 0.05 and elapsed <= 60.0,
          f"eps_8 {eps_first:.2e} >= eps_256 {eps_last:.2e}, {elapsed:.1f}s")


def test_criterion_09_limit_equilibrium(reference_plan):
    result = run_limit_equilibrium_experiment(reference_plan)
    check(9, "limit-equilibrium certification",
          result.l1_to_reference <= 1e-2 and result.epsilon_star_in_target <= 0.02,
          f"L1 to closed form {result.l1_to_reference:.2e}, "
          f"epsilon* {result.epsilon_star_in_target:.2e}")


def test_criterion_10_injection_lower_bound():
    rng = np.random.default_rng(104)
    passed_all = True
    trials = 0
    while trials < 100:
        W, params = random_admissible_setup(rng)
        grid = GridSpec(32)
        g1 = SourceFunction(StepProfile(grid, rng.random(32)))
        g2 = SourceFunction(StepProfile(grid, rng.random(32)))
        if np.abs(g1.values - g2.values).mean() < 0.1:
            continue
        trials += 1
        passed, _ = injection_check(W, params, g1, g2, slack=1e-6)
        passed_all = passed_all and passed
    check(10, "injection lower bound", passed_all, "100 source pairs")
