import numpy as np
import pytest

from graphon_games.core import ConstantGraphon, GridSpec, StepGraphon, StepProfile, local_aggregate
from graphon_games.games import (
    GraphonGame,
    NetworkGame,
    PlateauUtility,
    QuadraticUtility,
    embed_network,
    embed_strategy,
    epsilon_star,
    golden_section_max,
    is_epsilon_nash,
    network_local_aggregate,
    regret_profile,
)


def eps_star_oracle(regrets, step=1e-4):
    """Brute-force infimum over the eps grid: first eps with enough cells under it."""
    r = np.asarray(regrets, float)
    for eps in np.arange(0.0, max(1.0, r.max()) + 2 * step, step):
        if np.mean(r <= eps) >= 1.0 - eps:
            return eps
    raise AssertionError("unreachable: eps = max regret always satisfies the condition")


def random_network(rng, n=None, family="plateau_lq", cap=4.0):
    n = n or int(rng.integers(2, 33))
    grid = GridSpec(n)
    if family == "plateau_lq":
        util = PlateauUtility.from_values(grid, lam=rng.uniform(0, 1.5, n))
    else:
        util = QuadraticUtility.from_values(grid, beta=rng.uniform(0, cap, n),
                                            delta=rng.uniform(-1, 1, n))
    return NetworkGame(rng.random((n, n)), util, cap)


class TestUtilityFamilies:
    def test_plateau_flat_top(self):
        u = PlateauUtility.from_values(GridSpec(1), lam=0.5)
        e = np.array([2.0])
        inside = [u.evaluate(np.array([a]), e)[0] for a in (1.0, 1.3, 2.0)]
        assert inside == [0.5, 0.5, 0.5]
        lo, hi = u.best_response(e, 10.0)
        assert (lo[0], hi[0]) == (1.0, 2.0)
        assert u.best_value(e, 10.0)[0] == 0.5

    def test_plateau_capped(self):
        u = PlateauUtility.from_values(GridSpec(1), lam=0.5)
        lo, hi = u.best_response(np.array([30.0]), 10.0)
        assert (lo[0], hi[0]) == (10.0, 10.0)
        # best value at the cap: u(L, e) on the increasing branch
        assert u.best_value(np.array([30.0]), 10.0)[0] == pytest.approx(10 * (15 - 5))

    def test_quadratic_peak(self):
        u = QuadraticUtility.from_values(GridSpec(2), beta=[0.5, 3.0], delta=[1.0, 0.0])
        e = np.array([0.25, 0.0])
        lo, hi = u.best_response(e, 2.0)
        np.testing.assert_allclose(lo, [0.75, 2.0])  # second peak clipped at the cap
        np.testing.assert_allclose(hi, lo)
        np.testing.assert_allclose(u.best_value(e, 2.0), [0.0, -0.5])

    def test_regrid_averages_parameters(self):
        u = PlateauUtility.from_values(GridSpec(4), lam=[0.0, 1.0, 0.5, 0.5])
        coarse = u.regrid(2)
        np.testing.assert_array_equal(coarse.params["lam"].values, [0.5, 0.5])

    def test_param_validation(self):
        with pytest.raises(ValueError):
            PlateauUtility({"wrong": StepProfile.constant(0.5, GridSpec(2))})
        with pytest.raises(ValueError):
            QuadraticUtility({
                "beta": StepProfile.constant(0.5, GridSpec(2)),
                "delta": StepProfile.constant(0.5, GridSpec(3)),
            })

    def test_golden_section_matches_quadratic_argmax(self):
        rng = np.random.default_rng(11)
        target = rng.uniform(0.5, 3.5, 50)
        x, val = golden_section_max(lambda a: -0.5 * (a - target) ** 2, 0.0, 4.0, tol=1e-10)
        np.testing.assert_allclose(x, target, atol=1e-8)
        assert np.all(val >= -1e-15)


class TestGameRecords:
    def test_graphon_game_validation(self):
        grid = GridSpec(4)
        util = PlateauUtility.from_values(grid, lam=0.5)
        with pytest.raises(ValueError):
            GraphonGame(ConstantGraphon(0.5), util, 0.0, grid)
        with pytest.raises(ValueError):
            GraphonGame(ConstantGraphon(0.5), util, 4.0, GridSpec(8))
        with pytest.raises(ValueError):  # step resolution must divide the grid
            GraphonGame(StepGraphon(np.zeros((3, 3))), util, 4.0, grid)
        game = GraphonGame(ConstantGraphon(0.5), util, 4.0, grid)
        assert game.strategy_interval == (0.0, 4.0)

    def test_network_game_validation(self):
        util = PlateauUtility.from_values(GridSpec(2), lam=0.5)
        with pytest.raises(ValueError):
            NetworkGame(np.array([[0.5, 1.5], [0.0, 0.0]]), util, 4.0)
        with pytest.raises(ValueError):
            NetworkGame(np.zeros((3, 3)), util, 4.0)


class TestEmbeddings:
    def test_embed_network_step_kernel(self):
        util = PlateauUtility.from_values(GridSpec(2), lam=0.5)
        net = NetworkGame(np.array([[0.0, 1.0], [1.0, 0.0]]), util, 4.0)
        game = embed_network(net)
        assert game.graphon.evaluate(0.3, 0.8) == 1.0
        assert game.cap == 4.0

    def test_embed_single_node(self):
        util = PlateauUtility.from_values(GridSpec(1), lam=0.0)
        game = embed_network(NetworkGame(np.array([[0.7]]), util, 1.0))
        assert game.graphon.evaluate(0.5, 0.99) == 0.7

    def test_distinct_utilities_embed_as_two_step_profile(self):
        util = QuadraticUtility.from_values(GridSpec(2), beta=[1.0, 2.0], delta=[0.0, 0.0])
        game = embed_network(NetworkGame(np.zeros((2, 2)), util, 4.0))
        beta = game.utilities.params["beta"]
        assert beta.at(0.4) == 1.0 and beta.at(0.9) == 2.0

    def test_embed_strategy(self):
        z = embed_strategy(np.zeros(5))
        assert np.all(z.values == 0)
        f = embed_strategy([1.0, 2.0], 2)
        assert f.at(0.4) == 1.0 and f.at(0.9) == 2.0
        np.testing.assert_array_equal(embed_strategy([0.5, 0.25], 2).values, [0.5, 0.25])
        with pytest.raises(ValueError):
            embed_strategy([1.0, 5.0], 2, interval=(0.0, 4.0))
        with pytest.raises(ValueError):
            embed_strategy([1.0, 2.0], 3)


class TestNetworkAggregate:
    def test_zero_adjacency(self):
        util = PlateauUtility.from_values(GridSpec(3), lam=0.5)
        net = NetworkGame(np.zeros((3, 3)), util, 4.0)
        np.testing.assert_array_equal(network_local_aggregate(net, [1.0, 2.0, 3.0]), 0.0)

    def test_two_player_example(self):
        # oracle: e = ((0*2 + 1*4)/2, (1*2 + 0*4)/2) = (2, 1)
        util = PlateauUtility.from_values(GridSpec(2), lam=0.5)
        net = NetworkGame(np.array([[0.0, 1.0], [1.0, 0.0]]), util, 10.0)
        np.testing.assert_array_equal(network_local_aggregate(net, [2.0, 4.0]), [2.0, 1.0])

    def test_agreement_with_embedded_aggregate_bitwise(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            net = random_network(rng)
            s = rng.uniform(0, net.cap, net.n_players)
            direct = network_local_aggregate(net, s)
            embedded = local_aggregate(embed_network(net).graphon, embed_strategy(s))
            np.testing.assert_array_equal(direct, embedded.values)


class TestRegretProfile:
    def test_zero_lam_plateau_has_zero_regret_on_unit_interval(self):
        grid = GridSpec(6)
        game = GraphonGame(ConstantGraphon(0.5), PlateauUtility.from_values(grid, lam=0.0),
                           4.0, grid)
        f = StepProfile(grid, np.linspace(0, 1, 6))
        rep = regret_profile(game, f)
        np.testing.assert_array_equal(rep.regrets.values, 0.0)
        assert rep.epsilon_star == 0.0

    def test_single_agent_quadratic(self):
        # W = 0 so e = 0; regret is u(beta, 0) - u(f, 0) = (f - beta)^2 / 2
        grid = GridSpec(1)
        game = GraphonGame(ConstantGraphon(0.0),
                           QuadraticUtility.from_values(grid, beta=0.7, delta=0.0),
                           2.0, grid)
        rep = regret_profile(game, StepProfile(grid, [0.2]))
        assert rep.regrets.values[0] == pytest.approx(0.5 * 0.5 ** 2, abs=1e-15)

    def test_out_of_interval_profile_rejected(self):
        grid = GridSpec(2)
        game = GraphonGame(ConstantGraphon(0.0), PlateauUtility.from_values(grid, lam=0.5),
                           1.0, grid)
        with pytest.raises(ValueError):
            regret_profile(game, StepProfile(grid, [0.5, 1.5]))

    def test_golden_section_fallback_matches_closed_form(self):
        # hide the closed forms to force the search path
        class Opaque(PlateauUtility):
            def best_response(self, e, cap):
                return None

            def best_value(self, e, cap):
                return None

        grid = GridSpec(16)
        rng = np.random.default_rng(13)
        f = StepProfile(grid, rng.uniform(0, 3, 16))
        closed = GraphonGame(ConstantGraphon(0.8),
                             PlateauUtility.from_values(grid, lam=0.6), 3.0, grid)
        opaque = GraphonGame(ConstantGraphon(0.8),
                             Opaque.from_values(grid, lam=0.6), 3.0, grid)
        r1 = regret_profile(closed, f)
        r2 = regret_profile(opaque, f, br_tol=1e-10)
        np.testing.assert_allclose(r2.regrets.values, r1.regrets.values, atol=1e-9)

    def test_report_carries_strategy_and_aggregate(self):
        rng = np.random.default_rng(14)
        net = random_network(rng, n=5)
        s = rng.uniform(0, net.cap, 5)
        rep = regret_profile(net, s)
        np.testing.assert_array_equal(rep.strategy.values, s)
        np.testing.assert_array_equal(rep.aggregate.values, network_local_aggregate(net, s))


class TestEpsilonStar:
    def test_all_zero(self):
        assert epsilon_star(np.zeros(7)) == 0.0

    def test_one_large_violator(self):
        # oracle (brute force over the eps grid): allowing 1 of 4 violators gives
        # max(1/4, 0) = 0.25, allowing none gives 0.5
        assert eps_star_oracle([0.5, 0, 0, 0]) == pytest.approx(0.25, abs=1e-4)
        assert epsilon_star([0.5, 0, 0, 0]) == 0.25

    def test_two_small_regrets(self):
        assert eps_star_oracle([0.1, 0.1]) == pytest.approx(0.1, abs=1e-4)
        assert epsilon_star([0.1, 0.1]) == pytest.approx(0.1)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            epsilon_star([0.1, -0.2])

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            r = rng.random(int(rng.integers(1, 17)))
            fast = epsilon_star(r)
            slow = eps_star_oracle(r)
            assert fast <= slow + 1e-12
            assert slow <= fast + 1e-4 + 1e-12

    def test_monotone_under_regret_decrease(self):
        rng = np.random.default_rng(16)
        for _ in range(100):
            r = rng.random(8)
            before = epsilon_star(r)
            i = rng.integers(0, 8)
            r2 = r.copy()
            r2[i] *= rng.random()
            assert epsilon_star(r2) <= before + 1e-15

    def test_guarantee_fraction_above_is_small(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            r = rng.random(12)
            eps = epsilon_star(r)
            assert np.mean(r > eps) <= eps + 1e-12


class TestIsEpsilonNash:
    @staticmethod
    def game_with_regrets():
        # quadratic peaks at beta with W = 0; playing f = 0 gives regrets beta^2/2,
        # so beta = (1, 0, 0, 0) realizes regrets (0.5, 0, 0, 0)
        grid = GridSpec(4)
        game = GraphonGame(ConstantGraphon(0.0),
                           QuadraticUtility.from_values(grid, beta=[1.0, 0, 0, 0], delta=0.0),
                           2.0, grid)
        return game, StepProfile.constant(0.0, grid)

    def test_exact_equilibrium_at_eps_zero(self):
        grid = GridSpec(4)
        game = GraphonGame(ConstantGraphon(0.0),
                           QuadraticUtility.from_values(grid, beta=0.5, delta=0.0), 2.0, grid)
        assert is_epsilon_nash(game, StepProfile.constant(0.5, grid), 0.0)

    def test_threshold_against_eps_star(self):
        game, f = self.game_with_regrets()
        assert not is_epsilon_nash(game, f, 0.2)
        assert is_epsilon_nash(game, f, 0.25)

    def test_eps_one_always_true(self):
        game, f = self.game_with_regrets()
        assert is_epsilon_nash(game, f, 1.0)

    def test_consistency_with_eps_star(self):
        rng = np.random.default_rng(18)
        for _ in range(20):
            net = random_network(rng, n=10)
            s = rng.uniform(0, net.cap, 10)
            rep = regret_profile(net, s)
            assert is_epsilon_nash(net, s, rep.epsilon_star)
            lower = rep.epsilon_star - 1.0 / 10 - 1e-9
            if lower >= 0:
                assert not is_epsilon_nash(net, s, lower)

    def test_negative_eps_rejected(self):
        game, f = self.game_with_regrets()
        with pytest.raises(ValueError):
            is_epsilon_nash(game, f, -0.1)


class TestEmbeddingExactness:
    def test_network_regrets_equal_embedded_regrets_bitwise(self):
        rng = np.random.default_rng(19)
        for trial in range(25):
            family = "plateau_lq" if trial % 2 else "quadratic"
            net = random_network(rng, family=family)
            s = rng.uniform(0, net.cap, net.n_players)
            rep_net = regret_profile(net, s)
            rep_emb = regret_profile(embed_network(net), embed_strategy(s))
            np.testing.assert_array_equal(rep_net.regrets.values, rep_emb.regrets.values)
            assert rep_net.epsilon_star == rep_emb.epsilon_star
