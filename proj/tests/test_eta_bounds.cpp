#include "lazymdp/eta_bounds.hpp"

#include "lazymdp/learning.hpp"
#include "support/test_mdps.hpp"

#include <doctest.h>

#include <cmath>

using namespace lazymdp;

namespace {

CompiledGrid load_grid(const char* name) {
    return compile_grid(load_map_file(std::string(LAZYMDP_MAPS_DIR) + "/" + name));
}

}  // namespace

TEST_CASE("eta_max of a deterministic optimal default is zero") {
    std::mt19937_64 rng(401);
    TabularMDP mdp = testing::make_random_mdp(rng, 8, 3, true);
    QTable q_star = value_iteration(mdp, 1e-12);
    StochasticPolicy pi_star(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s) pi_star(s, greedy_actions(q_star)[s]) = 1.0;
    CHECK(eta_max(mdp, pi_star, 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(eta_min(mdp, pi_star, 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("eta_max of the gamma=0 two-action example is 0.5") {
    TabularMDP mdp(1, 2, 0.0);
    mdp.p(0, 0, 0) = 1.0;
    mdp.p(0, 1, 0) = 1.0;
    mdp.r(0, 0) = 1.0;
    mdp.r(0, 1) = 0.0;
    mdp.initial_dist[0] = 1.0;
    StochasticPolicy uniform(1, 2);
    uniform(0, 0) = 0.5;
    uniform(0, 1) = 0.5;
    CHECK(eta_max(mdp, uniform, 1e-12) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("eta_min is zero when the default is optimal in at least one state") {
    // Rivers & Bridges with the optimal-except-bridges default.
    CompiledGrid grid = load_grid("rivers_bridges.map");
    std::vector<std::uint8_t> mask(grid.rows * grid.cols, 0);
    for (int cell : grid.bridge_cells) mask[cell] = 1;
    StochasticPolicy defaults = default_optimal_except(grid, mask);
    CHECK(eta_min(grid.mdp, defaults, 1e-12) == doctest::Approx(0.0));
}

TEST_CASE("eta_min formula matches the sweep-bisection oracle on random MDPs") {
    // Absorbing-free MDPs keep the step count action-independent, where the
    // minimax formula is exact for every penalty level.
    std::mt19937_64 rng(402);
    for (int trial = 0; trial < 20; ++trial) {
        TabularMDP mdp = testing::make_random_mdp(rng, 6, 3, false, 0.4, 0.9);
        StochasticPolicy defaults =
            testing::make_random_policy(rng, mdp.n_states, mdp.n_actions);
        Real formula = eta_min(mdp, defaults, 1e-13);
        Real hi = eta_max(mdp, defaults, 1e-13) + 1.0;
        Real bisect = testing::bisect_eta_min(mdp, defaults, hi, 1e-9);
        CHECK(std::abs(formula - bisect) < 1e-8);
    }
}

TEST_CASE("eta_max formula matches the sweep-bisection oracle on random MDPs") {
    std::mt19937_64 rng(403);
    for (int trial = 0; trial < 20; ++trial) {
        TabularMDP mdp = testing::make_random_mdp(rng, 6, 3, true, 0.4, 0.9);
        StochasticPolicy defaults =
            testing::make_random_policy(rng, mdp.n_states, mdp.n_actions);
        Real formula = eta_max(mdp, defaults, 1e-13);
        if (formula < 1e-9) continue;  // optimal default: nothing to bisect
        Real bisect = testing::bisect_eta_max(mdp, defaults, formula * 2.0 + 1.0, 1e-9);
        CHECK(std::abs(formula - bisect) < 1e-8);
    }
}

TEST_CASE("appendix-style corollary identity holds on the diagnostics") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        TabularMDP mdp = testing::make_random_mdp(rng, 8, 3, true);
        StochasticPolicy defaults =
            testing::make_random_policy(rng, mdp.n_states, mdp.n_actions);
        EtaBounds bounds = compute_eta_bounds(mdp, defaults, 1e-13);
        if (bounds.all_pairs_excluded) continue;
        // x_min = min_s max_a (u(s,a) - x_min * v(s,a)) over included pairs
        Real minimax = std::numeric_limits<Real>::infinity();
        for (int s = 0; s < mdp.n_states; ++s) {
            if (mdp.is_absorbing(s)) continue;
            Real inner = -std::numeric_limits<Real>::infinity();
            bool any = false;
            for (int a = 0; a < mdp.n_actions; ++a) {
                if (bounds.excluded[static_cast<std::size_t>(s) * mdp.n_actions + a])
                    continue;
                any = true;
                inner = std::max(inner, bounds.advantage(s, a) -
                                            bounds.eta_min_raw * bounds.step_shift(s, a));
            }
            if (any) minimax = std::min(minimax, inner);
        }
        CHECK(bounds.eta_min_raw == doctest::Approx(minimax).epsilon(1e-7));
    }
}

TEST_CASE("bounds order: eta_min <= eta_max when the default is suboptimal somewhere") {
    std::mt19937_64 rng(405);
    for (int trial = 0; trial < 20; ++trial) {
        TabularMDP mdp = testing::make_random_mdp(rng, 8, 3, true);
        StochasticPolicy defaults =
            testing::make_random_policy(rng, mdp.n_states, mdp.n_actions);
        EtaBounds bounds = compute_eta_bounds(mdp, defaults, 1e-12);
        CHECK(bounds.eta_min >= 0.0);
        if (bounds.eta_max > 1e-9) CHECK(bounds.eta_min <= bounds.eta_max + 1e-9);
    }
}

TEST_CASE("frequency_sweep endpoints and monotone structure") {
    std::mt19937_64 rng(406);
    TabularMDP mdp = testing::make_random_mdp(rng, 8, 3, true);
    StochasticPolicy defaults = testing::make_random_policy(rng, mdp.n_states, mdp.n_actions);
    EtaBounds bounds = compute_eta_bounds(mdp, defaults, 1e-12);
    REQUIRE(bounds.eta_max > 1e-6);

    SUBCASE("grid below eta_min never defers") {
        if (bounds.eta_min > 1e-8) {
            std::vector<Real> grid = {0.0, bounds.eta_min * 0.5, bounds.eta_min * 0.999};
            SweepResult result = frequency_sweep(mdp, defaults, grid, 1e-12);
            for (const auto& row : result.rows)
                CHECK(row.lazy_frequency == doctest::Approx(0.0));
        }
    }
    SUBCASE("grid above eta_max always defers") {
        std::vector<Real> grid = {bounds.eta_max * 1.001 + 1e-9, bounds.eta_max * 2.0 + 1.0};
        SweepResult result = frequency_sweep(mdp, defaults, grid, 1e-12);
        for (const auto& row : result.rows) {
            CHECK(row.lazy_frequency == doctest::Approx(1.0));
            CHECK(row.control_count == 0);
        }
    }
    SUBCASE("unsorted grids are rejected") {
        std::vector<Real> grid = {0.5, 0.1};
        CHECK_THROWS_AS(frequency_sweep(mdp, defaults, grid, 1e-12), std::invalid_argument);
    }
}

TEST_CASE("frequency rows are internally consistent") {
    std::mt19937_64 rng(407);
    TabularMDP mdp = testing::make_random_mdp(rng, 8, 3, true);
    StochasticPolicy defaults = testing::make_random_policy(rng, mdp.n_states, mdp.n_actions);
    Real hi = eta_max(mdp, defaults, 1e-12);
    std::vector<Real> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(hi * i / 10.0);
    SweepResult result = frequency_sweep(mdp, defaults, grid, 1e-12);
    for (const auto& row : result.rows) {
        Real expected = 1.0 - static_cast<Real>(row.control_count) /
                                  result.n_decision_states;
        CHECK(row.lazy_frequency == doctest::Approx(expected));
        CHECK(row.visit_lazy_frequency >= -1e-12);
        CHECK(row.visit_lazy_frequency <= 1.0 + 1e-12);
    }
}

TEST_CASE("KDT uniform-default sweep crosses from control to lazy between the bounds") {
    CompiledGrid grid = load_grid("kdt.map");
    StochasticPolicy defaults = default_uniform(grid);
    EtaBounds bounds = compute_eta_bounds(grid.mdp, defaults, 1e-11);
    CHECK(bounds.eta_min > 0.0);
    CHECK(bounds.eta_min <= bounds.eta_max);

    std::vector<Real> etas = {bounds.eta_min * 0.999, bounds.eta_max * 1.001};
    SweepResult result = frequency_sweep(grid.mdp, defaults, etas, 1e-11);
    CHECK(result.rows.front().lazy_frequency == doctest::Approx(0.0));
    CHECK(result.rows.back().lazy_frequency == doctest::Approx(1.0));
}

TEST_CASE("sweep csv has the documented header and digits") {
    SweepResult result;
    result.n_states = 2;
    result.n_decision_states = 2;
    result.rows.push_back({0.125, 0.5, 1, 1.0 / 3.0, 0.25});
    std::string csv = write_sweep_csv(result);
    CHECK(csv == "eta,lazy_frequency,control_count,score\n"
                 "0.125,0.5,1,0.333333333333\n");
    std::string with_visit = write_sweep_csv(result, true);
    CHECK(with_visit ==
          "eta,lazy_frequency,control_count,score,visit_lazy_frequency\n"
          "0.125,0.5,1,0.333333333333,0.25\n");
}

TEST_CASE("estimate_bounds_from_tables reproduces the exact bounds on exact tables") {
    std::mt19937_64 rng(408);
    for (int trial = 0; trial < 10; ++trial) {
        TabularMDP mdp = testing::make_random_mdp(rng, 8, 3, true);
        StochasticPolicy defaults =
            testing::make_random_policy(rng, mdp.n_states, mdp.n_actions);
        EtaBounds exact = compute_eta_bounds(mdp, defaults, 1e-13);

        QTable q_star = value_iteration(mdp, 1e-13);
        StochasticPolicy pi_star(mdp.n_states, mdp.n_actions);
        auto best = greedy_actions(q_star);
        for (int s = 0; s < mdp.n_states; ++s) pi_star(s, best[s]) = 1.0;
        ZTable z = z_eval(mdp, pi_star, 1e-13);
        QTable q_default = policy_eval_q(mdp, defaults, 1e-13);
        EtaBounds learned = estimate_bounds_from_tables(q_star, z, pi_star, q_default,
                                                        defaults, mdp.absorbing);
        CHECK(learned.eta_max == doctest::Approx(exact.eta_max).epsilon(1e-9));
        CHECK(learned.eta_min == doctest::Approx(exact.eta_min).epsilon(1e-9));
    }
}

TEST_CASE("estimate_bounds_from_tables is stable under small perturbations on R&B") {
    CompiledGrid grid = load_grid("rivers_bridges.map");
    StochasticPolicy defaults = default_uniform(grid);
    EtaBounds exact = compute_eta_bounds(grid.mdp, defaults, 1e-12);

    QTable q_star = value_iteration(grid.mdp, 1e-12);
    StochasticPolicy pi_star(grid.mdp.n_states, grid.mdp.n_actions);
    auto best = greedy_actions(q_star);
    for (int s = 0; s < grid.mdp.n_states; ++s) pi_star(s, best[s]) = 1.0;
    ZTable z = z_eval(grid.mdp, pi_star, 1e-12);
    QTable q_default = policy_eval_q(grid.mdp, defaults, 1e-12);

    std::mt19937_64 rng(409);
    for (auto& v : q_star.data) v += testing::uniform_in(rng, -1e-6, 1e-6);
    for (auto& v : z.data) v += testing::uniform_in(rng, -1e-6, 1e-6);
    for (auto& v : q_default.data) v += testing::uniform_in(rng, -1e-6, 1e-6);
    EtaBounds learned = estimate_bounds_from_tables(q_star, z, pi_star, q_default,
                                                    defaults, grid.mdp.absorbing);
    CHECK(std::abs(learned.eta_max - exact.eta_max) < 1e-4);
    CHECK(std::abs(learned.eta_min - exact.eta_min) < 1e-4);
}

TEST_CASE("bounds from Q-learning tables land within 10 percent on KDT") {
    CompiledGrid grid = load_grid("kdt.map");
    StochasticPolicy defaults = default_uniform(grid);
    EtaBounds exact = compute_eta_bounds(grid.mdp, defaults, 1e-11);

    QLearningConfig config;
    config.alpha = 0.5;
    config.epsilon0 = 1.0;  // fully exploratory behavior, off-policy targets
    config.epsilon_inf = 1.0;
    config.decay_horizon = 1;
    config.gamma = grid.mdp.gamma;
    config.n_phases = 10;
    config.episodes_per_phase = 4000;
    config.max_episode_steps = 400;
    config.eval_episodes = 0;
    config.seed = 12345;
    LearningRun run = q_learning(grid.mdp, config);

    StochasticPolicy pi_star_est(grid.mdp.n_states, grid.mdp.n_actions);
    auto best = greedy_actions(run.q);
    for (int s = 0; s < grid.mdp.n_states; ++s) pi_star_est(s, best[s]) = 1.0;
    ZTable z_est = learn_z(grid.mdp, pi_star_est, config);
    // the default policy is known, so its Q-side is evaluated exactly
    QTable q_default = policy_eval_q(grid.mdp, defaults, 1e-11);

    EtaBounds learned = estimate_bounds_from_tables(run.q, z_est, pi_star_est, q_default,
                                                    defaults, grid.mdp.absorbing);
    CHECK(std::abs(learned.eta_max - exact.eta_max) < 0.1 * exact.eta_max);
    CHECK(std::abs(learned.eta_min - exact.eta_min) < 0.1 * std::max(exact.eta_min, 1e-3));
}
