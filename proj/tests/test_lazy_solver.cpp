#include "lazymdp/lazy_solver.hpp"

#include "lazymdp/eta_bounds.hpp"

#include "support/test_mdps.hpp"

#include <doctest.h>

#include <cmath>

using namespace lazymdp;

namespace {

LazyMDPSpec scalar_spec(Real gamma, Real eta) {
    LazyMDPSpec spec;
    spec.base = TabularMDP(1, 2, gamma);
    spec.base.p(0, 0, 0) = 1.0;
    spec.base.p(0, 1, 0) = 1.0;
    spec.base.r(0, 0) = 1.0;
    spec.base.r(0, 1) = 0.0;
    spec.base.initial_dist[0] = 1.0;
    spec.default_policy = StochasticPolicy(1, 2);
    spec.default_policy(0, 0) = 0.5;
    spec.default_policy(0, 1) = 0.5;
    spec.eta = eta;
    return spec;
}

QTable random_q(std::mt19937_64& rng, int S, int A, Real lo, Real hi) {
    QTable q(S, A);
    for (auto& v : q.data) v = testing::uniform_in(rng, lo, hi);
    return q;
}

}  // namespace

TEST_CASE("lazy_greedy branches on the gap-versus-penalty comparison") {
    StochasticPolicy uniform(1, 2);
    uniform(0, 0) = 0.5;
    uniform(0, 1) = 0.5;
    QTable q(1, 2);
    q(0, 0) = 1.0;
    q(0, 1) = 0.0;

    StochasticPolicy lazy = lazy_greedy(q, uniform, 0.6);  // gap 0.5 <= 0.6
    CHECK(lazy(0, 2) == doctest::Approx(1.0));

    StochasticPolicy control = lazy_greedy(q, uniform, 0.4);  // gap 0.5 > 0.4
    CHECK(control(0, 0) == doctest::Approx(1.0));
    CHECK(control(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("lazy_greedy splits argmax ties uniformly") {
    StochasticPolicy uniform(1, 3);
    for (int a = 0; a < 3; ++a) uniform(0, a) = 1.0 / 3.0;
    QTable q(1, 3);
    q(0, 0) = 1.0;
    q(0, 1) = 1.0;
    q(0, 2) = 0.0;
    StochasticPolicy pi = lazy_greedy(q, uniform, 0.2);  // gap 1/3 > 0.2
    CHECK(pi(0, 0) == doctest::Approx(0.5));
    CHECK(pi(0, 1) == doctest::Approx(0.5));
    CHECK(pi(0, 2) == doctest::Approx(0.0));
    CHECK(pi(0, 3) == doctest::Approx(0.0));
}

TEST_CASE("lazy_greedy resolves gap==eta ties to the lazy action") {
    StochasticPolicy uniform(1, 2);
    uniform(0, 0) = 0.5;
    uniform(0, 1) = 0.5;
    QTable q(1, 2);
    q(0, 0) = 1.0;
    q(0, 1) = 0.0;
    StochasticPolicy pi = lazy_greedy(q, uniform, 0.5);  // gap == eta exactly
    CHECK(pi(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("operator keeps the zero fixed point on an absorbing-only MDP") {
    LazyMDPSpec spec;
    spec.base = TabularMDP(2, 2, 0.9);
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) spec.base.p(s, a, s) = 1.0;
        spec.base.absorbing[s] = 1;
    }
    spec.base.initial_dist[0] = 1.0;
    spec.default_policy = StochasticPolicy(2, 2);
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) spec.default_policy(s, a) = 0.5;
    spec.eta = 0.0;

    QTable q(2, 2);
    QTable tq = greedy_operator_step(q, spec);
    for (Real v : tq.data) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("operator is a gamma-contraction on random pairs") {
    std::mt19937_64 rng(301);
    for (int trial = 0; trial < 100; ++trial) {
        LazyMDPSpec spec = testing::make_random_spec(rng, 10, 4, true);
        QTable q1 = random_q(rng, spec.base.n_states, spec.base.n_actions, -5.0, 5.0);
        QTable q2 = random_q(rng, spec.base.n_states, spec.base.n_actions, -5.0, 5.0);
        QTable t1 = greedy_operator_step(q1, spec);
        QTable t2 = greedy_operator_step(q2, spec);
        Real lhs = sup_norm_diff(t1.data, t2.data);
        Real rhs = spec.base.gamma * sup_norm_diff(q1.data, q2.data);
        CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("scalar fixed points match the closed-form algebra") {
    // Hand-derived: rewards (1,0), uniform default, gamma 0.5.
    // Control regime (gap 0.5 > eta): val = (1-eta)/(1-gamma).
    // Lazy regime (gap 0.5 <= eta): val = mean reward/(1-gamma).
    SUBCASE("eta = 0.4 takes control") {
        LazySolution sol = solve_lazy(scalar_spec(0.5, 0.4), 1e-13);
        CHECK(sol.q_star(0, 0) == doctest::Approx(1.2).epsilon(1e-9));
        CHECK(sol.q_star(0, 1) == doctest::Approx(0.2).epsilon(1e-9));
        CHECK(sol.control_mask[0] == 1);
        CHECK(sol.pi_plus_star(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("eta = 0.6 defers") {
        LazySolution sol = solve_lazy(scalar_spec(0.5, 0.6), 1e-13);
        CHECK(sol.q_star(0, 0) == doctest::Approx(0.9).epsilon(1e-9));
        CHECK(sol.q_star(0, 1) == doctest::Approx(-0.1).epsilon(1e-9));
        CHECK(sol.control_mask[0] == 0);
        CHECK(sol.pi_plus_star(0, 2) == doctest::Approx(1.0));
    }
}

TEST_CASE("solve_lazy control structure at extreme penalties") {
    std::mt19937_64 rng(302);
    for (int trial = 0; trial < 10; ++trial) {
        LazyMDPSpec spec = testing::make_random_spec(rng, 8, 3, true);
        Real lo = eta_min(spec.base, spec.default_policy, 1e-12);
        Real hi = eta_max(spec.base, spec.default_policy, 1e-12);

        spec.eta = hi * 1.01 + 1e-6;
        LazySolution above = solve_lazy(spec, 1e-12);
        CHECK(testing::control_count(spec.base, above) == 0);

        if (lo > 1e-9) {
            spec.eta = lo * 0.99;
            LazySolution below = solve_lazy(spec, 1e-12);
            CHECK(testing::lazy_count(spec.base, below) == 0);
        }
    }
}

TEST_CASE("oracle restriction matches solve_lazy on absorbing-free specs") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 50; ++trial) {
        LazyMDPSpec spec = testing::make_random_spec(rng, 12, 4, false);
        LazySolution sol = solve_lazy(spec, 1e-12);
        QTable q_plus = oracle_solve(spec, 1e-12);
        Real worst = 0.0;
        for (int s = 0; s < spec.base.n_states; ++s)
            for (int a = 0; a < spec.base.n_actions; ++a)
                worst = std::max(worst, std::abs(sol.q_star(s, a) - q_plus(s, a)));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("absorbing rows pin both conventions") {
    // solve_lazy keeps the literal -eta on absorbing rows; the augmented MDP
    // keeps zero rewards there. Values elsewhere agree.
    std::mt19937_64 rng(304);
    for (int trial = 0; trial < 20; ++trial) {
        LazyMDPSpec spec = testing::make_random_spec(rng, 10, 3, true, 0.05, 1.0);
        bool has_absorbing = false;
        for (auto b : spec.base.absorbing) has_absorbing |= b != 0;
        LazySolution sol = solve_lazy(spec, 1e-12);
        QTable q_plus = oracle_solve(spec, 1e-12);
        for (int s = 0; s < spec.base.n_states; ++s) {
            for (int a = 0; a < spec.base.n_actions; ++a) {
                if (spec.base.is_absorbing(s)) {
                    CHECK(sol.q_star(s, a) == doctest::Approx(-spec.eta).epsilon(1e-8));
                    CHECK(q_plus(s, a) == doctest::Approx(0.0).epsilon(1e-8));
                } else {
                    CHECK(sol.q_star(s, a) == doctest::Approx(q_plus(s, a)).epsilon(1e-7));
                }
            }
        }
        (void)has_absorbing;
    }
}

TEST_CASE("zero penalty: the lazy action is never strictly better than the best real one") {
    std::mt19937_64 rng(305);
    for (int trial = 0; trial < 20; ++trial) {
        LazyMDPSpec spec = testing::make_random_spec(rng, 8, 3, true, 0.0, 0.0);
        QTable q_plus = oracle_solve(spec, 1e-12);
        QTable q_base = value_iteration(spec.base, 1e-12);
        for (int s = 0; s < spec.base.n_states; ++s) {
            Real best_aug = q_plus(s, 0);
            for (int a = 1; a <= spec.base.n_actions; ++a)
                best_aug = std::max(best_aug, q_plus(s, a));
            Real best_base = q_base(s, 0);
            for (int a = 1; a < spec.base.n_actions; ++a)
                best_base = std::max(best_base, q_base(s, a));
            CHECK(best_aug == doctest::Approx(best_base).epsilon(1e-7));
        }
    }
}

TEST_CASE("oracle on an absorbing-only spec is identically zero") {
    LazyMDPSpec spec;
    spec.base = TabularMDP(3, 2, 0.9);
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < 2; ++a) spec.base.p(s, a, s) = 1.0;
        spec.base.absorbing[s] = 1;
    }
    spec.base.initial_dist[0] = 1.0;
    spec.default_policy = StochasticPolicy(3, 2);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) spec.default_policy(s, a) = 0.5;
    spec.eta = 0.3;
    QTable q_plus = oracle_solve(spec);
    for (Real v : q_plus.data) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("solved policy value matches the oracle optimum per state") {
    std::mt19937_64 rng(306);
    for (int trial = 0; trial < 20; ++trial) {
        LazyMDPSpec spec = testing::make_random_spec(rng, 10, 3, false);
        LazySolution sol = solve_lazy(spec, 1e-12);
        TabularMDP aug = build_augmented(spec);
        ValueTable v = policy_eval_v(aug, sol.pi_plus_star, 1e-12);
        QTable q_plus = oracle_solve(spec, 1e-12);
        for (int s = 0; s < spec.base.n_states; ++s) {
            Real best = q_plus(s, 0);
            for (int a = 1; a <= spec.base.n_actions; ++a)
                best = std::max(best, q_plus(s, a));
            CHECK(v[s] == doctest::Approx(best).epsilon(1e-7));
        }
    }
}

TEST_CASE("solved policy never does worse than always deferring") {
    std::mt19937_64 rng(307);
    for (int trial = 0; trial < 20; ++trial) {
        LazyMDPSpec spec = testing::make_random_spec(rng, 10, 3, true);
        LazySolution sol = solve_lazy(spec, 1e-12);
        TabularMDP aug = build_augmented(spec);
        ValueTable v_star = policy_eval_v(aug, sol.pi_plus_star, 1e-12);
        ValueTable v_default = policy_eval_v(spec.base, spec.default_policy, 1e-12);
        for (int s = 0; s < spec.base.n_states; ++s)
            CHECK(v_star[s] >= v_default[s] - 1e-9);
    }
}

TEST_CASE("solver residuals contract geometrically") {
    std::mt19937_64 rng(308);
    LazyMDPSpec spec = testing::make_random_spec(rng, 10, 3, true);
    QTable q(spec.base.n_states, spec.base.n_actions);
    Real prev = -1.0;
    for (int iter = 0; iter < 50; ++iter) {
        QTable next = greedy_operator_step(q, spec);
        Real residual = sup_norm_diff(next.data, q.data);
        if (prev >= 0.0 && prev > 1e-14)
            CHECK(residual <= (spec.base.gamma + 1e-9) * prev);
        prev = residual;
        q = next;
    }
}

TEST_CASE("solve_lazy reports non-convergence with residual and iterations") {
    LazyMDPSpec spec = scalar_spec(0.9, 0.1);
    try {
        solve_lazy(spec, 1e-12, 1);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& err) {
        CHECK(err.residual() > 0.0);
        CHECK(err.iterations() == 1);
    }
}

TEST_CASE("control_set lists sorted controlled states") {
    std::mt19937_64 rng(309);
    LazyMDPSpec spec = testing::make_random_spec(rng, 10, 3, true);
    spec.eta = eta_max(spec.base, spec.default_policy) * 1.1 + 1e-6;
    LazySolution sol = solve_lazy(spec, 1e-12);
    CHECK(control_set(sol).empty());
}

TEST_CASE("solution document round-trips") {
    std::mt19937_64 rng(310);
    LazyMDPSpec spec = testing::make_random_spec(rng, 6, 3, true);
    LazySolution sol = solve_lazy(spec, 1e-12);
    LazySolution copy = read_solution(write_solution(sol));
    CHECK(copy.q_star.data == sol.q_star.data);
    CHECK(copy.pi_plus_star.probs == sol.pi_plus_star.probs);
    CHECK(copy.gap_star == sol.gap_star);
    CHECK(copy.control_mask == sol.control_mask);
    CHECK(copy.residual == sol.residual);
    CHECK(copy.iterations == sol.iterations);
}
