#include "lazymdp/importance.hpp"

#include "lazymdp/eta_bounds.hpp"
#include "support/test_mdps.hpp"

#include <doctest.h>

using namespace lazymdp;

namespace {

CompiledGrid load_grid(const char* name) {
    return compile_grid(load_map_file(std::string(LAZYMDP_MAPS_DIR) + "/" + name));
}

}  // namespace

TEST_CASE("action_gap and importance_advice on hand rows") {
    QTable q(2, 3);
    q(0, 0) = 3.0;
    q(0, 1) = 1.0;
    q(0, 2) = 0.0;
    q(1, 0) = 2.0;
    q(1, 1) = 2.0;
    q(1, 2) = 0.0;
    ImportanceMap gap = action_gap(q);
    CHECK(gap.values[0] == doctest::Approx(2.0));
    CHECK(gap.values[1] == doctest::Approx(0.0));  // tied maxima

    ImportanceMap advice = importance_advice(q);
    CHECK(advice.values[0] == doctest::Approx(3.0));
    CHECK(advice.values[1] == doctest::Approx(2.0));

    QTable constant(1, 3);
    for (int a = 0; a < 3; ++a) constant(0, a) = 4.0;
    CHECK(importance_advice(constant).values[0] == doctest::Approx(0.0));
}

TEST_CASE("single-action spaces degrade to zero importance") {
    QTable q(2, 1);
    q(0, 0) = 5.0;
    q(1, 0) = -1.0;
    CHECK(action_gap(q).values == ValueTable{0.0, 0.0});
    CHECK(importance_advice(q).values == ValueTable{0.0, 0.0});
}

TEST_CASE("advice dominates the action gap pointwise") {
    std::mt19937_64 rng(601);
    for (int trial = 0; trial < 50; ++trial) {
        int S = 1 + static_cast<int>(uniform01(rng) * 10);
        int A = 2 + static_cast<int>(uniform01(rng) * 4);
        QTable q(S, A);
        for (auto& v : q.data) v = testing::uniform_in(rng, -3.0, 3.0);
        auto gap = action_gap(q);
        auto advice = importance_advice(q);
        for (int s = 0; s < S; ++s) {
            CHECK(gap.values[s] >= 0.0);
            CHECK(advice.values[s] >= gap.values[s] - 1e-12);
        }
    }
}

TEST_CASE("lazy-gap importance support is the bridge set on R&B") {
    CompiledGrid grid = load_grid("rivers_bridges.map");
    std::vector<std::uint8_t> mask(grid.rows * grid.cols, 0);
    for (int cell : grid.bridge_cells) mask[cell] = 1;
    LazyMDPSpec spec{grid.mdp, default_optimal_except(grid, mask), 1e-3};
    ImportanceMap lazy = lazy_gap_importance(spec, 1e-12);
    for (int s = 0; s < grid.mdp.n_states; ++s) {
        const GridState& gs = grid.state_of(s);
        bool bridge = grid.spec.at(gs.row, gs.col) == '=';
        if (bridge)
            CHECK(lazy.values[s] > spec.eta);
        else
            CHECK(lazy.values[s] <= spec.eta + kTieTol);
    }
}

TEST_CASE("above eta_max the lazy-gap never exceeds the penalty") {
    std::mt19937_64 rng(602);
    LazyMDPSpec spec = testing::make_random_spec(rng, 8, 3, true);
    spec.eta = eta_max(spec.base, spec.default_policy) * 1.5 + 0.1;
    ImportanceMap lazy = lazy_gap_importance(spec, 1e-12);
    for (int s = 0; s < spec.base.n_states; ++s)
        if (!spec.base.is_absorbing(s)) CHECK(lazy.values[s] <= spec.eta + kTieTol);
}

TEST_CASE("constant-reward MDPs carry no importance anywhere") {
    // every action identical: Q rows constant, all three measures vanish
    TabularMDP mdp(3, 3, 0.9);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 3; ++a) {
            mdp.p(s, a, (s + 1) % 3) = 1.0;
            mdp.r(s, a) = 0.5;
        }
    mdp.initial_dist[0] = 1.0;
    REQUIRE(validate(mdp).ok());
    QTable q_star = value_iteration(mdp, 1e-12);
    CHECK(action_gap(q_star).values[0] == doctest::Approx(0.0));
    CHECK(importance_advice(q_star).values[0] == doctest::Approx(0.0));

    StochasticPolicy uniform(3, 3);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 3; ++a) uniform(s, a) = 1.0 / 3.0;
    LazyMDPSpec spec{mdp, uniform, 0.0};
    ImportanceMap lazy = lazy_gap_importance(spec, 1e-12);
    for (Real v : lazy.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lazy-gap support is smaller than action-gap support on KDT") {
    CompiledGrid grid = load_grid("kdt.map");
    StochasticPolicy defaults = default_uniform(grid);
    QTable q_star = value_iteration(grid.mdp, 1e-11);
    ImportanceMap gap = action_gap(q_star);

    for (Real eta : {0.03, 0.05}) {
        LazyMDPSpec spec{grid.mdp, defaults, eta};
        ImportanceMap lazy = lazy_gap_importance(spec, 1e-11);
        int lazy_support = 0;
        int gap_support = 0;
        for (int s = 0; s < grid.mdp.n_states; ++s) {
            if (lazy.values[s] > eta) ++lazy_support;
            if (gap.values[s] > 0.0) ++gap_support;
        }
        CHECK(lazy_support < gap_support);
        CHECK(lazy_support > 0);
    }
}

TEST_CASE("importance slices partition the KDT state space") {
    CompiledGrid grid = load_grid("kdt.map");
    int total = 0;
    for (int k = 0; k < 2; ++k)
        for (int d = 0; d < 2; ++d)
            for (int r = 0; r < grid.rows; ++r)
                for (int c = 0; c < grid.cols; ++c)
                    if (grid.state_index(r, c, k != 0, d != 0) >= 0) ++total;
    CHECK(total == grid.mdp.n_states);
}

TEST_CASE("importance csv export includes the codec columns") {
    CompiledGrid grid = compile_grid(parse_grid("####\n#SG#\n####\n"));
    ImportanceMap map;
    map.name = "test";
    map.values.assign(grid.mdp.n_states, 0.5);
    std::string csv = write_importance_csv(grid, map);
    CHECK(csv.find("state,row,col,has_key,door_open,value\n") == 0);
    CHECK(csv.find("0,1,1,0,0,0.5") != std::string::npos);
}
