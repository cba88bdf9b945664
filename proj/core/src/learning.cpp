#include "lazymdp/learning.hpp"

#include "lazymdp/text.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lazymdp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed ^ stream) + index));
}

constexpr std::uint64_t kTrainStream = 0x747261696eULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;
constexpr std::uint64_t kOccupancyStream = 0x6f636375ULL;

inline int bounded_int(std::mt19937_64& rng, int n) {
    int v = static_cast<int>(uniform01(rng) * n);
    return v < n ? v : n - 1;
}

/// Inverse-CDF sampler over precomputed categorical rows; rows with a single
/// outcome are resolved without consuming randomness.
struct CategoricalRows {
    std::vector<int> single;         // outcome when >= 0
    std::vector<std::size_t> offset; // into cum/outcome otherwise, size rows+1
    std::vector<Real> cum;
    std::vector<int> outcome;

    void build(int n_rows, const Real* table, int width) {
        single.assign(n_rows, -1);
        offset.assign(n_rows + 1, 0);
        for (int row = 0; row < n_rows; ++row) {
            const Real* p = table + static_cast<std::size_t>(row) * width;
            int count = 0;
            int last = -1;
            for (int t = 0; t < width; ++t) {
                if (p[t] != 0.0) {
                    ++count;
                    last = t;
                }
            }
            if (count <= 1) {
                single[row] = last;
            } else {
                Real acc = 0.0;
                for (int t = 0; t < width; ++t) {
                    if (p[t] == 0.0) continue;
                    acc += p[t];
                    cum.push_back(acc);
                    outcome.push_back(t);
                }
            }
            offset[row + 1] = cum.size();
        }
    }

    int sample(int row, std::mt19937_64& rng) const {
        if (single[row] >= 0) return single[row];
        Real u = uniform01(rng);
        std::size_t lo = offset[row];
        std::size_t hi = offset[row + 1];
        for (std::size_t k = lo; k < hi; ++k)
            if (u < cum[k]) return outcome[k];
        return outcome[hi - 1];
    }
};

/// Flattened simulation tables shared by the learners. For lazy runs the
/// agent-visible action space has one extra action that is resolved through
/// the default-policy sampler.
struct Simulator {
    int n_states = 0;
    int n_base_actions = 0;
    int n_agent_actions = 0;
    bool lazy = false;
    Real eta = 0.0;
    CategoricalRows transition;  // per (s, base_a)
    CategoricalRows initial;     // single row
    CategoricalRows default_rows;  // per state, lazy runs only
    std::vector<Real> reward;      // base rewards per (s, base_a)
    std::vector<std::uint8_t> absorbing;

    static Simulator base_mdp(const TabularMDP& mdp) {
        Simulator sim;
        sim.n_states = mdp.n_states;
        sim.n_base_actions = mdp.n_actions;
        sim.n_agent_actions = mdp.n_actions;
        sim.transition.build(mdp.n_states * mdp.n_actions, mdp.transitions.data(),
                             mdp.n_states);
        sim.initial.build(1, mdp.initial_dist.data(), mdp.n_states);
        sim.reward = mdp.rewards;
        sim.absorbing = mdp.absorbing;
        return sim;
    }

    static Simulator lazy_mdp(const LazyMDPSpec& spec) {
        Simulator sim = base_mdp(spec.base);
        sim.lazy = true;
        sim.eta = spec.eta;
        sim.n_agent_actions = spec.base.n_actions + 1;
        sim.default_rows.build(spec.base.n_states, spec.default_policy.probs.data(),
                               spec.base.n_actions);
        return sim;
    }

    int sample_start(std::mt19937_64& rng) const { return initial.sample(0, rng); }

    struct Outcome {
        int next;
        Real observed;  // what the learner sees (penalty included)
        Real base;      // penalty-free reward for scoring
        bool absorbed;
    };

    Outcome step(int s, int agent_action, std::mt19937_64& rng) const {
        int a = agent_action;
        bool deferred = false;
        if (lazy && agent_action == n_base_actions) {
            a = default_rows.sample(s, rng);
            deferred = true;
        }
        const int row = s * n_base_actions + a;
        const int next = transition.sample(row, rng);
        const Real base = reward[row];
        const Real observed = deferred ? base : base - eta;
        return {next, observed, base, absorbing[next] != 0};
    }
};

inline int argmax_row(const Real* q, int n) {
    int best = 0;
    Real best_v = q[0];
    for (int a = 1; a < n; ++a) {
        if (q[a] > best_v) {
            best_v = q[a];
            best = a;
        }
    }
    return best;
}

inline Real max_row(const Real* q, int n) {
    Real best = q[0];
    for (int a = 1; a < n; ++a)
        if (q[a] > best) best = q[a];
    return best;
}

Real greedy_return(const Simulator& sim, const QTable& q, const QLearningConfig& config,
                   std::mt19937_64& rng) {
    int s = sim.sample_start(rng);
    Real total = 0.0;
    if (sim.absorbing[s]) return total;
    for (long step = 0; step < config.max_episode_steps; ++step) {
        int a = argmax_row(q.row(s), sim.n_agent_actions);
        auto out = sim.step(s, a, rng);
        total += out.base;
        s = out.next;
        if (out.absorbed) break;
    }
    return total;
}

LearningRun run_q_learning(const Simulator& sim, const QLearningConfig& config) {
    ValidationReport report = validate(config);
    if (!report.ok())
        throw std::invalid_argument("invalid learning config: " + report.summary());

    const int A = sim.n_agent_actions;
    LearningRun run;
    run.q = QTable(sim.n_states, A);
    run.curve.reserve(config.n_phases);
    run.lazy_frequency_curve.reserve(config.n_phases);
    std::vector<long> visit_counts(sim.n_states, 0);

    std::mt19937_64 train_rng = derived_rng(config.seed, kTrainStream, 0);
    const Real alpha = config.alpha;
    const Real gamma = config.gamma;
    const int lazy_action = sim.n_base_actions;

    for (long phase = 0; phase < config.n_phases; ++phase) {
        const bool last_phase = phase + 1 == config.n_phases;
        long decisions = 0;
        long lazy_decisions = 0;
        for (long ep = 0; ep < config.episodes_per_phase; ++ep) {
            const long global_episode = phase * config.episodes_per_phase + ep;
            const Real eps = epsilon_at(config, global_episode);
            int s = sim.sample_start(train_rng);
            if (last_phase) ++visit_counts[s];
            if (sim.absorbing[s]) continue;
            for (long step = 0; step < config.max_episode_steps; ++step) {
                int a;
                if (uniform01(train_rng) < eps)
                    a = bounded_int(train_rng, A);
                else
                    a = argmax_row(run.q.row(s), A);
                ++decisions;
                if (sim.lazy && a == lazy_action) ++lazy_decisions;

                auto out = sim.step(s, a, train_rng);
                const Real future = out.absorbed ? 0.0 : max_row(run.q.row(out.next), A);
                Real& cell = run.q(s, a);
                cell += alpha * (out.observed + gamma * future - cell);

                if (last_phase) ++visit_counts[out.next];
                s = out.next;
                if (out.absorbed) break;
            }
        }

        std::mt19937_64 eval_rng = derived_rng(config.seed, kEvalStream, phase);
        Real score = 0.0;
        for (long ep = 0; ep < config.eval_episodes; ++ep)
            score += greedy_return(sim, run.q, config, eval_rng);
        run.curve.push_back(config.eval_episodes > 0 ? score / config.eval_episodes : 0.0);
        run.lazy_frequency_curve.push_back(
            decisions > 0 ? static_cast<Real>(lazy_decisions) / decisions : 0.0);
    }

    long total_visits = 0;
    for (long c : visit_counts) total_visits += c;
    run.final_occupancy.assign(sim.n_states, 0.0);
    if (total_visits > 0)
        for (int s = 0; s < sim.n_states; ++s)
            run.final_occupancy[s] = static_cast<Real>(visit_counts[s]) / total_visits;
    return run;
}

}  // namespace

ValidationReport validate(const QLearningConfig& config) {
    ValidationReport report;
    auto fail = [&report](const std::string& m) { report.errors.push_back(m); };
    if (!(config.alpha > 0.0 && config.alpha <= 1.0)) fail("alpha must be in (0,1]");
    if (!(config.epsilon0 >= 0.0 && config.epsilon0 <= 1.0)) fail("epsilon0 must be in [0,1]");
    if (!(config.epsilon_inf >= 0.0 && config.epsilon_inf <= config.epsilon0))
        fail("epsilon_inf must be in [0, epsilon0]");
    if (config.decay_horizon < 1) fail("decay_horizon must be positive");
    if (!(config.gamma >= 0.0 && config.gamma < 1.0)) fail("gamma must be in [0,1)");
    if (config.episodes_per_phase < 1) fail("episodes_per_phase must be positive");
    if (config.n_phases < 1) fail("n_phases must be positive");
    if (config.max_episode_steps < 1) fail("max_episode_steps must be at least 1");
    if (config.eval_episodes < 0) fail("eval_episodes must be nonnegative");
    return report;
}

Real epsilon_at(const QLearningConfig& config, long episode) {
    Real progress = static_cast<Real>(episode) / static_cast<Real>(config.decay_horizon);
    if (progress > 1.0) progress = 1.0;
    return config.epsilon0 + (config.epsilon_inf - config.epsilon0) * progress;
}

LearningRun q_learning(const TabularMDP& mdp, const QLearningConfig& config) {
    return run_q_learning(Simulator::base_mdp(mdp), config);
}

LearningRun q_learning_lazy(const LazyMDPSpec& spec, const QLearningConfig& config) {
    ValidationReport report = validate(spec);
    if (!report.ok())
        throw std::invalid_argument("q_learning_lazy: invalid spec: " + report.summary());
    return run_q_learning(Simulator::lazy_mdp(spec), config);
}

ZTable learn_z(const TabularMDP& mdp, const StochasticPolicy& target,
               const QLearningConfig& config) {
    ValidationReport report = validate(config);
    if (!report.ok())
        throw std::invalid_argument("invalid learning config: " + report.summary());
    if (target.n_states != mdp.n_states || target.n_actions != mdp.n_actions)
        throw std::invalid_argument("learn_z: target policy dimensions mismatch");

    Simulator sim = Simulator::base_mdp(mdp);
    CategoricalRows target_rows;
    target_rows.build(mdp.n_states, target.probs.data(), mdp.n_actions);

    const int A = mdp.n_actions;
    ZTable z(mdp.n_states, A);
    std::mt19937_64 rng = derived_rng(config.seed, kTrainStream, 1);
    const Real alpha = config.alpha;
    const Real gamma = config.gamma;
    const long total_episodes = config.n_phases * config.episodes_per_phase;

    for (long episode = 0; episode < total_episodes; ++episode) {
        const Real eps = epsilon_at(config, episode);
        int s = sim.sample_start(rng);
        if (sim.absorbing[s]) continue;
        for (long step = 0; step < config.max_episode_steps; ++step) {
            int a;
            if (uniform01(rng) < eps)
                a = bounded_int(rng, A);
            else
                a = target_rows.sample(s, rng);

            auto out = sim.step(s, a, rng);
            Real future = 0.0;
            if (!out.absorbed) {
                const Real* zr = z.row(out.next);
                const Real* tr = target.row(out.next);
                for (int b = 0; b < A; ++b) future += tr[b] * zr[b];
            }
            const Real unit = sim.absorbing[s] ? 0.0 : 1.0;
            Real& cell = z(s, a);
            cell += alpha * (unit + gamma * future - cell);
            s = out.next;
            if (out.absorbed) break;
        }
    }
    return z;
}

ValueTable occupancy(const TabularMDP& mdp, const StochasticPolicy& policy,
                     long n_episodes, long max_episode_steps, std::uint64_t seed) {
    if (policy.n_states != mdp.n_states || policy.n_actions != mdp.n_actions)
        throw std::invalid_argument("occupancy: policy dimensions mismatch");
    if (n_episodes < 1 || max_episode_steps < 1)
        throw std::invalid_argument("occupancy: episode counts must be positive");

    Simulator sim = Simulator::base_mdp(mdp);
    CategoricalRows policy_rows;
    policy_rows.build(mdp.n_states, policy.probs.data(), mdp.n_actions);

    std::vector<long> counts(mdp.n_states, 0);
    std::mt19937_64 rng = derived_rng(seed, kOccupancyStream, 0);
    for (long ep = 0; ep < n_episodes; ++ep) {
        int s = sim.sample_start(rng);
        ++counts[s];
        if (sim.absorbing[s]) continue;
        for (long step = 0; step < max_episode_steps; ++step) {
            int a = policy_rows.sample(s, rng);
            auto out = sim.step(s, a, rng);
            ++counts[out.next];
            s = out.next;
            if (out.absorbed) break;
        }
    }
    long total = 0;
    for (long c : counts) total += c;
    ValueTable mass(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s)
        mass[s] = static_cast<Real>(counts[s]) / total;
    return mass;
}

std::string write_curve_csv(const LearningRun& run) {
    std::ostringstream out;
    out << "phase,score,lazy_frequency\n";
    for (std::size_t i = 0; i < run.curve.size(); ++i)
        out << i << ',' << to_decimal(run.curve[i], 12) << ','
            << to_decimal(run.lazy_frequency_curve[i], 12) << "\n";
    return out.str();
}

std::string write_occupancy_csv(const CompiledGrid& grid, const ValueTable& mass) {
    std::ostringstream out;
    out << "state,row,col,has_key,door_open,mass\n";
    for (int s = 0; s < static_cast<int>(mass.size()); ++s) {
        const GridState& gs = grid.state_of(s);
        out << s << ',' << gs.row << ',' << gs.col << ',' << (gs.has_key ? 1 : 0)
            << ',' << (gs.door_open ? 1 : 0) << ',' << to_decimal(mass[s], 12) << "\n";
    }
    return out.str();
}

}  // namespace lazymdp
