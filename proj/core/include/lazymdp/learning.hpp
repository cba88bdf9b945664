#pragma once

#include "lazymdp/gridworld.hpp"
#include "lazymdp/lazy_transform.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lazymdp {

/// Tabular Q-learning hyperparameters. Defaults follow the tabular
/// experiment configuration: learning rate 0.5, epsilon decayed linearly
/// from 0.1 to 0 over the whole run, 100 phases of 1000 episodes capped at
/// 1000 steps.
struct QLearningConfig {
    Real alpha = 0.5;
    Real epsilon0 = 0.1;
    Real epsilon_inf = 0.0;
    long decay_horizon = 100000;  // episodes until epsilon reaches epsilon_inf
    Real gamma = 0.99;
    long episodes_per_phase = 1000;
    long n_phases = 100;
    long max_episode_steps = 1000;
    long eval_episodes = 100;  // greedy rollouts averaged per phase score
    std::uint64_t seed = 0;
};

ValidationReport validate(const QLearningConfig& config);

/// Exploration rate for a given global episode index:
/// epsilon0 + (epsilon_inf - epsilon0) * min(episode / decay_horizon, 1).
Real epsilon_at(const QLearningConfig& config, long episode);

/// One training run. Scores are undiscounted greedy-policy episode returns
/// with penalties excluded; the lazy-frequency curve is the fraction of
/// behavior decisions that picked the lazy action in each phase (zero for
/// base-MDP runs). final_occupancy is the normalized state-visit
/// distribution over the last training phase.
struct LearningRun {
    QTable q;
    std::vector<Real> curve;
    std::vector<Real> lazy_frequency_curve;
    ValueTable final_occupancy;
};

/// Standard epsilon-greedy tabular Q-learning on the MDP. Bit-deterministic
/// given (config, seed).
LearningRun q_learning(const TabularMDP& mdp, const QLearningConfig& config);

/// The same learner run on the lazy-MDP: the agent sees one extra action;
/// picking it makes the environment sample the default policy internally and
/// return only the resulting transition.
LearningRun q_learning_lazy(const LazyMDPSpec& spec, const QLearningConfig& config);

/// Learns the expected discounted step count of a fixed target policy by the
/// same update on a unit reward stream; the bootstrap term is the target
/// expectation (evaluation-style update).
ZTable learn_z(const TabularMDP& mdp, const StochasticPolicy& target,
               const QLearningConfig& config);

/// Normalized Monte-Carlo state-visit distribution of a policy.
ValueTable occupancy(const TabularMDP& mdp, const StochasticPolicy& policy,
                     long n_episodes, long max_episode_steps, std::uint64_t seed);

/// CSV with header phase,score,lazy_frequency.
std::string write_curve_csv(const LearningRun& run);

/// CSV with header state,row,col,has_key,door_open,mass for a grid-backed
/// distribution over states.
std::string write_occupancy_csv(const CompiledGrid& grid, const ValueTable& mass);

}  // namespace lazymdp
