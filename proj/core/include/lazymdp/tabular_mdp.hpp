#pragma once

#include "lazymdp/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace lazymdp {

/// Finite MDP with dense row-major tables.
///
/// Conventions: rewards are state-action (not state-action-state); absorbing
/// states self-loop deterministically under every action with zero reward;
/// gamma is strictly below 1.
struct TabularMDP {
    int n_states = 0;
    int n_actions = 0;
    Real gamma = 0.0;
    std::vector<Real> transitions;  // [s][a][s'], each (s,a) row a distribution
    std::vector<Real> rewards;      // [s][a]
    std::vector<Real> initial_dist; // [s]
    std::vector<std::uint8_t> absorbing;  // [s]

    TabularMDP() = default;
    TabularMDP(int states, int actions, Real discount)
        : n_states(states), n_actions(actions), gamma(discount),
          transitions(static_cast<std::size_t>(states) * actions * states, 0.0),
          rewards(static_cast<std::size_t>(states) * actions, 0.0),
          initial_dist(states, 0.0), absorbing(states, 0) {}

    Real& p(int s, int a, int next) {
        return transitions[(static_cast<std::size_t>(s) * n_actions + a) * n_states + next];
    }
    Real p(int s, int a, int next) const {
        return transitions[(static_cast<std::size_t>(s) * n_actions + a) * n_states + next];
    }
    const Real* transition_row(int s, int a) const {
        return transitions.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states;
    }
    Real& r(int s, int a) { return rewards[static_cast<std::size_t>(s) * n_actions + a]; }
    Real r(int s, int a) const { return rewards[static_cast<std::size_t>(s) * n_actions + a]; }
    bool is_absorbing(int s) const { return absorbing[s] != 0; }

    Real reward_min() const;
    Real reward_max() const;
};

/// Outcome of validate(): empty error list means the MDP honors every invariant.
struct ValidationReport {
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
    std::string summary() const;
};

/// Checks row-stochasticity, the initial distribution, the absorbing-state
/// contract (self-loop, zero reward) and the discount range. Every violation
/// is reported with its indices; validation failure is not a fault.
ValidationReport validate(const TabularMDP& mdp);

/// Checks that every row of the policy is a distribution over `n_actions`.
ValidationReport validate(const StochasticPolicy& pi);

/// Exact evaluation of V^pi by fixed-point iteration; the returned table has
/// sup-norm Bellman residual below tol.
ValueTable policy_eval_v(const TabularMDP& mdp, const StochasticPolicy& pi,
                         Real tol = kDefaultTol, long max_iters = kDefaultMaxIters);

/// Evaluation of V^pi by direct linear solve of (I - gamma P_pi) V = r_pi.
/// Independent route from policy_eval_v, kept for cross-checking.
ValueTable policy_eval_v_direct(const TabularMDP& mdp, const StochasticPolicy& pi);

/// Q^pi(s,a) = r(s,a) + gamma E_{s'}[V^pi(s')].
QTable policy_eval_q(const TabularMDP& mdp, const StochasticPolicy& pi,
                     Real tol = kDefaultTol, long max_iters = kDefaultMaxIters);

/// Expected discounted step count before absorption:
/// Z^pi(s,a) = 1{s not absorbing} + gamma E_{s'}[E_pi[Z^pi(s',.)]].
/// Solved directly on the (state, action) table, not via a reward clone.
ZTable z_eval(const TabularMDP& mdp, const StochasticPolicy& pi,
              Real tol = kDefaultTol, long max_iters = kDefaultMaxIters);

/// Optimal Q by value iteration with synchronous sweeps. Throws
/// ConvergenceError when the residual is still above tol after max_iters.
QTable value_iteration(const TabularMDP& mdp, Real tol = kDefaultTol,
                       long max_iters = kDefaultMaxIters);

/// Uniform distribution over the per-row argmax set, with ties detected at
/// absolute tolerance kTieTol.
StochasticPolicy greedy_from_q(const QTable& q);

/// Deterministic greedy policy; within-tolerance ties resolve to the lowest
/// action index. Returned as one action index per state.
std::vector<int> greedy_actions(const QTable& q);

struct StepResult {
    int next_state = 0;
    Real reward = 0.0;
    bool absorbed = false;  // next_state is absorbing
};

/// Samples one transition. Deterministic given the generator state and call
/// sequence; rows with a single successor consume no randomness.
StepResult sample_step(const TabularMDP& mdp, int s, int a, std::mt19937_64& rng);

/// Uniform draw in [0,1) from the top 53 bits of the generator, identical
/// across platforms.
inline Real uniform01(std::mt19937_64& rng) {
    return static_cast<Real>(rng() >> 11) * 0x1.0p-53;
}

namespace detail {

/// Compressed successor lists for fast sweeps over sparse transition rows.
struct SuccessorTable {
    std::vector<std::size_t> offsets;  // per (s,a), size S*A+1
    std::vector<int> next;
    std::vector<Real> prob;
};

SuccessorTable build_successors(const TabularMDP& mdp);

/// State-to-state kernel and reward of the Markov chain induced by pi.
struct InducedChain {
    std::vector<std::size_t> offsets;  // per state, size S+1
    std::vector<int> next;
    std::vector<Real> prob;
    std::vector<Real> reward;  // r_pi(s)
};

InducedChain induce_chain(const TabularMDP& mdp, const StochasticPolicy& pi);

}  // namespace detail

}  // namespace lazymdp
