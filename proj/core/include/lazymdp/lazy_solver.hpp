#pragma once

#include "lazymdp/lazy_transform.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lazymdp {

/// Result of solving a lazy-MDP to optimality.
///
/// control_mask(s) is true exactly when the optimal policy puts no mass on
/// the lazy action at s, equivalently when gap_star(s) exceeds eta beyond the
/// tie tolerance.
struct LazySolution {
    QTable q_star;                  // fixed point over the base actions
    StochasticPolicy pi_plus_star;  // over the augmented action space
    LazyGapMap gap_star;
    std::vector<std::uint8_t> control_mask;
    Real residual = 0.0;
    long iterations = 0;
};

/// Greedy policy in the augmented space for a base-action Q: take control
/// (uniform over the argmax set) where the lazy-gap exceeds eta, defer
/// otherwise. Gaps within kTieTol of eta defer.
StochasticPolicy lazy_greedy(const QTable& q, const StochasticPolicy& default_policy,
                             Real eta);

/// One synchronous application of the greedy operator:
/// TQ(s,a) = r(s,a) - eta + gamma E_{s'}[ max(best real value,
///           default expectation + eta) ], the two branches being the value
/// of taking control at s' versus deferring there.
QTable greedy_operator_step(const QTable& q, const LazyMDPSpec& spec);

/// Iterates the greedy operator from Q = 0 until the sup-norm residual drops
/// below tol, then extracts the greedy policy, the gap map and the control
/// mask. Throws ConvergenceError with the final residual on failure.
LazySolution solve_lazy(const LazyMDPSpec& spec, Real tol = kDefaultTol,
                        long max_iters = kDefaultMaxIters);

/// Reference route: plain value iteration on the explicitly built augmented
/// MDP. Restricted to base actions it matches solve_lazy().q_star on
/// non-absorbing states.
QTable oracle_solve(const LazyMDPSpec& spec, Real tol = kDefaultTol,
                    long max_iters = kDefaultMaxIters);

/// Sorted indices of the states where the agent takes control.
std::vector<int> control_set(const LazySolution& solution);

/// Serialized form of a solution; see the README for the exact layout.
std::string write_solution(const LazySolution& solution);
LazySolution read_solution(const std::string& text);

}  // namespace lazymdp
