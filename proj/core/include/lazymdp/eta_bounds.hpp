#pragma once

#include "lazymdp/lazy_solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lazymdp {

/// Penalty thresholds with the per-state terms they were built from.
///
/// eta_max is the largest lazy-gap of the default policy's own Q-function;
/// above it the optimal lazy policy defers everywhere. eta_min is the
/// minimax ratio of the optimal-policy advantage over the step-count shift;
/// below it the optimal lazy policy never defers. Absorbing states carry no
/// decision and are left out of both extrema.
struct EtaBounds {
    Real eta_min = 0.0;
    Real eta_max = 0.0;

    // Diagnostics.
    LazyGapMap default_gap;     // per-state gap of Q^default (eta_max terms)
    QTable advantage;           // u(s,a) = Q*(s,a) - E_default[Q*(s,.)]
    QTable step_shift;          // v(s,a) = E_opt[Z(s,.)] - E_default[Z(s,.)]
    std::vector<std::uint8_t> excluded;  // per (s,a): step_shift <= -1
    ValueTable state_threshold;          // per-state inner max of the ratio
    bool all_pairs_excluded = false;     // every state lost all its pairs
    Real eta_min_raw = 0.0;              // before clamping at zero
};

/// Largest default-policy lazy-gap over non-absorbing states.
Real eta_max(const TabularMDP& base, const StochasticPolicy& default_policy,
             Real tol = kDefaultTol);

/// Minimax penalty threshold from the optimal Q and step counts; the optimal
/// policy feeding the step counts is the deterministic greedy one with
/// lowest-index tie-breaking. Clamped at zero.
Real eta_min(const TabularMDP& base, const StochasticPolicy& default_policy,
             Real tol = kDefaultTol);

/// Both thresholds plus all per-state diagnostic terms.
EtaBounds compute_eta_bounds(const TabularMDP& base,
                             const StochasticPolicy& default_policy,
                             Real tol = kDefaultTol);

/// Same formulas evaluated on externally supplied (typically learned)
/// tables: q_star_est/z_est/pi_star_est feed the minimax threshold,
/// q_default_est (an estimate of the default policy's own Q) feeds the
/// maximal gap. No clamping is applied so estimation error stays visible;
/// the absorbing mask tells the extrema which states to skip.
EtaBounds estimate_bounds_from_tables(const QTable& q_star_est, const ZTable& z_est,
                                      const StochasticPolicy& pi_star_est,
                                      const QTable& q_default_est,
                                      const StochasticPolicy& default_policy,
                                      const std::vector<std::uint8_t>& absorbing);

struct SweepRow {
    Real eta = 0.0;
    Real lazy_frequency = 0.0;   // fraction of non-absorbing states deferring
    int control_count = 0;       // non-absorbing states taking control
    Real score = 0.0;            // penalty-free start value of the solved policy
    Real visit_lazy_frequency = 0.0;  // discounted-visitation-weighted variant
};

struct SweepResult {
    std::vector<SweepRow> rows;
    int n_states = 0;
    int n_decision_states = 0;  // non-absorbing
};

/// Solves the lazy-MDP at every grid point (ascending grid required) and
/// records deferral statistics plus the base-MDP value of the projected
/// optimal policy. Solver failures are rethrown annotated with the eta that
/// caused them.
SweepResult frequency_sweep(const TabularMDP& base,
                            const StochasticPolicy& default_policy,
                            const std::vector<Real>& eta_grid,
                            Real tol = kDefaultTol);

/// CSV with header eta,lazy_frequency,control_count,score and 12 significant
/// digits; set include_visit_column for the visitation-weighted extra column.
std::string write_sweep_csv(const SweepResult& result, bool include_visit_column = false);

}  // namespace lazymdp
