#pragma once

#include "lazymdp/gridworld.hpp"
#include "lazymdp/lazy_solver.hpp"

#include <string>

namespace lazymdp {

/// Per-state importance values under a named measure.
struct ImportanceMap {
    std::string name;
    ValueTable values;
};

/// Best minus second-best action value per state; zero when the top value is
/// tied (and for single-action spaces, where the measure is vacuous).
ImportanceMap action_gap(const QTable& q);

/// Best minus worst action value per state. Dominates action_gap pointwise.
ImportanceMap importance_advice(const QTable& q);

/// The optimal lazy-gap of the solved lazy-MDP as an importance measure.
ImportanceMap lazy_gap_importance(const LazyMDPSpec& spec, Real tol = kDefaultTol);

/// CSV with header state,row,col,has_key,door_open,value.
std::string write_importance_csv(const CompiledGrid& grid, const ImportanceMap& map);

}  // namespace lazymdp
