#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lazymdp {

using Real = double;

/// Default sup-norm tolerance for fixed-point solvers.
inline constexpr Real kDefaultTol = 1e-10;
/// Default iteration cap for fixed-point solvers.
inline constexpr long kDefaultMaxIters = 100000;
/// Absolute tolerance used to detect ties in argmax sets and in
/// gap-versus-penalty comparisons.
inline constexpr Real kTieTol = 1e-9;

/// State-indexed real table (value functions, gaps, occupancies).
using ValueTable = std::vector<Real>;

/// Per-state lazy-gap values.
using LazyGapMap = std::vector<Real>;

/// (state, action)-indexed real table, row-major.
struct QTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<Real> data;

    QTable() = default;
    QTable(int states, int actions)
        : n_states(states), n_actions(actions),
          data(static_cast<std::size_t>(states) * actions, 0.0) {}

    Real& operator()(int s, int a) {
        return data[static_cast<std::size_t>(s) * n_actions + a];
    }
    Real operator()(int s, int a) const {
        return data[static_cast<std::size_t>(s) * n_actions + a];
    }
    const Real* row(int s) const {
        return data.data() + static_cast<std::size_t>(s) * n_actions;
    }
    Real* row(int s) {
        return data.data() + static_cast<std::size_t>(s) * n_actions;
    }
};

/// Expected discounted step counts, same layout as a QTable.
using ZTable = QTable;

/// Row-stochastic state -> action-distribution table.
struct StochasticPolicy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<Real> probs;

    StochasticPolicy() = default;
    StochasticPolicy(int states, int actions)
        : n_states(states), n_actions(actions),
          probs(static_cast<std::size_t>(states) * actions, 0.0) {}

    Real& operator()(int s, int a) {
        return probs[static_cast<std::size_t>(s) * n_actions + a];
    }
    Real operator()(int s, int a) const {
        return probs[static_cast<std::size_t>(s) * n_actions + a];
    }
    const Real* row(int s) const {
        return probs.data() + static_cast<std::size_t>(s) * n_actions;
    }
    Real* row(int s) {
        return probs.data() + static_cast<std::size_t>(s) * n_actions;
    }
};

/// Thrown when a fixed-point solver fails to reach its tolerance within the
/// iteration cap. Carries the final residual so callers can report it.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& what, Real residual, long iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    Real residual() const { return residual_; }
    long iterations() const { return iterations_; }

  private:
    Real residual_;
    long iterations_;
};

inline Real sup_norm_diff(const std::vector<Real>& a, const std::vector<Real>& b) {
    Real m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Real d = a[i] - b[i];
        if (d < 0) d = -d;
        if (d > m) m = d;
    }
    return m;
}

}  // namespace lazymdp
