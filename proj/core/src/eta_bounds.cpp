#include "lazymdp/eta_bounds.hpp"

#include "lazymdp/text.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lazymdp {

namespace {

constexpr Real kDenominatorFloor = -1.0 + 1e-12;

/// Shared Thm-4 style computation: per-(s,a) advantage over the default
/// expectation divided by one plus the step-count shift, maxed over actions
/// and minimized over non-absorbing states.
void fill_min_threshold(EtaBounds& bounds, const QTable& q,
                        const StochasticPolicy& pi_star,
                        const StochasticPolicy& default_policy,
                        const std::vector<std::uint8_t>& absorbing,
                        const ZTable& z) {
    const int S = q.n_states;
    const int A = q.n_actions;
    bounds.advantage = QTable(S, A);
    bounds.step_shift = QTable(S, A);
    bounds.excluded.assign(static_cast<std::size_t>(S) * A, 0);
    bounds.state_threshold.assign(S, 0.0);

    Real minimax = std::numeric_limits<Real>::infinity();
    bool any_state_counted = false;
    for (int s = 0; s < S; ++s) {
        Real q_default = 0.0;
        Real z_default = 0.0;
        Real z_opt = 0.0;
        for (int a = 0; a < A; ++a) {
            q_default += default_policy(s, a) * q(s, a);
            z_default += default_policy(s, a) * z(s, a);
            z_opt += pi_star(s, a) * z(s, a);
        }
        const Real shift = z_opt - z_default;
        Real best_ratio = -std::numeric_limits<Real>::infinity();
        bool any_pair = false;
        for (int a = 0; a < A; ++a) {
            bounds.advantage(s, a) = q(s, a) - q_default;
            bounds.step_shift(s, a) = shift;
            if (shift <= kDenominatorFloor) {
                bounds.excluded[static_cast<std::size_t>(s) * A + a] = 1;
                continue;
            }
            any_pair = true;
            Real ratio = bounds.advantage(s, a) / (1.0 + shift);
            if (ratio > best_ratio) best_ratio = ratio;
        }
        bounds.state_threshold[s] = any_pair ? best_ratio : 0.0;
        if (absorbing[s]) continue;
        if (!any_pair) continue;  // deferring here never beats the optimum
        any_state_counted = true;
        if (best_ratio < minimax) minimax = best_ratio;
    }
    if (!any_state_counted) {
        bounds.all_pairs_excluded = true;
        bounds.eta_min_raw = 0.0;
    } else {
        bounds.eta_min_raw = minimax;
    }
}

Real max_gap_over_decisions(const LazyGapMap& gaps,
                            const std::vector<std::uint8_t>& absorbing) {
    Real best = 0.0;
    for (std::size_t s = 0; s < gaps.size(); ++s) {
        if (absorbing[s]) continue;
        if (gaps[s] > best) best = gaps[s];
    }
    return best;
}

StochasticPolicy one_hot_policy(const std::vector<int>& actions, int n_actions) {
    StochasticPolicy pi(static_cast<int>(actions.size()), n_actions);
    for (int s = 0; s < pi.n_states; ++s) pi(s, actions[s]) = 1.0;
    return pi;
}

}  // namespace

Real eta_max(const TabularMDP& base, const StochasticPolicy& default_policy, Real tol) {
    QTable q_default = policy_eval_q(base, default_policy, tol);
    LazyGapMap gaps = lazy_gap(q_default, default_policy);
    return max_gap_over_decisions(gaps, base.absorbing);
}

Real eta_min(const TabularMDP& base, const StochasticPolicy& default_policy, Real tol) {
    QTable q_star = value_iteration(base, tol);
    StochasticPolicy pi_star = one_hot_policy(greedy_actions(q_star), base.n_actions);
    ZTable z = z_eval(base, pi_star, tol);
    EtaBounds bounds;
    fill_min_threshold(bounds, q_star, pi_star, default_policy, base.absorbing, z);
    return std::max(bounds.eta_min_raw, 0.0);
}

EtaBounds compute_eta_bounds(const TabularMDP& base,
                             const StochasticPolicy& default_policy, Real tol) {
    EtaBounds bounds;
    QTable q_default = policy_eval_q(base, default_policy, tol);
    bounds.default_gap = lazy_gap(q_default, default_policy);
    bounds.eta_max = max_gap_over_decisions(bounds.default_gap, base.absorbing);

    QTable q_star = value_iteration(base, tol);
    StochasticPolicy pi_star = one_hot_policy(greedy_actions(q_star), base.n_actions);
    ZTable z = z_eval(base, pi_star, tol);
    fill_min_threshold(bounds, q_star, pi_star, default_policy, base.absorbing, z);
    bounds.eta_min = std::max(bounds.eta_min_raw, 0.0);
    return bounds;
}

EtaBounds estimate_bounds_from_tables(const QTable& q_star_est, const ZTable& z_est,
                                      const StochasticPolicy& pi_star_est,
                                      const QTable& q_default_est,
                                      const StochasticPolicy& default_policy,
                                      const std::vector<std::uint8_t>& absorbing) {
    if (q_star_est.n_states != default_policy.n_states ||
        q_star_est.n_actions != default_policy.n_actions ||
        z_est.n_states != q_star_est.n_states ||
        z_est.n_actions != q_star_est.n_actions ||
        pi_star_est.n_states != q_star_est.n_states ||
        pi_star_est.n_actions != q_star_est.n_actions ||
        q_default_est.n_states != q_star_est.n_states ||
        q_default_est.n_actions != q_star_est.n_actions ||
        absorbing.size() != static_cast<std::size_t>(q_star_est.n_states))
        throw std::invalid_argument("estimate_bounds_from_tables: dimension mismatch");

    EtaBounds bounds;
    bounds.default_gap = lazy_gap(q_default_est, default_policy);
    bounds.eta_max = max_gap_over_decisions(bounds.default_gap, absorbing);
    fill_min_threshold(bounds, q_star_est, pi_star_est, default_policy, absorbing, z_est);
    bounds.eta_min = bounds.eta_min_raw;  // unclamped on estimated tables
    return bounds;
}

SweepResult frequency_sweep(const TabularMDP& base,
                            const StochasticPolicy& default_policy,
                            const std::vector<Real>& eta_grid, Real tol) {
    if (!std::is_sorted(eta_grid.begin(), eta_grid.end()))
        throw std::invalid_argument("frequency_sweep: eta grid must be sorted ascending");

    SweepResult result;
    result.n_states = base.n_states;
    result.n_decision_states = 0;
    for (int s = 0; s < base.n_states; ++s)
        if (!base.is_absorbing(s)) ++result.n_decision_states;
    const int decisions = std::max(result.n_decision_states, 1);

    for (Real eta : eta_grid) {
        LazyMDPSpec spec{base, default_policy, eta};
        LazySolution solution;
        try {
            solution = solve_lazy(spec, tol);
        } catch (const ConvergenceError& err) {
            std::ostringstream msg;
            msg << err.what() << " at eta=" << to_decimal(eta);
            throw ConvergenceError(msg.str(), err.residual(), err.iterations());
        }

        SweepRow row;
        row.eta = eta;
        for (int s = 0; s < base.n_states; ++s)
            if (!base.is_absorbing(s) && solution.control_mask[s]) ++row.control_count;
        row.lazy_frequency = 1.0 - static_cast<Real>(row.control_count) / decisions;

        StochasticPolicy projected =
            project_policy(solution.pi_plus_star, default_policy);
        ValueTable v = policy_eval_v(base, projected, tol);
        Real score = 0.0;
        for (int s = 0; s < base.n_states; ++s) score += base.initial_dist[s] * v[s];
        row.score = score;

        // Discounted state visitation from the initial distribution,
        // restricted to decision states, as a trajectory-weighted variant.
        auto chain = detail::induce_chain(base, projected);
        ValueTable occupancy(base.n_states, 0.0);
        ValueTable next(base.n_states, 0.0);
        for (long iter = 0; iter < kDefaultMaxIters; ++iter) {
            Real residual = 0.0;
            std::fill(next.begin(), next.end(), 0.0);
            for (int s = 0; s < base.n_states; ++s) next[s] = base.initial_dist[s];
            for (int s = 0; s < base.n_states; ++s) {
                const Real mass = base.gamma * occupancy[s];
                if (mass == 0.0) continue;
                for (std::size_t k = chain.offsets[s]; k < chain.offsets[s + 1]; ++k)
                    next[chain.next[k]] += mass * chain.prob[k];
            }
            residual = sup_norm_diff(next, occupancy);
            occupancy.swap(next);
            if (residual < tol) break;
        }
        Real total = 0.0;
        Real lazy_mass = 0.0;
        for (int s = 0; s < base.n_states; ++s) {
            if (base.is_absorbing(s)) continue;
            total += occupancy[s];
            if (!solution.control_mask[s]) lazy_mass += occupancy[s];
        }
        row.visit_lazy_frequency = total > 0.0 ? lazy_mass / total : 1.0;

        result.rows.push_back(row);
    }
    return result;
}

std::string write_sweep_csv(const SweepResult& result, bool include_visit_column) {
    std::ostringstream out;
    out << "eta,lazy_frequency,control_count,score";
    if (include_visit_column) out << ",visit_lazy_frequency";
    out << "\n";
    for (const SweepRow& row : result.rows) {
        out << to_decimal(row.eta, 12) << ',' << to_decimal(row.lazy_frequency, 12)
            << ',' << row.control_count << ',' << to_decimal(row.score, 12);
        if (include_visit_column) out << ',' << to_decimal(row.visit_lazy_frequency, 12);
        out << "\n";
    }
    return out.str();
}

}  // namespace lazymdp
