#include "lazymdp/lazy_transform.hpp"

#include <cmath>
#include <sstream>

namespace lazymdp {

ValidationReport validate(const LazyMDPSpec& spec) {
    ValidationReport report = validate(spec.base);
    if (spec.default_policy.n_states != spec.base.n_states ||
        spec.default_policy.n_actions != spec.base.n_actions) {
        report.errors.push_back("default_policy dimensions do not match the base MDP");
    } else {
        ValidationReport pol = validate(spec.default_policy);
        for (auto& e : pol.errors) report.errors.push_back("default_policy: " + e);
    }
    if (spec.eta < 0.0) {
        std::ostringstream msg;
        msg << "eta = " << spec.eta << " must be nonnegative";
        report.errors.push_back(msg.str());
    }
    return report;
}

TabularMDP build_augmented(const LazyMDPSpec& spec) {
    ValidationReport report = validate(spec);
    if (!report.ok())
        throw std::invalid_argument("build_augmented: invalid spec: " + report.summary());

    const TabularMDP& base = spec.base;
    const int S = base.n_states;
    const int A = base.n_actions;
    const int lazy = A;
    TabularMDP aug(S, A + 1, base.gamma);
    aug.initial_dist = base.initial_dist;
    aug.absorbing = base.absorbing;

    for (int s = 0; s < S; ++s) {
        const bool abs_state = base.is_absorbing(s);
        for (int a = 0; a < A; ++a) {
            aug.r(s, a) = abs_state ? 0.0 : base.r(s, a) - spec.eta;
            const Real* p = base.transition_row(s, a);
            for (int t = 0; t < S; ++t) aug.p(s, a, t) = p[t];
        }
        Real mixed_reward = 0.0;
        for (int a = 0; a < A; ++a) {
            Real w = spec.default_policy(s, a);
            if (w == 0.0) continue;
            mixed_reward += w * base.r(s, a);
            const Real* p = base.transition_row(s, a);
            for (int t = 0; t < S; ++t) aug.p(s, lazy, t) += w * p[t];
        }
        aug.r(s, lazy) = abs_state ? 0.0 : mixed_reward;
        if (abs_state) {
            // Mixture of exact self-loops is an exact self-loop; rewrite to
            // keep the row free of accumulated rounding.
            for (int t = 0; t < S; ++t) aug.p(s, lazy, t) = (t == s) ? 1.0 : 0.0;
        }
    }
    return aug;
}

StochasticPolicy project_policy(const StochasticPolicy& pi_plus,
                                const StochasticPolicy& default_policy) {
    const int S = default_policy.n_states;
    const int A = default_policy.n_actions;
    if (pi_plus.n_states != S || pi_plus.n_actions != A + 1)
        throw std::invalid_argument("project_policy: augmented policy must have one "
                                    "more action than the default policy");
    StochasticPolicy pi(S, A);
    for (int s = 0; s < S; ++s) {
        const Real lazy_mass = pi_plus(s, A);
        for (int a = 0; a < A; ++a)
            pi(s, a) = pi_plus(s, a) + lazy_mass * default_policy(s, a);
    }
    return pi;
}

StochasticPolicy strip_lazy(const StochasticPolicy& pi_plus) {
    const int S = pi_plus.n_states;
    const int A = pi_plus.n_actions - 1;
    if (A < 1) throw std::invalid_argument("strip_lazy: policy has no real actions");
    StochasticPolicy pi(S, A);
    for (int s = 0; s < S; ++s) {
        const Real keep = 1.0 - pi_plus(s, A);
        if (keep <= 0.0) {
            std::ostringstream msg;
            msg << "strip_lazy: row for state " << s
                << " is fully lazy; the stripped policy is undefined there";
            throw std::domain_error(msg.str());
        }
        for (int a = 0; a < A; ++a) pi(s, a) = pi_plus(s, a) / keep;
    }
    return pi;
}

ValueTable cost_eval(const LazyMDPSpec& spec, const StochasticPolicy& pi_plus,
                     Real tol, long max_iters) {
    const TabularMDP& base = spec.base;
    const int S = base.n_states;
    if (pi_plus.n_states != S || pi_plus.n_actions != base.n_actions + 1)
        throw std::invalid_argument("cost_eval: augmented policy dimensions mismatch");
    StochasticPolicy projected = project_policy(pi_plus, spec.default_policy);
    auto chain = detail::induce_chain(base, projected);

    std::vector<Real> source(S, 0.0);
    for (int s = 0; s < S; ++s) {
        if (base.is_absorbing(s)) continue;  // no penalty once absorbed
        source[s] = -spec.eta * (1.0 - pi_plus(s, base.n_actions));
    }

    ValueTable cost(S, 0.0);
    ValueTable next(S, 0.0);
    Real residual = 0.0;
    for (long iter = 0; iter < max_iters; ++iter) {
        residual = 0.0;
        for (int s = 0; s < S; ++s) {
            Real acc = 0.0;
            for (std::size_t k = chain.offsets[s]; k < chain.offsets[s + 1]; ++k)
                acc += chain.prob[k] * cost[chain.next[k]];
            Real value = source[s] + base.gamma * acc;
            Real d = std::abs(value - cost[s]);
            if (d > residual) residual = d;
            next[s] = value;
        }
        cost.swap(next);
        if (residual < tol) return cost;
    }
    throw ConvergenceError("cost_eval did not converge", residual, max_iters);
}

ValueDecomposition decompose_value(const LazyMDPSpec& spec,
                                   const StochasticPolicy& pi_plus,
                                   Real tol, long max_iters) {
    ValueDecomposition out;
    StochasticPolicy projected = project_policy(pi_plus, spec.default_policy);
    out.base = policy_eval_v(spec.base, projected, tol, max_iters);
    out.cost = cost_eval(spec, pi_plus, tol, max_iters);
    out.augmented.resize(out.base.size());
    for (std::size_t s = 0; s < out.base.size(); ++s)
        out.augmented[s] = out.base[s] + out.cost[s];
    return out;
}

QTable q_control(const LazyMDPSpec& spec, const StochasticPolicy& pi_plus,
                 Real tol, long max_iters) {
    const TabularMDP& base = spec.base;
    ValueDecomposition dec = decompose_value(spec, pi_plus, tol, max_iters);
    QTable q(base.n_states, base.n_actions);
    auto succ = detail::build_successors(base);
    std::size_t row = 0;
    for (int s = 0; s < base.n_states; ++s) {
        for (int a = 0; a < base.n_actions; ++a, ++row) {
            Real acc = 0.0;
            for (std::size_t k = succ.offsets[row]; k < succ.offsets[row + 1]; ++k)
                acc += succ.prob[k] * dec.augmented[succ.next[k]];
            q(s, a) = base.r(s, a) - spec.eta + base.gamma * acc;
        }
    }
    return q;
}

QTable augment_q(const QTable& q_control_values,
                 const StochasticPolicy& default_policy, Real eta) {
    const int S = q_control_values.n_states;
    const int A = q_control_values.n_actions;
    if (default_policy.n_states != S || default_policy.n_actions != A)
        throw std::invalid_argument("augment_q: default policy dimensions mismatch");
    QTable q_plus(S, A + 1);
    for (int s = 0; s < S; ++s) {
        Real expectation = 0.0;
        const Real* qr = q_control_values.row(s);
        for (int a = 0; a < A; ++a) {
            q_plus(s, a) = qr[a];
            expectation += default_policy(s, a) * qr[a];
        }
        q_plus(s, A) = expectation + eta;
    }
    return q_plus;
}

LazyGapMap lazy_gap(const QTable& q, const StochasticPolicy& default_policy) {
    const int S = q.n_states;
    const int A = q.n_actions;
    if (default_policy.n_states != S || default_policy.n_actions != A)
        throw std::invalid_argument("lazy_gap: default policy dimensions mismatch");
    LazyGapMap gaps(S, 0.0);
    for (int s = 0; s < S; ++s) {
        const Real* qr = q.row(s);
        Real best = qr[0];
        Real expectation = 0.0;
        for (int a = 0; a < A; ++a) {
            if (qr[a] > best) best = qr[a];
            expectation += default_policy(s, a) * qr[a];
        }
        gaps[s] = best - expectation;
    }
    return gaps;
}

}  // namespace lazymdp
