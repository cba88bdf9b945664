#include "lazymdp/tabular_mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lazymdp {

namespace {
constexpr Real kStochasticTol = 1e-12;
}

Real TabularMDP::reward_min() const {
    Real m = 0.0;
    if (!rewards.empty()) m = *std::min_element(rewards.begin(), rewards.end());
    return m;
}

Real TabularMDP::reward_max() const {
    Real m = 0.0;
    if (!rewards.empty()) m = *std::max_element(rewards.begin(), rewards.end());
    return m;
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream out;
    out << errors.size() << " violation(s):";
    for (const auto& e : errors) out << "\n  - " << e;
    return out.str();
}

ValidationReport validate(const TabularMDP& mdp) {
    ValidationReport report;
    auto fail = [&report](const std::string& msg) { report.errors.push_back(msg); };

    if (mdp.n_states <= 0) fail("n_states must be positive");
    if (mdp.n_actions <= 0) fail("n_actions must be positive");
    if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0)) {
        std::ostringstream msg;
        msg << "gamma = " << mdp.gamma << " outside [0,1)";
        fail(msg.str());
    }
    const std::size_t S = static_cast<std::size_t>(std::max(mdp.n_states, 0));
    const std::size_t A = static_cast<std::size_t>(std::max(mdp.n_actions, 0));
    if (mdp.transitions.size() != S * A * S) fail("transitions table has wrong size");
    if (mdp.rewards.size() != S * A) fail("rewards table has wrong size");
    if (mdp.initial_dist.size() != S) fail("initial_dist has wrong size");
    if (mdp.absorbing.size() != S) fail("absorbing mask has wrong size");
    if (!report.ok()) return report;  // index checks below need consistent shapes

    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            Real sum = 0.0;
            for (int t = 0; t < mdp.n_states; ++t) {
                Real p = mdp.p(s, a, t);
                if (p < 0.0) {
                    std::ostringstream msg;
                    msg << "negative transition probability at (s=" << s << ",a=" << a
                        << ",s'=" << t << "): " << p;
                    fail(msg.str());
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > kStochasticTol) {
                std::ostringstream msg;
                msg << "transition row (s=" << s << ",a=" << a << ") sums to " << sum;
                fail(msg.str());
            }
        }
    }

    Real init_sum = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.initial_dist[s] < 0.0) {
            std::ostringstream msg;
            msg << "negative initial probability at state " << s;
            fail(msg.str());
        }
        init_sum += mdp.initial_dist[s];
    }
    if (std::abs(init_sum - 1.0) > kStochasticTol) {
        std::ostringstream msg;
        msg << "initial_dist sums to " << init_sum;
        fail(msg.str());
    }

    for (int s = 0; s < mdp.n_states; ++s) {
        if (!mdp.is_absorbing(s)) continue;
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (std::abs(mdp.p(s, a, s) - 1.0) > kStochasticTol) {
                std::ostringstream msg;
                msg << "absorbing state " << s << ": transitions(s,a=" << a
                    << ") is not a self-loop point mass";
                fail(msg.str());
            }
            if (mdp.r(s, a) != 0.0) {
                std::ostringstream msg;
                msg << "absorbing state " << s << ": rewards(s,a=" << a
                    << ") = " << mdp.r(s, a) << " (expected 0)";
                fail(msg.str());
            }
        }
    }
    return report;
}

ValidationReport validate(const StochasticPolicy& pi) {
    ValidationReport report;
    for (int s = 0; s < pi.n_states; ++s) {
        Real sum = 0.0;
        for (int a = 0; a < pi.n_actions; ++a) {
            Real p = pi(s, a);
            if (p < 0.0) {
                std::ostringstream msg;
                msg << "negative probability at (s=" << s << ",a=" << a << ")";
                report.errors.push_back(msg.str());
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kStochasticTol) {
            std::ostringstream msg;
            msg << "policy row " << s << " sums to " << sum;
            report.errors.push_back(msg.str());
        }
    }
    return report;
}

namespace detail {

SuccessorTable build_successors(const TabularMDP& mdp) {
    SuccessorTable table;
    const std::size_t rows = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions;
    table.offsets.resize(rows + 1, 0);
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < mdp.transitions.size(); ++i)
        if (mdp.transitions[i] != 0.0) ++nnz;
    table.next.reserve(nnz);
    table.prob.reserve(nnz);
    std::size_t row = 0;
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a, ++row) {
            const Real* p = mdp.transition_row(s, a);
            for (int t = 0; t < mdp.n_states; ++t) {
                if (p[t] != 0.0) {
                    table.next.push_back(t);
                    table.prob.push_back(p[t]);
                }
            }
            table.offsets[row + 1] = table.next.size();
        }
    }
    return table;
}

InducedChain induce_chain(const TabularMDP& mdp, const StochasticPolicy& pi) {
    if (pi.n_states != mdp.n_states || pi.n_actions != mdp.n_actions)
        throw std::invalid_argument("policy dimensions do not match the MDP");
    InducedChain chain;
    chain.offsets.resize(mdp.n_states + 1, 0);
    chain.reward.resize(mdp.n_states, 0.0);
    std::vector<Real> buffer(mdp.n_states, 0.0);
    std::vector<int> touched;
    touched.reserve(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        touched.clear();
        Real r_pi = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            Real w = pi(s, a);
            if (w == 0.0) continue;
            r_pi += w * mdp.r(s, a);
            const Real* p = mdp.transition_row(s, a);
            for (int t = 0; t < mdp.n_states; ++t) {
                if (p[t] == 0.0) continue;
                if (buffer[t] == 0.0) touched.push_back(t);
                buffer[t] += w * p[t];
            }
        }
        chain.reward[s] = r_pi;
        std::sort(touched.begin(), touched.end());
        for (int t : touched) {
            chain.next.push_back(t);
            chain.prob.push_back(buffer[t]);
            buffer[t] = 0.0;
        }
        chain.offsets[s + 1] = chain.next.size();
    }
    return chain;
}

}  // namespace detail

namespace {

/// Iterates V <- c + gamma P V until successive sweeps differ by less than
/// tol; the contraction then bounds the Bellman residual of the result by
/// gamma * tol.
ValueTable solve_linear_fixed_point(const detail::InducedChain& chain,
                                    const std::vector<Real>& source, Real gamma,
                                    Real tol, long max_iters, const char* label) {
    const int n = static_cast<int>(source.size());
    ValueTable v(n, 0.0);
    ValueTable v_next(n, 0.0);
    Real residual = 0.0;
    for (long iter = 0; iter < max_iters; ++iter) {
        residual = 0.0;
        for (int s = 0; s < n; ++s) {
            Real acc = 0.0;
            for (std::size_t k = chain.offsets[s]; k < chain.offsets[s + 1]; ++k)
                acc += chain.prob[k] * v[chain.next[k]];
            Real value = source[s] + gamma * acc;
            Real d = std::abs(value - v[s]);
            if (d > residual) residual = d;
            v_next[s] = value;
        }
        v.swap(v_next);
        if (residual < tol) return v;
    }
    throw ConvergenceError(std::string(label) + " did not converge", residual, max_iters);
}

}  // namespace

ValueTable policy_eval_v(const TabularMDP& mdp, const StochasticPolicy& pi,
                         Real tol, long max_iters) {
    auto chain = detail::induce_chain(mdp, pi);
    return solve_linear_fixed_point(chain, chain.reward, mdp.gamma, tol, max_iters,
                                    "policy_eval_v");
}

ValueTable policy_eval_v_direct(const TabularMDP& mdp, const StochasticPolicy& pi) {
    auto chain = detail::induce_chain(mdp, pi);
    const int n = mdp.n_states;
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
    for (int s = 0; s < n; ++s)
        for (std::size_t k = chain.offsets[s]; k < chain.offsets[s + 1]; ++k)
            system(s, chain.next[k]) -= mdp.gamma * chain.prob[k];
    Eigen::VectorXd rhs(n);
    for (int s = 0; s < n; ++s) rhs(s) = chain.reward[s];
    Eigen::VectorXd sol = system.partialPivLu().solve(rhs);
    ValueTable v(n);
    for (int s = 0; s < n; ++s) v[s] = sol(s);
    return v;
}

QTable policy_eval_q(const TabularMDP& mdp, const StochasticPolicy& pi,
                     Real tol, long max_iters) {
    ValueTable v = policy_eval_v(mdp, pi, tol, max_iters);
    QTable q(mdp.n_states, mdp.n_actions);
    auto succ = detail::build_successors(mdp);
    std::size_t row = 0;
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a, ++row) {
            Real acc = 0.0;
            for (std::size_t k = succ.offsets[row]; k < succ.offsets[row + 1]; ++k)
                acc += succ.prob[k] * v[succ.next[k]];
            q(s, a) = mdp.r(s, a) + mdp.gamma * acc;
        }
    }
    return q;
}

ZTable z_eval(const TabularMDP& mdp, const StochasticPolicy& pi,
              Real tol, long max_iters) {
    if (pi.n_states != mdp.n_states || pi.n_actions != mdp.n_actions)
        throw std::invalid_argument("policy dimensions do not match the MDP");
    const int S = mdp.n_states;
    const int A = mdp.n_actions;
    auto succ = detail::build_successors(mdp);
    ZTable z(S, A);
    ZTable z_next(S, A);
    ValueTable z_under_pi(S, 0.0);
    Real residual = 0.0;
    for (long iter = 0; iter < max_iters; ++iter) {
        for (int s = 0; s < S; ++s) {
            Real acc = 0.0;
            const Real* zr = z.row(s);
            const Real* pr = pi.row(s);
            for (int a = 0; a < A; ++a) acc += pr[a] * zr[a];
            z_under_pi[s] = acc;
        }
        residual = 0.0;
        std::size_t row = 0;
        for (int s = 0; s < S; ++s) {
            const Real unit = mdp.is_absorbing(s) ? 0.0 : 1.0;
            for (int a = 0; a < A; ++a, ++row) {
                Real acc = 0.0;
                for (std::size_t k = succ.offsets[row]; k < succ.offsets[row + 1]; ++k)
                    acc += succ.prob[k] * z_under_pi[succ.next[k]];
                Real value = unit + mdp.gamma * acc;
                Real d = std::abs(value - z(s, a));
                if (d > residual) residual = d;
                z_next(s, a) = value;
            }
        }
        z.data.swap(z_next.data);
        if (residual < tol) return z;
    }
    throw ConvergenceError("z_eval did not converge", residual, max_iters);
}

QTable value_iteration(const TabularMDP& mdp, Real tol, long max_iters) {
    const int S = mdp.n_states;
    const int A = mdp.n_actions;
    auto succ = detail::build_successors(mdp);
    QTable q(S, A);
    QTable q_next(S, A);
    ValueTable v(S, 0.0);
    Real residual = 0.0;
    for (long iter = 0; iter < max_iters; ++iter) {
        for (int s = 0; s < S; ++s) {
            const Real* qr = q.row(s);
            Real best = qr[0];
            for (int a = 1; a < A; ++a)
                if (qr[a] > best) best = qr[a];
            v[s] = best;
        }
        residual = 0.0;
        std::size_t row = 0;
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a, ++row) {
                Real acc = 0.0;
                for (std::size_t k = succ.offsets[row]; k < succ.offsets[row + 1]; ++k)
                    acc += succ.prob[k] * v[succ.next[k]];
                Real value = mdp.r(s, a) + mdp.gamma * acc;
                Real d = std::abs(value - q(s, a));
                if (d > residual) residual = d;
                q_next(s, a) = value;
            }
        }
        q.data.swap(q_next.data);
        if (residual < tol) return q;
    }
    throw ConvergenceError("value_iteration did not converge", residual, max_iters);
}

StochasticPolicy greedy_from_q(const QTable& q) {
    StochasticPolicy pi(q.n_states, q.n_actions);
    for (int s = 0; s < q.n_states; ++s) {
        const Real* qr = q.row(s);
        Real best = qr[0];
        for (int a = 1; a < q.n_actions; ++a)
            if (qr[a] > best) best = qr[a];
        int ties = 0;
        for (int a = 0; a < q.n_actions; ++a)
            if (qr[a] >= best - kTieTol) ++ties;
        const Real mass = 1.0 / ties;
        for (int a = 0; a < q.n_actions; ++a)
            if (qr[a] >= best - kTieTol) pi(s, a) = mass;
    }
    return pi;
}

std::vector<int> greedy_actions(const QTable& q) {
    std::vector<int> actions(q.n_states, 0);
    for (int s = 0; s < q.n_states; ++s) {
        const Real* qr = q.row(s);
        Real best = qr[0];
        for (int a = 1; a < q.n_actions; ++a)
            if (qr[a] > best) best = qr[a];
        for (int a = 0; a < q.n_actions; ++a) {
            if (qr[a] >= best - kTieTol) {
                actions[s] = a;
                break;
            }
        }
    }
    return actions;
}

StepResult sample_step(const TabularMDP& mdp, int s, int a, std::mt19937_64& rng) {
    if (s < 0 || s >= mdp.n_states || a < 0 || a >= mdp.n_actions)
        throw std::out_of_range("sample_step: state or action index out of range");
    const Real* p = mdp.transition_row(s, a);
    int support = -1;
    int count = 0;
    for (int t = 0; t < mdp.n_states; ++t) {
        if (p[t] != 0.0) {
            support = t;
            if (++count > 1) break;
        }
    }
    int next = support;
    if (count > 1) {
        Real u = uniform01(rng);
        Real cum = 0.0;
        next = mdp.n_states - 1;
        for (int t = 0; t < mdp.n_states; ++t) {
            cum += p[t];
            if (u < cum) {
                next = t;
                break;
            }
        }
    }
    return {next, mdp.r(s, a), mdp.is_absorbing(next)};
}

}  // namespace lazymdp
