#include "lazymdp/lazy_solver.hpp"

#include "lazymdp/text.hpp"

#include <cmath>
#include <sstream>

namespace lazymdp {

StochasticPolicy lazy_greedy(const QTable& q, const StochasticPolicy& default_policy,
                             Real eta) {
    const int S = q.n_states;
    const int A = q.n_actions;
    if (default_policy.n_states != S || default_policy.n_actions != A)
        throw std::invalid_argument("lazy_greedy: default policy dimensions mismatch");
    StochasticPolicy pi_plus(S, A + 1);
    LazyGapMap gaps = lazy_gap(q, default_policy);
    for (int s = 0; s < S; ++s) {
        if (gaps[s] > eta + kTieTol) {
            const Real* qr = q.row(s);
            Real best = qr[0];
            for (int a = 1; a < A; ++a)
                if (qr[a] > best) best = qr[a];
            int ties = 0;
            for (int a = 0; a < A; ++a)
                if (qr[a] >= best - kTieTol) ++ties;
            const Real mass = 1.0 / ties;
            for (int a = 0; a < A; ++a)
                if (qr[a] >= best - kTieTol) pi_plus(s, a) = mass;
        } else {
            pi_plus(s, A) = 1.0;
        }
    }
    return pi_plus;
}

namespace {

/// Backup value of landing in a state: the better of taking control there
/// (best real action) and deferring there (default expectation plus the
/// avoided penalty). Equal to max over the augmented actions of the
/// reconstructed Q_plus row.
inline void landing_values(const QTable& q, const StochasticPolicy& default_policy,
                           Real eta, ValueTable& out) {
    const int S = q.n_states;
    const int A = q.n_actions;
    for (int s = 0; s < S; ++s) {
        const Real* qr = q.row(s);
        const Real* dr = default_policy.row(s);
        Real best = qr[0];
        Real expectation = 0.0;
        for (int a = 0; a < A; ++a) {
            if (qr[a] > best) best = qr[a];
            expectation += dr[a] * qr[a];
        }
        const Real lazy_value = expectation + eta;
        out[s] = best > lazy_value ? best : lazy_value;
    }
}

QTable operator_step_with(const QTable& q, const LazyMDPSpec& spec,
                          const detail::SuccessorTable& succ, ValueTable& scratch,
                          QTable& out, Real* residual_out) {
    const TabularMDP& base = spec.base;
    const int S = base.n_states;
    const int A = base.n_actions;
    landing_values(q, spec.default_policy, spec.eta, scratch);
    Real residual = 0.0;
    std::size_t row = 0;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a, ++row) {
            Real acc = 0.0;
            for (std::size_t k = succ.offsets[row]; k < succ.offsets[row + 1]; ++k)
                acc += succ.prob[k] * scratch[succ.next[k]];
            Real value = base.r(s, a) - spec.eta + base.gamma * acc;
            Real d = std::abs(value - q(s, a));
            if (d > residual) residual = d;
            out(s, a) = value;
        }
    }
    if (residual_out) *residual_out = residual;
    return out;
}

}  // namespace

QTable greedy_operator_step(const QTable& q, const LazyMDPSpec& spec) {
    if (q.n_states != spec.base.n_states || q.n_actions != spec.base.n_actions)
        throw std::invalid_argument("greedy_operator_step: Q dimensions mismatch");
    auto succ = detail::build_successors(spec.base);
    ValueTable scratch(spec.base.n_states, 0.0);
    QTable out(q.n_states, q.n_actions);
    operator_step_with(q, spec, succ, scratch, out, nullptr);
    return out;
}

LazySolution solve_lazy(const LazyMDPSpec& spec, Real tol, long max_iters) {
    ValidationReport report = validate(spec);
    if (!report.ok())
        throw std::invalid_argument("solve_lazy: invalid spec: " + report.summary());

    const int S = spec.base.n_states;
    const int A = spec.base.n_actions;
    auto succ = detail::build_successors(spec.base);
    ValueTable scratch(S, 0.0);
    QTable q(S, A);
    QTable q_next(S, A);
    Real residual = 0.0;
    long iter = 0;
    bool converged = false;
    for (; iter < max_iters; ++iter) {
        operator_step_with(q, spec, succ, scratch, q_next, &residual);
        q.data.swap(q_next.data);
        if (residual < tol) {
            converged = true;
            ++iter;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("solve_lazy did not converge", residual, iter);

    LazySolution solution;
    solution.q_star = std::move(q);
    solution.pi_plus_star = lazy_greedy(solution.q_star, spec.default_policy, spec.eta);
    solution.gap_star = lazy_gap(solution.q_star, spec.default_policy);
    solution.control_mask.resize(S, 0);
    for (int s = 0; s < S; ++s)
        solution.control_mask[s] = solution.pi_plus_star(s, A) == 0.0 ? 1 : 0;
    solution.residual = residual;
    solution.iterations = iter;
    return solution;
}

QTable oracle_solve(const LazyMDPSpec& spec, Real tol, long max_iters) {
    TabularMDP augmented = build_augmented(spec);
    return value_iteration(augmented, tol, max_iters);
}

std::vector<int> control_set(const LazySolution& solution) {
    std::vector<int> states;
    for (int s = 0; s < static_cast<int>(solution.control_mask.size()); ++s)
        if (solution.control_mask[s]) states.push_back(s);
    return states;
}

std::string write_solution(const LazySolution& solution) {
    std::ostringstream out;
    const int S = solution.q_star.n_states;
    const int A = solution.q_star.n_actions;
    out << "lazymdp-solution 1\n";
    out << "n_states " << S << "\n";
    out << "n_actions " << A << "\n";
    out << "residual " << to_decimal(solution.residual) << "\n";
    out << "iterations " << solution.iterations << "\n";
    out << "q_star";
    for (Real v : solution.q_star.data) out << ' ' << to_decimal(v);
    out << "\npi_plus_star";
    for (Real v : solution.pi_plus_star.probs) out << ' ' << to_decimal(v);
    out << "\ngap_star";
    for (Real v : solution.gap_star) out << ' ' << to_decimal(v);
    out << "\ncontrol_mask";
    for (auto b : solution.control_mask) out << ' ' << int(b);
    out << "\n";
    return out.str();
}

LazySolution read_solution(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "lazymdp-solution" || version != 1)
        throw std::invalid_argument("read_solution: not a lazymdp-solution document");
    LazySolution solution;
    int S = 0, A = 0;
    std::string key;
    while (in >> key) {
        if (key == "n_states") {
            in >> S;
        } else if (key == "n_actions") {
            in >> A;
        } else if (key == "residual") {
            std::string v;
            in >> v;
            solution.residual = parse_real(v);
        } else if (key == "iterations") {
            in >> solution.iterations;
        } else if (key == "q_star") {
            solution.q_star = QTable(S, A);
            std::string v;
            for (auto& x : solution.q_star.data) { in >> v; x = parse_real(v); }
        } else if (key == "pi_plus_star") {
            solution.pi_plus_star = StochasticPolicy(S, A + 1);
            std::string v;
            for (auto& x : solution.pi_plus_star.probs) { in >> v; x = parse_real(v); }
        } else if (key == "gap_star") {
            solution.gap_star.assign(S, 0.0);
            std::string v;
            for (auto& x : solution.gap_star) { in >> v; x = parse_real(v); }
        } else if (key == "control_mask") {
            solution.control_mask.assign(S, 0);
            int b = 0;
            for (auto& x : solution.control_mask) { in >> b; x = static_cast<std::uint8_t>(b); }
        } else {
            throw std::invalid_argument("read_solution: unknown field '" + key + "'");
        }
    }
    return solution;
}

}  // namespace lazymdp
