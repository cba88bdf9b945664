#pragma once

#include "lazymdp/tabular_mdp.hpp"
#include "lazymdp/types.hpp"

namespace lazymdp {

/// Base MDP plus the deferral machinery: a default policy executed when the
/// agent picks the lazy action, and a penalty charged for every non-lazy
/// action. The lazy action always sits at the last index of the augmented
/// action space.
struct LazyMDPSpec {
    TabularMDP base;
    StochasticPolicy default_policy;  // over the base action space
    Real eta = 0.0;

    int lazy_action() const { return base.n_actions; }
    int n_augmented_actions() const { return base.n_actions + 1; }
};

ValidationReport validate(const LazyMDPSpec& spec);

/// Builds the augmented MDP: one extra action whose reward and dynamics are
/// the default-policy mixture, and a -eta reward shift on every real action.
/// Absorbing rows keep zero reward for all actions so the result is itself a
/// valid MDP under the absorbing-state contract.
TabularMDP build_augmented(const LazyMDPSpec& spec);

/// Marginalizes the lazy action through the default policy:
/// pi(a|s) = pi_plus(a|s) + pi_plus(lazy|s) * default(a|s).
/// The result has the same dynamics in the base MDP as pi_plus has in the
/// augmented one.
StochasticPolicy project_policy(const StochasticPolicy& pi_plus,
                                const StochasticPolicy& default_policy);

/// Renormalizes pi_plus over the real actions only. Throws for any state
/// whose row is fully lazy (no mass left to renormalize), naming the state.
StochasticPolicy strip_lazy(const StochasticPolicy& pi_plus);

/// Expected discounted penalty stream of pi_plus. Satisfies
/// C(s) = -eta (1 - pi_plus(lazy|s)) + gamma E[C(s')] at non-absorbing
/// states; absorbing states carry no penalty source, matching the augmented
/// MDP's zero-reward absorbing rows.
ValueTable cost_eval(const LazyMDPSpec& spec, const StochasticPolicy& pi_plus,
                     Real tol = kDefaultTol, long max_iters = kDefaultMaxIters);

/// Value of pi_plus in the augmented MDP split into its base-MDP part and the
/// penalty part: augmented = base + cost.
struct ValueDecomposition {
    ValueTable augmented;  // value of pi_plus in the lazy-MDP
    ValueTable base;       // value of the projected policy in the base MDP
    ValueTable cost;       // expected discounted penalties
};

ValueDecomposition decompose_value(const LazyMDPSpec& spec,
                                   const StochasticPolicy& pi_plus,
                                   Real tol = kDefaultTol,
                                   long max_iters = kDefaultMaxIters);

/// Action-value, in the lazy-MDP, of taking a concrete non-lazy action now:
/// q(s,a) = r(s,a) - eta + gamma E_{s'}[V_aug(s')], applied literally at
/// every state (so absorbing rows evaluate to -eta).
QTable q_control(const LazyMDPSpec& spec, const StochasticPolicy& pi_plus,
                 Real tol = kDefaultTol, long max_iters = kDefaultMaxIters);

/// Reconstructs the full augmented-space Q from the control values: real
/// actions copy through, the lazy column is the default-policy expectation
/// plus eta (the penalty the lazy action avoids).
QTable augment_q(const QTable& q_control_values,
                 const StochasticPolicy& default_policy, Real eta);

/// Per-state gap between the best action value and the default-policy
/// expectation: G(s) = max_a q(s,a) - E_default[q(s,.)]. Nonnegative by
/// construction.
LazyGapMap lazy_gap(const QTable& q, const StochasticPolicy& default_policy);

}  // namespace lazymdp
