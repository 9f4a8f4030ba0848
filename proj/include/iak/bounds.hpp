#pragma once

#include "iak/mdp.hpp"
#include "iak/neighbors.hpp"

#include <optional>

namespace iak {

/// True iff mu(pi_adv, pi_target)(s) > 0 for every adversary policy. Decided by
/// letting the adversary minimize its discounted visitation of s against the fixed
/// target: the state is always visited iff even the best avoidance value stays
/// strictly below zero.
bool always_visited(const TwoAgentMDP& mdp, const TabularPolicy& pi_target, int s);

/// Per-pair normalized advantage of neighbor deviations under the default policy,
/// offset by epsilon_prime and clamped at zero. Entries are zero at target actions
/// and at states that some adversary policy can avoid.
struct ChiTable {
    Matrix values; // (state x victim action)
    double epsilon_prime = 0.0;
};

ChiTable chi_table(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                   const TabularPolicy& pi_target, double epsilon_prime);

/// Cost lower bound for any forcing policy:
/// (1-gamma)/2 * ||chi_0||_inf / (||R2||_inf + gamma ||V(pi0, target)||_inf).
double lower_bound_cost(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                        const TabularPolicy& pi_target);

/// Best guaranteed neighbor gap over adversary policies, by LP over policy entries.
/// Requires transitions independent of the adversary action (checked to 1e-12);
/// the occupancies are then policy-independent and precomputable.
struct Alpha2Result {
    double alpha2_star = 0.0;
    TabularPolicy pi_star;
    Matrix per_pair_gap; // alpha2 at pi_star per (s, a2), 0 at target actions
};

Alpha2Result alpha2_star(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                         const TabularPolicy& pi_target);

struct BoundReport {
    double lower = 0.0;
    std::optional<double> upper;
    std::optional<double> alpha2;
    std::optional<TabularPolicy> pi_alpha_star;   // policy achieving alpha2*
    std::optional<TabularPolicy> witness_policy;  // beta-mixture of pi0 and pi_alpha_star
    std::optional<double> witness_cost;
    std::optional<double> witness_gap;
};

/// Feasibility certificate and cost upper bound under adversary-independent
/// transitions and ergodicity: when alpha2* >= epsilon the report carries
/// 2 ||chi_eps / (chi2* + chi_eps)||_inf |S|^(1/p) and a verified mixture witness.
BoundReport upper_bound_cost(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                             const TabularPolicy& pi_target, double epsilon, CostNorm p);

/// Per-state maximin gain of the adversary over deviating victim actions, weighted
/// by the default occupancy; epsilon is returned for unvisited states.
double alpha1_star(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                   const TabularPolicy& pi_target, int s, double epsilon);

/// Variant bound valid when transitions are independent of both agents:
/// 2 ||chi_eps / (chi1* + chi_eps)||_{p,inf} with the per-state alpha1* gains.
BoundReport upper_bound_cost_prop1(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                                   const TabularPolicy& pi_target, double epsilon, CostNorm p);

} // namespace iak
