#pragma once

#include "iak/linprog.hpp"
#include "iak/neighbors.hpp"

#include <optional>

namespace iak {

enum class CpsVariant { cps, cops, ups };

struct CpsConfig {
    double epsilon = 0.05;     // target margin the victim must concede
    double delta = 0.01;       // per-entry trust region radius
    double delta_eps = 0.1;    // margin offset: the LP rewards eps' up to eps*(1+delta_eps)
    double lambda = 20.0;      // weight of the margin term in the LP objective
    CostNorm p = CostNorm::l1;
    int max_iters = 200;
    GapMode mode = GapMode::ergodic;
    CpsVariant variant = CpsVariant::cps;
    double iota = 1.0;         // attacker influence: candidates are verified as
                               // (1-iota) pi0 + iota pi before selection

    void validate() const;
};

struct CpsRecord {
    TabularPolicy pi_adv;
    double true_gap = 0.0;
    double cost = 0.0;
    double subproblem_objective = 0.0;
};

struct CpsTrace {
    std::vector<CpsRecord> records;
    std::optional<int> best_index; // cheapest record with true_gap >= eps - slack

    bool feasible() const { return best_index.has_value(); }
    const CpsRecord& best() const { return records.at(*best_index); }
};

/// l_{1,p} deviation between two adversary policies: per-state L1 rows combined
/// by the p-norm over states (max over states for p = inf).
double attack_cost(const TabularPolicy& pi_adv, const TabularPolicy& pi_default, CostNorm p);

/// One frozen-occupancy LP: decision variables are the adversary policy entries,
/// the relaxed margin eps', a capped-margin auxiliary and the cost epigraph.
/// Constraints keep each eligible neighbor at least eps' below the target under
/// the bundle's occupancies and confine the policy to the trust region around
/// pi_current. The COPS variant drops the cost term from the objective.
LpProblem build_subproblem(const TwoAgentMDP& mdp, const TabularPolicy& pi_current,
                           const TabularPolicy& pi_default, const TabularPolicy& pi_target,
                           const OccupancyBundle& bundle, const CpsConfig& cfg);

/// Conservative policy search: iterates frozen-occupancy LPs inside a trust region
/// starting from the default policy, records the true gap and cost of every
/// iterate and selects the cheapest one that achieves the target margin.
CpsTrace run_cps(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                 const TabularPolicy& pi_target, const CpsConfig& cfg);

/// Re-runs output selection on an existing trace under a different influence
/// level: each candidate is mixed into the default policy before verification.
CpsTrace reselect_with_influence(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                                 const TabularPolicy& pi_target, const CpsTrace& trace,
                                 const CpsConfig& cfg);

} // namespace iak
