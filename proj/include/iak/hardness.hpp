#pragma once

#include "iak/mdp.hpp"
#include "iak/neighbors.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iak {

struct Literal {
    int var = 0; // 0-based
    bool positive = true;
};

struct CnfFormula {
    int n_vars = 0;
    std::vector<std::array<Literal, 3>> clauses;

    void validate() const;
    bool satisfied_by(const std::vector<bool>& assignment) const;
    /// Truth-table satisfiability for small formulas (n_vars <= 20).
    std::optional<std::vector<bool>> find_satisfying() const;
};

/// Parses DIMACS CNF; every clause must carry exactly three literals.
CnfFormula read_dimacs(const std::string& text);
CnfFormula read_dimacs_file(const std::string& path);

struct ReductionParams {
    double gamma = 0.5;
    double epsilon = 0.1;
    /// Stand-in for the -inf reward; must dominate every achievable return
    /// difference: B >= 10 (1 + eps m / ((1-gamma) gamma^3)) / (1-gamma).
    double neg_inf_proxy = 0.0; // 0 picks the floor automatically

    double floor(int m) const;
    double resolved_proxy(int m) const;
};

/// State labeling of the encoded MDP.
struct ReductionLabels {
    int s_initial = 0;
    std::vector<int> s_clause;
    std::vector<int> s_pos_literal;
    std::vector<int> s_neg_literal;
    std::vector<int> s_value;
    int s_final = 0;
    std::string to_json() const;
};

struct ReductionInstance {
    TwoAgentMDP mdp;
    TabularPolicy pi_target; // always the first victim action
    ReductionLabels labels;
    CnfFormula formula;
    ReductionParams params;
};

/// Two-agent MDP whose forcing problem is feasible iff the formula is satisfiable.
/// States: initial, one per clause, one per literal polarity, one per variable
/// value, one absorbing final state (m + 3n + 2 in total). |A1| = 3, |A2| = 2.
ReductionInstance encode_3sat(const CnfFormula& f, const ReductionParams& params);

/// Deterministic witness adversary from an assignment: selects the first
/// satisfying literal in every clause state and signals each variable's value.
TabularPolicy assignment_to_policy(const ReductionInstance& inst,
                                   const std::vector<bool>& assignment);

/// Reads variable values back from the mixed rewards at value states.
std::vector<bool> decode_assignment(const ReductionInstance& inst, const TabularPolicy& pi_adv);

/// Exhaustive feasibility search over per-state adversary simplices discretized at
/// grid_step, deterministic vertices always included. States where the adversary
/// action moves neither transitions nor rewards are collapsed to one choice.
/// budget caps the number of candidate policies; exceeding it throws.
std::optional<TabularPolicy> brute_force_feasible(const TwoAgentMDP& mdp,
                                                  const TabularPolicy& pi_target, double epsilon,
                                                  double grid_step, std::int64_t budget = 4000000);

/// Random stochastic probing with a seeded generator; returns the first feasible
/// policy found, if any.
std::optional<TabularPolicy> random_probe_feasible(const TwoAgentMDP& mdp,
                                                   const TabularPolicy& pi_target, double epsilon,
                                                   int n_probes, std::uint64_t seed);

} // namespace iak
