#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace iak {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerances shared across the toolkit.
namespace tol {
inline constexpr double stochastic = 1e-12;   // row-sum check for P, sigma
inline constexpr double policy_renorm = 1e-9; // rows this close to stochastic get renormalized
inline constexpr double visited = 1e-10;      // mu(s) > visited counts as visited
inline constexpr double occupancy_sum = 1e-9; // occupancy vectors sum to 1 within this
inline constexpr double gap_slack = 1e-9;     // feasibility means gap >= eps - gap_slack
inline constexpr double value_iter = 1e-12;   // sup-norm stopping rule for value iteration
inline constexpr int max_sweeps = 100000;
} // namespace tol

enum class Owner { adversary, victim };

/// Norm selector for the l_{1,p} attack cost. Only the exactly linearizable
/// cases are supported; other exponents are rejected at the parsing layer.
enum class CostNorm { l1, linf };

/// Row-stochastic policy table of one agent: probs(s, a).
struct TabularPolicy {
    Owner owner = Owner::adversary;
    Matrix probs;

    TabularPolicy() = default;
    TabularPolicy(Owner who, Matrix p) : owner(who), probs(std::move(p)) { validate(); }

    int n_states() const { return static_cast<int>(probs.rows()); }
    int n_actions() const { return static_cast<int>(probs.cols()); }

    /// Renormalizes rows within policy_renorm of stochastic and rejects anything worse.
    void validate();

    bool is_deterministic(double eps = 1e-12) const;
    /// Action of a deterministic policy in state s (largest entry).
    int action_at(int s) const;
    bool approx_equal(const TabularPolicy& other, double eps) const {
        return probs.rows() == other.probs.rows() && probs.cols() == other.probs.cols() &&
               (probs - other.probs).cwiseAbs().maxCoeff() <= eps;
    }

    static TabularPolicy uniform(Owner who, int n_states, int n_actions);
    static TabularPolicy deterministic(Owner who, int n_states, int n_actions,
                                       const std::vector<int>& actions);
    static TabularPolicy constant(Owner who, int n_states, int n_actions, int action);
};

/// Tabular two-agent MDP. Agent 1 (adversary) and agent 2 (victim) act jointly;
/// only the victim's reward is modeled.
///
/// Storage: transition[s] is an (A1*A2) x S matrix whose row a1*A2+a2 is
/// P(s, a1, a2, .); reward[s] is an A1 x A2 table of R2(s, a1, a2).
struct TwoAgentMDP {
    int n_states = 0;
    int n_actions_adv = 0;
    int n_actions_vic = 0;
    std::vector<Matrix> transition;
    std::vector<Matrix> reward;
    double gamma = 0.0;
    Vector sigma;

    int joint_row(int a1, int a2) const { return a1 * n_actions_vic + a2; }
    double prob(int s, int a1, int a2, int next) const {
        return transition[s](joint_row(a1, a2), next);
    }
    double rew(int s, int a1, int a2) const { return reward[s](a1, a2); }

    /// R2(s, pi_adv, a2) for every (s, a2): marginalizes the reward over the adversary policy.
    Matrix reward_given_adv(const TabularPolicy& pi_adv) const;
    /// P(s, pi_adv, a2, s') flattened to an (S*A2) x S matrix, row s*A2+a2.
    Matrix kernel_given_adv(const TabularPolicy& pi_adv) const;

    double reward_min() const;
    double reward_max() const;
    double reward_abs_max() const;

    void validate() const;
    void check_policies(const TabularPolicy& pi_adv, const TabularPolicy& pi_vic) const;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace iak
