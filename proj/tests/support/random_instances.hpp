#pragma once

#include "iak/mdp.hpp"

#include <random>

namespace iak::testing {

/// Random dense MDP; smoothing > 0 mixes every transition row with the uniform
/// distribution, which makes the chain ergodic under any pair of policies.
inline TwoAgentMDP random_mdp(std::mt19937_64& rng, int S, int A1, int A2, double gamma,
                              double smoothing = 0.0) {
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    TwoAgentMDP mdp;
    mdp.n_states = S;
    mdp.n_actions_adv = A1;
    mdp.n_actions_vic = A2;
    mdp.gamma = gamma;
    mdp.transition.assign(S, Matrix::Zero(A1 * A2, S));
    mdp.reward.assign(S, Matrix::Zero(A1, A2));
    for (int s = 0; s < S; ++s) {
        for (int a1 = 0; a1 < A1; ++a1)
            for (int a2 = 0; a2 < A2; ++a2) {
                Eigen::RowVectorXd row(S);
                for (int n = 0; n < S; ++n) row(n) = expo(rng);
                row /= row.sum();
                row = (1.0 - smoothing) * row +
                      smoothing * Eigen::RowVectorXd::Constant(S, 1.0 / S);
                mdp.transition[s].row(mdp.joint_row(a1, a2)) = row;
                mdp.reward[s](a1, a2) = unif(rng);
            }
    }
    Vector sigma(S);
    for (int s = 0; s < S; ++s) sigma(s) = expo(rng);
    mdp.sigma = sigma / sigma.sum();
    mdp.validate();
    return mdp;
}

inline TabularPolicy random_policy(std::mt19937_64& rng, Owner who, int S, int A) {
    std::exponential_distribution<double> expo(1.0);
    Matrix probs(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) probs(s, a) = expo(rng);
        probs.row(s) /= probs.row(s).sum();
    }
    return {who, std::move(probs)};
}

inline TabularPolicy random_deterministic(std::mt19937_64& rng, Owner who, int S, int A) {
    std::uniform_int_distribution<int> pick(0, A - 1);
    std::vector<int> actions(S);
    for (int s = 0; s < S; ++s) actions[s] = pick(rng);
    return TabularPolicy::deterministic(who, S, A, actions);
}

/// Enumerates all deterministic victim policies (A2^S of them).
inline std::vector<std::vector<int>> all_deterministic_actions(int S, int A) {
    std::vector<std::vector<int>> out;
    std::vector<int> actions(S, 0);
    while (true) {
        out.push_back(actions);
        int s = 0;
        for (; s < S; ++s) {
            if (++actions[s] < A) break;
            actions[s] = 0;
        }
        if (s == S) break;
    }
    return out;
}

} // namespace iak::testing
