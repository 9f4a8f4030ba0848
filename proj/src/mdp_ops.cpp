#include "iak/mdp_ops.hpp"

#include <Eigen/LU>

namespace iak {

std::pair<Matrix, Vector> joint_kernel(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                                       const TabularPolicy& pi_vic) {
    mdp.check_policies(pi_adv, pi_vic);
    const int S = mdp.n_states;
    Matrix K(S, S);
    Vector r(S);
    Eigen::RowVectorXd weights(mdp.n_actions_adv * mdp.n_actions_vic);
    for (int s = 0; s < S; ++s) {
        for (int a1 = 0; a1 < mdp.n_actions_adv; ++a1)
            for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2)
                weights(mdp.joint_row(a1, a2)) = pi_adv.probs(s, a1) * pi_vic.probs(s, a2);
        K.row(s) = weights * mdp.transition[s];
        r(s) = pi_adv.probs.row(s) * mdp.reward[s] * pi_vic.probs.row(s).transpose();
    }
    return {std::move(K), std::move(r)};
}

Vector occupancy_measure(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                         const TabularPolicy& pi_vic) {
    auto [K, r] = joint_kernel(mdp, pi_adv, pi_vic);
    const int S = mdp.n_states;
    Matrix A = Matrix::Identity(S, S) - mdp.gamma * K.transpose();
    Eigen::PartialPivLU<Matrix> lu(A);
    Vector mu = lu.solve((1.0 - mdp.gamma) * mdp.sigma);
    double residual = (A * mu - (1.0 - mdp.gamma) * mdp.sigma).cwiseAbs().maxCoeff();
    if (!mu.allFinite() || residual > 1e-8)
        throw std::runtime_error("occupancy_measure: linear solve failed, residual " +
                                 std::to_string(residual));
    return mu.cwiseMax(0.0);
}

double discounted_return(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                         const TabularPolicy& pi_vic) {
    auto [K, r] = joint_kernel(mdp, pi_adv, pi_vic);
    const int S = mdp.n_states;
    Matrix A = Matrix::Identity(S, S) - mdp.gamma * K.transpose();
    Vector mu = Eigen::PartialPivLU<Matrix>(A).solve((1.0 - mdp.gamma) * mdp.sigma);
    if (!mu.allFinite()) throw std::runtime_error("discounted_return: linear solve failed");
    return mu.cwiseMax(0.0).dot(r);
}

std::pair<Vector, Matrix> value_functions(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                                          const TabularPolicy& pi_vic) {
    auto [K, r] = joint_kernel(mdp, pi_adv, pi_vic);
    const int S = mdp.n_states;
    Matrix A = Matrix::Identity(S, S) - mdp.gamma * K;
    Vector V = Eigen::PartialPivLU<Matrix>(A).solve(r);
    if (!V.allFinite()) throw std::runtime_error("value_functions: linear solve failed");

    Matrix R2 = mdp.reward_given_adv(pi_adv);
    Matrix P2 = mdp.kernel_given_adv(pi_adv);
    Matrix Q(S, mdp.n_actions_vic);
    for (int s = 0; s < S; ++s)
        for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2)
            Q(s, a2) = R2(s, a2) + mdp.gamma * P2.row(s * mdp.n_actions_vic + a2).dot(V);
    return {std::move(V), std::move(Q)};
}

std::pair<TabularPolicy, Vector> best_response(const TwoAgentMDP& mdp,
                                               const TabularPolicy& pi_adv) {
    require(pi_adv.owner == Owner::adversary && pi_adv.n_states() == mdp.n_states &&
                pi_adv.n_actions() == mdp.n_actions_adv,
            "best_response: adversary policy shape mismatch");
    const int S = mdp.n_states;
    const int A2 = mdp.n_actions_vic;
    Matrix R2 = mdp.reward_given_adv(pi_adv);
    Matrix P2 = mdp.kernel_given_adv(pi_adv);

    Vector V = Vector::Zero(S);
    Vector Vnew(S);
    for (int sweep = 0; sweep < tol::max_sweeps; ++sweep) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a2 = 0; a2 < A2; ++a2)
                best = std::max(best, R2(s, a2) + mdp.gamma * P2.row(s * A2 + a2).dot(V));
            Vnew(s) = best;
        }
        double change = (Vnew - V).cwiseAbs().maxCoeff();
        V = Vnew;
        if (change <= tol::value_iter) break;
    }

    std::vector<int> greedy(S);
    for (int s = 0; s < S; ++s) {
        int arg = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int a2 = 0; a2 < A2; ++a2) {
            double q = R2(s, a2) + mdp.gamma * P2.row(s * A2 + a2).dot(V);
            if (q > best + tol::value_iter) {
                best = q;
                arg = a2;
            }
        }
        greedy[s] = arg;
    }
    TabularPolicy pi = TabularPolicy::deterministic(Owner::victim, S, A2, greedy);
    auto [Vexact, Q] = value_functions(mdp, pi_adv, pi);
    return {std::move(pi), std::move(Vexact)};
}

TabularPolicy neighbor_policy(const TabularPolicy& pi, int s, int a) {
    require(s >= 0 && s < pi.n_states(), "neighbor_policy: state out of range");
    require(a >= 0 && a < pi.n_actions(), "neighbor_policy: action out of range");
    TabularPolicy out = pi;
    out.probs.row(s).setZero();
    out.probs(s, a) = 1.0;
    return out;
}

TabularPolicy influence_mix(const TabularPolicy& pi_default, const TabularPolicy& pi_attack,
                            double iota) {
    require(pi_default.probs.rows() == pi_attack.probs.rows() &&
                pi_default.probs.cols() == pi_attack.probs.cols(),
            "influence_mix: shape mismatch");
    require(iota >= 0.0 && iota <= 1.0, "influence_mix: iota out of [0,1]");
    TabularPolicy out = pi_default;
    out.probs = (1.0 - iota) * pi_default.probs + iota * pi_attack.probs;
    return out;
}

} // namespace iak
