#include "iak/neighbors.hpp"

#include <Eigen/LU>

namespace iak {

namespace {

std::vector<bool> visited_mask(const Vector& mu) {
    std::vector<bool> out(mu.size());
    for (Eigen::Index s = 0; s < mu.size(); ++s) out[s] = mu(s) > tol::visited;
    return out;
}

// Exact evaluation of a deterministic victim policy against pi_adv: solves
// (I - gamma K) V = r for the joint chain.
Vector eval_deterministic(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                          const std::vector<int>& vic_actions) {
    const int S = mdp.n_states;
    Matrix K(S, S);
    Vector r(S);
    for (int s = 0; s < S; ++s) {
        const int a2 = vic_actions[s];
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(S);
        double rs = 0.0;
        for (int a1 = 0; a1 < mdp.n_actions_adv; ++a1) {
            row += pi_adv.probs(s, a1) * mdp.transition[s].row(mdp.joint_row(a1, a2));
            rs += pi_adv.probs(s, a1) * mdp.reward[s](a1, a2);
        }
        K.row(s) = row;
        r(s) = rs;
    }
    Matrix A = Matrix::Identity(S, S) - mdp.gamma * K;
    Vector V = Eigen::PartialPivLU<Matrix>(A).solve(r);
    if (!V.allFinite()) throw std::runtime_error("extended neighbor: policy evaluation failed");
    return V;
}

} // namespace

TabularPolicy extended_neighbor_target(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                                       const TabularPolicy& pi_target, int s, int a2) {
    mdp.check_policies(pi_adv, pi_target);
    require(pi_target.is_deterministic(), "extended neighbor: target policy must be deterministic");
    require(s >= 0 && s < mdp.n_states && a2 >= 0 && a2 < mdp.n_actions_vic,
            "extended neighbor: index out of range");
    require(pi_target.probs(s, a2) < 0.5,
            "extended neighbor: (s, a2) is already the target action");

    const int S = mdp.n_states;
    const int A2 = mdp.n_actions_vic;
    Vector mu = occupancy_measure(mdp, pi_adv, pi_target);
    auto visited = visited_mask(mu);

    // Deterministic action per state: the plain neighbor on visited states, a
    // mutable completion elsewhere. Policy iteration on the completion converges
    // finitely since each round weakly improves the evaluation.
    std::vector<int> actions(S);
    for (int st = 0; st < S; ++st) actions[st] = (st == s) ? a2 : pi_target.action_at(st);

    for (int round = 0; round < 1000; ++round) {
        Vector V = eval_deterministic(mdp, pi_adv, actions);
        bool changed = false;
        for (int st = 0; st < S; ++st) {
            if (visited[st]) continue;
            int arg = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (int b = 0; b < A2; ++b) {
                double q = 0.0;
                for (int a1 = 0; a1 < mdp.n_actions_adv; ++a1)
                    q += pi_adv.probs(st, a1) *
                         (mdp.reward[st](a1, b) +
                          mdp.gamma * mdp.transition[st].row(mdp.joint_row(a1, b)).dot(V));
                if (q > best + tol::value_iter) {
                    best = q;
                    arg = b;
                }
            }
            if (arg != actions[st]) {
                // Re-check: switch only on strict improvement over the incumbent,
                // ties keep the lowest index via the scan order above.
                double q_inc = 0.0;
                for (int a1 = 0; a1 < mdp.n_actions_adv; ++a1)
                    q_inc += pi_adv.probs(st, a1) *
                             (mdp.reward[st](a1, actions[st]) +
                              mdp.gamma *
                                  mdp.transition[st].row(mdp.joint_row(a1, actions[st])).dot(V));
                if (best > q_inc + tol::value_iter || arg < actions[st]) {
                    actions[st] = arg;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    return TabularPolicy::deterministic(Owner::victim, S, A2, actions);
}

OccupancyBundle make_bundle(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                            const TabularPolicy& pi_target, GapMode mode) {
    mdp.check_policies(pi_adv, pi_target);
    require(pi_target.is_deterministic(), "bundle: target policy must be deterministic");

    OccupancyBundle bundle;
    bundle.mu_target = occupancy_measure(mdp, pi_adv, pi_target);
    bundle.visited = visited_mask(bundle.mu_target);
    bundle.return_target = discounted_return(mdp, pi_adv, pi_target);

    for (int s = 0; s < mdp.n_states; ++s) {
        if (mode == GapMode::general && !bundle.visited[s]) continue;
        for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
            if (pi_target.probs(s, a2) >= 0.5) continue;
            OccupancyBundle::NeighborEntry entry;
            entry.s = s;
            entry.a2 = a2;
            entry.policy = (mode == GapMode::ergodic)
                               ? neighbor_policy(pi_target, s, a2)
                               : extended_neighbor_target(mdp, pi_adv, pi_target, s, a2);
            entry.mu = occupancy_measure(mdp, pi_adv, entry.policy);
            entry.ret = discounted_return(mdp, pi_adv, entry.policy);
            bundle.neighbors.push_back(std::move(entry));
        }
    }
    return bundle;
}

GapReport gap_from_bundle(const OccupancyBundle& bundle) {
    GapReport report;
    for (const auto& n : bundle.neighbors) {
        double margin = bundle.return_target - n.ret;
        report.per_pair_margins[{n.s, n.a2}] = margin;
        if (margin < report.gap) {
            report.gap = margin;
            report.argmin_pair = {n.s, n.a2};
        }
    }
    return report;
}

GapReport true_gap(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                   const TabularPolicy& pi_target, GapMode mode) {
    return gap_from_bundle(make_bundle(mdp, pi_adv, pi_target, mode));
}

bool forces_target(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                   const TabularPolicy& pi_target, double epsilon, GapMode mode) {
    mdp.check_policies(pi_adv, pi_target);
    Vector mu = occupancy_measure(mdp, pi_adv, pi_target);
    auto visited = visited_mask(mu);
    double ret_target = discounted_return(mdp, pi_adv, pi_target);

    std::vector<std::pair<int, int>> undecided;
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mode == GapMode::general && !visited[s]) continue;
        for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
            if (pi_target.probs(s, a2) >= 0.5) continue;
            TabularPolicy plain = neighbor_policy(pi_target, s, a2);
            double margin = ret_target - discounted_return(mdp, pi_adv, plain);
            if (!gap_feasible(margin, epsilon)) return false;
            if (mode == GapMode::general) undecided.emplace_back(s, a2);
        }
    }
    for (auto [s, a2] : undecided) {
        TabularPolicy ext = extended_neighbor_target(mdp, pi_adv, pi_target, s, a2);
        double margin = ret_target - discounted_return(mdp, pi_adv, ext);
        if (!gap_feasible(margin, epsilon)) return false;
    }
    return true;
}

} // namespace iak
