#include "iak/mdp.hpp"

namespace iak {

void TabularPolicy::validate() {
    require(probs.rows() > 0 && probs.cols() > 0, "policy: empty table");
    for (Eigen::Index s = 0; s < probs.rows(); ++s) {
        double sum = probs.row(s).sum();
        require(std::abs(sum - 1.0) <= tol::policy_renorm,
                "policy: row " + std::to_string(s) + " sums to " + std::to_string(sum));
        require(probs.row(s).minCoeff() >= -tol::policy_renorm,
                "policy: negative probability in row " + std::to_string(s));
        probs.row(s) = probs.row(s).cwiseMax(0.0);
        probs.row(s) /= probs.row(s).sum();
    }
}

bool TabularPolicy::is_deterministic(double eps) const {
    for (Eigen::Index s = 0; s < probs.rows(); ++s)
        if (probs.row(s).maxCoeff() < 1.0 - eps) return false;
    return true;
}

int TabularPolicy::action_at(int s) const {
    Eigen::Index a;
    probs.row(s).maxCoeff(&a);
    return static_cast<int>(a);
}

TabularPolicy TabularPolicy::uniform(Owner who, int n_states, int n_actions) {
    return {who, Matrix::Constant(n_states, n_actions, 1.0 / n_actions)};
}

TabularPolicy TabularPolicy::deterministic(Owner who, int n_states, int n_actions,
                                           const std::vector<int>& actions) {
    require(static_cast<int>(actions.size()) == n_states, "deterministic policy: wrong length");
    Matrix p = Matrix::Zero(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
        require(actions[s] >= 0 && actions[s] < n_actions, "deterministic policy: action out of range");
        p(s, actions[s]) = 1.0;
    }
    return {who, std::move(p)};
}

TabularPolicy TabularPolicy::constant(Owner who, int n_states, int n_actions, int action) {
    return deterministic(who, n_states, n_actions, std::vector<int>(n_states, action));
}

Matrix TwoAgentMDP::reward_given_adv(const TabularPolicy& pi_adv) const {
    Matrix out(n_states, n_actions_vic);
    for (int s = 0; s < n_states; ++s)
        out.row(s) = pi_adv.probs.row(s) * reward[s];
    return out;
}

Matrix TwoAgentMDP::kernel_given_adv(const TabularPolicy& pi_adv) const {
    Matrix out(n_states * n_actions_vic, n_states);
    for (int s = 0; s < n_states; ++s)
        for (int a2 = 0; a2 < n_actions_vic; ++a2) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_states);
            for (int a1 = 0; a1 < n_actions_adv; ++a1)
                row += pi_adv.probs(s, a1) * transition[s].row(joint_row(a1, a2));
            out.row(s * n_actions_vic + a2) = row;
        }
    return out;
}

double TwoAgentMDP::reward_min() const {
    double m = reward[0](0, 0);
    for (const auto& r : reward) m = std::min(m, r.minCoeff());
    return m;
}

double TwoAgentMDP::reward_max() const {
    double m = reward[0](0, 0);
    for (const auto& r : reward) m = std::max(m, r.maxCoeff());
    return m;
}

double TwoAgentMDP::reward_abs_max() const {
    return std::max(std::abs(reward_min()), std::abs(reward_max()));
}

void TwoAgentMDP::validate() const {
    require(n_states > 0 && n_actions_adv > 0 && n_actions_vic > 0, "mdp: empty dimensions");
    require(gamma >= 0.0 && gamma < 1.0, "mdp: gamma must lie in [0,1)");
    require(static_cast<int>(transition.size()) == n_states, "mdp: transition size mismatch");
    require(static_cast<int>(reward.size()) == n_states, "mdp: reward size mismatch");
    require(sigma.size() == n_states, "mdp: sigma size mismatch");
    require(std::abs(sigma.sum() - 1.0) <= tol::stochastic, "mdp: sigma does not sum to 1");
    require(sigma.minCoeff() >= 0.0, "mdp: sigma has negative entries");
    for (int s = 0; s < n_states; ++s) {
        require(transition[s].rows() == n_actions_adv * n_actions_vic &&
                    transition[s].cols() == n_states,
                "mdp: transition[" + std::to_string(s) + "] has wrong shape");
        require(reward[s].rows() == n_actions_adv && reward[s].cols() == n_actions_vic,
                "mdp: reward[" + std::to_string(s) + "] has wrong shape");
        for (Eigen::Index r = 0; r < transition[s].rows(); ++r) {
            require(std::abs(transition[s].row(r).sum() - 1.0) <= tol::stochastic,
                    "mdp: transition row does not sum to 1 at state " + std::to_string(s));
            require(transition[s].row(r).minCoeff() >= 0.0,
                    "mdp: negative transition probability at state " + std::to_string(s));
        }
    }
}

void TwoAgentMDP::check_policies(const TabularPolicy& pi_adv, const TabularPolicy& pi_vic) const {
    require(pi_adv.owner == Owner::adversary && pi_vic.owner == Owner::victim,
            "policy owners do not match argument order");
    require(pi_adv.n_states() == n_states && pi_adv.n_actions() == n_actions_adv,
            "adversary policy shape mismatch");
    require(pi_vic.n_states() == n_states && pi_vic.n_actions() == n_actions_vic,
            "victim policy shape mismatch");
}

} // namespace iak
