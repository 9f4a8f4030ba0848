#include "iak/envs.hpp"

namespace iak {

namespace {
constexpr int kLeft = 0;
constexpr int kRight = 1;
} // namespace

EnvBundle build_navigation(const NavigationParams& params) {
    require(params.p_bar >= 0.0 && params.p_bar <= 1.0, "navigation: p_bar out of range");
    require(params.gamma >= 0.0 && params.gamma < 1.0, "navigation: gamma out of range");
    const int S = 9;
    const double pb = params.p_bar;

    // Intended moves along the corridor and its s1-s2-s3 loop.
    const int next_right[S] = {1, 2, 3, 4, 7, 4, 5, 8, 8};
    const int next_left[S] = {0, 0, 3, 1, 5, 6, 6, 4, 7};

    TwoAgentMDP mdp;
    mdp.n_states = S;
    mdp.n_actions_adv = 2;
    mdp.n_actions_vic = 2;
    mdp.gamma = params.gamma;
    mdp.sigma = Vector::Zero(S);
    mdp.sigma(0) = 1.0;
    mdp.transition.assign(S, Matrix::Zero(4, S));
    mdp.reward.assign(S, Matrix::Zero(2, 2));

    auto intended = [&](int s, int dir) { return dir == kRight ? next_right[s] : next_left[s]; };

    for (int s = 0; s < S; ++s) {
        for (int a1 = 0; a1 < 2; ++a1)
            for (int a2 = 0; a2 < 2; ++a2) {
                Eigen::RowVectorXd row = Eigen::RowVectorXd::Constant(S, 1.0 / S);
                if (s == 1) {
                    // Adversary steers the loop entry.
                    row *= (1.0 - pb);
                    row(intended(1, a1)) += pb;
                } else if (s == 2) {
                    // Action-independent hop to s3.
                    row *= (1.0 - pb);
                    row(3) += pb;
                } else if (s == 3) {
                    // Victim steers the loop exit.
                    row *= (1.0 - pb);
                    row(intended(3, a2)) += pb;
                } else if (a1 == a2) {
                    row *= (1.0 - pb);
                    row(intended(s, a2)) += pb;
                } // mismatch elsewhere: uniform over all states
                mdp.transition[s].row(mdp.joint_row(a1, a2)) = row;

                double base = (s == 0 || s == 4 || s == 8) ? params.r_base1
                              : (s == 2)                   ? params.r_base2
                                                           : 0.0;
                mdp.reward[s](a1, a2) = base + (a1 == a2 ? params.r_match : params.r_mismatch);
            }
    }
    mdp.validate();

    EnvBundle env;
    env.mdp = std::move(mdp);
    env.pi_default = TabularPolicy::constant(Owner::adversary, S, 2, kLeft);
    env.pi_target = TabularPolicy::constant(Owner::victim, S, 2, kRight);
    env.name = "navigation";
    env.ergodic = true;
    return env;
}

EnvBundle build_inventory(const InventoryParams& params) {
    const int M = params.capacity;
    require(M >= 2, "inventory: capacity must be >= 2");
    require(params.restock_level > 0 && params.restock_level < M,
            "inventory: restock level out of range");
    require(params.gamma >= 0.0 && params.gamma < 1.0, "inventory: gamma out of range");

    auto buy_price = [](int x) { return x > 0 ? 4.0 + 2.0 * x : 0.0; };

    TwoAgentMDP mdp;
    mdp.n_states = M;
    mdp.n_actions_adv = M;
    mdp.n_actions_vic = M;
    mdp.gamma = params.gamma;
    mdp.sigma = Vector::Zero(M);
    mdp.sigma(0) = 1.0;
    mdp.transition.assign(M, Matrix::Zero(M * M, M));
    mdp.reward.assign(M, Matrix::Zero(M, M));

    for (int s = 0; s < M; ++s)
        for (int a1 = 0; a1 < M; ++a1)
            for (int a2 = 0; a2 < M; ++a2) {
                const bool invalid = s + a2 >= M;
                const int buy = invalid && !params.penalize_invalid ? M - 1 - s : a2;
                const int stock = invalid && params.penalize_invalid ? s : s + buy;
                double reward = (a1 <= stock ? 10.0 * a1 : 0.0) - stock - buy_price(buy);
                if (invalid && params.penalize_invalid)
                    reward = params.invalid_penalty;
                int next = (stock < a1) ? s : stock - a1;
                if (invalid && params.penalize_invalid) next = s;
                mdp.reward[s](a1, a2) = reward;
                mdp.transition[s](mdp.joint_row(a1, a2), next) = 1.0;
            }
    mdp.validate();

    std::vector<int> target(M);
    for (int s = 0; s < M; ++s)
        target[s] = s > params.restock_level ? 0 : params.restock_level - s;

    EnvBundle env;
    env.mdp = std::move(mdp);
    env.pi_default = TabularPolicy::uniform(Owner::adversary, M, M);
    env.pi_target = TabularPolicy::deterministic(Owner::victim, M, M, target);
    env.name = "inventory";
    env.ergodic = false;
    return env;
}

TabularPolicy naive_baseline(const EnvBundle& env) {
    if (env.name == "navigation")
        return TabularPolicy::constant(Owner::adversary, env.mdp.n_states, env.mdp.n_actions_adv,
                                       kRight);
    if (env.name == "inventory")
        return TabularPolicy::constant(Owner::adversary, env.mdp.n_states, env.mdp.n_actions_adv,
                                       7);
    throw std::invalid_argument("naive_baseline: unknown environment '" + env.name + "'");
}

} // namespace iak
