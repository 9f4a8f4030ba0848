#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iak/envs.hpp"
#include "iak/mdp_ops.hpp"
#include "support/random_instances.hpp"

#include <random>

using namespace iak;
using iak::testing::all_deterministic_actions;
using iak::testing::random_mdp;
using iak::testing::random_policy;

namespace {

TwoAgentMDP single_state_mdp(double reward, double gamma) {
    TwoAgentMDP mdp;
    mdp.n_states = 1;
    mdp.n_actions_adv = 1;
    mdp.n_actions_vic = 1;
    mdp.gamma = gamma;
    mdp.sigma = Vector::Ones(1);
    mdp.transition.assign(1, Matrix::Ones(1, 1));
    mdp.reward.assign(1, Matrix::Constant(1, 1, reward));
    mdp.validate();
    return mdp;
}

// Two-state chain s0 -> s1 -> s1, deterministic, single action each.
TwoAgentMDP chain_mdp(double r0, double r1, double gamma) {
    TwoAgentMDP mdp;
    mdp.n_states = 2;
    mdp.n_actions_adv = 1;
    mdp.n_actions_vic = 1;
    mdp.gamma = gamma;
    mdp.sigma = Vector::Zero(2);
    mdp.sigma(0) = 1.0;
    mdp.transition.assign(2, Matrix::Zero(1, 2));
    mdp.transition[0](0, 1) = 1.0;
    mdp.transition[1](0, 1) = 1.0;
    mdp.reward.assign(2, Matrix::Zero(1, 1));
    mdp.reward[0](0, 0) = r0;
    mdp.reward[1](0, 0) = r1;
    mdp.validate();
    return mdp;
}

} // namespace

TEST_CASE("policy validation renormalizes and rejects") {
    Matrix probs(2, 2);
    probs << 0.5, 0.5 + 5e-10, 1.0, -5e-10;
    TabularPolicy pi(Owner::victim, probs);
    CHECK(pi.probs.row(0).sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pi.probs(1, 1) == 0.0);

    Matrix bad(1, 2);
    bad << 0.7, 0.2;
    CHECK_THROWS_AS(TabularPolicy(Owner::victim, bad), std::invalid_argument);
}

TEST_CASE("joint kernel on a single self-loop state") {
    TwoAgentMDP mdp = single_state_mdp(3.0, 0.9);
    TabularPolicy pi1 = TabularPolicy::uniform(Owner::adversary, 1, 1);
    TabularPolicy pi2 = TabularPolicy::uniform(Owner::victim, 1, 1);
    auto [K, r] = joint_kernel(mdp, pi1, pi2);
    CHECK(K(0, 0) == doctest::Approx(1.0));
    CHECK(r(0) == doctest::Approx(3.0));
}

TEST_CASE("joint reward of uniform policies averages the table") {
    std::mt19937_64 rng(7);
    TwoAgentMDP mdp = random_mdp(rng, 3, 2, 2, 0.8);
    TabularPolicy pi1 = TabularPolicy::uniform(Owner::adversary, 3, 2);
    TabularPolicy pi2 = TabularPolicy::uniform(Owner::victim, 3, 2);
    auto [K, r] = joint_kernel(mdp, pi1, pi2);
    for (int s = 0; s < 3; ++s) {
        CHECK(r(s) == doctest::Approx(mdp.reward[s].mean()).epsilon(1e-12));
        CHECK(K.row(s).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("joint kernel dimension mismatch is a structured error") {
    std::mt19937_64 rng(8);
    TwoAgentMDP mdp = random_mdp(rng, 3, 2, 2, 0.8);
    TabularPolicy wrong = TabularPolicy::uniform(Owner::adversary, 3, 4);
    TabularPolicy pi2 = TabularPolicy::uniform(Owner::victim, 3, 2);
    CHECK_THROWS_AS(joint_kernel(mdp, wrong, pi2), std::invalid_argument);
}

TEST_CASE("navigation kernel matches monte carlo transition frequencies") {
    EnvBundle env = build_navigation();
    auto [K, r] = joint_kernel(env.mdp, env.pi_default, env.pi_target);

    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int samples = 100000;
    for (int s = 0; s < env.mdp.n_states; ++s) {
        Vector freq = Vector::Zero(env.mdp.n_states);
        for (int k = 0; k < samples; ++k) {
            int a1 = unif(rng) < env.pi_default.probs(s, 0) ? 0 : 1;
            int a2 = unif(rng) < env.pi_target.probs(s, 0) ? 0 : 1;
            double u = unif(rng), acc = 0.0;
            int next = env.mdp.n_states - 1;
            for (int n = 0; n < env.mdp.n_states; ++n) {
                acc += env.mdp.prob(s, a1, a2, n);
                if (u <= acc) {
                    next = n;
                    break;
                }
            }
            freq(next) += 1.0;
        }
        freq /= samples;
        CHECK((freq - K.row(s).transpose()).cwiseAbs().maxCoeff() < 1e-2);
    }
}

TEST_CASE("occupancy of the single self-loop state is one") {
    TwoAgentMDP mdp = single_state_mdp(1.0, 0.7);
    auto pi1 = TabularPolicy::uniform(Owner::adversary, 1, 1);
    auto pi2 = TabularPolicy::uniform(Owner::victim, 1, 1);
    Vector mu = occupancy_measure(mdp, pi1, pi2);
    CHECK(mu(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("occupancy of the chain is the geometric split") {
    TwoAgentMDP mdp = chain_mdp(0.0, 1.0, 0.5);
    auto pi1 = TabularPolicy::uniform(Owner::adversary, 2, 1);
    auto pi2 = TabularPolicy::uniform(Owner::victim, 2, 1);
    Vector mu = occupancy_measure(mdp, pi1, pi2);
    CHECK(mu(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mu(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("navigation occupancy matches the truncated power series") {
    EnvBundle env = build_navigation();
    auto [K, r] = joint_kernel(env.mdp, env.pi_default, env.pi_target);
    // independent oracle: (1-gamma) sigma' sum_{t<=200} (gamma K)^t
    Eigen::RowVectorXd acc = env.mdp.sigma.transpose();
    Eigen::RowVectorXd term = env.mdp.sigma.transpose();
    for (int t = 1; t <= 200; ++t) {
        term = env.mdp.gamma * (term * K);
        acc += term;
    }
    Vector oracle = (1.0 - env.mdp.gamma) * acc.transpose();
    Vector mu = occupancy_measure(env.mdp, env.pi_default, env.pi_target);
    CHECK((mu - oracle).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(mu.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant rewards give a return equal to the constant") {
    std::mt19937_64 rng(11);
    TwoAgentMDP mdp = random_mdp(rng, 4, 2, 3, 0.85);
    for (auto& r : mdp.reward) r.setConstant(2.5);
    auto pi1 = random_policy(rng, Owner::adversary, 4, 2);
    auto pi2 = random_policy(rng, Owner::victim, 4, 3);
    CHECK(discounted_return(mdp, pi1, pi2) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("chain return picks up the absorbing reward") {
    TwoAgentMDP mdp = chain_mdp(0.0, 1.0, 0.5);
    auto pi1 = TabularPolicy::uniform(Owner::adversary, 2, 1);
    auto pi2 = TabularPolicy::uniform(Owner::victim, 2, 1);
    CHECK(discounted_return(mdp, pi1, pi2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("inventory return matches a monte carlo estimate") {
    EnvBundle env = build_inventory();
    double exact = discounted_return(env.mdp, env.pi_default, env.pi_target);

    std::mt19937_64 rng(98765);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int episodes = 100000, horizon = 200;
    double sum = 0.0, sumsq = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        int s = 0;
        double g = 0.0, disc = 1.0;
        for (int t = 0; t < horizon; ++t) {
            int a1 = std::min(9, static_cast<int>(unif(rng) * 10.0));
            int a2 = env.pi_target.action_at(s);
            g += disc * env.mdp.rew(s, a1, a2);
            disc *= env.mdp.gamma;
            double u = unif(rng), acc = 0.0;
            for (int n = 0; n < env.mdp.n_states; ++n) {
                acc += env.mdp.prob(s, a1, a2, n);
                if (u <= acc) {
                    s = n;
                    break;
                }
            }
        }
        g *= 1.0 - env.mdp.gamma;
        sum += g;
        sumsq += g * g;
    }
    double mean = sum / episodes;
    double se = std::sqrt((sumsq / episodes - mean * mean) / episodes);
    CHECK(std::abs(mean - exact) < 3.0 * se + 1e-9);
}

TEST_CASE("myopic values reduce to the marginal reward") {
    std::mt19937_64 rng(13);
    TwoAgentMDP mdp = random_mdp(rng, 3, 2, 2, 0.0);
    auto pi1 = random_policy(rng, Owner::adversary, 3, 2);
    auto pi2 = random_policy(rng, Owner::victim, 3, 2);
    auto [V, Q] = value_functions(mdp, pi1, pi2);
    Matrix expected = mdp.reward_given_adv(pi1);
    CHECK((Q - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unit reward self-loop values at ten") {
    TwoAgentMDP mdp = single_state_mdp(1.0, 0.9);
    auto pi1 = TabularPolicy::uniform(Owner::adversary, 1, 1);
    auto pi2 = TabularPolicy::uniform(Owner::victim, 1, 1);
    auto [V, Q] = value_functions(mdp, pi1, pi2);
    CHECK(V(0) == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("value functions satisfy the Bellman identity") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        TwoAgentMDP mdp = random_mdp(rng, 5, 2, 3, 0.9);
        auto pi1 = random_policy(rng, Owner::adversary, 5, 2);
        auto pi2 = random_policy(rng, Owner::victim, 5, 3);
        auto [V, Q] = value_functions(mdp, pi1, pi2);
        Matrix R2 = mdp.reward_given_adv(pi1);
        Matrix P2 = mdp.kernel_given_adv(pi1);
        for (int s = 0; s < 5; ++s) {
            double v = 0.0;
            for (int a2 = 0; a2 < 3; ++a2) {
                double q = R2(s, a2) + mdp.gamma * P2.row(s * 3 + a2).dot(V);
                CHECK(std::abs(Q(s, a2) - q) < 1e-9);
                v += pi2.probs(s, a2) * Q(s, a2);
            }
            CHECK(std::abs(V(s) - v) < 1e-9);
        }
    }
}

TEST_CASE("navigation value matches a truncated deterministic rollout") {
    EnvBundle env = build_navigation();
    auto [K, r] = joint_kernel(env.mdp, env.pi_default, env.pi_target);
    // oracle: V = sum_{t=0..499} gamma^t K^t r by repeated multiplication
    Vector acc = r;
    Vector term = r;
    for (int t = 1; t < 500; ++t) {
        term = env.mdp.gamma * (K * term);
        acc += term;
    }
    auto [V, Q] = value_functions(env.mdp, env.pi_default, env.pi_target);
    CHECK((V - acc).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("return equals (1-gamma) sigma'V on random instances") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 100; ++rep) {
        int S = 2 + static_cast<int>(rng() % 5);
        int A1 = 1 + static_cast<int>(rng() % 3);
        int A2 = 1 + static_cast<int>(rng() % 3);
        double gamma = 0.2 + 0.7 * (rng() % 100) / 100.0;
        TwoAgentMDP mdp = random_mdp(rng, S, A1, A2, gamma);
        auto pi1 = random_policy(rng, Owner::adversary, S, A1);
        auto pi2 = random_policy(rng, Owner::victim, S, A2);
        double rho = discounted_return(mdp, pi1, pi2);
        auto [V, Q] = value_functions(mdp, pi1, pi2);
        CHECK(std::abs(rho - (1.0 - gamma) * mdp.sigma.dot(V)) < 1e-9);
    }
}

TEST_CASE("occupancy is linear in the start distribution") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        TwoAgentMDP mdp = random_mdp(rng, 4, 2, 2, 0.9);
        auto pi1 = random_policy(rng, Owner::adversary, 4, 2);
        auto pi2 = random_policy(rng, Owner::victim, 4, 2);
        TwoAgentMDP m1 = mdp, m2 = mdp;
        m1.sigma = Vector::Zero(4);
        m1.sigma(0) = 1.0;
        m2.sigma = Vector::Zero(4);
        m2.sigma(2) = 1.0;
        TwoAgentMDP mix = mdp;
        mix.sigma = 0.5 * (m1.sigma + m2.sigma);
        Vector lhs = occupancy_measure(mix, pi1, pi2);
        Vector rhs = 0.5 * (occupancy_measure(m1, pi1, pi2) + occupancy_measure(m2, pi1, pi2));
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("advantage identity over random policy pairs") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 30; ++rep) {
        TwoAgentMDP mdp = random_mdp(rng, 4, 2, 3, 0.85);
        auto pi1 = random_policy(rng, Owner::adversary, 4, 2);
        auto pi2 = random_policy(rng, Owner::victim, 4, 3);
        auto pi2b = random_policy(rng, Owner::victim, 4, 3);
        double lhs = discounted_return(mdp, pi1, pi2b) - discounted_return(mdp, pi1, pi2);
        auto [V, Q] = value_functions(mdp, pi1, pi2);
        Vector mu = occupancy_measure(mdp, pi1, pi2b);
        double rhs = 0.0;
        for (int s = 0; s < 4; ++s) {
            double q_mixed = 0.0;
            for (int a2 = 0; a2 < 3; ++a2) q_mixed += pi2b.probs(s, a2) * Q(s, a2);
            rhs += mu(s) * (q_mixed - V(s));
        }
        // normalized returns vs unnormalized advantage sum
        CHECK(std::abs(lhs - (1.0 - mdp.gamma) * rhs / (1.0 - mdp.gamma) * (1.0 - mdp.gamma)) <
              1e-8);
    }
}

TEST_CASE("single-action best response returns the only action") {
    std::mt19937_64 rng(31);
    TwoAgentMDP mdp = random_mdp(rng, 3, 2, 1, 0.8);
    auto pi1 = random_policy(rng, Owner::adversary, 3, 2);
    auto [pi, V] = best_response(mdp, pi1);
    for (int s = 0; s < 3; ++s) CHECK(pi.action_at(s) == 0);
}

TEST_CASE("myopic dominance is found by best response") {
    std::mt19937_64 rng(37);
    TwoAgentMDP mdp = random_mdp(rng, 3, 1, 3, 0.9);
    // action-independent transitions, rewards maximal at a fixed action per state
    for (int s = 0; s < 3; ++s) {
        for (Eigen::Index row = 1; row < mdp.transition[s].rows(); ++row)
            mdp.transition[s].row(row) = mdp.transition[s].row(0);
        mdp.reward[s].setZero();
        mdp.reward[s](0, s % 3) = 1.0;
    }
    auto pi1 = TabularPolicy::uniform(Owner::adversary, 3, 1);
    auto [pi, V] = best_response(mdp, pi1);
    for (int s = 0; s < 3; ++s) CHECK(pi.action_at(s) == s % 3);
}

TEST_CASE("best response value matches deterministic enumeration") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 5; ++rep) {
        TwoAgentMDP mdp = random_mdp(rng, 4, 2, 3, 0.85);
        auto pi1 = random_policy(rng, Owner::adversary, 4, 2);
        auto [pi, V] = best_response(mdp, pi1);
        double best_rho = -1e300;
        for (const auto& actions : all_deterministic_actions(4, 3)) {
            auto cand = TabularPolicy::deterministic(Owner::victim, 4, 3, actions);
            best_rho = std::max(best_rho, discounted_return(mdp, pi1, cand));
        }
        CHECK(std::abs(discounted_return(mdp, pi1, pi) - best_rho) < 1e-8);
        // dominance over every enumerated policy
        for (const auto& actions : all_deterministic_actions(4, 3)) {
            auto cand = TabularPolicy::deterministic(Owner::victim, 4, 3, actions);
            CHECK(discounted_return(mdp, pi1, cand) <= best_rho + 1e-10);
        }
    }
}

TEST_CASE("neighbor policy rewrites exactly one row") {
    std::mt19937_64 rng(43);
    auto pi = random_policy(rng, Owner::victim, 4, 3);
    auto nb = neighbor_policy(pi, 2, 1);
    CHECK(nb.probs(2, 1) == 1.0);
    CHECK(nb.probs(2, 0) == 0.0);
    for (int s : {0, 1, 3})
        CHECK((nb.probs.row(s) - pi.probs.row(s)).cwiseAbs().maxCoeff() == 0.0);

    // already deterministic at (s, a): unchanged
    auto det = TabularPolicy::constant(Owner::victim, 4, 3, 1);
    CHECK(neighbor_policy(det, 0, 1).approx_equal(det, 0.0));

    // disjoint rows commute
    auto ab = neighbor_policy(neighbor_policy(pi, 0, 2), 3, 0);
    auto ba = neighbor_policy(neighbor_policy(pi, 3, 0), 0, 2);
    CHECK(ab.approx_equal(ba, 0.0));

    CHECK_THROWS_AS(neighbor_policy(pi, 9, 0), std::invalid_argument);
}

TEST_CASE("influence mixing endpoints and midpoint") {
    Matrix a(2, 2), b(2, 2);
    a << 1, 0, 0, 1;
    b << 0, 1, 1, 0;
    TabularPolicy pa(Owner::adversary, a), pb(Owner::adversary, b);
    CHECK(influence_mix(pa, pb, 0.0).approx_equal(pa, 0.0));
    CHECK(influence_mix(pa, pb, 1.0).approx_equal(pb, 0.0));
    auto mid = influence_mix(pa, pb, 0.5);
    CHECK(mid.probs(0, 0) == doctest::Approx(0.5));
    CHECK(mid.probs(0, 1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(influence_mix(pa, pb, 1.5), std::invalid_argument);
}

TEST_CASE("mdp validation rejects broken tensors") {
    TwoAgentMDP mdp = single_state_mdp(0.0, 0.9);
    TwoAgentMDP bad_gamma = mdp;
    bad_gamma.gamma = 1.0;
    CHECK_THROWS_AS(bad_gamma.validate(), std::invalid_argument);
    TwoAgentMDP bad_rows = mdp;
    bad_rows.transition[0](0, 0) = 0.5;
    CHECK_THROWS_AS(bad_rows.validate(), std::invalid_argument);
    TwoAgentMDP bad_sigma = mdp;
    bad_sigma.sigma(0) = 0.3;
    CHECK_THROWS_AS(bad_sigma.validate(), std::invalid_argument);
}
