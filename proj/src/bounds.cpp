#include "iak/bounds.hpp"

#include "iak/cps.hpp"
#include "iak/linprog.hpp"

#include <cmath>

namespace iak {

namespace {

constexpr double kAssumptionTol = 1e-12;

bool adversary_independent(const TwoAgentMDP& mdp) {
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
            const auto base = mdp.transition[s].row(mdp.joint_row(0, a2));
            for (int a1 = 1; a1 < mdp.n_actions_adv; ++a1)
                if ((mdp.transition[s].row(mdp.joint_row(a1, a2)) - base).cwiseAbs().maxCoeff() >
                    kAssumptionTol)
                    return false;
        }
    return true;
}

bool fully_independent(const TwoAgentMDP& mdp) {
    for (int s = 0; s < mdp.n_states; ++s) {
        const auto base = mdp.transition[s].row(0);
        for (Eigen::Index r = 1; r < mdp.transition[s].rows(); ++r)
            if ((mdp.transition[s].row(r) - base).cwiseAbs().maxCoeff() > kAssumptionTol)
                return false;
    }
    return true;
}

double ratio_or_zero(double num, double den) {
    if (num == 0.0 && den == 0.0) return 0.0;
    return num / den;
}

} // namespace

bool always_visited(const TwoAgentMDP& mdp, const TabularPolicy& pi_target, int s) {
    require(s >= 0 && s < mdp.n_states, "always_visited: state out of range");
    const int S = mdp.n_states;
    const int A1 = mdp.n_actions_adv;

    // Avoidance MDP for the adversary: reward -1 at s, victim pinned to the target.
    Matrix P(S * A1, S);
    for (int st = 0; st < S; ++st)
        for (int a1 = 0; a1 < A1; ++a1) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(S);
            for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2)
                row += pi_target.probs(st, a2) * mdp.transition[st].row(mdp.joint_row(a1, a2));
            P.row(st * A1 + a1) = row;
        }

    Vector V = Vector::Zero(S);
    Vector Vnew(S);
    for (int sweep = 0; sweep < tol::max_sweeps; ++sweep) {
        for (int st = 0; st < S; ++st) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a1 = 0; a1 < A1; ++a1)
                best = std::max(best, mdp.gamma * P.row(st * A1 + a1).dot(V));
            Vnew(st) = (st == s ? -1.0 : 0.0) + best;
        }
        double change = (Vnew - V).cwiseAbs().maxCoeff();
        V = Vnew;
        if (change <= tol::value_iter) break;
    }
    double value = mdp.sigma.dot(V);
    return value < -tol::visited;
}

ChiTable chi_table(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                   const TabularPolicy& pi_target, double epsilon_prime) {
    mdp.check_policies(pi_default, pi_target);
    require(pi_target.is_deterministic(), "chi_table: target policy must be deterministic");

    ChiTable out;
    out.epsilon_prime = epsilon_prime;
    out.values = Matrix::Zero(mdp.n_states, mdp.n_actions_vic);
    double ret_target = discounted_return(mdp, pi_default, pi_target);
    for (int s = 0; s < mdp.n_states; ++s) {
        if (!always_visited(mdp, pi_target, s)) continue;
        for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
            if (pi_target.probs(s, a2) >= 0.5) continue;
            TabularPolicy nb = neighbor_policy(pi_target, s, a2);
            Vector mu = occupancy_measure(mdp, pi_default, nb);
            double ret_nb = discounted_return(mdp, pi_default, nb);
            out.values(s, a2) = std::max(0.0, (ret_nb - ret_target + epsilon_prime) / mu(s));
        }
    }
    return out;
}

double lower_bound_cost(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                        const TabularPolicy& pi_target) {
    ChiTable chi0 = chi_table(mdp, pi_default, pi_target, 0.0);
    double chi_norm = chi0.values.cwiseAbs().maxCoeff();
    if (chi_norm == 0.0) return 0.0;
    auto [V, Q] = value_functions(mdp, pi_default, pi_target);
    double denom = mdp.reward_abs_max() + mdp.gamma * V.cwiseAbs().maxCoeff();
    return 0.5 * (1.0 - mdp.gamma) * chi_norm / denom;
}

Alpha2Result alpha2_star(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                         const TabularPolicy& pi_target) {
    mdp.check_policies(pi_default, pi_target);
    require(pi_target.is_deterministic(), "alpha2_star: target policy must be deterministic");
    if (!adversary_independent(mdp))
        throw std::invalid_argument("alpha2_star: adversary affects transitions");

    const int S = mdp.n_states;
    const int A1 = mdp.n_actions_adv;
    Vector mu0 = occupancy_measure(mdp, pi_default, pi_target);

    struct Pair {
        int s, a2;
        Vector mu;
    };
    std::vector<Pair> pairs;
    for (int s = 0; s < S; ++s)
        for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
            if (pi_target.probs(s, a2) >= 0.5) continue;
            TabularPolicy nb = neighbor_policy(pi_target, s, a2);
            pairs.push_back({s, a2, occupancy_measure(mdp, pi_default, nb)});
        }

    // max Delta subject to per-pair frozen-occupancy gaps >= Delta; variables are
    // the policy entries plus Delta.
    const int idx_delta = S * A1;
    LpProblem lp = LpProblem::with_vars(idx_delta + 1);
    double box = (mdp.reward_max() - mdp.reward_min()) / (1.0 - mdp.gamma) + 1.0;
    for (int j = 0; j < idx_delta; ++j) {
        lp.lower(j) = 0.0;
        lp.upper(j) = 1.0;
    }
    lp.lower(idx_delta) = -box;
    lp.upper(idx_delta) = box;
    lp.objective(idx_delta) = -1.0;

    lp.eq_A = Matrix::Zero(S, idx_delta + 1);
    lp.eq_b = Vector::Ones(S);
    for (int s = 0; s < S; ++s)
        for (int a1 = 0; a1 < A1; ++a1) lp.eq_A(s, s * A1 + a1) = 1.0;

    lp.ineq_A = Matrix::Zero(static_cast<int>(pairs.size()), idx_delta + 1);
    lp.ineq_b = Vector::Zero(static_cast<int>(pairs.size()));
    for (size_t k = 0; k < pairs.size(); ++k) {
        const auto& pr = pairs[k];
        for (int s = 0; s < S; ++s) {
            int a_tgt = pi_target.action_at(s);
            int a_dev = (s == pr.s) ? pr.a2 : a_tgt;
            for (int a1 = 0; a1 < A1; ++a1)
                lp.ineq_A(static_cast<int>(k), s * A1 + a1) =
                    -(mu0(s) * mdp.reward[s](a1, a_tgt) - pr.mu(s) * mdp.reward[s](a1, a_dev));
        }
        lp.ineq_A(static_cast<int>(k), idx_delta) = 1.0;
    }

    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) throw std::runtime_error("alpha2_star: LP failed");

    Alpha2Result out;
    out.alpha2_star = -sol.objective_value;
    Matrix probs(S, A1);
    for (int s = 0; s < S; ++s)
        for (int a1 = 0; a1 < A1; ++a1) probs(s, a1) = sol.x(s * A1 + a1);
    out.pi_star = TabularPolicy(Owner::adversary, std::move(probs));
    out.per_pair_gap = Matrix::Zero(S, mdp.n_actions_vic);
    double ret_target = discounted_return(mdp, out.pi_star, pi_target);
    for (const auto& pr : pairs) {
        TabularPolicy nb = neighbor_policy(pi_target, pr.s, pr.a2);
        out.per_pair_gap(pr.s, pr.a2) = ret_target - discounted_return(mdp, out.pi_star, nb);
    }
    return out;
}

BoundReport upper_bound_cost(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                             const TabularPolicy& pi_target, double epsilon, CostNorm p) {
    if (!adversary_independent(mdp))
        throw std::invalid_argument("upper_bound_cost: adversary affects transitions");
    for (int s = 0; s < mdp.n_states; ++s)
        if (!always_visited(mdp, pi_target, s))
            throw std::invalid_argument("upper_bound_cost: chain is not ergodic at state " +
                                        std::to_string(s));

    BoundReport report;
    report.lower = lower_bound_cost(mdp, pi_default, pi_target);
    Alpha2Result alpha = alpha2_star(mdp, pi_default, pi_target);
    report.alpha2 = alpha.alpha2_star;
    report.pi_alpha_star = alpha.pi_star;
    if (alpha.alpha2_star < epsilon) return report;

    ChiTable chi = chi_table(mdp, pi_default, pi_target, epsilon);
    double beta = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
            if (pi_target.probs(s, a2) >= 0.5) continue;
            TabularPolicy nb = neighbor_policy(pi_target, s, a2);
            Vector mu = occupancy_measure(mdp, pi_default, nb);
            double chi2 = (alpha.per_pair_gap(s, a2) - epsilon) / mu(s);
            beta = std::max(beta, ratio_or_zero(chi.values(s, a2), chi2 + chi.values(s, a2)));
        }
    beta = std::min(1.0, std::max(0.0, beta));
    double size_factor = (p == CostNorm::l1) ? static_cast<double>(mdp.n_states) : 1.0;
    report.upper = 2.0 * beta * size_factor;

    TabularPolicy witness = influence_mix(pi_default, alpha.pi_star, beta);
    report.witness_policy = witness;
    report.witness_cost = attack_cost(witness, pi_default, p);
    report.witness_gap = true_gap(mdp, witness, pi_target, GapMode::ergodic).gap;
    return report;
}

double alpha1_star(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                   const TabularPolicy& pi_target, int s, double epsilon) {
    mdp.check_policies(pi_default, pi_target);
    require(s >= 0 && s < mdp.n_states, "alpha1_star: state out of range");
    Vector mu0 = occupancy_measure(mdp, pi_default, pi_target);
    if (mu0(s) <= tol::visited) return epsilon;

    const int A1 = mdp.n_actions_adv;
    const int a_tgt = pi_target.action_at(s);

    // maximin over the adversary simplex at s against deviating victim actions.
    LpProblem lp = LpProblem::with_vars(A1 + 1);
    double box = mu0(s) * 2.0 * std::max(1.0, mdp.reward_abs_max()) + 1.0;
    for (int a1 = 0; a1 < A1; ++a1) {
        lp.lower(a1) = 0.0;
        lp.upper(a1) = 1.0;
    }
    lp.lower(A1) = -box;
    lp.upper(A1) = box;
    lp.objective(A1) = -1.0;
    Vector ones = Vector::Zero(A1 + 1);
    ones.head(A1).setOnes();
    lp.eq_A = ones.transpose();
    lp.eq_b = Vector::Ones(1);

    bool has_deviation = false;
    for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
        if (pi_target.probs(s, a2) >= 0.5) continue;
        has_deviation = true;
        Vector row = Vector::Zero(A1 + 1);
        for (int a1 = 0; a1 < A1; ++a1)
            row(a1) = -mu0(s) * (mdp.reward[s](a1, a_tgt) - mdp.reward[s](a1, a2));
        row(A1) = 1.0;
        lp.add_ineq(row, 0.0);
    }
    if (!has_deviation) return std::numeric_limits<double>::infinity();

    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) throw std::runtime_error("alpha1_star: LP failed");
    return -sol.objective_value;
}

BoundReport upper_bound_cost_prop1(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                                   const TabularPolicy& pi_target, double epsilon, CostNorm p) {
    if (!fully_independent(mdp))
        throw std::invalid_argument("upper_bound_cost_prop1: transitions depend on actions");

    BoundReport report;
    report.lower = lower_bound_cost(mdp, pi_default, pi_target);
    Vector mu0 = occupancy_measure(mdp, pi_default, pi_target);

    Vector a1s(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
        a1s(s) = alpha1_star(mdp, pi_default, pi_target, s, epsilon);
    for (int s = 0; s < mdp.n_states; ++s)
        if (a1s(s) < epsilon) return report; // sufficient condition fails

    ChiTable chi = chi_table(mdp, pi_default, pi_target, epsilon);
    Matrix ratio = Matrix::Zero(mdp.n_states, mdp.n_actions_vic);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
            if (pi_target.probs(s, a2) >= 0.5) continue;
            TabularPolicy nb = neighbor_policy(pi_target, s, a2);
            Vector mu = occupancy_measure(mdp, pi_default, nb);
            double chi1 = mu(s) > tol::visited ? (a1s(s) - epsilon) / mu(s) : 0.0;
            ratio(s, a2) = ratio_or_zero(chi.values(s, a2), chi1 + chi.values(s, a2));
        }

    // || . ||_{p, inf}: the max over states of the per-state p-norm across actions.
    double norm = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
        double col = (p == CostNorm::l1) ? ratio.row(s).cwiseAbs().sum()
                                         : ratio.row(s).cwiseAbs().maxCoeff();
        norm = std::max(norm, col);
    }
    report.upper = 2.0 * norm;
    return report;
}

} // namespace iak
