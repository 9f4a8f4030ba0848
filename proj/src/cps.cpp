#include "iak/cps.hpp"

namespace iak {

void CpsConfig::validate() const {
    require(epsilon >= 0.0, "cps: epsilon must be >= 0");
    require(delta > 0.0 && delta <= 1.0, "cps: delta must lie in (0,1]");
    require(delta_eps >= 0.0, "cps: delta_eps must be >= 0");
    require(lambda >= 0.0, "cps: lambda must be >= 0");
    require(max_iters >= 1, "cps: max_iters must be >= 1");
    require(iota >= 0.0 && iota <= 1.0, "cps: iota out of [0,1]");
}

double attack_cost(const TabularPolicy& pi_adv, const TabularPolicy& pi_default, CostNorm p) {
    require(pi_adv.probs.rows() == pi_default.probs.rows() &&
                pi_adv.probs.cols() == pi_default.probs.cols(),
            "attack_cost: shape mismatch");
    Vector row_l1 = (pi_adv.probs - pi_default.probs).cwiseAbs().rowwise().sum();
    return p == CostNorm::l1 ? row_l1.sum() : row_l1.maxCoeff();
}

LpProblem build_subproblem(const TwoAgentMDP& mdp, const TabularPolicy& pi_current,
                           const TabularPolicy& pi_default, const TabularPolicy& pi_target,
                           const OccupancyBundle& bundle, const CpsConfig& cfg) {
    cfg.validate();
    mdp.check_policies(pi_current, pi_target);
    require(pi_default.probs.rows() == pi_current.probs.rows() &&
                pi_default.probs.cols() == pi_current.probs.cols(),
            "build_subproblem: default policy shape mismatch");
    require(bundle.mu_target.size() == mdp.n_states, "build_subproblem: bundle/policy mismatch");

    const int S = mdp.n_states;
    const int A1 = mdp.n_actions_adv;
    const double delta = (cfg.variant == CpsVariant::ups) ? 1.0 : cfg.delta;
    const double rspan = mdp.reward_max() - mdp.reward_min();
    const double eps_box = rspan / (1.0 - mdp.gamma) + 1.0;
    const double margin_cap = cfg.epsilon * (1.0 + cfg.delta_eps);

    // Layout: policy entries (s*A1+a1), eps', capped margin m, |pi - pi0| epigraph
    // variables u, and for p = inf one row-sum bound t.
    const int idx_eps = S * A1;
    const int idx_m = idx_eps + 1;
    const int idx_u = idx_m + 1;
    const int idx_t = idx_u + S * A1;
    const int n_vars = idx_t + (cfg.p == CostNorm::linf ? 1 : 0);

    LpProblem lp = LpProblem::with_vars(n_vars);
    for (int s = 0; s < S; ++s)
        for (int a1 = 0; a1 < A1; ++a1) {
            int j = s * A1 + a1;
            lp.lower(j) = std::max(0.0, pi_current.probs(s, a1) - delta);
            lp.upper(j) = std::min(1.0, pi_current.probs(s, a1) + delta);
        }
    lp.lower(idx_eps) = -eps_box;
    lp.upper(idx_eps) = eps_box;
    lp.lower(idx_m) = -eps_box;
    lp.upper(idx_m) = margin_cap;
    for (int j = idx_u; j < idx_u + S * A1; ++j) {
        lp.lower(j) = 0.0;
        lp.upper(j) = 2.0;
    }
    if (cfg.p == CostNorm::linf) {
        lp.lower(idx_t) = 0.0;
        lp.upper(idx_t) = 2.0;
    }

    // Objective: Cost - lambda * min{eps', eps (1 + delta_eps)}.
    if (cfg.variant != CpsVariant::cops) {
        if (cfg.p == CostNorm::l1)
            for (int j = idx_u; j < idx_u + S * A1; ++j) lp.objective(j) = 1.0;
        else
            lp.objective(idx_t) = 1.0;
    }
    lp.objective(idx_m) = -cfg.lambda;

    const int rows_eq = S;
    lp.eq_A = Matrix::Zero(rows_eq, n_vars);
    lp.eq_b = Vector::Ones(rows_eq);
    for (int s = 0; s < S; ++s)
        for (int a1 = 0; a1 < A1; ++a1) lp.eq_A(s, s * A1 + a1) = 1.0;

    std::vector<Vector> rows;
    std::vector<double> rhs;

    // Frozen-mu margin constraints: rho_hat(neighbor) - rho_hat(target) + eps' <= 0.
    for (const auto& nb : bundle.neighbors) {
        Vector row = Vector::Zero(n_vars);
        for (int s = 0; s < S; ++s) {
            const int a_dev = nb.policy.action_at(s);
            const int a_tgt = pi_target.action_at(s);
            for (int a1 = 0; a1 < A1; ++a1)
                row(s * A1 + a1) = nb.mu(s) * mdp.reward[s](a1, a_dev) -
                                   bundle.mu_target(s) * mdp.reward[s](a1, a_tgt);
        }
        row(idx_eps) = 1.0;
        rows.push_back(std::move(row));
        rhs.push_back(0.0);
    }

    // m <= eps' (the cap is a variable bound).
    {
        Vector row = Vector::Zero(n_vars);
        row(idx_m) = 1.0;
        row(idx_eps) = -1.0;
        rows.push_back(std::move(row));
        rhs.push_back(0.0);
    }

    // |pi - pi0| epigraph: pi - u <= pi0 and -pi - u <= -pi0.
    for (int s = 0; s < S; ++s)
        for (int a1 = 0; a1 < A1; ++a1) {
            int j = s * A1 + a1;
            Vector row = Vector::Zero(n_vars);
            row(j) = 1.0;
            row(idx_u + j) = -1.0;
            rows.push_back(row);
            rhs.push_back(pi_default.probs(s, a1));
            row(j) = -1.0;
            rows.push_back(std::move(row));
            rhs.push_back(-pi_default.probs(s, a1));
        }

    if (cfg.p == CostNorm::linf)
        for (int s = 0; s < S; ++s) {
            Vector row = Vector::Zero(n_vars);
            for (int a1 = 0; a1 < A1; ++a1) row(idx_u + s * A1 + a1) = 1.0;
            row(idx_t) = -1.0;
            rows.push_back(std::move(row));
            rhs.push_back(0.0);
        }

    lp.ineq_A = Matrix::Zero(static_cast<int>(rows.size()), n_vars);
    lp.ineq_b = Vector(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        lp.ineq_A.row(static_cast<int>(i)) = rows[i].transpose();
        lp.ineq_b(static_cast<int>(i)) = rhs[i];
    }
    return lp;
}

namespace {

TabularPolicy policy_from_lp(const Vector& x, int S, int A1) {
    Matrix probs(S, A1);
    for (int s = 0; s < S; ++s)
        for (int a1 = 0; a1 < A1; ++a1) probs(s, a1) = x(s * A1 + a1);
    return {Owner::adversary, std::move(probs)};
}

void select_best(CpsTrace& trace, double epsilon) {
    trace.best_index.reset();
    for (size_t i = 0; i < trace.records.size(); ++i) {
        if (!gap_feasible(trace.records[i].true_gap, epsilon)) continue;
        if (!trace.best_index || trace.records[i].cost < trace.records[*trace.best_index].cost)
            trace.best_index = static_cast<int>(i);
    }
}

} // namespace

CpsTrace run_cps(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                 const TabularPolicy& pi_target, const CpsConfig& cfg) {
    cfg.validate();
    mdp.check_policies(pi_default, pi_target);
    require(pi_target.is_deterministic(), "run_cps: target policy must be deterministic");

    CpsTrace trace;
    TabularPolicy current = pi_default;
    for (int t = 0; t < cfg.max_iters; ++t) {
        OccupancyBundle bundle = make_bundle(mdp, current, pi_target, cfg.mode);
        CpsRecord rec{current, gap_from_bundle(bundle).gap, 0.0, 0.0};
        rec.cost = attack_cost(current, pi_default, cfg.p);
        if (cfg.iota != 1.0) {
            // Influence caps the attack: feasibility is judged on the executed
            // mixture, the reported cost stays the candidate's deviation.
            TabularPolicy executed = influence_mix(pi_default, current, cfg.iota);
            rec.true_gap = true_gap(mdp, executed, pi_target, cfg.mode).gap;
        }

        LpProblem lp = build_subproblem(mdp, current, pi_default, pi_target, bundle, cfg);
        LpSolution sol;
        try {
            sol = solve_lp(lp);
        } catch (const std::exception& e) {
            throw std::runtime_error("run_cps: LP failed at iteration " + std::to_string(t) +
                                     ": " + e.what());
        }
        if (sol.status != LpStatus::optimal)
            throw std::runtime_error("run_cps: LP not optimal at iteration " + std::to_string(t));
        rec.subproblem_objective = sol.objective_value;
        trace.records.push_back(std::move(rec));

        TabularPolicy next = policy_from_lp(sol.x, mdp.n_states, mdp.n_actions_adv);
        if (next.approx_equal(current, 1e-10)) break;
        current = std::move(next);

        if (t == cfg.max_iters - 1) {
            // Final iterate produced by the last LP still gets evaluated.
            CpsRecord last{current, 0.0, 0.0, sol.objective_value};
            TabularPolicy exec = influence_mix(pi_default, current, cfg.iota);
            last.true_gap = true_gap(mdp, exec, pi_target, cfg.mode).gap;
            last.cost = attack_cost(current, pi_default, cfg.p);
            trace.records.push_back(std::move(last));
        }
    }
    select_best(trace, cfg.epsilon);
    return trace;
}

CpsTrace reselect_with_influence(const TwoAgentMDP& mdp, const TabularPolicy& pi_default,
                                 const TabularPolicy& pi_target, const CpsTrace& trace,
                                 const CpsConfig& cfg) {
    CpsTrace out;
    out.records.reserve(trace.records.size());
    for (const auto& rec : trace.records) {
        CpsRecord r = rec;
        TabularPolicy executed = influence_mix(pi_default, rec.pi_adv, cfg.iota);
        r.true_gap = true_gap(mdp, executed, pi_target, cfg.mode).gap;
        r.cost = attack_cost(rec.pi_adv, pi_default, cfg.p);
        out.records.push_back(std::move(r));
    }
    select_best(out, cfg.epsilon);
    return out;
}

} // namespace iak
