#include "iak/hardness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

namespace iak {

void CnfFormula::validate() const {
    require(n_vars > 0, "cnf: no variables");
    require(!clauses.empty(), "cnf: no clauses");
    for (const auto& clause : clauses)
        for (const auto& lit : clause)
            require(lit.var >= 0 && lit.var < n_vars, "cnf: variable index out of range");
}

bool CnfFormula::satisfied_by(const std::vector<bool>& assignment) const {
    for (const auto& clause : clauses) {
        bool ok = false;
        for (const auto& lit : clause)
            if (assignment[lit.var] == lit.positive) {
                ok = true;
                break;
            }
        if (!ok) return false;
    }
    return true;
}

std::optional<std::vector<bool>> CnfFormula::find_satisfying() const {
    require(n_vars <= 20, "cnf: truth table limited to 20 variables");
    for (std::uint32_t bits = 0; bits < (1u << n_vars); ++bits) {
        std::vector<bool> assignment(n_vars);
        for (int v = 0; v < n_vars; ++v) assignment[v] = (bits >> v) & 1u;
        if (satisfied_by(assignment)) return assignment;
    }
    return std::nullopt;
}

CnfFormula read_dimacs(const std::string& text) {
    CnfFormula f;
    std::istringstream in(text);
    std::string line;
    std::vector<int> pending;
    int declared_clauses = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
        std::istringstream ls(line);
        if (line[0] == 'p') {
            std::string p, fmt;
            ls >> p >> fmt >> f.n_vars >> declared_clauses;
            require(fmt == "cnf", "dimacs: expected 'p cnf' header");
            continue;
        }
        int lit;
        while (ls >> lit) {
            if (lit == 0) {
                require(pending.size() == 3, "dimacs: clause must have exactly 3 literals");
                std::array<Literal, 3> clause;
                for (int i = 0; i < 3; ++i)
                    clause[i] = {std::abs(pending[i]) - 1, pending[i] > 0};
                f.clauses.push_back(clause);
                pending.clear();
            } else {
                pending.push_back(lit);
            }
        }
    }
    require(pending.empty(), "dimacs: unterminated clause");
    f.validate();
    return f;
}

CnfFormula read_dimacs_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "dimacs: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return read_dimacs(buf.str());
}

double ReductionParams::floor(int m) const {
    double c = epsilon * m / ((1.0 - gamma) * std::pow(gamma, 3));
    return 10.0 * (1.0 + c) / (1.0 - gamma);
}

double ReductionParams::resolved_proxy(int m) const {
    return neg_inf_proxy > 0.0 ? neg_inf_proxy : floor(m);
}

std::string ReductionLabels::to_json() const {
    auto list = [](const std::vector<int>& v) {
        std::string out = "[";
        for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
        return out + "]";
    };
    std::string out = "{";
    out += "\"s_I\":" + std::to_string(s_initial);
    out += ",\"s_C\":" + list(s_clause);
    out += ",\"s_x\":" + list(s_pos_literal);
    out += ",\"s_not_x\":" + list(s_neg_literal);
    out += ",\"s_val\":" + list(s_value);
    out += ",\"s_F\":" + std::to_string(s_final);
    return out + "}";
}

ReductionInstance encode_3sat(const CnfFormula& f, const ReductionParams& params) {
    f.validate();
    require(params.gamma > 0.0 && params.gamma < 1.0, "encode_3sat: gamma out of (0,1)");
    require(params.epsilon > 0.0, "encode_3sat: epsilon must be positive");
    const int n = f.n_vars;
    const int m = static_cast<int>(f.clauses.size());
    const double B = params.resolved_proxy(m);
    require(B >= params.floor(m) - 1e-9, "encode_3sat: neg_inf_proxy below its floor");
    const double value_bonus = params.epsilon * m / ((1.0 - params.gamma) * std::pow(params.gamma, 3));

    ReductionLabels labels;
    labels.s_initial = 0;
    for (int i = 0; i < m; ++i) labels.s_clause.push_back(1 + i);
    for (int j = 0; j < n; ++j) labels.s_pos_literal.push_back(1 + m + j);
    for (int j = 0; j < n; ++j) labels.s_neg_literal.push_back(1 + m + n + j);
    for (int j = 0; j < n; ++j) labels.s_value.push_back(1 + m + 2 * n + j);
    labels.s_final = 1 + m + 3 * n;
    const int S = m + 3 * n + 2;

    TwoAgentMDP mdp;
    mdp.n_states = S;
    mdp.n_actions_adv = 3;
    mdp.n_actions_vic = 2;
    mdp.gamma = params.gamma;
    mdp.sigma = Vector::Zero(S);
    mdp.sigma(labels.s_initial) = 1.0;
    mdp.transition.assign(S, Matrix::Zero(6, S));
    mdp.reward.assign(S, Matrix::Zero(3, 2));

    auto literal_state = [&](const Literal& lit) {
        return lit.positive ? labels.s_pos_literal[lit.var] : labels.s_neg_literal[lit.var];
    };
    auto set_row = [&](int s, int a1, int a2, int next) {
        mdp.transition[s](mdp.joint_row(a1, a2), next) = 1.0;
    };

    for (int a1 = 0; a1 < 3; ++a1)
        for (int a2 = 0; a2 < 2; ++a2) {
            for (int i = 0; i < m; ++i)
                mdp.transition[labels.s_initial](mdp.joint_row(a1, a2), labels.s_clause[i]) =
                    1.0 / m;
            set_row(labels.s_final, a1, a2, labels.s_final);
            for (int j = 0; j < n; ++j) {
                // Value states hand out the variable's value and terminate.
                set_row(labels.s_value[j], a1, a2, labels.s_final);
                set_row(labels.s_pos_literal[j], a1, a2,
                        a2 == 0 ? labels.s_value[j] : labels.s_final);
                set_row(labels.s_neg_literal[j], a1, a2,
                        a2 == 0 ? labels.s_final : labels.s_value[j]);
            }
            for (int i = 0; i < m; ++i)
                set_row(labels.s_clause[i], a1, a2, literal_state(f.clauses[i][a1]));
        }

    for (int s = 0; s < S; ++s) {
        bool pos_literal = false, neg_literal = false, value_state = false;
        for (int j = 0; j < n; ++j) {
            pos_literal |= s == labels.s_pos_literal[j];
            neg_literal |= s == labels.s_neg_literal[j];
            value_state |= s == labels.s_value[j];
        }
        for (int a1 = 0; a1 < 3; ++a1) {
            if (pos_literal)
                mdp.reward[s](a1, 1) = params.gamma;
            else if (!neg_literal)
                mdp.reward[s](a1, 1) = -B;
            if (value_state) mdp.reward[s](a1, 0) = a1 == 0 ? 1.0 + value_bonus : -value_bonus;
        }
    }
    mdp.validate();

    ReductionInstance inst;
    inst.mdp = std::move(mdp);
    inst.pi_target = TabularPolicy::constant(Owner::victim, S, 2, 0);
    inst.labels = std::move(labels);
    inst.formula = f;
    inst.params = params;
    return inst;
}

TabularPolicy assignment_to_policy(const ReductionInstance& inst,
                                   const std::vector<bool>& assignment) {
    const auto& f = inst.formula;
    require(static_cast<int>(assignment.size()) == f.n_vars,
            "assignment_to_policy: wrong assignment length");
    const int S = inst.mdp.n_states;
    std::vector<int> actions(S, 0);
    for (int j = 0; j < f.n_vars; ++j)
        actions[inst.labels.s_value[j]] = assignment[j] ? 0 : 1;
    for (size_t i = 0; i < f.clauses.size(); ++i) {
        int pick = 0;
        for (int k = 0; k < 3; ++k)
            if (assignment[f.clauses[i][k].var] == f.clauses[i][k].positive) {
                pick = k;
                break;
            }
        actions[inst.labels.s_clause[i]] = pick;
    }
    return TabularPolicy::deterministic(Owner::adversary, S, 3, actions);
}

std::vector<bool> decode_assignment(const ReductionInstance& inst, const TabularPolicy& pi_adv) {
    std::vector<bool> assignment(inst.formula.n_vars);
    for (int j = 0; j < inst.formula.n_vars; ++j) {
        const int s = inst.labels.s_value[j];
        double r = pi_adv.probs.row(s) * inst.mdp.reward[s].col(0);
        assignment[j] = r > 1.0;
    }
    return assignment;
}

namespace {

// States where neither transitions nor rewards react to the adversary action can
// be pinned to the first action without changing any return.
std::vector<bool> adversary_relevant(const TwoAgentMDP& mdp) {
    std::vector<bool> relevant(mdp.n_states, false);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a2 = 0; a2 < mdp.n_actions_vic && !relevant[s]; ++a2)
            for (int a1 = 1; a1 < mdp.n_actions_adv && !relevant[s]; ++a1) {
                if ((mdp.transition[s].row(mdp.joint_row(a1, a2)) -
                     mdp.transition[s].row(mdp.joint_row(0, a2)))
                        .cwiseAbs()
                        .maxCoeff() > 1e-12 ||
                    std::abs(mdp.reward[s](a1, a2) - mdp.reward[s](0, a2)) > 1e-12)
                    relevant[s] = true;
            }
    return relevant;
}

// All compositions of `ticks` grid units over `dims` coordinates.
void simplex_grid(int dims, int ticks, std::vector<std::vector<int>>& out) {
    std::vector<int> comp(dims, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == dims - 1) {
            comp[pos] = left;
            out.push_back(comp);
            return;
        }
        for (int k = left; k >= 0; --k) {
            comp[pos] = k;
            rec(pos + 1, left - k);
        }
    };
    rec(0, ticks);
}

} // namespace

std::optional<TabularPolicy> brute_force_feasible(const TwoAgentMDP& mdp,
                                                  const TabularPolicy& pi_target, double epsilon,
                                                  double grid_step, std::int64_t budget) {
    require(grid_step > 0.0 && grid_step <= 1.0, "brute_force: grid_step out of (0,1]");
    const int S = mdp.n_states;
    const int A1 = mdp.n_actions_adv;
    const GapMode mode = GapMode::general;

    auto relevant = adversary_relevant(mdp);
    int ticks = std::max(1, static_cast<int>(std::llround(1.0 / grid_step)));

    std::vector<std::vector<int>> grid;
    simplex_grid(A1, ticks, grid);
    // Deterministic vertices enter regardless of the grid resolution.
    for (int a1 = 0; a1 < A1; ++a1) {
        std::vector<int> vertex(A1, 0);
        vertex[a1] = ticks;
        if (std::find(grid.begin(), grid.end(), vertex) == grid.end()) grid.push_back(vertex);
    }

    std::vector<int> free_states;
    for (int s = 0; s < S; ++s)
        if (relevant[s]) free_states.push_back(s);

    double combos = 1.0;
    for (size_t k = 0; k < free_states.size(); ++k) {
        combos *= static_cast<double>(grid.size());
        if (combos > static_cast<double>(budget))
            throw std::runtime_error("brute_force: budget exceeded (" + std::to_string(combos) +
                                     " grid policies)");
    }

    Matrix probs = Matrix::Zero(S, A1);
    for (int s = 0; s < S; ++s) probs(s, 0) = 1.0;

    std::vector<size_t> cursor(free_states.size(), 0);
    while (true) {
        for (size_t k = 0; k < free_states.size(); ++k) {
            const auto& comp = grid[cursor[k]];
            for (int a1 = 0; a1 < A1; ++a1)
                probs(free_states[k], a1) = static_cast<double>(comp[a1]) / ticks;
        }
        TabularPolicy candidate(Owner::adversary, probs);
        if (forces_target(mdp, candidate, pi_target, epsilon, mode)) return candidate;

        size_t k = 0;
        for (; k < cursor.size(); ++k) {
            if (++cursor[k] < grid.size()) break;
            cursor[k] = 0;
        }
        if (k == cursor.size()) break;
        if (cursor.empty()) break;
    }
    return std::nullopt;
}

std::optional<TabularPolicy> random_probe_feasible(const TwoAgentMDP& mdp,
                                                   const TabularPolicy& pi_target, double epsilon,
                                                   int n_probes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    const int S = mdp.n_states;
    const int A1 = mdp.n_actions_adv;
    for (int probe = 0; probe < n_probes; ++probe) {
        Matrix probs(S, A1);
        for (int s = 0; s < S; ++s) {
            double total = 0.0;
            for (int a1 = 0; a1 < A1; ++a1) {
                probs(s, a1) = expo(rng);
                total += probs(s, a1);
            }
            probs.row(s) /= total;
        }
        TabularPolicy candidate(Owner::adversary, probs);
        if (forces_target(mdp, candidate, pi_target, epsilon, GapMode::general)) return candidate;
    }
    return std::nullopt;
}

} // namespace iak
