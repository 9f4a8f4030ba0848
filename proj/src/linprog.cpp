#include "iak/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace iak {

namespace {
constexpr double kFeasTol = 1e-7;
constexpr double kPivotTol = 1e-10;
constexpr double kDegenerateStep = 1e-9;
constexpr int kBlandTrigger = 1000;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

void LpProblem::validate() const {
    const int n = n_vars();
    require(n > 0, "lp: no variables");
    require(lower.size() == n && upper.size() == n, "lp: bounds size mismatch");
    require(eq_A.size() == 0 || eq_A.cols() == n, "lp: eq matrix width mismatch");
    require(ineq_A.size() == 0 || ineq_A.cols() == n, "lp: ineq matrix width mismatch");
    require(eq_A.rows() == eq_b.size() && ineq_A.rows() == ineq_b.size(),
            "lp: rhs length mismatch");
    for (int j = 0; j < n; ++j)
        require(lower(j) <= upper(j), "lp: lower > upper at variable " + std::to_string(j));
}

LpProblem LpProblem::with_vars(int n) {
    LpProblem p;
    p.objective = Vector::Zero(n);
    p.eq_A = Matrix(0, n);
    p.eq_b = Vector(0);
    p.ineq_A = Matrix(0, n);
    p.ineq_b = Vector(0);
    p.lower = Vector::Constant(n, -inf);
    p.upper = Vector::Constant(n, inf);
    return p;
}

void LpProblem::add_eq(const Vector& row, double rhs) {
    eq_A.conservativeResize(eq_A.rows() + 1, n_vars());
    eq_A.row(eq_A.rows() - 1) = row.transpose();
    eq_b.conservativeResize(eq_b.size() + 1);
    eq_b(eq_b.size() - 1) = rhs;
}

void LpProblem::add_ineq(const Vector& row, double rhs) {
    ineq_A.conservativeResize(ineq_A.rows() + 1, n_vars());
    ineq_A.row(ineq_A.rows() - 1) = row.transpose();
    ineq_b.conservativeResize(ineq_b.size() + 1);
    ineq_b(ineq_b.size() - 1) = rhs;
}

namespace {

enum class VarState { basic, at_lower, at_upper, at_zero };

// Tableau-based bounded-variable simplex working on the equality form
// [eq; ineq+slacks] z = b with artificials appended for phase 1.
class Simplex {
  public:
    Simplex(const LpProblem& p) : n_struct_(p.n_vars()) {
        const int m_eq = static_cast<int>(p.eq_A.rows());
        const int m_in = static_cast<int>(p.ineq_A.rows());
        m_ = m_eq + m_in;
        n_ = n_struct_ + m_in;
        n_total_ = n_ + m_;

        T_ = Matrix::Zero(m_, n_total_);
        b_ = Vector::Zero(m_);
        lo_ = Vector::Constant(n_total_, -kInf);
        up_ = Vector::Constant(n_total_, kInf);
        lo_.head(n_struct_) = p.lower;
        up_.head(n_struct_) = p.upper;
        for (int j = n_struct_; j < n_; ++j) lo_(j) = 0.0; // slacks in [0, inf)

        if (m_eq > 0) {
            T_.topLeftCorner(m_eq, n_struct_) = p.eq_A;
            b_.head(m_eq) = p.eq_b;
        }
        if (m_in > 0) {
            T_.block(m_eq, 0, m_in, n_struct_) = p.ineq_A;
            T_.block(m_eq, n_struct_, m_in, m_in) = Matrix::Identity(m_in, m_in);
            b_.tail(m_in) = p.ineq_b;
        }

        state_.assign(n_total_, VarState::at_zero);
        value_.assign(n_total_, 0.0);
        for (int j = 0; j < n_; ++j) {
            if (std::isfinite(lo_(j))) {
                state_[j] = VarState::at_lower;
                value_[j] = lo_(j);
            } else if (std::isfinite(up_(j))) {
                state_[j] = VarState::at_upper;
                value_[j] = up_(j);
            }
        }

        // Artificials carry the residual of the nonbasic starting point.
        Vector resid = b_;
        for (int j = 0; j < n_; ++j)
            if (value_[j] != 0.0) resid -= value_[j] * T_.col(j);
        basis_.resize(m_);
        xB_ = Vector::Zero(m_);
        for (int i = 0; i < m_; ++i) {
            int j = n_ + i;
            T_(i, j) = (resid(i) >= 0.0) ? 1.0 : -1.0;
            lo_(j) = 0.0;
            up_(j) = kInf;
            basis_[i] = j;
            state_[j] = VarState::basic;
            xB_(i) = std::abs(resid(i));
        }
    }

    LpSolution run(const LpProblem& p) {
        Vector phase1 = Vector::Zero(n_total_);
        phase1.tail(m_).setOnes();
        if (!iterate(phase1)) throw std::runtime_error("lp: phase-1 iteration limit");
        if (phase1_objective() > kFeasTol) return {LpStatus::infeasible, Vector(), 0.0};
        pin_artificials();

        Vector phase2 = Vector::Zero(n_total_);
        phase2.head(n_struct_) = p.objective;
        unbounded_ = false;
        if (!iterate(phase2)) throw std::runtime_error("lp: phase-2 iteration limit");
        if (unbounded_) return {LpStatus::unbounded, Vector(), 0.0};

        LpSolution sol;
        sol.status = LpStatus::optimal;
        sol.x = Vector(n_struct_);
        for (int j = 0; j < n_struct_; ++j) sol.x(j) = current_value(j);
        sol.objective_value = p.objective.dot(sol.x);
        return sol;
    }

  private:
    double current_value(int j) const {
        if (state_[j] == VarState::basic) {
            for (int i = 0; i < m_; ++i)
                if (basis_[i] == j) return xB_(i);
        }
        return value_[j];
    }

    double phase1_objective() const {
        double obj = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= n_) obj += xB_(i);
        return obj;
    }

    // After phase 1: swap basic artificials for structural columns where possible
    // and pin every artificial to zero.
    void pin_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            int enter = -1;
            for (int j = 0; j < n_; ++j) {
                if (state_[j] == VarState::basic) continue;
                if (std::abs(T_(i, j)) > kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter >= 0) pivot(i, enter, value_[enter], VarState::at_lower);
        }
        for (int j = n_; j < n_total_; ++j) {
            up_(j) = 0.0;
            if (state_[j] != VarState::basic) {
                state_[j] = VarState::at_lower;
                value_[j] = 0.0;
            }
        }
    }

    bool iterate(const Vector& cost) {
        const int max_iters = 20000 + 200 * (m_ + n_total_);
        int degenerate_streak = 0;
        bool bland = false;
        for (int iter = 0; iter < max_iters; ++iter) {
            Vector y = Vector::Zero(m_);
            for (int i = 0; i < m_; ++i) y(i) = cost(basis_[i]);

            int enter = -1;
            double best_score = kPivotTol;
            int direction = +1;
            for (int j = 0; j < n_total_; ++j) {
                if (state_[j] == VarState::basic) continue;
                if (lo_(j) == up_(j)) continue; // pinned
                double d = cost(j) - y.dot(T_.col(j));
                int dir = 0;
                if ((state_[j] == VarState::at_lower || state_[j] == VarState::at_zero) &&
                    d < -kPivotTol)
                    dir = +1;
                else if ((state_[j] == VarState::at_upper || state_[j] == VarState::at_zero) &&
                         d > kPivotTol)
                    dir = -1;
                if (dir == 0) continue;
                if (bland) {
                    enter = j;
                    direction = dir;
                    break;
                }
                if (std::abs(d) > best_score) {
                    best_score = std::abs(d);
                    enter = j;
                    direction = dir;
                }
            }
            if (enter < 0) return true; // optimal for this phase

            // Ratio test: largest step t >= 0 moving x_enter by direction*t.
            double t_max = up_(enter) - lo_(enter); // bound flip distance
            if (!std::isfinite(t_max)) t_max = kInf;
            int leave_row = -1;
            double leave_to_bound = 0.0;
            for (int i = 0; i < m_; ++i) {
                double coef = direction * T_(i, enter);
                if (std::abs(coef) <= kPivotTol) continue;
                int bi = basis_[i];
                double t;
                double target;
                if (coef > 0) { // basic value decreases
                    if (!std::isfinite(lo_(bi))) continue;
                    t = (xB_(i) - lo_(bi)) / coef;
                    target = lo_(bi);
                } else { // basic value increases
                    if (!std::isfinite(up_(bi))) continue;
                    t = (xB_(i) - up_(bi)) / coef;
                    target = up_(bi);
                }
                if (t < -1e-11) t = 0.0;
                bool better = t < t_max - 1e-12;
                bool tie = std::abs(t - t_max) <= 1e-12 && leave_row >= 0;
                if (tie) {
                    // Bland: lowest variable index; otherwise largest pivot magnitude.
                    if (bland ? basis_[i] < basis_[leave_row]
                              : std::abs(T_(i, enter)) > std::abs(T_(leave_row, enter)))
                        better = true;
                }
                if (better) {
                    t_max = std::max(t, 0.0);
                    leave_row = i;
                    leave_to_bound = target;
                }
            }

            if (!std::isfinite(t_max)) {
                unbounded_ = true;
                return true;
            }

            if (t_max <= kDegenerateStep)
                ++degenerate_streak;
            else
                degenerate_streak = 0;
            if (degenerate_streak > kBlandTrigger) bland = true;

            if (leave_row < 0) {
                // Bound flip: entering variable runs to its opposite bound.
                for (int i = 0; i < m_; ++i) xB_(i) -= direction * t_max * T_(i, enter);
                if (direction > 0) {
                    state_[enter] = VarState::at_upper;
                    value_[enter] = up_(enter);
                } else {
                    state_[enter] = VarState::at_lower;
                    value_[enter] = lo_(enter);
                }
            } else {
                double enter_new = nonbasic_value(enter) + direction * t_max;
                VarState leave_state =
                    (leave_to_bound == lo_(basis_[leave_row])) ? VarState::at_lower
                                                               : VarState::at_upper;
                for (int i = 0; i < m_; ++i)
                    if (i != leave_row) xB_(i) -= direction * t_max * T_(i, enter);
                pivot(leave_row, enter, enter_new, leave_state);
            }
        }
        return false;
    }

    double nonbasic_value(int j) const { return value_[j]; }

    void pivot(int row, int enter, double enter_value, VarState leave_state) {
        int leave = basis_[row];
        double piv = T_(row, enter);
        T_.row(row) /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            double f = T_(i, enter);
            if (f != 0.0) T_.row(i) -= f * T_.row(row);
        }
        basis_[row] = enter;
        state_[enter] = VarState::basic;
        xB_(row) = enter_value;
        state_[leave] = leave_state;
        value_[leave] = (leave_state == VarState::at_lower) ? lo_(leave) : up_(leave);
        if (!std::isfinite(value_[leave])) value_[leave] = 0.0;
    }

    int n_struct_, m_, n_, n_total_;
    Matrix T_;
    Vector b_, lo_, up_, xB_;
    std::vector<int> basis_;
    std::vector<VarState> state_;
    std::vector<double> value_;
    bool unbounded_ = false;
};

} // namespace

LpSolution solve_lp(const LpProblem& p) {
    p.validate();
    Simplex solver(p);
    return solver.run(p);
}

} // namespace iak
