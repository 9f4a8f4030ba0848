#pragma once

#include "iak/mdp.hpp"

#include <limits>

namespace iak {

/// Dense LP: minimize objective' x subject to eq_A x = eq_b, ineq_A x <= ineq_b,
/// lower <= x <= upper (+-inf allowed in the bounds).
struct LpProblem {
    Vector objective;
    Matrix eq_A;
    Vector eq_b;
    Matrix ineq_A;
    Vector ineq_b;
    Vector lower;
    Vector upper;

    int n_vars() const { return static_cast<int>(objective.size()); }
    void validate() const;

    static constexpr double inf = std::numeric_limits<double>::infinity();
    static LpProblem with_vars(int n);
    void add_eq(const Vector& row, double rhs);
    void add_ineq(const Vector& row, double rhs); // row . x <= rhs
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    double objective_value = 0.0;
};

/// Bounded-variable primal simplex, two phases, Dantzig pricing with a switch to
/// Bland's rule after 1000 degenerate pivots. Feasibility tolerance 1e-7, pivot
/// threshold 1e-10. Throws on iteration-limit failures.
LpSolution solve_lp(const LpProblem& p);

} // namespace iak
