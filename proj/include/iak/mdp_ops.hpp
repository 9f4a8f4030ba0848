#pragma once

#include "iak/mdp.hpp"

#include <utility>

namespace iak {

/// State-to-state kernel K(s, s') and per-state expected reward r(s) under a
/// fixed joint policy pair. Rows of K sum to 1.
std::pair<Matrix, Vector> joint_kernel(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                                       const TabularPolicy& pi_vic);

/// Normalized discounted state occupancy: solves mu' (I - gamma K) = (1-gamma) sigma'
/// by dense LU. Entries are clamped at 0; the vector sums to 1 up to solver noise.
Vector occupancy_measure(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                         const TabularPolicy& pi_vic);

/// Normalized return of the victim: sum_s mu(s) * R2(s, pi_adv, pi_vic).
double discounted_return(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                         const TabularPolicy& pi_vic);

/// Unnormalized V(s) and the victim's Q(s, a2) for the MDP induced by fixing pi_adv.
/// V solves (I - gamma K) V = r exactly; Q follows from the Bellman equation.
std::pair<Vector, Matrix> value_functions(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                                          const TabularPolicy& pi_vic);

/// Victim's optimal deterministic response to a fixed adversary policy, by value
/// iteration (sup-norm stop tol::value_iter, ties to the lowest action index).
/// The returned value vector is the exact evaluation of the greedy policy.
std::pair<TabularPolicy, Vector> best_response(const TwoAgentMDP& mdp,
                                               const TabularPolicy& pi_adv);

/// Copy of pi committed to action a in state s, all other rows untouched.
TabularPolicy neighbor_policy(const TabularPolicy& pi, int s, int a);

/// Row-wise convex combination (1-iota) * pi_default + iota * pi_attack.
TabularPolicy influence_mix(const TabularPolicy& pi_default, const TabularPolicy& pi_attack,
                            double iota);

} // namespace iak
