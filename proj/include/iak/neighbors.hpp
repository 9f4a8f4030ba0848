#pragma once

#include "iak/mdp.hpp"
#include "iak/mdp_ops.hpp"

#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace iak {

enum class GapMode { ergodic, general };

/// Neighbor policy of the target at one deviating pair, completed on unvisited
/// states: equal to pi_target{s, a2} where mu(pi_adv, pi_target) > tol and greedy
/// with respect to the mixed Bellman fixed point elsewhere. Ties go to the lowest
/// action index. Throws if (s, a2) is the target action.
TabularPolicy extended_neighbor_target(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                                       const TabularPolicy& pi_target, int s, int a2);

/// Occupancies of the target and of every eligible deviation neighbor for a fixed
/// adversary policy. Eligible pairs have pi_target(s, a2) = 0 and, in general mode,
/// mu(s) > tol::visited. Neighbors are plain in ergodic mode, extended otherwise.
struct OccupancyBundle {
    Vector mu_target;
    std::vector<bool> visited;
    double return_target = 0.0;
    struct NeighborEntry {
        int s = 0;
        int a2 = 0;
        TabularPolicy policy;
        Vector mu;
        double ret = 0.0;
    };
    std::vector<NeighborEntry> neighbors;
};

OccupancyBundle make_bundle(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                            const TabularPolicy& pi_target, GapMode mode);

struct GapReport {
    double gap = std::numeric_limits<double>::infinity();
    std::pair<int, int> argmin_pair{-1, -1};
    std::map<std::pair<int, int>, double> per_pair_margins;
};

/// Smallest margin by which the target beats any eligible neighbor deviation.
/// +inf sentinel when no deviating pair exists.
GapReport true_gap(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                   const TabularPolicy& pi_target, GapMode mode);

GapReport gap_from_bundle(const OccupancyBundle& bundle);

inline bool gap_feasible(double gap, double epsilon) { return gap >= epsilon - tol::gap_slack; }

/// Early-exit feasibility check: false as soon as one margin drops below
/// epsilon - tol::gap_slack. Plain-neighbor margins upper-bound the extended ones,
/// so in general mode they serve as a sound prescreen before the fixed-point solve.
bool forces_target(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                   const TabularPolicy& pi_target, double epsilon, GapMode mode);

} // namespace iak
