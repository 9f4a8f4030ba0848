#pragma once

#include "iak/mdp.hpp"

#include <string>

namespace iak {

struct EnvBundle {
    TwoAgentMDP mdp;
    TabularPolicy pi_default;
    TabularPolicy pi_target;
    std::string name;
    bool ergodic = true;
};

struct NavigationParams {
    double r_match = 5.0;
    double r_mismatch = -5.0;
    double r_base1 = 5.0;
    double r_base2 = 50.0;
    double p_bar = 0.9;
    double gamma = 0.9;
};

/// Nine-state corridor with a loop: both agents pick left/right, matching actions
/// move the victim in its chosen direction with probability p_bar, rewards combine
/// a match/mismatch term with per-state base rewards. Default: always left.
/// Target: always right.
EnvBundle build_navigation(const NavigationParams& params = {});

struct InventoryParams {
    int capacity = 10; // M: states 0..M-1, buy and demand actions 0..M-1
    int restock_level = 7;
    double gamma = 0.9;
    // Buys that would exceed capacity are clipped by default; setting
    // penalize_invalid instead charges invalid_penalty and leaves stock unchanged.
    bool penalize_invalid = false;
    double invalid_penalty = -100.0;
};

/// Warehouse with victim-controlled stock and adversary-controlled demand.
/// Default: uniform demand. Target: order up to restock_level. Non-ergodic.
EnvBundle build_inventory(const InventoryParams& params = {});

/// Fixed-action adversary from the experiments: always "right" on navigation,
/// constant action 7 on inventory. Throws on unknown labels.
TabularPolicy naive_baseline(const EnvBundle& env);

} // namespace iak
