#pragma once

#include "iak/envs.hpp"
#include "iak/mdp.hpp"

#include <cstdint>
#include <vector>

namespace iak {

/// Tabular softmax policy: probabilities are the row-softmax of the logits.
struct SoftmaxPolicy {
    Owner owner = Owner::adversary;
    Matrix logits;

    SoftmaxPolicy() = default;
    SoftmaxPolicy(Owner who, int n_states, int n_actions)
        : owner(who), logits(Matrix::Zero(n_states, n_actions)) {}

    Matrix probs() const;
    TabularPolicy as_tabular() const { return {owner, probs()}; }
    double max_abs_logit() const { return logits.size() ? logits.cwiseAbs().maxCoeff() : 0.0; }
};

enum class ImitationKind { cross_entropy, kl };

struct ApuConfig {
    double lambda = 5.0;
    int epochs = 30;
    int phi_pretrain_steps = 10000;
    int phi_update_steps = 5000;
    int episodes_per_collection = 40;
    int horizon = 50;
    double clip_ratio = 0.2;
    double lr_theta = 0.5;
    double lr_phi = 2.0;
    int victim_update_multiplier = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class ApuVariant { apu, ra, rl, sapu, dapu };

struct ApuEpoch {
    double cost_metric = 0.0;
    double dist_metric = 0.0;
    double objective_value = 0.0;
};

struct ApuTrace {
    std::vector<ApuEpoch> epochs;
    SoftmaxPolicy theta;
    SoftmaxPolicy phi;
};

struct Transition {
    int s = 0, a1 = 0, a2 = 0, s_next = 0;
    double r = 0.0;
};

struct TrajectoryBatch {
    int episodes = 0;
    int horizon = 0;
    std::vector<Transition> steps;   // episode-major, horizon entries each
    std::vector<double> prob_adv;    // behavior probabilities cached at collection
    std::vector<double> prob_vic;

    int size() const { return static_cast<int>(steps.size()); }
};

/// Finite-horizon rollouts from sigma under the given policy pair; reproducible
/// for a fixed seed.
TrajectoryBatch collect_trajectories(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                                     const TabularPolicy& pi_vic, int episodes, int horizon,
                                     std::uint64_t seed);

/// Imitation loss of the adversary against its default policy, averaged over the
/// batch states, with the analytic logit gradient. Cross-entropy for a
/// deterministic default, KL(default || theta) otherwise.
std::pair<double, Matrix> imitation_loss_and_grad(const SoftmaxPolicy& theta,
                                                  const TabularPolicy& pi_default,
                                                  const TrajectoryBatch& batch,
                                                  ImitationKind kind);

/// Logit gradient of the mean clipped surrogate
/// (1/N) sum min(ratio * A, clip(ratio, 1 +- clip_ratio) * A); terms where the
/// clip binds contribute nothing.
Matrix ppo_surrogate_grad(const SoftmaxPolicy& policy, const TrajectoryBatch& batch,
                          const std::vector<double>& advantages, double clip_ratio);

/// Mean clipped surrogate value itself (same convention as the gradient).
double ppo_surrogate_value(const SoftmaxPolicy& policy, const TrajectoryBatch& batch,
                           const std::vector<double>& advantages, double clip_ratio);

/// On-trajectory policy deviation metrics: mean L1 distance of the adversary to
/// its default and of the victim to the target, over the batch states.
std::pair<double, double> metrics_cost_dist(const SoftmaxPolicy& theta, const SoftmaxPolicy& phi,
                                            const TabularPolicy& pi_default,
                                            const TabularPolicy& pi_target,
                                            const TrajectoryBatch& batch);

/// Alternating policy updates: the victim best-responds with PPO between single
/// imitation-regularized adversary steps. Baselines: ra fixes a uniform
/// adversary, rl freezes a random victim, sapu updates symmetrically without
/// pretraining, dapu drops the imitation term.
ApuTrace run_apu(const EnvBundle& env, const ApuConfig& cfg, ApuVariant variant);

} // namespace iak
