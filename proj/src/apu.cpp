#include "iak/apu.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

namespace iak {

Matrix SoftmaxPolicy::probs() const {
    Matrix out = logits;
    for (Eigen::Index s = 0; s < out.rows(); ++s) {
        Eigen::RowVectorXd row = out.row(s);
        double m = row.maxCoeff();
        row = (row.array() - m).exp();
        out.row(s) = row / row.sum();
    }
    return out;
}

void ApuConfig::validate() const {
    require(lambda >= 0.0, "apu: lambda must be >= 0");
    require(epochs > 0 && phi_pretrain_steps >= 0 && phi_update_steps >= 0,
            "apu: counts must be positive");
    require(episodes_per_collection > 0 && horizon >= 1, "apu: batch shape invalid");
    require(clip_ratio > 0.0 && clip_ratio < 1.0, "apu: clip_ratio out of (0,1)");
    require(lr_theta > 0.0 && lr_phi > 0.0, "apu: learning rates must be positive");
    require(victim_update_multiplier >= 1, "apu: victim_update_multiplier must be >= 1");
}

namespace {

int sample_categorical(const Eigen::RowVectorXd& probs, double u) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        acc += probs(i);
        if (u <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

} // namespace

TrajectoryBatch collect_trajectories(const TwoAgentMDP& mdp, const TabularPolicy& pi_adv,
                                     const TabularPolicy& pi_vic, int episodes, int horizon,
                                     std::uint64_t seed) {
    mdp.check_policies(pi_adv, pi_vic);
    require(horizon >= 1, "collect_trajectories: horizon must be >= 1");
    TrajectoryBatch batch;
    batch.episodes = episodes;
    batch.horizon = horizon;
    batch.steps.reserve(static_cast<size_t>(episodes) * horizon);
    batch.prob_adv.reserve(batch.steps.capacity());
    batch.prob_vic.reserve(batch.steps.capacity());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::RowVectorXd sigma = mdp.sigma.transpose();
    for (int ep = 0; ep < episodes; ++ep) {
        int s = sample_categorical(sigma, unif(rng));
        for (int t = 0; t < horizon; ++t) {
            int a1 = sample_categorical(pi_adv.probs.row(s), unif(rng));
            int a2 = sample_categorical(pi_vic.probs.row(s), unif(rng));
            int next =
                sample_categorical(mdp.transition[s].row(mdp.joint_row(a1, a2)), unif(rng));
            batch.steps.push_back({s, a1, a2, next, mdp.reward[s](a1, a2)});
            batch.prob_adv.push_back(pi_adv.probs(s, a1));
            batch.prob_vic.push_back(pi_vic.probs(s, a2));
            s = next;
        }
    }
    return batch;
}

std::pair<double, Matrix> imitation_loss_and_grad(const SoftmaxPolicy& theta,
                                                  const TabularPolicy& pi_default,
                                                  const TrajectoryBatch& batch,
                                                  ImitationKind kind) {
    require(batch.size() > 0, "imitation loss: empty batch");
    Matrix probs = theta.probs();
    Matrix grad = Matrix::Zero(theta.logits.rows(), theta.logits.cols());
    double loss = 0.0;
    const double inv_n = 1.0 / batch.size();
    for (const auto& step : batch.steps) {
        const int s = step.s;
        if (kind == ImitationKind::cross_entropy) {
            int a0 = pi_default.action_at(s);
            loss -= inv_n * std::log(std::max(probs(s, a0), 1e-300));
            for (Eigen::Index b = 0; b < probs.cols(); ++b)
                grad(s, b) += inv_n * (probs(s, b) - (b == a0 ? 1.0 : 0.0));
        } else {
            for (Eigen::Index a = 0; a < probs.cols(); ++a) {
                double p0 = pi_default.probs(s, a);
                if (p0 > 0.0)
                    loss += inv_n * p0 * std::log(p0 / std::max(probs(s, a), 1e-300));
            }
            for (Eigen::Index b = 0; b < probs.cols(); ++b)
                grad(s, b) += inv_n * (probs(s, b) - pi_default.probs(s, b));
        }
    }
    return {loss, std::move(grad)};
}

namespace {

// Clip binds (and kills the gradient) once the ratio has already moved past the
// band in the direction the advantage pushes.
bool clip_active(double ratio, double advantage, double clip_ratio) {
    return (advantage > 0.0 && ratio >= 1.0 + clip_ratio) ||
           (advantage < 0.0 && ratio <= 1.0 - clip_ratio);
}

} // namespace

Matrix ppo_surrogate_grad(const SoftmaxPolicy& policy, const TrajectoryBatch& batch,
                          const std::vector<double>& advantages, double clip_ratio) {
    require(advantages.size() == batch.steps.size(), "ppo grad: advantage/batch mismatch");
    require(batch.size() > 0, "ppo grad: empty batch");
    Matrix probs = policy.probs();
    Matrix grad = Matrix::Zero(policy.logits.rows(), policy.logits.cols());
    const bool adversary = policy.owner == Owner::adversary;
    const double inv_n = 1.0 / batch.size();
    for (size_t i = 0; i < batch.steps.size(); ++i) {
        const auto& step = batch.steps[i];
        const int a = adversary ? step.a1 : step.a2;
        const double old_p = adversary ? batch.prob_adv[i] : batch.prob_vic[i];
        const double ratio = probs(step.s, a) / old_p;
        const double adv = advantages[i];
        if (adv == 0.0 || clip_active(ratio, adv, clip_ratio)) continue;
        const double w = inv_n * adv * ratio;
        for (Eigen::Index b = 0; b < probs.cols(); ++b)
            grad(step.s, b) += w * ((b == a ? 1.0 : 0.0) - probs(step.s, b));
    }
    return grad;
}

double ppo_surrogate_value(const SoftmaxPolicy& policy, const TrajectoryBatch& batch,
                           const std::vector<double>& advantages, double clip_ratio) {
    require(advantages.size() == batch.steps.size(), "ppo value: advantage/batch mismatch");
    Matrix probs = policy.probs();
    const bool adversary = policy.owner == Owner::adversary;
    double value = 0.0;
    for (size_t i = 0; i < batch.steps.size(); ++i) {
        const auto& step = batch.steps[i];
        const int a = adversary ? step.a1 : step.a2;
        const double old_p = adversary ? batch.prob_adv[i] : batch.prob_vic[i];
        const double ratio = probs(step.s, a) / old_p;
        const double clipped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
        value += std::min(ratio * advantages[i], clipped * advantages[i]);
    }
    return value / batch.size();
}

std::pair<double, double> metrics_cost_dist(const SoftmaxPolicy& theta, const SoftmaxPolicy& phi,
                                            const TabularPolicy& pi_default,
                                            const TabularPolicy& pi_target,
                                            const TrajectoryBatch& batch) {
    require(batch.size() > 0, "metrics: empty batch");
    Matrix theta_p = theta.probs();
    Matrix phi_p = phi.probs();
    double cost = 0.0, dist = 0.0;
    for (const auto& step : batch.steps) {
        cost += (theta_p.row(step.s) - pi_default.probs.row(step.s)).cwiseAbs().sum();
        dist += (phi_p.row(step.s) - pi_target.probs.row(step.s)).cwiseAbs().sum();
    }
    return {cost / batch.size(), dist / batch.size()};
}

namespace {

// Discounted return-to-go within each episode, baselined by a tabular critic.
std::vector<double> mc_advantages(const TrajectoryBatch& batch, double gamma, const Vector& critic) {
    std::vector<double> adv(batch.steps.size());
    for (int ep = 0; ep < batch.episodes; ++ep) {
        double g = 0.0;
        for (int t = batch.horizon - 1; t >= 0; --t) {
            size_t i = static_cast<size_t>(ep) * batch.horizon + t;
            g = batch.steps[i].r + gamma * g;
            adv[i] = g - critic(batch.steps[i].s);
        }
    }
    return adv;
}

void fit_critic(Vector& critic, const TrajectoryBatch& batch, double gamma) {
    Vector sum = Vector::Zero(critic.size());
    Eigen::VectorXi count = Eigen::VectorXi::Zero(critic.size());
    for (int ep = 0; ep < batch.episodes; ++ep) {
        double g = 0.0;
        std::vector<double> returns(batch.horizon);
        for (int t = batch.horizon - 1; t >= 0; --t) {
            size_t i = static_cast<size_t>(ep) * batch.horizon + t;
            g = batch.steps[i].r + gamma * g;
            returns[t] = g;
        }
        for (int t = 0; t < batch.horizon; ++t) {
            size_t i = static_cast<size_t>(ep) * batch.horizon + t;
            sum(batch.steps[i].s) += returns[t];
            count(batch.steps[i].s) += 1;
        }
    }
    for (Eigen::Index s = 0; s < critic.size(); ++s)
        if (count(s) > 0) critic(s) = sum(s) / count(s);
}

void normalize_joint(std::vector<double>& a, std::vector<double>& b) {
    double mean = 0.0;
    const size_t n = a.size() + b.size();
    for (double v : a) mean += v;
    for (double v : b) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    for (double v : b) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / static_cast<double>(n));
    if (sd < 1e-12) return;
    for (double& v : a) v = (v - mean) / sd;
    for (double& v : b) v = (v - mean) / sd;
}

void normalize_single(std::vector<double>& a) {
    std::vector<double> empty;
    normalize_joint(a, empty);
}

void check_divergence(const SoftmaxPolicy& p, const char* who) {
    if (p.max_abs_logit() > 1e3)
        throw std::runtime_error(std::string("run_apu: ") + who + " logits diverged");
}

} // namespace

ApuTrace run_apu(const EnvBundle& env, const ApuConfig& cfg, ApuVariant variant) {
    cfg.validate();
    const TwoAgentMDP& mdp = env.mdp;
    const double gamma = mdp.gamma;
    const ImitationKind kind = env.pi_default.is_deterministic() ? ImitationKind::cross_entropy
                                                                 : ImitationKind::kl;

    SoftmaxPolicy theta(Owner::adversary, mdp.n_states, mdp.n_actions_adv);
    SoftmaxPolicy phi(Owner::victim, mdp.n_states, mdp.n_actions_vic);
    Vector critic_adv = Vector::Zero(mdp.n_states);
    Vector critic_vic = Vector::Zero(mdp.n_states);

    std::mt19937_64 seeder(cfg.seed);
    auto next_seed = [&]() { return seeder(); };

    if (variant == ApuVariant::rl) {
        std::mt19937_64 rng(next_seed());
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index s = 0; s < phi.logits.rows(); ++s)
            for (Eigen::Index a = 0; a < phi.logits.cols(); ++a) phi.logits(s, a) = normal(rng);
    }

    const int theta_batch_steps = cfg.episodes_per_collection * cfg.horizon;
    auto victim_round = [&](int total_steps) {
        if (variant == ApuVariant::rl) return;
        int per_round = std::max(1, total_steps / cfg.victim_update_multiplier);
        int eps_per_round = std::max(1, per_round / cfg.horizon);
        int done = 0;
        while (done < total_steps) {
            TrajectoryBatch b = collect_trajectories(mdp, theta.as_tabular(), phi.as_tabular(),
                                                     eps_per_round, cfg.horizon, next_seed());
            fit_critic(critic_vic, b, gamma);
            auto adv = mc_advantages(b, gamma, critic_vic);
            normalize_single(adv);
            phi.logits += cfg.lr_phi * ppo_surrogate_grad(phi, b, adv, cfg.clip_ratio);
            check_divergence(phi, "victim");
            done += b.size();
        }
    };

    if (variant == ApuVariant::apu || variant == ApuVariant::dapu || variant == ApuVariant::ra)
        victim_round(cfg.phi_pretrain_steps);

    ApuTrace trace;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        victim_round(variant == ApuVariant::sapu ? theta_batch_steps : cfg.phi_update_steps);

        TrajectoryBatch tau_phi =
            collect_trajectories(mdp, theta.as_tabular(), phi.as_tabular(),
                                 cfg.episodes_per_collection, cfg.horizon, next_seed());
        TrajectoryBatch tau_dagger =
            collect_trajectories(mdp, theta.as_tabular(), env.pi_target,
                                 cfg.episodes_per_collection, cfg.horizon, next_seed());

        fit_critic(critic_adv, tau_phi, gamma);
        fit_critic(critic_adv, tau_dagger, gamma);
        auto adv_phi = mc_advantages(tau_phi, gamma, critic_adv);
        auto adv_dagger = mc_advantages(tau_dagger, gamma, critic_adv);
        normalize_joint(adv_phi, adv_dagger);

        double bc_loss = 0.0;
        Matrix bc_grad = Matrix::Zero(theta.logits.rows(), theta.logits.cols());
        if (variant != ApuVariant::dapu)
            std::tie(bc_loss, bc_grad) = imitation_loss_and_grad(theta, env.pi_default, tau_phi, kind);

        const double n_phi = tau_phi.size();
        const double n_dagger = tau_dagger.size();
        const double denom = n_phi + n_dagger;
        double policy_loss =
            (n_phi * ppo_surrogate_value(theta, tau_phi, adv_phi, cfg.clip_ratio) -
             n_dagger * ppo_surrogate_value(theta, tau_dagger, adv_dagger, cfg.clip_ratio)) /
            denom;

        if (variant != ApuVariant::ra) {
            Matrix g_phi = ppo_surrogate_grad(theta, tau_phi, adv_phi, cfg.clip_ratio);
            Matrix g_dagger = ppo_surrogate_grad(theta, tau_dagger, adv_dagger, cfg.clip_ratio);
            Matrix total = bc_grad + cfg.lambda * (n_phi * g_phi - n_dagger * g_dagger) / denom;
            theta.logits -= cfg.lr_theta * total;
            check_divergence(theta, "adversary");
        }

        ApuEpoch row;
        std::tie(row.cost_metric, row.dist_metric) =
            metrics_cost_dist(theta, phi, env.pi_default, env.pi_target, tau_phi);
        row.objective_value = bc_loss + cfg.lambda * policy_loss;
        trace.epochs.push_back(row);
    }
    trace.theta = std::move(theta);
    trace.phi = std::move(phi);
    return trace;
}

} // namespace iak
