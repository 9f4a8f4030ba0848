#include "iak/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iak {

Json mdp_to_json(const TwoAgentMDP& mdp) {
    Json j;
    j["n_states"] = mdp.n_states;
    j["n_actions_adv"] = mdp.n_actions_adv;
    j["n_actions_vic"] = mdp.n_actions_vic;
    j["gamma"] = mdp.gamma;
    j["sigma"] = std::vector<double>(mdp.sigma.data(), mdp.sigma.data() + mdp.sigma.size());
    Json trans = Json::array();
    Json rew = Json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        Json ts = Json::array(), rs = Json::array();
        for (int a1 = 0; a1 < mdp.n_actions_adv; ++a1) {
            Json ta = Json::array(), ra = Json::array();
            for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
                Json row = Json::array();
                for (int next = 0; next < mdp.n_states; ++next)
                    row.push_back(mdp.prob(s, a1, a2, next));
                ta.push_back(row);
                ra.push_back(mdp.rew(s, a1, a2));
            }
            ts.push_back(ta);
            rs.push_back(ra);
        }
        trans.push_back(ts);
        rew.push_back(rs);
    }
    j["transition"] = trans;
    j["reward_vic"] = rew;
    return j;
}

TwoAgentMDP mdp_from_json(const Json& j) {
    TwoAgentMDP mdp;
    mdp.n_states = j.at("n_states").get<int>();
    mdp.n_actions_adv = j.at("n_actions_adv").get<int>();
    mdp.n_actions_vic = j.at("n_actions_vic").get<int>();
    mdp.gamma = j.at("gamma").get<double>();
    auto sig = j.at("sigma").get<std::vector<double>>();
    require(static_cast<int>(sig.size()) == mdp.n_states, "mdp json: sigma length mismatch");
    mdp.sigma = Eigen::Map<Vector>(sig.data(), sig.size());
    mdp.transition.assign(mdp.n_states,
                          Matrix::Zero(mdp.n_actions_adv * mdp.n_actions_vic, mdp.n_states));
    mdp.reward.assign(mdp.n_states, Matrix::Zero(mdp.n_actions_adv, mdp.n_actions_vic));
    const auto& trans = j.at("transition");
    const auto& rew = j.at("reward_vic");
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a1 = 0; a1 < mdp.n_actions_adv; ++a1)
            for (int a2 = 0; a2 < mdp.n_actions_vic; ++a2) {
                mdp.reward[s](a1, a2) = rew.at(s).at(a1).at(a2).get<double>();
                for (int next = 0; next < mdp.n_states; ++next)
                    mdp.transition[s](mdp.joint_row(a1, a2), next) =
                        trans.at(s).at(a1).at(a2).at(next).get<double>();
            }
    mdp.validate();
    return mdp;
}

Json policy_to_json(const TabularPolicy& pi) {
    Json j;
    j["owner"] = pi.owner == Owner::adversary ? "adversary" : "victim";
    Json rows = Json::array();
    for (int s = 0; s < pi.n_states(); ++s) {
        Json row = Json::array();
        for (int a = 0; a < pi.n_actions(); ++a) row.push_back(pi.probs(s, a));
        rows.push_back(row);
    }
    j["probs"] = rows;
    return j;
}

TabularPolicy policy_from_json(const Json& j) {
    std::string owner = j.at("owner").get<std::string>();
    require(owner == "adversary" || owner == "victim", "policy json: unknown owner");
    const auto& rows = j.at("probs");
    require(rows.is_array() && !rows.empty(), "policy json: probs must be a non-empty array");
    Matrix probs(rows.size(), rows.at(0).size());
    for (size_t s = 0; s < rows.size(); ++s)
        for (size_t a = 0; a < rows.at(s).size(); ++a)
            probs(static_cast<int>(s), static_cast<int>(a)) = rows.at(s).at(a).get<double>();
    return {owner == "adversary" ? Owner::adversary : Owner::victim, std::move(probs)};
}

namespace {

CostNorm parse_norm(const Json& v) {
    if (v.is_number() && v.get<double>() == 1.0) return CostNorm::l1;
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "linf"))
        return CostNorm::linf;
    throw std::invalid_argument("config: p must be 1 or \"inf\"");
}

} // namespace

CpsConfig cps_config_from_json(const Json& j) {
    CpsConfig cfg;
    if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
    if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
    if (j.contains("delta_eps")) cfg.delta_eps = j["delta_eps"].get<double>();
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("p")) cfg.p = parse_norm(j["p"]);
    if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
    if (j.contains("mode")) {
        std::string mode = j["mode"].get<std::string>();
        require(mode == "ergodic" || mode == "general", "config: mode must be ergodic or general");
        cfg.mode = mode == "ergodic" ? GapMode::ergodic : GapMode::general;
    }
    if (j.contains("variant")) {
        std::string v = j["variant"].get<std::string>();
        require(v == "cps" || v == "cops" || v == "ups", "config: unknown cps variant");
        cfg.variant = v == "cps" ? CpsVariant::cps : (v == "cops" ? CpsVariant::cops : CpsVariant::ups);
    }
    if (j.contains("iota")) cfg.iota = j["iota"].get<double>();
    cfg.validate();
    return cfg;
}

Json cps_config_to_json(const CpsConfig& cfg) {
    Json j;
    j["epsilon"] = cfg.epsilon;
    j["delta"] = cfg.delta;
    j["delta_eps"] = cfg.delta_eps;
    j["lambda"] = cfg.lambda;
    j["p"] = cfg.p == CostNorm::l1 ? Json(1) : Json("inf");
    j["max_iters"] = cfg.max_iters;
    j["mode"] = cfg.mode == GapMode::ergodic ? "ergodic" : "general";
    j["variant"] = cfg.variant == CpsVariant::cps ? "cps"
                   : cfg.variant == CpsVariant::cops ? "cops"
                                                     : "ups";
    j["iota"] = cfg.iota;
    return j;
}

ApuConfig apu_config_from_json(const Json& j) {
    ApuConfig cfg;
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("phi_pretrain_steps")) cfg.phi_pretrain_steps = j["phi_pretrain_steps"].get<int>();
    if (j.contains("phi_update_steps")) cfg.phi_update_steps = j["phi_update_steps"].get<int>();
    if (j.contains("episodes_per_collection"))
        cfg.episodes_per_collection = j["episodes_per_collection"].get<int>();
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
    if (j.contains("clip_ratio")) cfg.clip_ratio = j["clip_ratio"].get<double>();
    if (j.contains("lr_theta")) cfg.lr_theta = j["lr_theta"].get<double>();
    if (j.contains("lr_phi")) cfg.lr_phi = j["lr_phi"].get<double>();
    if (j.contains("victim_update_multiplier"))
        cfg.victim_update_multiplier = j["victim_update_multiplier"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

Json apu_config_to_json(const ApuConfig& cfg) {
    Json j;
    j["lambda"] = cfg.lambda;
    j["epochs"] = cfg.epochs;
    j["phi_pretrain_steps"] = cfg.phi_pretrain_steps;
    j["phi_update_steps"] = cfg.phi_update_steps;
    j["episodes_per_collection"] = cfg.episodes_per_collection;
    j["horizon"] = cfg.horizon;
    j["clip_ratio"] = cfg.clip_ratio;
    j["lr_theta"] = cfg.lr_theta;
    j["lr_phi"] = cfg.lr_phi;
    j["victim_update_multiplier"] = cfg.victim_update_multiplier;
    j["seed"] = cfg.seed;
    return j;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string cps_trace_to_csv(const CpsTrace& trace) {
    std::string out = "iter,gap,cost,objective\n";
    for (size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        out += std::to_string(i) + "," + format_double(r.true_gap) + "," +
               format_double(r.cost) + "," + format_double(r.subproblem_objective) + "\n";
    }
    return out;
}

std::string apu_trace_to_csv(const ApuTrace& trace) {
    std::string out = "epoch,cost,dist,objective\n";
    for (size_t i = 0; i < trace.epochs.size(); ++i) {
        const auto& e = trace.epochs[i];
        out += std::to_string(i) + "," + format_double(e.cost_metric) + "," +
               format_double(e.dist_metric) + "," + format_double(e.objective_value) + "\n";
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write " + path);
    out << content;
}

} // namespace iak
