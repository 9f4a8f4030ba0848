#include "iak/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace iak {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("IAK_LOG");
        if (!env) return LogLevel::error;
        std::string v(env);
        if (v == "off") return LogLevel::off;
        if (v == "error") return LogLevel::error;
        if (v == "info") return LogLevel::info;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::error;
    }();
    return level;
}

void log_line(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) <= static_cast<int>(log_level()))
        std::fprintf(stderr, "[iak] %s\n", msg.c_str());
}

namespace {

const std::set<std::string> kCpsFamily = {"cps", "cops", "ups", "naive"};
const std::set<std::string> kApuFamily = {"apu", "ra", "rl", "sapu", "dapu"};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t grid_index, std::uint64_t seed) {
    return splitmix64(splitmix64(master ^ splitmix64(grid_index + 1)) ^ splitmix64(seed + 1));
}

ApuVariant apu_variant_of(const std::string& name) {
    if (name == "apu") return ApuVariant::apu;
    if (name == "ra") return ApuVariant::ra;
    if (name == "rl") return ApuVariant::rl;
    if (name == "sapu") return ApuVariant::sapu;
    return ApuVariant::dapu;
}

CpsVariant cps_variant_of(const std::string& name) {
    if (name == "cops") return CpsVariant::cops;
    if (name == "ups") return CpsVariant::ups;
    return CpsVariant::cps;
}

} // namespace

void ExperimentConfig::validate() const {
    require(!algorithms.empty(), "config: no algorithms selected");
    require(!grid.empty(), "config: sweep grid is empty");
    for (size_t i = 1; i < grid.size(); ++i)
        require(grid[i] > grid[i - 1], "config: sweep grid must be strictly increasing");
    require(!seeds.empty(), "config: seeds must be non-empty");
    require(threads >= 1, "config: threads must be >= 1");
    for (const auto& a : algorithms)
        require(kCpsFamily.count(a) || kApuFamily.count(a), "config: unknown algorithm " + a);
    if (axis == SweepAxis::lambda)
        for (const auto& a : algorithms)
            require(kApuFamily.count(a), "config: lambda axis applies to apu-family only");
    if (axis != SweepAxis::lambda)
        for (const auto& a : algorithms)
            require(kCpsFamily.count(a), "config: epsilon/influence axes apply to cps-family only");
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    ExperimentConfig cfg;
    cfg.env_spec = j.at("env");
    cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    const auto& sweep = j.at("sweep");
    std::string axis = sweep.at("axis").get<std::string>();
    if (axis == "epsilon")
        cfg.axis = SweepAxis::epsilon;
    else if (axis == "influence")
        cfg.axis = SweepAxis::influence;
    else if (axis == "lambda")
        cfg.axis = SweepAxis::lambda;
    else
        throw std::invalid_argument("config: unknown sweep axis " + axis);
    cfg.grid = sweep.at("values").get<std::vector<double>>();
    if (j.contains("cps")) {
        cfg.cps = cps_config_from_json(j["cps"]);
        cfg.cps_mode_explicit = j["cps"].contains("mode");
    }
    if (j.contains("apu")) cfg.apu = apu_config_from_json(j["apu"]);
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    cfg.validate();
    return cfg;
}

EnvBundle build_env(const Json& env_spec) {
    std::string name = env_spec.at("name").get<std::string>();
    if (name == "navigation") {
        NavigationParams p;
        if (env_spec.contains("r_match")) p.r_match = env_spec["r_match"].get<double>();
        if (env_spec.contains("r_mismatch")) p.r_mismatch = env_spec["r_mismatch"].get<double>();
        if (env_spec.contains("r_base1")) p.r_base1 = env_spec["r_base1"].get<double>();
        if (env_spec.contains("r_base2")) p.r_base2 = env_spec["r_base2"].get<double>();
        if (env_spec.contains("p_bar")) p.p_bar = env_spec["p_bar"].get<double>();
        if (env_spec.contains("gamma")) p.gamma = env_spec["gamma"].get<double>();
        return build_navigation(p);
    }
    if (name == "inventory") {
        InventoryParams p;
        if (env_spec.contains("capacity")) p.capacity = env_spec["capacity"].get<int>();
        if (env_spec.contains("restock_level"))
            p.restock_level = env_spec["restock_level"].get<int>();
        if (env_spec.contains("gamma")) p.gamma = env_spec["gamma"].get<double>();
        if (env_spec.contains("penalize_invalid"))
            p.penalize_invalid = env_spec["penalize_invalid"].get<bool>();
        if (env_spec.contains("invalid_penalty"))
            p.invalid_penalty = env_spec["invalid_penalty"].get<double>();
        return build_inventory(p);
    }
    if (name == "mdp_json") // inline or file-backed raw MDP with explicit policies
        throw std::invalid_argument("config: raw MDP environments go through cmd_hardness");
    throw std::invalid_argument("config: unknown environment " + name);
}

namespace {

struct CellTask {
    std::string algorithm;
    size_t grid_index = 0;
    std::optional<std::uint64_t> seed;
    size_t row_index = 0;
};

GapMode resolve_mode(const ExperimentConfig& cfg, const EnvBundle& env) {
    if (cfg.cps_mode_explicit) return cfg.cps.mode;
    return env.ergodic ? GapMode::ergodic : GapMode::general;
}

ResultRow run_cps_cell(const ExperimentConfig& cfg, const EnvBundle& env,
                       const std::string& algorithm, double value, SweepAxis axis,
                       const CpsTrace* base_trace) {
    ResultRow row;
    row.algorithm = algorithm;
    row.axis_value = value;
    CpsConfig c = cfg.cps;
    c.mode = resolve_mode(cfg, env);
    c.variant = cps_variant_of(algorithm);
    if (axis == SweepAxis::epsilon) c.epsilon = value;
    if (axis == SweepAxis::influence) c.iota = value;

    if (algorithm == "naive") {
        TabularPolicy candidate = naive_baseline(env);
        TabularPolicy executed = influence_mix(env.pi_default, candidate, c.iota);
        row.cost = attack_cost(candidate, env.pi_default, c.p);
        row.gap_or_dist = true_gap(env.mdp, executed, env.pi_target, c.mode).gap;
        row.feasible = gap_feasible(row.gap_or_dist, c.epsilon);
        row.policy = policy_to_json(executed);
        return row;
    }

    CpsTrace trace;
    if (axis == SweepAxis::influence && base_trace != nullptr)
        trace = reselect_with_influence(env.mdp, env.pi_default, env.pi_target, *base_trace, c);
    else
        trace = run_cps(env.mdp, env.pi_default, env.pi_target, c);

    if (trace.feasible()) {
        const auto& best = trace.best();
        row.cost = best.cost;
        row.gap_or_dist = best.true_gap;
        row.feasible = true;
        TabularPolicy executed = influence_mix(env.pi_default, best.pi_adv, c.iota);
        Json policy = policy_to_json(executed);
        policy["candidate"] = policy_to_json(best.pi_adv);
        policy["iota"] = c.iota;
        row.policy = policy;
    } else {
        row.cost = std::numeric_limits<double>::infinity();
        double best_gap = -std::numeric_limits<double>::infinity();
        for (const auto& r : trace.records) best_gap = std::max(best_gap, r.true_gap);
        row.gap_or_dist = best_gap;
        row.feasible = false;
    }
    return row;
}

ResultRow run_apu_cell(const ExperimentConfig& cfg, const EnvBundle& env,
                       const std::string& algorithm, double lambda, std::uint64_t run_seed,
                       std::uint64_t seed_label) {
    ResultRow row;
    row.algorithm = algorithm;
    row.axis_value = lambda;
    row.seed = seed_label;
    ApuConfig a = cfg.apu;
    a.lambda = lambda;
    a.seed = run_seed;
    try {
        ApuTrace trace = run_apu(env, a, apu_variant_of(algorithm));
        const auto& last = trace.epochs.back();
        row.cost = last.cost_metric;
        row.gap_or_dist = last.dist_metric;
        row.feasible = true;
        Json policy = policy_to_json(trace.theta.as_tabular());
        policy["victim"] = policy_to_json(trace.phi.as_tabular());
        row.policy = policy;
    } catch (const std::exception& e) {
        row.cost = std::numeric_limits<double>::infinity();
        row.gap_or_dist = std::numeric_limits<double>::infinity();
        row.feasible = false;
        row.error = e.what();
    }
    return row;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    EnvBundle env = build_env(cfg.env_spec);

    ExperimentResult result;
    result.env_name = env.name;
    result.axis_name = cfg.axis == SweepAxis::epsilon      ? "epsilon"
                       : cfg.axis == SweepAxis::influence ? "influence"
                                                          : "lambda";

    // Influence sweeps reuse one candidate trace per algorithm: the search is
    // influence-agnostic, only verification and selection see the mixture.
    std::map<std::string, CpsTrace> base_traces;
    if (cfg.axis == SweepAxis::influence)
        for (const auto& alg : cfg.algorithms) {
            if (alg == "naive") continue;
            CpsConfig c = cfg.cps;
            c.mode = resolve_mode(cfg, env);
            c.variant = cps_variant_of(alg);
            c.iota = 1.0;
            base_traces[alg] = run_cps(env.mdp, env.pi_default, env.pi_target, c);
        }

    std::vector<CellTask> tasks;
    for (const auto& alg : cfg.algorithms)
        for (size_t g = 0; g < cfg.grid.size(); ++g) {
            if (kApuFamily.count(alg)) {
                for (auto seed : cfg.seeds) tasks.push_back({alg, g, seed, 0});
            } else {
                tasks.push_back({alg, g, std::nullopt, 0});
            }
        }
    for (size_t i = 0; i < tasks.size(); ++i) tasks[i].row_index = i;
    result.rows.resize(tasks.size());

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const auto& task = tasks[i];
            auto start = std::chrono::steady_clock::now();
            ResultRow row;
            try {
                if (kApuFamily.count(task.algorithm)) {
                    std::uint64_t run_seed =
                        derive_seed(cfg.master_seed, task.grid_index, *task.seed);
                    row = run_apu_cell(cfg, env, task.algorithm, cfg.grid[task.grid_index],
                                       run_seed, *task.seed);
                } else {
                    auto it = base_traces.find(task.algorithm);
                    row = run_cps_cell(cfg, env, task.algorithm, cfg.grid[task.grid_index],
                                       cfg.axis, it == base_traces.end() ? nullptr : &it->second);
                }
            } catch (const std::exception& e) {
                row.algorithm = task.algorithm;
                row.axis_value = cfg.grid[task.grid_index];
                row.seed = task.seed;
                row.cost = std::numeric_limits<double>::infinity();
                row.feasible = false;
                row.error = e.what();
            }
            row.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            log_line(LogLevel::info, task.algorithm + " @ " + format_double(cfg.grid[task.grid_index]) +
                                         (row.feasible ? " feasible" : " infeasible") +
                                         " cost=" + format_double(row.cost));
            result.rows[task.row_index] = std::move(row);
        }
    };

    int n_threads = std::min<int>(cfg.threads, static_cast<int>(tasks.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return result;
}

std::string results_to_csv(const ExperimentResult& result) {
    std::string out = "schema_version,env,algorithm,axis,axis_value,seed,cost,gap_or_dist,feasible\n";
    for (const auto& row : result.rows) {
        out += std::to_string(kSchemaVersion) + "," + result.env_name + "," + row.algorithm + "," +
               result.axis_name + "," + format_double(row.axis_value) + ",";
        out += row.seed ? std::to_string(*row.seed) : std::string();
        out += "," + format_double(row.cost) + "," + format_double(row.gap_or_dist) + "," +
               (row.feasible ? "1" : "0") + "\n";
    }
    return out;
}

void write_run_outputs(const std::string& out_dir, const ExperimentConfig& cfg,
                       const ExperimentResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_text_file(out_dir + "/results.csv", results_to_csv(result));

    Json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["env"] = result.env_name;
    summary["axis"] = result.axis_name;
    summary["master_seed"] = cfg.master_seed;
    Json rows = Json::array();
    for (const auto& row : result.rows) {
        Json r;
        r["algorithm"] = row.algorithm;
        r["axis_value"] = row.axis_value;
        if (row.seed) r["seed"] = *row.seed;
        r["feasible"] = row.feasible;
        r["wall_seconds"] = row.wall_seconds;
        if (!row.error.empty()) r["error"] = row.error;
        std::string policy_file;
        if (row.policy) {
            policy_file = "policy_" + row.algorithm + "_" + result.axis_name + "_" +
                          format_double(row.axis_value) +
                          (row.seed ? "_s" + std::to_string(*row.seed) : "") + ".json";
            write_text_file(out_dir + "/" + policy_file, row.policy->dump(2) + "\n");
            r["policy_file"] = policy_file;
        }
        rows.push_back(r);
    }
    summary["rows"] = rows;
    write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");
}

Json bounds_report_json(const EnvBundle& env, double epsilon, CostNorm p) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["env"] = env.name;
    j["epsilon"] = epsilon;
    j["p"] = p == CostNorm::l1 ? Json(1) : Json("inf");
    j["lower"] = lower_bound_cost(env.mdp, env.pi_default, env.pi_target);

    Json assumptions;
    bool adv_indep = true;
    try {
        BoundReport report = upper_bound_cost(env.mdp, env.pi_default, env.pi_target, epsilon, p);
        if (report.alpha2) j["alpha2_star"] = *report.alpha2;
        if (report.upper) {
            j["upper"] = *report.upper;
            j["witness_cost"] = *report.witness_cost;
            j["witness_gap"] = *report.witness_gap;
            j["witness_policy"] = policy_to_json(*report.witness_policy);
        }
    } catch (const std::invalid_argument& e) {
        adv_indep = false;
        assumptions["theorem3_blocked_by"] = e.what();
    }
    assumptions["adversary_independent_transitions"] = adv_indep;

    bool fully_indep = true;
    try {
        BoundReport p1 = upper_bound_cost_prop1(env.mdp, env.pi_default, env.pi_target, epsilon, p);
        if (p1.upper) j["prop1_upper"] = *p1.upper;
    } catch (const std::invalid_argument& e) {
        fully_indep = false;
        assumptions["prop1_blocked_by"] = e.what();
    }
    assumptions["fully_independent_transitions"] = fully_indep;
    j["assumptions"] = assumptions;
    return j;
}

namespace {

struct PlotPoint {
    double x;
    double y; // inf marks "no solution"
};

} // namespace

std::string plot_svg(const std::string& results_csv) {
    std::istringstream in(results_csv);
    std::string line;
    require(std::getline(in, line), "plot: empty csv");
    std::map<std::string, std::vector<PlotPoint>> series;
    size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        require(cells.size() >= 9, "plot: malformed csv row");
        double x = std::stod(cells[4]);
        double y = cells[6] == "inf" ? std::numeric_limits<double>::infinity() : std::stod(cells[6]);
        series[cells[2]].push_back({x, y});
        ++n_rows;
    }
    require(n_rows > 0, "plot: csv has no data rows");

    // Seed-replicated points collapse to their finite mean.
    for (auto& [name, pts] : series) {
        std::map<double, std::pair<double, int>> agg;
        std::map<double, bool> any_inf;
        for (const auto& p : pts) {
            if (std::isinf(p.y))
                any_inf[p.x] = true;
            else {
                agg[p.x].first += p.y;
                agg[p.x].second += 1;
            }
            if (!agg.count(p.x)) agg[p.x];
        }
        std::vector<PlotPoint> collapsed;
        for (const auto& [x, acc] : agg)
            collapsed.push_back({x, acc.second > 0 ? acc.first / acc.second
                                                   : std::numeric_limits<double>::infinity()});
        pts = std::move(collapsed);
    }

    double xmin = 1e300, xmax = -1e300, ymax = 0.0;
    for (const auto& [name, pts] : series)
        for (const auto& p : pts) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            if (!std::isinf(p.y)) ymax = std::max(ymax, p.y);
        }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.1;

    const double W = 640, H = 420, ml = 60, mr = 150, mt = 20, mb = 50;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto sy = [&](double y) { return H - mb - y / ymax * (H - mt - mb); };

    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double xv = xmin + k * (xmax - xmin) / 4;
        double yv = k * ymax / 4;
        svg << "<text x=\"" << sx(xv) << "\" y=\"" << H - mb + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(xv) << "</text>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yv) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(yv) << "</text>\n";
    }

    int color_idx = 0;
    double legend_y = mt + 10;
    for (const auto& [name, pts] : series) {
        const char* color = colors[color_idx % 9];
        std::ostringstream poly;
        for (const auto& p : pts) {
            if (std::isinf(p.y)) {
                svg << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << mt + 4 << "\" r=\"4\" fill=\""
                    << color << "\"/>\n"; // axis-top marker: no solution found
            } else {
                poly << sx(p.x) << "," << sy(p.y) << " ";
            }
        }
        std::string pts_str = poly.str();
        if (!pts_str.empty())
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
                << pts_str << "\"/>\n";
        svg << "<rect x=\"" << W - mr + 10 << "\" y=\"" << legend_y - 9
            << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << W - mr + 28 << "\" y=\"" << legend_y + 2 << "\" font-size=\"12\">"
            << name << "</text>\n";
        legend_y += 20;
        ++color_idx;
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace iak
