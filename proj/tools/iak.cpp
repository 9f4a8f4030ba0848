#include "iak/harness.hpp"
#include "iak/hardness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

using namespace iak;

int cmd_run(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
            int threads) {
    Json j = Json::parse(read_text_file(config_path));
    ExperimentConfig cfg = experiment_config_from_json(j);
    cfg.master_seed = seed;
    if (threads > 0) cfg.threads = threads;
    ExperimentResult result = run_experiment(cfg);
    write_run_outputs(out_dir, cfg, result);
    int failures = 0;
    for (const auto& row : result.rows)
        if (!row.error.empty()) {
            ++failures;
            std::cerr << "row failed: " << row.algorithm << " @ " << row.axis_value << ": "
                      << row.error << "\n";
        }
    std::cout << "wrote " << out_dir << "/results.csv (" << result.rows.size() << " rows, "
              << failures << " failed)\n";
    return 0;
}

int cmd_bounds(const std::string& config_path, const std::string& out_dir) {
    Json j = Json::parse(read_text_file(config_path));
    EnvBundle env = build_env(j.at("env"));
    double epsilon = j.value("epsilon", 0.05);
    CostNorm p = CostNorm::l1;
    if (j.contains("p") && j["p"].is_string()) p = CostNorm::linf;
    Json report = bounds_report_json(env, epsilon, p);
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/bounds.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_hardness(const std::string& cnf_path, double gamma, double epsilon,
                 const std::string& out_dir, const std::string& witness, bool brute_force,
                 double grid_step, bool run_cps_check) {
    CnfFormula f = read_dimacs_file(cnf_path);
    ReductionParams params;
    params.gamma = gamma;
    params.epsilon = epsilon;
    ReductionInstance inst = encode_3sat(f, params);
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/mdp.json", mdp_to_json(inst.mdp).dump() + "\n");
    write_text_file(out_dir + "/labels.json", inst.labels.to_json() + "\n");
    std::cout << "encoded " << inst.mdp.n_states << " states (" << f.n_vars << " vars, "
              << f.clauses.size() << " clauses), B=" << format_double(params.resolved_proxy(
                     static_cast<int>(f.clauses.size())))
              << "\n";

    int rc = 0;
    if (!witness.empty()) {
        require(witness.size() == static_cast<size_t>(f.n_vars),
                "witness must have one 0/1 digit per variable");
        std::vector<bool> assignment;
        for (char c : witness) assignment.push_back(c == '1');
        TabularPolicy pi = assignment_to_policy(inst, assignment);
        double gap = true_gap(inst.mdp, pi, inst.pi_target, GapMode::general).gap;
        bool ok = gap_feasible(gap, epsilon);
        std::cout << "witness feasibility " << (ok ? "PASS" : "FAIL")
                  << " (gap=" << format_double(gap) << ", eps=" << format_double(epsilon) << ")\n";
        write_text_file(out_dir + "/witness_policy.json", policy_to_json(pi).dump(2) + "\n");
        if (!ok) rc = 1;
    }
    if (brute_force) {
        auto found = brute_force_feasible(inst.mdp, inst.pi_target, epsilon, grid_step);
        if (found) {
            std::cout << "brute force: feasible policy found on grid\n";
            write_text_file(out_dir + "/brute_force_policy.json",
                            policy_to_json(*found).dump(2) + "\n");
        } else {
            std::cout << "brute force: no feasible policy on grid\n";
        }
    }
    if (run_cps_check) {
        CpsConfig cfg;
        cfg.epsilon = epsilon;
        cfg.mode = GapMode::general;
        cfg.delta = 0.05;
        CpsTrace trace = run_cps(inst.mdp, TabularPolicy::uniform(Owner::adversary,
                                                                  inst.mdp.n_states, 3),
                                 inst.pi_target, cfg);
        std::cout << "cps (general): " << (trace.feasible() ? "feasible" : "no feasible iterate")
                  << "\n";
        if (trace.feasible())
            write_text_file(out_dir + "/cps_policy.json",
                            policy_to_json(trace.best().pi_adv).dump(2) + "\n");
    }
    return rc;
}

int cmd_plot(const std::string& csv_path, const std::string& out_svg) {
    std::string svg = plot_svg(read_text_file(csv_path));
    write_text_file(out_svg, svg);
    std::cout << "wrote " << out_svg << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial peer-policy attacks on tabular two-agent MDPs"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", csv_path, out_svg, cnf_path, witness;
    std::uint64_t seed = 0;
    int threads = 0;
    double gamma = 0.5, epsilon = 0.1, grid_step = 0.25;
    bool brute = false, cps_check = false;

    auto* run = app.add_subcommand("run", "sweep an attack over a grid and write results.csv");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--seed", seed, "master seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker pool size");

    auto* bounds = app.add_subcommand("bounds", "evaluate attack-cost bounds for an environment");
    bounds->add_option("--config", config_path, "bounds config JSON")->required();
    bounds->add_option("--out", out_dir, "output directory");

    auto* hardness = app.add_subcommand("hardness", "encode a 3-SAT instance as an attack problem");
    hardness->add_option("cnf", cnf_path, "DIMACS CNF file")->required();
    hardness->add_option("--gamma", gamma, "discount factor of the encoding");
    hardness->add_option("--epsilon", epsilon, "forcing margin of the encoding");
    hardness->add_option("--out", out_dir, "output directory");
    hardness->add_option("--witness", witness, "assignment digits, e.g. 101");
    hardness->add_flag("--brute-force", brute, "grid-enumerate adversary policies");
    hardness->add_option("--grid-step", grid_step, "simplex grid resolution");
    hardness->add_flag("--cps", cps_check, "also run conservative policy search");

    auto* plot = app.add_subcommand("plot", "render a results.csv as an SVG line chart");
    plot->add_option("csv", csv_path, "results.csv path")->required();
    plot->add_option("svg", out_svg, "output SVG path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed, out_dir, threads);
        if (bounds->parsed()) return cmd_bounds(config_path, out_dir);
        if (hardness->parsed())
            return cmd_hardness(cnf_path, gamma, epsilon, out_dir, witness, brute, grid_step,
                                cps_check);
        if (plot->parsed()) return cmd_plot(csv_path, out_svg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
