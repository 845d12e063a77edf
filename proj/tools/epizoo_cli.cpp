// Command-line front end: campaign, sweep, sensitivity, optimize, trajectory and validate.
// Exit codes: 0 success, 1 some replicates failed, 2 configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "epizoo/experiment.hpp"
#include "epizoo/ode.hpp"

namespace fs = std::filesystem;
using namespace epizoo;

namespace {

struct CommonFlags {
    std::string scenario;
    std::string graph;
    std::string params;
    std::string temperature;
    std::string engine;
    std::size_t replicates = 0;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    std::string out = "out";
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--scenario", f.scenario, "scenario JSON");
    app->add_option("--graph", f.graph, "graph JSON, overrides the scenario's");
    app->add_option("--params", f.params, "parameter ranges JSON, overrides the scenario's");
    app->add_option("--temperature", f.temperature, "temperature CSV (hour,temperature)");
    app->add_option("--engine", f.engine, "ode or abs")->check(CLI::IsMember({"ode", "abs"}));
    app->add_option("--replicates", f.replicates, "replicates per configuration");
    app->add_option("--seed", f.seed, "master seed");
    app->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out", f.out, "output directory");
}

Scenario resolve_scenario(const CommonFlags& f) {
    Scenario s;
    if (!f.scenario.empty()) {
        s = load_scenario(f.scenario);
    } else if (f.graph.empty()) {
        throw ConfigError("either --scenario or --graph is required");
    }
    if (!f.graph.empty()) {
        s.graph = load_graph(f.graph);
        s.graph_source = f.graph;
    }
    if (!f.params.empty()) s.ranges = load_param_ranges(f.params);
    if (!f.temperature.empty()) {
        s.temperature = load_temperature(f.temperature);
        s.temperature_source = fs::absolute(f.temperature).lexically_normal().string();
    }
    if (!f.engine.empty()) s.engine = parse_engine(f.engine);
    if (f.replicates > 0) s.replicates = f.replicates;
    if (f.seed) s.seed = *f.seed;
    s.validate();
    return s;
}

std::vector<EipMode> parse_modes(const std::string& list, const Scenario& s) {
    if (list.empty()) return {s.eip_mode};
    if (list == "all") return all_eip_modes();
    std::vector<EipMode> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_eip_mode(item));
    return out;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    return out;
}

void write_manifest(const fs::path& dir, const nlohmann::json& j) {
    open_out(dir, "manifest.json") << j.dump(2) << '\n';
}

void report_failures(const CampaignResult& r) {
    for (const auto& run : r.runs)
        if (!run.ok)
            std::cerr << "replicate " << run.index << " (" << eip_mode_name(run.mode) << ") failed: " << run.error
                      << '\n';
}

int run_campaign_cmd(const CommonFlags& f, const std::string& modes_arg) {
    const auto s = resolve_scenario(f);
    const auto modes = parse_modes(modes_arg, s);
    const auto result = run_campaign(s, modes, {f.workers});
    {
        auto file = open_out(f.out, "replicates.csv");
        write_replicates_csv(file, s, result);
    }
    {
        auto file = open_out(f.out, "summary.csv");
        write_summary_csv(file, s, result);
    }
    nlohmann::json modes_json = nlohmann::json::array();
    for (auto m : modes) modes_json.push_back(eip_mode_name(m));
    nlohmann::json plans = nlohmann::json::array();
    for (const auto& p : result.plans) plans.push_back(p.to_json());
    write_manifest(f.out, run_manifest(s, "campaign", {{"modes", modes_json}, {"plans", plans}}));
    for (const auto& m : result.summaries)
        std::cout << eip_mode_name(m.mode) << ": arn " << m.arn.mean << " +- " << m.arn.std << ", mi " << m.mi.mean
                  << " +- " << m.mi.std << ", pdi " << m.pdi.mean << " +- " << m.pdi.std << " (n=" << m.ok << ")\n";
    report_failures(result);
    return result.failures() ? 1 : 0;
}

int run_sweep_cmd(const CommonFlags& f, const std::string& spec_path, const std::vector<std::string>& axes,
                  const std::string& modes_arg) {
    const auto s = resolve_scenario(f);
    SweepSpec spec;
    if (!spec_path.empty()) spec = sweep_from_json(read_json_file(spec_path));
    for (const auto& a : axes) {
        // name=v1,v2,...
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ConfigError("--axis expects name=v1,v2,...");
        SweepAxis axis{a.substr(0, eq), {}};
        std::stringstream ss(a.substr(eq + 1));
        std::string v;
        while (std::getline(ss, v, ',')) {
            try {
                axis.values.push_back(std::stod(v));
            } catch (const std::exception&) {
                throw ConfigError("bad axis value '" + v + "'");
            }
        }
        spec.axes.push_back(axis);
    }
    if (!modes_arg.empty()) spec.modes = parse_modes(modes_arg, s);
    spec.validate();
    const auto cells = run_sweep(s, spec, {f.workers});
    {
        auto file = open_out(f.out, "sweep.csv");
        write_sweep_csv(file, s, spec, cells);
    }
    write_manifest(f.out, run_manifest(s, "sweep", {{"sweep", sweep_to_json(spec)}}));
    std::size_t failed = 0;
    for (const auto& c : cells) {
        report_failures(c.result);
        failed += c.result.failures();
    }
    std::cout << cells.size() << " cells written to " << (fs::path(f.out) / "sweep.csv").string() << '\n';
    return failed ? 1 : 0;
}

int run_sensitivity_cmd(const CommonFlags& f, const std::string& parameter) {
    const auto s = resolve_scenario(f);
    const auto points = run_sensitivity(s, parameter, {f.workers});
    {
        auto file = open_out(f.out, "sensitivity.csv");
        write_sensitivity_csv(file, s, parameter, points);
    }
    write_manifest(f.out, run_manifest(s, "sensitivity", {{"parameter", parameter}}));
    std::size_t failed = 0;
    for (const auto& p : points) {
        const auto& m = p.result.summaries.at(0);
        std::cout << parameter << " " << p.percent << "%: arn " << m.arn.mean << " +- " << m.arn.std << '\n';
        report_failures(p.result);
        failed += p.result.failures();
    }
    return failed ? 1 : 0;
}

int run_optimize_cmd(const CommonFlags& f, const std::string& mode_arg) {
    const auto s = resolve_scenario(f);
    const auto mode = parse_eip_mode(mode_arg);
    if (mode != EipMode::OptimalVaccination && mode != EipMode::OptimalDilution && mode != EipMode::OptimalBoth)
        throw ConfigError("optimize needs an optimal-* mode");
    const auto plan = plan_optimal(s, mode, {f.workers});
    write_manifest(f.out, run_manifest(s, "optimize", plan.to_json()));
    {
        auto file = open_out(f.out, "optimizer.json");
        file << plan.to_json().dump(2) << '\n';
    }
    for (const auto& sr : plan.searches)
        std::cout << sr["problem"]["kind"].get<std::string>() << " via " << sr["method"].get<std::string>() << ": "
                  << sr["allocation"].dump() << " units, objective " << sr["objective"].get<double>() << '\n';
    return 0;
}

int run_trajectory_cmd(const CommonFlags& f, std::size_t replicate, const std::string& mode_arg, bool agents) {
    const auto s = resolve_scenario(f);
    const auto mode = mode_arg.empty() ? s.eip_mode : parse_eip_mode(mode_arg);
    if (replicate >= s.replicates) throw ConfigError("--replicate must be below the replicate count");
    std::optional<OptimalPlan> plan;
    if (mode == EipMode::OptimalVaccination || mode == EipMode::OptimalDilution || mode == EipMode::OptimalBoth)
        plan = plan_optimal(s, mode, {f.workers});
    const auto setup = prepare_replicate(s, replicate);
    const auto eip = build_eip(s, setup, mode, plan ? &*plan : nullptr);
    std::optional<std::ofstream> agent_file;
    if (agents && s.engine == Engine::Abs) agent_file.emplace(open_out(f.out, "agents.csv"));
    const auto traj =
        simulate_trajectory(s, setup, eip, s.engine, abs_seed(setup), agent_file ? &*agent_file : nullptr);
    {
        auto file = open_out(f.out, "trajectory.csv");
        write_trajectory_csv(file, traj, setup.graph);
    }
    const auto rep = summarize(traj);
    write_manifest(f.out, run_manifest(s, "trajectory",
                                       {{"replicate", replicate}, {"mode", eip_mode_name(mode)},
                                        {"eip", eip_to_json(eip)}, {"arn", rep.arn}, {"mi", rep.mi}, {"pdi", rep.pdi}}));
    std::cout << "replicate " << replicate << " (" << eip_mode_name(mode) << "): arn " << rep.arn << ", mi "
              << rep.mi << ", pdi " << rep.pdi << '\n';
    return 0;
}

int run_validate_cmd(const CommonFlags& f) {
    const auto s = resolve_scenario(f);
    std::cout << run_manifest(s, "validate").dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metapopulation rabies campaigns with vaccination and dilution policies"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    CommonFlags campaign_f, sweep_f, sens_f, opt_f, traj_f, val_f;
    std::string campaign_modes, sweep_modes, sweep_spec, parameter, opt_mode = "optimal-vaccination";
    std::vector<std::string> sweep_axes;

    auto* campaign = app.add_subcommand("campaign", "replicated runs of one or more EIP configurations");
    add_common(campaign, campaign_f);
    campaign->add_option("--modes", campaign_modes, "comma-separated EIP modes, or all");

    auto* sweep = app.add_subcommand("sweep", "one- or two-axis grid of campaigns");
    add_common(sweep, sweep_f);
    sweep->add_option("--spec", sweep_spec, "sweep JSON with axes and modes");
    sweep->add_option("--axis", sweep_axes, "name=v1,v2,... (repeatable)");
    sweep->add_option("--modes", sweep_modes, "comma-separated EIP modes, or all");

    auto* sens = app.add_subcommand("sensitivity", "50-150% sweep of one parameter without EIPs");
    add_common(sens, sens_f);
    sens->add_option("--parameter", parameter, "parameter name, or c/nu/m/rho for all classes")->required();

    auto* opt = app.add_subcommand("optimize", "search the EIP allocation on the held-out search replicates");
    add_common(opt, opt_f);
    opt->add_option("--mode", opt_mode, "optimal-vaccination, optimal-dilution or optimal-both");

    std::size_t traj_replicate = 0;
    std::string traj_mode;
    bool traj_agents = false;
    auto* traj = app.add_subcommand("trajectory", "per-center trajectory of one replicate");
    add_common(traj, traj_f);
    traj->add_option("--replicate", traj_replicate, "replicate index");
    traj->add_option("--mode", traj_mode, "EIP mode; defaults to the scenario's");
    traj->add_flag("--agents", traj_agents, "also write agents.csv (agent engine only)");

    auto* val = app.add_subcommand("validate", "load, validate and print the resolved scenario");
    add_common(val, val_f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*campaign) return run_campaign_cmd(campaign_f, campaign_modes);
        if (*sweep) return run_sweep_cmd(sweep_f, sweep_spec, sweep_axes, sweep_modes);
        if (*sens) return run_sensitivity_cmd(sens_f, parameter);
        if (*opt) return run_optimize_cmd(opt_f, opt_mode);
        if (*traj) return run_trajectory_cmd(traj_f, traj_replicate, traj_mode, traj_agents);
        if (*val) return run_validate_cmd(val_f);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
