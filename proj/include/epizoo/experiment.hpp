#pragma once

// Replicated campaigns over EIP configurations, grid sweeps and one-at-a-time
// sensitivity runs, with CSV and JSON manifest output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "epizoo/abs.hpp"
#include "epizoo/eip.hpp"
#include "epizoo/metrics.hpp"
#include "epizoo/model.hpp"
#include "epizoo/model_io.hpp"
#include "epizoo/optimizer.hpp"

namespace epizoo {

enum class Engine { Ode, Abs };

enum class EipMode {
    None,
    RandomVaccination,
    RandomDilution,
    RandomBoth,
    OptimalVaccination,
    OptimalDilution,
    OptimalBoth,
};

const char* engine_name(Engine e);
Engine parse_engine(const std::string& s);
const char* eip_mode_name(EipMode m);
EipMode parse_eip_mode(const std::string& s);
const std::vector<EipMode>& all_eip_modes();

struct InitialSpec {
    double susceptible_fraction = 0.8;    ///< of each center's kappa
    std::int64_t infected_seed = 1;
    std::optional<std::size_t> seed_center;  ///< uniform when unset
    double food_fraction = 1.0;              ///< of xi
};

struct OptimizerSpec {
    Objective objective = Objective::Arn;
    ObjectiveWeights weights;
    std::optional<Engine> search_engine;  ///< unset means the scenario engine
    std::int64_t units = 10;          ///< search granularity of each budget
    std::size_t replicates = 5;       ///< search replicates per evaluation
    std::size_t threshold = 1000;
};

struct Scenario {
    std::string name = "scenario";
    EnvironmentGraph graph;
    ParamRanges ranges = ParamRanges::defaults();
    TemperatureSeries temperature;
    std::string graph_source;
    std::string temperature_source;
    Engine engine = Engine::Ode;
    EipMode eip_mode = EipMode::None;
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    double horizon = 8760.0;
    double dt = 1.0;
    InitialSpec initial;
    DefaultBudgets budgets;
    OptimizerSpec optimizer;
    ModelOptions options;
    bool sample_kappa = true;
    double population_scale = 1.0;  ///< multiplies kappa and so the initial populations
    double movement_scale = 1.0;    ///< multiplies every movement rate
    std::optional<double> world_w;
    std::optional<double> world_h;

    void validate() const;
};

/// Everything drawn for one replicate. Identical across EIP modes.
struct ReplicateSetup {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    ModelParams params;
    EnvironmentGraph graph;
    std::vector<CenterState> initial;
    std::size_t seeded_center = 0;
};

ReplicateSetup prepare_replicate(const Scenario& s, std::size_t index);

/// Runs one engine once. Agent snapshots are written only by the agent engine.
Trajectory simulate_trajectory(const Scenario& s, const ReplicateSetup& r, const EipConfiguration& eip,
                               Engine engine, std::uint64_t abs_seed, std::ostream* agent_snapshots = nullptr);

/// Runs one engine once and summarizes it.
EpizooticReport simulate(const Scenario& s, const ReplicateSetup& r, const EipConfiguration& eip,
                         Engine engine, std::uint64_t abs_seed);

/// Agent-engine seed a campaign uses for this replicate.
std::uint64_t abs_seed(const ReplicateSetup& r);

double objective_value(const EpizooticReport& rep, Objective o, const ObjectiveWeights& w);

/// Random placement of `total` units: each unit lands in a uniform center.
std::vector<std::int64_t> multinomial_split(std::int64_t total, std::size_t n, std::uint64_t seed);

std::int64_t vaccination_budget(const Scenario& s, const ReplicateSetup& r);
std::int64_t dilution_budget(const Scenario& s, const ReplicateSetup& r);

struct RunOptions {
    std::size_t workers = 1;
};

/// Winning unit compositions for an optimal-* mode. Each replicate scales
/// them to its own budgets, so one search serves the whole campaign.
struct OptimalPlan {
    EipMode mode = EipMode::None;
    Allocation vaccination;  ///< units per center; empty when not searched
    Allocation dilution;
    std::vector<nlohmann::json> searches;  ///< one manifest per search

    nlohmann::json to_json() const;
};

/// Replicates the search evaluates on: drawn like campaign replicates
/// but from a separate seed stream, so the winner is scored out of sample.
Scenario search_scenario(const Scenario& s);

/// EIP for one replicate from unit compositions; empty compositions mean no event.
EipConfiguration eip_from_units(const Scenario& s, const ReplicateSetup& r, const Allocation& vaccination,
                                const Allocation& dilution);

/// Allocation search for an optimal-* mode. Joint search is coordinate-wise:
/// vaccination, dilution, then one more pass of each.
OptimalPlan plan_optimal(const Scenario& s, EipMode mode, const RunOptions& opts = {});

/// Random modes draw their placement here; optimal modes need the plan.
EipConfiguration build_eip(const Scenario& s, const ReplicateSetup& r, EipMode mode,
                           const OptimalPlan* plan = nullptr);

struct ReplicateResult {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    EipMode mode = EipMode::None;
    bool ok = false;
    std::string error;
    double arn = 0.0;
    double arn_raw = 0.0;
    double arn_full_horizon = 0.0;
    double mi = 0.0;
    double pdi = 0.0;
    double pdi_all = 0.0;
    double dose_wastage = 0.0;
    std::string flags;
};

struct Stat {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation
    double se = 0.0;
};

Stat describe(const std::vector<double>& xs);

struct ModeSummary {
    EipMode mode = EipMode::None;
    std::size_t ok = 0;
    std::size_t failed = 0;
    Stat arn;
    Stat mi;
    Stat pdi;
    Stat pdi_all;
};

struct CampaignResult {
    std::vector<ReplicateResult> runs;  ///< ordered by (mode, replicate index)
    std::vector<ModeSummary> summaries;
    std::vector<OptimalPlan> plans;     ///< one per optimal-* mode requested
    std::size_t failures() const;
};

ReplicateResult run_replicate(const Scenario& s, std::size_t index, EipMode mode,
                              const OptimalPlan* plan = nullptr);
CampaignResult run_campaign(const Scenario& s, const std::vector<EipMode>& modes,
                            const RunOptions& opts = {});

struct SweepAxis {
    std::string name;  ///< population_scale, movement_scale, vaccines_per_individual,
                       ///< dilution_portion, or a parameter name
    std::vector<double> values;
};

struct SweepSpec {
    std::vector<SweepAxis> axes;  ///< one or two
    std::vector<EipMode> modes;   ///< empty means the scenario's mode

    void validate() const;
};

/// Copy of the scenario with one axis set to a value.
Scenario apply_axis(const Scenario& s, const std::string& name, double value);

struct SweepCell {
    std::vector<double> point;
    CampaignResult result;
};

std::vector<SweepCell> run_sweep(const Scenario& s, const SweepSpec& spec, const RunOptions& opts = {});

const std::vector<double>& sensitivity_percents();

struct SensitivityPoint {
    double percent = 0.0;
    CampaignResult result;
};

/// One-at-a-time sweep of the named parameter in the no-EIP mode.
/// "c", "nu", "m" and "rho" scale all three classes together.
std::vector<SensitivityPoint> run_sensitivity(const Scenario& s, const std::string& parameter,
                                              const RunOptions& opts = {});

// ---- input and output (experiment_io.cpp) ----

/// CSV with a header naming "hour" and "temperature". 365 daily rows expand
/// to 8760 hourly values; otherwise rows are hourly.
TemperatureSeries load_temperature(const std::filesystem::path& path);
TemperatureSeries parse_temperature(std::istream& in, const std::string& source);

/// Relative paths resolve against base_dir.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& s);

SweepSpec sweep_from_json(const nlohmann::json& j);
nlohmann::json sweep_to_json(const SweepSpec& spec);

std::string version_string();

/// Comment header for CSV outputs: seed, version and the compact configuration.
std::string csv_header(const Scenario& s, const nlohmann::json& extra = nullptr);

void write_replicates_csv(std::ostream& out, const Scenario& s, const CampaignResult& r);
void write_summary_csv(std::ostream& out, const Scenario& s, const CampaignResult& r);
void write_sweep_csv(std::ostream& out, const Scenario& s, const SweepSpec& spec,
                     const std::vector<SweepCell>& cells);
void write_sensitivity_csv(std::ostream& out, const Scenario& s, const std::string& parameter,
                           const std::vector<SensitivityPoint>& points);

/// Fully resolved configuration; loadable again through scenario_from_json.
nlohmann::json run_manifest(const Scenario& s, const std::string& command,
                            const nlohmann::json& extra = nullptr);

}  // namespace epizoo
