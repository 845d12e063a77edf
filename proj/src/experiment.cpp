#include "epizoo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "epizoo/ode.hpp"
#include "epizoo/rng.hpp"

namespace epizoo {

namespace {

constexpr std::uint64_t kParamStream = 1;
constexpr std::uint64_t kKappaStream = 2;
constexpr std::uint64_t kSeedCenterStream = 3;
constexpr std::uint64_t kRandomVaccStream = 4;
constexpr std::uint64_t kRandomDilStream = 5;
constexpr std::uint64_t kSearchStream = 6;
constexpr std::uint64_t kAbsStream = 7;

const std::vector<std::pair<EipMode, const char*>>& mode_names() {
    static const std::vector<std::pair<EipMode, const char*>> v = {
        {EipMode::None, "none"},
        {EipMode::RandomVaccination, "random-vaccination"},
        {EipMode::RandomDilution, "random-dilution"},
        {EipMode::RandomBoth, "random-both"},
        {EipMode::OptimalVaccination, "optimal-vaccination"},
        {EipMode::OptimalDilution, "optimal-dilution"},
        {EipMode::OptimalBoth, "optimal-both"},
    };
    return v;
}

/// Field names an alias stands for; a plain field maps to itself.
std::vector<std::string> expand_param(const std::string& name) {
    static const std::map<std::string, std::vector<std::string>> aliases = {
        {"nu", {"nu_s", "nu_e", "nu_i"}},
        {"m", {"m_s", "m_e", "m_i"}},
        {"c", {"c_s", "c_e", "c_i"}},
        {"rho", {"rho_s", "rho_e", "rho_i"}},
    };
    if (auto it = aliases.find(name); it != aliases.end()) return it->second;
    for (const auto& f : param_fields())
        if (name == f.name) return {name};
    throw ConfigError("unknown parameter '" + name + "'");
}

}  // namespace

const char* engine_name(Engine e) { return e == Engine::Ode ? "ode" : "abs"; }

Engine parse_engine(const std::string& s) {
    if (s == "ode") return Engine::Ode;
    if (s == "abs") return Engine::Abs;
    throw ConfigError("unknown engine '" + s + "' (expected ode or abs)");
}

const char* eip_mode_name(EipMode m) {
    for (const auto& [mode, name] : mode_names())
        if (mode == m) return name;
    return "?";
}

EipMode parse_eip_mode(const std::string& s) {
    for (const auto& [mode, name] : mode_names())
        if (s == name) return mode;
    throw ConfigError("unknown eip_mode '" + s + "'");
}

const std::vector<EipMode>& all_eip_modes() {
    static const std::vector<EipMode> v = [] {
        std::vector<EipMode> out;
        for (const auto& [mode, name] : mode_names()) out.push_back(mode);
        return out;
    }();
    return v;
}

void Scenario::validate() const {
    if (graph.size() == 0) throw ConfigError("scenario has no centers");
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    if (!(dt > 0.0) || !(horizon >= 0.0)) throw ConfigError("horizon and dt must be positive");
    try {
        ranges.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (initial.susceptible_fraction < 0.0 || initial.infected_seed < 0 || initial.food_fraction < 0.0 ||
        initial.food_fraction > 1.0)
        throw ConfigError("invalid initial conditions");
    if (initial.seed_center && *initial.seed_center >= graph.size())
        throw ConfigError("seed_center out of range");
    if (!(population_scale > 0.0) || movement_scale < 0.0)
        throw ConfigError("population_scale must be > 0 and movement_scale >= 0");
    if (budgets.vaccines_per_individual < 0.0 || budgets.dilution_portion < 0.0 ||
        budgets.dilution_portion > 1.0)
        throw ConfigError("invalid EIP budgets");
    if (optimizer.units < 1 || optimizer.replicates < 1) throw ConfigError("invalid optimizer settings");
    for (double v : temperature.hourly)
        if (!std::isfinite(v)) throw ConfigError("temperature series has non-finite values");
    if (!temperature.hourly.empty() && double(temperature.hourly.size()) < horizon)
        throw ConfigError("temperature series covers " + std::to_string(temperature.hourly.size()) +
                          " hours, shorter than the horizon");
}

ReplicateSetup prepare_replicate(const Scenario& s, std::size_t index) {
    ReplicateSetup r;
    r.index = index;
    r.seed = stream_seed(s.seed, index);
    const std::size_t n = s.graph.size();

    r.params = sample_params(s.ranges, stream_seed(r.seed, kParamStream));
    r.params.T = s.horizon;
    r.params.dt = s.dt;
    r.params.m_s *= s.movement_scale;
    r.params.m_e *= s.movement_scale;
    r.params.m_i *= s.movement_scale;

    std::vector<double> kappa = s.sample_kappa
                                    ? sample_capacities(s.ranges, n, stream_seed(r.seed, kKappaStream))
                                    : std::vector<double>{};
    if (!s.sample_kappa)
        for (const auto& c : s.graph.centers()) kappa.push_back(c.kappa);
    for (auto& k : kappa) k *= s.population_scale;

    auto centers = s.graph.centers();
    for (std::size_t k = 0; k < n; ++k) centers[k].kappa = kappa[k];
    auto edges = s.graph.edges();
    for (auto& e : edges)
        if (e.movement_rate) e.movement_rate = *e.movement_rate * s.movement_scale;
    r.graph = EnvironmentGraph(std::move(centers), std::move(edges));

    if (s.initial.seed_center) {
        r.seeded_center = *s.initial.seed_center;
    } else {
        Rng rng(stream_seed(r.seed, kSeedCenterStream));
        r.seeded_center = uniform_index(rng, n);
    }
    r.initial.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto& c = r.initial[k];
        c.S = double(std::llround(s.initial.susceptible_fraction * kappa[k]));
        c.F = s.initial.food_fraction * r.graph.center(k).xi;
        if (k == r.seeded_center) {
            c.I = double(s.initial.infected_seed);
            c.S = std::max(0.0, c.S - c.I);
        }
    }
    return r;
}

Trajectory simulate_trajectory(const Scenario& s, const ReplicateSetup& r, const EipConfiguration& eip,
                               Engine engine, std::uint64_t abs_seed, std::ostream* agent_snapshots) {
    ModelOptions options = s.options;
    if (options.m_v) options.m_v = *options.m_v * s.movement_scale;
    if (engine == Engine::Ode)
        return integrate(r.initial, r.graph, r.params, eip, s.temperature, s.horizon, s.dt, options);

    SimConfig cfg;
    cfg.rng_seed = abs_seed;
    cfg.params = r.params;
    cfg.eip = eip;
    cfg.options = options;
    for (const auto& c : r.initial)
        cfg.initial.push_back({std::llround(c.S), std::llround(c.E), std::llround(c.I), std::llround(c.V), c.F, c.C});
    WorldSpec world = WorldSpec::enclosing(r.graph);
    if (s.world_w) world.w = *s.world_w;
    if (s.world_h) world.h = *s.world_h;
    AbsRunOptions abs_opts;
    abs_opts.agent_snapshots = agent_snapshots;
    return run_abs(cfg, world, s.temperature, s.horizon, s.dt, abs_opts);
}

EpizooticReport simulate(const Scenario& s, const ReplicateSetup& r, const EipConfiguration& eip,
                         Engine engine, std::uint64_t abs_seed) {
    return summarize(simulate_trajectory(s, r, eip, engine, abs_seed));
}

std::uint64_t abs_seed(const ReplicateSetup& r) { return stream_seed(r.seed, kAbsStream); }

double objective_value(const EpizooticReport& rep, Objective o, const ObjectiveWeights& w) {
    switch (o) {
        case Objective::Arn: return rep.arn;
        case Objective::Mi: return rep.mi;
        case Objective::Pdi: return rep.pdi;
        case Objective::Weighted: return w.arn * rep.arn + w.mi * rep.mi + w.pdi * rep.pdi;
    }
    return rep.arn;
}

std::vector<std::int64_t> multinomial_split(std::int64_t total, std::size_t n, std::uint64_t seed) {
    std::vector<std::int64_t> out(n, 0);
    if (n == 0 || total <= 0) return out;
    Rng rng(seed);
    for (std::int64_t u = 0; u < total; ++u) out[uniform_index(rng, n)] += 1;
    return out;
}

namespace {

double initial_population(const ReplicateSetup& r) {
    double j = 0.0;
    for (const auto& c : r.initial) j += c.J();
    return j;
}

VaccinationSchedule vaccination_at(double tau, std::vector<std::int64_t> doses) {
    VaccinationSchedule v;
    if (std::any_of(doses.begin(), doses.end(), [](auto d) { return d > 0; }))
        v.events.push_back({tau, std::move(doses)});
    return v;
}

DilutionSchedule dilution_at(double tau, std::vector<std::int64_t> removals) {
    DilutionSchedule d;
    if (std::any_of(removals.begin(), removals.end(), [](auto x) { return x > 0; }))
        d.events.push_back({tau, std::move(removals)});
    return d;
}

}  // namespace

std::int64_t vaccination_budget(const Scenario& s, const ReplicateSetup& r) {
    return std::llround(s.budgets.vaccines_per_individual * initial_population(r));
}

std::int64_t dilution_budget(const Scenario& s, const ReplicateSetup& r) {
    return std::llround(s.budgets.dilution_portion * initial_population(r));
}

nlohmann::json OptimalPlan::to_json() const {
    return {{"mode", eip_mode_name(mode)},
            {"vaccination_units", vaccination},
            {"dilution_units", dilution},
            {"searches", searches}};
}

Scenario search_scenario(const Scenario& s) {
    Scenario out = s;
    out.seed = stream_seed(s.seed, kSearchStream);
    out.replicates = s.optimizer.replicates;
    return out;
}

namespace {

/// Units scaled pro rata to their share of the full unit budget, so partial
/// compositions during greedy deploy partial budgets.
std::vector<std::int64_t> scale_units(const Allocation& units, std::int64_t unit_budget, std::int64_t total) {
    std::int64_t used = 0;
    for (auto u : units) used += u;
    if (used == 0 || total == 0) return std::vector<std::int64_t>(units.size(), 0);
    return apportion(units, std::llround(double(total) * double(used) / double(unit_budget)));
}

std::int64_t sum_of(const Allocation& a) {
    std::int64_t s = 0;
    for (auto v : a) s += v;
    return s;
}

}  // namespace

EipConfiguration eip_from_units(const Scenario& s, const ReplicateSetup& r, const Allocation& vaccination,
                                const Allocation& dilution) {
    EipConfiguration eip;
    if (!vaccination.empty())
        eip.vaccination = vaccination_at(s.budgets.tau_vaccination,
                                         scale_units(vaccination, std::max<std::int64_t>(1, sum_of(vaccination)),
                                                     vaccination_budget(s, r)));
    if (!dilution.empty())
        eip.dilution = dilution_at(s.budgets.tau_dilution,
                                   scale_units(dilution, std::max<std::int64_t>(1, sum_of(dilution)),
                                               dilution_budget(s, r)));
    return eip;
}

OptimalPlan plan_optimal(const Scenario& s, EipMode mode, const RunOptions& opts) {
    if (mode != EipMode::OptimalVaccination && mode != EipMode::OptimalDilution && mode != EipMode::OptimalBoth)
        throw std::invalid_argument("plan_optimal needs an optimal-* mode");
    const std::size_t n = s.graph.size();
    const auto& os = s.optimizer;
    const Engine engine = os.search_engine.value_or(s.engine);
    const Scenario search = search_scenario(s);

    std::vector<ReplicateSetup> setups;
    for (std::size_t j = 0; j < search.replicates; ++j) setups.push_back(prepare_replicate(search, j));

    OptimalPlan plan;
    plan.mode = mode;

    // Mean objective over the search replicates; the same draws for every
    // candidate, so candidates differ only by allocation.
    auto score = [&](const Allocation& vacc, std::int64_t vacc_units, const Allocation& dil, std::int64_t dil_units) {
        std::vector<double> values(setups.size(), 0.0);
        auto run_one = [&](std::size_t j) {
            const auto& r = setups[j];
            EipConfiguration eip;
            if (!vacc.empty())
                eip.vaccination = vaccination_at(s.budgets.tau_vaccination,
                                                 scale_units(vacc, vacc_units, vaccination_budget(search, r)));
            if (!dil.empty())
                eip.dilution =
                    dilution_at(s.budgets.tau_dilution, scale_units(dil, dil_units, dilution_budget(search, r)));
            values[j] = objective_value(simulate(search, r, eip, engine, abs_seed(r)),
                                        os.objective, os.weights);
        };
        const std::size_t workers = std::min(opts.workers, setups.size());
        if (workers <= 1) {
            for (std::size_t j = 0; j < setups.size(); ++j) run_one(j);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back([&] {
                    for (std::size_t j = next++; j < setups.size(); j = next++) run_one(j);
                });
            for (auto& t : pool) t.join();
        }
        double sum = 0.0;
        for (double v : values) sum += v;
        return sum / double(values.size());
    };

    const std::int64_t units = os.units;
    auto search_kind = [&](EipKind kind) {
        AllocationProblem p;
        p.budget = units;
        p.centers = n;
        p.kind = kind;
        p.brute_force_threshold = os.threshold;
        p.objective = [&, kind](const Allocation& a) {
            return kind == EipKind::Vaccination ? score(a, units, plan.dilution, units)
                                                : score(plan.vaccination, units, a, units);
        };
        const auto result = optimize(p);
        auto manifest = search_manifest(p, result);
        manifest["objective_name"] = objective_name(os.objective);
        manifest["search_engine"] = engine_name(engine);
        manifest["search_replicates"] = setups.size();
        plan.searches.push_back(std::move(manifest));
        (kind == EipKind::Vaccination ? plan.vaccination : plan.dilution) = result.allocation;
    };

    switch (mode) {
        case EipMode::OptimalVaccination: search_kind(EipKind::Vaccination); break;
        case EipMode::OptimalDilution: search_kind(EipKind::Dilution); break;
        default:
            search_kind(EipKind::Vaccination);
            search_kind(EipKind::Dilution);
            search_kind(EipKind::Vaccination);
            search_kind(EipKind::Dilution);
            break;
    }
    return plan;
}

EipConfiguration build_eip(const Scenario& s, const ReplicateSetup& r, EipMode mode, const OptimalPlan* plan) {
    const std::size_t n = r.graph.size();
    EipConfiguration eip;
    switch (mode) {
        case EipMode::None: return eip;
        case EipMode::OptimalVaccination:
        case EipMode::OptimalDilution:
        case EipMode::OptimalBoth:
            if (!plan || plan->mode != mode) throw std::invalid_argument("optimal mode without a matching plan");
            return eip_from_units(s, r, plan->vaccination, plan->dilution);
        default: break;
    }
    if (mode == EipMode::RandomVaccination || mode == EipMode::RandomBoth)
        eip.vaccination = vaccination_at(
            s.budgets.tau_vaccination,
            multinomial_split(vaccination_budget(s, r), n, stream_seed(r.seed, kRandomVaccStream)));
    if (mode == EipMode::RandomDilution || mode == EipMode::RandomBoth)
        eip.dilution = dilution_at(
            s.budgets.tau_dilution,
            multinomial_split(dilution_budget(s, r), n, stream_seed(r.seed, kRandomDilStream)));
    return eip;
}

Stat describe(const std::vector<double>& xs) {
    Stat st;
    if (xs.empty()) return st;
    double sum = 0.0;
    for (double x : xs) sum += x;
    st.mean = sum / double(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - st.mean) * (x - st.mean);
        st.std = std::sqrt(ss / double(xs.size() - 1));
        st.se = st.std / std::sqrt(double(xs.size()));
    }
    return st;
}

std::size_t CampaignResult::failures() const {
    std::size_t f = 0;
    for (const auto& r : runs) f += r.ok ? 0 : 1;
    return f;
}

ReplicateResult run_replicate(const Scenario& s, std::size_t index, EipMode mode, const OptimalPlan* plan) {
    ReplicateResult out;
    out.index = index;
    out.mode = mode;
    out.seed = stream_seed(s.seed, index);
    try {
        const auto setup = prepare_replicate(s, index);
        const auto eip = build_eip(s, setup, mode, plan);
        const auto rep = simulate(s, setup, eip, s.engine, abs_seed(setup));
        out.arn = rep.arn;
        out.arn_raw = rep.arn_raw;
        out.arn_full_horizon = rep.arn_full_horizon;
        out.mi = rep.mi;
        out.pdi = rep.pdi;
        out.pdi_all = rep.pdi_all;
        out.dose_wastage = rep.dose_wastage;
        out.flags = rep.flag_string();
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

CampaignResult run_campaign(const Scenario& s, const std::vector<EipMode>& modes, const RunOptions& opts) {
    s.validate();
    CampaignResult result;
    std::vector<const OptimalPlan*> plan_of(modes.size(), nullptr);
    std::vector<std::string> plan_errors(modes.size());
    for (auto m : modes)
        if (m == EipMode::OptimalVaccination || m == EipMode::OptimalDilution || m == EipMode::OptimalBoth) {
            try {
                result.plans.push_back(plan_optimal(s, m, opts));
            } catch (const std::exception& e) {
                // The mode's replicates fail with this message instead.
                OptimalPlan failed;
                failed.mode = EipMode::None;
                failed.searches.push_back({{"error", e.what()}});
                result.plans.push_back(failed);
            }
        }
    for (std::size_t m = 0, p = 0; m < modes.size(); ++m) {
        if (modes[m] == EipMode::OptimalVaccination || modes[m] == EipMode::OptimalDilution ||
            modes[m] == EipMode::OptimalBoth) {
            const auto& plan = result.plans[p++];
            if (plan.mode == modes[m])
                plan_of[m] = &plan;
            else
                plan_errors[m] = "allocation search failed: " + plan.searches.at(0).at("error").get<std::string>();
        }
    }

    const std::size_t jobs = modes.size() * s.replicates;
    result.runs.resize(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            const std::size_t m = j / s.replicates;
            if (!plan_errors[m].empty()) {
                auto& r = result.runs[j];
                r.index = j % s.replicates;
                r.mode = modes[m];
                r.seed = stream_seed(s.seed, r.index);
                r.error = plan_errors[m];
                continue;
            }
            result.runs[j] = run_replicate(s, j % s.replicates, modes[m], plan_of[m]);
        }
    };
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(opts.workers, jobs));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t m = 0; m < modes.size(); ++m) {
        ModeSummary sum;
        sum.mode = modes[m];
        std::vector<double> arn, mi, pdi, pdi_all;
        for (std::size_t i = 0; i < s.replicates; ++i) {
            const auto& r = result.runs[m * s.replicates + i];
            if (!r.ok) {
                ++sum.failed;
                continue;
            }
            ++sum.ok;
            arn.push_back(r.arn);
            mi.push_back(r.mi);
            pdi.push_back(r.pdi);
            pdi_all.push_back(r.pdi_all);
        }
        sum.arn = describe(arn);
        sum.mi = describe(mi);
        sum.pdi = describe(pdi);
        sum.pdi_all = describe(pdi_all);
        result.summaries.push_back(sum);
    }
    return result;
}

void SweepSpec::validate() const {
    if (axes.empty() || axes.size() > 2) throw ConfigError("a sweep needs one or two axes");
    for (const auto& a : axes)
        if (a.values.empty()) throw ConfigError("sweep axis '" + a.name + "' has no values");
}

Scenario apply_axis(const Scenario& s, const std::string& name, double value) {
    Scenario out = s;
    if (name == "population_scale") {
        out.population_scale = value;
    } else if (name == "movement_scale") {
        out.movement_scale = value;
    } else if (name == "vaccines_per_individual") {
        out.budgets.vaccines_per_individual = value;
    } else if (name == "dilution_portion") {
        out.budgets.dilution_portion = value;
    } else if (name == "kappa") {
        out.ranges.kappa = {value, value};
    } else {
        for (const auto& f : expand_param(name)) out.ranges.fields[f] = {value, value};
    }
    return out;
}

std::vector<SweepCell> run_sweep(const Scenario& s, const SweepSpec& spec, const RunOptions& opts) {
    spec.validate();
    const auto modes = spec.modes.empty() ? std::vector<EipMode>{s.eip_mode} : spec.modes;
    std::vector<SweepCell> cells;
    const auto& a0 = spec.axes[0];
    const std::vector<double> second = spec.axes.size() > 1 ? spec.axes[1].values : std::vector<double>{0.0};
    for (double v0 : a0.values) {
        for (double v1 : second) {
            Scenario cell = apply_axis(s, a0.name, v0);
            SweepCell c;
            c.point.push_back(v0);
            if (spec.axes.size() > 1) {
                cell = apply_axis(cell, spec.axes[1].name, v1);
                c.point.push_back(v1);
            }
            c.result = run_campaign(cell, modes, opts);
            cells.push_back(std::move(c));
        }
    }
    return cells;
}

const std::vector<double>& sensitivity_percents() {
    static const std::vector<double> v = {50.0, 75.0, 100.0, 125.0, 150.0};
    return v;
}

std::vector<SensitivityPoint> run_sensitivity(const Scenario& s, const std::string& parameter,
                                              const RunOptions& opts) {
    std::vector<std::string> fields;
    if (parameter != "kappa") fields = expand_param(parameter);
    std::vector<SensitivityPoint> out;
    for (double pct : sensitivity_percents()) {
        Scenario cell = s;
        cell.eip_mode = EipMode::None;
        const double f = pct / 100.0;
        if (parameter == "kappa") {
            cell.ranges.kappa = {s.ranges.kappa.lo * f, s.ranges.kappa.hi * f};
        } else {
            for (const auto& name : fields) {
                const auto it = s.ranges.fields.find(name);
                const Interval base = it != s.ranges.fields.end()
                                          ? it->second
                                          : Interval{param_value(ModelParams{}, name), param_value(ModelParams{}, name)};
                cell.ranges.fields[name] = {base.lo * f, base.hi * f};
            }
        }
        out.push_back({pct, run_campaign(cell, {EipMode::None}, opts)});
    }
    return out;
}

}  // namespace epizoo
