#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "epizoo/experiment.hpp"

#ifndef EPIZOO_VERSION
#define EPIZOO_VERSION "dev"
#endif

namespace epizoo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

}  // namespace

TemperatureSeries parse_temperature(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    int hour_col = -1, temp_col = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cols = split_csv(t);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (cols[i] == "hour" || cols[i] == "day") hour_col = int(i);
            if (cols[i] == "temperature") temp_col = int(i);
        }
        break;
    }
    if (temp_col < 0 || hour_col < 0)
        throw ConfigError(source + ": header must name the hour and temperature columns");

    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cols = split_csv(t);
        const std::string where = source + ": row " + std::to_string(line_no);
        if (std::size_t(temp_col) >= cols.size() || cols[temp_col].empty())
            throw ConfigError(where + " has no temperature value");
        double v;
        try {
            std::size_t used = 0;
            v = std::stod(cols[temp_col], &used);
            if (used != cols[temp_col].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError(where + " has a malformed temperature '" + cols[temp_col] + "'");
        }
        if (!std::isfinite(v)) throw ConfigError(where + " has a non-finite temperature");
        values.push_back(v);
    }
    if (values.empty()) throw ConfigError(source + ": no temperature rows");

    TemperatureSeries series;
    series.provenance = source;
    if (values.size() == 365) {
        series.hourly.reserve(8760);
        for (double v : values) series.hourly.insert(series.hourly.end(), 24, v);
    } else {
        series.hourly = std::move(values);
    }
    return series;
}

TemperatureSeries load_temperature(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open temperature file " + path.string());
    return parse_temperature(in, path.string());
}

Scenario scenario_from_json(const json& j, const fs::path& base_dir) {
    try {
        Scenario s;
        s.name = get_or<std::string>(j, "name", s.name);

        if (!j.contains("graph")) throw ConfigError("scenario needs a graph");
        if (j["graph"].is_string()) {
            const auto p = resolve(base_dir, j["graph"].get<std::string>());
            s.graph = load_graph(p);
            s.graph_source = p.string();
        } else {
            s.graph = graph_from_json(j["graph"]);
            s.graph_source = "inline";
        }

        if (j.contains("params")) {
            if (j["params"].is_string())
                s.ranges = load_param_ranges(resolve(base_dir, j["params"].get<std::string>()));
            else
                s.ranges = ranges_from_json(j["params"]);
        }

        if (j.contains("temperature") && !j["temperature"].is_null()) {
            const auto p = resolve(base_dir, j["temperature"].get<std::string>());
            s.temperature = load_temperature(p);
            s.temperature_source = fs::absolute(p).lexically_normal().string();
        }

        s.engine = parse_engine(get_or<std::string>(j, "engine", "ode"));
        s.eip_mode = parse_eip_mode(get_or<std::string>(j, "eip_mode", "none"));
        s.replicates = get_or<std::size_t>(j, "replicates", s.replicates);
        s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
        s.horizon = get_or<double>(j, "horizon", s.horizon);
        s.dt = get_or<double>(j, "dt", s.dt);
        s.population_scale = get_or<double>(j, "population_scale", s.population_scale);
        s.movement_scale = get_or<double>(j, "movement_scale", s.movement_scale);
        s.sample_kappa = get_or<bool>(j, "sample_kappa", s.sample_kappa);

        if (j.contains("initial")) {
            const auto& i = j["initial"];
            s.initial.susceptible_fraction = get_or<double>(i, "susceptible_fraction", s.initial.susceptible_fraction);
            s.initial.infected_seed = get_or<std::int64_t>(i, "infected_seed", s.initial.infected_seed);
            s.initial.food_fraction = get_or<double>(i, "food_fraction", s.initial.food_fraction);
            if (i.contains("seed_center") && !i["seed_center"].is_null())
                s.initial.seed_center = i["seed_center"].get<std::size_t>();
        }
        if (j.contains("eip_defaults")) {
            const auto& b = j["eip_defaults"];
            s.budgets.vaccines_per_individual = get_or<double>(b, "vaccines_per_individual", s.budgets.vaccines_per_individual);
            s.budgets.dilution_portion = get_or<double>(b, "dilution_portion", s.budgets.dilution_portion);
            s.budgets.tau_vaccination = get_or<double>(b, "tau_vaccination", s.budgets.tau_vaccination);
            s.budgets.tau_dilution = get_or<double>(b, "tau_dilution", s.budgets.tau_dilution);
        }
        if (j.contains("optimizer")) {
            const auto& o = j["optimizer"];
            try {
                s.optimizer.objective = parse_objective(get_or<std::string>(o, "objective", "arn"));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            if (o.contains("weights")) {
                const auto& w = o["weights"];
                s.optimizer.weights = {get_or<double>(w, "arn", 1.0), get_or<double>(w, "mi", 0.0),
                                       get_or<double>(w, "pdi", 0.0)};
            }
            if (o.contains("search_engine") && !o["search_engine"].is_null())
                s.optimizer.search_engine = parse_engine(o["search_engine"].get<std::string>());
            s.optimizer.units = get_or<std::int64_t>(o, "units", s.optimizer.units);
            s.optimizer.replicates = get_or<std::size_t>(o, "replicates", s.optimizer.replicates);
            s.optimizer.threshold = get_or<std::size_t>(o, "threshold", s.optimizer.threshold);
        }
        if (j.contains("options")) {
            const auto& o = j["options"];
            s.options.uptake = get_or<bool>(o, "strict_uptake", false) ? UptakeMode::StrictRemoval
                                                                       : UptakeMode::DoseWastage;
            const auto order = get_or<std::string>(o, "event_order", "vaccination-first");
            if (order == "vaccination-first")
                s.options.event_order = EventOrder::VaccinationFirst;
            else if (order == "dilution-first")
                s.options.event_order = EventOrder::DilutionFirst;
            else
                throw ConfigError("unknown event_order '" + order + "'");
            if (o.contains("m_v") && !o["m_v"].is_null()) s.options.m_v = o["m_v"].get<double>();
        }
        if (j.contains("world")) {
            const auto& w = j["world"];
            if (w.contains("w")) s.world_w = w["w"].get<double>();
            if (w.contains("h")) s.world_h = w["h"].get<double>();
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const fs::path& path) {
    return scenario_from_json(read_json_file(path), path.parent_path());
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["graph"] = graph_to_json(s.graph);
    j["params"] = ranges_to_json(s.ranges);
    j["temperature"] = s.temperature_source.empty() ? json(nullptr) : json(s.temperature_source);
    j["engine"] = engine_name(s.engine);
    j["eip_mode"] = eip_mode_name(s.eip_mode);
    j["replicates"] = s.replicates;
    j["seed"] = s.seed;
    j["horizon"] = s.horizon;
    j["dt"] = s.dt;
    j["population_scale"] = s.population_scale;
    j["movement_scale"] = s.movement_scale;
    j["sample_kappa"] = s.sample_kappa;
    j["initial"] = {{"susceptible_fraction", s.initial.susceptible_fraction},
                    {"infected_seed", s.initial.infected_seed},
                    {"food_fraction", s.initial.food_fraction},
                    {"seed_center", s.initial.seed_center ? json(*s.initial.seed_center) : json(nullptr)}};
    j["eip_defaults"] = {{"vaccines_per_individual", s.budgets.vaccines_per_individual},
                         {"dilution_portion", s.budgets.dilution_portion},
                         {"tau_vaccination", s.budgets.tau_vaccination},
                         {"tau_dilution", s.budgets.tau_dilution}};
    j["optimizer"] = {{"objective", objective_name(s.optimizer.objective)},
                      {"weights",
                       {{"arn", s.optimizer.weights.arn},
                        {"mi", s.optimizer.weights.mi},
                        {"pdi", s.optimizer.weights.pdi}}},
                      {"search_engine",
                       s.optimizer.search_engine ? json(engine_name(*s.optimizer.search_engine)) : json(nullptr)},
                      {"units", s.optimizer.units},
                      {"replicates", s.optimizer.replicates},
                      {"threshold", s.optimizer.threshold}};
    j["options"] = {{"strict_uptake", s.options.uptake == UptakeMode::StrictRemoval},
                    {"event_order",
                     s.options.event_order == EventOrder::VaccinationFirst ? "vaccination-first" : "dilution-first"},
                    {"m_v", s.options.m_v ? json(*s.options.m_v) : json(nullptr)}};
    if (s.world_w || s.world_h) {
        json w = json::object();
        if (s.world_w) w["w"] = *s.world_w;
        if (s.world_h) w["h"] = *s.world_h;
        j["world"] = w;
    }
    return j;
}

SweepSpec sweep_from_json(const json& j) {
    try {
        SweepSpec spec;
        for (const auto& a : j.at("axes")) spec.axes.push_back({a.at("name").get<std::string>(), a.at("values").get<std::vector<double>>()});
        if (j.contains("modes")) {
            const auto& m = j["modes"];
            if (m.is_string() && m.get<std::string>() == "all")
                spec.modes = all_eip_modes();
            else
                for (const auto& x : m) spec.modes.push_back(parse_eip_mode(x.get<std::string>()));
        }
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("sweep: ") + e.what());
    }
}

json sweep_to_json(const SweepSpec& spec) {
    json axes = json::array();
    for (const auto& a : spec.axes) axes.push_back({{"name", a.name}, {"values", a.values}});
    json modes = json::array();
    for (auto m : spec.modes) modes.push_back(eip_mode_name(m));
    return {{"axes", axes}, {"modes", modes}};
}

std::string version_string() { return EPIZOO_VERSION; }

std::string csv_header(const Scenario& s, const json& extra) {
    json cfg = scenario_to_json(s);
    if (!extra.is_null()) cfg["run"] = extra;
    return "# seed=" + std::to_string(s.seed) + "\n# version=" + version_string() + "\n# config=" + cfg.dump() + "\n";
}

void write_replicates_csv(std::ostream& out, const Scenario& s, const CampaignResult& r) {
    out << csv_header(s);
    out << "run_id,mode,replicate,seed,scenario,ok,arn,arn_raw,arn_full_horizon,mi,pdi,pdi_all,dose_wastage,flags,error\n";
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        const auto& x = r.runs[i];
        out << i << ',' << eip_mode_name(x.mode) << ',' << x.index << ',' << x.seed << ',' << quoted(s.name) << ','
            << (x.ok ? 1 : 0) << ',' << num(x.arn) << ',' << num(x.arn_raw) << ',' << num(x.arn_full_horizon) << ','
            << num(x.mi) << ',' << num(x.pdi) << ',' << num(x.pdi_all) << ',' << num(x.dose_wastage) << ','
            << quoted(x.flags) << ',' << quoted(x.error) << '\n';
    }
}

namespace {

void stat_cells(std::ostream& out, const Stat& st) { out << ',' << num(st.mean) << ',' << num(st.std) << ',' << num(st.se); }

}  // namespace

void write_summary_csv(std::ostream& out, const Scenario& s, const CampaignResult& r) {
    out << csv_header(s);
    out << "mode,ok,failed,arn_mean,arn_std,arn_se,mi_mean,mi_std,mi_se,pdi_mean,pdi_std,pdi_se,pdi_all_mean,pdi_all_std,pdi_all_se\n";
    for (const auto& m : r.summaries) {
        out << eip_mode_name(m.mode) << ',' << m.ok << ',' << m.failed;
        stat_cells(out, m.arn);
        stat_cells(out, m.mi);
        stat_cells(out, m.pdi);
        stat_cells(out, m.pdi_all);
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const Scenario& s, const SweepSpec& spec, const std::vector<SweepCell>& cells) {
    out << csv_header(s, sweep_to_json(spec));
    for (const auto& a : spec.axes) out << a.name << ',';
    out << "mode,metric,n,mean,std,se\n";
    for (const auto& c : cells) {
        for (const auto& m : c.result.summaries) {
            const std::pair<const char*, const Stat*> metrics[] = {
                {"arn", &m.arn}, {"mi", &m.mi}, {"pdi", &m.pdi}, {"pdi_all", &m.pdi_all}};
            for (const auto& [name, st] : metrics) {
                for (double v : c.point) out << num(v) << ',';
                out << eip_mode_name(m.mode) << ',' << name << ',' << m.ok;
                stat_cells(out, *st);
                out << '\n';
            }
        }
    }
}

void write_sensitivity_csv(std::ostream& out, const Scenario& s, const std::string& parameter,
                           const std::vector<SensitivityPoint>& points) {
    out << csv_header(s, json{{"sensitivity", parameter}});
    out << "parameter,percent,n,arn_mean,arn_std,arn_se,mi_mean,mi_std,mi_se,pdi_mean,pdi_std,pdi_se\n";
    for (const auto& p : points) {
        const auto& m = p.result.summaries.at(0);
        out << parameter << ',' << num(p.percent) << ',' << m.ok;
        stat_cells(out, m.arn);
        stat_cells(out, m.mi);
        stat_cells(out, m.pdi);
        out << '\n';
    }
}

json run_manifest(const Scenario& s, const std::string& command, const json& extra) {
    json j = scenario_to_json(s);
    j["command"] = command;
    j["version"] = version_string();
    if (!extra.is_null()) j["run"] = extra;
    return j;
}

}  // namespace epizoo
