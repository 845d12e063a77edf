#include "epizoo/model_io.hpp"

#include <fstream>
#include <map>

namespace epizoo {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

namespace {

double number_at(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::size_t resolve_center(const json& ref, const std::map<std::string, std::size_t>& ids) {
    if (ref.is_number_integer()) return ref.get<std::size_t>();
    if (ref.is_string()) {
        auto it = ids.find(ref.get<std::string>());
        if (it == ids.end()) throw ConfigError("edge references unknown center '" +
                                               ref.get<std::string>() + "'");
        return it->second;
    }
    throw ConfigError("edge endpoint must be a center id or index");
}

}  // namespace

EnvironmentGraph graph_from_json(const json& j) {
    if (!j.contains("centers") || !j.at("centers").is_array())
        throw ConfigError("graph: missing 'centers' array");
    std::vector<CenterSpec> centers;
    std::map<std::string, std::size_t> ids;
    for (const auto& c : j.at("centers")) {
        CenterSpec spec;
        spec.id = c.contains("id") ? c.at("id").get<std::string>()
                                   : std::to_string(centers.size());
        spec.kappa = number_at(c, "kappa", spec.kappa);
        spec.lambda = number_at(c, "lambda", spec.lambda);
        spec.xi = number_at(c, "xi", spec.xi);
        if (c.contains("centroid")) {
            const auto& p = c.at("centroid");
            if (!p.is_array() || p.size() != 2) throw ConfigError("centroid must be [x, y]");
            spec.centroid = {p[0].get<double>(), p[1].get<double>()};
        }
        if (!ids.emplace(spec.id, centers.size()).second)
            throw ConfigError("duplicate center id '" + spec.id + "'");
        centers.push_back(std::move(spec));
    }
    std::vector<Edge> edges;
    if (j.contains("edges")) {
        for (const auto& e : j.at("edges")) {
            Edge edge;
            if (e.is_array() && e.size() == 2) {
                edge.a = resolve_center(e[0], ids);
                edge.b = resolve_center(e[1], ids);
            } else if (e.is_object()) {
                edge.a = resolve_center(e.at("a"), ids);
                edge.b = resolve_center(e.at("b"), ids);
                if (e.contains("movement_rate")) edge.movement_rate = e.at("movement_rate").get<double>();
            } else {
                throw ConfigError("edge must be [a, b] or {\"a\", \"b\"}");
            }
            edges.push_back(edge);
        }
    }
    try {
        return EnvironmentGraph(std::move(centers), std::move(edges));
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("graph: ") + e.what());
    }
}

json graph_to_json(const EnvironmentGraph& g) {
    json centers = json::array();
    for (const auto& c : g.centers())
        centers.push_back({{"id", c.id},
                           {"kappa", c.kappa},
                           {"lambda", c.lambda},
                           {"xi", c.xi},
                           {"centroid", {c.centroid.x, c.centroid.y}}});
    json edges = json::array();
    for (const auto& e : g.edges()) {
        json je = {{"a", g.center(e.a).id}, {"b", g.center(e.b).id}};
        if (e.movement_rate) je["movement_rate"] = *e.movement_rate;
        edges.push_back(je);
    }
    return {{"centers", centers}, {"edges", edges}};
}

EnvironmentGraph load_graph(const std::filesystem::path& path) {
    return graph_from_json(read_json_file(path));
}

namespace {

Interval interval_from(const json& v, const std::string& name) {
    if (v.is_number()) return {v.get<double>(), v.get<double>()};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("parameter '" + name + "' must be a number or [lo, hi]");
}

}  // namespace

ParamRanges ranges_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("parameter ranges must be a JSON object");
    ParamRanges r = ParamRanges::defaults();
    static const std::map<std::string, std::vector<std::string>> aliases = {
        {"nu", {"nu_s", "nu_e", "nu_i"}},
        {"m", {"m_s", "m_e", "m_i"}},
        {"c", {"c_s", "c_e", "c_i"}},
        {"rho", {"rho_s", "rho_e", "rho_i"}},
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "kappa") {
            r.kappa = interval_from(value, key);
        } else if (key == "omega_annual") {
            auto iv = interval_from(value, key);
            r.fields["omega"] = {waning_rate_from_annual_fraction(iv.lo),
                                 waning_rate_from_annual_fraction(iv.hi)};
        } else if (auto it = aliases.find(key); it != aliases.end()) {
            for (const auto& name : it->second) r.fields[name] = interval_from(value, key);
        } else {
            try {
                (void)param_value(ModelParams{}, key);
            } catch (const ValidationError&) {
                throw ConfigError("unknown parameter '" + key + "'");
            }
            r.fields[key] = interval_from(value, key);
        }
    }
    try {
        r.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    return r;
}

json ranges_to_json(const ParamRanges& r) {
    json j = json::object();
    for (const auto& [name, iv] : r.fields) j[name] = {iv.lo, iv.hi};
    j["kappa"] = {r.kappa.lo, r.kappa.hi};
    return j;
}

ParamRanges load_param_ranges(const std::filesystem::path& path) {
    return ranges_from_json(read_json_file(path));
}

json params_to_json(const ModelParams& p) {
    json j = json::object();
    for (const auto& f : param_fields()) j[f.name] = p.*(f.member);
    return j;
}

}  // namespace epizoo
