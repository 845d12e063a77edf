#include "epizoo/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string_view>

#include "epizoo/rng.hpp"

namespace epizoo {

EnvironmentGraph::EnvironmentGraph(std::vector<CenterSpec> centers, std::vector<Edge> edges)
    : centers_(std::move(centers)), edges_(std::move(edges)) {
    if (centers_.empty()) throw ValidationError("graph must contain at least one center");
    for (std::size_t k = 0; k < centers_.size(); ++k) {
        const auto& c = centers_[k];
        if (!(c.kappa > 0.0))
            throw ValidationError("center " + std::to_string(k) + ": kappa must be > 0");
        if (!(c.lambda >= 0.0))
            throw ValidationError("center " + std::to_string(k) + ": lambda must be >= 0");
        if (!(c.xi > 0.0))
            throw ValidationError("center " + std::to_string(k) + ": xi must be > 0");
    }
    incident_.assign(centers_.size(), {});
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto& edge = edges_[e];
        if (edge.a >= centers_.size() || edge.b >= centers_.size())
            throw ValidationError("edge " + std::to_string(e) + " references an unknown center");
        if (edge.a == edge.b)
            throw ValidationError("edge " + std::to_string(e) + " is a self-loop");
        if (edge.movement_rate && !(*edge.movement_rate >= 0.0))
            throw ValidationError("edge " + std::to_string(e) + ": movement rate must be >= 0");
        if (edge.a > edge.b) std::swap(edge.a, edge.b);
        if (!seen.emplace(edge.a, edge.b).second)
            throw ValidationError("duplicate edge " + std::to_string(edge.a) + "-" +
                                  std::to_string(edge.b));
        incident_[edge.a].push_back(e);
        incident_[edge.b].push_back(e);
    }
}

bool EnvironmentGraph::adjacent(std::size_t i, std::size_t j) const {
    for (auto e : incident_.at(i)) {
        const auto& edge = edges_[e];
        if (edge.a == j || edge.b == j) return true;
    }
    return false;
}

EnvironmentGraph EnvironmentGraph::with_capacities(const std::vector<double>& kappa) const {
    if (kappa.size() != centers_.size())
        throw ValidationError("capacity vector length does not match center count");
    auto centers = centers_;
    for (std::size_t k = 0; k < centers.size(); ++k) centers[k].kappa = kappa[k];
    return EnvironmentGraph(std::move(centers), edges_);
}

double waning_rate_from_annual_fraction(double annual_fraction) {
    return -std::log1p(-annual_fraction) / 8760.0;
}

const std::vector<ParamField>& param_fields() {
    static const std::vector<ParamField> fields = {
        {"beta", &ModelParams::beta},
        {"phi", &ModelParams::phi},
        {"gamma", &ModelParams::gamma},
        {"nu_s", &ModelParams::nu_s},
        {"nu_e", &ModelParams::nu_e},
        {"nu_i", &ModelParams::nu_i},
        {"m_s", &ModelParams::m_s},
        {"m_e", &ModelParams::m_e},
        {"m_i", &ModelParams::m_i},
        {"c_s", &ModelParams::c_s},
        {"c_e", &ModelParams::c_e},
        {"c_i", &ModelParams::c_i},
        {"rho_s", &ModelParams::rho_s},
        {"rho_e", &ModelParams::rho_e},
        {"rho_i", &ModelParams::rho_i},
        {"omega", &ModelParams::omega},
        {"vaccine_lifetime", &ModelParams::vaccine_lifetime},
        {"reference_temperature", &ModelParams::reference_temperature},
        {"temperature_sensitivity", &ModelParams::temperature_sensitivity},
        {"T", &ModelParams::T},
        {"dt", &ModelParams::dt},
    };
    return fields;
}

double& param_ref(ModelParams& p, const std::string& name) {
    for (const auto& f : param_fields())
        if (name == f.name) return p.*(f.member);
    throw ValidationError("unknown parameter '" + name + "'");
}

double param_value(const ModelParams& p, const std::string& name) {
    return param_ref(const_cast<ModelParams&>(p), name);
}

void validate_params(const ModelParams& p) {
    for (const auto& f : param_fields()) {
        const double v = p.*(f.member);
        if (!std::isfinite(v))
            throw ValidationError(std::string("parameter ") + f.name + " is not finite");
        if (std::string_view(f.name) == "reference_temperature") continue;
        if (v < 0.0) throw ValidationError(std::string("parameter ") + f.name + " is negative");
    }
    if (!(p.dt > 0.0)) throw ValidationError("dt must be > 0");
    if (p.T < p.dt) throw ValidationError("T must be >= dt");
    if (!(p.vaccine_lifetime > 0.0)) throw ValidationError("vaccine_lifetime must be > 0");
}

ParamRanges ParamRanges::defaults() {
    ParamRanges r = point(ModelParams{});
    r.fields["rho_s"] = {0.10, 0.50};
    r.fields["rho_e"] = {0.10, 0.50};
    r.fields["rho_i"] = {0.10, 0.50};
    r.fields["vaccine_lifetime"] = {120.0, 720.0};
    r.kappa = {20.0, 150.0};
    return r;
}

ParamRanges ParamRanges::point(const ModelParams& p) {
    ParamRanges r;
    for (const auto& f : param_fields()) {
        const double v = p.*(f.member);
        r.fields[f.name] = {v, v};
    }
    return r;
}

void ParamRanges::validate() const {
    for (const auto& [name, iv] : fields) {
        (void)param_value(ModelParams{}, name);  // rejects unknown names
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
            throw ValidationError("invalid range for " + name);
    }
    if (!(kappa.lo > 0.0) || kappa.lo > kappa.hi) throw ValidationError("invalid range for kappa");
}

ModelParams sample_params(const ParamRanges& ranges, std::uint64_t rng_seed) {
    ranges.validate();
    Rng rng(stream_seed(rng_seed, 0x5A3D));
    ModelParams p;
    // Iterating the fixed field table keeps the draw order independent of the map.
    for (const auto& f : param_fields()) {
        const double u = uniform01(rng);
        auto it = ranges.fields.find(f.name);
        if (it == ranges.fields.end()) continue;
        const auto [lo, hi] = it->second;
        p.*(f.member) = (lo == hi) ? lo : lo + (hi - lo) * u;
    }
    validate_params(p);
    return p;
}

std::vector<double> sample_capacities(const ParamRanges& ranges, std::size_t n_centers,
                                      std::uint64_t rng_seed) {
    ranges.validate();
    Rng rng(stream_seed(rng_seed, 0xCA9A));
    std::vector<double> out(n_centers);
    for (auto& k : out) k = uniform(rng, ranges.kappa.lo, ranges.kappa.hi);
    return out;
}

std::vector<Violation> validate_state(const std::vector<CenterState>& state,
                                      const EnvironmentGraph& graph) {
    std::vector<Violation> out;
    if (state.size() != graph.size()) {
        out.push_back({0, "state has " + std::to_string(state.size()) + " centers, graph has " +
                              std::to_string(graph.size())});
        return out;
    }
    for (std::size_t k = 0; k < state.size(); ++k) {
        const auto& s = state[k];
        auto check = [&](double v, const char* name) {
            if (!std::isfinite(v))
                out.push_back({k, std::string("non-finite ") + name + " at " + std::to_string(k)});
            else if (v < 0.0)
                out.push_back({k, std::string("negative ") + name + " at " + std::to_string(k)});
        };
        check(s.S, "S");
        check(s.E, "E");
        check(s.I, "I");
        check(s.V, "V");
        check(s.F, "F");
        check(s.C, "C");
        if (s.F > graph.center(k).xi)
            out.push_back({k, "food exceeds cap at " + std::to_string(k)});
    }
    return out;
}

std::optional<double> TemperatureSeries::at(double t) const {
    if (hourly.empty()) return std::nullopt;
    const double idx = std::floor(std::max(0.0, t));
    const auto i = static_cast<std::size_t>(std::min<double>(idx, double(hourly.size() - 1)));
    return hourly[i];
}

FlowTally& FlowTally::operator+=(const FlowTally& o) {
    births += o.births;
    natural_deaths += o.natural_deaths;
    rabies_deaths += o.rabies_deaths;
    diluted += o.diluted;
    diluted_infected += o.diluted_infected;
    new_infections += o.new_infections;
    progressions += o.progressions;
    vaccinations += o.vaccinations;
    waned += o.waned;
    uptake_removed += o.uptake_removed;
    doses_dropped += o.doses_dropped;
    doses_consumed += o.doses_consumed;
    doses_wasted += o.doses_wasted;
    doses_decayed += o.doses_decayed;
    migrations += o.migrations;
    return *this;
}

}  // namespace epizoo
