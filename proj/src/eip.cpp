#include "epizoo/eip.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "epizoo/model_io.hpp"

namespace epizoo {

namespace {

template <class Amounts>
void check_event(double tau, const Amounts& amounts, std::size_t n, double horizon,
                 const char* kind) {
    if (!(tau >= 0.0 && tau <= horizon))
        throw ValidationError(std::string(kind) + " event time outside [0, T]");
    if (amounts.size() != n)
        throw ValidationError(std::string(kind) + " event has " + std::to_string(amounts.size()) +
                              " amounts for " + std::to_string(n) + " centers");
    for (auto a : amounts)
        if (a < 0) throw ValidationError(std::string(kind) + " event has a negative amount");
}

}  // namespace

void EipConfiguration::validate(std::size_t n_centers, double horizon) const {
    for (const auto& e : vaccination.events) check_event(e.tau, e.doses, n_centers, horizon, "vaccination");
    for (const auto& e : dilution.events) check_event(e.tau, e.removals, n_centers, horizon, "dilution");
}

double EipConfiguration::total_doses() const {
    double s = 0.0;
    for (const auto& e : vaccination.events)
        for (auto d : e.doses) s += double(d);
    return s;
}

double EipConfiguration::total_removals() const {
    double s = 0.0;
    for (const auto& e : dilution.events)
        for (auto d : e.removals) s += double(d);
    return s;
}

double decay_rate(std::optional<double> temperature, const DecayModel& decay) {
    const double base = std::numbers::ln2 / decay.vaccine_lifetime;
    if (!temperature) return base;
    const double modifier =
        1.0 + decay.temperature_sensitivity * (*temperature - decay.reference_temperature);
    return base * std::max(0.0, modifier);
}

double uptake_flow(double stock, double class_count, double total, double rho) {
    if (total <= 0.0) return 0.0;
    return rho * stock * class_count / total;
}

bool fires_in_step(double tau, double t, double dt) {
    // Relative slack absorbs representation error in t = k * dt.
    const double eps = 1e-9 * dt;
    return tau >= t - eps && tau < t + dt - eps;
}

double dirac_allocation(double t, std::span<const TimedAmount> schedule, double dt) {
    double total = 0.0;
    for (const auto& e : schedule)
        if (fires_in_step(e.tau, t, dt)) total += e.amount;
    return total;
}

std::vector<double> scheduled_doses(const VaccinationSchedule& s, double t, double dt,
                                    std::size_t n_centers) {
    std::vector<double> out(n_centers, 0.0);
    for (const auto& e : s.events)
        if (fires_in_step(e.tau, t, dt))
            for (std::size_t k = 0; k < n_centers; ++k) out[k] += double(e.doses.at(k));
    return out;
}

std::vector<double> scheduled_removals(const DilutionSchedule& s, double t, double dt,
                                       std::size_t n_centers) {
    std::vector<double> out(n_centers, 0.0);
    for (const auto& e : s.events)
        if (fires_in_step(e.tau, t, dt))
            for (std::size_t k = 0; k < n_centers; ++k) out[k] += double(e.removals.at(k));
    return out;
}

ClassCounts dilution_removals(double psi, const ClassCounts& counts) {
    const double J = counts.total();
    if (psi <= 0.0 || J <= 0.0) return {};
    const double removed = std::min(psi, J);
    const double f = removed / J;
    return {counts.S * f, counts.E * f, counts.I * f, counts.V * f};
}

VaccinationSchedule proportional_vaccination(const std::vector<CenterState>& initial,
                                             double vaccines_per_individual, double tau) {
    VaccinationEvent ev{tau, {}};
    for (const auto& c : initial)
        ev.doses.push_back(std::llround(vaccines_per_individual * c.J()));
    return {{ev}};
}

DilutionSchedule proportional_dilution(const std::vector<CenterState>& initial,
                                       double dilution_portion, double tau) {
    DilutionEvent ev{tau, {}};
    for (const auto& c : initial) ev.removals.push_back(std::llround(dilution_portion * c.J()));
    return {{ev}};
}

EipConfiguration default_eip(const std::vector<CenterState>& initial, const DefaultBudgets& b) {
    return {proportional_vaccination(initial, b.vaccines_per_individual, b.tau_vaccination),
            proportional_dilution(initial, b.dilution_portion, b.tau_dilution)};
}

nlohmann::json eip_to_json(const EipConfiguration& eip) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& e : eip.vaccination.events) v.push_back({{"t", e.tau}, {"amounts", e.doses}});
    nlohmann::json d = nlohmann::json::array();
    for (const auto& e : eip.dilution.events) d.push_back({{"t", e.tau}, {"amounts", e.removals}});
    return {{"vaccination", v}, {"dilution", d}};
}

EipConfiguration eip_from_json(const nlohmann::json& j) {
    EipConfiguration eip;
    auto read = [](const nlohmann::json& ev) {
        if (!ev.contains("t") || !ev.contains("amounts"))
            throw ConfigError("schedule event needs 't' and 'amounts'");
        return std::pair{ev.at("t").get<double>(), ev.at("amounts").get<std::vector<std::int64_t>>()};
    };
    if (j.contains("vaccination"))
        for (const auto& ev : j.at("vaccination")) {
            auto [t, a] = read(ev);
            eip.vaccination.events.push_back({t, std::move(a)});
        }
    if (j.contains("dilution"))
        for (const auto& ev : j.at("dilution")) {
            auto [t, a] = read(ev);
            eip.dilution.events.push_back({t, std::move(a)});
        }
    return eip;
}

}  // namespace epizoo
