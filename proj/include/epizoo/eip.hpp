#pragma once

// Intervention policies: timed vaccine drops and timed non-selective dilution.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "epizoo/model.hpp"

namespace epizoo {

struct VaccinationEvent {
    double tau = 0.0;                  ///< hours
    std::vector<std::int64_t> doses;   ///< per center
};

struct DilutionEvent {
    double tau = 0.0;
    std::vector<std::int64_t> removals;  ///< individuals per center
};

struct VaccinationSchedule {
    std::vector<VaccinationEvent> events;
};

struct DilutionSchedule {
    std::vector<DilutionEvent> events;
};

struct EipConfiguration {
    VaccinationSchedule vaccination;
    DilutionSchedule dilution;

    bool empty() const { return vaccination.events.empty() && dilution.events.empty(); }
    /// Throws ValidationError unless every event lies in [0, horizon] and
    /// carries n_centers nonnegative amounts.
    void validate(std::size_t n_centers, double horizon) const;

    double total_doses() const;
    double total_removals() const;
};

/// Bait potency loss. The base rate is the half-life rate; temperature
/// scales it linearly around the reference, floored at zero.
struct DecayModel {
    double vaccine_lifetime = 420.0;
    double reference_temperature = 20.0;
    double temperature_sensitivity = 0.03;

    static DecayModel from(const ModelParams& p) {
        return {p.vaccine_lifetime, p.reference_temperature, p.temperature_sensitivity};
    }
};

/// Per-hour potency loss rate at the given temperature; nullopt means the reference.
double decay_rate(std::optional<double> temperature, const DecayModel& decay);

/// Bait consumption by one class: rho * C * X / J, zero when J <= 0.
double uptake_flow(double stock, double class_count, double total, double rho);

/// True when tau falls inside the step [t, t + dt).
bool fires_in_step(double tau, double t, double dt);

struct TimedAmount {
    double tau = 0.0;
    double amount = 0.0;
};

/// Sum of amounts scheduled in the step starting at t.
double dirac_allocation(double t, std::span<const TimedAmount> schedule, double dt = 1.0);

/// Per-center totals of every event in the step starting at t.
std::vector<double> scheduled_doses(const VaccinationSchedule& s, double t, double dt,
                                    std::size_t n_centers);
std::vector<double> scheduled_removals(const DilutionSchedule& s, double t, double dt,
                                       std::size_t n_centers);

struct ClassCounts {
    double S = 0.0;
    double E = 0.0;
    double I = 0.0;
    double V = 0.0;

    double total() const { return S + E + I + V; }
};

/// Proportional split of min(psi, J) removals over the classes.
ClassCounts dilution_removals(double psi, const ClassCounts& counts);

/// The default budgets: one dose per individual and 5% of each center removed.
struct DefaultBudgets {
    double vaccines_per_individual = 1.0;
    double dilution_portion = 0.05;
    double tau_vaccination = 0.0;
    double tau_dilution = 0.0;
};

/// Per-center proportional schedules built from the initial populations.
VaccinationSchedule proportional_vaccination(const std::vector<CenterState>& initial,
                                             double vaccines_per_individual, double tau);
DilutionSchedule proportional_dilution(const std::vector<CenterState>& initial,
                                       double dilution_portion, double tau);
EipConfiguration default_eip(const std::vector<CenterState>& initial,
                             const DefaultBudgets& budgets = {});

nlohmann::json eip_to_json(const EipConfiguration& eip);
EipConfiguration eip_from_json(const nlohmann::json& j);

}  // namespace epizoo
