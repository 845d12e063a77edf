#pragma once

// Deterministic metapopulation dynamics: right-hand side and forward-Euler integration.

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "epizoo/eip.hpp"
#include "epizoo/model.hpp"

namespace epizoo {

/// Raised when a state snapshot fails validate_state.
class StateError : public ValidationError {
public:
    explicit StateError(std::vector<Violation> v);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

enum class GradientGuard {
    ZeroFlux,  ///< degenerate denominators (F_dest or J_dest zero) give zero flux
    Strict     ///< degenerate denominators throw std::domain_error
};

/// Food-gradient flux from a source center into a destination, individuals per
/// hour: rate * source * (F_dest - F_source) / (J_dest * F_dest), floored at 0.
/// Only the direction toward the richer center is ever positive.
double movement_flux(double rate, double source_count, double F_dest, double F_source,
                     double J_dest, GradientGuard guard = GradientGuard::ZeroFlux);

/// Linear regeneration that switches off at the cap.
double food_production(double F, double lambda, double xi);

/// Continuous flows at one center, individuals (or kg, doses) per hour.
struct CenterFlows {
    double births = 0.0;      ///< positive part of the logistic term
    double starvation = 0.0;  ///< negative part of the logistic term
    double infection = 0.0;
    double progression = 0.0;
    double rabies_death = 0.0;
    double natural_s = 0.0;
    double natural_e = 0.0;
    double natural_i = 0.0;
    double natural_v = 0.0;
    double uptake_s = 0.0;  ///< S to V
    double uptake_e = 0.0;
    double uptake_i = 0.0;
    double waning = 0.0;
    double decay = 0.0;
    double food_in = 0.0;
    double food_out = 0.0;
    double immigration[4] = {0, 0, 0, 0};  ///< S, E, I, V
    double emigration[4] = {0, 0, 0, 0};
};

struct CenterRates {
    double dS = 0.0;
    double dE = 0.0;
    double dI = 0.0;
    double dV = 0.0;
    double dF = 0.0;
    double dC = 0.0;
};

struct Derivative {
    std::vector<CenterRates> centers;
};

/// Movement rate of each class (S, E, I, V) along an edge.
std::array<double, 4> edge_rates(const Edge& e, const ModelParams& p, const ModelOptions& o);

std::vector<CenterFlows> evaluate_flows(const std::vector<CenterState>& state,
                                        const EnvironmentGraph& graph, const ModelParams& params,
                                        std::optional<double> temperature,
                                        const ModelOptions& options = {});

/// Continuous part of the full system. Scheduled drops and dilutions are
/// impulses applied by apply_events, not rates. Throws StateError on an
/// invalid state.
Derivative rhs(const std::vector<CenterState>& state, const EnvironmentGraph& graph,
               const ModelParams& params, double t, std::optional<double> temperature,
               const ModelOptions& options = {});

Derivative assemble(const std::vector<CenterFlows>& flows, const ModelOptions& options);

/// Applies the drops and proportional dilutions scheduled in [t, t + dt),
/// in the configured order. Adds the event counts to the per-center tallies.
void apply_events(std::vector<CenterState>& state, const EipConfiguration& eip, double t,
                  double dt, const ModelOptions& options, std::vector<FlowTally>& tallies);

/// Forward-Euler trajectory with horizon/dt + 1 snapshots. After each step
/// compartments are floored at 0 and food is kept in [0, xi].
Trajectory integrate(const std::vector<CenterState>& initial, const EnvironmentGraph& graph,
                     const ModelParams& params, const EipConfiguration& eip,
                     const TemperatureSeries& temperature, double horizon, double dt,
                     const ModelOptions& options = {});

/// CSV with header t,center_id,S,E,I,V,F,C; one row per (snapshot, center).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const EnvironmentGraph& graph);

}  // namespace epizoo
