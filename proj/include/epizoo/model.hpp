#pragma once

// Domain types shared by the deterministic and agent-based engines.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace epizoo {

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// One activity center: a well-mixed sub-population with its own food supply.
struct CenterSpec {
    std::string id;
    double kappa = 85.0;   ///< carrying capacity, individuals
    double lambda = 0.5;   ///< food production, kg/hour
    double xi = 1.0;       ///< food cap, kg
    Point centroid;
};

/// Undirected adjacency between two centers. A per-edge movement rate, when
/// present, replaces the class rates of every class on this edge.
struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    std::optional<double> movement_rate;
};

/// Activity centers plus the edges along which individuals may disperse.
/// Construction validates the topology; the object is immutable afterwards.
class EnvironmentGraph {
public:
    EnvironmentGraph() = default;
    EnvironmentGraph(std::vector<CenterSpec> centers, std::vector<Edge> edges);

    std::size_t size() const { return centers_.size(); }
    const std::vector<CenterSpec>& centers() const { return centers_; }
    const CenterSpec& center(std::size_t k) const { return centers_.at(k); }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Indices of edges incident to center k.
    const std::vector<std::size_t>& incident(std::size_t k) const { return incident_.at(k); }
    bool adjacent(std::size_t i, std::size_t j) const;

    /// Copy with every carrying capacity replaced.
    EnvironmentGraph with_capacities(const std::vector<double>& kappa) const;

private:
    std::vector<CenterSpec> centers_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> incident_;
};

/// Per-center compartments at one instant. Counts are real-valued; the agent
/// engine derives them by counting agents.
struct CenterState {
    double S = 0.0;
    double E = 0.0;
    double I = 0.0;
    double V = 0.0;
    double F = 0.0;  ///< food, kg
    double C = 0.0;  ///< vaccine stock, doses

    double J() const { return S + E + I + V; }
};

/// Hourly waning rate equivalent to losing `annual_fraction` of immunity per year.
double waning_rate_from_annual_fraction(double annual_fraction);

/// Rate constants. Units are per hour unless noted.
struct ModelParams {
    double beta = 0.15;
    double phi = 5.9e-3;
    double gamma = 9.9e-4;
    double nu_s = 1.4e-5;
    double nu_e = 1.4e-5;
    double nu_i = 1.4e-5;
    double m_s = 0.017;
    double m_e = 0.017;
    double m_i = 0.017;
    double c_s = 7.9e-3;  ///< kg/hour per individual
    double c_e = 7.9e-3;
    double c_i = 7.9e-3;
    double rho_s = 0.3;
    double rho_e = 0.3;
    double rho_i = 0.3;
    double omega = waning_rate_from_annual_fraction(0.28);
    double vaccine_lifetime = 420.0;  ///< bait potency half-life, hours
    double reference_temperature = 20.0;    ///< degC
    double temperature_sensitivity = 0.03;  ///< fractional change per degC
    double T = 8760.0;
    double dt = 1.0;
};

/// Checks rate nonnegativity and the time grid. Throws ValidationError.
void validate_params(const ModelParams& p);

/// Reads and writes a ModelParams field by its table name ("beta", "m_s", ...).
struct ParamField {
    const char* name;
    double ModelParams::*member;
};
const std::vector<ParamField>& param_fields();
double& param_ref(ModelParams& p, const std::string& name);
double param_value(const ModelParams& p, const std::string& name);

/// Knobs that select between readings of the model rather than parameter values.
enum class UptakeMode {
    DoseWastage,   ///< E/I bait uptake consumes doses with no epidemiological effect
    StrictRemoval  ///< E/I bait uptake removes the individual, as the printed system reads
};
enum class EventOrder { VaccinationFirst, DilutionFirst };

struct ModelOptions {
    UptakeMode uptake = UptakeMode::DoseWastage;
    EventOrder event_order = EventOrder::VaccinationFirst;
    std::optional<double> m_v;  ///< vaccinated movement; defaults to m_s
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Inclusive sampling intervals per parameter, plus the carrying-capacity range.
struct ParamRanges {
    std::map<std::string, Interval> fields;
    Interval kappa{20.0, 150.0};

    /// Table defaults: point values where a single value is reported, ranges otherwise.
    static ParamRanges defaults();
    /// Every interval collapsed to the given parameter values.
    static ParamRanges point(const ModelParams& p);
    void validate() const;
};

/// Every field drawn independently and uniformly from its interval. Fields
/// with no interval keep their ModelParams default.
ModelParams sample_params(const ParamRanges& ranges, std::uint64_t rng_seed);

/// Per-center carrying capacities drawn uniformly from ranges.kappa.
std::vector<double> sample_capacities(const ParamRanges& ranges, std::size_t n_centers,
                                      std::uint64_t rng_seed);

struct Violation {
    std::size_t center = 0;
    std::string message;
};

/// Every invariant violation in a state snapshot. Empty means valid.
std::vector<Violation> validate_state(const std::vector<CenterState>& state,
                                      const EnvironmentGraph& graph);

/// Hourly temperatures in degC. Lookups past the end hold the last value;
/// an empty series reports nullopt so callers fall back to the reference.
struct TemperatureSeries {
    std::vector<double> hourly;
    std::string provenance;

    std::optional<double> at(double t) const;
};

/// Additive event counts accumulated over a run.
struct FlowTally {
    double births = 0.0;
    double natural_deaths = 0.0;  ///< background mortality plus starvation
    double rabies_deaths = 0.0;
    double diluted = 0.0;
    double diluted_infected = 0.0;
    double new_infections = 0.0;
    double progressions = 0.0;
    double vaccinations = 0.0;   ///< S to V
    double waned = 0.0;
    double uptake_removed = 0.0;  ///< E/I individuals removed by bait uptake (strict mode)
    double doses_dropped = 0.0;
    double doses_consumed = 0.0;  ///< all classes
    double doses_wasted = 0.0;    ///< consumed by E/I
    double doses_decayed = 0.0;
    double migrations = 0.0;

    FlowTally& operator+=(const FlowTally& o);
};

struct Snapshot {
    double t = 0.0;
    std::vector<CenterState> centers;
    FlowTally cumulative;
};

/// Whole-run output shared by both engines: one snapshot per step, including t=0.
struct Trajectory {
    std::vector<Snapshot> snapshots;
    std::vector<FlowTally> center_totals;  ///< final cumulative tallies per center
    std::size_t compartment_clamps = 0;  ///< post-step floors applied to S,E,I,V or C
    std::size_t food_clamps = 0;         ///< F floored at 0 or capped at xi
};

}  // namespace epizoo
