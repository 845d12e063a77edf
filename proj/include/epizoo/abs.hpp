#pragma once

// Stochastic agent-based realization of the metapopulation dynamics.
//
// Agents live at planar positions and belong to the nearest activity center.
// Within a center contacts are well mixed. Each step applies, in order:
//   1. scheduled vaccine drops and uniform-random dilution,
//   2. at most one epidemiological transition per agent, chosen competitively
//      from the per-agent hazards with probability 1 - exp(-H dt),
//   3. births (or starvation deaths) from the logistic term, stochastically rounded,
//   4. food-gradient migration to a neighbor's centroid,
//   5. food and bait-potency bookkeeping.
// All rates are evaluated on the population as it stood after step 1.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "epizoo/eip.hpp"
#include "epizoo/metrics.hpp"
#include "epizoo/model.hpp"
#include "epizoo/rng.hpp"

namespace epizoo {

class InternalInvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Epi : std::uint8_t { Susceptible = 0, Exposed = 1, Infected = 2, Vaccinated = 3 };

const char* epi_name(Epi e);

struct Agent {
    std::int64_t id = 0;
    double x = 0.0;
    double y = 0.0;
    Epi eta = Epi::Susceptible;
    std::size_t center = 0;
};

struct WorldSpec {
    double w = 100.0;
    double h = 100.0;
    EnvironmentGraph graph;

    /// Throws ValidationError unless w, h > 0 and every centroid is inside
    /// the map and distinct from the others.
    void validate() const;
    /// Smallest [0, w] x [0, h] map containing every centroid plus a margin.
    static WorldSpec enclosing(EnvironmentGraph graph, double margin = 5.0);
};

struct InitialCounts {
    std::int64_t S = 0;
    std::int64_t E = 0;
    std::int64_t I = 0;
    std::int64_t V = 0;
    double F = 0.0;
    double C = 0.0;
};

struct SimConfig {
    std::uint64_t rng_seed = 1;
    std::vector<InitialCounts> initial;
    ModelParams params;
    EipConfiguration eip;
    ModelOptions options;

    void validate(std::size_t n_centers) const;
};

/// Nearest centroid in L2; ties go to the lowest index.
std::size_t assign_center(Point position, const EnvironmentGraph& graph);

class AgentEngine {
public:
    AgentEngine(WorldSpec world, SimConfig config);

    /// Advances one step starting at t. Returns the events of this step.
    FlowTally step(double t, double dt, std::optional<double> temperature);

    const std::vector<Agent>& agents() const { return agents_; }
    std::vector<CenterState> center_states() const;
    const std::vector<FlowTally>& center_tallies() const { return tallies_; }
    std::int64_t population() const { return static_cast<std::int64_t>(agents_.size()); }
    const WorldSpec& world() const { return world_; }

    /// Throws InternalInvariantError if any agent's center disagrees with its position.
    void check_assignment() const;

private:
    struct Counts {
        double n[4] = {0, 0, 0, 0};
        double J() const { return n[0] + n[1] + n[2] + n[3]; }
    };

    void apply_vaccination(double t, double dt, FlowTally& step_tally);
    void apply_dilution(double t, double dt, FlowTally& step_tally);
    void compact();
    std::vector<std::vector<std::size_t>> members() const;

    WorldSpec world_;
    SimConfig config_;
    std::vector<Agent> agents_;
    std::vector<char> dead_;
    std::vector<double> food_;
    std::vector<double> stock_;
    std::vector<Rng> rngs_;
    std::vector<FlowTally> tallies_;
    std::int64_t next_id_ = 0;
};

struct AbsRunOptions {
    std::ostream* agent_snapshots = nullptr;  ///< CSV t,id,x,y,eta,center per step when set
    bool check_assignment = false;            ///< verify nearest-center invariant every step
};

/// Runs the engine over [0, horizon]; one snapshot per step of integer counts.
Trajectory run_abs(const SimConfig& config, const WorldSpec& world,
                   const TemperatureSeries& temperature, double horizon, double dt,
                   const AbsRunOptions& options = {});

EpizooticReport run_simulation(const SimConfig& config, const WorldSpec& world,
                               const TemperatureSeries& temperature, double horizon, double dt,
                               const AbsRunOptions& options = {});

}  // namespace epizoo
