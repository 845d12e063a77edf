#pragma once

// Epizootic spread metrics over a trajectory: ARN, MI and PDI.

#include <optional>
#include <string>
#include <vector>

#include "epizoo/model.hpp"

namespace epizoo {

/// Whole-population totals at one step. Tallies are cumulative from t=0.
struct AggregatePoint {
    double t = 0.0;
    double S = 0.0;
    double E = 0.0;
    double I = 0.0;
    double V = 0.0;
    double J = 0.0;
    double births = 0.0;
    double natural_deaths = 0.0;
    double rabies_deaths = 0.0;
    double diluted = 0.0;
    double diluted_infected = 0.0;
    double uptake_removed = 0.0;
    double new_infections = 0.0;
};

using AggregateSeries = std::vector<AggregatePoint>;

AggregateSeries aggregate(const Trajectory& traj);

/// Stepwise reproduction estimate (I_curr - I_prev + removed_delta) / I_prev;
/// nullopt when I_prev is zero.
std::optional<double> r_t(double I_prev, double I_curr, double removed_delta);

/// What counts as removed in the R_t numerator.
enum class RemovalMode {
    RabiesDeaths,
    RabiesDeathsAndDilutedInfected,
};

struct ArnResult {
    double value = 0.0;         ///< windowed mean over defined steps, floored at 0
    double raw = 0.0;           ///< windowed mean before flooring
    double full_horizon = 0.0;  ///< sum of defined R_t over every step, floored at 0
    std::size_t defined_steps = 0;
    bool no_infection = false;  ///< no step had I(t-1) > 0
};

ArnResult arn(const AggregateSeries& series, RemovalMode mode = RemovalMode::RabiesDeaths);

/// Peak infected count divided by the initial population, capped at 1.
double mi(const AggregateSeries& series, double J0);

enum class PdiMode { DiseaseOnly, AllDeaths };

/// Deaths at the final step over everyone ever alive (initial plus births).
/// AllDeaths counts natural deaths, dilution and bait removals too.
double pdi(const AggregateSeries& series, double J0, PdiMode mode);

struct MetricOptions {
    RemovalMode removal = RemovalMode::RabiesDeaths;
};

struct EpizooticReport {
    AggregateSeries trajectory;
    double arn = 0.0;
    double arn_raw = 0.0;
    double arn_full_horizon = 0.0;
    double mi = 0.0;
    double pdi = 0.0;      ///< disease deaths only
    double pdi_all = 0.0;  ///< every death and removal
    double dose_wastage = 0.0;
    std::vector<std::string> flags;

    std::string flag_string() const;
};

EpizooticReport summarize(const Trajectory& traj, const MetricOptions& options = {});

}  // namespace epizoo
