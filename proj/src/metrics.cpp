#include "epizoo/metrics.hpp"

#include <algorithm>

namespace epizoo {

AggregateSeries aggregate(const Trajectory& traj) {
    AggregateSeries out;
    out.reserve(traj.snapshots.size());
    for (const auto& snap : traj.snapshots) {
        AggregatePoint p;
        p.t = snap.t;
        for (const auto& c : snap.centers) {
            p.S += c.S;
            p.E += c.E;
            p.I += c.I;
            p.V += c.V;
        }
        p.J = p.S + p.E + p.I + p.V;
        const auto& f = snap.cumulative;
        p.births = f.births;
        p.natural_deaths = f.natural_deaths;
        p.rabies_deaths = f.rabies_deaths;
        p.diluted = f.diluted;
        p.diluted_infected = f.diluted_infected;
        p.uptake_removed = f.uptake_removed;
        p.new_infections = f.new_infections;
        out.push_back(p);
    }
    return out;
}

std::optional<double> r_t(double I_prev, double I_curr, double removed_delta) {
    if (!(I_prev > 0.0)) return std::nullopt;
    return (I_curr - I_prev + removed_delta) / I_prev;
}

ArnResult arn(const AggregateSeries& series, RemovalMode mode) {
    ArnResult out;
    if (series.size() < 2) {
        out.no_infection = true;
        return out;
    }
    auto removed = [mode](const AggregatePoint& p) {
        return mode == RemovalMode::RabiesDeaths ? p.rabies_deaths
                                                 : p.rabies_deaths + p.diluted_infected;
    };
    double sum = 0.0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const auto& prev = series[i - 1];
        const auto& curr = series[i];
        if (auto r = r_t(prev.I, curr.I, removed(curr) - removed(prev))) {
            sum += *r;
            ++out.defined_steps;
        }
    }
    if (out.defined_steps == 0) {
        out.no_infection = true;
        return out;
    }
    out.raw = sum / double(out.defined_steps);
    out.value = std::max(0.0, out.raw);
    out.full_horizon = std::max(0.0, sum / double(series.size() - 1));
    return out;
}

double mi(const AggregateSeries& series, double J0) {
    if (!(J0 > 0.0)) return 0.0;
    double peak = 0.0;
    for (const auto& p : series) peak = std::max(peak, p.I);
    return std::min(1.0, peak / J0);
}

double pdi(const AggregateSeries& series, double J0, PdiMode mode) {
    if (series.empty()) return 0.0;
    const auto& last = series.back();
    const double ever_alive = J0 + last.births;
    if (!(ever_alive > 0.0)) return 0.0;
    double deaths = last.rabies_deaths;
    if (mode == PdiMode::AllDeaths) deaths += last.natural_deaths + last.diluted + last.uptake_removed;
    return std::clamp(deaths / ever_alive, 0.0, 1.0);
}

std::string EpizooticReport::flag_string() const {
    std::string s;
    for (const auto& f : flags) {
        if (!s.empty()) s += ';';
        s += f;
    }
    return s;
}

EpizooticReport summarize(const Trajectory& traj, const MetricOptions& options) {
    EpizooticReport rep;
    rep.trajectory = aggregate(traj);
    if (rep.trajectory.empty()) {
        rep.flags.push_back("empty-trajectory");
        return rep;
    }
    const double J0 = rep.trajectory.front().J;
    const auto a = arn(rep.trajectory, options.removal);
    rep.arn = a.value;
    rep.arn_raw = a.raw;
    rep.arn_full_horizon = a.full_horizon;
    if (a.no_infection) rep.flags.push_back("no-infection");
    double peak = 0.0;
    for (const auto& p : rep.trajectory) peak = std::max(peak, p.I);
    if (J0 > 0.0 && peak > J0) rep.flags.push_back("mi-capped");
    rep.mi = mi(rep.trajectory, J0);
    rep.pdi = pdi(rep.trajectory, J0, PdiMode::DiseaseOnly);
    rep.pdi_all = pdi(rep.trajectory, J0, PdiMode::AllDeaths);
    if (!traj.snapshots.empty()) rep.dose_wastage = traj.snapshots.back().cumulative.doses_wasted;
    if (traj.compartment_clamps > 0) rep.flags.push_back("clamped");
    return rep;
}

}  // namespace epizoo
