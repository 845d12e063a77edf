#include "epizoo/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace epizoo {

namespace {

std::string join_violations(const std::vector<Violation>& v) {
    std::string s = "invalid state:";
    for (const auto& x : v) s += " " + x.message + ";";
    return s;
}

}  // namespace

StateError::StateError(std::vector<Violation> v)
    : ValidationError(join_violations(v)), violations_(std::move(v)) {}

double movement_flux(double rate, double source_count, double F_dest, double F_source,
                     double J_dest, GradientGuard guard) {
    if (F_dest <= 0.0 || J_dest <= 0.0) {
        if (guard == GradientGuard::Strict)
            throw std::domain_error("movement_flux: degenerate destination food or population");
        return 0.0;
    }
    const double flux = rate * source_count * (F_dest - F_source) / (J_dest * F_dest);
    return flux > 0.0 ? flux : 0.0;
}

double food_production(double F, double lambda, double xi) { return F < xi ? lambda : 0.0; }

std::array<double, 4> edge_rates(const Edge& e, const ModelParams& p, const ModelOptions& o) {
    if (e.movement_rate) {
        const double m = *e.movement_rate;
        return {m, m, m, m};
    }
    return {p.m_s, p.m_e, p.m_i, o.m_v.value_or(p.m_s)};
}

std::vector<CenterFlows> evaluate_flows(const std::vector<CenterState>& state,
                                        const EnvironmentGraph& graph, const ModelParams& p,
                                        std::optional<double> temperature,
                                        const ModelOptions& options) {
    const std::size_t n = graph.size();
    std::vector<CenterFlows> flows(n);
    const double r = decay_rate(temperature, DecayModel::from(p));

    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = state[k];
        const auto& spec = graph.center(k);
        auto& f = flows[k];
        const double J = s.J();

        const double growth = J > 0.0 ? s.F * s.S * (1.0 - J / spec.kappa) : 0.0;
        f.births = std::max(0.0, growth);
        f.starvation = std::max(0.0, -growth);
        f.infection = p.beta * s.S * s.I;
        f.progression = p.phi * s.E;
        f.rabies_death = p.gamma * s.I;
        f.natural_s = p.nu_s * s.S;
        f.natural_e = p.nu_e * s.E;
        f.natural_i = p.nu_i * s.I;
        f.natural_v = p.nu_s * s.V;
        f.uptake_s = uptake_flow(s.C, s.S, J, p.rho_s);
        f.uptake_e = uptake_flow(s.C, s.E, J, p.rho_e);
        f.uptake_i = uptake_flow(s.C, s.I, J, p.rho_i);
        f.waning = p.omega * s.V;
        f.decay = r * s.C;
        f.food_in = food_production(s.F, spec.lambda, spec.xi);
        f.food_out = p.c_s * (s.S + s.V) + p.c_e * s.E + p.c_i * s.I;
    }

    for (const auto& e : graph.edges()) {
        const auto rates = edge_rates(e, p, options);
        const auto& sa = state[e.a];
        const auto& sb = state[e.b];
        const double xa[4] = {sa.S, sa.E, sa.I, sa.V};
        const double xb[4] = {sb.S, sb.E, sb.I, sb.V};
        for (int c = 0; c < 4; ++c) {
            // The same flux leaves the source and enters the destination.
            const double ab = movement_flux(rates[c], xa[c], sb.F, sa.F, sb.J());
            const double ba = movement_flux(rates[c], xb[c], sa.F, sb.F, sa.J());
            flows[e.a].emigration[c] += ab;
            flows[e.b].immigration[c] += ab;
            flows[e.b].emigration[c] += ba;
            flows[e.a].immigration[c] += ba;
        }
    }
    return flows;
}

Derivative assemble(const std::vector<CenterFlows>& flows, const ModelOptions& options) {
    const bool strict = options.uptake == UptakeMode::StrictRemoval;
    Derivative d;
    d.centers.resize(flows.size());
    for (std::size_t k = 0; k < flows.size(); ++k) {
        const auto& f = flows[k];
        auto& r = d.centers[k];
        r.dS = f.births - f.starvation - f.infection + f.immigration[0] - f.emigration[0] -
               f.natural_s - f.uptake_s + f.waning;
        r.dE = f.infection - f.progression + f.immigration[1] - f.emigration[1] - f.natural_e -
               (strict ? f.uptake_e : 0.0);
        r.dI = f.progression + f.immigration[2] - f.emigration[2] - f.rabies_death - f.natural_i -
               (strict ? f.uptake_i : 0.0);
        r.dV = f.uptake_s + f.immigration[3] - f.emigration[3] - f.waning - f.natural_v;
        r.dF = f.food_in - f.food_out;
        r.dC = -(f.uptake_s + f.uptake_e + f.uptake_i) - f.decay;
    }
    return d;
}

Derivative rhs(const std::vector<CenterState>& state, const EnvironmentGraph& graph,
               const ModelParams& params, double /*t*/, std::optional<double> temperature,
               const ModelOptions& options) {
    if (auto v = validate_state(state, graph); !v.empty()) throw StateError(std::move(v));
    return assemble(evaluate_flows(state, graph, params, temperature, options), options);
}

namespace {

void apply_drops(std::vector<CenterState>& state, const EipConfiguration& eip, double t, double dt,
                 std::vector<FlowTally>& tallies) {
    const auto doses = scheduled_doses(eip.vaccination, t, dt, state.size());
    for (std::size_t k = 0; k < state.size(); ++k) {
        state[k].C += doses[k];
        tallies[k].doses_dropped += doses[k];
    }
}

void apply_dilution(std::vector<CenterState>& state, const EipConfiguration& eip, double t,
                    double dt, std::vector<FlowTally>& tallies) {
    const auto psi = scheduled_removals(eip.dilution, t, dt, state.size());
    for (std::size_t k = 0; k < state.size(); ++k) {
        auto& s = state[k];
        const auto removed = dilution_removals(psi[k], {s.S, s.E, s.I, s.V});
        s.S = std::max(0.0, s.S - removed.S);
        s.E = std::max(0.0, s.E - removed.E);
        s.I = std::max(0.0, s.I - removed.I);
        s.V = std::max(0.0, s.V - removed.V);
        tallies[k].diluted += removed.total();
        tallies[k].diluted_infected += removed.I;
    }
}

}  // namespace

void apply_events(std::vector<CenterState>& state, const EipConfiguration& eip, double t,
                  double dt, const ModelOptions& options, std::vector<FlowTally>& tallies) {
    if (options.event_order == EventOrder::VaccinationFirst) {
        apply_drops(state, eip, t, dt, tallies);
        apply_dilution(state, eip, t, dt, tallies);
    } else {
        apply_dilution(state, eip, t, dt, tallies);
        apply_drops(state, eip, t, dt, tallies);
    }
}

Trajectory integrate(const std::vector<CenterState>& initial, const EnvironmentGraph& graph,
                     const ModelParams& params, const EipConfiguration& eip,
                     const TemperatureSeries& temperature, double horizon, double dt,
                     const ModelOptions& options) {
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const double ratio = horizon / dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (horizon < 0.0 || std::abs(ratio - double(steps)) > 1e-9 * std::max(1.0, ratio))
        throw ValidationError("horizon must be a nonnegative multiple of dt");
    if (auto v = validate_state(initial, graph); !v.empty()) throw StateError(std::move(v));
    eip.validate(graph.size(), horizon);

    const std::size_t n = graph.size();
    const bool strict = options.uptake == UptakeMode::StrictRemoval;
    Trajectory traj;
    traj.snapshots.reserve(steps + 1);
    traj.snapshots.push_back({0.0, initial, {}});
    std::vector<FlowTally> tallies(n);
    auto state = initial;

    for (std::size_t step = 0; step < steps; ++step) {
        const double t = double(step) * dt;
        apply_events(state, eip, t, dt, options, tallies);
        const auto flows = evaluate_flows(state, graph, params, temperature.at(t), options);
        const auto deriv = assemble(flows, options);

        for (std::size_t k = 0; k < n; ++k) {
            auto& s = state[k];
            const auto& d = deriv.centers[k];
            const auto& f = flows[k];
            s.S += dt * d.dS;
            s.E += dt * d.dE;
            s.I += dt * d.dI;
            s.V += dt * d.dV;
            s.F += dt * d.dF;
            s.C += dt * d.dC;
            for (double* x : {&s.S, &s.E, &s.I, &s.V, &s.C}) {
                if (*x < 0.0) {
                    *x = 0.0;
                    ++traj.compartment_clamps;
                }
            }
            const double xi = graph.center(k).xi;
            if (s.F < 0.0) {
                s.F = 0.0;
                ++traj.food_clamps;
            } else if (s.F > xi) {
                s.F = xi;
                ++traj.food_clamps;
            }

            auto& tl = tallies[k];
            tl.births += dt * f.births;
            tl.natural_deaths += dt * (f.starvation + f.natural_s + f.natural_e + f.natural_i +
                                       f.natural_v);
            tl.rabies_deaths += dt * f.rabies_death;
            tl.new_infections += dt * f.infection;
            tl.progressions += dt * f.progression;
            tl.vaccinations += dt * f.uptake_s;
            tl.waned += dt * f.waning;
            tl.doses_consumed += dt * (f.uptake_s + f.uptake_e + f.uptake_i);
            tl.doses_wasted += dt * (f.uptake_e + f.uptake_i);
            tl.doses_decayed += dt * f.decay;
            if (strict) tl.uptake_removed += dt * (f.uptake_e + f.uptake_i);
            for (int c = 0; c < 4; ++c) tl.migrations += dt * f.immigration[c];
        }
        FlowTally total;
        for (const auto& tl : tallies) total += tl;
        traj.snapshots.push_back({double(step + 1) * dt, state, total});
    }
    traj.center_totals = std::move(tallies);
    return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const EnvironmentGraph& graph) {
    out << "t,center_id,S,E,I,V,F,C\n";
    char buf[256];
    for (const auto& snap : traj.snapshots) {
        for (std::size_t k = 0; k < snap.centers.size(); ++k) {
            const auto& c = snap.centers[k];
            std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", snap.t,
                          graph.center(k).id.c_str(), c.S, c.E, c.I, c.V, c.F, c.C);
            out << buf;
        }
    }
}

}  // namespace epizoo
