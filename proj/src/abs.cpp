#include "epizoo/abs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "epizoo/ode.hpp"

namespace epizoo {

const char* epi_name(Epi e) {
    switch (e) {
        case Epi::Susceptible: return "S";
        case Epi::Exposed: return "E";
        case Epi::Infected: return "I";
        case Epi::Vaccinated: return "V";
    }
    return "?";
}

void WorldSpec::validate() const {
    if (!(w > 0.0) || !(h > 0.0)) throw ValidationError("world dimensions must be positive");
    const auto& cs = graph.centers();
    for (std::size_t k = 0; k < cs.size(); ++k) {
        const auto& p = cs[k].centroid;
        if (p.x < 0.0 || p.x > w || p.y < 0.0 || p.y > h)
            throw ValidationError("centroid of center " + std::to_string(k) + " lies outside the map");
        for (std::size_t j = 0; j < k; ++j)
            if (cs[j].centroid.x == p.x && cs[j].centroid.y == p.y)
                throw ValidationError("centers " + std::to_string(j) + " and " + std::to_string(k) +
                                      " share a centroid");
    }
}

WorldSpec WorldSpec::enclosing(EnvironmentGraph graph, double margin) {
    double w = margin, h = margin;
    for (const auto& c : graph.centers()) {
        w = std::max(w, c.centroid.x + margin);
        h = std::max(h, c.centroid.y + margin);
    }
    return {w, h, std::move(graph)};
}

void SimConfig::validate(std::size_t n_centers) const {
    if (initial.size() != n_centers)
        throw ValidationError("initial counts do not match the number of centers");
    for (const auto& c : initial)
        if (c.S < 0 || c.E < 0 || c.I < 0 || c.V < 0 || c.F < 0.0 || c.C < 0.0)
            throw ValidationError("initial counts must be nonnegative");
    validate_params(params);
}

std::size_t assign_center(Point p, const EnvironmentGraph& graph) {
    if (graph.size() == 0) throw ValidationError("assign_center: graph has no centers");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < graph.size(); ++k) {
        const auto& c = graph.center(k).centroid;
        const double d = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

AgentEngine::AgentEngine(WorldSpec world, SimConfig config)
    : world_(std::move(world)), config_(std::move(config)) {
    world_.validate();
    const std::size_t n = world_.graph.size();
    config_.validate(n);
    config_.eip.validate(n, config_.params.T);

    Rng placement(stream_seed(config_.rng_seed, 0));
    for (std::size_t k = 0; k < n; ++k) rngs_.emplace_back(stream_seed(config_.rng_seed, k + 1));
    food_.resize(n);
    stock_.resize(n);
    tallies_.assign(n, {});

    for (std::size_t k = 0; k < n; ++k) {
        const auto& init = config_.initial[k];
        food_[k] = std::min(init.F, world_.graph.center(k).xi);
        stock_[k] = init.C;
        const std::int64_t counts[4] = {init.S, init.E, init.I, init.V};
        for (int c = 0; c < 4; ++c) {
            for (std::int64_t i = 0; i < counts[c]; ++i) {
                // Uniform position inside the center's nearest-centroid cell.
                Point pos = world_.graph.center(k).centroid;
                for (int attempt = 0; attempt < 64; ++attempt) {
                    const Point cand{uniform(placement, 0.0, world_.w), uniform(placement, 0.0, world_.h)};
                    if (assign_center(cand, world_.graph) == k) {
                        pos = cand;
                        break;
                    }
                }
                agents_.push_back({next_id_++, pos.x, pos.y, static_cast<Epi>(c), k});
            }
        }
    }
    dead_.assign(agents_.size(), 0);
}

std::vector<CenterState> AgentEngine::center_states() const {
    std::vector<CenterState> out(world_.graph.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (dead_[i]) continue;
        auto& s = out[agents_[i].center];
        switch (agents_[i].eta) {
            case Epi::Susceptible: s.S += 1; break;
            case Epi::Exposed: s.E += 1; break;
            case Epi::Infected: s.I += 1; break;
            case Epi::Vaccinated: s.V += 1; break;
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k].F = food_[k];
        out[k].C = stock_[k];
    }
    return out;
}

void AgentEngine::check_assignment() const {
    for (const auto& a : agents_)
        if (assign_center({a.x, a.y}, world_.graph) != a.center)
            throw InternalInvariantError("agent " + std::to_string(a.id) +
                                         " is not assigned to its nearest center");
}

std::vector<std::vector<std::size_t>> AgentEngine::members() const {
    std::vector<std::vector<std::size_t>> out(world_.graph.size());
    for (std::size_t i = 0; i < agents_.size(); ++i)
        if (!dead_[i]) out[agents_[i].center].push_back(i);
    return out;
}

void AgentEngine::compact() {
    std::size_t w = 0;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (dead_[i]) continue;
        if (w != i) agents_[w] = agents_[i];
        ++w;
    }
    agents_.resize(w);
    dead_.assign(w, 0);
}

void AgentEngine::apply_vaccination(double t, double dt, FlowTally& step_tally) {
    const auto doses = scheduled_doses(config_.eip.vaccination, t, dt, stock_.size());
    for (std::size_t k = 0; k < stock_.size(); ++k) {
        stock_[k] += doses[k];
        tallies_[k].doses_dropped += doses[k];
        step_tally.doses_dropped += doses[k];
    }
}

void AgentEngine::apply_dilution(double t, double dt, FlowTally& step_tally) {
    const auto psi = scheduled_removals(config_.eip.dilution, t, dt, stock_.size());
    if (std::all_of(psi.begin(), psi.end(), [](double v) { return v <= 0.0; })) return;
    auto by_center = members();
    for (std::size_t k = 0; k < by_center.size(); ++k) {
        auto& pool = by_center[k];
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(psi[k]), pool.size());
        // Partial Fisher-Yates: the first `take` entries are a uniform sample
        // without replacement, blind to epidemiological state.
        for (std::size_t i = 0; i < take; ++i) {
            const auto j = i + uniform_index(rngs_[k], pool.size() - i);
            std::swap(pool[i], pool[j]);
            const auto idx = pool[i];
            dead_[idx] = 1;
            tallies_[k].diluted += 1;
            step_tally.diluted += 1;
            if (agents_[idx].eta == Epi::Infected) {
                tallies_[k].diluted_infected += 1;
                step_tally.diluted_infected += 1;
            }
        }
    }
    compact();
}

FlowTally AgentEngine::step(double t, double dt, std::optional<double> temperature) {
    const auto& graph = world_.graph;
    const auto& p = config_.params;
    const std::size_t n = graph.size();
    const bool strict = config_.options.uptake == UptakeMode::StrictRemoval;
    FlowTally step_tally;
    const std::int64_t n_before = population();

    if (config_.options.event_order == EventOrder::VaccinationFirst) {
        apply_vaccination(t, dt, step_tally);
        apply_dilution(t, dt, step_tally);
    } else {
        apply_dilution(t, dt, step_tally);
        apply_vaccination(t, dt, step_tally);
    }
    const std::int64_t n_after_events = population();

    auto by_center = members();
    std::vector<Counts> counts(n);
    for (std::size_t k = 0; k < n; ++k)
        for (auto idx : by_center[k]) counts[k].n[static_cast<int>(agents_[idx].eta)] += 1;
    const std::vector<double> food0 = food_;
    const std::vector<double> stock0 = stock_;

    // Transitions. Hazard tables per class: {rate, outcome}.
    enum Outcome { ToE, ToI, ToV, ToS, NaturalDeath, RabiesDeath, Wastage };
    struct Hazard {
        double rate;
        Outcome outcome;
    };
    for (std::size_t k = 0; k < n; ++k) {
        const auto& cnt = counts[k];
        const double J = cnt.J();
        if (J <= 0.0) continue;
        const double per_dose = stock0[k] / J;
        const std::vector<Hazard> table[4] = {
            {{p.beta * cnt.n[2], ToE}, {p.rho_s * per_dose, ToV}, {p.nu_s, NaturalDeath}},
            {{p.phi, ToI}, {p.nu_e, NaturalDeath}, {p.rho_e * per_dose, Wastage}},
            {{p.gamma, RabiesDeath}, {p.nu_i, NaturalDeath}, {p.rho_i * per_dose, Wastage}},
            {{p.omega, ToS}, {p.nu_s, NaturalDeath}},
        };
        double total[4], p_any[4];
        for (int c = 0; c < 4; ++c) {
            total[c] = 0.0;
            for (const auto& h : table[c]) total[c] += h.rate;
            p_any[c] = -std::expm1(-total[c] * dt);
        }
        auto& rng = rngs_[k];
        auto& tl = tallies_[k];
        for (auto idx : by_center[k]) {
            auto& a = agents_[idx];
            const int c = static_cast<int>(a.eta);
            if (total[c] <= 0.0) continue;
            const double u = uniform01(rng);
            if (u >= p_any[c]) continue;
            double pick = (u / p_any[c]) * total[c];
            Outcome outcome = table[c].back().outcome;
            for (const auto& h : table[c]) {
                if (pick < h.rate) {
                    outcome = h.outcome;
                    break;
                }
                pick -= h.rate;
            }
            switch (outcome) {
                case ToE:
                    a.eta = Epi::Exposed;
                    tl.new_infections += 1;
                    step_tally.new_infections += 1;
                    break;
                case ToI:
                    a.eta = Epi::Infected;
                    tl.progressions += 1;
                    step_tally.progressions += 1;
                    break;
                case ToV: {
                    if (stock_[k] <= 0.0) break;
                    const double used = std::min(1.0, stock_[k]);
                    stock_[k] -= used;
                    tl.doses_consumed += used;
                    step_tally.doses_consumed += used;
                    a.eta = Epi::Vaccinated;
                    tl.vaccinations += 1;
                    step_tally.vaccinations += 1;
                    break;
                }
                case ToS:
                    a.eta = Epi::Susceptible;
                    tl.waned += 1;
                    step_tally.waned += 1;
                    break;
                case NaturalDeath:
                    dead_[idx] = 1;
                    tl.natural_deaths += 1;
                    step_tally.natural_deaths += 1;
                    break;
                case RabiesDeath:
                    dead_[idx] = 1;
                    tl.rabies_deaths += 1;
                    step_tally.rabies_deaths += 1;
                    break;
                case Wastage: {
                    if (stock_[k] <= 0.0) break;
                    const double used = std::min(1.0, stock_[k]);
                    stock_[k] -= used;
                    tl.doses_consumed += used;
                    tl.doses_wasted += used;
                    step_tally.doses_consumed += used;
                    step_tally.doses_wasted += used;
                    if (strict) {
                        dead_[idx] = 1;
                        tl.uptake_removed += 1;
                        step_tally.uptake_removed += 1;
                    }
                    break;
                }
            }
        }
    }

    // Births and starvation from the logistic term.
    for (std::size_t k = 0; k < n; ++k) {
        const auto& cnt = counts[k];
        const double J = cnt.J();
        if (J <= 0.0) continue;
        const double growth = food0[k] * cnt.n[0] * (1.0 - J / graph.center(k).kappa) * dt;
        auto& rng = rngs_[k];
        auto& tl = tallies_[k];
        if (growth > 0.0) {
            const auto born = stochastic_round(growth, rng);
            const auto& c = graph.center(k).centroid;
            for (std::int64_t b = 0; b < born; ++b) {
                agents_.push_back({next_id_++, c.x, c.y, Epi::Susceptible, k});
                dead_.push_back(0);
                by_center[k].push_back(agents_.size() - 1);
            }
            tl.births += double(born);
            step_tally.births += double(born);
        } else if (growth < 0.0) {
            std::vector<std::size_t> pool;
            for (auto idx : by_center[k])
                if (!dead_[idx] && agents_[idx].eta == Epi::Susceptible) pool.push_back(idx);
            const auto want = stochastic_round(-growth, rng);
            const auto take = std::min<std::size_t>(static_cast<std::size_t>(want), pool.size());
            for (std::size_t i = 0; i < take; ++i) {
                const auto j = i + uniform_index(rng, pool.size() - i);
                std::swap(pool[i], pool[j]);
                dead_[pool[i]] = 1;
            }
            tl.natural_deaths += double(take);
            step_tally.natural_deaths += double(take);
        }
    }

    // Migration along edges toward richer neighbors. Shares are the ODE flux
    // per individual of the class at the source.
    std::vector<std::pair<std::size_t, std::size_t>> moves;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& inc = graph.incident(k);
        if (inc.empty()) continue;
        const double Jk = counts[k].J();
        if (Jk <= 0.0) continue;
        std::vector<std::array<double, 4>> share(inc.size());
        std::array<double, 4> total{0, 0, 0, 0};
        for (std::size_t e = 0; e < inc.size(); ++e) {
            const auto& edge = graph.edges()[inc[e]];
            const std::size_t dst = edge.a == k ? edge.b : edge.a;
            const auto rates = edge_rates(edge, p, config_.options);
            for (int c = 0; c < 4; ++c) {
                const double X = counts[k].n[c];
                const double flux = X > 0.0 ? movement_flux(rates[c], X, food0[dst], food0[k],
                                                             counts[dst].J())
                                            : 0.0;
                share[e][c] = X > 0.0 ? flux / X : 0.0;
                total[c] += share[e][c];
            }
        }
        std::array<double, 4> p_move;
        for (int c = 0; c < 4; ++c) p_move[c] = -std::expm1(-total[c] * dt);
        auto& rng = rngs_[k];
        for (auto idx : by_center[k]) {
            if (dead_[idx]) continue;
            const int c = static_cast<int>(agents_[idx].eta);
            if (total[c] <= 0.0) continue;
            const double u = uniform01(rng);
            if (u >= p_move[c]) continue;
            double pick = (u / p_move[c]) * total[c];
            std::size_t chosen = inc.size() - 1;
            for (std::size_t e = 0; e < inc.size(); ++e) {
                if (pick < share[e][c]) {
                    chosen = e;
                    break;
                }
                pick -= share[e][c];
            }
            const auto& edge = graph.edges()[inc[chosen]];
            moves.emplace_back(idx, edge.a == k ? edge.b : edge.a);
        }
    }
    for (auto [idx, dst] : moves) {
        auto& a = agents_[idx];
        const auto& c = graph.center(dst).centroid;
        a.x = c.x;
        a.y = c.y;
        a.center = assign_center(c, graph);
        tallies_[dst].migrations += 1;
        step_tally.migrations += 1;
    }

    // Food and potency loss, from the post-event snapshot.
    const double r = decay_rate(temperature, DecayModel::from(p));
    for (std::size_t k = 0; k < n; ++k) {
        const auto& spec = graph.center(k);
        const auto& cn = counts[k].n;
        const double eaten = p.c_s * (cn[0] + cn[3]) + p.c_e * cn[1] + p.c_i * cn[2];
        food_[k] = std::clamp(food0[k] + (food_production(food0[k], spec.lambda, spec.xi) - eaten) * dt,
                              0.0, spec.xi);
        const double lost = std::min(stock_[k], r * stock0[k] * dt);
        stock_[k] -= lost;
        tallies_[k].doses_decayed += lost;
        step_tally.doses_decayed += lost;
    }

    compact();

    const double expected = double(n_before) - step_tally.diluted + step_tally.births -
                            step_tally.natural_deaths - step_tally.rabies_deaths -
                            step_tally.uptake_removed;
    if (double(population()) != expected || n_after_events + std::int64_t(step_tally.diluted) != n_before)
        throw InternalInvariantError("agent bookkeeping mismatch at t=" + std::to_string(t));
    return step_tally;
}

Trajectory run_abs(const SimConfig& config, const WorldSpec& world,
                   const TemperatureSeries& temperature, double horizon, double dt,
                   const AbsRunOptions& options) {
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const double ratio = horizon / dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (horizon < 0.0 || std::abs(ratio - double(steps)) > 1e-9 * std::max(1.0, ratio))
        throw ValidationError("horizon must be a nonnegative multiple of dt");

    AgentEngine engine(world, config);
    Trajectory traj;
    traj.snapshots.reserve(steps + 1);
    FlowTally cumulative;
    traj.snapshots.push_back({0.0, engine.center_states(), cumulative});
    if (options.agent_snapshots) *options.agent_snapshots << "t,id,x,y,eta,center\n";
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = double(s) * dt;
        cumulative += engine.step(t, dt, temperature.at(t));
        const double t_next = double(s + 1) * dt;
        traj.snapshots.push_back({t_next, engine.center_states(), cumulative});
        if (options.check_assignment) engine.check_assignment();
        if (options.agent_snapshots)
            for (const auto& a : engine.agents())
                *options.agent_snapshots << t_next << ',' << a.id << ',' << a.x << ',' << a.y << ','
                                         << epi_name(a.eta) << ',' << world.graph.center(a.center).id << '\n';
    }
    traj.center_totals = engine.center_tallies();
    return traj;
}

EpizooticReport run_simulation(const SimConfig& config, const WorldSpec& world,
                               const TemperatureSeries& temperature, double horizon, double dt,
                               const AbsRunOptions& options) {
    return summarize(run_abs(config, world, temperature, horizon, dt, options));
}

}  // namespace epizoo
