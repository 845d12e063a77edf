#include "doctest.h"

#include <cmath>
#include <numbers>

#include "epizoo/eip.hpp"
#include "epizoo/model_io.hpp"

using namespace epizoo;

TEST_CASE("decay rate: half-life base and linear temperature modifier") {
    DecayModel d{720.0, 20.0, 0.0};
    CHECK(decay_rate(5.0, d) == doctest::Approx(std::numbers::ln2 / 720.0));
    CHECK(decay_rate(35.0, d) == doctest::Approx(9.63e-4).epsilon(1e-3));

    d = {300.0, 20.0, 0.03};
    CHECK(decay_rate(20.0, d) == doctest::Approx(std::numbers::ln2 / 300.0));
    CHECK(decay_rate(std::nullopt, d) == doctest::Approx(std::numbers::ln2 / 300.0));

    d = {120.0, 20.0, 0.05};
    CHECK(decay_rate(30.0, d) == doctest::Approx(1.5 * std::numbers::ln2 / 120.0));
}

TEST_CASE("decay rate is nondecreasing in temperature and floored at zero") {
    const DecayModel d{420.0, 20.0, 0.03};
    double prev = -1.0;
    for (double t = -40.0; t <= 50.0; t += 0.5) {
        const double r = decay_rate(t, d);
        CHECK(r >= 0.0);
        CHECK(r >= prev);
        prev = r;
    }
    CHECK(decay_rate(-100.0, d) == 0.0);
}

TEST_CASE("uptake flow") {
    CHECK(uptake_flow(100.0, 10.0, 20.0, 0.5) == doctest::Approx(25.0));
    CHECK(uptake_flow(0.0, 10.0, 20.0, 0.5) == 0.0);
    CHECK(uptake_flow(100.0, 0.0, 0.0, 0.5) == 0.0);
}

TEST_CASE("dilution removals split proportionally and cap at the population") {
    const auto r = dilution_removals(5.0, {8, 0, 2, 0});
    CHECK(r.S == doctest::Approx(4.0));
    CHECK(r.E == 0.0);
    CHECK(r.I == doctest::Approx(1.0));
    CHECK(r.V == 0.0);

    const auto none = dilution_removals(0.0, {8, 0, 2, 0});
    CHECK(none.total() == 0.0);

    const auto all = dilution_removals(100.0, {4, 3, 2, 1});
    CHECK(all.total() == doctest::Approx(10.0));
    CHECK(all.S == doctest::Approx(4.0));
}

TEST_CASE("dilution removals never exceed counts or go negative") {
    for (double psi = 0.0; psi <= 30.0; psi += 0.7) {
        const ClassCounts c{3, 5, 1, 7};
        const auto r = dilution_removals(psi, c);
        CHECK(r.S >= 0.0);
        CHECK(r.S <= c.S + 1e-12);
        CHECK(r.E <= c.E + 1e-12);
        CHECK(r.I <= c.I + 1e-12);
        CHECK(r.V <= c.V + 1e-12);
        CHECK(r.total() == doctest::Approx(std::min(psi, c.total())));
    }
}

TEST_CASE("dirac allocation fires inside its step only and adds up") {
    const std::vector<TimedAmount> one{{100.0, 50.0}};
    CHECK(dirac_allocation(100.0, one) == 50.0);
    CHECK(dirac_allocation(99.0, one) == 0.0);
    CHECK(dirac_allocation(101.0, one) == 0.0);
    const std::vector<TimedAmount> two{{100.0, 50.0}, {100.0, 25.0}};
    CHECK(dirac_allocation(100.0, two) == 75.0);
    // A fractional tau lands in the step containing it.
    const std::vector<TimedAmount> frac{{10.5, 3.0}};
    CHECK(dirac_allocation(10.0, frac) == 3.0);
    CHECK(dirac_allocation(10.0, frac, 0.5) == 0.0);
    CHECK(dirac_allocation(10.5, frac, 0.5) == 3.0);
}

TEST_CASE("every scheduled amount fires exactly once over a grid") {
    const std::vector<TimedAmount> s{{0.0, 1.0}, {3.3, 2.0}, {7.0, 4.0}, {9.99, 8.0}};
    for (double dt : {1.0, 0.5, 0.25, 0.1}) {
        double total = 0.0;
        const auto steps = static_cast<int>(std::llround(10.0 / dt));
        for (int k = 0; k < steps; ++k) total += dirac_allocation(k * dt, s, dt);
        CHECK(total == doctest::Approx(15.0));
    }
}

TEST_CASE("per-center schedules") {
    VaccinationSchedule v{{{5.0, {1, 2}}, {5.0, {10, 0}}, {6.0, {100, 100}}}};
    const auto at5 = scheduled_doses(v, 5.0, 1.0, 2);
    CHECK(at5[0] == 11.0);
    CHECK(at5[1] == 2.0);
    const auto at4 = scheduled_doses(v, 4.0, 1.0, 2);
    CHECK(at4[0] == 0.0);
    DilutionSchedule d{{{0.0, {3, 4}}}};
    CHECK(scheduled_removals(d, 0.0, 1.0, 2)[1] == 4.0);
}

TEST_CASE("configuration validation") {
    EipConfiguration eip;
    CHECK(eip.empty());
    eip.vaccination.events.push_back({10.0, {1, 2}});
    CHECK_NOTHROW(eip.validate(2, 100.0));
    CHECK_THROWS_AS(eip.validate(3, 100.0), ValidationError);
    CHECK_THROWS_AS(eip.validate(2, 5.0), ValidationError);
    eip.dilution.events.push_back({0.0, {-1, 0}});
    CHECK_THROWS_AS(eip.validate(2, 100.0), ValidationError);
}

TEST_CASE("default budgets: one dose per individual, five percent removed") {
    std::vector<CenterState> init(2);
    init[0].S = 40;
    init[0].I = 0;
    init[1].S = 59;
    init[1].I = 1;
    const auto eip = default_eip(init);
    REQUIRE(eip.vaccination.events.size() == 1);
    CHECK(eip.vaccination.events[0].doses == std::vector<std::int64_t>{40, 60});
    CHECK(eip.dilution.events[0].removals == std::vector<std::int64_t>{2, 3});
    CHECK(eip.vaccination.events[0].tau == 0.0);
    CHECK(eip.total_doses() == 100.0);
    CHECK(eip.total_removals() == 5.0);
}

TEST_CASE("schedule JSON round trip") {
    EipConfiguration eip;
    eip.vaccination.events.push_back({12.0, {3, 0, 1}});
    eip.dilution.events.push_back({0.0, {0, 2, 0}});
    const auto back = eip_from_json(eip_to_json(eip));
    REQUIRE(back.vaccination.events.size() == 1);
    CHECK(back.vaccination.events[0].tau == 12.0);
    CHECK(back.vaccination.events[0].doses == eip.vaccination.events[0].doses);
    CHECK(back.dilution.events[0].removals == eip.dilution.events[0].removals);
    CHECK_THROWS_AS(eip_from_json({{"vaccination", {{{"t", 1}}}}}), ConfigError);
}
