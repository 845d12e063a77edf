#include "doctest.h"

#include <cmath>

#include "epizoo/model.hpp"
#include "epizoo/model_io.hpp"

using namespace epizoo;

namespace {

EnvironmentGraph line_graph(std::size_t n) {
    std::vector<CenterSpec> centers;
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < n; ++k) {
        CenterSpec c;
        c.id = "c" + std::to_string(k);
        c.centroid = {10.0 * double(k), 0.0};
        centers.push_back(c);
        if (k > 0) edges.push_back({k - 1, k, std::nullopt});
    }
    return EnvironmentGraph(centers, edges);
}

}  // namespace

TEST_CASE("graph construction rejects malformed topology") {
    CenterSpec c;
    CHECK_THROWS_AS(EnvironmentGraph({}, {}), ValidationError);
    CHECK_THROWS_AS(EnvironmentGraph({c, c}, {{0, 0, std::nullopt}}), ValidationError);
    CHECK_THROWS_AS(EnvironmentGraph({c, c}, {{0, 2, std::nullopt}}), ValidationError);
    CHECK_THROWS_AS(EnvironmentGraph({c, c}, {{0, 1, std::nullopt}, {1, 0, std::nullopt}}), ValidationError);
    CenterSpec bad = c;
    bad.kappa = 0.0;
    CHECK_THROWS_AS(EnvironmentGraph({bad}, {}), ValidationError);
    bad = c;
    bad.xi = 0.0;
    CHECK_THROWS_AS(EnvironmentGraph({bad}, {}), ValidationError);
    bad = c;
    bad.lambda = -1.0;
    CHECK_THROWS_AS(EnvironmentGraph({bad}, {}), ValidationError);
}

TEST_CASE("adjacency follows the edge set only") {
    const auto g = line_graph(3);
    CHECK(g.adjacent(0, 1));
    CHECK(g.adjacent(1, 0));
    CHECK(g.adjacent(1, 2));
    CHECK_FALSE(g.adjacent(0, 2));
    CHECK(g.incident(1).size() == 2);
}

TEST_CASE("degenerate ranges reproduce the table values") {
    const ModelParams table;
    const auto p = sample_params(ParamRanges::point(table), 7);
    for (const auto& f : param_fields()) CHECK(p.*(f.member) == table.*(f.member));
}

TEST_CASE("point interval for beta holds across seeds") {
    auto r = ParamRanges::defaults();
    r.fields["beta"] = {0.15, 0.15};
    CHECK(sample_params(r, 1).beta == 0.15);
    CHECK(sample_params(r, 99).beta == 0.15);
}

TEST_CASE("kappa samples average to the interval midpoint") {
    const auto r = ParamRanges::defaults();
    const auto k = sample_capacities(r, 10000, 3);
    double sum = 0.0;
    for (double v : k) sum += v;
    CHECK(sum / 10000.0 == doctest::Approx(85.0).epsilon(0.05));
}

TEST_CASE("sampling is deterministic and stays inside every interval") {
    const auto r = ParamRanges::defaults();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto a = sample_params(r, seed);
        const auto b = sample_params(r, seed);
        for (const auto& f : param_fields()) {
            CHECK(a.*(f.member) == b.*(f.member));
            const auto iv = r.fields.at(f.name);
            CHECK(a.*(f.member) >= iv.lo);
            CHECK(a.*(f.member) <= iv.hi);
        }
        for (double k : sample_capacities(r, 4, seed)) {
            CHECK(k >= r.kappa.lo);
            CHECK(k <= r.kappa.hi);
        }
    }
}

TEST_CASE("invalid ranges are rejected") {
    auto r = ParamRanges::defaults();
    r.fields["beta"] = {0.2, 0.1};
    CHECK_THROWS_AS(sample_params(r, 1), ValidationError);
    r = ParamRanges::defaults();
    r.fields["nonexistent"] = {0.0, 1.0};
    CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("waning rate converts an annual fraction") {
    CHECK(waning_rate_from_annual_fraction(0.28) == doctest::Approx(-std::log(0.72) / 8760.0));
    CHECK(ModelParams{}.omega == doctest::Approx(3.75e-5).epsilon(1e-3));
}

TEST_CASE("validate_state reports every violation with its center") {
    const auto g = line_graph(2);
    std::vector<CenterState> s(2);
    CHECK(validate_state(s, g).empty());

    s[0].S = -1.0;
    auto v = validate_state(s, g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].center == 0);
    CHECK(v[0].message == "negative S at 0");

    s[0].S = 0.0;
    s[1].F = g.center(1).xi + 1.0;
    v = validate_state(s, g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].center == 1);
    CHECK(v[0].message.find("food exceeds cap") != std::string::npos);

    s[1].E = std::nan("");
    CHECK(validate_state(s, g).size() == 2);
    CHECK(validate_state(std::vector<CenterState>(3), g).size() == 1);
}

TEST_CASE("parameter table lookup by name") {
    ModelParams p;
    param_ref(p, "beta") = 0.3;
    CHECK(p.beta == 0.3);
    CHECK(param_value(p, "gamma") == p.gamma);
    CHECK_THROWS_AS(param_ref(p, "zeta"), ValidationError);
}

TEST_CASE("validate_params checks rates and the time grid") {
    ModelParams p;
    CHECK_NOTHROW(validate_params(p));
    p.phi = -1.0;
    CHECK_THROWS_AS(validate_params(p), ValidationError);
    p = ModelParams{};
    p.dt = 0.0;
    CHECK_THROWS_AS(validate_params(p), ValidationError);
    p = ModelParams{};
    p.T = 0.5;
    CHECK_THROWS_AS(validate_params(p), ValidationError);
}

TEST_CASE("temperature lookup holds the last value and falls back when empty") {
    TemperatureSeries t;
    CHECK_FALSE(t.at(3.0).has_value());
    t.hourly = {10.0, 11.0, 12.0};
    CHECK(*t.at(0.0) == 10.0);
    CHECK(*t.at(1.7) == 11.0);
    CHECK(*t.at(100.0) == 12.0);
}

TEST_CASE("graph JSON round trip keeps ids, overrides and topology") {
    const nlohmann::json j = {
        {"centers",
         {{{"id", "a"}, {"kappa", 50}, {"lambda", 0.5}, {"xi", 1}, {"centroid", {0, 0}}},
          {{"id", "b"}, {"kappa", 60}, {"lambda", 0.2}, {"xi", 2}, {"centroid", {5, 0}}},
          {{"id", "c"}, {"centroid", {9, 1}}}}},
        {"edges", {{"a", "b"}, {{"a", 2}, {"b", "b"}, {"movement_rate", 0.02}}}}};
    const auto g = graph_from_json(j);
    CHECK(g.size() == 3);
    CHECK(g.center(2).kappa == CenterSpec{}.kappa);
    REQUIRE(g.edges().size() == 2);
    CHECK(g.edges()[1].a == 1);
    CHECK(g.edges()[1].b == 2);
    CHECK(*g.edges()[1].movement_rate == 0.02);

    const auto back = graph_from_json(graph_to_json(g));
    CHECK(back.size() == 3);
    CHECK(back.center(1).xi == 2.0);
    CHECK(back.adjacent(1, 2));
    CHECK_FALSE(back.adjacent(0, 2));
}

TEST_CASE("graph JSON errors are configuration errors") {
    CHECK_THROWS_AS(graph_from_json(nlohmann::json::object()), ConfigError);
    const nlohmann::json dup = {{"centers", {{{"id", "a"}}, {{"id", "a"}}}}};
    CHECK_THROWS_AS(graph_from_json(dup), ConfigError);
    const nlohmann::json unknown = {{"centers", {{{"id", "a"}}}}, {"edges", {{"a", "z"}}}};
    CHECK_THROWS_AS(graph_from_json(unknown), ConfigError);
}

TEST_CASE("parameter range JSON: aliases, annual waning and kappa") {
    const auto r = ranges_from_json({{"c", 0.01}, {"rho", {0.2, 0.4}}, {"omega_annual", 0.5}, {"kappa", {30, 40}}});
    CHECK(r.fields.at("c_e").lo == 0.01);
    CHECK(r.fields.at("rho_i").hi == 0.4);
    CHECK(r.fields.at("omega").lo == doctest::Approx(-std::log(0.5) / 8760.0));
    CHECK(r.kappa.lo == 30.0);
    CHECK(r.fields.at("beta").lo == 0.15);  // untouched default
    CHECK_THROWS_AS(ranges_from_json({{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(ranges_from_json({{"beta", "high"}}), ConfigError);

    const auto again = ranges_from_json(ranges_to_json(r));
    CHECK(again.fields.at("rho_s").lo == 0.2);
    CHECK(again.kappa.hi == 40.0);
}
