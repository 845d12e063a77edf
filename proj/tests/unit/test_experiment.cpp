#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epizoo/experiment.hpp"

using namespace epizoo;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_scenario_json() {
    return {{"name", "small"},
            {"graph",
             {{"centers",
               {{{"id", "a"}, {"kappa", 40}, {"lambda", 0.6}, {"xi", 1}, {"centroid", {10, 10}}},
                {{"id", "b"}, {"kappa", 30}, {"lambda", 0.4}, {"xi", 1}, {"centroid", {40, 10}}},
                {{"id", "c"}, {"kappa", 20}, {"lambda", 0.5}, {"xi", 1}, {"centroid", {25, 35}}}}},
              {"edges", nlohmann::json::array({nlohmann::json::array({"a", "b"}), nlohmann::json::array({"b", "c"})})}}},
            {"engine", "ode"},
            {"replicates", 4},
            {"seed", 11},
            {"horizon", 300},
            {"optimizer", {{"units", 3}, {"replicates", 2}}}};
}

Scenario small_scenario() { return scenario_from_json(small_scenario_json(), "."); }

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("epizoo_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cols.push_back(c);
        rows.push_back(cols);
    }
    return rows;
}

}  // namespace

TEST_CASE("temperature: constant hourly file") {
    std::stringstream in;
    in << "hour,temperature\n";
    for (int h = 0; h < 8760; ++h) in << h << ",20\n";
    const auto t = parse_temperature(in, "const.csv");
    REQUIRE(t.hourly.size() == 8760);
    for (double v : t.hourly) CHECK(v == 20.0);
}

TEST_CASE("temperature: 365 daily rows expand to hours") {
    std::stringstream in;
    in << "# comment\nday,temperature\n";
    for (int d = 0; d < 365; ++d) in << d << "," << d << "\n";
    const auto t = parse_temperature(in, "daily.csv");
    REQUIRE(t.hourly.size() == 8760);
    CHECK(t.hourly[0] == 0.0);
    CHECK(t.hourly[23] == 0.0);
    CHECK(t.hourly[24] == 1.0);
    CHECK(t.hourly[8759] == 364.0);
}

TEST_CASE("temperature: malformed rows name their row") {
    std::stringstream missing("hour,temperature\n0,20\n1,\n");
    try {
        parse_temperature(missing, "bad.csv");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    std::stringstream nan("hour,temperature\n0,nan\n");
    CHECK_THROWS_AS(parse_temperature(nan, "nan.csv"), ConfigError);
    std::stringstream header("time,temp\n0,1\n");
    CHECK_THROWS_AS(parse_temperature(header, "h.csv"), ConfigError);
}

TEST_CASE("a temperature series shorter than the horizon is rejected") {
    auto s = small_scenario();
    s.temperature.hourly.assign(100, 15.0);
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("shipped scenarios load and validate") {
    const fs::path data = EPIZOO_DATA_DIR;
    const auto s = load_scenario(data / "default_scenario.json");
    CHECK(s.graph.size() == 6);
    CHECK(s.temperature.hourly.size() == 8760);
    CHECK(s.replicates == 100);
    CHECK_NOTHROW(s.validate());
    const auto sweep = sweep_from_json(read_json_file(data / "sweep_vaccination_dilution.json"));
    CHECK_NOTHROW(sweep.validate());
}

TEST_CASE("scenario JSON round trip") {
    auto s = small_scenario();
    s.engine = Engine::Abs;
    s.eip_mode = EipMode::RandomBoth;
    s.initial.seed_center = 2;
    s.budgets.dilution_portion = 0.1;
    s.optimizer.search_engine = Engine::Ode;
    s.options.event_order = EventOrder::DilutionFirst;
    const auto j = scenario_to_json(s);
    const auto back = scenario_from_json(j, ".");
    CHECK(scenario_to_json(back) == j);
    CHECK(back.graph.size() == 3);
    CHECK(*back.initial.seed_center == 2);
    CHECK(*back.optimizer.search_engine == Engine::Ode);
}

TEST_CASE("configuration errors") {
    auto j = small_scenario_json();
    j["engine"] = "quantum";
    CHECK_THROWS_AS(scenario_from_json(j, "."), ConfigError);
    j = small_scenario_json();
    j["eip_mode"] = "optimal-everything";
    CHECK_THROWS_AS(scenario_from_json(j, "."), ConfigError);
    j = small_scenario_json();
    j["replicates"] = 0;
    CHECK_THROWS_AS(scenario_from_json(j, ".").validate(), ConfigError);
    j = small_scenario_json();
    j.erase("graph");
    CHECK_THROWS_AS(scenario_from_json(j, "."), ConfigError);
}

TEST_CASE("replicate setup: default seeding and per-mode invariance") {
    const auto s = small_scenario();
    const auto r = prepare_replicate(s, 1);
    double I = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        I += r.initial[k].I;
        CHECK(r.initial[k].E == 0.0);
        CHECK(r.initial[k].F == 1.0);
        const double expect = std::llround(0.8 * r.graph.center(k).kappa) - (k == r.seeded_center ? 1.0 : 0.0);
        CHECK(r.initial[k].S == expect);
        CHECK(r.graph.center(k).kappa >= 20.0);
        CHECK(r.graph.center(k).kappa <= 150.0);
    }
    CHECK(I == 1.0);
    const auto again = prepare_replicate(s, 1);
    CHECK(again.params.beta == r.params.beta);
    CHECK(again.seeded_center == r.seeded_center);
    CHECK(prepare_replicate(s, 2).seed != r.seed);
}

TEST_CASE("random modes spend exactly the default budgets") {
    const auto s = small_scenario();
    const auto r = prepare_replicate(s, 0);
    const auto eip = build_eip(s, r, EipMode::RandomBoth);
    double J = 0;
    for (const auto& c : r.initial) J += c.J();
    CHECK(vaccination_budget(s, r) == std::llround(J));
    CHECK(dilution_budget(s, r) == std::llround(0.05 * J));
    CHECK(eip.total_doses() == double(vaccination_budget(s, r)));
    CHECK(eip.total_removals() == double(dilution_budget(s, r)));
    CHECK(build_eip(s, r, EipMode::RandomVaccination).dilution.events.empty());
    CHECK(build_eip(s, r, EipMode::None).empty());
    CHECK_THROWS(build_eip(s, r, EipMode::OptimalVaccination));
    const auto split = multinomial_split(1000, 4, 5);
    std::int64_t sum = 0;
    for (auto v : split) sum += v;
    CHECK(sum == 1000);
}

TEST_CASE("no infection seeded means no spread") {
    auto s = small_scenario();
    s.initial.infected_seed = 0;
    const auto r = run_campaign(s, {EipMode::None});
    REQUIRE(r.runs.size() == 4);
    for (const auto& run : r.runs) {
        CHECK(run.ok);
        CHECK(run.arn == 0.0);
        CHECK(run.mi == 0.0);
        CHECK(run.flags.find("no-infection") != std::string::npos);
    }
}

TEST_CASE("campaign output is byte-identical across reruns and worker counts") {
    auto s = small_scenario();
    s.replicates = 3;
    const std::vector<EipMode> modes{EipMode::None, EipMode::RandomVaccination, EipMode::OptimalDilution};
    auto render = [&](std::size_t workers) {
        const auto r = run_campaign(s, modes, {workers});
        std::ostringstream a, b;
        write_replicates_csv(a, s, r);
        write_summary_csv(b, s, r);
        return a.str() + b.str();
    };
    const auto one = render(1);
    CHECK(one == render(1));
    CHECK(one == render(3));
    CHECK(one.find("# seed=11") != std::string::npos);
    CHECK(one.find("# version=") != std::string::npos);
}

TEST_CASE("summary rows match statistics recomputed from replicate rows") {
    auto s = small_scenario();
    s.replicates = 6;
    const auto r = run_campaign(s, {EipMode::None, EipMode::RandomDilution});
    std::ostringstream reps, summary;
    write_replicates_csv(reps, s, r);
    write_summary_csv(summary, s, r);
    const auto rows = data_rows(reps.str());
    const auto sums = data_rows(summary.str());
    REQUIRE(rows.size() == 12);
    REQUIRE(sums.size() == 2);
    for (const auto& srow : sums) {
        std::vector<double> arn, pdi;
        for (const auto& row : rows)
            if (row[1] == srow[0]) {
                arn.push_back(std::stod(row[6]));
                pdi.push_back(std::stod(row[10]));
            }
        REQUIRE(arn.size() == 6);
        double m = 0;
        for (double v : arn) m += v;
        m /= 6;
        double var = 0;
        for (double v : arn) var += (v - m) * (v - m);
        const double sd = std::sqrt(var / 5);
        CHECK(std::stod(srow[3]) == doctest::Approx(m).epsilon(1e-9));
        CHECK(std::stod(srow[4]) == doctest::Approx(sd).epsilon(1e-9));
        CHECK(std::stod(srow[5]) == doctest::Approx(sd / std::sqrt(6.0)).epsilon(1e-9));
        double mp = 0;
        for (double v : pdi) mp += v;
        CHECK(std::stod(srow[9]) == doctest::Approx(mp / 6).epsilon(1e-9));
    }
}

TEST_CASE("a manifest reproduces its campaign") {
    auto s = small_scenario();
    s.replicates = 2;
    s.eip_mode = EipMode::RandomBoth;
    const auto first = run_campaign(s, {s.eip_mode});
    const auto manifest = run_manifest(s, "campaign");
    const auto again = scenario_from_json(manifest, ".");
    const auto second = run_campaign(again, {again.eip_mode});
    std::ostringstream a, b;
    write_replicates_csv(a, s, first);
    write_replicates_csv(b, again, second);
    CHECK(a.str() == b.str());
}

TEST_CASE("optimal plans serve every replicate") {
    auto s = small_scenario();
    const auto plan = plan_optimal(s, EipMode::OptimalVaccination);
    CHECK(plan.vaccination.size() == 3);
    std::int64_t units = 0;
    for (auto u : plan.vaccination) units += u;
    CHECK(units == 3);
    CHECK(plan.dilution.empty());
    REQUIRE(plan.searches.size() == 1);
    CHECK(plan.searches[0]["method"] == "brute_force");
    for (std::size_t i = 0; i < 3; ++i) {
        const auto r = prepare_replicate(s, i);
        const auto eip = build_eip(s, r, EipMode::OptimalVaccination, &plan);
        CHECK(eip.total_doses() == double(vaccination_budget(s, r)));
    }
    const auto both = plan_optimal(s, EipMode::OptimalBoth);
    CHECK(both.searches.size() == 4);
    CHECK(both.dilution.size() == 3);
}

TEST_CASE("a 1x1 sweep equals the campaign at that point") {
    auto s = small_scenario();
    SweepSpec spec;
    spec.axes.push_back({"movement_scale", {2.0}});
    spec.modes = {EipMode::RandomVaccination};
    const auto cells = run_sweep(s, spec);
    REQUIRE(cells.size() == 1);
    const auto direct = run_campaign(apply_axis(s, "movement_scale", 2.0), spec.modes);
    CHECK(cells[0].result.summaries[0].arn.mean == direct.summaries[0].arn.mean);
    CHECK(cells[0].result.summaries[0].pdi.mean == direct.summaries[0].pdi.mean);
    CHECK(apply_axis(s, "dilution_portion", 0.2).budgets.dilution_portion == 0.2);
    CHECK(apply_axis(s, "beta", 0.3).ranges.fields.at("beta").lo == 0.3);
    CHECK_THROWS(apply_axis(s, "warp", 1.0));
}

TEST_CASE("sensitivity at 100 percent reproduces the baseline") {
    auto s = small_scenario();
    const auto pts = run_sensitivity(s, "beta");
    REQUIRE(pts.size() == 5);
    CHECK(pts[2].percent == 100.0);
    const auto base = run_campaign(s, {EipMode::None});
    CHECK(pts[2].result.summaries[0].arn.mean == base.summaries[0].arn.mean);
    CHECK(pts[2].result.summaries[0].mi.mean == base.summaries[0].mi.mean);
    CHECK_THROWS(run_sensitivity(s, "zeta"));
    std::ostringstream out;
    write_sensitivity_csv(out, s, "beta", pts);
    CHECK(data_rows(out.str()).size() == 5);
}

TEST_CASE("failed replicates are recorded and the campaign continues") {
    auto s = small_scenario();
    s.engine = Engine::Abs;
    s.world_w = 5.0;  // centroids off the map: every agent run throws
    const auto r = run_campaign(s, {EipMode::None});
    REQUIRE(r.runs.size() == 4);
    CHECK(r.failures() == 4);
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        CHECK(r.runs[i].index == i);
        CHECK(r.runs[i].error.find("outside the map") != std::string::npos);
    }
    CHECK(r.summaries[0].failed == 4);
}

TEST_CASE("command-line exit codes and outputs") {
    const auto dir = temp_dir("cli");
    const std::string cli = EPIZOO_CLI;
    const fs::path data = EPIZOO_DATA_DIR;
    {
        std::ofstream f(dir / "scenario.json");
        auto j = small_scenario_json();
        j["replicates"] = 2;
        f << j.dump();
    }
    auto run = [&](const std::string& args) {
        const std::string cmd = "\"" + cli + "\" " + args + " > \"" + (dir / "log.txt").string() + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    const std::string sc = "--scenario \"" + (dir / "scenario.json").string() + "\"";
    CHECK(run("campaign " + sc + " --modes none,random-both --out \"" + (dir / "c").string() + "\"") == 0);
    CHECK(fs::exists(dir / "c" / "replicates.csv"));
    CHECK(fs::exists(dir / "c" / "summary.csv"));
    CHECK(fs::exists(dir / "c" / "manifest.json"));
    const auto manifest = nlohmann::json::parse(read_file(dir / "c" / "manifest.json"));
    CHECK(manifest["command"] == "campaign");
    CHECK(manifest["seed"] == 11);

    CHECK(run("sweep " + sc + " --axis vaccines_per_individual=0,0.5 --out \"" + (dir / "s").string() + "\"") == 0);
    CHECK(data_rows(read_file(dir / "s" / "sweep.csv")).size() == 2 * 4);
    CHECK(run("sensitivity " + sc + " --parameter phi --out \"" + (dir / "x").string() + "\"") == 0);
    CHECK(run("optimize " + sc + " --mode optimal-dilution --out \"" + (dir / "o").string() + "\"") == 0);
    CHECK(fs::exists(dir / "o" / "optimizer.json"));
    CHECK(run("trajectory " + sc + " --out \"" + (dir / "t").string() + "\"") == 0);
    CHECK(fs::exists(dir / "t" / "trajectory.csv"));
    CHECK(run("validate " + sc) == 0);

    CHECK(run("campaign --scenario \"" + (dir / "missing.json").string() + "\"") == 2);
    CHECK(run("campaign " + sc + " --modes bogus") == 2);
    CHECK(run("campaign") == 2);
    CHECK(run("sensitivity " + sc + " --parameter zeta --out \"" + (dir / "z").string() + "\"") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("validate --scenario \"" + (data / "default_scenario.json").string() + "\"") == 0);
    fs::remove_all(dir);
}
