#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "bohm/errors.hpp"
#include "bohm/scenarios.hpp"

using namespace bohm;

namespace {

// Small enough to keep every scenario under a few seconds.
ScenarioConfig small(const std::string& name) {
    ScenarioConfig c = default_config(name);
    if (c.n_trials > 0) c.n_trials = 300;
    if (c.n_trajectories > 0) c.n_trajectories = 4;
    if (name == "two_particle_slit") c.integrator.output_stride = 0.1;
    if (name == "pendulum") {
        c.integrator.t_end = 20.0 * 2.0 * M_PI;
        c.ergodicity.grid_resolution = 32;
    }
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal two_particle_slit config takes the documented defaults") {
    const auto c = parse_config(R"({"scenario": "two_particle_slit"})");
    CHECK(c == default_config("two_particle_slit"));
    CHECK(c.geometry.sigma0 == 0.01);
    CHECK(c.geometry.d == 1.0);
    REQUIRE(c.detection);
    CHECK(c.detection->units == DetectorUnits::beam_width);
    CHECK(c.detection->sampling == TrialSampling::point_slit);
    CHECK(c.detection->setup.t_detect == 2.0);
    CHECK(c.n_trials == 10000);
    CHECK(c.seed == 1u);
}

TEST_CASE("schema errors name the key") {
    CHECK_THROWS_AS((void)parse_config(R"({"scenario": "warp_drive"})"), SchemaError);
    try {
        (void)parse_config(R"({"scenario": "single_slit", "geometry": {"sigma": 1}})");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.key() == "geometry.sigma");
    }
    try {
        (void)parse_config(R"({"scenario": "double_slit", "n_trials": -3})");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.key() == "n_trials");
    }
    CHECK_THROWS_AS((void)parse_config(R"({"geometry": {}})"), SchemaError);
    CHECK_THROWS_AS((void)parse_config(R"({"scenario": "double_slit", "seed": null})"), SchemaError);
    CHECK_THROWS_AS((void)parse_config(R"({"scenario": "pendulum", "outputs": ["movie"]})"), SchemaError);
    CHECK_THROWS_AS((void)parse_config(R"({"scenario": "single_slit", "geometry": {"sigma0": -1}})"), SchemaError);
}

TEST_CASE("parse errors carry line and column") {
    try {
        (void)parse_config("{\n  \"scenario\": \"pendulum\",\n  oops\n}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 3);
    }
}

TEST_CASE("config round trip") {
    for (const auto& name : scenario_names()) {
        CAPTURE(name);
        const auto c = default_config(name);
        CHECK(parse_config(serialize(c)) == c);
    }
    auto c = parse_config(R"({"scenario": "double_slit",
        "detection": {"d1": [null, -0.25], "t_detect": 1.5},
        "geometry": {"phase": 0.3}, "integrator": {"rel_tol": 1e-9}})");
    CHECK(std::isinf(c.detection->setup.d1.lo));
    CHECK(c.detection->setup.d1.hi == -0.25);
    const auto again = parse_config(serialize(c));
    CHECK(again == c);
    CHECK(serialize(again) == serialize(c));

    auto osc = parse_config(R"({"scenario": "pendulum",
        "geometry": {"terms": [{"n1": 0, "n2": 2, "re": 0.6}, {"n1": 1, "n2": 0, "im": 0.8}]}})");
    REQUIRE(osc.geometry.terms.size() == 2);
    CHECK(parse_config(serialize(osc)) == osc);
}

TEST_CASE("trajectory CSV bytes") {
    Trajectory tr;
    tr.times = {0.0, 0.5, 1.0};
    tr.configs = {Configuration({0.1, -0.1}, 2), Configuration({0.25, 1.0 / 3.0}, 2), Configuration({-2.0, 1e-20}, 2)};
    CHECK(trajectory_csv(tr) ==
          "t,y1,y2\n"
          "0,0.10000000000000001,-0.10000000000000001\n"
          "0.5,0.25,0.33333333333333331\n"
          "1,-2,9.9999999999999995e-21\n");
    CHECK(trajectory_csv(Trajectory{}) == "t,y1\n");

    Histogram h = make_histogram(std::vector<double>{0.1, 0.2, 0.9, 1.0, 7.0}, 0.0, 1.0, 2);
    CHECK(histogram_csv(h) == "bin_lo,bin_hi,count\n0,0.5,2\n0.5,1,2\n");
}

TEST_CASE("NaN statistics are refused") {
    RunSummary s;
    s.config = default_config("spreading_law");
    s.statistics.push_back({"bad", std::numeric_limits<double>::quiet_NaN(), 0, 0.0});
    CHECK_THROWS_AS((void)summary_json(s), SerializationError);
    s.statistics.back().value = 1.0;
    CHECK_NOTHROW((void)summary_json(s));
}

TEST_CASE("spreading_law reproduces the width ratio sqrt(2)") {
    auto c = default_config("spreading_law");
    c.geometry.sigma0 = 1.0;
    c.integrator.t_end = 2.0;  // hbar t / (2 m sigma0^2) = 1
    const auto r = run_scenario(c);
    CHECK(std::abs(r.summary.stat("width_ratio_end").value - std::sqrt(2.0)) < 1e-6);
    CHECK(r.summary.stat("spreading_max_rel_error").value < 1e-6);
    CHECK(r.summary.stat("smallness_parameter").value == doctest::Approx(1.0));
}

TEST_CASE("two_particle_slit flags the joint detection discrepancy") {
    auto c = small("two_particle_slit");
    const auto r = run_scenario(c, 4);
    CHECK(r.summary.stat("P_star_12").value == 0.0);
    CHECK(r.summary.stat("P_bar_12").value > 1e-3);
    CHECK(r.summary.flag("ergodic_discrepancy"));
    CHECK(r.artifacts.histogram);
}

TEST_CASE("every scenario runs and is deterministic across worker counts") {
    const auto dir = std::filesystem::temp_directory_path() / "bohm_ergo_test_scenarios";
    std::filesystem::remove_all(dir);
    for (const auto& name : scenario_names()) {
        CAPTURE(name);
        const auto c = small(name);
        const auto a = run_scenario(c, 1);
        const auto b = run_scenario(c, 4);
        CHECK(!a.summary.statistics.empty());
        CHECK(summary_json(a.summary, false) == summary_json(b.summary, false));
        const auto pa = write_outputs(a, dir / (name + "_1"));
        const auto pb = write_outputs(b, dir / (name + "_4"));
        REQUIRE(pa.size() == pb.size());
        CHECK(!pa.empty());
        for (std::size_t i = 0; i < pa.size(); ++i) {
            CHECK(pa[i].filename() == pb[i].filename());
            if (pa[i].filename() == "summary.json") continue;
            CHECK(slurp(pa[i]) == slurp(pb[i]));
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("requested outputs only") {
    auto c = small("double_slit");
    c.outputs = {"summary_json"};
    const auto dir = std::filesystem::temp_directory_path() / "bohm_ergo_test_outputs";
    std::filesystem::remove_all(dir);
    const auto paths = write_outputs(run_scenario(c), dir);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].filename() == "summary.json");
    std::filesystem::remove_all(dir);
}

TEST_CASE("unwritable destination surfaces the path") {
    const auto r = run_scenario(default_config("spreading_law"));
    try {
        (void)write_outputs(r, "/proc/bohm_ergo_nope");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("/proc/bohm_ergo_nope") != std::string::npos);
    }
}
