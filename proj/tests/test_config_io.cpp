#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "macts/config_io.hpp"
#include "macts/sweep.hpp"

using namespace macts;

TEST_CASE("scenario config round-trips through JSON") {
    ScenarioConfig cfg;
    cfg.topology.kind = "random";
    cfg.topology.n = 17;
    cfg.topology.radius = 0.42;
    cfg.h_initial = 4;
    cfg.d_fixed_us = 0.0;
    cfg.seed = 99;
    cfg.first_crossing_convergence = true;

    const ScenarioConfig back = scenario_from_json(to_json(cfg));
    CHECK(back.topology.kind == "random");
    CHECK(back.topology.n == 17);
    CHECK(back.topology.radius == 0.42);
    CHECK(back.h_initial == 4);
    CHECK(back.d_fixed_us == 0.0);
    CHECK(back.seed == 99);
    CHECK(back.first_crossing_convergence);
    CHECK(back.broadcast_period_s == cfg.broadcast_period_s);
}

TEST_CASE("missing keys fall back to defaults") {
    const ScenarioConfig cfg = scenario_from_json(json::parse(R"({"h_initial": 6})"));
    CHECK(cfg.h_initial == 6);
    CHECK(cfg.broadcast_period_s == 30.0);
    CHECK(cfg.delay_mean_us == 3.33);
    CHECK(cfg.topology.kind == "grid");
}

TEST_CASE("set-style overrides edit the config like the file would") {
    json j = to_json(ScenarioConfig{});
    apply_override(j, "h_initial=1");
    apply_override(j, "topology.kind=line");
    apply_override(j, "topology.n=9");
    apply_override(j, "rho_v=0.25");
    apply_override(j, "raw_local_error=true");

    const ScenarioConfig cfg = scenario_from_json(j);
    CHECK(cfg.h_initial == 1);
    CHECK(cfg.topology.kind == "line");
    CHECK(cfg.topology.n == 9);
    CHECK(cfg.rho_v == 0.25);
    CHECK(cfg.raw_local_error);

    json edited = to_json(ScenarioConfig{});
    edited["h_initial"] = 1;
    edited["topology"]["kind"] = "line";
    edited["topology"]["n"] = 9;
    edited["rho_v"] = 0.25;
    edited["raw_local_error"] = true;
    CHECK(to_json(cfg) == to_json(scenario_from_json(edited)));

    CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(j, "=5"), std::invalid_argument);
}

TEST_CASE("flatten produces sorted dotted key=value pairs") {
    const auto flat = flatten(to_json(ScenarioConfig{}));
    REQUIRE(!flat.empty());
    for (std::size_t i = 1; i < flat.size(); ++i) CHECK(flat[i - 1].first < flat[i].first);
    bool found = false;
    for (const auto& [key, value] : flat) {
        if (key == "topology.kind") {
            CHECK(value == "grid");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("config file loading distinguishes its failure modes") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), std::invalid_argument);

    const std::string path = "malformed_config_test.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_scenario(path), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("sweep specs expand the cartesian product") {
    const json j = json::parse(R"({
        "base": {"topology": {"kind": "line", "n": 5}, "sim_duration_s": 60},
        "axes": {"h_initial": [1, 2, 4, 6], "seed": [1, 2, 3, 4, 5]},
        "out_dir": "sweep_test_out",
        "max_runs": 100
    })");
    const SweepSpec spec = sweep_from_json(j);
    const auto runs = expand_sweep(spec);
    CHECK(runs.size() == 20);
    CHECK(runs.front().topology.kind == "line");

    SECTION("empty axes are a config error") {
        json bad = j;
        bad["axes"]["seed"] = json::array();
        CHECK_THROWS_AS(sweep_from_json(bad), std::invalid_argument);
    }
    SECTION("the run cap is enforced") {
        json big = j;
        big["max_runs"] = 10;
        CHECK_THROWS_AS(expand_sweep(sweep_from_json(big)), std::invalid_argument);
    }
    SECTION("missing axes object is a config error") {
        json bad = j;
        bad.erase("axes");
        CHECK_THROWS_AS(sweep_from_json(bad), std::invalid_argument);
    }
}
