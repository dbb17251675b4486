#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "softgrip/config.hpp"

using namespace softgrip::config;

TEST_CASE("defaults are self-consistent") {
    const RunConfig cfg = default_config();
    CHECK(cfg.agent.gates.low == 60.0);
    CHECK(cfg.agent.gates.high == 200.0);
    CHECK(cfg.agent.max_retries == 2);
    CHECK(cfg.pretension == std::array<double, 5>{1.0, 1.25, 1.5, 2.0, 3.0});
    CHECK(cfg.stability.baseline.peak == 25.0);
    CHECK(cfg.stability.pretensioned.settle == 1.8);
    CHECK(cfg.bend.length == 110.0);
    CHECK(cfg.bend.tension_schedule.size() == 69);
    CHECK(cfg.bend.tension_schedule.front() == 0.0);
    CHECK(cfg.bend.tension_schedule.back() == doctest::Approx(cfg.bend_tension_max));
}

TEST_CASE("unknown keys are rejected everywhere") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"grible": 1})"),
                         doctest::Contains("unknown key 'grible'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"agent": {"luma_lo": 40}})"),
                         doctest::Contains("unknown key 'luma_lo'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"stability": {"baseline": {"omega": 7}}})"),
                         doctest::Contains("unknown key 'omega'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"bend": {"segmants": 10}})"),
                         doctest::Contains("unknown key 'segmants'"), std::runtime_error);
}

TEST_CASE("values override defaults") {
    const RunConfig cfg = parse_config(R"({
        "paths": {"fixtures": "fx", "ledger": "led.jsonl"},
        "agent": {"luma_low": 50, "max_retries": 1, "tools": ["a"],
                  "endpoint": {"host": "news.example", "port": 9000}},
        "policy": {"pretension": [1.0, 1.1, 1.2, 1.3, 1.4]},
        "stability": {"strike_gain": 55.0},
        "bend": {"tension_max": 4.0, "tension_steps": 8},
        "sweep": {"points": 11}
    })");
    CHECK(cfg.paths.fixtures == "fx");
    CHECK(cfg.agent.gates.low == 50.0);
    CHECK(cfg.agent.max_retries == 1);
    CHECK(cfg.agent.tools == std::vector<std::string>{"a"});
    CHECK(cfg.endpoint.host == "news.example");
    CHECK(cfg.endpoint.port == 9000);
    CHECK(cfg.agent.pretension.ratio(softgrip::policy::StiffnessLevel(4)) == 1.4);
    CHECK(cfg.stability.strike_gain == 55.0);
    CHECK(cfg.bend.tension_schedule.size() == 9);
    CHECK(cfg.sweep.points == 11);
}

TEST_CASE("the shipped config file matches the built-in defaults") {
    const RunConfig shipped = load_config(std::string(SOFTGRIP_DATA_DIR) + "/config.json");
    const RunConfig defaults = default_config();
    CHECK(shipped.agent.gates.low == defaults.agent.gates.low);
    CHECK(shipped.agent.gates.high == defaults.agent.gates.high);
    CHECK(shipped.agent.max_retries == defaults.agent.max_retries);
    CHECK(shipped.pretension == defaults.pretension);
    CHECK(shipped.stability.strike_gain == defaults.stability.strike_gain);
    CHECK(shipped.bend.length == defaults.bend.length);
    CHECK(shipped.bend.tension_schedule == defaults.bend.tension_schedule);
    CHECK(shipped.sweep.points == defaults.sweep.points);
}

TEST_CASE("the shipped lexicon file loads cleanly") {
    const auto lex = softgrip::policy::Lexicon::load(std::string(SOFTGRIP_DATA_DIR) +
                                                     "/lexicon.txt");
    CHECK(softgrip::policy::classify_material("steel pipe", {}, lex)->value() == 4);
    CHECK(softgrip::policy::classify_material("jelly", {}, lex)->value() == 0);
}

TEST_CASE("invalid config values are rejected at load") {
    CHECK_THROWS_AS(parse_config(R"({"policy": {"pretension": [1, 2, 1.5, 3, 4]}})"),
                    std::runtime_error);
    CHECK_THROWS_AS(parse_config(R"({"policy": {"pretension": [1, 2, 3]}})"), std::runtime_error);
    CHECK_THROWS_AS(parse_config(R"({"agent": {"max_retries": -1}})"), std::runtime_error);
    CHECK_THROWS_AS(parse_config(R"({"agent": {"luma_low": 250}})"), std::runtime_error);
    CHECK_THROWS_AS(parse_config(R"({"sweep": {"points": 1}})"), std::runtime_error);
    CHECK_THROWS_AS(parse_config("not json"), std::runtime_error);
}
