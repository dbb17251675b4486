#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "softgrip/agent.hpp"
#include "softgrip/oracle.hpp"
#include "softgrip/stability.hpp"

namespace softgrip::config {

struct Paths {
    std::string fixtures = "fixtures";
    std::string ledger = "episodes.jsonl";
    std::string lexicon; // empty = built-in table only
};

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string path = "/v1/grasp";
    int timeout_s = 10;
};

struct StabilitySection {
    double strike_gain = 70.0;
    double threshold = 3.0;
    double dt = 1e-4;
    double max_residual = 0.10;
    bool k_ratio_free = true;
    stability::CalibrationTarget baseline{7.16, 25.0, 2.5};
    stability::CalibrationTarget pretensioned{7.34, 19.0, 1.8};
};

struct SweepSection {
    int points = 101;
};

// Whole-run configuration. Loaded strictly: unknown keys are rejected so a
// typo never silently falls back to a default.
struct RunConfig {
    Paths paths;
    agent::AgentConfig agent;
    Endpoint endpoint;
    std::array<double, 5> pretension{1.0, 1.25, 1.5, 2.0, 3.0};
    StabilitySection stability;
    oracle::SegmentChain bend; // tension schedule built from the ramp below
    double bend_tension_max = 6.7;
    int bend_tension_steps = 68;
    SweepSection sweep;
};

RunConfig default_config();
RunConfig load_config(const std::filesystem::path& file);
RunConfig parse_config(const std::string& text);

// Uniform 0..tension_max ramp (inclusive) for the bend simulator.
std::vector<double> bend_schedule(const RunConfig& cfg);

} // namespace softgrip::config
