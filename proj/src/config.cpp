#include "softgrip/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace softgrip::config {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key()))
            throw std::runtime_error("config: unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

stability::CalibrationTarget read_target(const json& obj, const std::string& where) {
    check_keys(obj, {"omega0", "peak", "settle"}, where);
    stability::CalibrationTarget t;
    read(obj, "omega0", t.initial_velocity);
    read(obj, "peak", t.peak);
    read(obj, "settle", t.settle);
    return t;
}

} // namespace

RunConfig default_config() {
    RunConfig cfg;
    cfg.agent.pretension = policy::PretensionTable(cfg.pretension);
    cfg.bend.tension_schedule = bend_schedule(cfg);
    return cfg;
}

std::vector<double> bend_schedule(const RunConfig& cfg) {
    std::vector<double> schedule;
    const int steps = cfg.bend_tension_steps;
    if (steps <= 0) {
        schedule.push_back(0.0);
        return schedule;
    }
    schedule.reserve(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i)
        schedule.push_back(cfg.bend_tension_max * static_cast<double>(i) /
                           static_cast<double>(steps));
    return schedule;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config: top level must be an object");
    check_keys(j, {"paths", "agent", "policy", "stability", "bend", "sweep"}, "top level");

    RunConfig cfg;

    if (j.contains("paths")) {
        const json& p = j["paths"];
        check_keys(p, {"fixtures", "ledger", "lexicon"}, "paths");
        read(p, "fixtures", cfg.paths.fixtures);
        read(p, "ledger", cfg.paths.ledger);
        read(p, "lexicon", cfg.paths.lexicon);
    }

    if (j.contains("agent")) {
        const json& a = j["agent"];
        check_keys(a,
                   {"luma_low", "luma_high", "gamma_brighten", "gamma_darken", "equalize",
                    "external_enhancer", "max_retries", "memory_window", "task", "tools",
                    "endpoint", "transport"},
                   "agent");
        read(a, "luma_low", cfg.agent.gates.low);
        read(a, "luma_high", cfg.agent.gates.high);
        read(a, "gamma_brighten", cfg.agent.gamma_brighten);
        read(a, "gamma_darken", cfg.agent.gamma_darken);
        read(a, "equalize", cfg.agent.equalize);
        read(a, "external_enhancer", cfg.agent.external_enhancer);
        read(a, "max_retries", cfg.agent.max_retries);
        read(a, "memory_window", cfg.agent.memory_window);
        read(a, "task", cfg.agent.task);
        read(a, "tools", cfg.agent.tools);
        if (a.contains("endpoint")) {
            const json& e = a["endpoint"];
            check_keys(e, {"host", "port", "path", "timeout_s"}, "agent.endpoint");
            read(e, "host", cfg.endpoint.host);
            read(e, "port", cfg.endpoint.port);
            read(e, "path", cfg.endpoint.path);
            read(e, "timeout_s", cfg.endpoint.timeout_s);
        }
        if (a.contains("transport")) {
            const json& t = a["transport"];
            check_keys(t, {"max_attempts", "backoff_ms"}, "agent.transport");
            read(t, "max_attempts", cfg.agent.transport_retry.max_attempts);
            read(t, "backoff_ms", cfg.agent.transport_retry.backoff_ms);
        }
        if (cfg.agent.max_retries < 0)
            throw std::runtime_error("config: agent.max_retries must be >= 0");
        if (cfg.agent.gates.low >= cfg.agent.gates.high)
            throw std::runtime_error("config: agent.luma_low must be < agent.luma_high");
    }

    if (j.contains("policy")) {
        const json& p = j["policy"];
        check_keys(p, {"pretension"}, "policy");
        if (p.contains("pretension")) {
            const json& arr = p["pretension"];
            if (!arr.is_array() || arr.size() != 5)
                throw std::runtime_error("config: policy.pretension must list 5 ratios");
            for (std::size_t i = 0; i < 5; ++i) cfg.pretension[i] = arr[i].get<double>();
        }
    }
    try {
        cfg.agent.pretension = policy::PretensionTable(cfg.pretension);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
    }

    if (j.contains("stability")) {
        const json& s = j["stability"];
        check_keys(s,
                   {"strike_gain", "threshold", "dt", "max_residual", "k_ratio_free", "baseline",
                    "pretensioned"},
                   "stability");
        read(s, "strike_gain", cfg.stability.strike_gain);
        read(s, "threshold", cfg.stability.threshold);
        read(s, "dt", cfg.stability.dt);
        read(s, "max_residual", cfg.stability.max_residual);
        read(s, "k_ratio_free", cfg.stability.k_ratio_free);
        if (s.contains("baseline"))
            cfg.stability.baseline = read_target(s["baseline"], "stability.baseline");
        if (s.contains("pretensioned"))
            cfg.stability.pretensioned = read_target(s["pretensioned"], "stability.pretensioned");
    }

    if (j.contains("bend")) {
        const json& b = j["bend"];
        check_keys(b,
                   {"segments", "length", "flexural_rigidity", "offset", "slope", "preload",
                    "tension_max", "tension_steps", "gravity", "mass", "base_angle_deg"},
                   "bend");
        read(b, "segments", cfg.bend.segment_count);
        read(b, "length", cfg.bend.length);
        read(b, "flexural_rigidity", cfg.bend.flexural_rigidity);
        read(b, "offset", cfg.bend.tendon_offset);
        read(b, "slope", cfg.bend.tendon_slope);
        read(b, "preload", cfg.bend.preload);
        read(b, "tension_max", cfg.bend_tension_max);
        read(b, "tension_steps", cfg.bend_tension_steps);
        read(b, "gravity", cfg.bend.gravity);
        read(b, "mass", cfg.bend.mass);
        read(b, "base_angle_deg", cfg.bend.base_angle_deg);
    }
    cfg.bend.tension_schedule = bend_schedule(cfg);

    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        check_keys(s, {"points"}, "sweep");
        read(s, "points", cfg.sweep.points);
        if (cfg.sweep.points < 2) throw std::runtime_error("config: sweep.points must be >= 2");
    }

    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace softgrip::config
