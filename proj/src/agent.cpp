#include "softgrip/agent.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include <httplib.h>

namespace softgrip::agent {

using nlohmann::json;

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::enhance: return "enhance";
        case Stage::identify: return "identify";
        case Stage::grasp_area: return "grasp-area";
        case Stage::execute: return "execute";
        case Stage::record: return "record";
        case Stage::adapt: return "adapt";
        case Stage::done: return "done";
    }
    return "unknown";
}

namespace {

Stage stage_from_string(const std::string& name) {
    for (Stage s : {Stage::enhance, Stage::identify, Stage::grasp_area, Stage::execute,
                    Stage::record, Stage::adapt, Stage::done}) {
        if (to_string(s) == name) return s;
    }
    throw SchemaError("unknown stage name: " + name);
}

} // namespace

bool valid_transition(Stage from, Stage to) {
    switch (from) {
        case Stage::enhance: return to == Stage::identify;
        case Stage::identify: return to == Stage::grasp_area || to == Stage::done;
        case Stage::grasp_area: return to == Stage::execute || to == Stage::done;
        case Stage::execute: return to == Stage::record;
        case Stage::record: return to == Stage::done || to == Stage::adapt;
        case Stage::adapt: return to == Stage::execute;
        case Stage::done: return false;
    }
    return false;
}

bool valid_stage_sequence(std::span<const Stage> stages) {
    if (stages.empty()) return false;
    if (stages.front() != Stage::enhance || stages.back() != Stage::done) return false;
    for (std::size_t i = 1; i < stages.size(); ++i) {
        if (!valid_transition(stages[i - 1], stages[i])) return false;
        if (stages[i] == Stage::adapt && stages[i - 1] != Stage::record) return false;
    }
    return true;
}

bool Detection::is_gripper() const {
    std::string lower;
    lower.reserve(label.size());
    for (char c : label) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return lower.find("gripper") != std::string::npos;
}

// ---- base64 ----------------------------------------------------------------

namespace {
constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
    }
    const std::size_t rest = data.size() - i;
    if (rest == 1) {
        const unsigned v = data[i] << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (rest == 2) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    unsigned buffer = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = value_of(c);
        if (v < 0) throw SchemaError("base64: invalid character");
        buffer = (buffer << 6) | static_cast<unsigned>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((buffer >> bits) & 0xFF));
        }
    }
    return out;
}

// ---- vision clients --------------------------------------------------------

MockVisionClient::MockVisionClient(std::filesystem::path fixtures_dir)
    : fixtures_dir_(std::move(fixtures_dir)) {
    if (!std::filesystem::is_directory(fixtures_dir_))
        throw ConfigError("mock vision: fixtures directory not found: " + fixtures_dir_.string());
}

std::string MockVisionClient::query_raw(const VisionRequest& request) {
    const auto bytes = base64_decode(request.image_b64);
    const image::Image img =
        image::parse_pnm(std::string(bytes.begin(), bytes.end()));
    const std::string hash = image::content_hash(img);
    const auto file = fixtures_dir_ / (hash + ".json");
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw ConfigError("mock vision: no fixture " + file.string() + " for image hash " + hash);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

HttpVisionClient::HttpVisionClient(std::string host, int port, std::string path, int timeout_s)
    : host_(std::move(host)), port_(port), path_(std::move(path)), timeout_s_(timeout_s) {}

std::string HttpVisionClient::query_raw(const VisionRequest& request) {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(timeout_s_, 0);
    client.set_read_timeout(timeout_s_, 0);
    auto res = client.Post(path_, to_json_string(request), "application/json");
    if (!res) throw TransportError("vision endpoint unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw TransportError("vision endpoint returned status " + std::to_string(res->status));
    return res->body;
}

std::string to_json_string(const VisionRequest& request) {
    json j;
    j["prompt"] = request.prompt;
    j["image_b64"] = request.image_b64;
    j["tools"] = request.tools;
    return j.dump();
}

namespace {

Rect rect_from_json(const json& arr, int image_w, int image_h, const char* what) {
    if (!arr.is_array() || arr.size() != 4 || !arr[0].is_number_integer())
        throw SchemaError(std::string(what) + ": box must be [x, y, w, h]");
    const Rect rect{arr[0].get<int>(), arr[1].get<int>(), arr[2].get<int>(), arr[3].get<int>()};
    if (!rect.inside(image_w, image_h))
        throw SchemaError(std::string(what) + ": box outside the image bounds");
    return rect;
}

} // namespace

VisionResponse parse_vision_response(const std::string& body, int image_w, int image_h) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("vision response is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("detections") || !j["detections"].is_array())
        throw SchemaError("vision response: missing detections array");

    VisionResponse response;
    for (const json& d : j["detections"]) {
        if (!d.is_object() || !d.contains("label") || !d["label"].is_string() ||
            !d.contains("box") || !d.contains("confidence") || !d["confidence"].is_number())
            throw SchemaError("vision response: detection needs label, box, confidence");
        Detection det;
        det.label = d["label"].get<std::string>();
        det.box = rect_from_json(d["box"], image_w, image_h, "detection");
        det.confidence = d["confidence"].get<double>();
        if (det.confidence < 0.0 || det.confidence > 1.0)
            throw SchemaError("vision response: confidence outside [0, 1]");
        if (d.contains("class") && !d["class"].is_null()) {
            if (!d["class"].is_string())
                throw SchemaError("vision response: class must be a string");
            det.material = policy::material_class_from_tag(d["class"].get<std::string>());
            if (!det.material)
                throw SchemaError("vision response: unknown material class '" +
                                  d["class"].get<std::string>() + "'");
        }
        response.detections.push_back(std::move(det));
    }
    if (j.contains("grasp_box") && !j["grasp_box"].is_null())
        response.grasp_box = rect_from_json(j["grasp_box"], image_w, image_h, "grasp_box");
    if (j.contains("level") && !j["level"].is_null()) {
        if (!j["level"].is_number_integer())
            throw SchemaError("vision response: level must be an integer");
        const int level = j["level"].get<int>();
        if (level < policy::StiffnessLevel::kMin || level > policy::StiffnessLevel::kMax)
            throw SchemaError("vision response: level outside [0, 4]");
        response.level = policy::StiffnessLevel(level);
    }
    return response;
}

VisionResponse query_vision_model(const VisionRequest& request, int image_w, int image_h,
                                  VisionClient& client, const RetryPolicy& retry) {
    int backoff_ms = retry.backoff_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            return parse_vision_response(client.query_raw(request), image_w, image_h);
        } catch (const TransportError&) {
            if (attempt >= retry.max_attempts) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }
}

std::vector<Detection> target_detections(const VisionResponse& response) {
    std::vector<Detection> targets;
    for (const Detection& det : response.detections)
        if (!det.is_gripper()) targets.push_back(det);
    return targets;
}

std::optional<GraspSelection> select_grasp_area(const VisionResponse& response, int image_w,
                                                int image_h) {
    const std::vector<Detection> targets = target_detections(response);
    if (targets.empty()) return std::nullopt;

    const Detection* best = &targets.front();
    for (const Detection& det : targets) {
        if (det.confidence > best->confidence) {
            best = &det;
        } else if (det.confidence == best->confidence) {
            if (det.box.area() > best->box.area() ||
                (det.box.area() == best->box.area() && det.box.x < best->box.x))
                best = &det;
        }
    }

    Rect box;
    if (response.grasp_box) {
        box = *response.grasp_box;
    } else {
        // Central third of the detection box.
        box = Rect{best->box.x + best->box.w / 3, best->box.y + best->box.h / 3,
                   best->box.w - 2 * (best->box.w / 3), best->box.h - 2 * (best->box.h / 3)};
        box.x = std::clamp(box.x, 0, image_w - 1);
        box.y = std::clamp(box.y, 0, image_h - 1);
        box.w = std::min(box.w, image_w - box.x);
        box.h = std::min(box.h, image_h - box.y);
    }
    return GraspSelection{*best, box};
}

std::string build_prompt(const std::string& task, std::span<const std::string> tools,
                         std::span<const std::string> memory, std::size_t memory_window) {
    if (task.empty()) throw std::invalid_argument("build_prompt: task must be nonempty");

    std::string prompt;
    prompt += "## Role\n";
    prompt += "You are the perception and planning assistant for a three-finger tendon-driven "
              "soft gripper with stiffness levels 0 (softest) to 4 (hardest).\n\n";
    prompt += "## Task\n" + task + "\n\n";
    prompt += "## Tools\n";
    if (tools.empty()) {
        prompt += "- (none)\n";
    } else {
        for (const std::string& tool : tools) prompt += "- " + tool + "\n";
    }
    prompt += "\n## Guidelines\n";
    prompt += "- Work through the scene step by step before answering.\n";
    prompt += "- Distinguish the target object from the gripper; never select the gripper.\n";
    prompt += "- Report every detection as label, material class, bounding box, confidence.\n";
    prompt += "- Propose the best grasp area and a stiffness level for the target.\n";

    if (!memory.empty() && memory_window > 0) {
        prompt += "\n## Recent outcomes\n";
        const std::size_t count = std::min(memory_window, memory.size());
        for (std::size_t i = memory.size() - count; i < memory.size(); ++i)
            prompt += "- " + memory[i] + "\n";
    }
    return prompt;
}

// ---- executors and clocks --------------------------------------------------

ScriptedExecutor::ScriptedExecutor(std::vector<ExecutionResult> script)
    : script_(std::move(script)) {
    if (script_.empty())
        throw std::invalid_argument("scripted executor: script must be nonempty");
}

ExecutionResult ScriptedExecutor::execute(const policy::GripPlan&, const Detection&) {
    const ExecutionResult result = script_[std::min(next_, script_.size() - 1)];
    ++next_;
    return result;
}

StochasticExecutor::StochasticExecutor(std::uint64_t seed, policy::StiffnessLevel true_level)
    : state_(seed), true_level_(true_level) {}

ExecutionResult StochasticExecutor::execute(const policy::GripPlan& plan, const Detection&) {
    // splitmix64 keeps runs reproducible across platforms.
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    const double u = static_cast<double>(z >> 11) * 0x1.0p-53;

    const int gap = plan.level.value() - true_level_.value();
    const double p_success = std::max(0.05, 1.0 - 0.45 * std::abs(gap));
    if (u < p_success) return {policy::Outcome::correct, policy::FailureMode::none, false};
    if (gap < 0)
        return {policy::Outcome::abnormal, policy::FailureMode::slip, true_level_.value() >= 3};
    return {policy::Outcome::abnormal, policy::FailureMode::crush, false};
}

std::string SystemClock::now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char out[32];
    std::strftime(out, sizeof(out), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return out;
}

std::string LogicalClock::now() {
    char out[16];
    std::snprintf(out, sizeof(out), "T+%06llu", static_cast<unsigned long long>(ticks_++));
    return out;
}

// ---- episode serialization --------------------------------------------------

namespace {

json plan_to_json(const policy::GripPlan& plan) {
    json j;
    j["actuator"] = plan.pretension.actuator;
    j["box"] = {plan.grasp_box.x, plan.grasp_box.y, plan.grasp_box.w, plan.grasp_box.h};
    j["level"] = plan.level.value();
    j["mode"] = policy::to_string(plan.mode);
    j["ratio"] = plan.pretension.ratio;
    return j;
}

policy::GripPlan plan_from_json(const json& j) {
    policy::GripPlan plan;
    plan.level = policy::StiffnessLevel(j.at("level").get<int>());
    plan.pretension = {j.at("ratio").get<double>(), j.at("actuator").get<double>()};
    const auto& box = j.at("box");
    plan.grasp_box = Rect{box.at(0).get<int>(), box.at(1).get<int>(), box.at(2).get<int>(),
                          box.at(3).get<int>()};
    const std::string mode = j.at("mode").get<std::string>();
    for (policy::GripMode m : {policy::GripMode::pinch, policy::GripMode::envelope,
                               policy::GripMode::hook, policy::GripMode::lift}) {
        if (policy::to_string(m) == mode) plan.mode = m;
    }
    return plan;
}

json outcome_to_json(const policy::OutcomeRecord& rec) {
    json j;
    j["attempted"] = rec.attempted.value();
    j["cue"] = rec.hard_surface_cue;
    j["episode"] = rec.episode_id;
    j["failure"] = policy::to_string(rec.failure);
    j["label"] = rec.label;
    j["outcome"] = policy::to_string(rec.outcome);
    j["t"] = rec.timestamp;
    return j;
}

policy::OutcomeRecord outcome_from_json(const json& j) {
    policy::OutcomeRecord rec;
    rec.label = j.at("label").get<std::string>();
    rec.attempted = policy::StiffnessLevel(j.at("attempted").get<int>());
    rec.outcome = j.at("outcome").get<std::string>() == "correct" ? policy::Outcome::correct
                                                                  : policy::Outcome::abnormal;
    const std::string failure = j.at("failure").get<std::string>();
    rec.failure = failure == "none" ? policy::FailureMode::none
                  : failure == "slip" ? policy::FailureMode::slip
                                      : policy::FailureMode::crush;
    rec.hard_surface_cue = j.at("cue").get<bool>();
    rec.timestamp = j.at("t").get<std::string>();
    rec.episode_id = j.at("episode").get<std::string>();
    rec.validate();
    return rec;
}

} // namespace

std::string Episode::to_json_line() const {
    json j;
    j["abort_reason"] = abort_reason;
    json enh;
    enh["applied"] = enhancement.applied;
    enh["equalize"] = enhancement.equalize;
    enh["fallback"] = enhancement.fallback;
    enh["gamma"] = enhancement.gamma;
    enh["mode"] = image::to_string(enhancement.mode);
    j["enhancement"] = enh;
    j["final_status"] = final_status;
    j["id"] = id;
    j["image_ref"] = image_ref;
    json outs = json::array();
    for (const auto& rec : outcomes) outs.push_back(outcome_to_json(rec));
    j["outcomes"] = outs;
    j["plan"] = plan ? plan_to_json(*plan) : json(nullptr);
    j["retry_count"] = retry_count;
    json stage_list = json::array();
    for (const StageEvent& ev : stages)
        stage_list.push_back({{"stage", to_string(ev.stage)}, {"t", ev.timestamp}});
    j["stages"] = stage_list;
    return j.dump();
}

Episode Episode::from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("episode line is not valid JSON: ") + e.what());
    }
    Episode ep;
    ep.abort_reason = j.at("abort_reason").get<std::string>();
    const json& enh = j.at("enhancement");
    ep.enhancement.applied = enh.at("applied").get<bool>();
    ep.enhancement.equalize = enh.at("equalize").get<bool>();
    ep.enhancement.fallback = enh.at("fallback").get<bool>();
    ep.enhancement.gamma = enh.at("gamma").get<double>();
    const std::string mode = enh.at("mode").get<std::string>();
    ep.enhancement.mode = mode == "brighten" ? image::EnhanceMode::brighten
                          : mode == "darken" ? image::EnhanceMode::darken
                                             : image::EnhanceMode::none;
    ep.final_status = j.at("final_status").get<std::string>();
    ep.id = j.at("id").get<std::string>();
    ep.image_ref = j.at("image_ref").get<std::string>();
    for (const json& o : j.at("outcomes")) ep.outcomes.push_back(outcome_from_json(o));
    if (!j.at("plan").is_null()) ep.plan = plan_from_json(j.at("plan"));
    ep.retry_count = j.at("retry_count").get<int>();
    for (const json& s : j.at("stages"))
        ep.stages.push_back({stage_from_string(s.at("stage").get<std::string>()),
                             s.at("t").get<std::string>()});
    return ep;
}

EpisodeLedger::EpisodeLedger(std::filesystem::path file) : file_(std::move(file)) {}

namespace {

json ledger_header() {
    json j;
    j["schema"] = "softgrip.episodes";
    j["version"] = EpisodeLedger::kSchemaVersion;
    return j;
}

} // namespace

void EpisodeLedger::append(const Episode& episode) {
    const bool fresh = !std::filesystem::exists(file_);
    std::ofstream out(file_, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("ledger: cannot open " + file_.string());
    if (fresh) out << ledger_header().dump() << '\n';
    out << episode.to_json_line() << '\n';
    if (!out) throw std::runtime_error("ledger: write failed for " + file_.string());
}

std::vector<Episode> EpisodeLedger::read_all() const {
    std::ifstream in(file_, std::ios::binary);
    if (!in) throw std::runtime_error("ledger: cannot open " + file_.string());
    std::string line;
    if (!std::getline(in, line)) return {};
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception&) {
        throw SchemaError("ledger: malformed header line");
    }
    if (header.value("schema", "") != "softgrip.episodes" ||
        header.value("version", 0) != kSchemaVersion)
        throw SchemaError("ledger: unsupported schema header");
    std::vector<Episode> episodes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        episodes.push_back(Episode::from_json_line(line));
    }
    return episodes;
}

OutcomeLedger::OutcomeLedger(std::filesystem::path file) : file_(std::move(file)) {}

void OutcomeLedger::append(const policy::OutcomeRecord& record) {
    record.validate();
    const bool fresh = !std::filesystem::exists(file_);
    std::ofstream out(file_, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("outcome ledger: cannot open " + file_.string());
    if (fresh) {
        json header;
        header["schema"] = "softgrip.outcomes";
        header["version"] = kSchemaVersion;
        out << header.dump() << '\n';
    }
    out << outcome_to_json(record).dump() << '\n';
    if (!out) throw std::runtime_error("outcome ledger: write failed for " + file_.string());
}

std::vector<policy::OutcomeRecord> OutcomeLedger::read_all() const {
    std::ifstream in(file_, std::ios::binary);
    if (!in) throw std::runtime_error("outcome ledger: cannot open " + file_.string());
    std::string line;
    if (!std::getline(in, line)) return {};
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception&) {
        throw SchemaError("outcome ledger: malformed header line");
    }
    if (header.value("schema", "") != "softgrip.outcomes" ||
        header.value("version", 0) != kSchemaVersion)
        throw SchemaError("outcome ledger: unsupported schema header");
    std::vector<policy::OutcomeRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            records.push_back(outcome_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw SchemaError(std::string("outcome ledger: bad record: ") + e.what());
        }
    }
    return records;
}

std::string summarize(const Episode& episode) {
    if (episode.outcomes.empty()) return episode.image_ref + ": " + episode.final_status;
    std::string out = episode.outcomes.front().label + ":";
    for (const auto& rec : episode.outcomes) {
        out += " ";
        out += rec.outcome == policy::Outcome::correct ? "correct" : policy::to_string(rec.failure);
        out += " at level " + std::to_string(rec.attempted.value()) + ";";
    }
    out += " final " + episode.final_status;
    return out;
}

// ---- workflow ----------------------------------------------------------------

namespace {

policy::GripMode choose_mode(policy::StiffnessLevel level, const Rect& box, int image_w,
                             int image_h) {
    if (level.value() == policy::StiffnessLevel::kMax) return policy::GripMode::lift;
    const long long image_area = static_cast<long long>(image_w) * image_h;
    if (box.area() * 4 >= image_area) return policy::GripMode::envelope;
    return policy::GripMode::pinch;
}

} // namespace

Episode run_episode(const image::Image& img, const AgentConfig& config, AgentContext& ctx) {
    img.validate();
    if (config.max_retries < 0) throw std::invalid_argument("agent: max_retries must be >= 0");

    Episode ep;
    ep.id = ctx.episode_id;
    ep.image_ref = ctx.image_ref;

    auto log_stage = [&](Stage stage) {
        if (!ep.stages.empty() && !valid_transition(ep.stages.back().stage, stage))
            throw std::logic_error("agent: invalid stage transition");
        ep.stages.push_back({stage, ctx.clock.now()});
    };
    auto finish = [&](const std::string& status, const std::string& reason = "") {
        ep.final_status = status;
        ep.abort_reason = reason;
        log_stage(Stage::done);
        if (ctx.ledger) ctx.ledger->append(ep);
        return ep;
    };

    // Enhance: gate on the luma statistics, then apply the built-in filter or
    // the external hook (falling back to the built-in on failure).
    log_stage(Stage::enhance);
    const image::LumaStats stats = image::luminance_stats(img);
    const image::EnhanceMode mode = image::should_enhance(stats, config.gates);
    image::Image work = img;
    if (mode != image::EnhanceMode::none) {
        const image::EnhanceParams params{
            mode == image::EnhanceMode::brighten ? config.gamma_brighten : config.gamma_darken,
            config.equalize};
        ep.enhancement = {true, mode, params.gamma, params.equalize, false};
        bool done = false;
        if (!config.external_enhancer.empty()) {
            const image::ExternalResult ext =
                image::run_external_enhancer(config.external_enhancer, img);
            if (ext.ok) {
                work = ext.image;
                done = true;
            } else {
                ep.enhancement.fallback = true;
            }
        }
        if (!done) work = image::enhance(img, mode, params);
    }

    // Identify: prompt the vision model with the (possibly enhanced) image.
    log_stage(Stage::identify);
    const std::string prompt =
        build_prompt(config.task, config.tools, ctx.memory, config.memory_window);
    const std::string pnm = image::serialize_pnm(work);
    const VisionRequest request{
        prompt,
        base64_encode({reinterpret_cast<const std::uint8_t*>(pnm.data()), pnm.size()}),
        config.tools};
    VisionResponse response;
    try {
        response = query_vision_model(request, work.width, work.height, ctx.vision,
                                      config.transport_retry);
    } catch (const TransportError& e) {
        return finish("aborted", std::string("transport: ") + e.what());
    } catch (const SchemaError& e) {
        return finish("aborted", std::string("schema: ") + e.what());
    }

    const auto selection = select_grasp_area(response, work.width, work.height);
    if (!selection) return finish("no-target");

    log_stage(Stage::grasp_area);
    const policy::Lexicon* lexicon = ctx.lexicon;
    std::optional<policy::StiffnessLevel> level = response.level;
    if (!level) {
        level = lexicon ? policy::classify_material(selection->target.label,
                                                    selection->target.material, *lexicon)
                        : policy::classify_material(selection->target.label,
                                                    selection->target.material);
    }
    if (!level) return finish("aborted", "unclassified material: " + selection->target.label);

    policy::GripPlan plan;
    plan.level = *level;
    plan.pretension = policy::level_to_pretension(plan.level, config.pretension);
    plan.grasp_box = selection->box;
    plan.mode = choose_mode(plan.level, selection->box, work.width, work.height);

    // Execute / Record / Adapt loop.
    for (;;) {
        log_stage(Stage::execute);
        const ExecutionResult result = ctx.executor.execute(plan, selection->target);

        log_stage(Stage::record);
        policy::OutcomeRecord rec;
        rec.label = selection->target.label;
        rec.attempted = plan.level;
        rec.outcome = result.outcome;
        rec.failure = result.failure;
        rec.hard_surface_cue = result.hard_surface_cue;
        rec.timestamp = ctx.clock.now();
        rec.episode_id = ep.id;
        rec.validate();
        ep.outcomes.push_back(rec);

        if (result.outcome == policy::Outcome::correct) {
            ep.plan = plan;
            return finish("correct");
        }
        if (ep.retry_count >= config.max_retries) {
            ep.plan = plan;
            return finish("abnormal");
        }

        log_stage(Stage::adapt);
        const std::span<const policy::OutcomeRecord> history{ep.outcomes.data(),
                                                             ep.outcomes.size() - 1};
        plan.level = policy::adapt(history, rec);
        plan.pretension = policy::level_to_pretension(plan.level, config.pretension);
        plan.mode = choose_mode(plan.level, plan.grasp_box, work.width, work.height);
        ++ep.retry_count;
    }
}

} // namespace softgrip::agent
